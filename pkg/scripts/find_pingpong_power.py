"""Search for the pinned ping-pong data of the unipotent-block free group.

Scans powers k and chart-ball radii until the two-vertex cofinite system
certifies, and reports the margin landscape. The values pinned in
flagdyn.systems (JORDAN_POWER, JORDAN_BALL_RADIUS, JORDAN_EPSILON) came
from this search.
"""

import argparse
import time

import flagdyn.systems as S
from flagdyn.automaton import CompatibleSystem, verify_compatibility


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--powers", type=int, nargs="*", default=[8, 12, 16, 20, 24, 28])
    ap.add_argument("--radii", type=float, nargs="*", default=[0.15, 0.2, 0.25, 0.3])
    ap.add_argument("--epsilon", type=float, default=0.02)
    ap.add_argument("--truncation", type=int, default=16)
    args = ap.parse_args()

    best = None
    for k in args.powers:
        for radius in args.radii:
            t0 = time.time()
            rho = S.jordan_presentation(0.0, "fixed", k=k, truncation=args.truncation)
            graph = S.jordan_graph(epsilon=args.epsilon)
            system = CompatibleSystem(domains=S.jordan_domains(radius), epsilon=args.epsilon)
            cert = verify_compatibility(graph, system, rho, element_cap=32,
                                        n_boundary=64, n_interior=24)
            mark = "PASS" if cert.ok else "fail"
            print(f"k={k:3d} radius={radius:.2f} eps={args.epsilon} "
                  f"min_margin={cert.min_margin:+.4f} [{mark}] ({time.time()-t0:.1f}s)")
            if cert.ok and (best is None or cert.min_margin > best[0]):
                best = (cert.min_margin, k, radius)
    if best:
        print(f"\nbest: k={best[1]} radius={best[2]} margin={best[0]:.4f}")
        print(f"pinned in flagdyn.systems: k={S.JORDAN_POWER} "
              f"radius={S.JORDAN_BALL_RADIUS} eps={S.JORDAN_EPSILON}")
    else:
        print("\nno certifying parameters in the scanned range")


if __name__ == "__main__":
    main()
