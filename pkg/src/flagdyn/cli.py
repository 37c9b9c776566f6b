"""Command-line front end.

Exit codes: 0 pass, 1 certification/criterion failure, 2 usage or config
error. Machine-readable outputs embed the config hash and seeds, and are
byte-identical across runs with the same config and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .automaton import check_divergence, enumerate_paths, verify_compatibility
from .config import RunConfig
from .domains import zimmer_metric
from .dynamics import contracting_limit, limit_set_sample, shrink_rates
from .errors import ConfigError, FlagdynError
from .linalg import flag_divergent, gap_trace
from .projgeom import ProjPoint, chart_point
from .synth import SynthesisParams, synthesize_rp1
from .words import parse_word


def _fmt(x):
    return f"{x:.17g}"


def _header(cfg: RunConfig, seed, extra=None):
    lines = [
        f"tool flagdyn {__version__}",
        f"config {cfg.path or '<inline>'} hash {cfg.config_hash}",
        f"seed {seed}",
        f"budgets {json.dumps(cfg.budgets, sort_keys=True)}",
    ]
    if extra:
        lines.extend(extra)
    return lines


def _write(outdir: Path, name: str, text: str):
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / name
    path.write_text(text)
    return path


def _run_certify(cfg: RunConfig, seed: int, outdir: Path, threads: int = 1):
    rho = cfg.presentation()
    graph = cfg.graph()
    system = cfg.system(epsilon=graph.epsilon)
    sep_failures = cfg.check_separation(system)
    cert = verify_compatibility(
        graph, system, rho,
        n_boundary=cfg.budgets["boundary_samples"],
        n_interior=cfg.budgets["interior_samples"],
        element_cap=cfg.budgets["element_cap"],
        seed=seed,
        metadata={"config_hash": cfg.config_hash, "seed": seed, "threads": threads},
    )
    if cert.ok:
        cert.divergence = check_divergence(graph, system, rho, seed=seed)
    report = _header(cfg, seed, [f"epsilon {_fmt(graph.epsilon)}"])
    report.append(f"records {len(cert.records)}  min margin {_fmt(cert.min_margin)}")
    for r in cert.records:
        report.append("  " + r.describe())
    for t in cert.tails:
        report.append(
            f"  tail {t.vertex}: margins nondecreasing = {t.margins_nondecreasing}, "
            f"diameters nonincreasing = {t.diameters_nonincreasing} "
            f"({t.checked} elements checked; heuristic, disclosed)"
        )
    if sep_failures:
        report.append("separation table FAILURES:")
        for a, b, want, got in sep_failures:
            report.append(f"  {a} vs {b}: required {want}, measured {_fmt(got)}")
    inconclusive = [d for d in cert.divergence if not d.conclusive]
    if cert.divergence:
        report.append(
            f"divergence witnesses: {len(cert.divergence) - len(inconclusive)}"
            f"/{len(cert.divergence)} conclusive"
        )
    verdict = cert.ok and not sep_failures
    report.append(f"verdict {'PASS' if verdict else 'FAIL'}")
    if not verdict and cert.first_failure() is not None:
        first = cert.first_failure()
        desc = first.describe() if hasattr(first, "describe") else f"tail {first.vertex}"
        report.append(f"first failing record: {desc}")
    _write(outdir, "certificate_report.txt", "\n".join(report) + "\n")
    _write(outdir, "certificate.json", json.dumps(cert.to_dict(), indent=1, sort_keys=True))
    return verdict, cert, (rho, graph, system)


def cmd_certify(args):
    cfg = RunConfig.load(args.config)
    seed = args.seed if args.seed is not None else cfg.seeds["master"]
    ok, cert, _ = _run_certify(cfg, seed, Path(args.out), args.threads)
    first = cert.first_failure()
    if ok:
        print(f"PASS min margin {_fmt(cert.min_margin)}")
        return 0
    desc = first.describe() if hasattr(first, "describe") else getattr(first, "vertex", "?")
    print(f"FAIL first failing record: {desc}")
    return 1


def cmd_limitset(args):
    cfg = RunConfig.load(args.config)
    seed = args.seed if args.seed is not None else cfg.seeds["master"]
    outdir = Path(args.out)
    if args.skip_certify:
        rho, graph = cfg.presentation(), cfg.graph()
        system = cfg.system(epsilon=graph.epsilon)
        cert = None
    else:
        ok, cert, (rho, graph, system) = _run_certify(cfg, seed, outdir, args.threads)
        if not ok:
            print("refusing to sample an uncertified system (pass --skip-certify to override)")
            return 1
    depth = cfg.budgets["depth"]
    count = cfg.budgets["path_count"]
    cloud = limit_set_sample(graph, rho, system, depth, count, seed=seed,
                             certificate=cert,
                             convergence_tol=cfg.tolerances["convergence"])
    rows = [
        "# " + " | ".join(_header(cfg, seed, [f"depth {depth}", f"count {count}"])),
        ",".join([f"x{i}" for i in range(cfg.dimension)] + ["path_code", "radius_bound"]),
    ]
    for p, code, rb in cloud.points:
        rows.append(",".join([_fmt(c) for c in p.coords] + [code, _fmt(rb)]))
    path = _write(outdir, "limit_set.csv", "\n".join(rows) + "\n")
    print(f"wrote {path} ({len(cloud.points)} points)")
    if args.svg:
        svg = _render_svg(cfg, cloud)
        path = _write(outdir, "limit_set.svg", svg)
        print(f"wrote {path}")
    return 0


def _render_svg(cfg, cloud, size=640):
    """Scatter plot; the chart projection is declared in the header comment."""
    pts = []
    if cfg.dimension == 2:
        projection = "angle doubling: (cos 2a, sin 2a) for point angle a"
        for p, _, _ in cloud.points:
            a = math.atan2(p.coords[1], p.coords[0])
            pts.append((math.cos(2 * a), math.sin(2 * a)))
    else:
        projection = "affine chart: (x1/x0, x2/x0), points with |x0| < 1e-6 dropped"
        for p, _, _ in cloud.points:
            if abs(p.coords[0]) > 1e-6:
                pts.append((p.coords[1] / p.coords[0], p.coords[2] / p.coords[0]))
    if pts:
        xs, ys = zip(*pts)
        lo, hi = min(min(xs), min(ys)) - 0.1, max(max(xs), max(ys)) + 0.1
    else:
        lo, hi = -1.1, 1.1
    scale = size / (hi - lo)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
        f"<!-- flagdyn {__version__} limit set; projection: {projection}; "
        f"config hash {cfg.config_hash} -->",
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for x, y in pts:
        cx = (x - lo) * scale
        cy = size - (y - lo) * scale
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="1.5" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out)


def cmd_rates(args):
    cfg = RunConfig.load(args.config)
    seed = args.seed if args.seed is not None else cfg.seeds["master"]
    outdir = Path(args.out)
    ok, cert, (rho, graph, system) = _run_certify(cfg, seed, outdir, args.threads)
    if not ok:
        print("certification failed; no rates computed")
        return 1
    spec = cfg.raw.get("rates", {})
    depth = int(spec.get("depth", cfg.budgets["depth"]))
    n_paths = int(spec.get("paths", 12))
    dr = spec.get("depth_range", [2, depth])
    paths, _ = enumerate_paths(graph, depth, "random", rho, seed=seed, cap=n_paths)
    results = [contracting_limit(p, rho, system, certificate=cert) for p in paths]
    try:
        rep = shrink_rates(results, depth_range=tuple(dr))
    except FlagdynError as exc:
        print(f"rate fit rejected: {exc}")
        return 1
    report = _header(cfg, seed) + [
        f"paths {rep.n_paths}  depth range {rep.depth_range}",
        f"lambda1 {_fmt(rep.lambda1)}",
        f"lambda2 {_fmt(rep.lambda2)}",
        f"r_squared {_fmt(rep.r_squared)}",
        "bound: diam(n) <= lambda1 * exp(-lambda2 * n) for all recorded depths",
    ]
    _write(outdir, "rates.txt", "\n".join(report) + "\n")
    print(f"lambda2 {_fmt(rep.lambda2)} (R^2 {rep.r_squared:.4f})")
    return 0


def cmd_probe(args):
    cfg = RunConfig.load(args.config)
    seed = args.seed if args.seed is not None else cfg.seeds["master"]
    outdir = Path(args.out)
    spec = cfg.raw.get("probe")
    if not spec or "t_grid" not in spec:
        raise ConfigError("probe command needs a probe section with a t_grid")
    graph = cfg.graph()
    system = cfg.system(epsilon=graph.epsilon)
    from .automaton import peripheral_stability_probe

    results, first_fail = peripheral_stability_probe(
        cfg.family(), graph, system, spec["t_grid"],
        n_boundary=cfg.budgets["boundary_samples"],
        n_interior=cfg.budgets["interior_samples"],
        element_cap=cfg.budgets["element_cap"],
        seed=seed,
    )
    report = _header(cfg, seed)
    for t, cert in results:
        line = f"t = {_fmt(t)}: {'pass' if cert.ok else 'FAIL'} (min margin {_fmt(cert.min_margin)})"
        if not cert.ok and cert.first_failure() is not None:
            f = cert.first_failure()
            line += "  first failure: " + (
                f.describe() if hasattr(f, "describe") else f"tail {f.vertex}"
            )
        report.append(line)
    report.append(f"first failing t: {first_fail}")
    _write(outdir, "probe.txt", "\n".join(report) + "\n")
    print(f"first failing t: {first_fail}")
    return 0 if first_fail is None else 1


def cmd_synthesize(args):
    cfg = RunConfig.load(args.config)
    seed = args.seed if args.seed is not None else cfg.seeds["master"]
    outdir = Path(args.out)
    if cfg.dimension != 2:
        raise ConfigError("synthesis requires dimension 2")
    rho = cfg.presentation()
    spec = cfg.raw.get("synthesis", {})
    params = SynthesisParams(**{k: v for k, v in spec.items()})
    res = synthesize_rp1(rho, params)
    cert = verify_compatibility(
        res.graph, res.system, rho,
        element_cap=cfg.budgets["element_cap"], seed=seed,
        metadata={"config_hash": cfg.config_hash, "seed": seed},
    )
    n_par = sum(1 for v in res.graph.vertices.values() if not hasattr(v, "word"))
    report = _header(cfg, seed) + [
        f"vertices {len(res.graph.vertices)} (parabolic {n_par})",
        f"edges {len(res.graph.edges)}",
        f"epsilon {_fmt(res.graph.epsilon)}",
        f"certificate: {'PASS' if cert.ok else 'FAIL'} min margin {_fmt(cert.min_margin)}",
    ]
    _write(outdir, "synthesis.txt", "\n".join(report) + "\n")
    graph_json = {
        "vertices": [
            {
                "id": vid,
                **(
                    {"type": "singleton", "word": _word_text(label.word)}
                    if hasattr(label, "word")
                    else {
                        "type": "parabolic",
                        "peripheral": label.peripheral,
                        "coset_word": _word_text(label.coset_word),
                        "min_power": label.exclude_below,
                    }
                ),
            }
            for vid, label in sorted(res.graph.vertices.items())
        ],
        "edges": sorted([list(e) for e in res.graph.edges]),
        "epsilon": res.graph.epsilon,
        "boundary_points": {v: res.boundary_points[v] for v in sorted(res.boundary_points)},
        "certificate_pass": cert.ok,
        "config_hash": cfg.config_hash,
    }
    _write(outdir, "synthesis.json", json.dumps(graph_json, indent=1, sort_keys=True))
    print(
        f"synthesized {len(res.graph.vertices)} vertices / {len(res.graph.edges)} edges; "
        f"certificate {'PASS' if cert.ok else 'FAIL'}"
    )
    return 0 if cert.ok else 1


def _word_text(word):
    from .words import word_str

    return "" if not word else word_str(word)


def cmd_gaps(args):
    cfg = RunConfig.load(args.config)
    seed = args.seed if args.seed is not None else cfg.seeds["master"]
    outdir = Path(args.out)
    spec = cfg.raw.get("gaps")
    if not spec:
        raise ConfigError("gaps command needs a gaps section ({word, count, k})")
    rho = cfg.presentation()
    base = rho.evaluate(parse_word(spec["word"]))
    count = int(spec.get("count", 100))
    k = int(spec.get("k", 1))
    threshold = float(spec.get("threshold", 5.0))
    seq = []
    cur = base
    for _ in range(count):
        seq.append(cur)
        cur = cur @ base
    trace = gap_trace(seq, k)
    flagged = flag_divergent(trace, threshold)
    rows = ["# " + " | ".join(_header(cfg, seed, [f"word {spec['word']}", f"k {k}"])),
            "n,gap"]
    rows += [f"{n+1},{_fmt(g)}" for n, g in enumerate(trace)]
    _write(outdir, "gaps.csv", "\n".join(rows) + "\n")
    report = _header(cfg, seed) + [
        f"word {spec['word']}  k {k}  count {count}",
        f"final gap {_fmt(trace[-1])}",
        f"flagged divergent at threshold {threshold}: {flagged}",
    ]
    _write(outdir, "gaps.txt", "\n".join(report) + "\n")
    print(f"final gap {_fmt(trace[-1])}; divergent flag {flagged}")
    return 0


def cmd_hilbert(args):
    if args.interval is not None:
        a, b = args.interval
        if not b > a:
            raise ConfigError("interval must satisfy a < b")
        from .projgeom import ProjHyperplane

        h = ProjHyperplane([0.0, 1.0])
        from .domains import ChartBall

        omega = ChartBall(h, [(a + b) / 2], (b - a) / 2)
        x = chart_point(h, [args.points[0]])
        y = chart_point(h, [args.points[1]])
    else:
        cfg = RunConfig.load(args.config)
        spec = cfg.raw.get("hilbert")
        if not spec:
            raise ConfigError("hilbert command needs a hilbert section or --interval")
        omega = cfg.domain(spec["domain"])
        x = ProjPoint(np.asarray(spec["x"], dtype=float))
        y = ProjPoint(np.asarray(spec["y"], dtype=float))
    val = zimmer_metric(omega, x, y, budget=4096)
    exact = "exact" if omega.exact_metric else "sampled lower bound"
    print(f"{_fmt(val)}  ({exact})")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="flagdyn",
        description="certify ping-pong dynamics of matrix groups on projective spaces",
    )
    ap.add_argument("--version", action="version", version=f"flagdyn {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="path to a JSON run config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1,
                       help="parallelism knob (reductions stay order-deterministic)")
        p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("certify", help="verify all compatibility inclusions")
    common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("limitset", help="sample the limit set via certified paths")
    common(p)
    p.add_argument("--skip-certify", action="store_true",
                   help="sample without re-certifying (at your own risk)")
    p.add_argument("--svg", action="store_true", help="also render an SVG scatter")
    p.set_defaults(func=cmd_limitset)

    p = sub.add_parser("rates", help="fit the exponential shrink rate of path images")
    common(p)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("probe", help="re-certify a deformation family over a t grid")
    common(p)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("synthesize", help="build an automaton from circle dynamics")
    common(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("gaps", help="singular value gap trace of powers of a word")
    common(p)
    p.set_defaults(func=cmd_gaps)

    p = sub.add_parser("hilbert", help="cross-ratio metric between two domain points")
    common(p, needs_config=False)
    p.add_argument("--config", default=None, help="config with a hilbert section")
    p.add_argument("--interval", nargs=2, type=float, default=None,
                   metavar=("A", "B"), help="interval domain on the projective line")
    p.add_argument("--points", nargs=2, type=float, default=None,
                   metavar=("X", "Y"), help="chart coordinates of the two points")
    p.set_defaults(func=cmd_hilbert)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FlagdynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
