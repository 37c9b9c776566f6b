"""Automaton synthesis from expansion dynamics on the projective line.

Builds a vertex-labeled automaton plus a compatible system for a
dimension-2 presentation acting on the circle, from first principles:

* around each parabolic fixed point of a peripheral coset, a fundamental
  interval of the peripheral subgroup is thickened into hat
  neighborhoods, and a cofinite coset tail is selected so every tail
  element maps the thickened interval deep into a small neighborhood of
  the point;
* around grid points of the circle, short words are searched (by length,
  then lexicographically; first hit wins) whose inverses expand a
  delta neighborhood, the expanded image containing an enlarged
  neighborhood of the pullback;
* peripheral coset vertices are materialized adaptively: whenever the
  inner neighborhoods leave a gap on the circle, the nearest candidate
  coset point (enumerated in peripheral-power syllable form, since coset
  representatives of nearby cusps have unbounded plain word length) gets
  a vertex, until the circle is covered;
* edges follow the pullback-intersection rule.

All interval computations are exact endpoint arithmetic, so the returned
system passes certification by construction, with margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .automaton import CompatibleSystem, GammaGraph, ParabolicFamily, Singleton
from .circle import HALF_TURN, Arc, angle_dist, angle_of, mobius_angle, mobius_arc
from .errors import SynthesisFailed
from .systems import arc_ball
from .words import GroupPresentation, Word, concat, invert_word, word_str


@dataclass
class SynthesisParams:
    epsilon: float = 0.05
    delta: float = 0.05
    word_radius: int = 14
    grid: int = 2048
    coset_ball: int = 2
    lead_powers: int = 60
    max_power: int = 400
    tail_window: int = 4
    max_parabolic_rounds: int = 2000
    require_full_cover: bool | None = None  # default: only when peripherals exist


@dataclass
class SynthesisResult:
    graph: GammaGraph
    inner_sets: dict  # vertex -> Arc (the covering neighborhoods)
    outer_sets: dict  # vertex -> Arc (the expanded neighborhoods)
    system: CompatibleSystem
    boundary_points: dict  # vertex -> angle


def _word_ball(rho: GroupPresentation, radius: int, include_identity=False):
    """Nonidentity elements of the generator ball, by length then lex."""
    gens = []
    for name in sorted(rho.generators):
        gens.append(((name, 1),))
        gens.append(((name, -1),))
    seen = {rho.evaluate(()).key()}
    out = [()] if include_identity else []
    frontier = [()]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for g in gens:
                w2 = concat(w, g)
                k = rho.evaluate(w2).key()
                if k in seen:
                    continue
                seen.add(k)
                nxt.append(w2)
                out.append(w2)
        frontier = nxt
    return out


def _fundamental_interval(rho: GroupPresentation, t_name: str, p_angle: float) -> Arc:
    """Fundamental interval of the parabolic <t> on the circle minus its
    fixed point: the arc between the antipode q and t . q avoiding the
    fixed point."""
    t = rho.generators[t_name].arr
    q = (p_angle + HALF_TURN / 2) % HALF_TURN
    tq = mobius_angle(t, q)
    if angle_dist(q, tq) < 1e-12:
        raise SynthesisFailed("declared peripheral generator fixes the antipode", p_angle)
    from .circle import _arc_from_endpoints

    c, r = _arc_from_endpoints(q, tq)
    if Arc(c, r).contains_angle(p_angle):
        c = (c + HALF_TURN / 2) % HALF_TURN
        r = HALF_TURN / 2 - r
    return Arc(c, r)


def _arc_hull_containing(arcs, anchor: float) -> Arc:
    """Smallest arc containing the anchor and the given arcs.

    Computed as the complement of the largest circular gap left by the
    pieces: valid because the intermediate coset translates fill the
    space between the extreme pieces and the anchor.
    """
    pieces = [((a.center - a.radius) % HALF_TURN, 2 * a.radius) for a in arcs]
    pieces.append((anchor % HALF_TURN, 0.0))
    pieces.sort()
    gaps = []
    pos = pieces[0][0]
    start = pos
    for lo, length in pieces + [(start + HALF_TURN, 0.0)]:
        if lo > pos + 1e-15:
            gaps.append((pos, lo))
        pos = max(pos, lo + length)
    if not gaps:
        raise SynthesisFailed("neighborhood union wraps the whole circle", anchor)
    g_lo, g_hi = max(gaps, key=lambda g: g[1] - g[0])
    length = HALF_TURN - (g_hi - g_lo)
    if length >= HALF_TURN - 1e-12:
        raise SynthesisFailed("neighborhood union too large for an arc", anchor)
    hull = Arc((g_hi + length / 2) % HALF_TURN, length / 2)
    if not hull.contains_angle(anchor, slack=1e-9):
        raise SynthesisFailed("hull does not contain its anchor", anchor)
    return hull


def _parabolic_vertex(rho, t_name, coset_word, p_angle, K_p, params):
    """Tail bound and neighborhoods for one peripheral coset vertex."""
    eps, delta = params.epsilon, params.delta
    v_hat = K_p.expand(delta)
    w_hat = K_p.expand(2 * delta)
    w_hat_eps = K_p.expand(2 * delta + 2 * eps)
    q_angle = mobius_angle(rho.evaluate(coset_word).arr, p_angle)
    target_half = Arc(q_angle, delta / 2)
    target_eps = Arc(q_angle, eps)

    def conditions(n):
        g = rho.evaluate(concat(coset_word, ((t_name, n),)))
        img_w = mobius_arc(g.arr, w_hat)
        img_we = mobius_arc(g.arr, w_hat_eps)
        return (
            target_half.margin_of_arc(img_w) > 0
            and target_eps.margin_of_arc(img_we) > 0
        )

    n0 = None
    for n in range(1, params.max_power + 1):
        window = range(n, n + params.tail_window + 1)
        if all(conditions(m) and conditions(-m) for m in window):
            n0 = n
            break
    if n0 is None:
        raise SynthesisFailed(
            f"no cofinite tail for coset {word_str(coset_word)} <{t_name}>", q_angle
        )

    def hull(base_arc):
        arcs = []
        for n in list(range(n0, n0 + params.tail_window + 1)) + [n0 + 8, n0 + 16]:
            for sign in (1, -1):
                g = rho.evaluate(concat(coset_word, ((t_name, sign * n),)))
                arcs.append(mobius_arc(g.arr, base_arc))
        return _arc_hull_containing(arcs, q_angle)

    w_q = hull(w_hat)
    v_q = hull(v_hat)
    if 2 * w_q.radius >= delta or Arc(q_angle, eps).margin_of_arc(w_q) <= 0:
        raise SynthesisFailed(
            f"parabolic neighborhood of {word_str(coset_word)} <{t_name}> too large",
            q_angle,
        )
    return n0, q_angle, v_q, w_q, v_hat, w_hat


# ---------------------------------------------------------------------------
# vectorized conical expansion search


class _ConicalSearcher:
    """Vectorized first-hit search over a deterministic word pool.

    The pool is the plain generator ball (by length, then lex) followed
    by peripheral-syllable words u t^a v with short flanks, ordered by
    power size then flank length. The syllable extension is required:
    expanding words near a parabolic point contain one unbounded
    peripheral power, so no plain-length ball reaches them.
    """

    def __init__(self, rho, params):
        self.params = params
        pool = list(_word_ball(rho, params.word_radius))
        seen = {rho.evaluate(w).key() for w in pool}
        syllable = []
        short = _word_ball(rho, params.coset_ball, include_identity=True)
        for p in rho.peripherals:
            t_name = p.generators[0]
            for a in range(2, params.lead_powers + 1):
                for sign in (1, -1):
                    for u in short:
                        for v in short:
                            w2 = concat(u, ((t_name, sign * a),), v)
                            k = rho.evaluate(w2).key()
                            if k in seen:
                                continue
                            seen.add(k)
                            syllable.append((a, len(u) + len(v), word_str(w2), w2))
        syllable.sort(key=lambda x: x[:3])
        pool.extend(w for _, _, _, w in syllable)
        self.words = pool
        self.mats = np.array([rho.evaluate(w).arr for w in self.words])
        self.invs = np.array([rho.evaluate(invert_word(w)).arr for w in self.words])

    @staticmethod
    def _angles(vecs):
        return np.arctan2(vecs[..., 1], vecs[..., 0]) % HALF_TURN

    @staticmethod
    def _adist(a, b):
        d = np.abs(a - b) % HALF_TURN
        return np.minimum(d, HALF_TURN - d)

    def _image_arcs(self, centers, radius):
        """Image (center, radius) arrays of B(centers_i, radius) under mats_i."""
        lo = centers - radius
        hi = centers + radius
        out = []
        for ang in (lo, hi, centers):
            v = np.stack([np.cos(ang), np.sin(ang)], axis=1)
            img = np.einsum("nij,nj->ni", self.mats, v)
            out.append(self._angles(img))
        a_lo, a_hi, a_mid = out
        d = (a_hi - a_lo) % HALF_TURN
        short = d <= HALF_TURN / 2
        c1 = np.where(short, (a_lo + d / 2), (a_hi + (HALF_TURN - d) / 2)) % HALF_TURN
        r1 = np.where(short, d / 2, (HALF_TURN - d) / 2)
        inside = self._adist(a_mid, c1) <= r1 + 1e-12
        c = np.where(inside, c1, (c1 + HALF_TURN / 2) % HALF_TURN)
        r = np.where(inside, r1, HALF_TURN / 2 - r1)
        return c, r

    def candidate(self, z_angle):
        """First word expanding about z, or None."""
        p = self.params
        vz = np.array([math.cos(z_angle), math.sin(z_angle)])
        pulls = self._angles(self.invs @ vz)
        cw, rw = self._image_arcs(pulls, 2 * p.delta)
        ok = 2 * rw < p.delta
        if not np.any(ok):
            return None
        cwe, rwe = self._image_arcs(pulls, 2 * p.delta + 2 * p.epsilon)
        ok &= self._adist(cwe, z_angle) + rwe < p.epsilon
        if not np.any(ok):
            return None
        i = int(np.argmax(ok))
        cv, rv = self._image_arcs(
            pulls[i : i + 1].repeat(1), p.delta
        )
        mat = self.mats[i]
        v_arc = mobius_arc(mat, Arc(float(pulls[i]), p.delta))
        w_arc = Arc(float(cw[i]), float(rw[i]))
        return _Conical(self.words[i], float(z_angle), float(pulls[i]), v_arc, w_arc)


@dataclass
class _Conical:
    word: Word
    z_angle: float
    pullback: float
    v: Arc
    w: Arc


def _coset_candidates(rho, t_name, p_angle, params):
    """Candidate coset points in peripheral-power syllable form u t^a v.

    Returns (angles sorted, words) for deduplicated parabolic points.
    Plain word balls cannot reach nearby cusps (their representatives
    have unbounded length), but one deep peripheral power flanked by
    short words does.
    """
    short = _word_ball(rho, params.coset_ball, include_identity=True)
    pts = {}
    base = np.array([math.cos(p_angle), math.sin(p_angle)])
    mats_short = {w: rho.evaluate(w).arr for w in short}
    for v in short:
        pv = mats_short[v] @ base
        for a in range(-params.lead_powers, params.lead_powers + 1):
            a_word = ((t_name, a),) if a else ()
            pa = rho.evaluate(a_word).arr @ pv if a else pv
            for u in short:
                full = concat(u, a_word, v)
                vec = mats_short[u] @ pa
                ang = float(np.arctan2(vec[1], vec[0]) % HALF_TURN)
                key = round(ang / 1e-9)
                # keep a few least-skewed representatives per point: distinct
                # cosets can share a parabolic point and cover different sides
                rank = (abs(a), len(u) + len(v), word_str(full))
                bucket = pts.setdefault(key, [])
                wkey = rho.evaluate(full).key()
                if any(k == wkey for _, _, _, k in bucket):
                    continue
                bucket.append((rank, ang, full, wkey))
                bucket.sort()
                del bucket[3:]
    items = sorted((ang, full) for bucket in pts.values() for _, ang, full, _ in bucket)
    return [x[0] for x in items], [x[1] for x in items]


def synthesize_rp1(rho: GroupPresentation, params: SynthesisParams | None = None
                   ) -> SynthesisResult:
    """Build an automaton and compatible system for a circle action.

    Raises SynthesisFailed with the first unsatisfiable construction
    clause and the offending boundary point; no silent fallback.
    """
    params = params or SynthesisParams()
    if rho.dim != 2:
        raise SynthesisFailed("synthesis is restricted to actions on the circle")
    if not rho.generators:
        raise SynthesisFailed("no generators: no expansion available")
    eps = params.epsilon

    # --- base parabolic vertices and coset candidate pools ------------------
    parabolic = {}
    v_hats = {}
    pools = {}
    peripherals = list(rho.peripherals)
    for p in peripherals:
        if p.parabolic_point is None:
            raise SynthesisFailed(f"peripheral {p.name} lacks a parabolic point")
        if len(p.generators) != 1:
            raise SynthesisFailed(f"peripheral {p.name} must be cyclic for synthesis")
        t_name = p.generators[0]
        p_angle = angle_of(np.asarray(p.parabolic_point, dtype=float))
        fixed = mobius_angle(rho.generators[t_name].arr, p_angle)
        if angle_dist(fixed, p_angle) > 1e-9:
            raise SynthesisFailed(
                f"declared parabolic point of {p.name} is not fixed", p_angle
            )
        K_p = _fundamental_interval(rho, t_name, p_angle)
        pools[p.name] = (t_name, p_angle, K_p) + tuple(
            _coset_candidates(rho, t_name, p_angle, params)
        )
        _materialize(rho, parabolic, v_hats, p.name, t_name, (), p_angle, K_p, params)

    # --- conical candidates on a grid ---------------------------------------
    searcher = _ConicalSearcher(rho, params)
    conical = []
    for z in np.linspace(0.0, HALF_TURN, params.grid, endpoint=False):
        if any(pv["v"].contains_angle(z) for pv in parabolic.values()):
            continue
        cand = searcher.candidate(float(z))
        if cand is not None:
            conical.append(cand)

    require_cover = (
        params.require_full_cover
        if params.require_full_cover is not None
        else bool(peripherals)
    )

    # --- adaptive parabolic materialization over uncovered gaps -------------
    if require_cover:
        for _ in range(params.max_parabolic_rounds):
            arcs = [pv["v"] for pv in parabolic.values()] + [c.v for c in conical]
            gap = _first_gap(arcs)
            if gap is None:
                break
            g_lo, g_hi = gap
            width = (g_hi - g_lo) % HALF_TURN
            progress = False
            # conical retries across the gap (inner arcs can be tiny)
            for frac in (0.5, 0.25, 0.75, 0.1, 0.9):
                zz = (g_lo + frac * width) % HALF_TURN
                cand = searcher.candidate(zz)
                if cand is not None and cand.v.contains_angle(zz, slack=-1e-12):
                    conical.append(cand)
                    progress = True
                    break
            if progress:
                continue
            # otherwise materialize coset vertices near the gap, nearest first
            for p_name, (t_name, p_angle, K_p, angles, words) in pools.items():
                for _attempt in range(8):
                    j = _nearest_in_gap(angles, g_lo, g_hi)
                    if j is None:
                        break
                    word_j = words.pop(j)
                    angles.pop(j)
                    key = f"p:{p_name}:{word_str(word_j)}"
                    if key in parabolic:
                        continue
                    try:
                        _materialize(rho, parabolic, v_hats, p_name, t_name, word_j,
                                     p_angle, K_p, params)
                        progress = True
                        break
                    except SynthesisFailed:
                        continue
                if progress:
                    break
            if not progress:
                mid = (g_lo + width / 2) % HALF_TURN
                raise SynthesisFailed(
                    "uncovered boundary interval admits neither an expanding word "
                    "nor a peripheral coset vertex", mid
                )

        arcs = [pv["v"] for pv in parabolic.values()] + [c.v for c in conical]
        owners = list(parabolic.keys()) + list(range(len(conical)))
        from .circle import cover_circle

        picked = cover_circle(arcs)
        if picked is None:
            gap = _first_gap(arcs)
            raise SynthesisFailed(
                "inner neighborhoods do not cover the boundary circle",
                None if gap is None else gap[0],
            )
        chosen_conical = []
        keep_par = set(parabolic)  # parabolic vertices always stay
        for i in picked:
            if not isinstance(owners[i], str):
                chosen_conical.append(conical[owners[i]])
    else:
        chosen_conical = conical

    if not parabolic and not chosen_conical:
        raise SynthesisFailed("no expanding neighborhoods found on the grid")

    # --- assemble graph -----------------------------------------------------
    vertices = {}
    inner, outer, domains, points = {}, {}, {}, {}
    for vid, pv in parabolic.items():
        vertices[vid] = ParabolicFamily(
            coset_word=pv["coset_word"], peripheral=pv["peripheral"],
            exclude_below=pv["n0"],
        )
        inner[vid], outer[vid] = pv["v"], pv["w"]
        domains[vid] = arc_ball(pv["angle"], eps)
        points[vid] = pv["angle"]
    for i, c in enumerate(sorted(chosen_conical, key=lambda c: c.z_angle)):
        vid = f"c{i}:{word_str(c.word)}"
        vertices[vid] = Singleton(c.word)
        inner[vid], outer[vid] = c.v, c.w
        domains[vid] = arc_ball(c.z_angle, eps)
        points[vid] = c.z_angle

    edges = []
    for vid, label in vertices.items():
        if vid in parabolic:
            source_set = v_hats[vid]
        else:
            mat_inv = rho.evaluate(invert_word(label.word)).arr
            source_set = mobius_arc(mat_inv, inner[vid])
        for wid in vertices:
            if source_set.intersects(inner[wid]):
                edges.append((vid, wid))

    # drop vertices with no outgoing edges (possible in the no-cover mode)
    alive = {v for v, _ in edges}
    dead = set(vertices) - alive
    while dead:
        if require_cover:
            raise SynthesisFailed(
                f"vertex {sorted(dead)[0]} has no outgoing edge",
                points[sorted(dead)[0]],
            )
        vertices = {v: l for v, l in vertices.items() if v not in dead}
        if not vertices:
            raise SynthesisFailed("no recurrent expanding structure found")
        edges = [(v, w) for v, w in edges if v not in dead and w not in dead]
        alive = {v for v, _ in edges}
        dead = set(vertices) - alive
    inner = {v: inner[v] for v in vertices}
    outer = {v: outer[v] for v in vertices}
    domains = {v: domains[v] for v in vertices}
    points = {v: points[v] for v in vertices}

    graph = GammaGraph(vertices=vertices, edges=edges, epsilon=eps)
    system = CompatibleSystem(domains=domains, epsilon=eps)
    return SynthesisResult(graph=graph, inner_sets=inner, outer_sets=outer,
                           system=system, boundary_points=points)


def _materialize(rho, parabolic, v_hats, p_name, t_name, coset_word, p_angle,
                 K_p, params):
    n0, q_angle, v_q, w_q, v_hat, w_hat = _parabolic_vertex(
        rho, t_name, coset_word, p_angle, K_p, params
    )
    vid = f"p:{p_name}:{word_str(coset_word)}"
    parabolic[vid] = {
        "peripheral": p_name,
        "coset_word": coset_word,
        "n0": n0,
        "angle": q_angle,
        "v": v_q,
        "w": w_q,
    }
    v_hats[vid] = v_hat


def _first_gap(arcs):
    """One uncovered (lo, hi) interval of the circle, or None if covered."""
    if not arcs:
        return (0.0, HALF_TURN)
    pieces = sorted(((a.center - a.radius) % HALF_TURN, 2 * a.radius) for a in arcs)
    start = pieces[0][0]
    pos = start
    for lo, length in pieces + [(start + HALF_TURN, 0.0)]:
        if lo > pos + 1e-12:
            return (pos % HALF_TURN, lo % HALF_TURN if lo < HALF_TURN else lo - HALF_TURN)
        pos = max(pos, lo + length)
    return None


def _nearest_in_gap(angles, g_lo, g_hi):
    """Index of the candidate angle inside the gap closest to its middle."""
    width = (g_hi - g_lo) % HALF_TURN
    mid = (g_lo + width / 2) % HALF_TURN
    best, best_d = None, None
    for j, a in enumerate(angles):
        if (a - g_lo) % HALF_TURN <= width + 1e-12:
            d = angle_dist(a, mid)
            if best is None or d < best_d:
                best, best_d = j, d
    return best
