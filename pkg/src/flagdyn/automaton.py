"""Vertex-labeled automata over a group and their certified open-set systems.

A graph vertex carries either a single nonidentity group element or a
truncated cofinite subset of a peripheral coset. A compatible system
assigns a proper domain to each vertex; certification checks, edge by
edge and element by element, that each element maps the epsilon
neighborhood of the target domain strictly inside the source domain,
recording worst-case containment margins in the ambient angle metric.

Inclusions are tested on sampled boundary and interior points except on
the projective line, where interval images under 2x2 matrices are exact
and margins are closed-form. Cofinite vertex labels are verified on a
finite prefix plus a disclosed monotone-tail heuristic; the disclosure
is part of the certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import circle
from .domains import ChartBall, ProperDomain
from .errors import BaseFails, EvaluationError, MissingDomain
from .projgeom import ProjPoint, act_many, fubini_study_many
from .sampling import kronecker, sphere_points
from .words import GroupPresentation, Word, concat, word_str


@dataclass(frozen=True)
class Singleton:
    word: Word

    def describe(self):
        return f"singleton {word_str(self.word)}"


@dataclass(frozen=True)
class ParabolicFamily:
    coset_word: Word
    peripheral: str
    exclude_below: int = 1
    excluded: tuple = ()

    def describe(self):
        return (
            f"coset {word_str(self.coset_word)} * <{self.peripheral}> "
            f"(powers >= {self.exclude_below})"
        )


@dataclass
class GammaGraph:
    vertices: dict  # id -> Singleton | ParabolicFamily
    edges: list  # list of (source id, target id)
    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        ids = set(self.vertices)
        for v, w in self.edges:
            if v not in ids or w not in ids:
                raise ValueError(f"edge ({v}, {w}) references unknown vertex")
        out = {v: 0 for v in ids}
        for v, _ in self.edges:
            out[v] += 1
        dead = [v for v, n in out.items() if n == 0]
        if dead:
            raise ValueError(f"vertices with no outgoing edge: {dead}")

    def out_edges(self, v):
        return [e for e in self.edges if e[0] == v]

    def validate_labels(self, rho: GroupPresentation):
        """Singletons must be nonidentity; enumerations duplicate-free.

        Matrix-level duplicates are checked on a short prefix only: large
        powers of a parabolic converge projectively, so float keys of
        distant enumeration elements collide without being equal in the
        group. The word enumeration itself is duplicate-free by
        construction.
        """
        for vid, label in self.vertices.items():
            if isinstance(label, Singleton):
                if rho.evaluate(label.word).is_identity():
                    raise EvaluationError(f"vertex {vid} is labeled by the identity")
            else:
                seen = {}
                for w in elements_of(label, rho, cap=12):
                    k = rho.evaluate(w).key()
                    if k in seen:
                        raise EvaluationError(
                            f"duplicate element in enumeration of {vid}: "
                            f"{word_str(seen[k])} == {word_str(w)}"
                        )
                    seen[k] = w


def elements_of(label, rho: GroupPresentation, cap=None):
    """Element words of a vertex label in enumeration order (truncated)."""
    if isinstance(label, Singleton):
        return [label.word]
    p = rho.peripheral(label.peripheral)
    out = []
    for w in p.enumerate_words(exclude_below=label.exclude_below):
        full = concat(label.coset_word, w)
        if full in label.excluded or not full:
            continue
        out.append(full)
        if cap is not None and len(out) >= cap:
            break
    return out


@dataclass
class CompatibleSystem:
    domains: dict  # vertex id -> ProperDomain
    epsilon: float

    def domain(self, v) -> ProperDomain:
        if v not in self.domains:
            raise MissingDomain(f"no domain assigned to vertex {v}")
        return self.domains[v]

    def min_pairwise_gap(self, n=128, seed=0):
        """Smallest FS gap between distinct assigned domains (sampled; exact arcs)."""
        items = list(self.domains.items())
        best = math.inf
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                a, b = items[i][1], items[j][1]
                if _is_arc(a) and _is_arc(b):
                    best = min(best, a.arc().gap_to(b.arc()))
                else:
                    pa = np.vstack([a.boundary_points(n, seed), a.interior_points(n, seed)])
                    pb = np.vstack([b.boundary_points(n, seed), b.interior_points(n, seed)])
                    best = min(best, float(np.min(fubini_study_many(pa, pb))))
        return best


def _is_arc(dom):
    return isinstance(dom, ChartBall) and dom.dim == 2


@dataclass
class EdgeRecord:
    edge: tuple
    word: Word
    margin: float
    ok: bool
    n_samples: int
    exact: bool

    def describe(self):
        status = "pass" if self.ok else "FAIL"
        return (
            f"{self.edge[0]} -> {self.edge[1]}  alpha = {word_str(self.word):24s} "
            f"margin = {self.margin:+.6e}  [{status}]"
        )


@dataclass
class TailDisclosure:
    vertex: str
    margins_nondecreasing: bool
    diameters_nonincreasing: bool
    checked: int
    note: str = (
        "cofinite tail verified heuristically on a finite prefix; "
        "monotone trends are evidence, not proof"
    )

    @property
    def ok(self):
        return self.margins_nondecreasing and self.diameters_nonincreasing


@dataclass
class DivergenceWitness:
    edge: tuple
    word: Word
    witness: object  # ProjPoint or None
    margin: float
    conclusive: bool


@dataclass
class Certificate:
    records: list
    tails: list
    epsilon: float
    budgets: dict
    divergence: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(r.ok for r in self.records) and all(t.ok for t in self.tails)

    @property
    def min_margin(self):
        return min((r.margin for r in self.records), default=math.inf)

    def first_failure(self):
        for r in self.records:
            if not r.ok:
                return r
        for t in self.tails:
            if not t.ok:
                return t
        return None

    def to_dict(self):
        return {
            "verdict": "pass" if self.ok else "fail",
            "epsilon": self.epsilon,
            "min_margin": self.min_margin,
            "budgets": self.budgets,
            "records": [
                {
                    "edge": list(r.edge),
                    "element": word_str(r.word),
                    "margin": r.margin,
                    "pass": r.ok,
                    "samples": r.n_samples,
                    "exact": r.exact,
                }
                for r in self.records
            ],
            "tail_disclosures": [
                {
                    "vertex": t.vertex,
                    "margins_nondecreasing": t.margins_nondecreasing,
                    "diameters_nonincreasing": t.diameters_nonincreasing,
                    "checked_elements": t.checked,
                    "note": t.note,
                }
                for t in self.tails
            ],
            "divergence": [
                {
                    "edge": list(d.edge),
                    "element": word_str(d.word),
                    "witness": None if d.witness is None else list(d.witness.coords),
                    "margin": d.margin,
                    "conclusive": d.conclusive,
                }
                for d in self.divergence
            ],
            "metadata": self.metadata,
        }


def _accumulate(margin_map, diam_map, idx, margin, diam):
    margin_map[idx] = min(margin_map.get(idx, math.inf), margin)
    diam_map[idx] = max(diam_map.get(idx, -math.inf), diam)


def _neighborhood_samples(dom: ProperDomain, eps: float, n_boundary: int,
                          n_interior: int, seed: int):
    """Sample points of N(U, eps): interior, boundary, and pushed boundary."""
    bnd_coords = dom.boundary_coords(n_boundary, seed)
    bnd = dom.boundary_points(n_boundary, seed)
    interior = dom.interior_points(n_interior, seed)
    normals = dom.outward_normals(bnd_coords)
    from .projgeom import chart_basis

    B = chart_basis(dom.chart)
    amb_dirs = normals @ B
    # orthonormalize the push direction against the base point
    dots = np.sum(amb_dirs * bnd, axis=1, keepdims=True)
    tang = amb_dirs - dots * bnd
    tang = tang / np.linalg.norm(tang, axis=1, keepdims=True)
    pushed = math.cos(eps) * bnd + math.sin(eps) * tang
    return np.vstack([interior, bnd, pushed])


def _containment_margin(system_dom: ProperDomain, pts: np.ndarray, n_boundary: int,
                        seed: int):
    """Worst signed FS margin of the point cloud inside the domain."""
    from .projgeom import affine_chart

    coords = []
    inside = np.ones(pts.shape[0], dtype=bool)
    for i, row in enumerate(pts):
        try:
            coords.append(affine_chart(system_dom.chart, ProjPoint(row)))
        except Exception:
            inside[i] = False
            coords.append(np.zeros(system_dom.dim - 1))
    coords = np.array(coords)
    inside &= system_dom.contains_coords(coords, slack=0.0)
    bnd = system_dom.boundary_points(max(n_boundary, 128), seed)
    dists = np.min(fubini_study_many(pts, bnd), axis=1)
    signed = np.where(inside, dists, -dists)
    return float(np.min(signed))


def verify_compatibility(graph: GammaGraph, system: CompatibleSystem,
                         rho: GroupPresentation, *, n_boundary: int = 64,
                         n_interior: int = 64, element_cap: int = 64,
                         seed: int = 0, metadata: dict | None = None) -> Certificate:
    """Check alpha * N(U_w, eps) inside U_v for every edge and element.

    Exact interval arithmetic on the projective line; sampled containment
    with positive-margin requirement otherwise. Cofinite labels get a
    monotone-tail disclosure.
    """
    graph.validate_labels(rho)
    for v in graph.vertices:
        system.domain(v)
    eps = system.epsilon

    records = []
    # per vertex, per enumeration index: worst margin / largest image diameter
    # across outgoing edges, so tail trends follow the declared enumeration
    per_element_margin = {v: {} for v in graph.vertices}
    per_element_diam = {v: {} for v in graph.vertices}

    for edge in graph.edges:
        v, w = edge
        U_v, U_w = system.domain(v), system.domain(w)
        words = elements_of(graph.vertices[v], rho, cap=element_cap)
        exact = _is_arc(U_v) and _is_arc(U_w)
        if exact:
            target = U_w.arc().expand(eps)
            home = U_v.arc()
            for i, word in enumerate(words):
                m = rho.evaluate(word)
                img = circle.mobius_arc(m.arr, target)
                margin = home.margin_of_arc(img)
                records.append(EdgeRecord(edge, word, margin, margin > 0, 2, True))
                _accumulate(per_element_margin[v], per_element_diam[v], i, margin, img.radius)
        else:
            pts = _neighborhood_samples(U_w, eps, n_boundary, n_interior, seed)
            for i, word in enumerate(words):
                m = rho.evaluate(word)
                img = act_many(m, pts)
                margin = _containment_margin(U_v, img, n_boundary, seed + 1)
                records.append(
                    EdgeRecord(edge, word, margin, margin > 0, pts.shape[0], False)
                )
                diam = float(np.max(fubini_study_many(img, img)))
                _accumulate(per_element_margin[v], per_element_diam[v], i, margin, diam)

    tails = []
    for v, label in graph.vertices.items():
        if isinstance(label, Singleton):
            continue
        # aggregate enumeration indices into shells (a cyclic family emits
        # +n, -n per shell) so trends follow the declared power ordering
        group = 2 if len(rho.peripheral(label.peripheral).generators) == 1 else 1
        idxs = sorted(per_element_margin[v])
        margins, diams = [], []
        for i in idxs:
            s = i // group
            if s == len(margins):
                margins.append(per_element_margin[v][i])
                diams.append(per_element_diam[v][i])
            else:
                margins[s] = min(margins[s], per_element_margin[v][i])
                diams[s] = max(diams[s], per_element_diam[v][i])
        q = max(2, len(margins) // 4)
        tail_m, tail_d = margins[-q:], diams[-q:]
        # slack absorbs sampling wobble once the trend has saturated
        margins_ok = all(
            b >= a - 1e-6 - 0.01 * abs(a) for a, b in zip(tail_m, tail_m[1:])
        )
        diams_ok = all(
            b <= a + 1e-6 + 0.01 * abs(a) for a, b in zip(tail_d, tail_d[1:])
        )
        tails.append(TailDisclosure(v, margins_ok, diams_ok, len(idxs)))

    return Certificate(
        records=records,
        tails=tails,
        epsilon=eps,
        budgets={
            "boundary_samples": n_boundary,
            "interior_samples": n_interior,
            "element_cap": element_cap,
            "seed": seed,
        },
        metadata=metadata or {},
    )


def check_divergence(graph: GammaGraph, system: CompatibleSystem,
                     rho: GroupPresentation, *, n_samples: int = 128,
                     element_cap: int = 8, seed: int = 0) -> list:
    """Witness proper inclusion: a point of U_v outside alpha * closure(U_w).

    Equivalently the witness pulls back outside the closure of U_w under
    alpha^-1. Inconclusive searches are reported, not raised.
    """
    out = []
    for edge in graph.edges:
        v, w = edge
        U_v, U_w = system.domain(v), system.domain(w)
        words = elements_of(graph.vertices[v], rho, cap=element_cap)
        probes = np.vstack(
            [U_v.interior_points(n_samples, seed), U_v.boundary_points(n_samples, seed)]
        )
        closure_w = np.vstack(
            [U_w.boundary_points(n_samples, seed), U_w.interior_points(n_samples, seed)]
        )
        for word in words:
            m = rho.evaluate(word)
            # an escape point only witnesses PROPER inclusion when the
            # inclusion itself holds: an isometry label produces escapes
            # without nesting and must come back inconclusive
            img_closure = act_many(m, closure_w)
            included = all(
                U_v.contains(ProjPoint(row), slack=1e-12) for row in img_closure
            )
            if not included:
                out.append(DivergenceWitness(edge, word, None, 0.0, False))
                continue
            pre = act_many(m.inv(), probes)
            found = None
            best = 0.0
            if _is_arc(U_w):
                arc = U_w.arc()
                for row in pre:
                    margin = -arc.margin_of_arc(circle.Arc(circle.angle_of(row), 0.0))
                    if margin > best:
                        best, found = margin, ProjPoint(row)
            else:
                from .projgeom import affine_chart

                for row in pre:
                    try:
                        c = affine_chart(U_w.chart, ProjPoint(row))
                        inside = bool(U_w.contains_coords(c[None, :], slack=1e-12)[0])
                    except Exception:
                        inside = False
                    if not inside:
                        found = ProjPoint(row)
                        best = 1e-12
                        break
            out.append(DivergenceWitness(edge, word, found, best, found is not None))
    return out


def peripheral_stability_probe(family, graph: GammaGraph, system: CompatibleSystem,
                               t_grid, **verify_kwargs):
    """Re-certify a deformation family on the same graph and domains.

    ``family`` maps a parameter t to a GroupPresentation. Requires the
    t = 0 member to certify; returns [(t, Certificate)] in grid order
    plus the first failing t (None if the whole grid certifies).
    """
    base = family(0.0)
    cert0 = verify_compatibility(graph, system, base, **verify_kwargs)
    if not cert0.ok:
        raise BaseFails("the t = 0 presentation does not certify")
    results = []
    first_fail = None
    for t in t_grid:
        rho_t = family(float(t))
        cert = verify_compatibility(graph, system, rho_t, **verify_kwargs)
        results.append((float(t), cert))
        if first_fail is None and not cert.ok:
            first_fail = float(t)
    return results, first_fail


@dataclass
class GPath:
    vertices: list
    words: list

    @property
    def depth(self):
        return len(self.words)

    def code(self):
        return "|".join(word_str(w) for w in self.words)


def enumerate_paths(graph: GammaGraph, depth: int, strategy: str = "exhaustive",
                    rho: GroupPresentation | None = None, *, seed: int = 0,
                    cap: int = 100000, spine=None, elements_per_vertex: int = 2):
    """G-paths of the given depth.

    exhaustive: all vertex paths, each parabolic vertex contributing its
    first ``elements_per_vertex`` enumeration elements, capped (the cap
    and truncation are reported by the caller). random: seeded choices.
    spine: follow a fixed vertex sequence.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    elems = {
        v: elements_of(label, rho, cap=elements_per_vertex)
        if isinstance(label, ParabolicFamily)
        else [label.word]
        for v, label in graph.vertices.items()
    }
    adj = {v: [w for (x, w) in graph.edges if x == v] for v in graph.vertices}

    if strategy == "exhaustive":
        paths = []
        truncated = False

        def grow(vpath, wpath):
            nonlocal truncated
            if len(paths) >= cap:
                truncated = True
                return
            if len(wpath) == depth:
                # landing vertex: canonical first out-neighbor of the last vertex
                landing = sorted(adj[vpath[-1]])[0]
                paths.append(GPath(list(vpath) + [landing], list(wpath)))
                return
            v = vpath[-1]
            for word in elems[v]:
                if len(wpath) == depth - 1:
                    grow(vpath, wpath + [word])
                else:
                    for w in adj[v]:
                        grow(vpath + [w], wpath + [word])
                        if len(paths) >= cap:
                            truncated = True
                            return

        for v0 in sorted(graph.vertices):
            grow([v0], [])
        return paths, truncated

    if strategy == "random":
        rng = np.random.default_rng(seed)
        paths = []
        starts = sorted(graph.vertices)
        for _ in range(cap):
            v = starts[int(rng.integers(len(starts)))]
            vpath, wpath = [v], []
            ok = True
            for step in range(depth):
                cur = vpath[-1]
                if not elems[cur] or not adj[cur]:
                    ok = False
                    break
                wpath.append(elems[cur][int(rng.integers(len(elems[cur])))])
                if step < depth - 1:
                    vpath.append(sorted(adj[cur])[int(rng.integers(len(adj[cur])))])
            if ok:
                vpath.append(sorted(adj[vpath[-1]])[0])
                paths.append(GPath(vpath, wpath))
        return paths, False

    if strategy == "spine":
        if spine is None or len(spine) < depth:
            raise ValueError("spine strategy needs a vertex sequence of length >= depth")
        for a, b in zip(spine, spine[1:]):
            if b not in adj[a]:
                raise ValueError(f"spine edge ({a}, {b}) not in graph")
        vpath = list(spine[:depth])
        wpath = [elems[v][0] for v in vpath]
        if len(spine) > depth:
            vpath.append(spine[depth])
        else:
            vpath.append(sorted(adj[vpath[-1]])[0])
        return [GPath(vpath, wpath)], False

    raise ValueError(f"unknown strategy {strategy!r}")
