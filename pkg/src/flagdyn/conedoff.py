"""Truncated coned-off Cayley graphs and quasigeodesic measurements.

Each peripheral coset gains a cone vertex at distance 1 from its
elements, so any two elements of one coset are at distance 2. Balls are
generated lazily and truncated: coset members are materialized within a
declared power window, and searches refuse (OutOfBall) rather than
silently answer beyond the truncated ball. Element equality uses free
reduction for declared free presentations and canonical matrices
otherwise.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import OutOfBall
from .words import GroupPresentation, Word, normalize_word, word_str


def _letters(word: Word):
    out = []
    for name, exp in word:
        step = 1 if exp > 0 else -1
        out.extend([(name, step)] * abs(exp))
    return out


def free_reduce(letters):
    out = []
    for let in letters:
        if out and out[-1][0] == let[0] and out[-1][1] == -let[1]:
            out.pop()
        else:
            out.append(let)
    return tuple(out)


@dataclass
class Presentation:
    """Group data for the coned graph: generators, peripherals, equality."""

    generators: list  # generator names
    peripherals: list  # (peripheral name, generator name) pairs, cyclic
    kind: str = "free"  # 'free': reduced words; 'matrix': canonical matrices
    rho: GroupPresentation | None = None

    def __post_init__(self):
        if self.kind == "matrix" and self.rho is None:
            raise ValueError("matrix presentations need an evaluation map")


def _int_canon(m):
    """Canonical integer projective representative: gcd-reduced, sign-fixed."""
    import math as _math

    flat = [m[0][0], m[0][1], m[1][0], m[1][1]]
    g = _math.gcd(*(abs(x) for x in flat))
    if g > 1:
        flat = [x // g for x in flat]
    lead = next((x for x in flat if x != 0), 0)
    if lead < 0:
        flat = [-x for x in flat]
    return ((flat[0], flat[1]), (flat[2], flat[3]))


def _int_mul(a, b):
    return _int_canon(
        (
            (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
            (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
        )
    )


class ConedGraph:
    """Lazy truncated coned-off Cayley graph with BFS distances.

    Integer 2x2 presentations use exact tuple arithmetic on the hot path;
    everything else goes through canonical Matrix objects.
    """

    def __init__(self, pres: Presentation, truncation: int = 24,
                 max_nodes: int = 400000):
        self.pres = pres
        self.truncation = truncation
        self.max_nodes = max_nodes
        self._elems = {}  # element key -> payload (letters, Matrix, or int tuple)
        self._fast = False
        if pres.kind == "matrix":
            gens = pres.rho.generators
            self._fast = pres.rho.dim == 2 and all(
                g.exact is not None for g in gens.values()
            )
            if self._fast:
                self._gen_tuples = {}
                for name, g in gens.items():
                    e = g.exact
                    self._gen_tuples[(name, 1)] = _int_canon(e)
                    (a, b), (c, d) = e
                    self._gen_tuples[(name, -1)] = _int_canon(((d, -b), (-c, a)))
            self._powers = {}
            for p_name, t_name in pres.peripherals:
                if self._fast:
                    pows = {0: ((1, 0), (0, 1))}
                    tp = self._gen_tuples[(t_name, 1)]
                    tn = self._gen_tuples[(t_name, -1)]
                    for j in range(1, truncation + 1):
                        pows[j] = _int_mul(pows[j - 1], tp)
                        pows[-j] = _int_mul(pows[-(j - 1)], tn)
                else:
                    t = pres.rho.generators[t_name]
                    pows = {0: pres.rho.evaluate(())}
                    t_inv = t.inv()
                    for j in range(1, truncation + 1):
                        pows[j] = pows[j - 1] @ t
                        pows[-j] = pows[-(j - 1)] @ t_inv
                self._powers[p_name] = pows
        self._id_key = self._intern(self._identity())

    # -- element plumbing ---------------------------------------------------

    def _identity(self):
        if self.pres.kind == "free":
            return ()
        if self._fast:
            return ((1, 0), (0, 1))
        return self.pres.rho.evaluate(())

    def _key(self, payload):
        if self.pres.kind == "free" or self._fast:
            return payload
        return payload.key()

    def _intern(self, payload):
        k = self._key(payload)
        self._elems.setdefault(k, payload)
        return k

    def node_of_word(self, word: Word):
        word = normalize_word(word)
        if self.pres.kind == "free":
            return ("e", self._intern(free_reduce(_letters(word))))
        if self._fast:
            out = ((1, 0), (0, 1))
            for name, exp in word:
                step = self._gen_tuples[(name, 1 if exp > 0 else -1)]
                for _ in range(abs(exp)):
                    out = _int_mul(out, step)
            return ("e", self._intern(out))
        return ("e", self._intern(self.pres.rho.evaluate(word)))

    def _mul_gen(self, payload, name, sign):
        if self.pres.kind == "free":
            return free_reduce(payload + ((name, sign),))
        if self._fast:
            return _int_mul(payload, self._gen_tuples[(name, sign)])
        return payload @ self.pres.rho.power(name, sign)

    def _coset_key(self, payload, p_name, t_name):
        """Canonical key of the coset g<t>, valid within the power window."""
        if self.pres.kind == "free":
            letters = list(payload)
            while letters and letters[-1][0] == t_name:
                letters.pop()
            return tuple(letters)
        pows = self._powers[p_name]
        if self._fast:
            return min(
                _int_mul(payload, pows[j])
                for j in range(-self.truncation, self.truncation + 1)
            )
        return min(self._key(payload @ pows[j]) for j in range(-self.truncation, self.truncation + 1))

    # -- BFS ----------------------------------------------------------------

    def neighbors(self, node):
        kind = node[0]
        if kind == "e":
            payload = self._elems[node[1]]
            out = []
            for name in self.pres.generators:
                for sign in (1, -1):
                    out.append(("e", self._intern(self._mul_gen(payload, name, sign))))
            for p_name, t_name in self.pres.peripherals:
                out.append(("c", p_name, self._coset_key(payload, p_name, t_name), node[1]))
            return out
        # cone vertex: members of the coset through the discovered base
        _, p_name, _, base_key = node
        payload = self._elems[base_key]
        t_name = dict(self.pres.peripherals)[p_name]
        out = []
        if self.pres.kind == "free":
            for j in range(-self.truncation, self.truncation + 1):
                w = free_reduce(tuple(payload) + ((t_name, 1 if j > 0 else -1),) * abs(j))
                out.append(("e", self._intern(w)))
        elif self._fast:
            pows = self._powers[p_name]
            for j in range(-self.truncation, self.truncation + 1):
                out.append(("e", self._intern(_int_mul(payload, pows[j]))))
        else:
            pows = self._powers[p_name]
            for j in range(-self.truncation, self.truncation + 1):
                out.append(("e", self._intern(payload @ pows[j])))
        return out

    @staticmethod
    def _node_id(node):
        # cone nodes carry their discovery base; identity ignores it
        return node[:3]

    def ball(self, radius: int, center_word: Word = ()):
        """BFS ball: {node id: distance}; raises OutOfBall past max_nodes."""
        start = self.node_of_word(center_word)
        dist = {self._node_id(start): 0}
        frontier = deque([start])
        while frontier:
            node = frontier.popleft()
            d = dist[self._node_id(node)]
            if d >= radius:
                continue
            for nb in self.neighbors(node):
                nid = self._node_id(nb)
                if nid not in dist:
                    if len(dist) >= self.max_nodes:
                        raise OutOfBall(f"ball exceeds {self.max_nodes} nodes")
                    dist[nid] = d + 1
                    frontier.append(nb)
        return dist

    def _levels_from(self, starts):
        """Multi-source BFS state generator helpers."""
        dist = {}
        parents = {}
        frontier = []
        for s in starts:
            nid = self._node_id(s)
            if nid not in dist:
                dist[nid] = 0
                parents[nid] = None
                frontier.append(s)
        return dist, parents, frontier

    def _expand_level(self, dist, parents, frontier):
        nxt = []
        for node in frontier:
            d = dist[self._node_id(node)]
            for nb in self.neighbors(node):
                nid = self._node_id(nb)
                if nid not in dist:
                    if len(dist) >= self.max_nodes:
                        raise OutOfBall(f"search exceeds {self.max_nodes} nodes")
                    dist[nid] = d + 1
                    parents[nid] = self._node_id(node)
                    nxt.append(nb)
        return nxt

    def distance(self, w1: Word, w2: Word, radius: int):
        """BFS shortest-path length in the truncated coned graph.

        Bidirectional search; OutOfBall when no connection within the
        radius (or the node budget) is found.
        """
        d, _, _ = self._bidirectional(w1, w2, radius)
        return d

    def geodesic(self, w1: Word, w2: Word, radius: int):
        """One shortest path as a list of node ids (endpoints included)."""
        d, meet, (da, pa, db, pb) = self._bidirectional(w1, w2, radius)
        left = []
        cur = meet
        while cur is not None:
            left.append(cur)
            cur = pa[cur]
        left.reverse()
        cur = pb[meet]
        while cur is not None:
            left.append(cur)
            cur = pb[cur]
        return left

    def _bidirectional(self, w1: Word, w2: Word, radius: int):
        a = self.node_of_word(w1)
        b = self.node_of_word(w2)
        if self._node_id(a) == self._node_id(b):
            return 0, self._node_id(a), ({self._node_id(a): 0}, {self._node_id(a): None},
                                         {self._node_id(b): 0}, {self._node_id(b): None})
        da, pa, fa = self._levels_from([a])
        db, pb, fb = self._levels_from([b])
        best = None
        meet = None
        steps = 0
        while (fa or fb) and steps <= radius + 1:
            steps += 1
            if fa and (not fb or len(fa) <= len(fb)):
                fa = self._expand_level(da, pa, fa)
            else:
                fb = self._expand_level(db, pb, fb)
            common = set(da) & set(db)
            if common:
                cand = min(da[n] + db[n] for n in common)
                best = cand
                meet = min((n for n in common if da[n] + db[n] == cand), key=str)
                # keep expanding while strictly shorter crossings appear
                improved = True
                while improved and (fa or fb):
                    fa = self._expand_level(da, pa, fa) if fa else fa
                    fb = self._expand_level(db, pb, fb) if fb else fb
                    common = set(da) & set(db)
                    cand = min(da[n] + db[n] for n in common)
                    improved = cand < best
                    if improved:
                        best = cand
                        meet = min((n for n in common if da[n] + db[n] == cand), key=str)
                if best > radius:
                    raise OutOfBall(f"distance {best} exceeds radius {radius}")
                return best, meet, (da, pa, db, pb)
        raise OutOfBall(f"no path within radius {radius}")

    def set_distances(self, sources, targets, cap: int):
        """Min distance from each target to the source set (multi-source BFS)."""
        dist, parents, frontier = self._levels_from(sources)
        want = {self._node_id(t) for t in targets}
        out = {}
        level = 0
        while frontier and len(out) < len(want) and level <= cap:
            for nid in list(want - set(out)):
                if nid in dist:
                    out[nid] = dist[nid]
            level += 1
            frontier = self._expand_level(dist, parents, frontier)
        for nid in want - set(out):
            if nid in dist:
                out[nid] = dist[nid]
        missing = want - set(out)
        if missing:
            raise OutOfBall(f"{len(missing)} targets beyond depth cap {cap}")
        return out


@dataclass
class QuasigeodesicReport:
    measured_d: int
    farthest_distance: int
    geodesic_length: int
    ok: bool


def coned_distance(graph: ConedGraph, w1: Word, w2: Word, radius: int) -> int:
    return graph.distance(w1, w2, radius)


def quasigeodesic_check(graph: ConedGraph, prefixes, radius: int,
                        d_max: int) -> QuasigeodesicReport:
    """Hausdorff distance between path prefixes and a BFS geodesic.

    The geodesic runs from the identity to the farthest prefix; the
    Hausdorff distance is measured in the truncated coned graph and
    compared against ``d_max``.
    """
    prefixes = [normalize_word(w) for w in prefixes]
    if () not in prefixes:
        prefixes = [()] + prefixes
    dists = [graph.distance((), w, radius) for w in prefixes]
    far = int(max(range(len(prefixes)), key=lambda i: dists[i]))
    geo = graph.geodesic((), prefixes[far], radius)
    prefix_nodes = [graph.node_of_word(w) for w in prefixes]
    geo_nodes = []
    seen = set()
    for nid in geo:
        if nid not in seen:
            seen.add(nid)
            geo_nodes.append(nid)

    # geodesic node ids need live payloads for BFS restarts: group elements
    # keep theirs, cone ids are re-disclosed through their neighbors, so
    # measure with the element nodes of the geodesic plus both endpoints
    geo_elem_nodes = [n for n in geo_nodes if n[0] == "e"]
    cap = d_max + 2
    to_geo = graph.set_distances(
        [("e", n[1]) for n in geo_elem_nodes], prefix_nodes, cap
    )
    to_pref = graph.set_distances(
        prefix_nodes, [("e", n[1]) for n in geo_elem_nodes], cap
    )
    d1 = max(to_geo.values(), default=0)
    d2 = max(to_pref.values(), default=0)
    measured = max(d1, d2)
    return QuasigeodesicReport(
        measured_d=int(measured),
        farthest_distance=int(dists[far]),
        geodesic_length=len(geo) - 1,
        ok=measured <= d_max,
    )
