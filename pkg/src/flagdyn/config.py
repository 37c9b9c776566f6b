"""Run configuration: JSON schema, validation, and object construction.

Configs are plain JSON with exact integers preserved for matrices.
Matrix entries may be strings in the deformation parameter t (evaluated
with a restricted namespace), which is how probe families are declared.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .automaton import CompatibleSystem, GammaGraph, ParabolicFamily, Singleton
from .domains import ChartBall, ConvexPolytope, SampledSet
from .errors import ConfigError
from .linalg import Matrix
from .projgeom import ProjHyperplane
from .systems import arc_ball
from .words import GroupPresentation, Peripheral, parse_word

_EXPR_NAMES = {
    "exp": math.exp, "log": math.log, "sqrt": math.sqrt, "sin": math.sin,
    "cos": math.cos, "tan": math.tan, "pi": math.pi, "e": math.e,
}


def _entry(value, t=0.0):
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            return float(eval(value, {"__builtins__": {}}, {**_EXPR_NAMES, "t": t}))
        except Exception as exc:
            raise ConfigError(f"bad matrix entry {value!r}: {exc}") from exc
    raise ConfigError(f"bad matrix entry {value!r}")


def _matrix(rows, t=0.0):
    if all(isinstance(x, int) for row in rows for x in row):
        return Matrix(np.array(rows, dtype=object))
    vals = [[_entry(x, t) for x in row] for row in rows]
    return Matrix(np.array(vals))


@dataclass
class RunConfig:
    dimension: int
    raw: dict
    path: str | None
    config_hash: str
    seeds: dict = field(default_factory=dict)
    budgets: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    DEFAULT_BUDGETS = {
        "boundary_samples": 64,
        "interior_samples": 48,
        "element_cap": 48,
        "pair_samples": 4096,
        "path_count": 100,
        "depth": 20,
    }
    DEFAULT_TOLERANCES = {
        "incidence": 1e-10,
        "opposition_margin": 1e-6,
        "nesting_margin": 1e-3,
        "convergence": 1e-9,
    }

    # -- loading -------------------------------------------------------------

    @classmethod
    def load(cls, path) -> "RunConfig":
        p = Path(path)
        try:
            blob = p.read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            raw = json.loads(blob)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls._from_raw(raw, str(p), hashlib.sha256(blob).hexdigest()[:16])

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        blob = json.dumps(raw, sort_keys=True).encode()
        return cls._from_raw(raw, None, hashlib.sha256(blob).hexdigest()[:16])

    @classmethod
    def _from_raw(cls, raw, path, digest):
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        dim = raw.get("dimension")
        if not isinstance(dim, int) or dim < 2:
            raise ConfigError("dimension must be an integer >= 2")
        cfg = cls(
            dimension=dim,
            raw=raw,
            path=path,
            config_hash=digest,
            seeds={"master": 7, **raw.get("seeds", {})},
            budgets={**cls.DEFAULT_BUDGETS, **raw.get("budgets", {})},
            tolerances={**cls.DEFAULT_TOLERANCES, **raw.get("tolerances", {})},
        )
        for key, val in cfg.tolerances.items():
            if not (isinstance(val, (int, float)) and val > 0):
                raise ConfigError(f"tolerance {key} must be positive")
        cfg._validate_refs()
        return cfg

    def _validate_refs(self):
        raw = self.raw
        gen_names = {g["name"] for g in raw.get("generators", [])}
        gen_names |= {d["name"] for d in raw.get("derived", [])}
        for g in raw.get("generators", []):
            rows = g.get("matrix")
            if (
                not isinstance(rows, list)
                or len(rows) != self.dimension
                or any(len(r) != self.dimension for r in rows)
            ):
                raise ConfigError(f"generator {g.get('name')} matrix must be {self.dimension}x{self.dimension}")
        for p in raw.get("peripherals", []):
            for g in p.get("generators", []):
                if g not in gen_names:
                    raise ConfigError(f"peripheral {p.get('name')} references unknown generator {g}")
        graph = raw.get("graph")
        if graph is not None:
            ids = {v["id"] for v in graph.get("vertices", [])}
            for e in graph.get("edges", []):
                if e[0] not in ids or e[1] not in ids:
                    raise ConfigError(f"edge {e} references unknown vertex")
            for vid in raw.get("domains", {}):
                if vid not in ids:
                    raise ConfigError(f"domain assigned to unknown vertex {vid}")
            for v in graph.get("vertices", []):
                if v.get("type") == "parabolic":
                    pnames = {p["name"] for p in raw.get("peripherals", [])}
                    if v.get("peripheral") not in pnames:
                        raise ConfigError(f"vertex {v['id']} references unknown peripheral")

    # -- construction ----------------------------------------------------------

    def presentation(self, t: float = 0.0) -> GroupPresentation:
        gens = {}
        for g in self.raw.get("generators", []):
            gens[g["name"]] = _matrix(g["matrix"], t)
        for d in self.raw.get("derived", []):
            base = GroupPresentation(dim=self.dimension, generators=dict(gens))
            gens[d["name"]] = base.evaluate(parse_word(d["word"]))
        peripherals = [
            Peripheral(
                name=p["name"],
                generators=list(p["generators"]),
                truncation=int(p.get("truncation", 40)),
                abelian=bool(p.get("abelian", True)),
                parabolic_point=p.get("parabolic_point"),
            )
            for p in self.raw.get("peripherals", [])
        ]
        return GroupPresentation(dim=self.dimension, generators=gens,
                                 peripherals=peripherals)

    def family(self):
        """t -> presentation, for deformation probes."""
        return lambda t: self.presentation(t=t)

    def graph(self) -> GammaGraph:
        g = self.raw.get("graph")
        if g is None:
            raise ConfigError("config has no graph section")
        vertices = {}
        for v in g.get("vertices", []):
            if v.get("type") == "parabolic":
                vertices[v["id"]] = ParabolicFamily(
                    coset_word=parse_word(v.get("coset_word", "")),
                    peripheral=v["peripheral"],
                    exclude_below=int(v.get("min_power", 1)),
                    excluded=tuple(parse_word(w) for w in v.get("excluded", [])),
                )
            else:
                vertices[v["id"]] = Singleton(parse_word(v["word"]))
        eps = g.get("epsilon", "auto")
        edges = [tuple(e) for e in g.get("edges", [])]
        if eps == "auto":
            system = self.system(epsilon=1.0)
            eps = 0.1 * system.min_pairwise_gap()
            if eps <= 0:
                raise ConfigError("auto epsilon failed: assigned domains touch")
        return GammaGraph(vertices=vertices, edges=edges, epsilon=float(eps))

    def domain(self, spec):
        kind = spec.get("kind")
        if kind == "arc":
            if self.dimension != 2:
                raise ConfigError("arc domains require dimension 2")
            return arc_ball(float(spec["center_angle"]), float(spec["radius_angle"]))
        if kind == "chart_ball":
            return ChartBall(
                ProjHyperplane(np.asarray(spec["chart"], dtype=float)),
                np.asarray(spec["center"], dtype=float),
                float(spec["radius"]),
            )
        if kind == "polytope":
            return ConvexPolytope(
                ProjHyperplane(np.asarray(spec["chart"], dtype=float)),
                np.asarray(spec["vertices"], dtype=float),
            )
        if kind == "union":
            return SampledSet([self.domain(m) for m in spec["members"]])
        raise ConfigError(f"unknown domain kind {kind!r}")

    def system(self, epsilon=None) -> CompatibleSystem:
        doms = {vid: self.domain(spec) for vid, spec in self.raw.get("domains", {}).items()}
        if not doms:
            raise ConfigError("config has no domains section")
        if epsilon is None:
            eps = self.raw.get("graph", {}).get("epsilon", "auto")
            if eps == "auto":
                sys_tmp = CompatibleSystem(domains=doms, epsilon=1.0)
                eps = 0.1 * sys_tmp.min_pairwise_gap()
            epsilon = float(eps)
        return CompatibleSystem(domains=doms, epsilon=epsilon)

    def check_separation(self, system: CompatibleSystem):
        """User-declared FS separation table, checked not derived."""
        failures = []
        for entry in self.raw.get("delta_separation", []):
            a, b, gap = entry[0], entry[1], float(entry[2])
            da, db = system.domain(a), system.domain(b)
            from .automaton import _is_arc

            if _is_arc(da) and _is_arc(db):
                actual = da.arc().gap_to(db.arc())
            else:
                import numpy as _np

                from .projgeom import fubini_study_many

                pa = _np.vstack([da.boundary_points(64, 0), da.interior_points(32, 0)])
                pb = _np.vstack([db.boundary_points(64, 0), db.interior_points(32, 0)])
                actual = float(_np.min(fubini_study_many(pa, pb)))
            if actual < gap:
                failures.append((a, b, gap, actual))
        return failures
