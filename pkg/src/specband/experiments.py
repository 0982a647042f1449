"""Model catalog and reproducible experiment runners.

Each runner takes an :class:`ExperimentConfig`, performs only seeded or
exhaustive computations, and returns an :class:`ExperimentReport` whose
checks carry the measured value next to the tolerance it was judged by.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any

import numpy as np

from . import dynsys as ds
from . import opfamily as of
from . import spectral as sp
from .errors import ConfigError
from .irrational import parse_irrational

# -- model catalog --------------------------------------------------------------

MODEL_PARAMS = {
    "shift": {},
    "sturmian": {"alpha": "golden", "lambda": 1.0, "selfadjoint": False},
    "sturmian-golden": {"lambda": 1.0, "selfadjoint": False},
    "almost-mathieu": {"beta": "golden", "lambda": 1.0, "selfadjoint": True},
    "full-shift": {"lambda": 1.0},
    "periodic": {"word": "01", "lambda": 1.0, "selfadjoint": False},
    "one-zero": {},
    "example-7-1": {},
    "example-7-2": {},
}

#: recurrence horizon for torus models: a golden rotation returns within 1e-6 only after ~4.5e5 steps
TORUS_H = 10**6


@dataclass(frozen=True, eq=False)
class Model:
    id: str
    params: dict
    family: of.BandFamily
    base: ds.DynPoint
    minimal: bool
    constant: bool = False
    #: base points of the separate components of a non-minimal fixture
    components: tuple = ()

    @property
    def is_torus(self) -> bool:
        return isinstance(self.base, ds.TorusPoint)


def _check_params(model_id, params):
    if model_id not in MODEL_PARAMS:
        raise ConfigError(f"unknown model id {model_id!r}; known: {sorted(MODEL_PARAMS)}")
    unknown = sorted(set(params) - set(MODEL_PARAMS[model_id]))
    if unknown:
        raise ConfigError([f"unknown parameter {k!r} for model {model_id!r}" for k in unknown])
    full = dict(MODEL_PARAMS[model_id])
    full.update(params)
    problems = []
    if "lambda" in full and (isinstance(full["lambda"], bool) or not isinstance(full["lambda"], (int, float))
                             or not math.isfinite(full["lambda"])):
        problems.append("lambda must be a finite real number")
    if "selfadjoint" in full and not isinstance(full["selfadjoint"], bool):
        problems.append("selfadjoint must be true or false")
    if "word" in full and (not isinstance(full["word"], str) or not full["word"]
                           or set(full["word"]) - set("01")):
        problems.append("word must be a nonempty binary string")
    for key in ("alpha", "beta"):
        if key in full:
            try:
                parse_irrational(full[key])
            except ConfigError as exc:
                problems.extend(f"{key}: {v}" for v in exc.violations)
    if problems:
        raise ConfigError(problems)
    return full


def build_model(model_id: str, **params) -> Model:
    """Instantiate a catalog model from its id and parameters."""
    p = _check_params(model_id, params)
    if model_id == "shift":
        return Model(model_id, p, of.shift_family(), ds.fibonacci_point(), minimal=True, constant=True)
    if model_id in ("sturmian", "sturmian-golden"):
        alpha = p.get("alpha", "golden")
        F = of.symbolic_family(p["lambda"], p["selfadjoint"])
        return Model(model_id, p, F, ds.sturmian_base_point(alpha), minimal=True)
    if model_id == "almost-mathieu":
        beta = float(parse_irrational(p["beta"]))
        F = of.almost_mathieu_family(p["lambda"], p["selfadjoint"])
        return Model(model_id, p, F, ds.TorusPoint((0.0,), (beta,)), minimal=True)
    if model_id == "full-shift":
        return Model(model_id, p, of.symbolic_family(p["lambda"]), ds.concatenation_point(), minimal=False)
    if model_id == "periodic":
        F = of.symbolic_family(p["lambda"], p["selfadjoint"])
        return Model(model_id, p, F, ds.periodic_point(p["word"], ds.BINARY), minimal=True)
    if model_id == "one-zero":
        return Model(model_id, p, of.potential_family(), ds.one_zero_point(), minimal=False)
    if model_id == "example-7-1":
        # B = U commutes with U, so x -> B is equivariant over any base; the base here is
        # the union of two fixed points, which never approach each other
        comps = (ds.periodic_point("0", ds.BINARY), ds.periodic_point("1", ds.BINARY))
        return Model(model_id, p, of.shift_family(), comps[0], minimal=False, constant=True, components=comps)
    if model_id == "example-7-2":
        # hull of 01 relabelled {1,2} and hull of 001 relabelled {3,4}; diagonal = label
        alphabet = ds.Alphabet(5)
        comps = (ds.periodic_point("12", alphabet), ds.periodic_point("334", alphabet))
        F = of.BandFamily((of.LocalRule(0, of.symbol_table([0, 1, 2, 3, 4], alphabet)),),
                          alphabet=alphabet, name="diag(label)")
        return Model(model_id, p, F, comps[0], minimal=False, components=comps)
    raise AssertionError(model_id)


def model_from_config(desc) -> Model:
    if isinstance(desc, str):
        return build_model(desc)
    desc = dict(desc)
    try:
        model_id = desc.pop("id")
    except KeyError:
        raise ConfigError("model descriptor needs an 'id'") from None
    return build_model(model_id, **desc)


def orbit_points(model: Model) -> list:
    """All points of a finite fixture: every shift of every component."""
    pts = []
    for c in model.components or (model.base,):
        if not isinstance(c.rule, ds.Periodic):
            raise ConfigError(f"model {model.id!r} has no finite orbit enumeration")
        pts.extend(ds.shift(c, k) for k in range(c.rule.period))
    return pts


def default_hull_samples(model: Model) -> list[dict]:
    if model.is_torus:
        return [{"v": [0.0]}, {"v": [0.5]}, {"v": [0.25]}, {"shift": 10000}]
    if isinstance(model.base.rule, ds.SturmianCoding):
        return [{}, {"omega": "1/2"}, {"omega": "1/4"}, {"shift": 10000}]
    if model.components:
        return [{"component": c} for c in range(len(model.components))]
    if model.id == "shift":
        return [{}, {"shift": 1}, {"shift": 10000}]
    if isinstance(model.base.rule, ds.Periodic):
        return [{"shift": k} for k in range(model.base.rule.period)]
    return [{}]


def hull_point(model: Model, desc: dict) -> ds.DynPoint:
    """Resolve a sample descriptor (``omega``, ``v``, ``component``, ``shift``) to a point."""
    unknown = set(desc) - {"omega", "v", "component", "shift"}
    if unknown:
        raise ConfigError(f"unknown hull-sample keys {sorted(unknown)}")
    x = model.base
    if "component" in desc:
        x = (model.components or (model.base,))[int(desc["component"])]
    if "omega" in desc:
        if not isinstance(x.rule if isinstance(x, ds.SubshiftPoint) else None, ds.SturmianCoding):
            raise ConfigError("'omega' samples need a Sturmian model")
        x = ds.sturmian_point(x.rule.alpha, Fraction(desc["omega"]))
    if "v" in desc:
        if not model.is_torus:
            raise ConfigError("'v' samples need a torus model")
        x = ds.TorusPoint(tuple(desc["v"]), x.beta)
    return ds.shift(x, int(desc.get("shift", 0)))


def _distinct(x, y) -> bool:
    if isinstance(x, ds.TorusPoint):
        return float(np.max(ds.circle_distance(x.v, y.v))) > 1e-12
    return ds.window(x, -64, 64) != ds.window(y, -64, 64)


# -- configuration and reports ----------------------------------------------------

@dataclass
class ExperimentConfig:
    model: Any = "sturmian-golden"
    N: int = 512
    q_list: tuple = (1, 2, 3, 5, 8, 13)
    n_theta: int = sp.DEFAULT_NTHETA
    grid: dict | None = None
    eps: tuple = sp.DEFAULT_EPS
    eps_check: float = 1e-2
    H: int = 10**5
    h_min: int = 1000
    r_idx: int = 1
    hull_samples: list | None = None
    words: tuple = ("0", "1", "01")
    n_max: int = 8
    L: int = 10**4
    tol_hausdorff: float = 0.1
    tol_trend: float = 0.02
    tol_incl: float = 0.05
    doubling: bool = True
    seed: int = 0

    def __post_init__(self):
        problems = []
        for name in ("N", "n_theta", "H", "h_min", "r_idx", "n_max", "L"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                problems.append(f"{name} must be a positive integer, got {v!r}")
        for name in ("eps_check", "tol_hausdorff", "tol_trend", "tol_incl"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                problems.append(f"{name} must be positive, got {v!r}")
        if not self.q_list or any(isinstance(q, bool) or not isinstance(q, int) or q < 1 for q in self.q_list):
            problems.append("q_list must be a nonempty list of positive integers")
        if not self.eps or any(not isinstance(e, (int, float)) or not e > 0 for e in self.eps):
            problems.append("eps must be a nonempty list of positive numbers")
        if any(not isinstance(w, str) or not w or set(w) - set("01") for w in self.words):
            problems.append("words must be nonempty binary strings")
        if isinstance(self.n_theta, int) and self.n_theta < 8:
            problems.append("n_theta must be at least 8")
        if isinstance(self.H, int) and isinstance(self.h_min, int) and self.H < self.h_min:
            problems.append("H must be at least h_min")
        if self.grid is not None:
            try:
                self.grid_spec(1.0)
            except (KeyError, TypeError, ValueError) as exc:
                problems.append(f"grid: {exc}")
        if problems:
            raise ConfigError(problems)
        self.q_list = tuple(self.q_list)
        self.eps = tuple(float(e) for e in self.eps)
        self.words = tuple(self.words)

    def grid_spec(self, wiener_bound: float) -> sp.GridSpec:
        if self.grid is None:
            return sp.GridSpec.around_disc(wiener_bound)
        g = self.grid
        if "step" in g and not ("re" in g or "im" in g):
            return sp.GridSpec.around_disc(wiener_bound, step=float(g["step"]), pad=float(g.get("pad", sp.DEFAULT_PAD)))
        (a, b), (c, d) = g["re"], g["im"]
        return sp.GridSpec(float(a), float(b), float(c), float(d), float(g.get("step", sp.DEFAULT_STEP)))

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = list(v)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError([f"unknown experiment key {k!r}" for k in unknown])
        kwargs = {k: tuple(v) if isinstance(v, list) and k in ("q_list", "eps", "words") else v
                  for k, v in d.items()}
        return cls(**kwargs)


@dataclass
class Check:
    name: str
    passed: bool
    measured: Any
    tolerance: Any = None
    detail: Any = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "pass": bool(self.passed), "measured": _jsonable(self.measured),
               "tolerance": _jsonable(self.tolerance)}
        if self.detail is not None:
            out["detail"] = _jsonable(self.detail)
        return out


@dataclass
class ExperimentReport:
    name: str
    config: dict
    checks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    #: artifact file name -> object with ``to_csv``
    artifacts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, measured, tolerance=None, detail=None) -> Check:
        if any(c.name == name for c in self.checks):
            raise ValueError(f"duplicate check {name!r}")
        c = Check(name, bool(passed), measured, tolerance, detail)
        self.checks.append(c)
        return c

    def check(self, name) -> Check:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self, artifact_paths=()) -> dict:
        return {"experiment": self.name, "config": _jsonable(self.config),
                "checks": [c.to_dict() for c in self.checks], "summary": _jsonable(self.summary),
                "artifacts": list(artifact_paths), "pass": self.passed}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    return v


def emit_report(report: ExperimentReport, path) -> list[str]:
    """Write the JSON report to ``path`` and its CSV artifacts next to it.

    Returns every path written.  Output is deterministic apart from the
    ``timestamp`` field.
    """
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    written = []
    for fname, obj in sorted(report.artifacts.items()):
        target = os.path.join(folder, fname)
        if fname.endswith(".grid.csv"):
            obj.to_csv(target, header_path=target[: -len(".csv")] + ".json")
            written.append(target[: -len(".csv")] + ".json")
        else:
            obj.to_csv(target)
        written.append(target)
    doc = report.to_dict(sorted(os.path.relpath(p, folder) for p in written))
    doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return written + [path]


# -- experiments ------------------------------------------------------------------

def _model(cfg: ExperimentConfig) -> Model:
    return model_from_config(cfg.model)


def _base_report(name, cfg) -> ExperimentReport:
    return ExperimentReport(name, cfg.to_dict())


def _set_hausdorff(a: np.ndarray, b: np.ndarray, cap: float) -> float:
    """Hausdorff distance with the conventions ``d(empty, empty) = 0`` and ``d(S, empty) = cap``."""
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return cap
    return sp.hausdorff(a, b)


def _pairwise(sets, cap):
    out = {}
    for (i, a), (j, b) in itertools.combinations(enumerate(sets), 2):
        out[f"{i}-{j}"] = _set_hausdorff(a, b, cap)
    return out


def constancy_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Compare epsilon-pseudospectra of N-sections at several hull points.

    Checks the largest pairwise Hausdorff distance of the ``eps_check``
    indicator sets against ``tol_hausdorff`` and, when ``doubling`` is on,
    that it does not grow by more than ``tol_trend`` from N to 2N.
    """
    model = _model(cfg)
    if not (model.minimal or model.constant):
        raise ConfigError(f"constancy needs a minimal system; model {model.id!r} is not minimal")
    samples = cfg.hull_samples if cfg.hull_samples is not None else default_hull_samples(model)
    points = [hull_point(model, s) for s in samples]
    if len(points) < 2:
        raise ConfigError("constancy needs at least two hull points")
    for (i, x), (j, y) in itertools.combinations(enumerate(points), 2):
        if not _distinct(x, y):
            raise ConfigError(f"hull samples {i} and {j} are the same point")
    F = model.family
    grid = cfg.grid_spec(F.bound())
    cap = math.hypot(grid.re_hi - grid.re_lo, grid.im_hi - grid.im_lo)
    eps = tuple(sorted(set(cfg.eps) | {cfg.eps_check}, reverse=True))
    report = _base_report("constancy", cfg)

    def run(N, keep):
        sets = []
        for k, x in enumerate(points):
            P = sp.section_pseudospectrum(F, x, N, grid, eps)
            sets.append(P.points(cfg.eps_check))
            if keep:
                report.artifacts[f"pseudospec_N{N}_p{k}.grid.csv"] = P
        return _pairwise(sets, cap), [int(s.size) for s in sets]

    pairs, sizes = run(cfg.N, True)
    worst = max(pairs.values())
    report.add("max_pairwise_hausdorff", worst <= cfg.tol_hausdorff, worst, cfg.tol_hausdorff,
               {"pairs": pairs, "indicator_sizes": sizes})
    report.summary.update(max_pairwise_hausdorff=worst, N=cfg.N, hull_samples=samples,
                          grid=grid.to_dict(), eps_check=cfg.eps_check)
    if cfg.doubling:
        pairs2, sizes2 = run(2 * cfg.N, False)
        worst2 = max(pairs2.values())
        report.add("doubling_trend", worst2 <= worst + cfg.tol_trend, worst2 - worst, cfg.tol_trend,
                   {"pairs_2N": pairs2, "indicator_sizes_2N": sizes2})
        report.summary["max_pairwise_hausdorff_2N"] = worst2
    return report


def approximant_words(model: Model, cfg: ExperimentConfig) -> list[str]:
    if model.is_torus:
        raise ConfigError("periodic approximants are only defined for subshift models")
    if model.id == "full-shift":
        return list(cfg.words)
    if isinstance(model.base.rule, ds.Periodic):
        return [model.base.rule.word]
    return [ds.window(model.base, 1, q) for q in cfg.q_list]


def _containment(report, F, x, words, N, cfg, doubling):
    """Per word: largest ``sigma_min(A_N(x) - z)`` over its Floquet points ``z``."""
    section = of.window_matrix(F, x, N)
    section2 = of.window_matrix(F, x, 2 * N) if doubling else None
    overall = 0.0
    for w in words:
        p = ds.periodic_point(w, F.alphabet)
        S = sp.floquet_spectrum(F, p, cfg.n_theta)
        report.artifacts[f"floquet_{w}.csv"] = S
        vals, _ = sp.sigma_min_grid(section, S.points)
        worst = float(vals.max())
        detail = {"q": len(w), "points": len(S)}
        if section2 is not None:
            detail["max_sigma_min_2N"] = float(sp.sigma_min_grid(section2, S.points)[0].max())
        report.add(f"containment[{w}]", worst <= cfg.tol_incl, worst, cfg.tol_incl, detail)
        overall = max(overall, worst)
    report.summary["max_violation"] = max(0.0, overall - cfg.tol_incl)
    report.summary["max_sigma_min"] = overall


def inclusion_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Floquet spectra of periodic approximants against sigma_min of the N-section."""
    model = _model(cfg)
    words = approximant_words(model, cfg)
    report = _base_report("inclusion", cfg)
    x = model.base
    if model.minimal:
        ok = of.self_similar_check(model.family, x, cfg.r_idx, cfg.h_min, cfg.H)
        report.add("self_similar", ok, ok, True)
    _containment(report, model.family, x, words, cfg.N, cfg, cfg.doubling)
    report.summary.update(words=words, N=cfg.N)
    return report


def pseudoergodic_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Word coverage of the concatenation point plus spectral containment of periodic words."""
    model = _model(cfg)
    if model.id != "full-shift":
        raise ConfigError(f"pseudo-ergodic experiment needs the full-shift model, got {model.id!r}")
    report = _base_report("pseudoergodic", cfg)
    x = model.base
    missing = {}
    for n in range(1, cfg.n_max + 1):
        miss = ds.coverage(x, n, cfg.L, ds.all_words(n))
        if len(miss):
            missing[n] = sorted(miss)
    total = sum(len(v) for v in missing.values())
    report.add("coverage", total == 0, total, 0, {"missing": missing} if missing else None)
    _containment(report, model.family, x, list(cfg.words), cfg.N, cfg, cfg.doubling)
    report.summary.update(n_max=cfg.n_max, L=cfg.L, missing_words=total, words=list(cfg.words), N=cfg.N)
    return report


def induced_system_check(cfg: ExperimentConfig) -> ExperimentReport:
    """Finite-window checks of the two induced-system fixtures."""
    model = _model(cfg)
    if model.id not in ("example-7-1", "example-7-2"):
        raise ConfigError(f"induced-system check needs example-7-1 or example-7-2, got {model.id!r}")
    report = _base_report("induced-system", cfg)
    F = model.family
    points = orbit_points(model)
    comp_of = [c for c, comp in enumerate(model.components) for _ in range(comp.rule.period)]
    cross = 0
    for (i, x), (j, y) in itertools.product(enumerate(points), repeat=2):
        if comp_of[i] != comp_of[j]:
            cross += len(ds.limit_witness(x, y, r=5, h_min=1, H=cfg.H))
    report.add("cross_component_witnesses", cross == 0, cross, 0)
    report.add("base_not_minimal", cross == 0 and len(model.components) >= 2, len(model.components), ">= 2")
    n = cfg.r_idx
    windows = [of.section(F, x, -n, n) for x in points]
    if model.id == "example-7-1":
        fixed = all(of.ad_u(w).same_entries(w) for w in windows)
        report.add("ad_u_fixes_windows", fixed, fixed, True)
        single = all(w.same_entries(windows[0]) for w in windows)
        report.add("single_operator", single, len({w.key() for w in windows}), 1)
        grid = cfg.grid_spec(F.bound())
        sets = [sp.section_pseudospectrum(F, x, cfg.N, grid, (cfg.eps_check,)).points(cfg.eps_check)
                for x in points]
        pairs = _pairwise(sets, math.inf)
        worst = max(pairs.values())
        report.add("pairwise_hausdorff", worst == 0.0, worst, 0.0, pairs)
    else:
        similar = [of.self_similar_check(F, x, cfg.r_idx, cfg.h_min, cfg.H) for x in points]
        report.add("self_similar_all", all(similar), sum(similar), len(points))
        distinct = len({w.key() for w in windows})
        report.add("injective_windows", distinct == len(points), distinct, len(points))
    report.summary.update(points=len(points), components=len(model.components))
    return report


EXPERIMENTS = {
    "constancy": constancy_experiment,
    "inclusion": inclusion_experiment,
    "pseudoergodic": pseudoergodic_experiment,
    "induced-system": induced_system_check,
}


def self_similarity_survey(model: Model, cfg: ExperimentConfig) -> dict:
    """``self_similar_check`` at every sampled hull point (torus models use ``TORUS_H``)."""
    samples = cfg.hull_samples if cfg.hull_samples is not None else default_hull_samples(model)
    H = max(cfg.H, TORUS_H) if model.is_torus else cfg.H
    out = {}
    for s in samples:
        x = hull_point(model, s)
        out[json.dumps(s, sort_keys=True)] = of.self_similar_check(model.family, x, cfg.r_idx, cfg.h_min, H)
    return out
