"""Command-line front end.

Every invocation is described by a JSON document (``--config``) or by the
equivalent flags; both routes go through :func:`validate` so the same rules
apply.  All files are written inside the ``--out`` directory.

Exit codes: 0 success, 1 a check failed, 2 configuration error,
3 numerical or resource error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import dynsys as ds
from . import experiments as ex
from . import opfamily as of
from . import spectral as sp
from .errors import (ConfigError, IncompatibleSystemsError, ModeError, NumericalError, RangeError,
                     ResourceError)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("orbit", "spectrum", "pseudospec", "floquet", "witness", "experiment")
FORMATS = ("csv", "json")
TOP_KEYS = {"command", "experiment", "model", "params", "out", "format"}


def _int(lo=None):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, int):
            return "must be an integer"
        if lo is not None and v < lo:
            return f"must be >= {lo}"
        return None
    return check


def _positive(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
        return "must be a positive number"
    return None


def _eps_list(v):
    if not isinstance(v, list) or not v or any(_positive(e) for e in v):
        return "must be a nonempty list of positive numbers"
    return None


def _interval(v):
    if (not isinstance(v, list) or len(v) != 2 or any(isinstance(t, bool) or not isinstance(t, (int, float)) for t in v)
            or v[0] > v[1]):
        return "must be [lo, hi] with lo <= hi"
    return None


def _choice(*options):
    def check(v):
        return None if v in options else f"must be one of {list(options)}"
    return check


def _word(v):
    return None if isinstance(v, str) and v and not set(v) - set("01") else "must be a nonempty binary string"


PARAMS = {
    "orbit": {"a": _int(), "b": _int(), "n": _int(1), "L": _int(1)},
    "spectrum": {"N": _int(1), "mode": _choice("zero", "periodic"), "q": _int(1)},
    "pseudospec": {"N": _int(1), "mode": _choice("zero", "periodic"), "q": _int(1), "step": _positive,
                   "eps": _eps_list, "re": _interval, "im": _interval},
    "floquet": {"q": _int(1), "ntheta": _int(8), "word": _word},
    "witness": {"r": _int(0), "r_idx": _int(0), "h_min": _int(1), "H": _int(1), "delta": _positive},
    "experiment": None,  # validated by ExperimentConfig
}

DEFAULTS = {
    "orbit": {"a": -20, "b": 20, "n": 5, "L": 1000},
    "spectrum": {"N": 8, "mode": "zero"},
    "pseudospec": {"N": 64, "mode": "zero", "eps": list(sp.DEFAULT_EPS)},
    "floquet": {"q": 1, "ntheta": sp.DEFAULT_NTHETA},
    "witness": {"r": 5, "r_idx": 1, "h_min": 1000, "H": 10**5, "delta": 1e-6},
    "experiment": {},
}


@dataclass
class CliConfig:
    command: str
    model: dict = field(default_factory=lambda: {"id": "shift"})
    params: dict = field(default_factory=dict)
    experiment: str | None = None
    out: str = "specband-out"
    format: str = "csv"

    def to_dict(self) -> dict:
        d = {"command": self.command, "model": self.model, "params": self.params, "out": self.out,
             "format": self.format}
        if self.experiment is not None:
            d["experiment"] = self.experiment
        return d

    def param(self, key):
        return self.params.get(key, DEFAULTS[self.command].get(key))


def serialize(cfg: CliConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def validate(doc) -> CliConfig:
    """Check a config document and list every violation at once."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    problems = [f"unknown key {k!r}" for k in sorted(set(doc) - TOP_KEYS)]
    command = doc.get("command")
    if command not in COMMANDS:
        problems.append(f"command must be one of {list(COMMANDS)}, got {command!r}")
    model = doc.get("model", {"id": "shift"})
    if isinstance(model, str):
        model = {"id": model}
    if not isinstance(model, dict):
        problems.append("model must be an id or an object with an 'id'")
        model = {}
    else:
        try:
            ex.model_from_config(model)
        except ConfigError as exc:
            problems.extend(f"model: {v}" for v in exc.violations)
    params = doc.get("params", {})
    if not isinstance(params, dict):
        problems.append("params must be an object")
        params = {}
    experiment = doc.get("experiment")
    if command == "experiment":
        if experiment not in ex.EXPERIMENTS:
            problems.append(f"experiment must be one of {sorted(ex.EXPERIMENTS)}, got {experiment!r}")
        if "model" in params:
            problems.append("params: the model belongs at the top level")
        else:
            try:
                ex.ExperimentConfig.from_dict({**params, "model": model})
            except ConfigError as exc:
                problems.extend(f"params: {v}" for v in exc.violations)
            except TypeError as exc:
                problems.append(f"params: {exc}")
    elif command in PARAMS:
        if experiment is not None:
            problems.append("'experiment' is only valid with the experiment command")
        schema = PARAMS[command]
        for k, v in params.items():
            if k not in schema:
                problems.append(f"params: unknown key {k!r} for {command}")
            else:
                msg = schema[k](v)
                if msg:
                    problems.append(f"params: {k} {msg}")
        if command == "witness" and not problems:
            if params.get("H", DEFAULTS["witness"]["H"]) < params.get("h_min", DEFAULTS["witness"]["h_min"]):
                problems.append("params: H must be at least h_min")
    out = doc.get("out", "specband-out")
    if not isinstance(out, str) or not out:
        problems.append("out must be a nonempty path")
    fmt = doc.get("format", "csv")
    if fmt not in FORMATS:
        problems.append(f"format must be one of {list(FORMATS)}")
    if problems:
        raise ConfigError(problems)
    return CliConfig(command, model, dict(params), experiment, out, fmt)


def parse_config(text: str) -> CliConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error: {exc}") from None
    return validate(doc)


# -- argument parsing ----------------------------------------------------------------

def _irrational_arg(text):
    """Named constant, or a JSON continued fraction like '{"cf":[0],"period":[1]}'."""
    text = text.strip()
    return json.loads(text) if text.startswith("{") else _number_or_name(text)


def _number_or_name(text):
    try:
        return float(text)
    except ValueError:
        return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its entries")
    common.add_argument("--model", help="catalog model id")
    common.add_argument("--alpha", type=_irrational_arg, help="Sturmian rotation number")
    common.add_argument("--beta", type=_irrational_arg, help="torus rotation number")
    common.add_argument("--lambda", dest="lam", type=float, help="coupling constant")
    common.add_argument("--selfadjoint", action=argparse.BooleanOptionalAction, default=None)
    common.add_argument("--model-word", help="word of the periodic model")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=FORMATS)

    p = argparse.ArgumentParser(prog="specband", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("orbit", parents=[common], help="window, factors, complexity and coverage")
    for k in ("a", "b", "n", "L"):
        s.add_argument(f"--{k}", type=int)

    s = sub.add_parser("spectrum", parents=[common], help="finite-section eigenvalues")
    s.add_argument("--N", type=int)
    s.add_argument("--mode", choices=("zero", "periodic"))
    s.add_argument("--q", type=int)

    s = sub.add_parser("pseudospec", parents=[common], help="sigma_min on a grid")
    s.add_argument("--N", type=int)
    s.add_argument("--mode", choices=("zero", "periodic"))
    s.add_argument("--q", type=int)
    s.add_argument("--step", type=float)
    s.add_argument("--eps", type=float, nargs="+")
    s.add_argument("--re", type=float, nargs=2)
    s.add_argument("--im", type=float, nargs=2)

    s = sub.add_parser("floquet", parents=[common], help="Floquet-Bloch spectrum of a periodic approximant")
    s.add_argument("--q", type=int)
    s.add_argument("--ntheta", type=int)
    s.add_argument("--word")

    s = sub.add_parser("witness", parents=[common], help="limit and self-similarity witnesses")
    s.add_argument("--r", type=int)
    s.add_argument("--r-idx", dest="r_idx", type=int)
    s.add_argument("--h-min", dest="h_min", type=int)
    s.add_argument("--H", type=int)
    s.add_argument("--delta", type=float)

    s = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    s.add_argument("experiment", choices=sorted(ex.EXPERIMENTS))
    s.add_argument("--N", type=int)
    s.add_argument("--q-list", dest="q_list", type=int, nargs="+")
    s.add_argument("--ntheta", dest="n_theta", type=int)
    s.add_argument("--step", type=float)
    s.add_argument("--eps-check", dest="eps_check", type=float)
    s.add_argument("--H", type=int)
    s.add_argument("--h-min", dest="h_min", type=int)
    s.add_argument("--words", nargs="+")
    s.add_argument("--no-doubling", dest="doubling", action="store_const", const=False)
    return p


_META = {"config", "model", "alpha", "beta", "lam", "selfadjoint", "model_word", "out", "format", "command",
         "experiment"}


def config_from_args(ns: argparse.Namespace) -> CliConfig:
    doc = {}
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                doc = json.loads(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"syntax error in {ns.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    doc["command"] = ns.command
    model = doc.get("model", {"id": "shift"})
    model = {"id": model} if isinstance(model, str) else dict(model)
    if ns.model:
        model = {"id": ns.model}
    for attr, key in (("alpha", "alpha"), ("beta", "beta"), ("lam", "lambda"), ("selfadjoint", "selfadjoint"),
                      ("model_word", "word")):
        if getattr(ns, attr) is not None:
            model[key] = getattr(ns, attr)
    doc["model"] = model
    if ns.out:
        doc["out"] = ns.out
    if ns.format:
        doc["format"] = ns.format
    params = dict(doc.get("params", {}))
    for k, v in vars(ns).items():
        if k in _META or v is None:
            continue
        if ns.command == "experiment" and k == "step":
            params["grid"] = {"step": v}
        else:
            params[k] = v
    doc["params"] = params
    if ns.command == "experiment":
        doc["experiment"] = ns.experiment
    return validate(doc)


# -- dispatch ------------------------------------------------------------------------

class _Writer:
    """Resolves output names inside the output directory and refuses anything else."""

    def __init__(self, out):
        self.root = os.path.abspath(out)
        self.written = []

    def path(self, name):
        target = os.path.abspath(os.path.join(self.root, name))
        if os.path.dirname(target) != self.root:
            raise ConfigError(f"refusing to write {name!r} outside {self.root}")
        os.makedirs(self.root, exist_ok=True)
        self.written.append(target)
        return target

    def json(self, name, obj):
        with open(self.path(name), "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")


def _spectrum_out(w: _Writer, name, S: sp.SpectrumSet, fmt):
    if fmt == "csv":
        S.to_csv(w.path(name + ".csv"))
    else:
        w.json(name + ".json", {"points": [[z.real, z.imag] for z in S.points], "sources": list(S.sources)})


def _approximant(model: ex.Model, cfg: CliConfig) -> ds.SubshiftPoint:
    word = cfg.params.get("word")
    if word is None:
        if model.is_torus:
            raise ConfigError("Floquet-Bloch reduction needs a subshift model")
        if isinstance(model.base.rule, ds.Periodic) and "q" not in cfg.params:
            return model.base
        word = ds.window(model.base, 1, cfg.param("q"))
    return ds.periodic_point(word, model.family.alphabet)


def _run_orbit(model, cfg, w):
    x = model.base
    if model.is_torus:
        v = x.angles(np.arange(cfg.param("a"), cfg.param("b") + 1))[:, 0]
        w.json("orbit.json", {"angles": v.tolist()})
        return EXIT_OK
    n, L = cfg.param("n"), cfg.param("L")
    words = ds.factors(x, n, L)
    missing = ds.coverage(x, n, L, ds.all_words(n, x.alphabet))
    w.json("orbit.json", {"window": ds.window(x, cfg.param("a"), cfg.param("b")), "a": cfg.param("a"),
                          "b": cfg.param("b"), "n": n, "L": L, "factors": list(words),
                          "complexity": len(words), "missing": list(missing)})
    return EXIT_OK


def _run_spectrum(model, cfg, w):
    if cfg.param("mode") == "periodic":
        W = of.window_matrix(model.family, model.base, mode="periodic", q=cfg.params.get("q"))
        S = sp.eig_dense(W, source=f"periodic(q={W.size})")
    else:
        S = sp.section_spectrum(model.family, model.base, cfg.param("N"))
    _spectrum_out(w, "spectrum", S, cfg.format)
    return EXIT_OK


def _run_pseudospec(model, cfg, w):
    F = model.family
    if "re" in cfg.params or "im" in cfg.params:
        r = F.bound() + sp.DEFAULT_PAD
        re, im = cfg.params.get("re", [-r, r]), cfg.params.get("im", [-r, r])
        grid = sp.GridSpec(re[0], re[1], im[0], im[1], cfg.params.get("step", sp.DEFAULT_STEP))
    else:
        grid = sp.GridSpec.around_disc(F.bound(), step=cfg.params.get("step", sp.DEFAULT_STEP))
    if cfg.param("mode") == "periodic":
        W = of.window_matrix(F, model.base, mode="periodic", q=cfg.params.get("q"))
    else:
        W = of.window_matrix(F, model.base, cfg.param("N"))
    P = sp.pseudospectrum(W, grid, cfg.param("eps"))
    if cfg.format == "csv":
        P.to_csv(w.path("pseudospec.csv"), header_path=w.path("pseudospec.json"))
    else:
        w.json("pseudospec.json", {**P.header(), "sigma_min": P.sigma.tolist()})
    return EXIT_OK


def _run_floquet(model, cfg, w):
    p = _approximant(model, cfg)
    S = sp.floquet_spectrum(model.family, p, cfg.param("ntheta"))
    _spectrum_out(w, "floquet", S, cfg.format)
    return EXIT_OK


def _run_witness(model, cfg, w):
    x, F = model.base, model.family
    r, h_min, H, delta = cfg.param("r"), cfg.param("h_min"), cfg.param("H"), cfg.param("delta")
    hits = ds.limit_witness(x, x, r=r, h_min=h_min, H=H, delta=delta)
    similar = of.self_similar_check(F, x, cfg.param("r_idx"), h_min, H, delta)
    doc = {"self_similar": similar, "self_witnesses": hits, "count": len(hits),
           "r": r, "r_idx": cfg.param("r_idx"), "h_min": h_min, "H": H}
    if not model.is_torus:
        doc["limit_windows"] = len(of.limit_operator_windows(F, x, cfg.param("r_idx"), h_min, H))
    w.json("witness.json", doc)
    return EXIT_OK


def _run_experiment(model, cfg, w):
    ecfg = ex.ExperimentConfig.from_dict({**cfg.params, "model": cfg.model})
    report = ex.EXPERIMENTS[cfg.experiment](ecfg)
    ex.emit_report(report, w.path(f"{cfg.experiment}.json"))
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: measured={c.measured} tolerance={c.tolerance}")
    return EXIT_OK if report.passed else EXIT_CHECK


RUNNERS = {"orbit": _run_orbit, "spectrum": _run_spectrum, "pseudospec": _run_pseudospec,
           "floquet": _run_floquet, "witness": _run_witness, "experiment": _run_experiment}


def execute(cfg: CliConfig) -> int:
    model = ex.model_from_config(cfg.model)
    return RUNNERS[cfg.command](model, cfg, _Writer(cfg.out))


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return execute(config_from_args(ns))
    except (ConfigError, ModeError, IncompatibleSystemsError, RangeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ResourceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())
