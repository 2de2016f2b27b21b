"""``forestfire`` command line: reproducible experiments over the library.

Every run is described by a :class:`RunConfig` that is validated before any
computation. Options may come from ``--config FILE`` (a JSON object) and
from flags; flags win. CSV output opens with ``# config_sha256=... seed=...``
and JSON output carries the same data under ``"meta"``. Invalid input exits
with status 2 and a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import mpmath
import numpy as np

from . import __version__, acceptance, exact, special, tailbound
from .errors import ForestFireError
from .graph import GraphSpec
from .simulator import RngHandle, first_burnouts, sample_tau_replicas
from .stats import empirical_survival, summarize, write_csv

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SUBCOMMANDS = ("simulate", "moments", "dickman", "gd1", "tailbound", "verify")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """The command line or config file does not describe a valid run."""


# --- schema -------------------------------------------------------------------

# Shared by every subcommand; `out` and `workers` do not affect results and
# are left out of the config hash.
COMMON = {
    "seed": (int, 0),
    "workers": (int, 1),
    "precision_bits": ((int, type(None)), None),
    "out": (str, "-"),
    "format": (str, "csv"),
}

PARAMS: Dict[str, Dict[str, tuple]] = {
    "simulate": {
        "n": (int, 2),
        "samples": (int, 10_000),
        "streams": (int, 1),
        "reference": (str, "auto"),
        "graph": ((str, type(None)), None),
        "target": ((str, int), "far"),
        "horizon": ((int, float), 1e6),
        "replicas": (int, 1000),
    },
    "moments": {"n": (str, "0..2"), "exact": (bool, False)},
    "dickman": {
        "eval": ((list, type(None)), None),
        "table": ((list, type(None)), None),
    },
    "gd1": {"sample": (int, 10_000), "eps": ((int, float), 1e-9)},
    "tailbound": {
        "p": ((int, float), 0.75),
        "theta": ((int, float, type(None)), None),
        "theta_from_sim": (bool, False),
        "grid": (int, 64),
        "x": (str, "0:100:1"),
        "replicas": (int, 2000),
        "theta_replicas": (int, 2000),
    },
    "verify": {"quick": (bool, False)},
}

REFERENCES = ("auto", "none", "exp", "tau1", "tau2", "dickman")
HASH_EXCLUDE = ("out", "workers")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    seed: int = 0
    workers: int = 1
    precision_bits: Optional[int] = None
    out: str = "-"
    format: str = "csv"
    params: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, data: Dict[str, Any]) -> "RunConfig":
        """Validate a flat mapping of options; unknown keys are rejected."""
        data = dict(data)
        sub = data.pop("subcommand", None)
        if sub not in PARAMS:
            raise ConfigError(f"subcommand must be one of {', '.join(SUBCOMMANDS)}, got {sub!r}")
        schema = {**COMMON, **PARAMS[sub]}
        unknown = sorted(set(data) - set(schema))
        if unknown:
            raise ConfigError(f"unknown keys for {sub}: {', '.join(unknown)}")
        values = {}
        for key, (types, default) in schema.items():
            v = data.get(key, default)
            if isinstance(v, bool) and bool not in _as_tuple(types):
                raise ConfigError(f"{key} must not be a boolean")
            if not isinstance(v, types):
                raise ConfigError(f"{key} has type {type(v).__name__}")
            values[key] = v
        common = {k: values.pop(k) for k in COMMON}
        cfg = cls(subcommand=sub, params=values, **common)
        cfg._check()
        return cfg

    def _check(self):
        p = self.params
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must lie in [0, 2^64)")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.precision_bits is not None and not 53 <= self.precision_bits <= exact.MAX_PRECISION:
            raise ConfigError(f"precision_bits must lie in [53, {exact.MAX_PRECISION}]")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        sub = self.subcommand
        if sub == "simulate":
            _positive(p, "samples", "streams", "replicas")
            if p["n"] < 0:
                raise ConfigError("n must be nonnegative")
            if p["reference"] not in REFERENCES:
                raise ConfigError(f"reference must be one of {', '.join(REFERENCES)}")
            if p["graph"] is not None:
                parse_graph(p["graph"])
            if not p["horizon"] > 0:
                raise ConfigError("horizon must be positive")
        elif sub == "moments":
            lo, hi = parse_range(p["n"])
            if p["exact"] and hi > exact.EXACT_MEAN_N_MAX:
                raise ConfigError(f"exact output supports n <= {exact.EXACT_MEAN_N_MAX}")
        elif sub == "dickman":
            if (p["eval"] is None) == (p["table"] is None):
                raise ConfigError("give exactly one of --eval or --table")
            if p["eval"] is not None:
                if not p["eval"] or not all(_is_number(v) and v >= 0 for v in p["eval"]):
                    raise ConfigError("eval points must be nonnegative numbers")
            else:
                t = p["table"]
                if len(t) != 2 or not all(_is_number(v) for v in t):
                    raise ConfigError("table takes x_max and h")
                if not (t[0] > 0 and 0 < t[1] <= t[0]):
                    raise ConfigError("table needs 0 < h <= x_max")
                if t[0] / t[1] > 10**6:
                    raise ConfigError("table would exceed 10^6 rows")
        elif sub == "gd1":
            _positive(p, "sample")
            if not 0 < p["eps"] < 1:
                raise ConfigError("eps must lie in (0, 1)")
        elif sub == "tailbound":
            if not 0 < p["p"] < 1:
                raise ConfigError("p must lie in (0, 1)")
            if (p["theta"] is None) == (not p["theta_from_sim"]):
                raise ConfigError("give exactly one of --theta or --theta-from-sim")
            if p["theta"] is not None and not 0 < p["theta"] <= 1:
                raise ConfigError("theta must lie in (0, 1]")
            if p["grid"] < 3:
                raise ConfigError("grid must be at least 3")
            if p["replicas"] < 0:
                raise ConfigError("replicas must be nonnegative")
            _positive(p, "theta_replicas")
            parse_grid(p["x"])

    def as_dict(self) -> Dict[str, Any]:
        d = {"subcommand": self.subcommand, "seed": self.seed, "workers": self.workers,
             "precision_bits": self.precision_bits, "out": self.out, "format": self.format}
        d.update(self.params)
        return d

    def sha256(self) -> str:
        d = {k: v for k, v in self.as_dict().items() if k not in HASH_EXCLUDE}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def header(self) -> List[str]:
        return [f"config_sha256={self.sha256()} seed={self.seed}",
                f"forestfire {__version__} {self.subcommand}"]


def _as_tuple(t):
    return t if isinstance(t, tuple) else (t,)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _positive(p, *keys):
    for k in keys:
        if p[k] < 1:
            raise ConfigError(f"{k} must be at least 1")


def parse_range(text: str):
    """'3' or '0..5' (inclusive) to a (lo, hi) pair."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"bad range {text!r}; use N or LO..HI") from None
    if not 0 <= lo <= hi:
        raise ConfigError(f"bad range {text!r}; need 0 <= LO <= HI")
    return lo, hi


def parse_grid(text: str) -> np.ndarray:
    """'start:stop:step' with stop included when it falls on the grid."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; use START:STOP:STEP") from None
    if not (step > 0 and 0 <= start <= stop):
        raise ConfigError(f"bad grid {text!r}; need 0 <= START <= STOP and STEP > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count > 10**6:
        raise ConfigError("grid has more than 10^6 points")
    return start + step * np.arange(count)


def parse_graph(text: str) -> GraphSpec:
    """'path:L' (sites 0..L) or 'torus:R' / 'torus:RxC'."""
    kind, _, arg = text.partition(":")
    try:
        if kind == "path":
            L = int(arg)
            if L < 1:
                raise ValueError
            return GraphSpec.path(L + 1)
        if kind == "torus":
            r, _, c = arg.partition("x")
            rows = int(r)
            cols = int(c) if c else rows
            if rows < 3 or cols < 3:
                raise ValueError
            return GraphSpec.torus(rows, cols)
    except ValueError:
        pass
    raise ConfigError(f"bad graph {text!r}; use path:L or torus:R[xC]")


# --- argument parsing -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file of options; flags override it")
    p.add_argument("--seed", type=int, default=S, help="master seed (default 0)")
    p.add_argument("--workers", type=int, default=S, help="worker processes for Monte Carlo")
    p.add_argument("--precision-bits", dest="precision_bits", type=int, default=S,
                   help="mpmath working precision for exact quantities")
    p.add_argument("--out", default=S,
                   help="output path, '-' for stdout; 'csv' or 'json' also mean stdout in that format")
    p.add_argument("--format", choices=FORMATS, default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="forestfire", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"forestfire {__version__}")
    subs = parser.add_subparsers(dest="subcommand", parser_class=_Parser, required=True)

    sim = subs.add_parser("simulate", help="sample inter-burnout gaps or graph first-burnout times")
    sim.add_argument("--n", type=int, default=S, help="site index")
    sim.add_argument("--samples", type=int, default=S)
    sim.add_argument("--streams", type=int, default=S, help="independent chains")
    sim.add_argument("--reference", choices=REFERENCES, default=S,
                     help="reference CDF for the KS statistic in the summary")
    sim.add_argument("--graph", default=S, help="path:L or torus:R[xC]; switches to first-burnout mode")
    sim.add_argument("--target", default=S, help="target vertex index or 'far'")
    sim.add_argument("--horizon", type=float, default=S)
    sim.add_argument("--replicas", type=int, default=S)

    mom = subs.add_parser("moments", help="exact mean, variance and A_n")
    mom.add_argument("--n", default=S, help="N or LO..HI")
    mom.add_argument("--exact", action="store_true", default=S, help="print rationals as p/q")

    dk = subs.add_parser("dickman", help="Dickman rho, density, CDF and GD(1) CDF")
    dk.add_argument("--eval", type=float, nargs="+", default=S, metavar="X")
    dk.add_argument("--table", type=float, nargs=2, default=S, metavar=("X_MAX", "H"))

    gd = subs.add_parser("gd1", help="sample GD(1)")
    gd.add_argument("--sample", type=int, default=S, metavar="N")
    gd.add_argument("--eps", type=float, default=S)

    tb = subs.add_parser("tailbound", help="first-burnout tail bound on a torus")
    tb.add_argument("--p", type=float, default=S)
    tb.add_argument("--theta", type=float, default=S)
    tb.add_argument("--theta-from-sim", dest="theta_from_sim", action="store_true", default=S)
    tb.add_argument("--grid", type=int, default=S, help="torus side length")
    tb.add_argument("--x", default=S, help="START:STOP:STEP")
    tb.add_argument("--replicas", type=int, default=S, help="fire replicas for the empirical curve")
    tb.add_argument("--theta-replicas", dest="theta_replicas", type=int, default=S)

    vf = subs.add_parser("verify", help="run the acceptance suite")
    vf.add_argument("--quick", action="store_true", default=S)

    for p in (sim, mom, dk, gd, tb, vf):
        _common(p)
    return parser


def config_from_args(argv: List[str]) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    data: Dict[str, Any] = {}
    path = ns.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        if loaded.get("subcommand", ns["subcommand"]) != ns["subcommand"]:
            raise ConfigError("config file names a different subcommand")
        data.update(loaded)
    data.update(ns)
    out = data.get("out")
    if out in FORMATS:
        if "format" in ns and ns["format"] != out:
            raise ConfigError(f"--out {out} conflicts with --format {ns['format']}")
        data["out"], data["format"] = "-", out
    return RunConfig.from_mapping(data)


# --- subcommands ---------------------------------------------------------------


@dataclass
class Output:
    """Rows for CSV or a document for JSON, plus an exit status."""

    header: List[str] = field(default_factory=list)
    rows: List[list] = field(default_factory=list)
    doc: Dict[str, Any] = field(default_factory=dict)
    status: int = EXIT_OK


def _fmt(x) -> str:
    return repr(float(x))


def _reference_cdf(name: str, n: int) -> Optional[Callable]:
    if name == "auto":
        name = {0: "exp", 1: "tau1", 2: "tau2"}.get(n, "dickman")
    if name == "none":
        return None
    if name == "exp":
        return lambda u: -np.expm1(-np.asarray(u, dtype=float))
    if name == "tau1":
        return lambda u: 1 - acceptance.survival_tau1(u)
    if name == "tau2":
        return lambda u: 1 - acceptance.survival_tau2(u)
    if n < 2:
        raise ConfigError("the Dickman reference needs n >= 2")
    scale = math.log(n)
    return lambda u: special.dickman_cdf(np.asarray(u, dtype=float) / scale)


def run_simulate(cfg: RunConfig) -> Output:
    p = cfg.params
    if p["graph"] is not None:
        return _run_graph(cfg)
    gaps, replica = sample_tau_replicas(p["n"], p["samples"], cfg.seed, p["streams"], cfg.workers)
    if cfg.format == "json":
        summary = summarize(gaps).to_dict(_reference_cdf(p["reference"], p["n"]))
        summary["reference"] = p["reference"]
        return Output(doc={"n": p["n"], "summary": summary})
    rows = [[p["n"], int(r), _fmt(g)] for r, g in zip(replica, gaps)]
    return Output(["site", "replica", "gap"], rows)


def _run_graph(cfg: RunConfig) -> Output:
    p = cfg.params
    g = parse_graph(p["graph"])
    if p["target"] == "far":
        target = g.far_vertex()
    else:
        try:
            target = int(p["target"])
        except ValueError:
            raise ConfigError("target must be a vertex index or 'far'") from None
        if not 0 <= target < g.n_vertices:
            raise ConfigError(f"target {target} is not a vertex")
    fb = first_burnouts(g, target, float(p["horizon"]), p["replicas"], RngHandle(cfg.seed), cfg.workers)
    if cfg.format == "json":
        doc = {"graph": p["graph"], "target": target, "horizon": fb.horizon,
               "censored": int(fb.censored.sum())}
        if fb.observed.size:
            doc["summary"] = summarize(fb.observed).to_dict()
        return Output(doc=doc)
    rows = [[i, _fmt(t), int(c)] for i, (t, c) in enumerate(zip(fb.times, fb.censored))]
    return Output(["replica", "time", "censored"], rows)


def _digits(cfg: RunConfig) -> int:
    return 17 if cfg.precision_bits is None else max(17, int(cfg.precision_bits * math.log10(2)))


def run_moments(cfg: RunConfig) -> Output:
    lo, hi = parse_range(cfg.params["n"])
    prec = cfg.precision_bits
    digits = _digits(cfg)
    ctx = mpmath.MPContext()
    ctx.prec = max(prec or 0, 128)
    rows, records = [], []
    for n in range(lo, hi + 1):
        A_n = exact.A(n, "alternating" if n <= 1000 else "integral", prec) if n >= 1 else ctx.zero
        if cfg.params["exact"]:
            mu = exact.mean_tau_exact(n)
            var = 2 * mu * exact.harmonic(n + 1) - mu * mu
            mu_s, var_s = _frac(mu), _frac(var)
        else:
            mu_s = ctx.nstr(exact.mean_tau(n, prec), digits)
            var_s = ctx.nstr(exact.variance_tau(n, prec), digits)
        A_s = ctx.nstr(A_n, digits)
        gap_s = ctx.nstr(ctx.mpf(A_n) - ctx.log(ctx.log(n)), digits) if n >= 2 else ""
        rows.append([n, mu_s, var_s, A_s, gap_s])
        records.append({"n": n, "mu": mu_s, "var": var_s, "A_n": A_s,
                        "A_n_minus_loglog_n": gap_s or None})
    return Output(["n", "mu", "var", "A_n", "A_n_minus_loglog_n"], rows, {"moments": records})


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def run_dickman(cfg: RunConfig) -> Output:
    p = cfg.params
    if p["eval"] is not None:
        xs = np.asarray(p["eval"], dtype=float)
    else:
        x_max, h = p["table"]
        xs = np.arange(int(math.floor(x_max / h + 1e-9)) + 1) * h
    cols = [xs, special.dickman_rho(xs), special.dickman_density(xs),
            special.dickman_cdf(xs), special.gd1_cdf(xs)]
    cols = [np.atleast_1d(c) for c in cols]
    names = ["x", "rho", "f", "F", "gd1_cdf"]
    rows = [[_fmt(v) for v in r] for r in zip(*cols)]
    doc = {"values": [dict(zip(names, (float(v) for v in r))) for r in zip(*cols)]}
    return Output(names, rows, doc)


def run_gd1(cfg: RunConfig) -> Output:
    p = cfg.params
    draws = np.atleast_1d(special.gd1_sample(RngHandle(cfg.seed), p["eps"], p["sample"]))
    if cfg.format == "json":
        return Output(doc={"eps": p["eps"], "summary": summarize(draws).to_dict(special.gd1_cdf)})
    return Output(["index", "value"], [[i, _fmt(v)] for i, v in enumerate(draws)])


def run_tailbound(cfg: RunConfig) -> Output:
    p = cfg.params
    xs = parse_grid(p["x"])
    g = GraphSpec.torus(p["grid"])
    doc: Dict[str, Any] = {"p": p["p"], "grid": p["grid"]}
    if p["theta_from_sim"]:
        est = tailbound.estimate_theta(g, p["p"], p["theta_replicas"], RngHandle(cfg.seed, 1))
        theta = est.value
        doc["theta_estimate"] = {"value": est.value, "stderr": est.stderr, "replicas": est.replicas}
    else:
        theta = p["theta"]
    params = tailbound.TailBoundParams(p["p"], theta)
    doc.update(theta=theta, S=params.S, gamma=params.gamma, t_max=params.t_max, **{"lambda": params.lam})
    # the clamped bound tends to 1 as x -> 0+
    bound = np.ones_like(xs)
    pos = xs > 0
    if pos.any():
        bound[pos] = tailbound.tail_bound(xs[pos], params)
    if p["replicas"] > 0:
        fb = first_burnouts(g, g.far_vertex(), 1e6, p["replicas"], RngHandle(cfg.seed, 2), cfg.workers)
        curve = empirical_survival(fb.times, xs)
        surv = [_fmt(v) for v in curve.survival]
        se = [_fmt(v) for v in curve.se]
        doc["replicas"] = p["replicas"]
        doc["censored"] = int(fb.censored.sum())
    else:
        surv = se = [""] * xs.size
    rows = [[_fmt(x), _fmt(b), s, e] for x, b, s, e in zip(xs, bound, surv, se)]
    doc["curve"] = [{"x": float(x), "bound": float(b), "empirical_survival": float(s) if s else None,
                     "empirical_se": float(e) if e else None}
                    for x, b, s, e in zip(xs, bound, surv, se)]
    return Output(["x", "bound", "empirical_survival", "empirical_se"], rows, doc)


def run_verify(cfg: RunConfig) -> Output:
    results = acceptance.run_all(quick=cfg.params["quick"])
    ok = all(r.passed for r in results)
    rows = [[r.number, r.name, "pass" if r.passed else "fail", r.detail, f"{r.seconds:.3f}"]
            for r in results]
    doc = {"quick": cfg.params["quick"], "passed": ok,
           "criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                         "detail": r.detail, "seconds": r.seconds, "budget": r.budget}
                        for r in results]}
    return Output(["criterion", "name", "result", "detail", "seconds"], rows, doc,
                  EXIT_OK if ok else EXIT_FAILED)


RUNNERS = {
    "simulate": run_simulate,
    "moments": run_moments,
    "dickman": run_dickman,
    "gd1": run_gd1,
    "tailbound": run_tailbound,
    "verify": run_verify,
}


def render(cfg: RunConfig, out: Output) -> str:
    buf = io.StringIO()
    if cfg.format == "json":
        doc = {"meta": {"config_sha256": cfg.sha256(), "seed": cfg.seed,
                        "subcommand": cfg.subcommand, "version": __version__}}
        doc.update(out.doc)
        json.dump(doc, buf, indent=2, sort_keys=True)
        buf.write("\n")
    else:
        write_csv(buf, out.header, out.rows, cfg.header())
    return buf.getvalue()


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute a validated config, write its artifact, return the exit status."""
    out = RUNNERS[cfg.subcommand](cfg)
    text = render(cfg, out)
    if cfg.out == "-":
        (stdout or sys.stdout).write(text)
    else:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    return out.status


def _fail(kind: str, message: str, status: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return status


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    try:
        return run(cfg)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    except (ForestFireError, ValueError, OSError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
