"""``fresnelio`` command line: one experiment per invocation, CSV trace plus JSON summary.

Each subcommand reads its settings from ``--config`` (a JSON ExperimentConfig)
and/or per-experiment flags; explicit flags win.  Data rows carry no
wall-clock content, so re-running a config reproduces the CSV byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import catalog as C
from . import corpus
from . import fresnel as F
from . import gabor as G
from . import projective as P
from . import schrodinger as S
from .errors import (CauchyCheckFailed, ConfigError, DimensionError, Divergent, FresnelioError,
                     NonConvergent, NotClosedForm, ResolutionError)
from .quadrature import GridSpec
from .tails import tail_from_dict

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG = 0, 1, 2


# ---------------------------------------------------------------- config

@dataclass
class ExperimentConfig:
    """Validated settings for one run; unknown fields are rejected."""

    experiment: str
    function: object = None
    preset: str | None = None
    window: dict | None = None
    grid: dict | None = None
    schedules: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    output: str = "fresnelio-out"
    seed: int = 0
    hbar: float = 1.0

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError(f"unknown config fields: {', '.join(extra)}")
        if "experiment" not in d:
            raise ConfigError("config needs an 'experiment' field")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def to_dict(self):
        return dataclasses.asdict(self)

    def validate(self):
        exp = EXPERIMENTS.get(self.experiment)
        if exp is None:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"registered: {', '.join(sorted(EXPERIMENTS))}")
        for name, val, allowed in (("options", self.options, exp.options),
                                   ("tolerances", self.tolerances, exp.tolerances),
                                   ("schedules", self.schedules, exp.schedules)):
            if not isinstance(val, dict):
                raise ConfigError(f"{name} must be an object")
            bad = sorted(set(val) - set(allowed))
            if bad:
                raise ConfigError(f"unknown {name} for {self.experiment}: {', '.join(bad)}")
        if self.preset is not None and self.preset not in exp.presets:
            raise ConfigError(f"unknown preset {self.preset!r} for {self.experiment}; "
                              f"known: {', '.join(exp.presets) or 'none'}")
        if self.window is not None:
            _check_keys("window", self.window, {"q", "type"})
            if self.window.get("type", "standard") not in ("standard", "unit"):
                raise ConfigError("window type must be 'standard' or 'unit'")
        if self.grid is not None:
            _check_keys("grid", self.grid, {"R", "h"})
            try:
                GridSpec(self.grid.get("R", 1.0), self.grid.get("h", 1.0))
            except (ValueError, TypeError) as e:
                raise ConfigError(f"bad grid: {e}") from None
        for k, v in self.tolerances.items():
            if not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"tolerance {k} must be a positive number")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")
        if not (isinstance(self.hbar, (int, float)) and self.hbar > 0):
            raise ConfigError("hbar must be positive")

    # resolved views
    def opt(self, key):
        exp = EXPERIMENTS[self.experiment]
        return self.options.get(key, exp.options[key])

    def tol(self, key):
        exp = EXPERIMENTS[self.experiment]
        return float(self.tolerances.get(key, exp.tolerances[key]))

    def sched(self, key):
        exp = EXPERIMENTS[self.experiment]
        return self.schedules.get(key, exp.schedules[key])

    @property
    def params(self):
        return C.Params(float(self.hbar))

    def grid_spec(self, default):
        """The configured grid; missing entries fall back to ``default``."""
        if self.grid is None:
            return default
        if default is None and set(self.grid) != {"R", "h"}:
            raise ConfigError("this experiment needs both grid R and h")
        R = self.grid.get("R", default.R[0] if default else None)
        h = self.grid.get("h", default.h[0] if default else None)
        return GridSpec(R, h)

    def window_for(self, dim):
        if self.window is None or self.window.get("type") == "unit":
            return G.unit_window(dim, self.hbar)
        q = self.window.get("q")
        if q is None:
            raise ConfigError("standard window needs 'q'")
        q = np.atleast_1d(np.asarray(q, dtype=float))
        if len(q) == 1 and dim > 1:
            q = np.repeat(q, dim)
        if len(q) != dim:
            raise ConfigError(f"window has {len(q)} eigenvalues, function has dim {dim}")
        return G.standard_window(q, self.hbar)

    def resolved(self):
        """Options, tolerances and schedules with the experiment defaults filled in."""
        exp = EXPERIMENTS[self.experiment]
        return {"options": {**exp.options, **self.options},
                "tolerances": {**exp.tolerances, **self.tolerances},
                "schedules": {**exp.schedules, **self.schedules}}

    @property
    def run_id(self):
        return self.experiment + (f"-{self.preset}" if self.preset else "")


def _check_keys(name, d, allowed):
    if not isinstance(d, dict):
        raise ConfigError(f"{name} must be an object")
    bad = sorted(set(d) - allowed)
    if bad:
        raise ConfigError(f"unknown {name} fields: {', '.join(bad)}")


# ---------------------------------------------------------------- outcomes

@dataclass
class Outcome:
    anchor: str
    columns: list
    rows: list
    value: object
    error_estimate: float
    assertions: dict
    failing: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.assertions.values())


def _c(prefix, z):
    z = complex(z)
    return {f"{prefix}_re": z.real, f"{prefix}_im": z.imag}


def _cols(*names, cplx=()):
    out = []
    for n in names:
        out += [f"{n}_re", f"{n}_im"] if n in cplx else [n]
    return out


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        raise TypeError("complex cells must be split into _re/_im columns")
    return str(v)


def _json_num(v):
    if isinstance(v, complex):
        return {"re": _json_num(v.real), "im": _json_num(v.imag)}
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {str(k): _json_num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_num(x) for x in v]
    return v


def render_csv(out):
    buf = io.StringIO(newline="")
    buf.write(f"# {out.anchor}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(out.columns)
    for row in out.rows:
        w.writerow([_cell(row.get(c)) for c in out.columns])
    return buf.getvalue()


def render_summary(out, cfg):
    doc = {
        "experiment": cfg.run_id,
        "anchor": out.anchor,
        "value": _json_num(out.value),
        "error_estimate": _json_num(out.error_estimate),
        "assertions": {k: ("pass" if v else "fail") for k, v in out.assertions.items()},
        "notes": _json_num(out.notes),
        "config": _json_num({k: v for k, v in cfg.to_dict().items() if k != "output"}),
        "resolved": _json_num(cfg.resolved()),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------- experiments

@dataclass
class Experiment:
    name: str
    run: object
    options: dict
    tolerances: dict
    primary_tol: str | None = None
    schedules: dict = field(default_factory=dict)
    presets: tuple = ()
    default_function: str | None = None


def _function(cfg, default):
    spec = cfg.function if cfg.function is not None else default
    try:
        return corpus.function_from_spec(spec)
    except (KeyError, ValueError, TypeError) as e:
        raise ConfigError(f"bad function spec: {e}") from None


def _worst(rows, key):
    return max(rows, key=lambda r: r[key]) if rows else {}


def run_stft(cfg):
    f = _function(cfg, "chirp+")
    g = cfg.window_for(f.dim)
    grid = cfg.grid_spec(GridSpec.uniform(8.0, 0.05))
    rng = np.random.default_rng(cfg.seed)
    box = float(cfg.opt("box"))
    n = int(cfg.opt("points"))
    X = rng.uniform(-box, box, (n, f.dim))
    XI = rng.uniform(-box, box, (n, f.dim))
    closed = G.stft_closed(f, g, X, XI, cfg.params)
    rows = []
    for i in range(n):
        num = G.stft_numeric(f, g, X[i], XI[i], grid, cfg.params)
        row = {"i": i, "x": float(X[i, 0]), "xi": float(XI[i, 0]), "abs_err": abs(num - closed[i])}
        row.update(_c("closed", closed[i]))
        row.update(_c("numeric", num))
        rows.append(row)
    err = max(r["abs_err"] for r in rows)
    ok = err < cfg.tol("abs_err")
    return Outcome("closed-form STFT vs trapezoid quadrature",
                   ["i", "x", "xi"] + _cols("closed", "numeric", cplx=("closed", "numeric"))
                   + ["abs_err"],
                   rows, err, err, {"closed_vs_numeric": ok},
                   {} if ok else {"closed_vs_numeric": _worst(rows, "abs_err")})


def run_norm(cfg):
    f = _function(cfg, "cg1")
    g = cfg.window_for(f.dim)
    grid = cfg.grid_spec(None)
    rows, ok = [], True
    for name, fn in (("M_inf_1", G.norm_M_infty_1_estimate), ("M_1_inf", G.norm_M_1_infty_estimate)):
        try:
            est = fn(f, g, grid, cfg.params)
            row = {"norm": name, "value": est.value, "lower": est.lower, "upper": est.upper,
                   "exact": est.exact, "method": est.method}
            ok &= est.lower <= est.value * (1 + 1e-12) and est.value <= est.upper * (1 + 1e-12)
        except Divergent as e:
            row = {"norm": name, "value": math.inf, "lower": getattr(e, "partial", None),
                   "upper": math.inf, "exact": False, "method": "divergent"}
        rows.append(row)
    return Outcome("modulation-space norms of the input",
                   ["norm", "value", "lower", "upper", "exact", "method"],
                   rows, rows[0]["value"], rows[0]["upper"] - rows[0]["lower"]
                   if rows[0]["lower"] is not None else math.inf,
                   {"bracket": bool(ok)})


def _mollifiers(choice):
    if choice == "both":
        return ["gaussian", "sech"]
    if choice not in ("gaussian", "sech"):
        raise ConfigError(f"unknown mollifier {choice!r}")
    return [choice]


def run_fresnel(cfg):
    f = _function(cfg, cfg.preset or "constant1")
    method = cfg.opt("method")
    if method not in ("all", "direct", "phase_space", "parseval"):
        raise ConfigError(f"unknown method {method!r}")
    eps = cfg.sched("eps")
    rows, results = [], {}
    if method in ("all", "direct"):
        for m in _mollifiers(cfg.opt("mollifier")):
            sched = F.RegularizerSchedule(m, tuple(eps)) if eps else F.RegularizerSchedule(m)
            r = F.fresnel_direct(f, sched, params=cfg.params)
            results[f"direct_{m}"] = r
            for e, v in r.trace:
                rows.append({"method": "direct", "mollifier": m, "eps": e, **_c("value", v)})
    if method in ("all", "phase_space"):
        try:
            results["phase_space"] = F.fresnel_phase_space(f, params=cfg.params)
        except NotClosedForm as e:
            if method == "phase_space":
                raise ConfigError(str(e)) from None
    if method in ("all", "parseval"):
        try:
            results["parseval"] = F.fresnel_parseval(f, cfg.params)
        except NotClosedForm as e:
            if method == "parseval":
                raise ConfigError(str(e)) from None
    for k, r in results.items():
        rows.append({"method": k, "mollifier": k.split("_", 1)[1] if k.startswith("direct") else "",
                     "eps": 0.0, **_c("value", r.value)})
    vals = {k: complex(r.value) for k, r in results.items()}
    best = vals.get("parseval", vals.get("phase_space", next(iter(vals.values()))))
    asserts, failing, spread = {}, {}, 0.0
    tol = cfg.tol("agreement")
    for a, b in itertools.combinations(sorted(vals), 2):
        gap = abs(vals[a] - vals[b]) / (1 + abs(vals[b]))
        spread = max(spread, gap)
        name = f"{a}~{b}"
        asserts[name] = gap < tol
        if gap >= tol:
            failing[name] = {"pair": name, "relative_gap": gap}
    err = spread if len(vals) > 1 else next(iter(results.values())).error_estimate
    return Outcome("mollified Fresnel integral and its phase-space and Fourier routes",
                   ["method", "mollifier", "eps", "value_re", "value_im"],
                   rows, best, err, asserts, failing,
                   {"methods": {k: _json_num(v) for k, v in vals.items()}})


def _witness_schedule(spec):
    if spec == "default":
        return [10.0**-k for k in range(5)]
    if isinstance(spec, (list, tuple)) and spec and all(float(v) > 0 for v in spec):
        return [float(v) for v in spec]
    raise ConfigError("witness schedule must be 'default' or a list of positive numbers")


def run_norm_ln(cfg):
    seq = cfg.opt("q_sequence")
    if seq is not None:
        return _uniform_bound(cfg, seq)
    q = np.atleast_1d(np.asarray(cfg.opt("q"), dtype=float))
    if np.any(q <= 0):
        raise ConfigError("window eigenvalues must be positive")
    exact = F.op_norm_Ln(q)
    rows = []
    for s in _witness_schedule(cfg.sched("witness")):
        up, lo = F.op_norm_witnesses(q, s, s, cfg.params)
        rows.append({"alpha": s, "upper": up, "eps": s, "lower": lo, "op_norm": exact,
                     "gap": up - lo})
    last = rows[-1]
    sandwich = all(r["lower"] <= exact * (1 + 1e-14) and exact <= r["upper"] * (1 + 1e-14)
                   for r in rows)
    tight = last["gap"] < cfg.tol("gap_rel") * exact
    failing = {}
    if not sandwich:
        failing["sandwich"] = next(r for r in rows if not r["lower"] <= exact <= r["upper"])
    if not tight:
        failing["gap"] = last
    return Outcome("operator norm of the finite-dimensional Fresnel functional: witness sandwich",
                   ["alpha", "upper", "eps", "lower", "op_norm", "gap"],
                   rows, exact, last["gap"], {"sandwich": sandwich, "gap": tight}, failing)


def _uniform_bound(cfg, seq_spec):
    try:
        q = P.RealSequence(seq_spec)
        tail = cfg.opt("q_tail")
        tail = tail_from_dict(tail) if tail is not None else None
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"bad q sequence: {e}") from None
    n_max = int(cfg.opt("n_max"))
    rows = []
    for n in P.default_schedule(n_max):
        bc = F.uniform_bound_check(q, n, tail)
        rows.append({"n": n, "partial": bc.partial, "tail_bound": bc.tail_bound,
                     "sup_bound": bc.sup_estimate, "certified": bc.convergent})
    last = rows[-1]
    ok = bool(last["certified"])
    return Outcome("uniform bound on the operator norms along a window sequence",
                   ["n", "partial", "tail_bound", "sup_bound", "certified"],
                   rows, last["sup_bound"] if ok else math.inf,
                   last["sup_bound"] - last["partial"] if ok else math.inf,
                   {"certified": ok}, {} if ok else {"certified": last})


def run_schrodinger(cfg):
    f = _function(cfg, "cg1")
    if f.dim != 1:
        raise ConfigError("the schrodinger experiment runs in one dimension")
    pairs = cfg.opt("pairs")
    eps = float(cfg.opt("eps"))
    grid = cfg.grid_spec(GridSpec.uniform(40.0, 0.05))
    rows = []
    for t, q in pairs:
        t, q = float(t), float(q)
        spec = S.PropagatorSpec(t, cfg.params, grid)
        u_fft = S.evolve_free(f, spec, method="fft")
        axes = u_fft.axes
        f0 = S.EvolvedField(axes, C.evaluate_many(f, axes[0].reshape(-1, 1), cfg.params), "input")
        nrm = G.norm_M_infty_1(f, G.standard_window([q], cfg.hbar), params=cfg.params)
        formula = S.sharp_norm_formula(t, [q])
        wit = S.sharp_norm_witness(t, [q], eps, cfg.params)
        rows.append({"t": t, "q": q, "eps": eps, "witness": wit, "formula": formula,
                     "witness_rel": abs(wit / formula - 1), "l2_in": f0.l2(),
                     "l2_out": u_fft.l2(), "unitarity": abs(u_fft.l2() - f0.l2()),
                     "sup_u": u_fft.sup(), "bound": formula * nrm,
                     "bound_ok": u_fft.sup() <= formula * nrm * (1 + 1e-6)})
    asserts = {
        "witness": all(r["witness_rel"] < cfg.tol("witness_rel") for r in rows),
        "unitarity": all(r["unitarity"] < cfg.tol("unitarity") for r in rows),
        "sup_bound": all(r["bound_ok"] for r in rows),
    }
    failing = {}
    if not asserts["witness"]:
        failing["witness"] = _worst(rows, "witness_rel")
    if not asserts["unitarity"]:
        failing["unitarity"] = _worst(rows, "unitarity")
    if not asserts["sup_bound"]:
        failing["sup_bound"] = next(r for r in rows if not r["bound_ok"])
    cols = ["t", "q", "eps", "witness", "formula", "witness_rel", "l2_in", "l2_out",
            "unitarity", "sup_u", "bound", "bound_ok"]
    return Outcome("free Schrodinger evolution: sharp sup-norm constant and L2 unitarity",
                   cols, rows, rows[-1]["witness"], max(r["witness_rel"] for r in rows),
                   asserts, failing)


def run_cylinder(cfg):
    params = cfg.params
    w = P.default_windows()
    bases = corpus.cylinder_corpus()
    names = sorted(bases)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for _ in range(int(cfg.opt("triples"))):
        name = names[rng.integers(len(names))]
        f = P.cylinder(bases[name])
        m = f.base_dim + int(rng.integers(0, 3))
        n = m + int(rng.integers(1, 4))
        a, b = P.norm_infinite(P.extend(f, m), w, params), P.norm_infinite(P.extend(f, n), w, params)
        rows.append({"check": "isometry", "f": name, "m": m, "n": n, "a": a, "b": b,
                     "diff": abs(a - b)})
        la, lb = P.L_min(P.extend(f, m), w, params), P.L_min(P.extend(f, n), w, params)
        rows.append({"check": "representation", "f": name, "m": m, "n": n, "a": abs(la),
                     "b": abs(lb), "diff": abs(la - lb)})
    for name in names:
        f = P.cylinder(bases[name])
        full = P.norm_infinite(f, w, params)
        for k in range(1, f.base_dim + 1):
            r = P.norm_infinite(P.cylinder(P.restrict(f, k, params)), w, params)
            rows.append({"check": "restrict", "f": name, "m": k, "n": f.base_dim, "a": r,
                         "b": full, "diff": r / full})
    one = P.extend(P.cylinder(C.one()), 3)
    r1 = P.norm_infinite(P.cylinder(P.restrict(one, 1, params)), w, params) / \
        P.norm_infinite(one, w, params)
    rows.append({"check": "restrict", "f": "constant1", "m": 1, "n": 3, "a": r1, "b": 1.0,
                 "diff": r1})
    tol = cfg.tol("exact")

    def sel(c):
        return [r for r in rows if r["check"] == c]

    asserts = {
        "isometry": all(r["diff"] <= tol * max(1.0, r["a"]) for r in sel("isometry")),
        "representation": all(r["diff"] <= tol * max(1.0, r["a"]) for r in sel("representation")),
        "restrict_contracts": all(r["diff"] <= 1 + cfg.tol("restrict") for r in sel("restrict")),
        "restrict_one": abs(r1 - 1) <= cfg.tol("restrict"),
    }
    failing = {}
    for key, check in (("isometry", "isometry"), ("representation", "representation"),
                       ("restrict_contracts", "restrict")):
        if not asserts[key]:
            failing[key] = _worst(sel(check), "diff")
    if not asserts["restrict_one"]:
        failing["restrict_one"] = rows[-1]
    err = max(r["diff"] for r in rows if r["check"] != "restrict")
    return Outcome("cylinder norms: extension isometry, representation independence, restriction",
                   ["check", "f", "m", "n", "a", "b", "diff"], rows,
                   max(r["diff"] for r in sel("restrict")), err, asserts, failing)


_LTOPO_EXPECT = {"ex5-1": "accept", "ex6-1": "reject", "ex6-2": "reject"}


def run_ltopo(cfg):
    preset = cfg.preset or "ex5-1"
    params = cfg.params
    w = P.default_windows()
    seq = corpus.SEQUENCE_PRESETS[preset]()
    rows, notes, value, err = [], {}, None, math.inf
    try:
        res = P.L_topological(seq, w, params, tol=cfg.tol("cauchy"),
                              cutoff=int(cfg.opt("cutoff")))
        pairs, accepted = res.certificate.pairs, True
        value, err = res.value, res.error_bound
        notes["method"] = res.method
    except CauchyCheckFailed as e:
        pairs, accepted = e.certificate.pairs if e.certificate else [], False
        notes["rejected_pair"] = list(e.pair)
        notes["reason"] = str(e)
    for m, n, d, exact in pairs:
        rows.append({"quantity": "cauchy_pair", "m": m, "n": n, "value": d, "exact": exact})
    asserts = {"verdict": accepted == (_LTOPO_EXPECT[preset] == "accept")}
    failing = {}
    if preset == "ex5-1" and accepted:
        closed = complex(np.prod([1 + 0.5**j * np.exp(-0.5j * params.hbar)
                                  for j in range(1, 200)]))
        gap = abs(value - closed)
        rows.append({"quantity": "closed_product_gap", "m": 1, "n": 199, "value": gap,
                     "exact": True})
        asserts["closed_product"] = gap <= max(err, 1e-12)
    if preset == "ex6-1":
        d = P.cauchy_distance_estimate(seq[3], seq[5], w, params)
        rows.append({"quantity": "distance", "m": 3, "n": 5, "value": d.value, "exact": d.exact})
        asserts["distance_two"] = d.exact and abs(d.value - 2) < cfg.tol("closed")
        value = d.value
    if preset == "ex6-2":
        lb = P.example_6_2_lower_bound(2, 4, corpus.GEOMETRIC_HALF, w, params)
        rows.append({"quantity": "lower_bound", "m": 2, "n": 4, "value": lb, "exact": False})
        asserts["lower_bound"] = lb >= 1 - cfg.tol("closed")
        value = lb
    for k, ok in asserts.items():
        if not ok:
            failing[k] = rows[-1] if k != "verdict" else {"expected": _LTOPO_EXPECT[preset],
                                                          "accepted": accepted}
    notes["accepted"] = accepted
    return Outcome("topological extension: finite Cauchy check on a cylinder sequence",
                   ["quantity", "m", "n", "value", "exact"], rows,
                   value if value is not None else math.nan, err, asserts, failing, notes)


_LPRIME_LIMIT_TOL = {"gaussian-r-geometric": 1e-10, "plane-wave-k-geometric": 1e-8,
                     "sec6-1": 1e-5, "ex5-1": 1e-8}
_LPRIME_SETTLE_TOL = {"sec6-1": 1e-6}


def run_lprime(cfg):
    preset = cfg.preset or "gaussian-r-geometric"
    params = cfg.params
    f = corpus.LPRIME_PRESETS[preset]()
    sched = cfg.sched("n")
    sched = P.default_schedule(1024) if sched == "default" else [int(n) for n in sched]
    settle = float(cfg.tolerances.get("settle", _LPRIME_SETTLE_TOL.get(preset, 1e-8)))
    limit_tol = float(cfg.tolerances.get("limit", _LPRIME_LIMIT_TOL[preset]))
    asserts, failing, notes = {}, {}, {}
    try:
        res = P.L_prime(f, P.default_windows(), params, sched, tol=settle)
        trace, value, limit, lerr = res.trace, res.value, res.limit, res.limit_error
        asserts["settled"] = True
    except NonConvergent as e:
        trace = e.trace
        value = trace[-1][1] if trace else math.nan
        limit, lerr = P._limit(f, None, params)
        asserts["settled"] = False
        failing["settled"] = {"reason": str(e)}
    rows = []
    for n, v in trace:
        row = {"n": n, **_c("value", v), "gap_to_limit": abs(v - limit)}
        if f.kind == "composite_1d":
            lam = math.sqrt(math.fsum(f.seq.values(n) ** 2))
            push = P.pushforward_value(f.h, lam, params)
            row.update(_c("pushforward", push))
            row["oracle_gap"] = abs(v - push)
        rows.append(row)
    gap = abs(value - limit)
    asserts["limit"] = gap <= limit_tol
    if not asserts["limit"]:
        failing["limit"] = rows[-1]
    cols = ["n", "value_re", "value_im", "gap_to_limit"]
    if f.kind == "composite_1d":
        cols += ["pushforward_re", "pushforward_im", "oracle_gap"]
        small = [r for r in rows if r["n"] <= 8]
        asserts["pushforward"] = all(r["oracle_gap"] < cfg.tol("oracle") for r in small)
        if not asserts["pushforward"]:
            failing["pushforward"] = _worst(small, "oracle_gap")
    notes.update({"limit": _json_num(complex(limit)), "limit_error": _json_num(lerr)})
    return Outcome("sequential extension along restrictions: convergence trace",
                   cols, rows, complex(value), max(gap, lerr), asserts, failing, notes)


def run_appendix_a(cfg):
    params = cfg.params
    n = int(cfg.opt("n"))
    k = cfg.opt("k")
    if k is None:
        k = [0.5**j for j in range(1, n + 1)] if n > 1 else [1.0]
    if len(k) != n:
        raise ConfigError("k must have n entries")
    rows = []
    for x, xi, eps in cfg.opt("triples"):
        kc = P.appendix_a_kernel(n, k, float(x), float(xi), float(eps), params=params)
        rows.append({"n": n, "x": x, "xi": xi, "eps": eps, **_c("lhs", kc.lhs),
                     **_c("rhs", kc.rhs), **_c("limit", kc.limit), "gap": kc.gap})
    err = max(r["gap"] for r in rows)
    ok = err < cfg.tol("gap")
    return Outcome("windowed plane-wave Fresnel kernel: direct vs rotated representation",
                   ["n", "x", "xi", "eps"] + _cols("lhs", "rhs", "limit",
                                                   cplx=("lhs", "rhs", "limit")) + ["gap"],
                   rows, err, err, {"lhs_rhs": ok}, {} if ok else {"lhs_rhs": _worst(rows, "gap")})


def run_appendix_b(cfg):
    params = cfg.params
    m, B = int(cfg.opt("m")), float(cfg.opt("B"))
    chk = P.phi_tail_check(m, B, tuple(float(x) for x in cfg.opt("xs")))
    rows = [{"quantity": "tail_ratio", "param": x, "value": r, "reference": chk["constant"]}
            for x, r in chk["ratios"].items()]
    k = P.RealSequence(cfg.opt("k"))
    n_list = [int(v) for v in cfg.opt("n_list")]
    rep = P.dominator_check(k.values(64), n_list, m, params=params)
    for n in n_list:
        rows.append({"quantity": "dominator_ratio", "param": n, "value": rep.max_ratio[n],
                     "reference": rep.limit_ratio})
    rows.append({"quantity": "dominator_growth", "param": n_list[-1], "value": rep.growth,
                 "reference": cfg.tol("growth")})
    stable = rep.growth <= cfg.tol("growth")
    asserts = {"tail_bounded": bool(chk["ok"]), "dominator_stable": stable,
               "dominator_bounded": all(v <= rep.limit_ratio * (1 + 1e-9)
                                        for v in rep.max_ratio.values())}
    failing = {}
    if not asserts["tail_bounded"]:
        failing["tail_bounded"] = max(rows[:len(chk["ratios"])], key=lambda r: r["value"])
    if not stable:
        failing["dominator_stable"] = rows[-1]
    if not asserts["dominator_bounded"]:
        failing["dominator_bounded"] = max(rows, key=lambda r: r["value"]
                                           if r["quantity"] == "dominator_ratio" else -1)
    return Outcome("dominating function for the dilated chirp: tail constant and uniformity",
                   ["quantity", "param", "value", "reference"], rows,
                   chk["constant"], rep.growth, asserts, failing,
                   {"limit_ratio": rep.limit_ratio, "B": rep.B})


EXPERIMENTS = {
    "stft": Experiment("stft", run_stft, {"points": 50, "box": 4.0}, {"abs_err": 1e-6},
                       "abs_err", default_function="chirp+"),
    "norm": Experiment("norm", run_norm, {}, {}, default_function="cg1"),
    "fresnel": Experiment("fresnel", run_fresnel, {"method": "all", "mollifier": "gaussian"},
                          {"agreement": 1e-3}, "agreement", {"eps": None},
                          presets=("ex3-5",), default_function="constant1"),
    "norm-ln": Experiment("norm-ln", run_norm_ln,
                          {"q": [1.0], "q_sequence": None, "q_tail": None, "n_max": 64},
                          {"gap_rel": 1e-2}, "gap_rel", {"witness": "default"}),
    "schrodinger": Experiment("schrodinger", run_schrodinger,
                              {"pairs": [[1.0, 1.0], [2.0, 1.0], [0.5, 0.3]], "eps": 1e-3},
                              {"witness_rel": 1e-2, "unitarity": 1e-8}, "witness_rel",
                              default_function="cg1"),
    "cylinder": Experiment("cylinder", run_cylinder, {"triples": 20},
                           {"exact": 1e-12, "restrict": 1e-10}, "exact"),
    "ltopo": Experiment("ltopo", run_ltopo, {"cutoff": 8}, {"cauchy": 1e-2, "closed": 1e-6},
                        "cauchy", presets=tuple(_LTOPO_EXPECT)),
    "lprime": Experiment("lprime", run_lprime, {}, {"settle": 1e-8, "limit": 1e-8, "oracle": 1e-4},
                         "limit", {"n": "default"}, presets=tuple(corpus.LPRIME_PRESETS)),
    "appendix-a": Experiment("appendix-a", run_appendix_a,
                             {"n": 1, "k": None,
                              "triples": [[0.3, -0.5, 0.1], [1.0, 0.7, 0.2]]},
                             {"gap": 1e-4}, "gap"),
    "appendix-b": Experiment("appendix-b", run_appendix_b,
                             {"m": 2, "B": 1.0, "xs": [0.0, 1.0, 10.0, 100.0],
                              "k": corpus.GEOMETRIC_HALF, "n_list": [1, 2, 4, 8]},
                             {"growth": 0.05}, "growth"),
}

# top-level presets: worked-example shortcuts mapped onto a subcommand
PRESET_COMMANDS = {
    "ex3-5": ("fresnel", {"preset": "ex3-5"}),
    "ex5-1": ("ltopo", {"preset": "ex5-1"}),
    "ex6-1": ("ltopo", {"preset": "ex6-1"}),
    "ex6-2": ("ltopo", {"preset": "ex6-2"}),
    "sec6-1": ("lprime", {"preset": "sec6-1"}),
}


def run(cfg, out_dir=None):
    """Run one experiment and write ``<id>.csv`` and ``<id>.json``; returns (code, Outcome)."""
    out = EXPERIMENTS[cfg.experiment].run(cfg)
    target = out_dir or cfg.output
    os.makedirs(target, exist_ok=True)
    base = os.path.join(target, cfg.run_id)
    with open(base + ".csv", "w", newline="", encoding="utf-8") as fh:
        fh.write(render_csv(out))
    with open(base + ".json", "w", encoding="utf-8") as fh:
        fh.write(render_summary(out, cfg))
    return (EXIT_OK if out.passed else EXIT_ASSERT), out


# ---------------------------------------------------------------- argument parsing

def _json_arg(s):
    try:
        return json.loads(s)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"not valid JSON: {e}") from None


def _floats(s):
    try:
        return [float(v) for v in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _pairs(s):
    try:
        out = [[float(a) for a in p.split(":")] for p in s.split(",")]
    except ValueError:
        out = []
    if not out or any(len(p) != 2 for p in out):
        raise argparse.ArgumentTypeError("pairs look like 't:q,t:q'")
    return out


def _triples(s):
    try:
        out = [[float(a) for a in p.split(":")] for p in s.split(",")]
    except ValueError:
        out = []
    if not out or any(len(p) != 3 for p in out):
        raise argparse.ArgumentTypeError("triples look like 'x:xi:eps,x:xi:eps'")
    return out


def _witness(s):
    return "default" if s == "default" else _floats(s)


# flag -> (config section, key); section None means a top-level field
_FLAG_TARGETS = {
    "f": (None, "function"), "preset": (None, "preset"), "hbar": (None, "hbar"),
    "seed": (None, "seed"), "out": (None, "output"),
    "q": ("options", "q"), "window_q": ("window", "q"), "grid_R": ("grid", "R"),
    "grid_h": ("grid", "h"), "points": ("options", "points"), "box": ("options", "box"),
    "method": ("options", "method"), "mollifier": ("options", "mollifier"),
    "eps_schedule": ("schedules", "eps"), "witness_schedule": ("schedules", "witness"),
    "q_sequence": ("options", "q_sequence"), "q_tail": ("options", "q_tail"),
    "n_max": ("options", "n_max"), "pairs": ("options", "pairs"), "eps": ("options", "eps"),
    "triples": ("options", "triples"), "cutoff": ("options", "cutoff"),
    "n_schedule": ("schedules", "n"), "n": ("options", "n"), "k": ("options", "k"),
    "m": ("options", "m"), "B": ("options", "B"), "xs": ("options", "xs"),
    "n_list": ("options", "n_list"), "k_seq": ("options", "k"),
}


def _add_common(p):
    p.add_argument("--config", help="JSON ExperimentConfig; explicit flags override it")
    p.add_argument("--out", help="output directory (default fresnelio-out)")
    p.add_argument("--tol", type=float, help="override the experiment's primary tolerance")
    p.add_argument("--seed", type=int, help="seed for random sample points")
    p.add_argument("--hbar", type=float, help="semiclassical parameter (default 1)")


def build_parser():
    ap = argparse.ArgumentParser(prog="fresnelio", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stft", help="closed-form STFT against quadrature at random points")
    _add_common(p)
    p.add_argument("--f", help="corpus name or catalog JSON")
    p.add_argument("--window-q", type=_floats, dest="window_q")
    p.add_argument("--grid-R", type=float, dest="grid_R")
    p.add_argument("--grid-h", type=float, dest="grid_h")
    p.add_argument("--points", type=int)
    p.add_argument("--box", type=float)

    p = sub.add_parser("norm", help="modulation-space norms of one function")
    _add_common(p)
    p.add_argument("--f")
    p.add_argument("--window-q", type=_floats, dest="window_q")

    p = sub.add_parser("fresnel", help="Fresnel integral by all available routes")
    _add_common(p)
    p.add_argument("--f")
    p.add_argument("--method", choices=("all", "direct", "phase_space", "parseval"))
    p.add_argument("--mollifier", choices=("gaussian", "sech", "both"))
    p.add_argument("--eps-schedule", type=_floats, dest="eps_schedule")

    p = sub.add_parser("norm-ln", help="witness sandwich for the operator norm, or a uniform bound")
    _add_common(p)
    p.add_argument("--q", type=_floats)
    p.add_argument("--witness-schedule", type=_witness, dest="witness_schedule")
    p.add_argument("--q-sequence", type=_json_arg, dest="q_sequence",
                   help='e.g. \'{"type": "geometric", "first": 0.5, "ratio": 0.5}\'')
    p.add_argument("--q-tail", type=_json_arg, dest="q_tail",
                   help='e.g. \'{"type": "geometric", "ratio": 0.5, "from": 1}\'')
    p.add_argument("--n-max", type=int, dest="n_max")

    p = sub.add_parser("schrodinger", help="sharp sup-norm bound and unitarity of free evolution")
    _add_common(p)
    p.add_argument("--f")
    p.add_argument("--pairs", type=_pairs, help="t:q pairs, e.g. 1:1,2:1")
    p.add_argument("--eps", type=float)
    p.add_argument("--grid-R", type=float, dest="grid_R")
    p.add_argument("--grid-h", type=float, dest="grid_h")

    p = sub.add_parser("cylinder", help="cylinder-norm isometry, L_min independence, restriction")
    _add_common(p)
    p.add_argument("--triples", type=int)

    p = sub.add_parser("ltopo", help="Cauchy-checked limit of a cylinder sequence")
    _add_common(p)
    p.add_argument("--preset", choices=tuple(_LTOPO_EXPECT))
    p.add_argument("--cutoff", type=int)

    p = sub.add_parser("lprime", help="limit of L_n along restrictions")
    _add_common(p)
    p.add_argument("--preset", choices=tuple(corpus.LPRIME_PRESETS))
    p.add_argument("--n-schedule", type=lambda s: [int(v) for v in _floats(s)],
                   dest="n_schedule")

    p = sub.add_parser("appendix-a", help="windowed plane-wave kernel identity")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=_floats)
    p.add_argument("--triples", type=_triples, help="x:xi:eps triples")

    p = sub.add_parser("appendix-b", help="dominating-function constants")
    _add_common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--B", type=float)
    p.add_argument("--xs", type=_floats)
    p.add_argument("--n-list", type=lambda s: [int(v) for v in _floats(s)], dest="n_list")
    p.add_argument("--k-seq", type=_json_arg, dest="k_seq")

    for name, (cmd, _) in PRESET_COMMANDS.items():
        p = sub.add_parser(name, help=f"preset: runs '{cmd}' on the worked example")
        _add_common(p)
    return ap


def config_from_args(ns):
    """Merge ``--config`` with explicit flags into a validated ExperimentConfig."""
    command = ns.command
    base = {}
    if command in PRESET_COMMANDS:
        command, base = PRESET_COMMANDS[command][0], dict(PRESET_COMMANDS[command][1])
    if getattr(ns, "config", None):
        try:
            with open(ns.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {ns.config}: {e}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        if loaded.get("experiment", command) != command:
            raise ConfigError(f"config is for {loaded['experiment']!r}, not {command!r}")
        base.update(loaded)
    base["experiment"] = command
    for flag, (section, key) in _FLAG_TARGETS.items():
        val = getattr(ns, flag, None)
        if val is None:
            continue
        if section is None:
            base[key] = val
        else:
            base.setdefault(section, {})
            base[section] = dict(base[section] or {}, **{key: val})
    cfg = ExperimentConfig.from_dict(base)
    if getattr(ns, "tol", None) is not None:
        key = EXPERIMENTS[command].primary_tol
        if key is None:
            raise ConfigError(f"{command} has no tolerance to override")
        cfg.tolerances = dict(cfg.tolerances, **{key: ns.tol})
        cfg.validate()
    return cfg


def main(argv=None):
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        code, out = run(cfg)
    except (ConfigError, ResolutionError, DimensionError, NotClosedForm, Divergent) as e:
        print(f"fresnelio: invalid configuration ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError, TypeError) as e:
        print(f"fresnelio: invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FresnelioError as e:
        print(f"fresnelio: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ASSERT
    base = os.path.join(cfg.output, cfg.run_id)
    print(f"{cfg.run_id}: value={_fmt(out.value)} error_estimate={_fmt(out.error_estimate)}")
    for name, ok in out.assertions.items():
        print(f"  {name}: {'pass' if ok else 'FAIL'}")
    print(f"  wrote {base}.csv and {base}.json")
    for name, row in out.failing.items():
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in row.items())
        print(f"fresnelio: assertion {name} failed at row: {shown}", file=sys.stderr)
    return code


def _fmt(v):
    if isinstance(v, complex):
        return f"{v.real:.12g}{v.imag:+.12g}j"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


if __name__ == "__main__":
    sys.exit(main())
