"""Experiment runner: preset configurations, report files, sweeps and table checks."""
from __future__ import annotations

import csv
import dataclasses
import io
import os
import time
from dataclasses import dataclass, fields
from pathlib import Path

from . import tables
from .bdf import MAX_ORDER
from .nonlinear import NewtonDivergenceError, allen_cahn, newton_pint_solve, solve_semilinear_reference
from .presets import BUILDERS, DEFAULTS
from .stepper import solve_sequential
from .waveform import DivergenceError, PintConfig, _split_floor, estimate_gamma, roundoff_floor, run_waveform


class ConfigError(ValueError):
    pass


EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2


@dataclass
class ExperimentSpec:
    example: int = 1
    k: int = 3
    alpha: float = 1.0
    kappa: float = 0.5
    kappa_rule: str = "fixed"
    N: int = 100
    h: float = 1e-3
    T: float = 0.5
    tol: float = 1e-12
    max_iters: int = 20
    threads: str = "1"
    out: str = "runs"
    seed: int = 0
    eps_w: float = 1.0
    outer_iters: int = 10
    initial_guess: str = "zero"

    @classmethod
    def preset(cls, example: int, **overrides) -> "ExperimentSpec":
        if example not in DEFAULTS:
            raise ConfigError(f"unknown example id {example!r}; choose one of {sorted(DEFAULTS)}")
        d = dict(DEFAULTS[example])
        d.pop("dim")
        base = dict(example=example, k=d["k"], alpha=d["alpha"], N=d["N"], h=d["h"], T=d["T"],
                    eps_w=d.get("eps_w", 1.0))
        if d["kappa"] is None:
            base.update(kappa_rule="log", kappa=0.5)
        else:
            base["kappa"] = d["kappa"]
        overrides = {key: val for key, val in overrides.items() if val is not None}
        if "kappa" in overrides and "kappa_rule" not in overrides:
            base["kappa_rule"] = "fixed"
        base.update(overrides)
        spec = cls(**base)
        spec.validate()
        return spec

    def validate(self) -> None:
        if self.example not in DEFAULTS:
            raise ConfigError(f"unknown example id {self.example!r}; choose one of {sorted(DEFAULTS)}")
        if not 1 <= self.k <= MAX_ORDER:
            raise ConfigError(f"k must be in 1..{MAX_ORDER}, got {self.k}")
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.example == 1 and self.alpha != 1.0:
            raise ConfigError("example 1 is the heat equation and needs alpha = 1")
        if self.example in (2, 3) and self.alpha == 1.0:
            raise ConfigError(f"example {self.example} is a subdiffusion problem and needs alpha < 1")
        if self.example == 4 and self.alpha < 1 and self.k > 3:
            raise ConfigError("example 4 with alpha < 1 supports k <= 3")
        if self.kappa_rule not in ("fixed", "log"):
            raise ConfigError(f"kappa_rule must be 'fixed' or 'log', got {self.kappa_rule!r}")
        if not 0 < self.kappa < 1:
            raise ConfigError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.N < 2 or self.T <= 0 or self.tol <= 0 or self.max_iters < 1 or self.outer_iters < 1:
            raise ConfigError("need N >= 2, T > 0, tol > 0 and positive iteration caps")
        n = 1.0 / self.h
        if abs(n - round(n)) > 1e-9 * n or round(n) < 2:
            raise ConfigError(f"1/h must be an integer >= 2, got h={self.h}")
        if self.initial_guess not in ("v", "zero"):
            raise ConfigError("initial_guess must be 'v' or 'zero'")
        self.worker_count()

    def worker_count(self) -> int:
        if self.threads == "auto":
            return os.cpu_count() or 1
        try:
            n = int(self.threads)
        except ValueError:
            raise ConfigError(f"threads must be a positive integer or 'auto', got {self.threads!r}") from None
        if n < 1:
            raise ConfigError(f"threads must be positive, got {n}")
        return n

    def to_config(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)!s}\n" for f in fields(self))

    @classmethod
    def from_config(cls, text: str, **overrides) -> "ExperimentSpec":
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected key=value, got {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            raw[key.replace("-", "_")] = val
        raw.update({key: val for key, val in overrides.items() if val is not None})
        example = int(raw.pop("example", 1))
        return cls.preset(example, **_coerce(raw))


def _coerce(raw: dict) -> dict:
    types = {f.name: f.type for f in fields(ExperimentSpec)}
    out = {}
    for key, val in raw.items():
        if key not in types:
            raise ConfigError(f"unknown configuration key {key!r}")
        kind = types[key]
        try:
            if kind == "int":
                out[key] = int(val)
            elif kind == "float":
                out[key] = float(val)
            else:
                out[key] = str(val)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {val!r}") from None
    return out


@dataclass
class RunResult:
    status: str
    exit_code: int
    errors: list
    increments: list
    iters: int
    gamma: float
    floor: float
    wall_ms: float
    kappa: float
    newton: list = dataclasses.field(default_factory=list)
    message: str = ""


def _fmt(x) -> str:
    return f"{float(x):.5e}"


def _history_rows(errors, increments):
    rows = []
    for m, e in enumerate(errors):
        inc = increments[m - 1] if m >= 1 and m - 1 < len(increments) else float("nan")
        ratio = e / errors[m - 1] if m >= 1 and errors[m - 1] > 0 else float("nan")
        rows.append((m, e, inc, ratio))
    return rows


def _safe(fn, *a):
    try:
        return fn(*a)
    except ValueError:
        return float("nan")


def execute(spec: ExperimentSpec) -> RunResult:
    """Run one experiment in memory."""
    spec.validate()
    threads = spec.worker_count()
    builder = BUILDERS[spec.example]
    kw = dict(k=spec.k, T=spec.T, N=spec.N, h=spec.h)
    if spec.example != 1:
        kw["alpha"] = spec.alpha
    if spec.example == 4:
        kw["eps_w"] = spec.eps_w
    setup = builder(**kw)
    if spec.example == 4:
        return _execute_nonlinear(spec, setup, threads)
    cfg = PintConfig(kappa=spec.kappa, kappa_rule=spec.kappa_rule, max_iters=spec.max_iters, tol=spec.tol,
                     threads=threads, initial_guess=spec.initial_guess)
    ref = solve_sequential(spec.k, setup.disc, setup.data, setup.grid)
    kappa = cfg.kappa_for(spec.N, spec.alpha)
    try:
        _, rep = run_waveform(spec.k, setup.disc, setup.data, setup.grid, cfg, reference=ref)
    except DivergenceError as exc:
        r = exc.report
        return RunResult("diverged", EXIT_DIVERGED, r.errors, r.increments, r.iters, float("nan"),
                         float("nan"), r.wall_ms, kappa, message=str(exc))
    status = "converged" if rep.converged else "not converged"
    return RunResult(status, EXIT_OK if rep.converged else EXIT_DIVERGED, rep.errors, rep.increments, rep.iters,
                     _safe(estimate_gamma, rep.errors), _safe(roundoff_floor, rep.errors), rep.wall_ms, kappa)


def _execute_nonlinear(spec, setup, threads):
    prob = allen_cahn(setup.disc, setup.data, setup.grid, spec.eps_w)
    kappa = spec.kappa if spec.kappa_rule == "fixed" else PintConfig(kappa_rule="log").kappa_for(spec.N, spec.alpha)
    t0 = time.perf_counter()
    try:
        ref = solve_semilinear_reference(prob, spec.k)
        _, st = newton_pint_solve(prob, spec.k, kappa, L=spec.outer_iters, outer_tol=spec.tol,
                                  inner_tol=spec.tol, inner_max=spec.max_iters, reference=ref, threads=threads)
    except NewtonDivergenceError as exc:
        wall = 1e3 * (time.perf_counter() - t0)
        return RunResult("diverged", EXIT_DIVERGED, [], [], 0, float("nan"), float("nan"), wall, kappa,
                         message=str(exc))
    wall = 1e3 * (time.perf_counter() - t0)
    newton = [(ell, e, st.inner_counts[ell - 1] if ell >= 1 else 0) for ell, e in enumerate(st.outer_errors)]
    converged = bool(st.corrections) and st.corrections[-1] < spec.tol
    return RunResult("converged" if converged else "not converged", EXIT_OK if converged else EXIT_DIVERGED,
                     st.outer_errors, st.corrections, len(st.corrections), _safe(estimate_gamma, st.outer_errors),
                     _safe(roundoff_floor, st.outer_errors), wall, kappa, newton=newton)


def _out_dir(spec: ExperimentSpec) -> Path:
    base = os.environ.get("OUT_DIR") or spec.out
    return Path(base)


def write_reports(spec: ExperimentSpec, res: RunResult, out: Path | None = None) -> Path:
    out = Path(out) if out is not None else _out_dir(spec)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "convergence.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "e_m_N", "increment", "ratio"])
        for m, e, inc, ratio in _history_rows(res.errors, res.increments):
            w.writerow([m, _fmt(e), _fmt(inc), _fmt(ratio)])
    if spec.example == 4:
        with open(out / "newton.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["l", "e_l_N", "inner_iters"])
            for ell, e, inner in res.newton:
                w.writerow([ell, _fmt(e), inner])
    lines = [
        f"status: {res.status}",
        f"gamma: {_fmt(res.gamma)}",
        f"iterations: {res.iters}",
        f"wall_ms: {res.wall_ms:.3f}",
        f"floor: {_fmt(res.floor)}",
        f"kappa: {_fmt(res.kappa)}",
    ]
    if res.message:
        lines.append(f"message: {res.message}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out / "config.txt").write_text(spec.to_config(), encoding="utf-8")
    return out


def run_experiment(spec: ExperimentSpec, out: Path | None = None) -> RunResult:
    res = execute(spec)
    write_reports(spec, res, out)
    return res


SWEEP_PARAMS = {"kappa": float, "N": int, "alpha": float, "T": float, "eps_w": float, "k": int}


def sweep(spec: ExperimentSpec, vary: str, values, out: Path | None = None) -> list:
    """One convergence history per value, written as long-format sweep.csv."""
    if vary not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep {vary!r}; choose one of {sorted(SWEEP_PARAMS)}")
    values = [SWEEP_PARAMS[vary](v) for v in values]
    if not values:
        raise ConfigError("sweep needs at least one value")
    if vary == "eps_w" and spec.example != 4:
        raise ConfigError("eps_w only applies to example 4")
    results = []
    for val in values:
        over = {vary: val}
        if vary == "kappa":
            over["kappa_rule"] = "fixed"
        s = dataclasses.replace(spec, **over)
        s.validate()
        results.append((val, execute(s)))
    out = Path(out) if out is not None else _out_dir(spec)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["parameter", "value", "m", "e_m_N", "increment", "ratio", "gamma", "floor", "status"])
        for val, res in results:
            for m, e, inc, ratio in _history_rows(res.errors, res.increments):
                w.writerow([vary, val, m, _fmt(e), _fmt(inc), _fmt(ratio), _fmt(res.gamma), _fmt(res.floor),
                            res.status])
    return results


@dataclass
class Cell:
    table: str
    key: tuple
    m: int
    target: float
    value: float
    factor: float

    @property
    def passed(self) -> bool:
        return self.target / self.factor <= self.value <= self.target * self.factor


def _pre_floor(ref_col, threshold):
    """Cells above ``threshold`` whose successor in the column still decays."""
    last = _split_floor(ref_col)
    keep = []
    for m in range(last + 1):
        nxt = ref_col[m + 1] / ref_col[m] if m + 1 < len(ref_col) else 0.0
        if ref_col[m] >= threshold and nxt < 0.5:
            keep.append(m)
    return keep


def verify_tables(threads: int = 1, ks=None) -> dict:
    """Compare the linear and nonlinear presets against the reference tables.

    Only cells before the reference column's roundoff floor are compared.
    Returns ``{"cells": [...], "inner": [...], "passed": bool}``.
    """
    cells, inner = [], []
    for name, table, example in (("heat", tables.HEAT, 1), ("subdiffusion", tables.SUBDIFFUSION, 2)):
        for k, col in table.items():
            if ks is not None and k not in ks:
                continue
            res = execute(ExperimentSpec.preset(example, k=k, max_iters=len(col) - 1, threads=str(threads)))
            for m in _pre_floor(col, 1e-10):
                cells.append(Cell(name, (k,), m, col[m], res.errors[m], 2.0))
    for (alpha, k), col in tables.ALLEN_CAHN.items():
        if ks is not None and k not in ks:
            continue
        res = execute(ExperimentSpec.preset(4, k=k, alpha=alpha, outer_iters=len(col) - 1, threads=str(threads)))
        for m in _pre_floor(col, 1e-11):
            cells.append(Cell("allen_cahn", (alpha, k), m, col[m], res.errors[m], 3.0))
        counts = [row[2] for row in res.newton[1:]]
        inner.append(((alpha, k), counts, all(c <= 6 for c in counts)))
    ok = all(c.passed for c in cells) and all(i[2] for i in inner)
    return {"cells": cells, "inner": inner, "passed": ok}


def format_verification(report: dict) -> str:
    buf = io.StringIO()
    for c in report["cells"]:
        key = ",".join(str(x) for x in c.key)
        buf.write(f"{'PASS' if c.passed else 'FAIL'}  {c.table:<13} [{key}] m={c.m}  value={c.value:.3e}  "
                  f"target={c.target:.3e}  band=x{c.factor:g}\n")
    for key, counts, ok in report["inner"]:
        buf.write(f"{'PASS' if ok else 'FAIL'}  inner counts {key}: {counts} (<= 6)\n")
    buf.write(f"overall: {'PASS' if report['passed'] else 'FAIL'}\n")
    return buf.getvalue()

