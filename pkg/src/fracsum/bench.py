"""Benchmark driver: kernels for the example problems, step-size sweeps with
observed convergence orders, and deterministic CSV emission.

Everything here is glue: the numerical content lives in expsum/prony/fode.
A RunConfig captures one command's worth of settings (the CLI and the config
file both fill it); run_example executes the h-sweep for a benchmark problem
measuring the error at the final time, eoc() turns (h, error) pairs into the
printed order table, and emit_csv writes rows plus a `.meta` sidecar so a run
is reproducible from its artifacts alone.  Sweep rows are independent and
run on a thread pool capped by the FRACSUM_THREADS environment variable;
results are ordered by h before anything is written, so output bytes do not
depend on scheduling.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, is_dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ImplicitDivergence, NonConvergence, ShapeError
from .examples import kelvin_voigt_grid, make_example
from .expsum import ExpSum, KernelSpec, build_trapezoidal_expsum, rescale
from .fode import Solution, SolverOptions, TimeGrid, solve_ci, solve_ode_aux
from .prony import ReductionReport, reduce_with_rescaling

__all__ = [
    "RunConfig", "EocRow", "resolve_T", "raw_kernel", "build_kernel",
    "make_grid", "solve_once", "run_example", "eoc", "emit_csv",
    "trajectory_rows", "reduction_row", "kelvin_voigt_l_sweep",
    "DEFAULT_SWEEP",
]

_COMMANDS = ("kernel", "prony", "solve", "bench")
_SCHEMES = ("CI", "BE", "TR")
_GRID_KINDS = ("uniform", "geometric", "kelvin_voigt")
_SCHEME_TO_SOLVER = {"CI": "ci", "BE": "ode_be", "TR": "ode_tr"}
_GEOMETRIC_RATIO = 1.005

DEFAULT_SWEEP = tuple(2.0**-e for e in range(2, 11))


@dataclass
class RunConfig:
    """Settings for one CLI command; defaults follow the benchmark setup."""

    command: str = "bench"
    alpha: float = 0.5
    delta: float = 1e-5
    T: float | None = None
    L: int = 128
    epsilon: float = 1e-10
    example_id: int = 2
    scheme: str = "TR"
    h: float | None = None
    n_steps: int | None = None
    grid_kind: str = "uniform"
    output_path: str | None = None
    lam: float = -1.0
    c: float = 100.0
    k: float = 10.0
    tol: float = 1e-10
    implicit: str = "newton"
    unreduced: bool = False

    def validate(self) -> None:
        if self.command not in _COMMANDS:
            raise ValueError(f"command must be one of {_COMMANDS}, got {self.command!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if not self.delta > 0.0:
            raise ValueError("delta must be positive")
        if self.T is not None and not self.T > self.delta:
            raise ValueError(f"T must exceed delta={self.delta!r}, got {self.T!r}")
        if self.L < 2:
            raise ValueError(f"L must be >= 2, got {self.L!r}")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.example_id not in (1, 2, 3):
            raise ValueError(f"example_id must be 1, 2 or 3, got {self.example_id!r}")
        if self.scheme not in _SCHEMES:
            raise ValueError(f"scheme must be one of {_SCHEMES}, got {self.scheme!r}")
        if self.grid_kind not in _GRID_KINDS:
            raise ValueError(f"grid_kind must be one of {_GRID_KINDS}, got {self.grid_kind!r}")
        if self.h is not None and self.n_steps is not None:
            raise ValueError("give h or n_steps, not both")
        if self.h is not None and not self.h > 0.0:
            raise ValueError("h must be positive")
        if self.n_steps is not None and self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.implicit not in ("newton", "fixed_point"):
            raise ValueError(f"implicit must be 'newton' or 'fixed_point', got {self.implicit!r}")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class EocRow:
    """One line of an order table: step size, error at T, observed order.

    eoc is None on the first row, the string '***' when the error failed to
    decrease, and log2(E(h)/E(h/2)) otherwise (printed on the finer-h row).
    """

    h: float
    error: float
    eoc: float | str | None = None


def resolve_T(cfg: RunConfig) -> float:
    """Final time: explicit cfg.T, else the example's own convention."""
    if cfg.grid_kind == "kelvin_voigt":
        return float(kelvin_voigt_grid().t[-1])
    if cfg.T is not None:
        return float(cfg.T)
    if cfg.example_id == 1:
        return 1.0
    if cfg.example_id == 2:
        return 10.0
    return float(kelvin_voigt_grid().t[-1])


def raw_kernel(spec: KernelSpec) -> ExpSum:
    """Unreduced trapezoidal sum on [spec.delta, spec.T].

    For T != 1 the sum is built on the normalized window [delta/T, 1] and
    rescaled, matching the reduction pipeline so that `unreduced` ablations
    differ from the default only in the Prony step.
    """
    if spec.T == 1.0:
        return build_trapezoidal_expsum(spec)
    norm = KernelSpec(spec.alpha, spec.delta / spec.T, 1.0, spec.L, spec.epsilon)
    return rescale(build_trapezoidal_expsum(norm), spec.T)


def build_kernel(cfg: RunConfig, T: float) -> tuple[ExpSum, ReductionReport | None]:
    """Solver kernel for cfg: (reduced sum, report), or (raw sum, None)."""
    spec = KernelSpec(cfg.alpha, cfg.delta, float(T), cfg.L, cfg.epsilon)
    if cfg.unreduced:
        return raw_kernel(spec), None
    report = reduce_with_rescaling(spec)
    return report.reduced, report


def make_grid(cfg: RunConfig, h: float | None, T: float) -> TimeGrid:
    """Solution grid of the configured kind ending at T.

    uniform needs h to divide T; geometric needs n_steps and uses the fixed
    growth factor 1.005 with the first step sized so the mesh ends at T;
    kelvin_voigt is the benchmark mesh (1e-4, x1.005, 5000 steps) and
    ignores h / n_steps.
    """
    if cfg.grid_kind == "kelvin_voigt":
        return kelvin_voigt_grid()
    if cfg.grid_kind == "uniform":
        if h is None:
            raise ValueError("uniform grid needs a step size h (or n_steps)")
        n = T / h
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(f"h={h!r} does not divide T={T!r} into whole steps")
        return TimeGrid.uniform(T, int(round(n)))
    if cfg.n_steps is None:
        raise ValueError("geometric grid needs n_steps")
    r = _GEOMETRIC_RATIO
    first = T * (r - 1.0) / (r**cfg.n_steps - 1.0)
    return TimeGrid.from_steps(first * r ** np.arange(cfg.n_steps))


def solve_once(problem, grid: TimeGrid, es: ExpSum, cfg: RunConfig) -> Solution:
    """Run the configured scheme on one benchmark problem."""
    options = SolverOptions(scheme=_SCHEME_TO_SOLVER[cfg.scheme],
                            implicit=cfg.implicit, tol=cfg.tol)
    solver = solve_ci if cfg.scheme == "CI" else solve_ode_aux
    return solver(problem, grid, es, options)


def _max_workers(n_jobs: int) -> int:
    env = os.environ.get("FRACSUM_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ValueError(f"FRACSUM_THREADS must be an integer, got {env!r}") from exc
        if cap < 1:
            raise ValueError(f"FRACSUM_THREADS must be >= 1, got {cap}")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(n_jobs, cap))


def _row_error(cfg: RunConfig, es: ExpSum, T: float, h: float | None) -> float:
    """|y(T) - y_N| for one sweep row; NaN marks a row whose solve blew up.

    Only genuine per-row numerical failures are absorbed; a grid/window
    mismatch (GridSpacingError) is a configuration problem and propagates.
    """
    bp = make_example(cfg.example_id, cfg.alpha, T=T, lam=cfg.lam, c=cfg.c, k=cfg.k)
    grid = make_grid(cfg, h, T)
    try:
        sol = solve_once(bp.problem, grid, es, cfg)
    except (ImplicitDivergence, NonConvergence):
        return math.nan
    return abs(float(sol.y[-1]) - bp.reference(T))


def _sweep_steps(cfg: RunConfig, T: float) -> list[float]:
    if cfg.h is not None:
        return [float(cfg.h)]
    if cfg.n_steps is not None:
        return [T / cfg.n_steps]
    return list(DEFAULT_SWEEP)


def run_example(cfg: RunConfig) -> list[EocRow]:
    """h-sweep (default h = 2^-2 .. 2^-10) of |y(T) - y_N| with EOC column.

    Rows are independent and run concurrently (capped by FRACSUM_THREADS);
    a row whose solve diverges is marked failed (error = NaN) and the sweep
    continues.  Non-uniform grids admit no h-sweep and yield a single row.
    """
    cfg.validate()
    T = resolve_T(cfg)
    es, _ = build_kernel(cfg, T)
    if cfg.grid_kind != "uniform":
        grid = make_grid(cfg, None, T)
        err = _row_error(cfg, es, T, None)
        return [EocRow(h=float(grid.h[0]), error=err, eoc=None)]
    hs = _sweep_steps(cfg, T)
    workers = _max_workers(len(hs))
    if workers == 1:
        errors = [_row_error(cfg, es, T, h) for h in hs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = list(pool.map(lambda h: _row_error(cfg, es, T, h), hs))
    return eoc(list(zip(hs, errors)))


def eoc(pairs: Sequence[tuple[float, float]]) -> list[EocRow]:
    """Order table from (h, error) pairs with h halving row to row.

    EOC = log2(E(h)/E(h/2)) goes on the finer row; the first row gets none;
    a non-decreasing error pair gets the '***' marker instead of a number.
    Failed rows (NaN error) yield no EOC on either side.  Raises ShapeError
    when consecutive h do not halve.
    """
    rows: list[EocRow] = []
    prev_h: float | None = None
    prev_e: float | None = None
    for h, e in pairs:
        h, e = float(h), float(e)
        if prev_h is not None and abs(h / prev_h - 0.5) > 1e-9:
            raise ShapeError(f"step sizes must halve row to row, got {prev_h!r} -> {h!r}")
        marker: float | str | None = None
        if prev_e is not None and math.isfinite(e) and math.isfinite(prev_e) and prev_e > 0.0:
            marker = "***" if e >= prev_e else math.log2(prev_e / e)
        rows.append(EocRow(h=h, error=e, eoc=marker))
        prev_h, prev_e = h, e
    return rows


# Columns carried over from the printed tables verbatim (step sizes, orders)
# keep a plain decimal rendering; every other real is 6-significant-digit
# scientific notation.
_PLAIN_FLOAT_COLS = frozenset({"h", "alpha"})


def _cell(name: str, value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "failed"
    if name == "eoc":
        return f"{v:.2f}"
    if name in _PLAIN_FLOAT_COLS:
        return repr(v)
    return f"{v:.6e}"


def _meta_line(meta) -> str:
    if isinstance(meta, str):
        return meta
    if is_dataclass(meta):
        return " ".join(f"{f.name}={getattr(meta, f.name)!r}" for f in fields(meta))
    return repr(meta)


def emit_csv(rows: Iterable, path, *, fieldnames: Sequence[str] | None = None,
             meta=None) -> None:
    """Write rows (dataclasses or mappings) as CSV; meta goes to path+'.meta'.

    Output is deterministic: a fixed field order (first row's order unless
    fieldnames is given), '\\n' line endings, and the value rendering of
    _cell, so identical inputs give identical bytes.  An empty row set needs
    explicit fieldnames and produces a header-only file.
    """
    dicts = []
    for r in rows:
        if is_dataclass(r) and not isinstance(r, type):
            dicts.append({f.name: getattr(r, f.name) for f in fields(r)})
        else:
            dicts.append(dict(r))
    if fieldnames is None:
        if not dicts:
            raise ValueError("fieldnames is required for an empty row set")
        fieldnames = list(dicts[0].keys())
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(fieldnames)
            for d in dicts:
                writer.writerow([_cell(name, d.get(name)) for name in fieldnames])
        if meta is not None:
            with open(f"{path}.meta", "w") as fh:
                fh.write(_meta_line(meta) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path!r}: {exc}") from exc


def trajectory_rows(sol: Solution, reference: Callable[[float], float] | None = None) -> list[dict]:
    """CSV rows t,y[,abs_error] for a computed Solution."""
    rows = []
    for t, y in zip(sol.grid.t, sol.y):
        row = {"t": float(t), "y": float(y)}
        if reference is not None:
            row["abs_error"] = abs(float(y) - reference(float(t)))
        rows.append(row)
    return rows


def reduction_row(report: ReductionReport, alpha: float) -> dict:
    """One summary-table row for a reduction run."""
    return {
        "alpha": alpha, "L": report.L, "M": report.M, "L_p": report.L_p,
        "K": report.K, "L_f": report.L_f,
        "err_before": report.eps_prime, "err_after": report.max_err_after,
    }


def kelvin_voigt_l_sweep(alpha: float, Ls: Sequence[int], *, delta: float = 1e-5,
                         epsilon: float = 1e-10, c: float = 100.0, k: float = 10.0,
                         scheme: str = "TR", tol: float = 1e-10,
                         implicit: str = "newton") -> list[dict]:
    """Max-abs solution error on the Kelvin-Voigt mesh for each L in Ls.

    The creep reference is evaluated once for the whole mesh and shared
    across the L runs; rows carry L, the reduced length L_f, the max error
    over all mesh times and the final-time error.
    """
    grid = kelvin_voigt_grid()
    T = float(grid.t[-1])
    bp = make_example(3, alpha, T=T, c=c, k=k)
    ref = np.array([bp.reference(float(t)) for t in grid.t])
    rows = []
    for L in Ls:
        cfg = RunConfig(command="solve", alpha=alpha, delta=delta, T=T, L=int(L),
                        epsilon=epsilon, example_id=3, scheme=scheme,
                        grid_kind="kelvin_voigt", c=c, k=k, tol=tol, implicit=implicit)
        cfg.validate()
        es, report = build_kernel(cfg, T)
        sol = solve_once(bp.problem, grid, es, cfg)
        err = np.abs(sol.y - ref)
        rows.append({
            "L": int(L), "L_f": report.L_f if report is not None else int(L),
            "max_abs_err": float(err.max()), "final_err": float(err[-1]),
        })
    return rows
