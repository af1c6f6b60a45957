"""Command-line front end.

Four subcommands cover the pipeline:

  kernel  build the trapezoidal exponential sum, report its max kernel error
  prony   reduce the slow block, print/emit the summary row
  solve   one solver run, trajectory CSV with header t,y,abs_error
  bench   step-size sweep, order table CSV with header h,error,eoc

Settings are resolved in three layers — built-in defaults, an optional flat
`key = value` config file (--config), then explicit flags — with later
layers winning.  Exit codes: 0 success, 2 configuration problem (including a
solution mesh finer than the kernel window), 3 numerical failure, 4 I/O
failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .bench import (
    RunConfig,
    build_kernel,
    emit_csv,
    make_grid,
    raw_kernel,
    reduction_row,
    resolve_T,
    run_example,
    solve_once,
    trajectory_rows,
)
from .errors import FracsumError, GridSpacingError, SearchExhausted
from .examples import make_example
from .expsum import KernelSpec, geometric_grid, kernel_error
from .prony import reduce_with_rescaling
from .serialize import load_expsum, save_expsum

__all__ = ["main"]

_KERNEL_REPORT_GRID_N = 1000


def _parse_bool(raw: str) -> bool:
    lower = raw.strip().lower()
    if lower in ("1", "true", "yes", "on"):
        return True
    if lower in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


# Config-file / flag value parsers, keyed by RunConfig field name.
_FIELD_PARSERS = {
    "alpha": float, "delta": float, "T": float, "L": int, "epsilon": float,
    "example_id": int, "scheme": str, "h": float, "n_steps": int,
    "grid_kind": str, "output_path": str, "lam": float, "c": float,
    "k": float, "tol": float, "implicit": str, "unreduced": _parse_bool,
}

# Accepted config-file spellings that differ from the field name ("lambda"
# is a Python keyword, the others match the CLI flag names).
_KEY_ALIASES = {
    "lambda": "lam", "example": "example_id", "n": "n_steps",
    "grid": "grid_kind", "output": "output_path",
}


def _parse_config_file(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config file {path!r}: {exc}") from exc
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        entries[key.strip()] = val.strip()
    return entries


def _merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if getattr(args, "config", None):
        for key, raw in _parse_config_file(args.config).items():
            name = _KEY_ALIASES.get(key, key)
            if name not in _FIELD_PARSERS:
                raise ValueError(f"unknown config key {key!r}")
            try:
                setattr(cfg, name, _FIELD_PARSERS[name](raw))
            except ValueError as exc:
                raise ValueError(f"config key {key!r}: {exc}") from exc
    for name in _FIELD_PARSERS:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    cfg.validate()
    return cfg


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value settings file")
    p.add_argument("--alpha", type=float, help="fractional order in (0, 1)")
    p.add_argument("--delta", type=float, help="kernel window lower end")
    p.add_argument("--T", type=float, dest="T", help="final time / window upper end")
    p.add_argument("--L", type=int, dest="L", help="number of quadrature terms")
    p.add_argument("--epsilon", type=float, help="kernel accuracy target")
    p.add_argument("--output", "-o", dest="output_path", help="CSV output path")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--example", type=int, choices=(1, 2, 3), dest="example_id",
                   help="benchmark problem id")
    p.add_argument("--scheme", choices=("CI", "BE", "TR"),
                   help="constant interpolation / backward Euler / trapezoidal")
    p.add_argument("--h", type=float, help="uniform step size")
    p.add_argument("--n", type=int, dest="n_steps", help="number of steps")
    p.add_argument("--grid", choices=("uniform", "geometric", "kelvin_voigt"),
                   dest="grid_kind", help="solution mesh kind")
    p.add_argument("--lambda", type=float, dest="lam",
                   help="relaxation rate of example 2 (<= 0)")
    p.add_argument("--c", type=float, help="damper constant of example 3")
    p.add_argument("--k", type=float, help="spring constant of example 3")
    p.add_argument("--tol", type=float, help="implicit iteration tolerance")
    p.add_argument("--implicit", choices=("newton", "fixed_point"))
    p.add_argument("--unreduced", action="store_true", default=None,
                   help="skip the Prony reduction (ablation)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracsum",
        description="Exponential-sum compression of the t^(alpha-1) kernel "
                    "and fast Caputo-FODE solvers built on it.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_kernel = sub.add_parser("kernel", help="build a trapezoidal sum and report its error")
    _add_common(p_kernel)
    p_kernel.add_argument("--save-kernel", dest="save_kernel", help="write the sum to this file")

    p_prony = sub.add_parser("prony", help="reduce the slow block of a trapezoidal sum")
    _add_common(p_prony)
    p_prony.add_argument("--save-kernel", dest="save_kernel", help="write the reduced sum to this file")

    p_solve = sub.add_parser("solve", help="solve one benchmark problem")
    _add_common(p_solve)
    _add_solver(p_solve)
    p_solve.add_argument("--kernel-file", dest="kernel_file",
                         help="load the exponential sum instead of building it")

    p_bench = sub.add_parser("bench", help="step-size sweep with EOC table")
    _add_common(p_bench)
    _add_solver(p_bench)
    return parser


def _window_T(cfg: RunConfig) -> float:
    # kernel/prony are window-centric: without --T they use the normalized
    # window [delta, 1] rather than an example's final time
    return float(cfg.T) if cfg.T is not None else 1.0


def _cmd_kernel(cfg: RunConfig, args: argparse.Namespace) -> int:
    T = _window_T(cfg)
    spec = KernelSpec(cfg.alpha, cfg.delta, T, cfg.L, cfg.epsilon)
    es = raw_kernel(spec)
    err = kernel_error(es, geometric_grid(spec.delta, spec.T, _KERNEL_REPORT_GRID_N)).max_abs
    print(f"kernel alpha={cfg.alpha} L={cfg.L} window=[{cfg.delta:g}, {T:g}] "
          f"max_abs_err={err:.6e}")
    if args.save_kernel:
        save_expsum(args.save_kernel, es, epsilon=cfg.epsilon)
    if cfg.output_path:
        row = {"alpha": cfg.alpha, "delta": cfg.delta, "T": T, "L": cfg.L,
               "epsilon": cfg.epsilon, "l_min": float(es.nodes[0]),
               "l_max": float(es.nodes[-1]), "max_abs_err": err}
        emit_csv([row], cfg.output_path, meta=cfg)
    return 0


def _cmd_prony(cfg: RunConfig, args: argparse.Namespace) -> int:
    T = _window_T(cfg)
    spec = KernelSpec(cfg.alpha, cfg.delta, T, cfg.L, cfg.epsilon)
    report = reduce_with_rescaling(spec)
    row = reduction_row(report, cfg.alpha)
    print("prony alpha={alpha} L={L} M={M} L_p={L_p} K={K} L_f={L_f} "
          "err_before={err_before:.6e} err_after={err_after:.6e}".format(**row))
    if args.save_kernel:
        save_expsum(args.save_kernel, report.reduced, epsilon=cfg.epsilon,
                    reduction=report if report.accepted else None)
    if cfg.output_path:
        emit_csv([row], cfg.output_path, meta=cfg)
    if not report.accepted:
        raise SearchExhausted(
            f"no (K, L_p) candidate met eps'={report.eps_prime:.3e} "
            f"for alpha={cfg.alpha}, L={cfg.L}"
        )
    return 0


def _cmd_solve(cfg: RunConfig, args: argparse.Namespace) -> int:
    T = resolve_T(cfg)
    bp = make_example(cfg.example_id, cfg.alpha, T=T, lam=cfg.lam, c=cfg.c, k=cfg.k)
    h = cfg.h
    if h is None and cfg.n_steps is not None:
        h = T / cfg.n_steps
    if cfg.grid_kind == "uniform" and h is None:
        raise ValueError("solve on a uniform grid needs --h or --n")
    grid = make_grid(cfg, h, T)
    if getattr(args, "kernel_file", None):
        es, _meta = load_expsum(args.kernel_file)
    else:
        es, _report = build_kernel(cfg, T)
    sol = solve_once(bp.problem, grid, es, cfg)
    final_err = abs(float(sol.y[-1]) - bp.reference(T))
    print(f"solve example={cfg.example_id} scheme={cfg.scheme} N={grid.N} "
          f"y(T)={sol.y[-1]:.10e} abs_error={final_err:.6e}")
    if cfg.output_path:
        emit_csv(trajectory_rows(sol, bp.reference), cfg.output_path, meta=cfg)
    return 0


def _cmd_bench(cfg: RunConfig, args: argparse.Namespace) -> int:
    rows = run_example(cfg)
    print(f"{'h':>16} {'error':>14} {'eoc':>6}")
    for r in rows:
        err_s = "failed" if math.isnan(r.error) else f"{r.error:.6e}"
        eoc_s = "" if r.eoc is None else (r.eoc if isinstance(r.eoc, str) else f"{r.eoc:.2f}")
        print(f"{r.h!r:>16} {err_s:>14} {eoc_s:>6}")
    if cfg.output_path:
        emit_csv(rows, cfg.output_path, fieldnames=["h", "error", "eoc"], meta=cfg)
    return 0


_HANDLERS = {
    "kernel": _cmd_kernel,
    "prony": _cmd_prony,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/help
        return exc.code if isinstance(exc.code, int) else 2
    try:
        cfg = _merge_config(args)
        return _HANDLERS[args.command](cfg, args)
    except (ValueError, GridSpacingError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FracsumError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
