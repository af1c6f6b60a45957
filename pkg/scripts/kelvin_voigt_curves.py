"""Regenerate the fractional Kelvin-Voigt creep data (graded-mesh run).

Two artifacts in --out-dir:

  kelvin_voigt_creep.csv    long format (series, t, value) with the computed
                            trajectory, the closed-form creep reference and
                            the pointwise absolute error -- one line per mesh
                            point per series, ready for any plotting tool;
  kelvin_voigt_L_sweep.csv  max/final solution error against the number of
                            quadrature terms L.

The element is c D^alpha y + k y = 1 with y(0) = 0 on the geometric mesh
(first step 1e-4, ratio 1.005, 5000 steps), creeping to the compliance 1/k.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from fracsum.bench import (
    RunConfig,
    build_kernel,
    emit_csv,
    kelvin_voigt_l_sweep,
    make_grid,
    resolve_T,
    solve_once,
    trajectory_rows,
)
from fracsum.examples import make_example


def _creep_run(alpha: float, L: int, c: float, k: float) -> list[dict]:
    cfg = RunConfig(command="solve", alpha=alpha, L=L, example_id=3,
                    grid_kind="kelvin_voigt", c=c, k=k)
    cfg.validate()
    T = resolve_T(cfg)
    bp = make_example(3, alpha, T=T, c=c, k=k)
    grid = make_grid(cfg, None, T)
    es, _ = build_kernel(cfg, T)
    sol = solve_once(bp.problem, grid, es, cfg)

    long_rows: list[dict] = []
    for row in trajectory_rows(sol, bp.reference):
        long_rows.append({"series": "computed", "t": row["t"], "value": row["y"]})
        long_rows.append({"series": "reference", "t": row["t"],
                          "value": bp.reference(row["t"])})
        long_rows.append({"series": "abs_error", "t": row["t"],
                          "value": row["abs_error"]})
    return long_rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="artifacts", type=Path)
    parser.add_argument("--alpha", type=float, default=0.3)
    parser.add_argument("--L", type=int, default=64)
    parser.add_argument("--c", type=float, default=100.0)
    parser.add_argument("--k", type=float, default=10.0)
    parser.add_argument("--Ls", type=int, nargs="+",
                        default=(16, 32, 64, 128),
                        help="L values for the error sweep")
    args = parser.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    long_rows = _creep_run(args.alpha, args.L, args.c, args.k)
    emit_csv(long_rows, args.out_dir / "kelvin_voigt_creep.csv",
             meta=f"alpha={args.alpha} L={args.L} c={args.c} k={args.k}")
    print(f"creep trajectory ({len(long_rows)} rows) in "
          f"{time.perf_counter() - t0:.1f}s")

    t0 = time.perf_counter()
    sweep = kelvin_voigt_l_sweep(args.alpha, args.Ls, c=args.c, k=args.k)
    emit_csv(sweep, args.out_dir / "kelvin_voigt_L_sweep.csv",
             meta=f"alpha={args.alpha} c={args.c} k={args.k}")
    for row in sweep:
        print(f"  L={row['L']:>4} L_f={row['L_f']:>3} "
              f"max|err|={row['max_abs_err']:.3e} final={row['final_err']:.3e}")
    print(f"L sweep in {time.perf_counter() - t0:.1f}s; "
          f"artifacts in {args.out_dir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
