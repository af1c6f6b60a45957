"""Regenerate the kernel-compression summary tables.

Writes three CSVs (plus .meta sidecars) into --out-dir:

  reduction_unit_window.csv   t^(alpha-1) on [1e-2, 1],   eps = 1e-10
  reduction_wide_window.csv   t^(alpha-1) on [1e-2, 1e3], eps = 1e-10
  reduction_eps_sweep.csv     wide window, eps = 1e-10 .. 1e-13

Each row reports the trapezoidal size L, the slow-block size M, the Prony
split (L_p, K), the reduced size L_f and the kernel error before/after the
reduction.  --quick trims every sweep to its cheapest row for a smoke run.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from fracsum.bench import emit_csv, reduction_row
from fracsum.expsum import KernelSpec
from fracsum.prony import reduce_with_rescaling

UNIT_LS = {0.1: (32, 64, 128, 256), 0.5: (32, 64, 128, 256),
           0.9: (128, 256, 512, 1024)}
EPS_SWEEP = {0.1: 256, 0.5: 256, 0.9: 1024}
EPS_VALUES = (1e-10, 1e-11, 1e-12, 1e-13)


def _sweep(T: float, cases, epsilon: float = 1e-10) -> list[dict]:
    rows = []
    for alpha, L in cases:
        t0 = time.perf_counter()
        report = reduce_with_rescaling(KernelSpec(alpha, 1e-2, T, L, epsilon))
        row = reduction_row(report, alpha)
        rows.append(row)
        print(f"  alpha={alpha} L={L}: L_f={row['L_f']} "
              f"err_after={row['err_after']:.3e} "
              f"({time.perf_counter() - t0:.2f}s)")
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="artifacts", type=Path)
    parser.add_argument("--quick", action="store_true",
                        help="one cheap row per sweep (smoke run)")
    args = parser.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    cases = [(a, L) for a, Ls in UNIT_LS.items()
             for L in (Ls[:1] if args.quick else Ls)]

    print("unit window [1e-2, 1]:")
    emit_csv(_sweep(1.0, cases), args.out_dir / "reduction_unit_window.csv",
             meta="window=[1e-2, 1] epsilon=1e-10")

    print("wide window [1e-2, 1e3]:")
    emit_csv(_sweep(1e3, cases), args.out_dir / "reduction_wide_window.csv",
             meta="window=[1e-2, 1e3] epsilon=1e-10")

    print("tolerance sweep on the wide window:")
    sweep_rows = []
    for alpha, L in EPS_SWEEP.items():
        if args.quick:
            L = min(L, 256)
        for eps in (EPS_VALUES[:1] if args.quick else EPS_VALUES):
            report = reduce_with_rescaling(KernelSpec(alpha, 1e-2, 1e3, L, eps))
            row = {"epsilon": eps, **reduction_row(report, alpha)}
            sweep_rows.append(row)
            print(f"  alpha={alpha} L={L} eps={eps:g}: L_f={row['L_f']} "
                  f"err_after={row['err_after']:.3e}")
    emit_csv(sweep_rows, args.out_dir / "reduction_eps_sweep.csv",
             meta="window=[1e-2, 1e3]")

    print(f"wrote 3 tables to {args.out_dir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
