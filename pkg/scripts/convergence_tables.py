"""Regenerate the step-size/order tables for the benchmark problems.

Default output (CSVs with h, error, eoc columns in --out-dir):

  eoc_ex1_TR.csv, eoc_ex1_CI.csv     nonlinear power-law problem, alpha=0.5
  eoc_ex2_TR_alpha*.csv              linear relaxation, alpha in {0.1,0.5,0.9}

The error column is |y_N - y(T)| at the final time; eoc is the observed
order between consecutive h-halvings.  Rows of a sweep run concurrently
(cap with FRACSUM_THREADS).  --quick shortens the sweeps via n_steps.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from fracsum.bench import RunConfig, emit_csv, run_example

EX1_SCHEMES = ("TR", "CI")
EX2_CASES = {0.1: 128, 0.5: 128, 0.9: 512}


def _emit(cfg: RunConfig, path: Path) -> None:
    t0 = time.perf_counter()
    rows = run_example(cfg)
    emit_csv(rows, path, fieldnames=["h", "error", "eoc"], meta=cfg)
    finest = rows[-1]
    print(f"  {path.name}: {len(rows)} rows, finest h={finest.h!r} "
          f"error={finest.error:.3e} ({time.perf_counter() - t0:.1f}s)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="artifacts", type=Path)
    parser.add_argument("--example", type=int, choices=(1, 2),
                        help="only this benchmark (default: both)")
    parser.add_argument("--quick", action="store_true",
                        help="single-row runs instead of full sweeps")
    args = parser.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    n_steps = 64 if args.quick else None

    if args.example in (None, 1):
        print("example 1 (nonlinear power-law), alpha=0.5, L=128:")
        for scheme in EX1_SCHEMES:
            cfg = RunConfig(alpha=0.5, example_id=1, L=128, scheme=scheme,
                            n_steps=n_steps)
            _emit(cfg, args.out_dir / f"eoc_ex1_{scheme}.csv")

    if args.example in (None, 2):
        print("example 2 (linear relaxation), T=10, scheme=TR:")
        for alpha, L in EX2_CASES.items():
            cfg = RunConfig(alpha=alpha, example_id=2, L=L, scheme="TR",
                            n_steps=n_steps)
            _emit(cfg, args.out_dir / f"eoc_ex2_TR_alpha{alpha}.csv")

    print(f"wrote order tables to {args.out_dir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
