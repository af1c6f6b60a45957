"""Plain-text persistence of exponential sums.

Format: one comment header followed by one `weight<TAB>exponent` line per
term, all floats rendered with 17 significant digits (binary-exact round
trip for doubles):

    # alpha=0.5 delta=0.01 T=1 L=256 epsilon=1e-10
    1.1890620985318815e-21	-2.4869430616827088e-21
    ...

Reduced sums append `reduced=true K=<K> L_p=<Lp> L_f=<Lf>` to the header;
the number of data lines then equals L_f while L records the size of the
original trapezoidal sum.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .expsum import ExpSum

__all__ = ["save_expsum", "load_expsum"]

_FMT = "%.17g"


def save_expsum(path, es: ExpSum, *, epsilon: float, reduction=None) -> None:
    """Write es to path.  `epsilon` is the build accuracy target recorded in
    the header; pass the originating ReductionReport as `reduction` to mark
    the file as a reduced sum."""
    header = (
        f"# alpha={_FMT % es.alpha} delta={_FMT % es.delta} T={_FMT % es.T} "
        f"L={reduction.L if reduction is not None else es.L} epsilon={_FMT % epsilon}"
    )
    if reduction is not None:
        header += f" reduced=true K={reduction.K} L_p={reduction.L_p} L_f={reduction.L_f}"
    lines = [header]
    for w, b in zip(es.weights, es.exponents):
        lines.append(f"{_FMT % w}\t{_FMT % b}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_expsum(path):
    """Read a sum written by save_expsum.

    Returns (ExpSum, meta) where meta is the parsed header dict with keys
    alpha, delta, T, L, epsilon, reduced and — for reduced sums — K, L_p, L_f.
    Unreduced sums get their node lattice reconstructed as ln(-b).
    """
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError(f"{path}: missing header line")
    meta: dict = {"reduced": False}
    for field in text[0].lstrip("#").split():
        key, _, val = field.partition("=")
        if key in ("L", "K", "L_p", "L_f"):
            meta[key] = int(val)
        elif key == "reduced":
            meta[key] = val.lower() == "true"
        else:
            meta[key] = float(val)
    rows = [ln.split("\t") for ln in text[1:] if ln.strip()]
    weights = np.array([float(r[0]) for r in rows])
    exponents = np.array([float(r[1]) for r in rows])
    expected = meta.get("L_f") if meta["reduced"] else meta.get("L")
    if expected is not None and len(rows) != expected:
        raise ValueError(f"{path}: header announces {expected} terms, file has {len(rows)}")
    nodes = None if meta["reduced"] else np.log(-exponents)
    es = ExpSum(weights, exponents, nodes, meta["alpha"], meta["delta"], meta["T"])
    return es, meta
