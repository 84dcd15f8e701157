"""Intertwining residuals against the truncation size N."""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from cesaro_lab.discrete import INTERTWINING_KINDS, SequenceVector, intertwine_residual
from cesaro_lab.funcspace import GridFunction, default_grid
from cesaro_lab.report import write_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("script_out"))
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--alpha", type=float, default=1.0)
    args = ap.parse_args()
    g = default_grid(4096)
    f = GridFunction.from_callable(g, lambda s: np.cos(3 * s) + s**2, "cos(3s)+s^2", power=0.0)
    rows = []
    for N in (16, 32, 64, 128, 256):
        n = np.arange(N)
        a = SequenceVector(1.0 / (1.0 + n) ** 2 + 0.3j * np.exp(-n))
        res = []
        for kind in INTERTWINING_KINDS:
            prm = args.t if kind in ("S-V", "V*-T") else args.alpha
            inp = f if kind in ("S-V", "C*-V") else (a, g)
            res.append(intertwine_residual(kind, prm, inp, N))
        rows.append((N, *res))
        print(f"N={N:4d}: " + "  ".join(f"{k} {r:.2e}" for k, r in zip(INTERTWINING_KINDS, res)))
    print("wrote", write_table(args.out / "intertwining.csv", ["N", *INTERTWINING_KINDS], rows))


if __name__ == "__main__":
    main()
