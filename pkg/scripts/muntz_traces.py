"""Partial-sum traces of the Muntz series for a few exponent families."""

from __future__ import annotations

import argparse
import math
from pathlib import Path

from cesaro_lab.invariant import muntz_criterion, write_muntz_trace

FAMILIES = {
    "imaginary": lambda n: -1.0 + 1j * n,
    "harmonic": lambda n: -0.5 - 1.0 / (n + 1),
    "sqrt": lambda n: -0.5 - 1.0 / math.sqrt(n + 1),
    "linear": lambda n: -1.0 - n,
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("script_out"))
    ap.add_argument("--terms", type=int, default=1 << 14)
    args = ap.parse_args()
    for name, seq in FAMILIES.items():
        v = muntz_criterion(seq, args.terms)
        path = write_muntz_trace(v, args.out / f"muntz_{name}.csv")
        print(f"{name:9s}: {v.verdict:10s} {v.conclusion:19s} final sum {v.partial_sums[-1]:.6f} -> {path}")


if __name__ == "__main__":
    main()
