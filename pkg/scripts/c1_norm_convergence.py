"""Power-iteration estimate of the norm of C_1 on L^2 as the grid is refined.

The estimates approach the bound 2 from below; the gap shrinks slowly because
the extremal behaviour lives near s^{-1/2}.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from cesaro_lab.cesaro import c1_nystrom_matrix, cesaro_norm_bound
from cesaro_lab.funcspace import GridFunction, default_grid
from cesaro_lab.report import write_table
from cesaro_lab.spectra import matrix_operator, operator_norm_estimate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("script_out"))
    args = ap.parse_args()
    bound = cesaro_norm_bound(1.0, 2.0)
    rows = []
    for size in (256, 512, 1024, 2048, 4096):
        g = default_grid(size)
        apply, adjoint = matrix_operator(c1_nystrom_matrix(g), g)
        start = GridFunction.from_callable(g, lambda s: s**-0.48, "s^-0.48")
        est = operator_norm_estimate(apply, 2.0, 1, grid=g, adjoint=adjoint, start=start, upper_bound=bound)
        rows.append((size, est.lower, bound - est.lower))
        print(f"grid {size:5d}: estimate {est.lower:.10f}  gap {bound - est.lower:.3e}")
    print("wrote", write_table(args.out / "c1_norm_convergence.csv", ["grid_size", "estimate", "gap"], rows))


if __name__ == "__main__":
    main()
