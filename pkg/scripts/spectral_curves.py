"""Boundary curves of the predicted C_alpha spectra, with discrete eigenvalues."""

from __future__ import annotations

import argparse
from pathlib import Path

from cesaro_lab.discrete import matrix_C_alpha_disc
from cesaro_lab.spectra import eigenvalues, predicted_spectrum, set_distance, write_spectral_report


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("script_out"))
    ap.add_argument("--N", type=int, default=64)
    args = ap.parse_args()
    for alpha in (1.0, 0.5, 2.0, 0.3, 1 + 1j):
        for p in (2.0, 4.0):
            S = predicted_spectrum("C_alpha", {"alpha": alpha}, p)
            eig = eigenvalues(matrix_C_alpha_disc(alpha, args.N)) if p == 2.0 else None
            a = complex(alpha)
            tag = f"alpha{a.real:g}{a.imag:+g}i_p{p:g}".replace(".", "_")
            csv_path, _ = write_spectral_report(args.out / f"curve_{tag}", S, eig)
            extra = ""
            if eig is not None:
                sd = set_distance(eig, S)
                extra = f", {sd.inside}/{sd.total} eigenvalues inside, max outside {sd.max_outside:.1e}"
            print(f"alpha={alpha} p={p:g}: Y={S.params['Y']:.3g}{extra} -> {csv_path}")


if __name__ == "__main__":
    main()
