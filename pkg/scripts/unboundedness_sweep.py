"""Growth of |L^lambda f_n| / ||f_n||_p on the critical line Re lambda = -1/p."""

from __future__ import annotations

import argparse
from pathlib import Path

from cesaro_lab.cesaro import unboundedness_sweep
from cesaro_lab.report import write_report


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("script_out"))
    args = ap.parse_args()
    records = []
    for p in (1.5, 2.0, 3.0):
        recs = unboundedness_sweep(p, [1e2, 1e3, 1e4, 1e6, 1e9, 1e12])
        for r in recs:
            if r.identity == "L-unbounded-ratio":
                print(f"p={p:g} n={r.params['n']:.0e}: ratio {r.measured:.8f} predicted {r.predicted:.8f}")
        records.extend(recs)
    csv_path, json_path = write_report(records, args.out / "unboundedness", {"script": "unboundedness_sweep"})
    print("wrote", csv_path, json_path)


if __name__ == "__main__":
    main()
