"""Command-line front end.

Every command writes one CSV and one JSON file into ``--out``.  Exit status:
0 when all checked records pass, 1 when any fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .discrete import matrix_C_alpha_disc, matrix_C_alpha_star_disc
from .funcspace import GridFunction, default_grid, lp_norm, monomial
from .invariant import cyclic_distance_closed_form, cyclic_iterate_distance, muntz_criterion, write_muntz_trace
from .koopman import apply_S, apply_T
from .report import ReportRecord, canonical_json, write_atomic, write_records_json, write_table
from .specfun import log_gamma
from .spectra import OPERATOR_IDS, eigenvalues, gamma_curve, predicted_spectrum, write_spectral_report
from .verify import SUITES, ConfigError, RunConfig, environment, run_and_write

__all__ = ["main", "build_parser"]


def _complex(text: str) -> complex:
    """``"re,im"`` or a plain real number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're,im' or a real number, got {text!r}")


def _override(text: str) -> tuple[str, float]:
    key, sep, val = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=val, got {text!r}")
    try:
        return key, float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance for {key!r} is not a number") from None


def _p(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid-size", type=int, default=4096)
    common.add_argument("--trunc-N", type=int, default=128)
    common.add_argument("--alpha", type=_complex, default=complex(1.0))
    common.add_argument("--p", type=_p, default=2.0)
    common.add_argument("--t", type=float, default=0.5)
    common.add_argument("--lambda", dest="lam", type=_complex, default=complex(-1.0))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=Path("cesaro_out"))
    common.add_argument("--tol-override", action="append", type=_override, default=[], metavar="KEY=VAL")

    parser = argparse.ArgumentParser(prog="cesaro-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("suite_pos", nargs="?", choices=sorted(SUITES) + ["all"], metavar="SUITE")
    v.add_argument("--suite", choices=sorted(SUITES) + ["all"])

    s = sub.add_parser("spectrum", parents=[common], help="predicted spectrum (and truncation eigenvalues)")
    s.add_argument("--op", choices=OPERATOR_IDS, default="C_alpha")

    sub.add_parser("evolve", parents=[common], help="T(t) and S(t) applied to g_lambda")

    m = sub.add_parser("muntz", parents=[common], help="Müntz partial sums")
    m.add_argument("--family", choices=["imaginary", "harmonic", "constant"], default="imaginary",
                   help="s_n = lambda + i n, -1/2 - 1/(n+1), or lambda")
    m.add_argument("--terms", type=int, default=4096)

    c = sub.add_parser("cyclic", parents=[common], help="cyclic-iterate distances for f = 1 + s")
    c.add_argument("--n-max", type=int, default=20)

    sub.add_parser("gamma-table", parents=[common], help="Gamma-quotient curve samples")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        grid_size=args.grid_size,
        truncation_N=args.trunc_N,
        tol_overrides=dict(args.tol_override),
        output_dir=args.out,
        seed=args.seed,
        alpha=args.alpha,
        p=args.p,
        t=args.t,
        lam=args.lam,
    )


def _finish(records: Sequence[ReportRecord]) -> int:
    failed = [r for r in records if r.verdict == "fail"]
    for r in failed:
        print(f"FAIL {r.identity} residual={r.residual:.3e} params={canonical_json(r.params)}", file=sys.stderr)
    print(f"{len(records)} records, {len(failed)} failed")
    return 1 if failed else 0


def _header(command: str, cfg: RunConfig, **extra) -> dict:
    return {"command": command, "config": cfg.header(), "environment": environment(), **extra}


def cmd_verify(args: argparse.Namespace, cfg: RunConfig) -> int:
    suite = args.suite or args.suite_pos or "all"
    records, csv_path, json_path = run_and_write(suite, cfg)
    print(f"wrote {csv_path} and {json_path}")
    return _finish(records)


def cmd_spectrum(args: argparse.Namespace, cfg: RunConfig) -> int:
    params = {"alpha": cfg.alpha, "t": cfg.t}
    S = predicted_spectrum(args.op, params, cfg.p)
    eig = None
    if args.op in ("C_alpha_disc", "C_alpha_star_disc"):
        build = matrix_C_alpha_disc if args.op == "C_alpha_disc" else matrix_C_alpha_star_disc
        eig = eigenvalues(build(cfg.alpha, min(cfg.truncation_N, 1024)))
    csv_path, json_path = write_spectral_report(cfg.output_dir / "spectrum", S, eig)
    print(f"wrote {csv_path} and {json_path}")
    if eig is None:
        return 0
    from .spectra import set_distance

    sd = set_distance(eig, S)
    return _finish([ReportRecord.check("spectrum-in-set", sd.max_outside, cfg.tol("spectrum-in-set", 1e-8),
                                       measured=sd.max_outside, op=args.op)])


def cmd_evolve(args: argparse.Namespace, cfg: RunConfig) -> int:
    cut = math.exp(-cfg.t)
    g = default_grid(cfg.grid_size, breakpoints=(cut,) if 0 < cut < 1 else ())
    lam = complex(cfg.lam)
    if not lam.real < -0.5:
        raise ConfigError("evolve needs Re lambda < -1/2 so that g_lambda is in L^2")
    f = monomial(lam, g)
    Tf, Sf = apply_T(cfg.t, f), apply_S(cfg.t, f)
    rows = zip(g.nodes, Tf.values.real, Tf.values.imag, Sf.values.real, Sf.values.imag)
    csv_path = write_table(cfg.output_dir / "evolve.csv", ["s", "T_re", "T_im", "S_re", "S_im"], rows)
    nf = lp_norm(f, 2)
    rT = lp_norm(Tf, 2) / nf
    predT = math.exp(lam.real * cfg.t)
    # ‖S(t) g_λ‖² = e^{-t} ‖g_λ‖² for every f
    rS = lp_norm(Sf, 2) / nf
    predS = math.exp(-cfg.t / 2)
    records = [
        ReportRecord.check("evolve-T-eigen-norm", abs(rT / predT - 1), cfg.tol("evolve-T-eigen-norm", 1e-10),
                           measured=rT, predicted=predT, lam=lam, t=cfg.t),
        ReportRecord.check("evolve-S-norm", abs(rS / predS - 1), cfg.tol("evolve-S-norm", 1e-6),
                           measured=rS, predicted=predS, lam=lam, t=cfg.t),
    ]
    json_path = write_records_json(records, cfg.output_dir / "evolve.json", _header("evolve", cfg))
    print(f"wrote {csv_path} and {json_path}")
    return _finish(records)


def cmd_muntz(args: argparse.Namespace, cfg: RunConfig) -> int:
    lam = complex(cfg.lam)
    if args.family == "imaginary":
        seq = lambda n: lam + 1j * n  # noqa: E731
    elif args.family == "harmonic":
        seq = lambda n: -0.5 - 1.0 / (n + 1)  # noqa: E731
    else:
        seq = lambda n: lam  # noqa: E731
    try:
        v = muntz_criterion(seq, args.terms)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    csv_path = write_muntz_trace(v, cfg.output_dir / "muntz.csv")
    payload = {
        "header": _header("muntz", cfg, family=args.family, terms=args.terms),
        "verdict": v.verdict,
        "conclusion": v.conclusion,
        "certified": v.certified,
        "method": v.method,
        "final_partial_sum": float(v.partial_sums[-1]),
        "block_sums": list(v.block_sums),
    }
    json_path = cfg.output_dir / "muntz.json"
    write_atomic(json_path, canonical_json(payload, indent=1) + "\n")
    print(f"wrote {csv_path} and {json_path}")
    print(f"{v.verdict} ({v.conclusion}, {v.method})")
    return 0


def cmd_cyclic(args: argparse.Namespace, cfg: RunConfig) -> int:
    lam = complex(cfg.lam)
    if not lam.real < -0.5:
        raise ConfigError("cyclic needs Re lambda < -1/2")
    g = default_grid(cfg.grid_size)
    f = GridFunction.from_callable(g, lambda s: 1.0 + s, "1+s")
    rows, records = [], []
    for n in range(1, args.n_max + 1):
        d = cyclic_iterate_distance(lam, f, 1.0, cfg.t, n)
        ref = cyclic_distance_closed_form(lam, lambda s: 1.0 + s, 1.0, cfg.t, n, g)
        rows.append((n, d, ref))
        records.append(ReportRecord.check("cyclic-distance", abs(d - ref) / ref, cfg.tol("cyclic-distance", 1e-8),
                                          measured=d, predicted=ref, n=n, lam=lam, t=cfg.t))
    csv_path = write_table(cfg.output_dir / "cyclic.csv", ["n", "distance", "closed_form"], rows)
    json_path = write_records_json(records, cfg.output_dir / "cyclic.json", _header("cyclic", cfg))
    print(f"wrote {csv_path} and {json_path}")
    return _finish(records)


def cmd_gamma_table(args: argparse.Namespace, cfg: RunConfig) -> int:
    S = predicted_spectrum("C_alpha", {"alpha": cfg.alpha}, cfg.p)
    c = S.params["shift"]
    y = np.linspace(-50.0, 50.0, 201)
    vals = gamma_curve(cfg.alpha, c, 1j * y)
    csv_path = write_table(cfg.output_dir / "gamma_table.csv", ["y", "re", "im"],
                           zip(y, vals.real, vals.imag))
    payload = {
        "header": _header("gamma-table", cfg),
        "shift": c,
        "Y": S.params["Y"],
        "value_at_zero": complex(vals[100]),
        "log_gamma_alpha_plus_1": log_gamma(complex(cfg.alpha) + 1.0),
    }
    json_path = cfg.output_dir / "gamma_table.json"
    write_atomic(json_path, canonical_json(payload, indent=1) + "\n")
    print(f"wrote {csv_path} and {json_path}")
    return 0


COMMANDS = {
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "muntz": cmd_muntz,
    "cyclic": cmd_cyclic,
    "gamma-table": cmd_gamma_table,
}


def _glue_values(argv: Sequence[str]) -> list[str]:
    """Join ``--lambda -2,1`` into ``--lambda=-2,1`` so argparse accepts it."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in ("--lambda", "--alpha"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_values(sys.argv[1:] if argv is None else argv))
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # unsupported parameter combinations (e.g. C_alpha at p = 1)
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
