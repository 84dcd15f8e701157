"""Verification records and their deterministic CSV / JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "ReportRecord",
    "canonical_json",
    "format_number",
    "records_to_csv",
    "write_atomic",
    "write_report",
    "write_records_json",
    "write_table",
]

VERDICTS = ("pass", "fail", "informational")


def _plain(value: Any) -> Any:
    """JSON-ready form: complex -> {re, im}, numpy scalars -> Python, non-finite -> str."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, (complex, np.complexfloating)):
        v = complex(value)
        return {"re": _plain(v.real), "im": _plain(v.imag)}
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if value is None or isinstance(value, str):
        return value
    return str(value)


def canonical_json(value: Any, indent: int | None = None) -> str:
    """Sorted keys, fixed separators, no NaN literals."""
    seps = (",", ":") if indent is None else (",", ": ")
    return json.dumps(_plain(value), sort_keys=True, separators=seps, indent=indent,
                      allow_nan=False, ensure_ascii=False)


def format_number(value: Any) -> str:
    """17 significant digits; complex as ``re+imj``; None as empty."""
    if value is None:
        return ""
    if isinstance(value, (complex, np.complexfloating)):
        v = complex(value)
        return f"{v.real:.17g}{'+' if v.imag >= 0 or math.isnan(v.imag) else '-'}{abs(v.imag):.17g}j"
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


@dataclass(frozen=True)
class ReportRecord:
    """One verification row.

    ``verdict`` is ``pass`` iff ``residual <= params['tol']``; rows without a
    tolerance are ``informational``.
    """

    identity: str
    params: Mapping[str, Any] = field(default_factory=dict)
    measured: Any = None
    predicted: Any = None
    residual: float = 0.0
    verdict: str = "informational"

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        tol = self.params.get("tol")
        if tol is None:
            if self.verdict != "informational":
                raise ValueError("pass/fail verdicts need params['tol']")
        else:
            ok = math.isfinite(self.residual) and self.residual <= tol
            if self.verdict != ("pass" if ok else "fail"):
                raise ValueError("verdict inconsistent with residual and tolerance")

    @classmethod
    def check(
        cls,
        identity: str,
        residual: float,
        tol: float | None,
        *,
        measured: Any = None,
        predicted: Any = None,
        **params: Any,
    ) -> ReportRecord:
        """Build a record whose verdict follows from ``residual`` and ``tol``."""
        residual = float(residual)
        if tol is None:
            verdict = "informational"
        else:
            params["tol"] = float(tol)
            verdict = "pass" if (math.isfinite(residual) and residual <= tol) else "fail"
        return cls(identity, dict(params), measured, predicted, residual, verdict)

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def as_dict(self) -> dict[str, Any]:
        return {
            "identity": self.identity,
            "params": _plain(self.params),
            "measured": _plain(self.measured),
            "predicted": _plain(self.predicted),
            "residual": _plain(self.residual),
            "verdict": self.verdict,
        }

    def csv_row(self) -> list[str]:
        return [
            self.identity,
            canonical_json(self.params),
            format_number(self.measured),
            format_number(self.predicted),
            format_number(self.residual),
            self.verdict,
        ]


CSV_COLUMNS = ["identity", "params", "measured", "predicted", "residual", "verdict"]


def records_to_csv(records: Iterable[ReportRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_report(
    records: Sequence[ReportRecord],
    out_dir: str | Path,
    header: Mapping[str, Any],
    stem: str = "report",
) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.json``; returns both paths."""
    out_dir = Path(out_dir)
    csv_path, json_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.json"
    write_atomic(csv_path, records_to_csv(records))
    write_records_json(records, json_path, header)
    return csv_path, json_path


def write_records_json(records: Sequence[ReportRecord], path: str | Path, header: Mapping[str, Any]) -> Path:
    """JSON with the header, all records and a verdict summary."""
    payload = {
        "header": dict(header),
        "records": [r.as_dict() for r in records],
        "summary": {v: sum(r.verdict == v for r in records) for v in VERDICTS},
    }
    write_atomic(path, canonical_json(payload, indent=1) + "\n")
    return Path(path)


def write_table(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Plot-ready CSV with fixed number formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(columns))
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    write_atomic(path, buf.getvalue())
    return Path(path)
