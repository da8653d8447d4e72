"""Machine-readable output: JSON-lines report records and CSV sweep tables.

Every JSON record carries ``schema_version``.  Complex numbers are written
as ``{"re": x, "im": y}`` and floats keep their full repr, so reading a
file back gives field-for-field identical objects.

Sweep CSV column order (fixed)::

    variable, value, mean_fidelity, success_rate,
    freq_phi1, freq_phi2, freq_phi3, freq_phi4, std_error, trials
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import IO, Iterable

from .analysis import SweepPoint, SweepResult, SweepVariable
from .protocols import MeasurementRecord, Outcome, ProtocolReport
from .state import BasisKet, Frequency, PhotonKet, Polarization, ProbePhase, StateVector

SCHEMA_VERSION = 1

SWEEP_COLUMNS = (
    "variable", "value", "mean_fidelity", "success_rate",
    "freq_phi1", "freq_phi2", "freq_phi3", "freq_phi4", "std_error", "trials",
)


class RecordError(ValueError):
    """A record or table could not be parsed."""


def _encode(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if set(obj) == {"re", "im"}:
            return complex(obj["re"], obj["im"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def state_to_list(state: StateVector) -> list:
    return [
        {
            "photons": [[p.pol.value, p.freq.value, p.mode] for p in ket.photons],
            "probes": [p.value for p in ket.probes],
            "amp": _encode(complex(amp)),
        }
        for ket, amp in state.items()
    ]


def state_from_list(items: list) -> StateVector:
    terms = []
    for t in items:
        photons = tuple(PhotonKet(Polarization(p), Frequency(f), m) for p, f, m in t["photons"])
        probes = tuple(ProbePhase(p) for p in t["probes"])
        terms.append((BasisKet(photons, probes), _decode(t["amp"])))
    return StateVector(terms)


def report_to_dict(report: ProtocolReport) -> dict:
    rec = report.record
    ghz = not isinstance(rec.outcome, Outcome)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "ghz" if ghz else "two_qubit",
        "seed": report.seed,
        "fidelity": report.fidelity,
        "success": report.success,
        "outcome": list(rec.outcome) if ghz else rec.outcome.value,
        "reported": [p.value for p in rec.reported],
        "true": [p.value for p in rec.true],
        "correction": list(rec.correction),
        "output_modes": list(rec.output_modes),
        "final_state": state_to_list(report.final_state),
        "params": _encode(report.params),
    }


def report_from_dict(d: dict) -> ProtocolReport:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise RecordError(f"unsupported schema_version {d.get('schema_version')!r}")
    outcome = tuple(d["outcome"]) if d["kind"] == "ghz" else Outcome(d["outcome"])
    record = MeasurementRecord(
        reported=tuple(ProbePhase(p) for p in d["reported"]),
        true=tuple(ProbePhase(p) for p in d["true"]),
        outcome=outcome,
        correction=tuple(d["correction"]),
        output_modes=tuple(d["output_modes"]),
    )
    return ProtocolReport(
        final_state=state_from_list(d["final_state"]),
        fidelity=d["fidelity"],
        record=record,
        seed=d["seed"],
        success=d["success"],
        params=_decode(d["params"]),
    )


def write_reports(fh: IO[str], reports: Iterable[ProtocolReport]) -> int:
    n = 0
    for r in reports:
        fh.write(json.dumps(report_to_dict(r)) + "\n")
        n += 1
    return n


def read_reports(path: str | Path) -> list[ProtocolReport]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(report_from_dict(json.loads(line)))
            except (KeyError, ValueError, TypeError) as exc:
                raise RecordError(f"{path}:{lineno}: {exc}") from exc
    return out


def _point_row(variable: SweepVariable, p: SweepPoint) -> list:
    return [variable.value, repr(p.value), repr(p.mean_fidelity), repr(p.success_rate),
            *(repr(f) for f in p.frequencies), repr(p.std_error), str(p.trials)]


def write_sweep_csv(fh: IO[str], result: SweepResult) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for p in result.points:
        w.writerow(_point_row(result.variable, p))


def read_sweep_csv(path: str | Path) -> SweepResult:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != SWEEP_COLUMNS:
        raise RecordError(f"{path}: header must be {','.join(SWEEP_COLUMNS)}")
    variable, points = None, []
    for lineno, row in enumerate(rows[1:], 2):
        try:
            rec = dict(zip(SWEEP_COLUMNS, row, strict=True))
            var = SweepVariable(rec["variable"])
            trials = int(rec["trials"])
            counts = tuple(round(float(rec[f"freq_phi{i}"]) * trials) for i in range(1, 5))
            points.append(SweepPoint(
                value=float(rec["value"]),
                trials=trials,
                mean_fidelity=float(rec["mean_fidelity"]),
                success_rate=float(rec["success_rate"]),
                counts=counts,
                std_error=float(rec["std_error"]),
            ))
        except (ValueError, KeyError) as exc:
            raise RecordError(f"{path}:{lineno}: {exc}") from exc
        if variable not in (None, var):
            raise RecordError(f"{path}:{lineno}: mixed sweep variables")
        variable = var
    if variable is None:
        raise RecordError(f"{path}: no data rows")
    return SweepResult(variable, tuple(points))


def sweep_to_records(result: SweepResult) -> list[dict]:
    return [
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "sweep_point",
            "variable": result.variable.value,
            "value": p.value,
            "trials": p.trials,
            "mean_fidelity": p.mean_fidelity,
            "success_rate": p.success_rate,
            "counts": dict(zip((o.value for o in Outcome), p.counts)),
            "std_error": p.std_error,
        }
        for p in result.points
    ]


def write_sweep_records(fh: IO[str], result: SweepResult) -> None:
    for rec in sweep_to_records(result):
        fh.write(json.dumps(rec) + "\n")


def read_sweep_records(path: str | Path) -> SweepResult:
    variable, points = None, []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                if d.get("schema_version") != SCHEMA_VERSION:
                    raise RecordError(f"unsupported schema_version {d.get('schema_version')!r}")
                var = SweepVariable(d["variable"])
                points.append(SweepPoint(
                    value=d["value"],
                    trials=d["trials"],
                    mean_fidelity=d["mean_fidelity"],
                    success_rate=d["success_rate"],
                    counts=tuple(d["counts"][o.value] for o in Outcome),
                    std_error=d["std_error"],
                ))
            except (KeyError, ValueError, TypeError) as exc:
                raise RecordError(f"{path}:{lineno}: {exc}") from exc
            if variable not in (None, var):
                raise RecordError(f"{path}:{lineno}: mixed sweep variables")
            variable = var
    if variable is None:
        raise RecordError(f"{path}: no records")
    return SweepResult(variable, tuple(points))
