import io
import json

import numpy as np
import pytest

from entdist.analysis import SweepSpec, sample_noise, sweep
from entdist.elements import HomodyneModel
from entdist.protocols import run_ghz, run_two_qubit
from entdist.records import (
    SWEEP_COLUMNS,
    RecordError,
    read_reports,
    read_sweep_csv,
    read_sweep_records,
    report_to_dict,
    write_reports,
    write_sweep_csv,
    write_sweep_records,
)


def _reports():
    rng = np.random.default_rng(1)
    out = [run_two_qubit(sample_noise(rng), sample_noise(rng), homodyne=HomodyneModel(0.3), rng=s)
           for s in range(10)]
    out.append(run_ghz(4, [sample_noise(rng) for _ in range(4)], rng=3))
    return out


def _same(a, b):
    return (a.final_state == b.final_state and a.fidelity == b.fidelity and a.record == b.record
            and a.seed == b.seed and a.success == b.success and a.params == b.params)


def test_reports_round_trip(tmp_path):
    reports = _reports()
    path = tmp_path / "r.jsonl"
    with open(path, "w") as fh:
        assert write_reports(fh, reports) == len(reports)
    back = read_reports(path)
    assert len(back) == len(reports)
    assert all(_same(a, b) for a, b in zip(reports, back))


def test_report_carries_schema_version():
    d = report_to_dict(_reports()[0])
    assert d["schema_version"] == 1
    json.dumps(d)


def test_unknown_schema_is_rejected(tmp_path):
    d = report_to_dict(_reports()[0])
    d["schema_version"] = 99
    path = tmp_path / "r.jsonl"
    path.write_text(json.dumps(d) + "\n")
    with pytest.raises(RecordError, match="r.jsonl:1"):
        read_reports(path)


@pytest.fixture(scope="module")
def result():
    return sweep(SweepSpec("homodyne_err", (0.0, 0.1, 0.5), 60, seed=2))


def test_sweep_csv_round_trip(tmp_path, result):
    buf = io.StringIO()
    write_sweep_csv(buf, result)
    assert buf.getvalue().splitlines()[0] == ",".join(SWEEP_COLUMNS)
    path = tmp_path / "s.csv"
    path.write_text(buf.getvalue())
    assert read_sweep_csv(path) == result


def test_sweep_jsonl_round_trip(tmp_path, result):
    path = tmp_path / "s.jsonl"
    with open(path, "w") as fh:
        write_sweep_records(fh, result)
    assert read_sweep_records(path) == result


def test_csv_bad_header(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(RecordError, match="header"):
        read_sweep_csv(path)
