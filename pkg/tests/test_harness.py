from fractions import Fraction

import pytest

from fdcache.core import DemandType, NotFullyDemandedError, SchemeParams
from fdcache.harness import (
    SweepLimitExceeded,
    golden_example_check,
    golden_json_dict,
    identity_json_dict,
    identity_suite,
    report_json_dict,
    sample_fully_demanded,
    sweep_csv_rows,
    sweep_json_dict,
    to_json,
    verify_demand,
    verify_sweep,
)

RUN = SchemeParams(3, 6, 1)
RUN_D = (1, 1, 1, 1, 2, 3)


def test_verify_running_example():
    report = verify_demand(RUN, RUN_D)
    assert report.success
    assert report.t_count == 100
    assert report.rate_measured == Fraction(5, 3)
    assert report.memory_measured == Fraction(11, 15)
    assert report.oracle_ok is True
    assert report.oracle_agreement


def test_verify_smallest_instance():
    report = verify_demand(SchemeParams(2, 2, 0), (1, 2))
    assert report.success
    assert report.memory_measured == Fraction(1, 2)
    assert report.rate_measured == Fraction(1)


def test_verify_distinct_requests_three_users():
    report = verify_demand(SchemeParams(3, 3, 1), (1, 2, 3))
    assert report.success
    assert (report.memory_measured, report.rate_measured) == (Fraction(5, 3), Fraction(1, 2))


def test_verify_rejects_partial_demand():
    with pytest.raises(NotFullyDemandedError):
        verify_demand(RUN, (1, 1, 1, 1, 2, 2))


def test_verify_engine_choices():
    for engine in ("symbolic", "payload", "both"):
        report = verify_demand(SchemeParams(3, 3, 1), (1, 2, 3), engine=engine, run_oracle=False)
        assert report.success
        assert report.oracle_ok is None
    with pytest.raises(ValueError):
        verify_demand(SchemeParams(3, 3, 1), (1, 2, 3), engine="quantum")


@pytest.mark.parametrize("r", range(3))
def test_sweep_three_three(r):
    sweep = verify_sweep(SchemeParams(3, 3, r), "fully_demanded")
    assert sweep.count == 6
    assert sweep.success
    assert sweep.oracle_ok is True
    assert not sweep.failures


def test_sweep_single_type_uniform_t():
    sweep = verify_sweep(RUN, DemandType.of((4, 1, 1)))
    assert sweep.count == 90
    assert sweep.success
    assert all(report.t_count == 100 for report in sweep.reports)
    rows = sweep.per_type()
    assert rows == [
        {"type": [4, 1, 1], "demands": 90, "T": [100], "uniform": True, "rate": "5/3"}
    ]


def test_sweep_rejects_mixed_and_partial_types():
    with pytest.raises(NotFullyDemandedError):
        verify_sweep(SchemeParams(3, 3, 1), "mixed")
    with pytest.raises(NotFullyDemandedError):
        verify_sweep(SchemeParams(3, 3, 1), (2, 1, 0))


def test_sweep_limit_guard():
    with pytest.raises(SweepLimitExceeded):
        verify_sweep(SchemeParams(3, 4, 1), "fully_demanded", limit=10)
    sweep = verify_sweep(SchemeParams(3, 4, 1), "fully_demanded", limit=10, force=True)
    assert sweep.count == 36


def test_sweep_parallel_matches_serial_bytes():
    params = SchemeParams(3, 4, 2)
    serial = verify_sweep(params, "fully_demanded", jobs=1)
    parallel = verify_sweep(params, "fully_demanded", jobs=2)
    assert to_json(sweep_json_dict(serial)) == to_json(sweep_json_dict(parallel))
    assert sweep_csv_rows(serial) == sweep_csv_rows(parallel)


def test_report_serialization_stable():
    report = verify_demand(SchemeParams(3, 3, 1), (1, 2, 3), seed="9")
    again = verify_demand(SchemeParams(3, 3, 1), (1, 2, 3), seed="9")
    assert to_json(report_json_dict(report)) == to_json(report_json_dict(again))
    payload = report_json_dict(report)
    assert payload["rate"] == {"measured": "1/2", "formula": "1/2"}
    assert "elapsed_ms" not in payload
    assert "elapsed_ms" in report_json_dict(report, timing=True)


def test_payload_seed_changes_bytes_not_outcome():
    a = verify_demand(RUN, RUN_D, seed="1")
    b = verify_demand(RUN, RUN_D, seed="2")
    assert a.success and b.success
    assert report_json_dict(a)["seed"] != report_json_dict(b)["seed"]


def test_sweep_csv_shape():
    sweep = verify_sweep(SchemeParams(2, 2, 0), "fully_demanded")
    rows = sweep_csv_rows(sweep)
    assert rows[0].startswith("n_files,n_users,r,demand,")
    assert rows[1] == "2,2,0,1 2,true,4,1,1,1/2,1/2,true"
    assert len(rows) == 3


def test_sample_fully_demanded_deterministic():
    first = sample_fully_demanded(RUN, 10)
    second = sample_fully_demanded(RUN, 10)
    assert first == second
    assert len(first) == 10
    assert len(set(first)) == 10
    small = sample_fully_demanded(SchemeParams(3, 3, 1), 10)
    assert len(small) == 6  # fewer demands than requested


def test_identity_suite_families_and_json():
    suite = identity_suite(SchemeParams(3, 3, 2))
    assert suite.success
    fams = suite.families
    assert fams["skip_reconstruction"].checked == 0  # no skips at K = N
    assert fams["parity_closure"].checked > 0
    payload = identity_json_dict(suite)
    assert payload["success"] is True
    assert set(payload["families"]) == {
        "parity_closure",
        "delivery_redundancy",
        "skip_reconstruction",
        "transformed_sum",
    }


def test_identity_suite_explicit_demand():
    suite = identity_suite(RUN, demands=[RUN_D])
    assert suite.success
    assert suite.demands == (RUN_D,)
    assert suite.families["skip_reconstruction"].checked == 20  # 10 skips x 2 channels


def test_identity_suite_rejects_partial_demand():
    with pytest.raises(NotFullyDemandedError):
        identity_suite(RUN, demands=[(1, 1, 1, 1, 2, 2)])


def test_golden_example_check_passes():
    report = golden_example_check()
    assert report.success
    names = [check.name for check in report.checks]
    assert "user1_row_parities_file1_pruned" in names
    assert "s1_skips_only_34" in names
    payload = golden_json_dict(report)
    assert payload["success"] is True
    assert all(check["ok"] for check in payload["checks"])
