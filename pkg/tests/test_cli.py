import json

import pytest

from fdcache.cli import main

GOLDEN_TRADEOFF_33 = """\
r,M_frac,M_dec,R_frac,R_dec,S_frac
,0,0,3,3,
0,1/3,0.3333333333,2,2,0
1,5/3,1.666666667,1/2,0.5,0
2,3,3,0,0,0
"""


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_tradeoff_four_six_points(capsys):
    code, out, _ = run(capsys, "tradeoff", "--n", "4", "--k", "6", "--type", "3,1,1,1", "--format", "csv")
    assert code == 0
    assert "1,14/15,0.9333333333,19/10,1.9,1/10" in out
    assert "2,17/10,1.7,1,1,0" in out
    assert "3,37/15,2.466666667,1/2,0.5,0" in out
    assert "4,97/30,3.233333333,1/5,0.2,0" in out


def test_tradeoff_golden_csv(capsys):
    code, out, _ = run(capsys, "tradeoff", "--n", "3", "--k", "3", "--type", "1,1,1", "--format", "csv")
    assert code == 0
    assert out == GOLDEN_TRADEOFF_33


def test_tradeoff_worst_two_two(capsys):
    code, out, _ = run(capsys, "tradeoff", "--n", "2", "--k", "2", "--worst", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["demand_class"] == "worst"
    rows = {row["r"]: row for row in payload["rows"]}
    assert set(rows) == {None, 0, 1}
    assert rows[0]["M"] == "1/2"
    assert rows[1]["M"] == "2" and rows[1]["R"] == "0"


def test_tradeoff_requires_type_or_worst(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["tradeoff", "--n", "3", "--k", "3"])
    assert exc.value.code == 2


def test_verify_single_demand(capsys):
    code, out, _ = run(
        capsys, "verify", "--n", "3", "--k", "6", "--r", "1", "--demand", "1,1,1,1,2,3", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["success"] is True
    assert payload["T"] == 100
    assert payload["rate"]["measured"] == "5/3"
    assert payload["oracle"] is True


def test_verify_sweep_all_fully_demanded(capsys):
    code, out, _ = run(
        capsys, "verify", "--n", "3", "--k", "3", "--r", "1", "--all-fully-demanded", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] == 6
    assert payload["success"] is True
    assert payload["failures"] == []


def test_verify_rejects_partial_demand(capsys):
    code, out, err = run(capsys, "verify", "--n", "3", "--k", "3", "--r", "1", "--demand", "1,1,2")
    assert code == 2
    assert "unrequested" in err


def test_verify_sweep_limit_exit(capsys):
    code, _, err = run(
        capsys, "verify", "--n", "3", "--k", "4", "--r", "1", "--all-fully-demanded", "--limit", "10"
    )
    assert code == 2
    assert "limit" in err


def test_verify_type_sweep_csv(capsys):
    code, out, _ = run(
        capsys, "verify", "--n", "2", "--k", "2", "--r", "0", "--type", "1,1", "--format", "csv"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("n_files,")
    assert lines[1:] == ["2,2,0,1 2,true,4,1,1,1/2,1/2,true", "2,2,0,2 1,true,4,1,1,1/2,1/2,true"]


def test_bounds_check_violation(capsys):
    code, out, _ = run(capsys, "bounds", "--setting", "210", "--check", "5/3,1/2", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["check"]["satisfied"] is False
    verdicts = {f["facet"]: (f["value"], f["ok"]) for f in payload["check"]["facets"]}
    assert verdicts["2M+3R>=5"] == ("29/6", False)


def test_bounds_check_satisfied_111(capsys):
    code, out, _ = run(capsys, "bounds", "--setting", "111", "--check", "5/3,1/2", "--format", "json")
    assert code == 0
    assert json.loads(out)["check"]["satisfied"] is True


def test_bounds_single_facet_300(capsys):
    code, out, _ = run(capsys, "bounds", "--setting", "300", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["facets"] == ["M+3R>=3"]
    assert payload["inner_corners"] == [["0", "1"], ["3", "0"]]


def test_bounds_bad_fraction(capsys):
    code, _, err = run(capsys, "bounds", "--setting", "210", "--check", "x,y")
    assert code == 2
    assert "fraction" in err


def test_lemmas_single_demand(capsys):
    code, out, _ = run(
        capsys, "lemmas", "--n", "3", "--k", "6", "--r", "1", "--demand", "1,1,1,1,2,3", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["success"] is True
    assert all(f["failed"] == 0 for f in payload["families"].values())


def test_lemmas_vacuous_families(capsys):
    code, out, _ = run(capsys, "lemmas", "--n", "2", "--k", "2", "--r", "0", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["success"] is True
    assert payload["families"]["skip_reconstruction"]["checked"] == 0


def test_golden_command(capsys):
    code, out, _ = run(capsys, "golden", "--format", "json")
    assert code == 0
    assert json.loads(out)["success"] is True


def test_output_file(tmp_path, capsys):
    target = tmp_path / "curve.csv"
    code, out, _ = run(
        capsys, "tradeoff", "--n", "3", "--k", "3", "--type", "1,1,1", "--format", "csv",
        "--output", str(target),
    )
    assert code == 0
    assert out == ""
    assert target.read_text() == GOLDEN_TRADEOFF_33


def test_repeat_runs_byte_identical(capsys):
    args = ["verify", "--n", "3", "--k", "3", "--r", "1", "--all-fully-demanded", "--format", "json"]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
