import json
from fractions import Fraction

import pytest
from gmpy2 import mpfr

from susy_spectra.cli import build_config, main, merge_settings
from susy_spectra.errors import InvalidConfig, ReproductionFailure
from susy_spectra.report import GOLDEN, agrees, fixed, reproduce_table, significant


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fixed_rounds_half_even():
    assert fixed(Fraction(25, 1000), 2) == "0.02"
    assert fixed(Fraction(35, 1000), 2) == "0.04"
    assert fixed(Fraction(-35, 1000), 2) == "-0.04"
    assert fixed(Fraction(1, 3), 0) == "0"
    assert fixed(mpfr("2.5"), 0) == "2"


def test_significant_never_uses_exponents():
    assert significant(10**30, 5) == "1" + "0" * 30
    assert significant(mpfr("1.5e-75"), 10, max_decimals=10) == "0"
    assert significant(Fraction(1, 2), 30, trim=True) == "0.5"
    # a rounded value keeps its trailing zeros
    assert significant(Fraction(5507440820, 10**9) + Fraction(1, 10**15), 10, trim=True) == "5.507440820"


def test_last_digit_slack():
    assert agrees("1.970246841", mpfr("1.9702468415"))
    assert agrees("1.970246841", mpfr("1.970246842"))
    assert not agrees("1.970246841", mpfr("1.970246843"))
    assert agrees("0", mpfr("1e-60"))


def test_golden_cell_counts():
    assert len(list(GOLDEN[1].cells())) == 4 + 6 + 8 + 9 * 3
    assert len(list(GOLDEN[3].cells())) == 17
    assert dict(((r, c), p) for r, c, p in GOLDEN[4].cells())[("RPM", "n=0")] == "1.0603620904841828996"


def test_table_one_reproduces():
    result = reproduce_table(1)
    assert result.ok
    result.check()


def test_table_two_failures_are_even_states():
    result = reproduce_table(2)
    assert result.mismatches
    assert {int(m.column.split("=")[1]) % 2 for m in result.mismatches} == {0}
    with pytest.raises(ReproductionFailure) as info:
        result.check()
    assert "expected 1.970246841" in str(info.value)


def test_moments_csv(capsys):
    code, out, _ = run_cli(capsys, "moments", "--nmax", "5")
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == "n,M(n)"
    assert lines[3] == "2,0.5"
    assert "\r" not in out


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"nmax": 3, "print-digits": 8}))
    _, out, _ = run_cli(capsys, "moments", "--config", str(cfg))
    assert out.strip().split("\n")[-1].startswith("3,") and "1.0222064" in out
    _, out, _ = run_cli(capsys, "moments", "--config", str(cfg), "--nmax", "4")
    assert out.strip().split("\n")[-1].startswith("4,")
    settings = merge_settings("moments", {"nmax": 9}, {"nmax": 3})
    assert settings["nmax"] == 9 and settings["digits"] == 50


@pytest.mark.parametrize(
    "argv",
    [
        ["moments", "--digits", "10"],
        ["moments", "--nmax", "-1"],
        ["variational", "--nmax", "99"],
        ["rpm", "--emin", "5", "--emax", "1"],
        ["rpm", "--tolerance", "abc"],
        ["rpm", "--s", "2"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2
    assert err


def test_bad_config_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(capsys, "moments", "--config", str(bad))[0] == 2
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"dmax": 4}))
    code, _, err = run_cli(capsys, "moments", "--config", str(unknown))
    assert code == 2 and "dmax" in err
    with pytest.raises(InvalidConfig):
        build_config(["moments", "--config", str(tmp_path / "missing.json")])


def test_variational_layout(capsys):
    code, out, _ = run_cli(capsys, "variational", "--nmax", "7")
    assert code == 0
    header, _, *rows = out.strip().split("\n")
    assert header.startswith("| N | n=0 | n=1 |")
    assert rows[-1].startswith("| 7 | 0 | 1.969507539 | 5.507178381 |")
    code, out, _ = run_cli(capsys, "variational", "--potential", "quartic", "--nmax", "3", "--format", "csv")
    assert out.split("\n")[:2] == ["N,n,parity,eigenvalue", "2,0,even,1.077335423"]


def test_output_is_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run_cli(capsys, "variational", "--nmax", "5", "--format", "json", "-o", str(p))[0] == 0
    a, b = (p.read_bytes() for p in paths)
    assert a == b
    assert (json.dumps(json.loads(a), indent=2) + "\n").encode() == a


def test_rpm_small_run(capsys):
    code, out, _ = run_cli(
        capsys, "rpm", "--dmax", "8", "--emin", "-1", "--emax", "3", "--digits", "40", "--tolerance", "1e-20"
    )
    assert code == 0
    rows, summary = out.split("\n\n")
    assert rows.startswith("sequence_id,D,root,error_estimate\n")
    assert summary.split("\n")[:2] == ["sequence_id,converged,error_estimate", "0,0,0"]


def test_rpm_without_convergence_exits_1(capsys):
    code, _, _ = run_cli(capsys, "rpm", "--dmax", "4", "--emin", "30", "--emax", "31", "--digits", "40")
    assert code == 1


def test_dump_series(capsys):
    code, out, _ = run_cli(capsys, "rpm", "--dump-series", "0", "--dmax", "3", "--format", "csv")
    assert code == 0
    assert out.split("\n")[:4] == ["j,f_j", "0,0", "1,0", "2,1"]


def test_reproduce_exit_codes(capsys):
    code, out, _ = run_cli(capsys, "reproduce", "1", "--format", "csv")
    assert code == 0
    assert "no" not in {line.rsplit(",", 1)[1] for line in out.strip().split("\n")[1:]}
    code, out, err = run_cli(capsys, "reproduce", "2")
    assert code == 1
    assert "mismatch [2, n=0] expected 1.970246841" in err
    assert out.startswith("Table 2:")
