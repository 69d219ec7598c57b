import json
import subprocess
import sys

import jsonschema
import pytest

from diracres.checks import CHECKS, CheckRecord, run_checks
from diracres.cli import main
from diracres.report import VerificationReport, load_schema, validate_report


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_traces_exits_zero(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "traces", "--dim", "4")
    assert code == 0
    assert "0 mismatch" in out


def test_verify_json_validates(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "lichnerowicz", "--format", "json", "--dim", "4")
    doc = json.loads(out)
    validate_report(doc)
    assert code == 0
    assert {r["check-id"] for r in doc["records"]} == {c.check_id for c in CHECKS if c.suite == "lichnerowicz"}
    assert all(r["paper-ref"] for r in doc["records"])


def test_no_timing_is_byte_stable(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        run(capsys, "verify", "--suite", "heat", "--dim", "4", "--format", "json", "--no-timing", "--out", str(p))
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_report_all_has_each_check_once_and_fails_on_mismatch(capsys, tmp_path):
    out = tmp_path / "report.json"
    code, _, err = run(capsys, "report", "--out", str(out), "--dim", "4", "--workers", "2", "--no-timing")
    doc = json.loads(out.read_text(encoding="utf-8"))
    validate_report(doc)
    ids = [r["check-id"] for r in doc["records"]]
    assert ids == [c.check_id for c in CHECKS]
    # the conformal boundary coefficients are reported as mismatches
    assert code == 1
    assert doc["summary"]["mismatch"] == 3
    assert "3 mismatch" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--bogus"])
    assert exc.value.code == 2
    code, _, err = run(capsys, "wres", "--perturbation", "scalar", "--dim", "5")
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "torus", "--tmin", "0.3", "--tmax", "0.2")
    assert code == 2


def test_wres_one_form_statement(capsys):
    code, out, _ = run(capsys, "wres", "--perturbation", "one-form", "--dim", "4")
    assert code == 0
    assert out.startswith("Wres(D_Psi^(-2))")
    assert "b[" not in out and "-4/3*pi^2*s" in out.replace(" ", "")


def test_wres_json_and_conformal(capsys):
    code, out, _ = run(capsys, "wres", "--perturbation", "conformal", "--exponential", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["dim"] == 4 and "expm2h" in doc["statement"]


def test_boundary_cases(capsys):
    code, out, _ = run(capsys, "boundary", "--case", "thm-2.10")
    assert code == 0 and out.rstrip().endswith("Phi = 0")
    code, out, _ = run(capsys, "boundary", "--case", "prop-2.15", "--perturbation", "one-form", "--format", "json")
    doc = json.loads(out)
    assert doc["Tr[c(dx_n) Psi]"] == "-4*b[4]"


def test_boundary_missing_fixture(capsys, tmp_path):
    fx = tmp_path / "fx.txt"
    fx.write_text("term_a_II = -3/8·π·h'(0)·Ω₃\n", encoding="utf-8")
    code, _, err = run(capsys, "boundary", "--case", "thm-2.10", "--fixtures", str(fx))
    assert code == 1 and "ConfigurationError" in err


def test_torus_json(capsys):
    code, out, _ = run(capsys, "torus", "--perturbation", "scalar", "--value", "0.3")
    doc = json.loads(out)
    assert code == 0
    assert set(doc["fit"]) >= {"a0", "a2"} and set(doc["relative_error"]) == {"a0", "a2"}


def test_schema_rejects_bad_status():
    rec = CheckRecord("x", "Eq 0", "match", "0", "0", "0", 0.0).as_dict()
    doc = VerificationReport("all", (4,), []).as_dict()
    doc["records"] = [dict(rec, status="maybe")]
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(doc, load_schema())


def test_duplicate_ids_rejected():
    rec = CheckRecord("x", "Eq 0", "match", "0", "0", "0", 0.0)
    with pytest.raises(ValueError):
        VerificationReport("all", (4,), [rec, rec])


def test_worker_merge_is_ordered():
    a = run_checks("traces", (4,), workers=1)
    b = run_checks("traces", (4,), workers=3)
    assert [r.check_id for r in a] == [r.check_id for r in b]
    assert [(r.lhs, r.rhs, r.status) for r in a] == [(r.lhs, r.rhs, r.status) for r in b]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "diracres", "verify", "--suite", "lichnerowicz", "--dim", "4"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and "match" in proc.stdout
