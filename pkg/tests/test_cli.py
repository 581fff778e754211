import json
import subprocess
import sys

import numpy as np
import pytest

from spsys import cli, formats


@pytest.fixture()
def golden_spec(tmp_path):
    path = tmp_path / "golden.json"
    formats.dump_json(
        {"kind": "subshift", "d": 2, "depth": 7, "forbidden": [[2, 2]]}, path)
    return str(path)


@pytest.fixture()
def commuting_spec(tmp_path):
    path = tmp_path / "commuting.json"
    formats.dump_json(
        {"kind": "quadratic", "d": 2, "depth": 6,
         "A": formats.encode_matrix(np.array([[0, 1], [-1, 0]], dtype=complex))},
        path)
    return str(path)


@pytest.fixture()
def rep_file(tmp_path):
    path = tmp_path / "rep.json"
    t1 = np.diag([0.3, 0.2, 0.1]).astype(complex)
    t2 = np.diag([0.1, 0.4, 0.2]).astype(complex)
    formats.dump_json(
        {"d": 2, "h": 3,
         "matrices": [formats.encode_matrix(t1), formats.encode_matrix(t2)]},
        path)
    return str(path)


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_dims_plain_line(capsys, golden_spec):
    code, out, err = run_cli(capsys, "dims", "--spec", golden_spec, "--depth", "6")
    assert code == 0
    assert out.strip() == "1 2 3 5 8 13 21"


def test_dims_uses_spec_depth_by_default(capsys, golden_spec):
    code, out, _ = run_cli(capsys, "dims", "--spec", golden_spec)
    assert code == 0
    assert out.strip() == "1 2 3 5 8 13 21 34"


def test_build_emits_report_and_fibers(capsys, tmp_path, golden_spec):
    out_path = tmp_path / "fibers.json"
    code, out, err = run_cli(
        capsys, "build", "--spec", golden_spec, "--depth", "5",
        "--out", str(out_path))
    assert code == 0
    report = json.loads(out)
    assert report["command"] == "build"
    assert report["checks"][0]["verdict"] == "pass"
    assert "sha256:" in report["inputs"]["spec"]["digest"]
    saved = formats.load_json(out_path)
    assert saved["dims"] == [1, 2, 3, 5, 8, 13]


def test_verify_all_checks_pass(capsys, golden_spec):
    code, out, err = run_cli(
        capsys, "verify", "--spec", golden_spec, "--depth", "6",
        "--checks", "axioms,defect,subshift,unit")
    assert code == 0
    report = json.loads(out)
    verdicts = {c["check_id"]: c["verdict"] for c in report["checks"]}
    assert verdicts["axioms"] == "pass"
    assert verdicts["subshift"] == "pass"
    assert report["unit_basis_vectors"] == [1]
    assert "verify: ok" in err


def test_verify_rejects_unknown_check(capsys, golden_spec):
    code, _, err = run_cli(
        capsys, "verify", "--spec", golden_spec, "--checks", "axioms,bogus")
    assert code == 3
    assert "bogus" in err


def test_verify_subshift_check_needs_subshift(capsys, commuting_spec):
    code, _, err = run_cli(
        capsys, "verify", "--spec", commuting_spec, "--checks", "subshift")
    assert code == 3


def test_shift_exports_matrices(capsys, tmp_path, golden_spec):
    out_dir = tmp_path / "shifts"
    code, out, _ = run_cli(
        capsys, "shift", "--spec", golden_spec, "--depth", "5",
        "--out", str(out_dir))
    assert code == 0
    meta = formats.load_json(out_dir / "offsets.json")
    assert meta["dims"] == [1, 2, 3, 5, 8, 13]
    m = formats.decode_matrix(formats.load_json(out_dir / "shift_1.json"))
    assert m.shape == (sum(meta["dims"]),) * 2


def test_check_rep_pass_and_fail(capsys, tmp_path, commuting_spec, rep_file):
    code, out, _ = run_cli(
        capsys, "check-rep", "--spec", commuting_spec, "--rep", rep_file)
    assert code == 0

    bad = tmp_path / "bad_rep.json"
    t1 = np.array([[0, 0.5, 0], [0, 0, 0.5], [0, 0, 0]], dtype=complex)
    t2 = np.diag([0.3, 0.2, 0.1]).astype(complex)
    formats.dump_json(
        {"matrices": [formats.encode_matrix(t1), formats.encode_matrix(t2)]}, bad)
    code, out, err = run_cli(
        capsys, "check-rep", "--spec", commuting_spec, "--rep", str(bad))
    assert code == 1
    assert "FAIL" in err


def test_poisson_within_tail(capsys, commuting_spec, rep_file):
    code, out, _ = run_cli(
        capsys, "poisson", "--spec", commuting_spec, "--rep", rep_file,
        "--r", "0.9")
    assert code == 0
    report = json.loads(out)
    check = report["checks"][0]
    assert check["check_id"] == "kernel-isometry"
    assert check["residual"] <= check["threshold"]


def test_piece_full_space_for_representation(capsys, commuting_spec, rep_file):
    code, out, _ = run_cli(
        capsys, "piece", "--spec", commuting_spec, "--rep", rep_file)
    assert code == 0
    report = json.loads(out)
    assert report["dim"] == 3


def test_classify_qmat(capsys, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    formats.dump_json(formats.encode_matrix(
        np.array([[1, 2.0], [0.5, 1]], dtype=complex)), a)
    formats.dump_json(formats.encode_matrix(
        np.array([[1, 0.5], [2.0, 1]], dtype=complex)), b)
    code, out, _ = run_cli(capsys, "classify", "qmat", str(a), str(b))
    assert code == 0
    report = json.loads(out)
    assert report["equivalent"] is True
    assert report["perm"] == [2, 1]


def test_classify_quad_yes_and_no(capsys, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    z = tmp_path / "z.json"
    formats.dump_json(formats.encode_matrix(
        np.array([[0, 1], [-1, 0]], dtype=complex)), a)
    formats.dump_json(formats.encode_matrix(
        np.array([[0, 2.0], [-2.0, 0]], dtype=complex)), b)
    formats.dump_json(formats.encode_matrix(np.zeros((2, 2))), z)
    code, out, _ = run_cli(capsys, "classify", "quad", str(a), str(b))
    assert code == 0
    assert json.loads(out)["equivalent"] is True
    code, out, _ = run_cli(capsys, "classify", "quad", str(a), str(z))
    assert code == 0
    assert json.loads(out)["equivalent"] is False


def test_cp_strong_commute_example(capsys, tmp_path):
    p_csv = tmp_path / "p.csv"
    q_csv = tmp_path / "q.csv"
    third = "0.3333333333333333"
    p_csv.write_text("\n".join([",".join([third] * 3)] * 3) + "\n")
    q_csv.write_text("0.5,0,0.5\n0.25,0.5,0.25\n0.25,0.5,0.25\n")
    code, out, _ = run_cli(capsys, "cp", "strong-commute", str(p_csv), str(q_csv))
    assert code == 0
    report = json.loads(out)
    assert report["commute"] is True
    assert report["strong"] is False
    assert report["witnesses"]


def test_cp_as_dims(capsys, tmp_path):
    chan = tmp_path / "chan.json"
    rng = np.random.default_rng(0)
    ks = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
          for _ in range(2)]
    formats.dump_json(
        {"h": 2, "kraus": [formats.encode_matrix(k) for k in ks]}, chan)
    code, out, _ = run_cli(capsys, "cp", "as-dims", str(chan), "--n", "4")
    assert code == 0
    report = json.loads(out)
    assert report["dims"] == [1, 2, 4, 4, 4]


def test_malformed_spec_gives_context(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "subshift", ')
    code, _, err = run_cli(capsys, "dims", "--spec", str(bad))
    assert code == 3
    assert "line" in err and "col" in err


def test_missing_file_exit_code(capsys):
    code, _, err = run_cli(capsys, "dims", "--spec", "no_such_file.json")
    assert code == 3


def test_budget_flag_trips_guard(capsys, golden_spec):
    code, _, err = run_cli(
        capsys, "dims", "--spec", golden_spec, "--budget-mb", "0")
    assert code == 3
    assert "budget" in err.lower()


def test_reports_are_byte_stable(capsys, golden_spec):
    _, out1, _ = run_cli(capsys, "verify", "--spec", golden_spec,
                         "--checks", "axioms,defect")
    _, out2, _ = run_cli(capsys, "verify", "--spec", golden_spec,
                         "--checks", "axioms,defect")
    assert out1 == out2


def test_console_entry_point(tmp_path):
    spec = tmp_path / "golden.json"
    formats.dump_json(
        {"kind": "subshift", "d": 2, "depth": 6, "forbidden": [[2, 2]]}, spec)
    proc = subprocess.run(
        [sys.executable, "-m", "spsys.cli", "dims", "--spec", str(spec)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "1 2 3 5 8 13 21"
