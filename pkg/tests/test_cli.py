import json

import pytest

from adder_spir.cli import main


def _read_records(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def test_run_two_file(tmp_path):
    out = tmp_path / "run.jsonl"
    code = main(
        [
            "run",
            "--n", "64", "--ell1", "4", "--ell2", "4",
            "--trials", "3", "--seed", "1", "--out", str(out),
        ]
    )
    assert code == 0
    records = _read_records(out)
    assert records[0]["record"] == "header"
    assert records[0]["format"] == "adder-spir/1"
    trials = [r for r in records if r["record"] == "transcript"]
    assert len(trials) == 3
    for r in trials:
        if not r["aborted"]:
            assert r["recovery_ok"]
            assert r["download_bits_per_file_bit"] == [2.0, 2.0]
            assert r["region_ok"]


def test_run_multifile(tmp_path):
    out = tmp_path / "mf.jsonl"
    code = main(
        [
            "run",
            "--n", "64", "--L1", "3", "--L2", "2",
            "--ell1", "3", "--ell2", "3",
            "--trials", "2", "--seed", "7", "--out", str(out),
        ]
    )
    assert code == 0
    records = _read_records(out)
    rounds = [r for r in records if r["record"] == "multifile-transcript"]
    assert len(rounds) == 2
    for r in rounds:
        if not r["aborted"]:
            assert r["recovery_ok"]
            assert r["download_bits_per_file_bit"] == [
                2.0 * (3 - 1),
                2.0 * (2 - 1),
            ]


def test_run_byte_deterministic(tmp_path):
    out_a = tmp_path / "a.jsonl"
    out_b = tmp_path / "b.jsonl"
    args = ["run", "--n", "64", "--ell1", "4", "--ell2", "4", "--trials", "4", "--seed", "5"]
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    # The header's timestamp is the only permitted difference.
    body_a = out_a.read_text().splitlines()[1:]
    body_b = out_b.read_text().splitlines()[1:]
    assert body_a == body_b


def test_sweep(tmp_path):
    out = tmp_path / "sweep.jsonl"
    code = main(["sweep", "--n", "256", "--alpha", "0.5", "--trials", "4", "--seed", "2", "--out", str(out)])
    assert code == 0
    cells = [r for r in _read_records(out) if r["record"] == "sweep-cell"]
    assert len(cells) == 1
    cell = cells[0]
    assert cell["failures"] == 0
    assert cell["chebyshev_bound"] == 256 ** (2 * 0.4 - 1) / 4


def test_audit_honest_exit_zero(tmp_path):
    out = tmp_path / "audit.jsonl"
    code = main(
        ["audit", "--n", "3", "--alpha", "1.0", "--ell1", "1", "--ell2", "0", "--out", str(out)]
    )
    assert code == 0
    report = [r for r in _read_records(out) if r["record"] == "leakage-report"][0]
    assert report["reliability_error"] == 0.0


def test_audit_mutated_exit_one(tmp_path):
    code = main(
        [
            "audit", "--n", "3", "--alpha", "1.0", "--ell1", "1", "--ell2", "0",
            "--mutate", "leak-selection", "--condition-nonabort",
            "--out", str(tmp_path / "m.jsonl"),
        ]
    )
    assert code == 1


def test_audit_budget_exit_three(tmp_path):
    code = main(
        [
            "audit", "--n", "3", "--alpha", "1.0", "--ell1", "1", "--ell2", "0",
            "--budget", "16", "--out", str(tmp_path / "b.jsonl"),
        ]
    )
    assert code == 3


def test_config_error_exit_two(tmp_path):
    # t outside (0, 1/2) passes argparse but fails validation.
    code = main(
        ["run", "--n", "64", "--t", "0.7", "--ell1", "1", "--ell2", "1", "--out", str(tmp_path / "x")]
    )
    assert code == 2


def test_bad_flag_value_exits_via_argparse():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--n", "0"])
    assert exc.value.code == 2


def test_capacity_command(tmp_path):
    out = tmp_path / "cap.jsonl"
    assert main(["capacity", "--out", str(out)]) == 0
    records = _read_records(out)
    report = [r for r in records if r["record"] == "capacity-report"][0]
    assert report["passed"]
    assert abs(report["max_value"] - 0.5) <= 1e-9
    boundary = [r for r in records if r["record"] == "region-boundary"]
    assert len(boundary) == 16
    assert all(r["corners_feasible"] for r in boundary)


def test_otp_check_command(tmp_path):
    out = tmp_path / "otp.jsonl"
    assert main(["otp-check", "--pad-width", "1", "--out", str(out)]) == 0
    report = [r for r in _read_records(out) if r["record"] == "otp-lemma-report"][0]
    assert report["max_masking_slack"] == 0.0
