"""CLI dispatch, exit codes, CSV formats, and determinism."""

import io
import json
import math

import pytest

from nocsit.certify import read_certificate
from nocsit.cli import EXIT_MATH, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_lemma_verify(capsys):
    code, out, _ = run(capsys, "lemma", "verify", "--n-max", "3")
    assert code == EXIT_OK
    assert "6 instances certified" in out


def test_lemma_verify_usage_error(capsys):
    code, _, err = run(capsys, "lemma", "verify", "--n-max", "1")
    assert code == EXIT_USAGE
    assert "n_max" in err


def test_lemma_certificate_file(tmp_path, capsys):
    path = tmp_path / "cert.txt"
    code, _, _ = run(
        capsys, "lemma", "certificate", "--N", "3", "--m", "1", "--output", str(path)
    )
    assert code == EXIT_OK
    cert = read_certificate(io.StringIO(path.read_text()))
    assert cert.multipliers  # replay already verified by the reader


def test_lemma_trace_output(capsys):
    code, out, _ = run(capsys, "lemma", "trace", "--N", "4", "--m", "2")
    assert code == EXIT_OK
    assert "induction trace: N=4, m=2" in out
    assert "subadditivity" in out


def test_lemma_mc(capsys):
    code, out, _ = run(
        capsys, "lemma", "mc", "--covariances", "40", "--seed", "9", "--n-max", "4"
    )
    assert code == EXIT_OK
    assert "pass" in out


def test_region_bc_vertices_csv(capsys):
    code, out, _ = run(capsys, "region", "bc", "--M", "4", "--N", "3,2,1", "--vertices")
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == "d1,d2,d3"
    assert len(lines) == 5  # header + 4 vertices
    assert "3,0,0" in lines


def test_region_ick_listing(capsys):
    code, out, _ = run(capsys, "region", "ick", "--M", "2,2,2", "--N", "6,4,2")
    assert code == EXIT_OK
    assert "dim 3" in out
    assert "1/6 1/4 1/2 <= 1" in out


def test_region_ic2_relabel_and_contains(capsys):
    code, out, _ = run(
        capsys, "region", "ic2", "--M", "2,2", "--N", "3,2", "--contains", "1,1"
    )
    assert code == EXIT_OK
    assert "relabeled" in out
    assert "inside" in out

    code, out, _ = run(
        capsys, "region", "ic2", "--M", "2,2", "--N", "2,3", "--contains", "2,1"
    )
    assert code == EXIT_NEGATIVE
    assert "outside" in out

    # asymmetric caps: query points stay in the original user order
    code, out, _ = run(
        capsys, "region", "ic2", "--M", "1,3", "--N", "4,2", "--contains", "1.5,0.1"
    )
    assert code == EXIT_NEGATIVE  # original user 1 is capped at min(1,4) = 1
    code, out, _ = run(
        capsys, "region", "ic2", "--M", "1,3", "--N", "4,2", "--contains", "0.5,1.5"
    )
    assert code == EXIT_OK


def test_region_bad_point_dimension(capsys):
    code, _, err = run(
        capsys, "region", "bc", "--M", "2", "--N", "2,1", "--contains", "1"
    )
    assert code == EXIT_USAGE
    assert "dim" in err


def test_capacity_ergodic_byte_stable(capsys):
    args = (
        "capacity", "ergodic", "--M", "2", "--N", "2", "--P", "100",
        "--samples", "1000", "--seed", "7",
    )
    code, out1, _ = run(capsys, *args)
    assert code == EXIT_OK
    code, out2, _ = run(capsys, *args)
    assert out1 == out2
    lines = out1.strip().splitlines()
    assert lines[1] == "P,mean_nats,stderr,n_samples,seed"
    assert len(lines) == 3


def test_capacity_theorem2_units(capsys):
    code, out, _ = run(capsys, "capacity", "theorem2", "--q", "degenerate:1", "--M", "2", "--P", "10")
    assert code == EXIT_OK
    assert f"{math.log(6.0):.11f}"[:10] in out

    code, out_bits, _ = run(
        capsys, "capacity", "theorem2", "--q", "degenerate:1", "--M", "2", "--P", "10", "--bits"
    )
    assert code == EXIT_OK
    assert f"{math.log2(6.0):.11f}"[:10] in out_bits


def test_capacity_theorem2_region_listing(capsys):
    code, out, _ = run(
        capsys, "capacity", "theorem2", "--q", "degenerate:1", "--M", "2",
        "--P", "10", "--N", "2,1",
    )
    assert code == EXIT_OK
    assert "1/2 1 <=" in out


def test_capacity_outer_ordering_error(capsys):
    code, _, err = run(
        capsys, "capacity", "outer", "--M", "2", "--N", "1,2", "--P", "10",
        "--samples", "500",
    )
    assert code == EXIT_USAGE
    assert "nonincreasing" in err or "sort" in err


def test_capacity_unknown_spec(capsys):
    code, _, err = run(capsys, "capacity", "theorem2", "--q", "weird:1", "--M", "2", "--P", "10")
    assert code == EXIT_USAGE


def test_simulate_and_slope_roundtrip(tmp_path, capsys):
    sweep_path = tmp_path / "sweep.csv"
    code, _, _ = run(
        capsys, "simulate", "bc", "--M", "2", "--N", "2,1", "--alpha", "0.5,0.5",
        "--P-grid", "1e2:1e6:5", "--slots", "2000", "--seed", "7",
        "--output", str(sweep_path),
    )
    assert code == EXIT_OK
    text = sweep_path.read_text()
    assert text.startswith("# simulate bc")
    header = text.splitlines()[1]
    assert header == "P,scheme,user,r,mean_nats,stderr,n_slots,seed"

    code, out, _ = run(capsys, "slope", "--input", str(sweep_path))
    assert code == EXIT_OK
    assert "user 1" in out and "user 2" in out
    sum_line = next(l for l in out.splitlines() if l.startswith("sum of slope"))
    value = float(sum_line.rsplit(" ", 1)[1])
    assert value == pytest.approx(1.0, abs=0.07)


def test_simulate_ic(capsys):
    code, out, _ = run(
        capsys, "simulate", "ic", "--M", "1,1", "--N", "2,2", "--P", "100",
        "--slots", "500", "--seed", "8",
    )
    assert code == EXIT_OK
    assert "ic_zero_forcing" in out


def test_simulate_requires_alpha(capsys):
    code, _, err = run(
        capsys, "simulate", "bc", "--M", "2", "--N", "2,1", "--P", "10",
        "--slots", "100",
    )
    assert code == EXIT_USAGE
    assert "alpha" in err


def test_config_file_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n_max": 3}))
    code, out, _ = run(capsys, "--config", str(cfg), "lemma", "verify")
    assert code == EXIT_OK
    assert "N=3" in out

    # explicit flag wins over the config value
    code, out, _ = run(
        capsys, "--config", str(cfg), "lemma", "verify", "--n-max", "2"
    )
    assert code == EXIT_OK
    assert "N=3" not in out


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"nmax": 3}))
    code, _, err = run(capsys, "--config", str(cfg), "lemma", "verify")
    assert code == EXIT_USAGE
    assert "unknown config keys" in err


def test_unknown_subcommand(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == EXIT_USAGE


def test_lemma_mc_reports_math_failure_exit_code():
    # sanity on the exit-code contract: EXIT_MATH is distinct and reserved
    assert (EXIT_OK, EXIT_USAGE, EXIT_MATH, EXIT_NEGATIVE) == (0, 1, 2, 3)
