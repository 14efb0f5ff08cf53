"""Config-driven CLI: validation, CSV schema, determinism, exit codes."""

import json
import math

import pytest

from ptshannon.cli import main


def write_config(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_missing_output_path_rejected_before_compute(tmp_path):
    cfg = write_config(tmp_path / "c.json",
                       {"kind": "claims", "parameters": {}, "seed": 1})
    assert main(["claims", "--config", cfg]) == 2


def test_unknown_kind_rejected(tmp_path):
    cfg = write_config(tmp_path / "c.json",
                       {"kind": "nonsense", "parameters": {},
                        "output_path": str(tmp_path / "o.csv")})
    assert main(["sweep", "--config", cfg]) == 2


def test_malformed_json_rejected(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    assert main(["claims", "--config", str(p)]) == 2


def test_instance_too_large_surfaced(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json",
                       {"kind": "claims", "parameters": {"partition_max_n": 50},
                        "output_path": str(tmp_path / "o.csv"), "seed": 1})
    assert main(["claims", "--config", cfg]) == 2
    assert "type_partition" in capsys.readouterr().err


def test_capacity_subcommand(tmp_path):
    out = tmp_path / "cap.csv"
    cfg = write_config(tmp_path / "c.json",
                       {"kind": "capacity",
                        "parameters": {"channel": [[0.89, 0.11], [0.11, 0.89]],
                                       "tol": 1e-10},
                        "output_path": str(out), "seed": 1})
    assert main(["capacity", "--config", cfg]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config_sha256=")
    assert lines[1].split(",")[:2] == ["capacity_nats", "gap_bound"]
    cap = float(lines[2].split(",")[0])
    hb = -(0.11 * math.log(0.11) + 0.89 * math.log(0.89))
    assert cap == pytest.approx(math.log(2) - hb, abs=1e-9)


def test_capacity_bits_flag(tmp_path):
    out_nats = tmp_path / "nats.csv"
    out_bits = tmp_path / "bits.csv"
    doc = {"kind": "capacity",
           "parameters": {"channel": [[1.0, 0.0], [0.0, 1.0]]},
           "output_path": str(out_nats), "seed": 1}
    cfg = write_config(tmp_path / "c.json", doc)
    assert main(["capacity", "--config", cfg]) == 0
    assert main(["capacity", "--config", cfg, "--out", str(out_bits), "--bits"]) == 0
    nats = float(out_nats.read_text().splitlines()[2].split(",")[0])
    bits = float(out_bits.read_text().splitlines()[2].split(",")[0])
    assert nats == pytest.approx(math.log(2), abs=1e-9)
    assert bits == pytest.approx(1.0, abs=1e-9)
    assert "capacity_bits" in out_bits.read_text()


def test_rd_curve_subcommand(tmp_path):
    out = tmp_path / "rd.csv"
    cfg = write_config(tmp_path / "c.json",
                       {"kind": "rd-curve",
                        "parameters": {"source": [0.5, 0.5], "d": [[0, 1], [1, 0]],
                                       "D_grid": [0.1, 0.2, 0.3]},
                        "output_path": str(out), "seed": 1})
    assert main(["rd-curve", "--config", cfg]) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "D,rate_nats"
    rates = [float(l.split(",")[1]) for l in lines[2:]]
    assert rates == sorted(rates, reverse=True)


def test_sweep_deterministic_and_seed_sensitive(tmp_path):
    out1, out2, out3 = (tmp_path / f"s{i}.csv" for i in range(3))
    doc = {"kind": "source-coding",
           "parameters": {"source": [0.9, 0.1], "mode": "source-dependent",
                          "n_grid": [100], "rate_grid": [0.3, 0.35],
                          "trials": 400},
           "output_path": str(out1), "seed": 77}
    cfg = write_config(tmp_path / "c.json", doc)
    assert main(["sweep", "--config", cfg]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert main(["sweep", "--config", cfg, "--out", str(out3), "--seed", "78"]) == 0
    assert out1.read_text().splitlines()[1] == out3.read_text().splitlines()[1]
    assert out1.read_bytes() != out3.read_bytes()


def test_sweep_schema_and_predictor_column(tmp_path):
    out = tmp_path / "ch.csv"
    cfg = write_config(tmp_path / "c.json",
                       {"kind": "channel-coding",
                        "parameters": {"channel": [[0.89, 0.11], [0.11, 0.89]],
                                       "decoder": "ml", "n_grid": [16],
                                       "rate_grid": [0.2, 0.3, 0.4],
                                       "trials": 200},
                        "output_path": str(out), "seed": 5})
    assert main(["sweep", "--config", cfg]) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "n,rate,trials,p_hat,ci95,predictor_value"
    preds = [float(l.split(",")[5]) for l in lines[2:]]
    assert preds == sorted(preds, reverse=True)  # erfc column falls with rate


def test_rate_distortion_sweep(tmp_path):
    out = tmp_path / "rd.csv"
    cfg = write_config(tmp_path / "c.json",
                       {"kind": "rate-distortion",
                        "parameters": {"source": [0.5, 0.5], "d": [[0, 1], [1, 0]],
                                       "D": 0.2, "n_grid": [60],
                                       "rate_grid": [0.15, 0.6], "trials": 200},
                        "output_path": str(out), "seed": 9})
    assert main(["sweep", "--config", cfg]) == 0
    rows = [l.split(",") for l in out.read_text().splitlines()[2:]]
    assert [float(r[5]) for r in rows] == [0.0, 1.0]  # threshold step predictor


def test_claims_run_passes_and_reports_info(tmp_path):
    out = tmp_path / "claims.csv"
    cfg = write_config(tmp_path / "c.json",
                       {"kind": "claims",
                        "parameters": {"partition_max_n": 8, "mc_samples": 40000,
                                       "delta_n": 150},
                        "output_path": str(out), "seed": 321})
    assert main(["claims", "--config", cfg]) == 0
    text = out.read_text()
    lines = text.splitlines()
    assert lines[1] == "check,detail,value,reference,error,tolerance,status"
    assert ",fail" not in text
    assert "smoothed_delta_sequence_sum" in text and ",info" in text


def test_integrals_subcommand(tmp_path):
    out = tmp_path / "ints.csv"
    cfg = write_config(tmp_path / "c.json",
                       {"kind": "integrals", "parameters": {"mc_samples": 40000},
                        "output_path": str(out), "seed": 321})
    assert main(["integrals", "--config", cfg]) == 0
    text = out.read_text()
    assert "dirichlet_all_ones" in text
    assert "type_partition_count" not in text
