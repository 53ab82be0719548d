"""Command-line dispatch: exit codes, determinism, artifact contents."""

import json

import pytest

from matterhorn.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFY_FAILED,
    dispatch,
)


def run(capsys, *argv):
    code = dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_no_arguments_prints_usage_and_fails():
    with pytest.raises(SystemExit) as exc:
        dispatch([])
    assert exc.value.code == EXIT_USAGE


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        dispatch(["verify", "--frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_verify_exhaustive_passes(capsys):
    code, out, _ = run(capsys, "verify", "--bits", "3", "--k", "1", "--exhaustive")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["result"]["passed"] is True
    assert doc["result"]["cases_checked"] == 8**4
    assert doc["invocation"]["bits"] == 3


def test_verify_sampled_passes(capsys):
    code, out, _ = run(capsys, "verify", "--bits", "4", "--samples", "2000", "--seed", "5")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["cases_checked"] == 2000


def test_verify_reports_failure_exit_code(tmp_path, capsys):
    # layer whose descriptor disagrees with its own dead zone center
    layer = {
        "n": 3,
        "alpha_in": 1.0,
        "alpha_out": 1.0,
        "mode": "symmetric",
        "mu": 2,  # off-center: silent inputs no longer stand for zero
        "k": 1,
        "weights": [1.0, -1.0, 1.0, 1.0],
        "bias": [0.0, 0.0],
    }
    path = tmp_path / "layer.json"
    path.write_text(json.dumps(layer))
    code, out, _ = run(capsys, "verify", "--weights", str(path), "--exhaustive")
    assert code == EXIT_VERIFY_FAILED
    assert json.loads(out)["result"]["passed"] is False


def test_verify_malformed_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = run(capsys, "verify", "--weights", str(path), "--exhaustive")
    assert code == EXIT_CONFIG
    assert "broken.json" in json.loads(err)["detail"]


def test_encode_round_trip_artifact(capsys):
    code, out, _ = run(capsys, "encode", "--codes", "0,3,-2", "--k", "1")
    assert code == EXIT_OK
    rows = json.loads(out)["result"]
    assert rows[0]["spike_time"] is None  # 0 sits in the dead zone
    assert rows[1] == {"code": 3, "spike_time": 4, "bits": rows[1]["bits"], "decoded": 3}


def test_xbar_replay(capsys):
    code, out, _ = run(capsys, "xbar", "--replay", "reference")
    assert code == EXIT_OK
    doc = json.loads(out)["result"]
    assert doc["currents_uA"] == pytest.approx([10.1, 0.2, 10.1, 20.0], rel=1e-12)
    assert doc["adc_codes"] == [1, 0, 1, 2]


def test_xbar_fuzz(capsys):
    code, out, _ = run(capsys, "xbar", "--fuzz", "25", "--seed", "3")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["failures"] == 0


def test_attn_fuzz(capsys):
    code, out, _ = run(capsys, "attn", "--samples", "5", "--seed", "2")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["mismatches"] == 0


def test_energy_json_report(capsys):
    code, out, _ = run(capsys, "energy", "--mode", "msu", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)["result"]
    assert doc["categories_j"]["weight_access"] == 0  # weights stay in the macros
    assert doc["categories_j"]["kv_traffic"] > 0  # attention still reads the cache
    assert doc["assumptions"]["mode"] == "msu"
    assert 0.8 * 6.14 <= doc["total_mj"] <= 1.2 * 6.14


def test_energy_csv_report(capsys):
    code, out, _ = run(capsys, "energy", "--mode", "baseline", "--format", "csv")
    assert code == EXIT_OK
    assert out.startswith("# block_energy mode=baseline")
    assert "category,joules" in out


def test_energy_bad_rates_file_is_config_error(tmp_path, capsys):
    path = tmp_path / "rates.json"
    path.write_text('{"q_proj": 0.01}')
    code, _, err = run(capsys, "energy", "--rates", str(path))
    assert code == EXIT_CONFIG
    assert "missing spike rate" in json.loads(err)["detail"]


def test_scenario_table(capsys):
    code, out, _ = run(capsys, "scenario")
    assert code == EXIT_OK
    assert "Otters" in out and "SpikingLM" in out


def test_area_report(capsys):
    code, out, _ = run(capsys, "area")
    doc = json.loads(out)["result"]
    assert code == EXIT_OK
    assert doc["macros_per_block"] == 108
    assert doc["block_mm2"] < 10.0


def test_stats_csv_and_svg(tmp_path, capsys):
    svg_path = tmp_path / "hist.svg"
    code, out, _ = run(
        capsys, "stats", "--count", "500", "--seed", "4", "--svg", str(svg_path)
    )
    assert code == EXIT_OK
    assert "silence_fraction=" in out
    assert out.strip().splitlines()[-1].startswith("silent,")
    assert svg_path.read_text().startswith("<svg")


def test_stats_baseline_flag(capsys):
    code, out, _ = run(capsys, "stats", "--count", "2000", "--baseline", "--seed", "8")
    assert code == EXIT_OK
    assert "silent decodes to minimum code" in out
    masked_code, masked_out, _ = run(capsys, "stats", "--count", "2000", "--seed", "8")
    assert masked_code == EXIT_OK
    assert "silent decodes to mu=0" in masked_out

    def silence(text):
        line = [l for l in text.splitlines() if "silence_fraction=" in l][0]
        return float(line.split("=")[1])

    assert silence(out) < silence(masked_out)


def test_sweep_table_with_reference_column(capsys):
    code, out, _ = run(capsys, "sweep", "--count", "500", "--kmax", "2", "--seed", "4")
    assert code == EXIT_OK
    assert "reference_silence_pct" in out
    assert "61.2" in out  # logged alongside, not asserted


def test_outputs_are_deterministic(capsys):
    _, first, _ = run(capsys, "sweep", "--count", "300", "--seed", "7")
    _, second, _ = run(capsys, "sweep", "--count", "300", "--seed", "7")
    assert first == second


def test_env_seed_override(monkeypatch, capsys):
    monkeypatch.setenv("MATTERHORN_SEED", "123")
    _, with_env, _ = run(capsys, "stats", "--count", "200", "--seed", "0")
    monkeypatch.delenv("MATTERHORN_SEED")
    _, explicit, _ = run(capsys, "stats", "--count", "200", "--seed", "123")
    assert with_env == explicit


def test_env_seed_must_be_integer(monkeypatch, capsys):
    monkeypatch.setenv("MATTERHORN_SEED", "not-a-number")
    code, _, err = run(capsys, "stats", "--count", "10")
    assert code == EXIT_CONFIG
    assert "MATTERHORN_SEED" in json.loads(err)["detail"]


def test_out_flag_writes_file(tmp_path, capsys):
    path = tmp_path / "report.json"
    code, out, _ = run(capsys, "area", "--out", str(path))
    assert code == EXIT_OK and out == ""
    assert json.loads(path.read_text())["result"]["macros_per_block"] == 108
