import json

import numpy as np
import pytest

from fiberloop.cli import main, parse_float_axis, parse_int_axis
from fiberloop.loss import LossParams
from fiberloop.network import random_sequence
from fiberloop.seeding import trial_rng
from fiberloop.sweep import (
    ConfigError,
    SweepConfig,
    dump_map,
    loss_point,
    matrix_from_json,
    matrix_to_json,
    run_loss_sweep,
    run_mismatch_sweep,
    run_validation,
    sequence_from_json,
    sequence_to_json,
)


def test_axis_parsing():
    assert parse_float_axis("0.7") == (0.7,)
    assert parse_float_axis("0.7,0.9,1.0") == (0.7, 0.9, 1.0)
    assert parse_float_axis("0.7:1.0:0.1") == pytest.approx((0.7, 0.8, 0.9, 1.0))
    assert parse_int_axis("2:4:1") == (2, 3, 4)
    with pytest.raises(ConfigError):
        parse_float_axis("1:2")
    with pytest.raises(ConfigError):
        parse_float_axis("1:2:-0.5")
    with pytest.raises(ConfigError):
        parse_float_axis(",")


def test_config_validation():
    with pytest.raises(ConfigError):
        SweepConfig(experiment="nope")
    with pytest.raises(ConfigError):
        SweepConfig(experiment="loss-similarity", modes=())
    with pytest.raises(ConfigError):
        SweepConfig(experiment="loss-similarity", modes=(1,))  # needs m-1 >= 1 loops
    with pytest.raises(ConfigError):
        SweepConfig(experiment="loss-similarity", eta_f=(1.2,))
    with pytest.raises(ConfigError):
        SweepConfig(experiment="mismatch-delta", fmt="xml")
    cfg = SweepConfig(experiment="loss-similarity")
    assert cfg.effective_iterations == 1750
    assert SweepConfig(experiment="jitter-sigma").effective_iterations == 250
    assert SweepConfig(experiment="jitter-sigma", iterations=7).effective_iterations == 7


def loss_config(**kw):
    base = dict(
        experiment="loss-similarity",
        modes=(2,),
        eta_f=(0.9, 1.0),
        eta_s=(1.0,),
        iterations=25,
        master_seed=5,
    )
    base.update(kw)
    return SweepConfig(**base)


def test_loss_sweep_grid_completeness_and_bounds():
    config = loss_config(modes=(2, 3), eta_f=(0.8, 1.0))
    result = run_loss_sweep(config)
    assert len(result.records) == 4
    for rec in result.records:
        assert rec["loops"] == rec["m"] - 1
        for key in ("s_max", "s_mean", "p_s_at_best"):
            assert -1e-12 <= rec[key] <= 1.0 + 1e-12
        assert rec["s_mean"] <= rec["s_max"] + 1e-15


def test_loss_sweep_reruns_byte_identically():
    config = loss_config()
    assert run_loss_sweep(config).to_csv() == run_loss_sweep(config).to_csv()
    assert run_loss_sweep(config).to_json() == run_loss_sweep(config).to_json()


def test_loss_points_are_evaluation_order_independent():
    config = loss_config(modes=(2, 3))
    full = {(r["m"], r["eta_f"]): r for r in run_loss_sweep(config).records}
    # recompute single points in scrambled order; each must match the sweep
    for m, eta_f in [(3, 1.0), (2, 0.9), (3, 0.9), (2, 1.0)]:
        assert loss_point(m, eta_f, 1.0, config) == full[(m, eta_f)]


def test_mismatch_sweep_zero_error_row_and_grid():
    config = SweepConfig(
        experiment="mismatch-delta",
        modes=(2,),
        delta=(0.0, 0.5),
        iterations=20,
        master_seed=1,
    )
    result = run_mismatch_sweep(config)
    assert len(result.records) == 2
    zero = result.records[0]
    assert zero["delta_over_width"] == 0.0
    for key in ("f_mean", "f_min", "f_max"):
        assert zero[key] == pytest.approx(1.0, abs=1e-12)
    lossy = result.records[1]
    assert lossy["f_mean"] < zero["f_mean"] + 1e-12
    assert 0.0 <= lossy["f_min"] <= lossy["f_mean"] <= lossy["f_max"] <= 1.0 + 1e-12


def test_jitter_sweep_runs_and_is_deterministic():
    config = SweepConfig(
        experiment="jitter-sigma",
        modes=(1,),
        sigma=(0.5,),
        iterations=200,
        master_seed=2,
    )
    a = run_mismatch_sweep(config)
    b = run_mismatch_sweep(config)
    assert a.to_csv() == b.to_csv()
    # m=1 analytic mean: 1/sqrt(1 + sigma^2)
    assert a.records[0]["f_mean"] == pytest.approx(1 / np.sqrt(1.25), abs=0.02)


def test_experiment_and_runner_must_match():
    with pytest.raises(ConfigError):
        run_loss_sweep(SweepConfig(experiment="mismatch-delta"))
    with pytest.raises(ConfigError):
        run_mismatch_sweep(loss_config())


def test_matrix_json_round_trip():
    rng = np.random.default_rng(0)
    from fiberloop.network import single_loop_map

    v = single_loop_map(random_sequence(3, 1, rng))
    again = matrix_from_json(matrix_to_json(v))
    assert np.array_equal(again.entries, v.entries)


def test_sequence_json_round_trip():
    seq = random_sequence(3, 2, np.random.default_rng(4))
    again = sequence_from_json(sequence_to_json(seq))
    assert again == seq


def test_dump_map_payload():
    payload = dump_map(2, 1, LossParams(0.9, 0.95), seed=3)
    eta = 0.9 * 0.95
    expected = (0.95 * np.array([[eta, eta**2], [1.0, eta]])).tolist()
    assert np.allclose(payload["loss_matrix"], expected, atol=1e-15)
    v = matrix_from_json(payload["single_pass"][0])
    vl = matrix_from_json(payload["single_pass_lossy"][0])
    assert np.abs(vl.entries - v.entries * np.array(payload["loss_matrix"])).max() < 1e-14
    # same program reloaded reproduces the same maps
    seq = sequence_from_json(payload["sequence"])
    payload2 = dump_map(2, 1, LossParams(0.9, 0.95), sequence=seq)
    assert payload2["composed_lossy"] == payload["composed_lossy"]


def test_dump_map_lossless_blocks_coincide():
    payload = dump_map(3, 2, LossParams(), seed=8)
    assert payload["single_pass"] == payload["single_pass_lossy"]
    assert payload["composed"] == payload["composed_lossy"]


def test_dump_map_requires_exactly_one_source():
    with pytest.raises(ConfigError):
        dump_map(2, 1, LossParams())
    seq = random_sequence(2, 1, trial_rng(0, 0))
    with pytest.raises(ConfigError):
        dump_map(2, 1, LossParams(), seed=1, sequence=seq)


def test_validation_suite_is_green():
    checks = run_validation(seed=0)
    assert checks and all(c.passed for c in checks)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_loss_sweep_writes_deterministic_csv(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["loss-sweep", "--m", "2", "--eta-f", "0.9,1.0", "--iterations", "20", "--seed", "3"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header = out1.read_text().splitlines()[0]
    assert header.startswith("experiment,m,loops,eta_f,eta_s")


def test_cli_stdout_and_json_format(tmp_path, capsys):
    assert main(["mismatch-sweep", "--m", "2", "--delta", "0:0.4:0.2", "--iterations", "5",
                 "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["config"]["experiment"] == "mismatch-delta"
    assert len(payload["records"]) == 3


def test_cli_jitter_sweep_label(tmp_path):
    out = tmp_path / "j.csv"
    assert main(["jitter-sweep", "--m", "1", "--sigma", "0.5", "--iterations", "5",
                 "--out", str(out)]) == 0
    assert "jitter-sigma" in out.read_text()


def test_cli_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"modes": [2], "eta_f": [0.9], "iterations": 5, "master_seed": 7}))
    assert main(["loss-sweep", "--config", str(cfg), "--iterations", "3"]) == 0
    body = capsys.readouterr().out
    row = body.splitlines()[1].split(",")
    assert row[5] == "3"  # CLI flag beats the config file


def test_cli_errors_are_machine_readable(tmp_path, capsys):
    # empty grid -> config error on stderr as one JSON line, nonzero exit
    assert main(["loss-sweep", "--m", "1", "--iterations", "2"]) == 1
    err = capsys.readouterr().err.strip()
    decoded = json.loads(err.splitlines()[-1])
    assert decoded["error"] and decoded["message"]
    # argparse usage failures are wrapped the same way
    with pytest.raises(SystemExit) as exc:
        main(["loss-sweep", "--format", "xml"])
    assert exc.value.code == 2
    decoded = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert decoded["error"] == "usage"


def test_cli_dump_map_round_trip(tmp_path):
    out = tmp_path / "maps.json"
    assert main(["dump-map", "--m", "2", "--seed", "5", "--eta-f", "0.9", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    seq_file = tmp_path / "seq.json"
    seq_file.write_text(json.dumps(payload["sequence"]))
    out2 = tmp_path / "maps2.json"
    assert main(["dump-map", "--m", "2", "--sequence-file", str(seq_file), "--eta-f", "0.9",
                 "--out", str(out2)]) == 0
    payload2 = json.loads(out2.read_text())
    assert payload2["composed_lossy"] == payload["composed_lossy"]
    assert payload2["sequence"] == payload["sequence"]


def test_cli_validate_passes(capsys):
    assert main(["validate", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 8 and "FAIL" not in out


def test_cli_plot_renders_figure(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["loss-sweep", "--m", "2,3", "--eta-f", "0.8:1.0:0.1", "--iterations", "5",
                 "--out", str(out), "--plot"]) == 0
    fig = tmp_path / "sweep.png"
    assert fig.exists() and fig.stat().st_size > 1000
    # mismatch figure path too
    out2 = tmp_path / "fid.csv"
    assert main(["mismatch-sweep", "--m", "2", "--delta", "0:0.6:0.2", "--iterations", "5",
                 "--out", str(out2), "--plot"]) == 0
    assert (tmp_path / "fid.png").exists()


def test_cli_plot_without_out_is_an_error(capsys):
    assert main(["loss-sweep", "--m", "2", "--iterations", "2", "--plot"]) == 1
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "plot" in err["message"].lower() or "out" in err["message"].lower()
