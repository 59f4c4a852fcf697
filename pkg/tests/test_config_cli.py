"""Configuration resolution and the command-line surface: precedence,
validation errors, artifact layout, and golden headers."""

import io
import json
import os

import pytest

from tcsde.cli import build_parser, load_effective_config, main, run
from tcsde.config import (PRESETS, RunConfig, emit, parse, resolve)
from tcsde.errors import ConfigError

SEED = 123456789


def _cfg(command, preset="desk", file_data=None, overrides=None):
    return resolve(command, preset=preset, file_data=file_data,
                   overrides=overrides or {})


def _silent(line):
    pass


# --- resolution and validation --------------------------------------------

def test_defaults_per_command():
    c = _cfg("path")
    assert c.run["alpha"] == 0.9
    assert c.run["delta"] == 1e-2
    assert c.mc["master_seed"] == SEED
    assert c.output == {"dir": "tcsde-out", "svg": False}
    conv = _cfg("convergence")
    assert conv.model["name"] == "black_scholes"
    assert conv.run["delta_grid"] == [2e-2, 1e-2, 4e-3, 2e-3, 1e-3]
    stab = _cfg("stability")
    assert stab.run["theta_list"] == [0, 0.25, 0.5, 1]
    assert stab.run["internal_horizon"] == 50


def test_emit_parse_round_trip():
    for command in ("path", "ml", "moments", "convergence", "stability",
                    "validate"):
        c = _cfg(command)
        text = emit(c)
        assert text.endswith("\n")
        again = parse(text)
        assert again == c
        assert emit(again) == text


def test_emit_is_canonical():
    c = _cfg("ml")
    text = emit(c)
    data = json.loads(text)
    assert list(data) == sorted(data)
    assert data["schema_version"] == "1"
    assert data["command"] == "ml"


@pytest.mark.parametrize("file_data,key", [
    ({"bogus": 1}, "bogus"),
    ({"run": {"bogus": 1}}, "run.bogus"),
    ({"model": {"name": "black_scholes", "xyz": 2}}, "model.xyz"),
    ({"mc": {"paths": 10}}, "mc.paths"),
    ({"output": {"folder": "x"}}, "output.folder"),
])
def test_unknown_keys_error_with_dotted_path(file_data, key):
    with pytest.raises(ConfigError) as exc:
        _cfg("convergence", file_data=file_data)
    assert exc.value.key == key


def test_alpha_out_of_range_names_interval():
    with pytest.raises(ConfigError) as exc:
        _cfg("ml", overrides={"run": {"alpha": 1.5}})
    assert exc.value.key == "run.alpha"
    assert "must be <= 1.0" in str(exc.value)


def test_theta_validation():
    with pytest.raises(ConfigError) as exc:
        _cfg("path", overrides={"run": {"theta": 1.5}})
    assert exc.value.key == "run.theta"
    c = _cfg("stability", overrides={"run": {"theta_list": [0.25]}})
    assert c.run["theta_list"] == [0.25]


def test_unknown_command_and_preset():
    with pytest.raises(ConfigError) as exc:
        _cfg("frobnicate")
    assert exc.value.key == "command"
    with pytest.raises(ConfigError) as exc:
        _cfg("ml", preset="gala")
    assert exc.value.key == "preset"


def test_model_required_versus_forbidden():
    # moments runs on the clock alone; a model section is rejected
    with pytest.raises(ConfigError):
        _cfg("moments", file_data={"model": {"name": "black_scholes"}})
    # stability requires one and the default provides it
    c = _cfg("stability")
    assert c.model["name"] == "stability_linear"


def test_precedence_chain():
    # defaults < preset < file < overrides, checked on one knob
    assert _cfg("moments").mc["n_paths"] == 2000
    assert _cfg("moments", preset="paper").mc["n_paths"] == 10000
    assert _cfg("moments", preset="paper",
                file_data={"mc": {"n_paths": 500}}).mc["n_paths"] == 500
    assert _cfg("moments", preset="paper",
                file_data={"mc": {"n_paths": 500}},
                overrides={"mc": {"n_paths": 50}}).mc["n_paths"] == 50


def test_model_sections_replace_wholesale():
    file_data = {"model": {"name": "expression", "drift": "-x",
                           "diffusion": "0.5*x", "x0": 1.0}}
    c = _cfg("convergence", file_data=file_data,
             overrides={"model": {"name": "stability_cubic"}})
    # no expression keys may leak through the replacement
    assert c.model == {"name": "stability_cubic"}


def test_expression_model_through_config():
    file_data = {"model": {"name": "expression", "drift": "-2*x",
                           "diffusion": "0*x + 0.3", "x0": 1.0,
                           "drift_dx": "-2 + 0*x",
                           "constants": {"k1": 2.0, "lam": 1.0, "k5": 4.0}}}
    c = _cfg("stability", file_data=file_data)
    model = c.build_model()
    assert model.name == "expression"
    assert model.drift(0.0, 3.0) == -6.0
    assert model.lam == 1.0


def test_build_model_builtin_with_params():
    c = _cfg("convergence",
             file_data={"model": {"name": "black_scholes", "mu": 0.1,
                                  "sigma": 0.3}})
    m = c.build_model()
    assert m.drift(0.0, 1.0) == pytest.approx(0.1)


def test_config_equality_and_to_dict():
    a = _cfg("ml")
    b = _cfg("ml")
    assert a == b
    d = a.to_dict()
    assert d["command"] == "ml"
    assert d["run"]["z"] == -2


# --- command line ---------------------------------------------------------

def test_cli_ml_end_to_end(tmp_path, capsys):
    out = str(tmp_path / "ml-run")
    rc = main(["ml", "--alpha", "0.9", "--z", "-2", "--out", out])
    assert rc == 0
    captured = capsys.readouterr()
    assert "E_0.9(-2) = " in captured.out
    with io.open(os.path.join(out, "summary.json"), encoding="ascii") as fh:
        payload = json.load(fh)
    assert payload["schema_version"] == "1"
    assert payload["command"] == "ml"
    assert payload["master_seed"] == SEED
    with io.open(os.path.join(out, "manifest.json"), encoding="ascii") as fh:
        manifest = json.load(fh)
    assert manifest["command"] == "ml"
    assert manifest["run"]["z"] == -2.0


def test_cli_error_emits_json_and_exit_2(capsys):
    rc = main(["ml", "--alpha", "1.5"])
    assert rc == 2
    err = capsys.readouterr().err
    payload = json.loads(err)
    assert payload["error"] == "ConfigError"
    assert payload["key"] == "run.alpha"
    assert "must be <= 1.0" in payload["message"]


def test_cli_config_file_command_mismatch(tmp_path, capsys):
    cfg_path = tmp_path / "conf.json"
    cfg_path.write_text(emit(_cfg("ml")), encoding="ascii")
    rc = main(["moments", "--config", str(cfg_path),
               "--out", str(tmp_path / "o")])
    assert rc == 2
    payload = json.loads(capsys.readouterr().err)
    assert payload["key"] == "command"


def test_cli_flag_overrides_config_file(tmp_path):
    cfg_path = tmp_path / "conf.json"
    base = _cfg("ml", overrides={"run": {"z": -3.0}})
    cfg_path.write_text(emit(base), encoding="ascii")
    parser = build_parser()
    args = parser.parse_args(["ml", "--config", str(cfg_path), "--z", "-7"])
    eff = load_effective_config(args)
    assert eff.run["z"] == -7.0
    args2 = parser.parse_args(["ml", "--config", str(cfg_path)])
    assert load_effective_config(args2).run["z"] == -3.0


def test_paper_preset_announces_scale(tmp_path, capsys):
    cfg = _cfg("ml", preset="paper",
               overrides={"output": {"dir": str(tmp_path / "o")}})
    run(cfg, echo=_silent)
    assert "full experiment scale" in capsys.readouterr().err


# --- artifacts and golden headers -----------------------------------------

def _first_line(path):
    with io.open(path, encoding="ascii") as fh:
        return fh.readline().strip()


def test_convergence_artifacts_and_headers(tmp_path):
    cfg = _cfg("convergence", overrides={
        "run": {"delta_grid": [4e-2, 2e-2, 1e-2], "horizon": 0.5,
                "delta_ref": 2e-3},
        "mc": {"n_paths": 12},
        "output": {"dir": str(tmp_path / "conv")}})
    bundle = run(cfg, echo=_silent)
    names = {os.path.basename(p) for p in bundle.csv_paths}
    assert names == {"strong_error.csv", "convergence.csv"}
    by_name = {os.path.basename(p): p for p in bundle.csv_paths}
    assert _first_line(by_name["strong_error.csv"]) == "delta,mse,se,n_eff"
    assert _first_line(by_name["convergence.csv"]) == "slope,intercept,r2"
    assert bundle.summary["summary"]["slope"] is not None
    assert not bundle.svg_paths


def test_moments_artifacts_and_headers(tmp_path):
    cfg = _cfg("moments", overrides={
        "run": {"p_list": [1], "t_list": [0.5], "delta": 1e-2},
        "mc": {"n_paths": 40},
        "output": {"dir": str(tmp_path / "mom")}})
    bundle = run(cfg, echo=_silent)
    assert [os.path.basename(p) for p in bundle.csv_paths] == ["moments.csv"]
    assert _first_line(bundle.csv_paths[0]) == "p,t,empirical,formula,zscore"


def test_stability_artifacts_and_headers(tmp_path):
    cfg = _cfg("stability", overrides={
        "run": {"theta_list": [1], "delta_list": [0.5],
                "internal_horizon": 5},
        "mc": {"n_paths": 30},
        "output": {"dir": str(tmp_path / "stab")}})
    bundle = run(cfg, echo=_silent)
    assert [os.path.basename(p) for p in bundle.csv_paths] \
        == ["stability_theta1_delta0p5.csv"]
    assert _first_line(bundle.csv_paths[0]) == "t,msq,envelope,phi,gamma"


def test_path_artifacts_clock_only(tmp_path):
    cfg = _cfg("path", overrides={
        "run": {"delta": 2e-2, "horizon": 0.5},
        "output": {"dir": str(tmp_path / "path")}})
    bundle = run(cfg, echo=_silent)
    names = {os.path.basename(p) for p in bundle.csv_paths}
    assert names == {"subordinator.csv", "inverse_clock.csv"}
    by_name = {os.path.basename(p): p for p in bundle.csv_paths}
    assert _first_line(by_name["subordinator.csv"]) == "n,n_delta,D_value"
    assert _first_line(by_name["inverse_clock.csv"]) == "t,E_tilde"


def test_path_artifacts_with_model(tmp_path):
    cfg = _cfg("path", file_data={"model": {"name": "black_scholes"}},
               overrides={"run": {"delta": 2e-2, "horizon": 0.5},
                          "output": {"dir": str(tmp_path / "pathm")}})
    bundle = run(cfg, echo=_silent)
    by_name = {os.path.basename(p): p for p in bundle.csv_paths}
    assert set(by_name) == {"subordinator.csv", "inverse_clock.csv",
                            "trajectory.csv"}
    assert _first_line(by_name["trajectory.csv"]) \
        == "n,tau_n,x_st,x_fbem,newton_iters"
    # the first grid point has no implicit solve behind it
    with io.open(by_name["trajectory.csv"], encoding="ascii") as fh:
        fh.readline()
        first_row = fh.readline().strip().split(",")
    assert first_row[0] == "0"
    assert first_row[4] == ""


def test_validate_summary_payload(tmp_path):
    cfg = _cfg("validate", file_data={"model": {"name": "bounded_nonlinear"}},
               overrides={"output": {"dir": str(tmp_path / "val")}})
    bundle = run(cfg, echo=_silent)
    assert bundle.csv_paths == ()
    assert bundle.summary["summary"]["ok"] is True
    names = {c["name"] for c in bundle.summary["summary"]["checks"]}
    assert "growth" in names


def test_rerun_is_byte_identical(tmp_path):
    out = str(tmp_path / "rep")
    cfg = _cfg("convergence", overrides={
        "run": {"delta_grid": [2e-2, 1e-2, 5e-3], "horizon": 0.25,
                "delta_ref": 1e-3},
        "mc": {"n_paths": 8},
        "output": {"dir": out}})

    def snapshot():
        blobs = {}
        for name in sorted(os.listdir(out)):
            with open(os.path.join(out, name), "rb") as fh:
                blobs[name] = fh.read()
        return blobs

    run(cfg, echo=_silent)
    first = snapshot()
    run(cfg, echo=_silent)
    assert snapshot() == first
    assert "manifest.json" in first
