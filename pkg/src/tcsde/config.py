"""Run configuration: strict JSON documents with presets and exact round-trip.

A run document has the shape

    {
      "schema_version": "1",
      "command": "convergence",
      "preset": "desk",
      "model": {"name": "black_scholes", "mu": 0.02, ...},
      "run": {"alpha": 0.9, "theta": 1.0, ...},
      "mc": {"n_paths": 500, "master_seed": 123456789, "max_concurrency": null},
      "output": {"dir": "tcsde-out", "svg": false}
    }

Unknown keys are rejected with their dotted path; every value is validated
with its admissible range in the message.  Floats round-trip exactly
(shortest-repr JSON encoding), so parse(emit(c)) == c, and a manifest
emitted from a resolved configuration reproduces the run byte for byte.
Precedence when assembling an effective configuration:
builtin defaults < preset < config file < explicit overrides.
"""

import copy
import json
import math
from dataclasses import dataclass

from .errors import ConfigError
from .models import _BUILDERS, make_builtin, make_expression_model

SCHEMA_VERSION = "1"

COMMANDS = ("path", "ml", "moments", "convergence", "stability", "validate")

# commands that integrate a model: required; path may carry one optionally
_MODEL_REQUIRED = ("convergence", "stability", "validate")
_MODEL_OPTIONAL = ("path",)

_LOCKED_DEFAULT_SEED = 123456789

_DEFAULTS = {
    "path": {
        "model": None,
        "run": {"alpha": 0.9, "delta": 1.0e-2, "horizon": 1.0, "theta": 1.0},
        "mc": {"n_paths": 2, "master_seed": _LOCKED_DEFAULT_SEED,
               "max_concurrency": None},
    },
    "ml": {
        "model": None,
        "run": {"alpha": 0.9, "z": -2.0},
        "mc": {"n_paths": 2, "master_seed": _LOCKED_DEFAULT_SEED,
               "max_concurrency": None},
    },
    "moments": {
        "model": None,
        "run": {"alpha": 0.9, "delta": 1.0e-3, "p_list": [1, 2],
                "t_list": [0.5, 1.0]},
        "mc": {"n_paths": 2000, "master_seed": _LOCKED_DEFAULT_SEED,
               "max_concurrency": None},
    },
    "convergence": {
        "model": {"name": "black_scholes"},
        "run": {"alpha": 0.9, "theta": 1.0,
                "delta_grid": [2.0e-2, 1.0e-2, 4.0e-3, 2.0e-3, 1.0e-3],
                "horizon": 1.0, "delta_ref": None},
        "mc": {"n_paths": 500, "master_seed": _LOCKED_DEFAULT_SEED,
               "max_concurrency": None},
    },
    "stability": {
        "model": {"name": "stability_linear"},
        "run": {"alpha": 0.9, "theta_list": [0.0, 0.25, 0.5, 1.0],
                "delta_list": [2.0, 1.0, 0.5], "internal_horizon": 50.0},
        "mc": {"n_paths": 1000, "master_seed": _LOCKED_DEFAULT_SEED,
               "max_concurrency": None},
    },
    "validate": {
        "model": {"name": "stability_linear"},
        "run": {"t_max": 1.0, "x_max": 1.0e3, "n_t": 41, "n_x": 41,
                "checks": None},
        "mc": {"n_paths": 2, "master_seed": _LOCKED_DEFAULT_SEED,
               "max_concurrency": None},
    },
}

PRESETS = {
    "desk": {},  # the builtin defaults are the desk scale
    "paper": {
        "moments": {"mc": {"n_paths": 10000}},
        "convergence": {
            "run": {"delta_grid": [2.0e-2, 1.0e-2, 4.0e-3, 2.0e-3, 1.0e-3,
                                   4.0e-4, 2.0e-4, 1.0e-4],
                    "delta_ref": 1.0e-5},
            "mc": {"n_paths": 3000},
        },
        "stability": {"mc": {"n_paths": 3000}},
    },
}

# preset scales that take minutes to hours; the CLI warns before running
SLOW_PRESETS = ("paper",)


def _err(path, msg):
    raise ConfigError(f"{path}: {msg}", key=path)


def _v_bool(path, v):
    if not isinstance(v, bool):
        _err(path, f"expected true/false, got {v!r}")
    return v


def _v_str(path, v):
    if not isinstance(v, str) or not v:
        _err(path, f"expected a nonempty string, got {v!r}")
    return v


def _v_int(path, v, lo=None, hi=None):
    if not isinstance(v, int) or isinstance(v, bool):
        _err(path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        _err(path, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        _err(path, f"must be <= {hi}, got {v}")
    return v


def _v_real(path, v, lo=None, lo_strict=None, hi=None):
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        _err(path, f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        _err(path, f"must be finite, got {v}")
    if lo is not None and v < lo:
        _err(path, f"must be >= {lo}, got {v}")
    if lo_strict is not None and v <= lo_strict:
        _err(path, f"must be > {lo_strict}, got {v}")
    if hi is not None and v > hi:
        _err(path, f"must be <= {hi}, got {v}")
    return v


def _v_alpha(path, v):
    return _v_real(path, v, lo_strict=0.0, hi=1.0)


def _v_theta(path, v):
    return _v_real(path, v, lo=0.0, hi=1.0)


def _v_num_list(path, v, item):
    if not isinstance(v, list) or not v:
        _err(path, f"expected a nonempty list, got {v!r}")
    return [item(f"{path}[{i}]", x) for i, x in enumerate(v)]


def _reject_unknown(path, given, allowed):
    extra = sorted(set(given) - set(allowed))
    if extra:
        _err(f"{path}.{extra[0]}" if path else extra[0],
             f"unknown key; allowed here: {', '.join(sorted(allowed))}")


def _validate_model_section(m):
    if m is None:
        return None
    if not isinstance(m, dict):
        _err("model", f"expected an object, got {m!r}")
    if "name" not in m:
        _err("model.name", "missing required key")
    name = _v_str("model.name", m["name"])
    out = {"name": name}
    if name == "expression":
        allowed = {"name", "drift", "diffusion", "x0", "drift_dx", "constants"}
        _reject_unknown("model", m, allowed)
        for key in ("drift", "diffusion"):
            if key not in m:
                _err(f"model.{key}", "missing required key for expression models")
            out[key] = _v_str(f"model.{key}", m[key])
        out["x0"] = _v_real("model.x0", m.get("x0", 1.0))
        if "drift_dx" in m and m["drift_dx"] is not None:
            out["drift_dx"] = _v_str("model.drift_dx", m["drift_dx"])
        consts = m.get("constants", {})
        if consts is None:
            consts = {}
        if not isinstance(consts, dict):
            _err("model.constants", f"expected an object, got {consts!r}")
        known = {"h", "growth_c", "k1", "k2", "k3", "k4", "k5", "lam",
                 "eta_f", "eta_g", "zero_fixed_point"}
        _reject_unknown("model.constants", consts, known)
        cc = {}
        for k, v in consts.items():
            cc[k] = _v_bool(f"model.constants.{k}", v) if k == "zero_fixed_point" \
                else _v_real(f"model.constants.{k}", v)
        if cc:
            out["constants"] = dict(sorted(cc.items()))
        return out
    if name not in _BUILDERS:
        _err("model.name",
             f"unknown model {name!r}; builtin: "
             f"{', '.join(sorted(_BUILDERS))}, or 'expression'")
    _, allowed = _BUILDERS[name]
    _reject_unknown("model", m, allowed | {"name"})
    for k in sorted(set(m) - {"name"}):
        out[k] = _v_real(f"model.{k}", m[k])
    return out


def _validate_run(command, run):
    if not isinstance(run, dict):
        _err("run", f"expected an object, got {run!r}")
    out = {}
    if command == "path":
        _reject_unknown("run", run, {"alpha", "delta", "horizon", "theta"})
        out["alpha"] = _v_alpha("run.alpha", run["alpha"])
        out["delta"] = _v_real("run.delta", run["delta"], lo_strict=0.0)
        out["horizon"] = _v_real("run.horizon", run["horizon"], lo_strict=0.0)
        out["theta"] = _v_theta("run.theta", run["theta"])
    elif command == "ml":
        _reject_unknown("run", run, {"alpha", "z"})
        out["alpha"] = _v_alpha("run.alpha", run["alpha"])
        out["z"] = _v_real("run.z", run["z"])
    elif command == "moments":
        _reject_unknown("run", run, {"alpha", "delta", "p_list", "t_list"})
        out["alpha"] = _v_alpha("run.alpha", run["alpha"])
        out["delta"] = _v_real("run.delta", run["delta"], lo_strict=0.0)
        out["p_list"] = _v_num_list("run.p_list", run["p_list"],
                                    lambda p, v: _v_int(p, v, lo=1))
        out["t_list"] = _v_num_list("run.t_list", run["t_list"],
                                    lambda p, v: _v_real(p, v, lo_strict=0.0))
    elif command == "convergence":
        _reject_unknown("run", run,
                        {"alpha", "theta", "delta_grid", "horizon", "delta_ref"})
        out["alpha"] = _v_alpha("run.alpha", run["alpha"])
        out["theta"] = _v_theta("run.theta", run["theta"])
        out["delta_grid"] = _v_num_list("run.delta_grid", run["delta_grid"],
                                        lambda p, v: _v_real(p, v, lo_strict=0.0))
        out["horizon"] = _v_real("run.horizon", run["horizon"], lo_strict=0.0)
        dr = run.get("delta_ref")
        out["delta_ref"] = None if dr is None \
            else _v_real("run.delta_ref", dr, lo_strict=0.0)
    elif command == "stability":
        _reject_unknown("run", run, {"alpha", "theta_list", "delta_list",
                                     "internal_horizon"})
        out["alpha"] = _v_alpha("run.alpha", run["alpha"])
        out["theta_list"] = _v_num_list("run.theta_list", run["theta_list"],
                                        _v_theta)
        out["delta_list"] = _v_num_list("run.delta_list", run["delta_list"],
                                        lambda p, v: _v_real(p, v, lo_strict=0.0))
        out["internal_horizon"] = _v_real("run.internal_horizon",
                                          run["internal_horizon"], lo_strict=0.0)
    elif command == "validate":
        _reject_unknown("run", run, {"t_max", "x_max", "n_t", "n_x", "checks"})
        out["t_max"] = _v_real("run.t_max", run["t_max"], lo=0.0)
        out["x_max"] = _v_real("run.x_max", run["x_max"], lo_strict=0.0)
        out["n_t"] = _v_int("run.n_t", run["n_t"], lo=2)
        out["n_x"] = _v_int("run.n_x", run["n_x"], lo=2)
        checks = run.get("checks")
        if checks is None:
            out["checks"] = None
        else:
            out["checks"] = _v_num_list("run.checks", checks,
                                        lambda p, v: _v_str(p, v))
    return out


@dataclass(frozen=True)
class RunConfig:
    """A validated, fully-resolved run document."""

    command: str
    preset: str
    model: dict
    run: dict
    mc: dict
    output: dict
    provenance: dict

    def build_model(self):
        """Instantiate the ModelDescriptor, or None when no model is set."""
        m = self.model
        if m is None:
            return None
        if m["name"] == "expression":
            kw = dict(m.get("constants", {}))
            return make_expression_model(
                m["drift"], m["diffusion"], m.get("x0", 1.0),
                drift_dx=m.get("drift_dx"), **kw)
        params = {k: v for k, v in m.items() if k != "name"}
        return make_builtin(m["name"], **params)

    def to_dict(self):
        d = {"schema_version": SCHEMA_VERSION, "command": self.command,
             "preset": self.preset, "model": copy.deepcopy(self.model),
             "run": copy.deepcopy(self.run), "mc": copy.deepcopy(self.mc),
             "output": copy.deepcopy(self.output)}
        if self.provenance:
            d["provenance"] = copy.deepcopy(self.provenance)
        return d


def _merge(base, override):
    """Dict deep-merge; scalars and lists replace wholesale."""
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve(command, preset="desk", file_data=None, overrides=None):
    """Assemble and validate an effective configuration.

    file_data and overrides are partial documents (same shape as the full
    one, minus schema_version/command); later sources win key by key.
    """
    if command not in COMMANDS:
        raise ConfigError(
            f"unknown command {command!r}; known: {', '.join(COMMANDS)}",
            key="command")
    if preset not in PRESETS:
        raise ConfigError(
            f"unknown preset {preset!r}; known: {', '.join(sorted(PRESETS))}",
            key="preset")
    data = {"model": copy.deepcopy(_DEFAULTS[command]["model"]),
            "run": copy.deepcopy(_DEFAULTS[command]["run"]),
            "mc": copy.deepcopy(_DEFAULTS[command]["mc"]),
            "output": {"dir": "tcsde-out", "svg": False}}
    preset_part = PRESETS[preset].get(command, {})
    data = _merge(data, preset_part)
    for part in (file_data, overrides):
        if not part:
            continue
        if part.get("provenance"):
            data["provenance"] = copy.deepcopy(part["provenance"])
        part = {k: v for k, v in part.items()
                if k not in ("schema_version", "command", "preset",
                             "provenance")}
        if "model" in part:
            # a model spec is atomic: replace, never merge across sources
            data["model"] = copy.deepcopy(part.pop("model"))
        data = _merge(data, part)
    return _validate(command, preset, data)


def _validate(command, preset, data):
    _reject_unknown("", data, {"model", "run", "mc", "output", "provenance"})
    model = data.get("model")
    if command in _MODEL_REQUIRED and model is None:
        _err("model", f"command {command!r} requires a model section")
    if command not in _MODEL_REQUIRED + _MODEL_OPTIONAL and model is not None:
        _err("model", f"command {command!r} takes no model section")
    model = _validate_model_section(model)
    run = _validate_run(command, data.get("run", {}))
    mc_in = data.get("mc", {})
    if not isinstance(mc_in, dict):
        _err("mc", f"expected an object, got {mc_in!r}")
    _reject_unknown("mc", mc_in, {"n_paths", "master_seed", "max_concurrency"})
    mc = {"n_paths": _v_int("mc.n_paths", mc_in["n_paths"], lo=2),
          "master_seed": _v_int("mc.master_seed", mc_in["master_seed"], lo=0),
          "max_concurrency": None if mc_in.get("max_concurrency") is None
          else _v_int("mc.max_concurrency", mc_in["max_concurrency"], lo=1)}
    out_in = data.get("output", {})
    if not isinstance(out_in, dict):
        _err("output", f"expected an object, got {out_in!r}")
    _reject_unknown("output", out_in, {"dir", "svg"})
    output = {"dir": _v_str("output.dir", out_in.get("dir", "tcsde-out")),
              "svg": _v_bool("output.svg", out_in.get("svg", False))}
    prov = data.get("provenance", {}) or {}
    if not isinstance(prov, dict):
        _err("provenance", f"expected an object, got {prov!r}")
    _reject_unknown("provenance", prov, {"package_version"})
    return RunConfig(command=command, preset=preset, model=model, run=run,
                     mc=mc, output=output, provenance=dict(prov))


def parse(text):
    """Parse and validate a full JSON run document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", key="") from None
    if not isinstance(data, dict):
        raise ConfigError(f"expected a JSON object, got {type(data).__name__}",
                          key="")
    sv = data.get("schema_version")
    if sv != SCHEMA_VERSION:
        _err("schema_version",
             f"expected {SCHEMA_VERSION!r}, got {sv!r}")
    command = data.get("command")
    if command not in COMMANDS:
        _err("command", f"expected one of {', '.join(COMMANDS)}, got {command!r}")
    preset = data.get("preset", "desk")
    if preset not in PRESETS:
        _err("preset", f"expected one of {', '.join(sorted(PRESETS))}, got {preset!r}")
    return resolve(command, preset=preset, file_data=data)


def emit(config):
    """Canonical JSON for a RunConfig; parse(emit(c)) == c."""
    return json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n"
