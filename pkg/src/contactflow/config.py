"""JSON run and sweep configurations with strict validation."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .checkpoint import canonical_json
from .errors import ConfigError

DOMAIN_KEYS = {
    "Interval1D": {"a", "b", "n"},
    "Channel2D": {"Lx", "Ly", "nx", "ny"},
    "Disk2D": {"R", "n_r", "n_theta"},
}
MODEL_KEYS = {"quartic": {"theta"}, "polynomial": {"W", "sigma"}}
INITIAL_KINDS = {"well_prepared_interface", "constant", "smoothed_indicator", "random_seeded"}
INTERFACE_KEYS = {
    "plane": {"normal", "point"},
    "point": {"x0", "orientation"},
    "circle": {"center", "radius"},
    "band": {"lower", "upper", "axis", "period"},
}
RUN_KEYS = {"domain", "model", "epsilon", "t_final", "dt", "snapshot_every", "initial", "E0", "seed",
            "output", "boundary", "analysis"}
ANALYSIS_KEYS = {"deltas", "diagnostic_time", "angle_tolerance_deg", "first_variation_factor",
                 "kernel_centers", "interior_centers", "terminal_times", "user_constants",
                 "semidecreasing_rel_tol", "wetting_fraction"}
SWEEP_KEYS = {"base", "epsilons", "interface", "grids"}

ANALYSIS_DEFAULTS = {
    "deltas": None,
    "diagnostic_time": None,
    "angle_tolerance_deg": 6.0,
    "first_variation_factor": 10.0,
    "kernel_centers": None,
    "interior_centers": None,
    "terminal_times": None,
    "user_constants": [1.0, 1.0],
    "semidecreasing_rel_tol": 1e-6,
    "wetting_fraction": 0.5,
}


def config_hash(data: dict) -> str:
    """SHA-256 of the canonical JSON encoding."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _check_keys(obj, allowed, path, required=()):
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        _fail(f"{path}.{unknown[0]}", f"unknown key (allowed: {', '.join(sorted(allowed))})")
    for k in required:
        if k not in obj:
            _fail(f"{path}.{k}", "required key missing")


def _positive(value, path, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        _fail(path, f"expected an integer, got {value!r}")
    if not (math.isfinite(value) and value > 0):
        _fail(path, f"must be positive, got {value!r}")


def _validate_domain(d, path):
    if not isinstance(d, dict) or "kind" not in d:
        _fail(f"{path}.kind", "required key missing")
    kind = d["kind"]
    if kind not in DOMAIN_KEYS:
        _fail(f"{path}.kind", f"unknown domain kind {kind!r}")
    _check_keys(d, DOMAIN_KEYS[kind] | {"kind"}, path)
    for k, v in d.items():
        if k == "kind":
            continue
        if kind == "Interval1D" and k == "a":
            if not isinstance(v, (int, float)):
                _fail(f"{path}.a", "expected a number")
            continue
        _positive(v, f"{path}.{k}", integer=k in ("n", "nx", "ny", "n_r", "n_theta"))


def _validate_model(m, path):
    if not isinstance(m, dict):
        _fail(path, "expected an object")
    name = m.get("name", "quartic")
    if name not in MODEL_KEYS:
        _fail(f"{path}.name", f"unknown model {name!r}")
    _check_keys(m, MODEL_KEYS[name] | {"name"}, path, required=tuple(MODEL_KEYS[name]))
    if name == "quartic":
        th = m["theta"]
        if not isinstance(th, (int, float)) or not (0 < th <= math.pi / 2):
            _fail(f"{path}.theta", f"contact angle must lie in (0, pi/2], got {th!r}")


def _validate_interface(i, path):
    if not isinstance(i, dict):
        _fail(path, "expected an object")
    shape = i.get("shape", "plane")
    if shape not in INTERFACE_KEYS:
        _fail(f"{path}.shape", f"unknown interface shape {shape!r}")
    _check_keys(i, INTERFACE_KEYS[shape] | {"shape"}, path)


def _validate_initial(i, path):
    if not isinstance(i, dict) or "kind" not in i:
        _fail(f"{path}.kind", "required key missing")
    if i["kind"] not in INITIAL_KINDS:
        _fail(f"{path}.kind", f"unknown initial kind {i['kind']!r}")
    _check_keys(i, {"kind", "params"}, path)
    params = i.get("params", {})
    allowed = {
        "well_prepared_interface": {"interface"},
        "constant": {"value"},
        "smoothed_indicator": {"interface", "width"},
        "random_seeded": {"amplitude", "seed"},
    }[i["kind"]]
    _check_keys(params, allowed, f"{path}.params")
    if "interface" in params:
        _validate_interface(params["interface"], f"{path}.params.interface")
    elif i["kind"] in ("well_prepared_interface", "smoothed_indicator"):
        _fail(f"{path}.params.interface", "required key missing")
    if "value" in params and not (isinstance(params["value"], (int, float)) and abs(params["value"]) <= 1):
        _fail(f"{path}.params.value", f"must lie in [-1, 1], got {params['value']!r}")


def _normalise_dt(dt, path):
    if dt is None or dt == "cap":
        return "cap"
    if isinstance(dt, dict):
        _check_keys(dt, {"fraction"}, path, required=("fraction",))
        f = dt["fraction"]
        _positive(f, f"{path}.fraction")
        if f > 1:
            _fail(f"{path}.fraction", f"must not exceed 1, got {f!r}")
        return {"fraction": float(f)}
    _positive(dt, path)
    return float(dt)


@dataclass
class RunConfig:
    """A validated single-run configuration; ``data`` is the canonical mapping.

    The hash leaves out the output directory, so the same physics written to
    different places carries the same provenance stamp.
    """

    data: dict
    source: str = ""

    @property
    def hash(self) -> str:
        return config_hash({k: v for k, v in self.data.items() if k != "output"})

    def __getitem__(self, key):
        return self.data[key]

    @property
    def analysis(self) -> dict:
        return self.data["analysis"]


@dataclass
class SweepConfig:
    """A base run configuration with a strictly decreasing list of epsilons."""

    data: dict
    runs: list = field(default_factory=list)
    source: str = ""

    @property
    def hash(self) -> str:
        return config_hash(self.data)

    @property
    def epsilons(self) -> list:
        return list(self.data["epsilons"])


def validate_run(raw: dict, path: str = "config") -> RunConfig:
    """Validate a run mapping and fill defaults."""
    _check_keys(raw, RUN_KEYS, path, required=("domain", "model", "epsilon", "t_final"))
    data = copy.deepcopy(raw)
    _validate_domain(data["domain"], f"{path}.domain")
    _validate_model(data["model"], f"{path}.model")
    data["model"].setdefault("name", "quartic")
    eps = data["epsilon"]
    if isinstance(eps, bool) or not isinstance(eps, (int, float)) or not (0 < eps < 1):
        _fail(f"{path}.epsilon", f"must lie in the open interval (0, 1), got {eps!r}")
    data["epsilon"] = float(eps)
    _positive(data["t_final"], f"{path}.t_final")
    data["t_final"] = float(data["t_final"])
    data["dt"] = _normalise_dt(data.get("dt"), f"{path}.dt")
    se = data.get("snapshot_every", 10)
    _positive(se, f"{path}.snapshot_every", integer=True)
    data["snapshot_every"] = int(se)
    data.setdefault("initial", {"kind": "constant", "params": {"value": 1.0}})
    _validate_initial(data["initial"], f"{path}.initial")
    data["initial"].setdefault("params", {})
    if data.get("E0") is not None:
        _positive(data["E0"], f"{path}.E0")
        data["E0"] = float(data["E0"])
    else:
        data["E0"] = None
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        _fail(f"{path}.seed", f"must be a non-negative integer, got {seed!r}")
    data["seed"] = seed
    data.setdefault("output", None)
    b = data.get("boundary", "adjacent")
    if b not in ("adjacent", "averaged"):
        _fail(f"{path}.boundary", f"must be 'adjacent' or 'averaged', got {b!r}")
    data["boundary"] = b
    an = data.get("analysis", {})
    _check_keys(an, ANALYSIS_KEYS, f"{path}.analysis")
    merged = dict(ANALYSIS_DEFAULTS)
    merged.update(an)
    data["analysis"] = merged
    return RunConfig(data)


def validate_sweep(raw: dict, path: str = "config") -> SweepConfig:
    _check_keys(raw, SWEEP_KEYS, path, required=("base", "epsilons"))
    eps = raw["epsilons"]
    if not isinstance(eps, list) or not eps:
        _fail(f"{path}.epsilons", "expected a non-empty list")
    for k, e in enumerate(eps):
        if isinstance(e, bool) or not isinstance(e, (int, float)) or not (0 < e < 1):
            _fail(f"{path}.epsilons[{k}]", f"must lie in the open interval (0, 1), got {e!r}")
    for k in range(1, len(eps)):
        if not eps[k] < eps[k - 1]:
            _fail(f"{path}.epsilons", f"must be strictly decreasing; {eps[k]} follows {eps[k - 1]}")
    grids = raw.get("grids")
    if grids is not None and (not isinstance(grids, list) or len(grids) != len(eps)):
        _fail(f"{path}.grids", "must be a list with one domain override per epsilon")
    base = dict(raw["base"])
    base.setdefault("epsilon", eps[0])
    if "interface" in raw:
        _validate_interface(raw["interface"], f"{path}.interface")
    runs = []
    for k, e in enumerate(eps):
        r = copy.deepcopy(base)
        r["epsilon"] = e
        if grids is not None:
            r["domain"] = {**r["domain"], **grids[k]}
        if "interface" in raw:
            r.setdefault("initial", {"kind": "well_prepared_interface", "params": {}})
            r["initial"].setdefault("params", {})
            r["initial"]["params"]["interface"] = copy.deepcopy(raw["interface"])
        runs.append(validate_run(r, f"{path}.base[epsilon={e}]"))
    data = copy.deepcopy(raw)
    data["epsilons"] = [float(e) for e in eps]
    return SweepConfig(data, runs)


def parse_config(path) -> RunConfig | SweepConfig:
    """Read a UTF-8 JSON file and return a validated run or sweep configuration.

    A mapping with an ``epsilons`` key is a sweep.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: cannot read configuration ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_mapping(raw, str(path))


def parse_mapping(raw: dict, source: str = "") -> RunConfig | SweepConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    cfg = validate_sweep(raw) if "epsilons" in raw else validate_run(raw)
    cfg.source = source
    return cfg


def echo(cfg: RunConfig | SweepConfig) -> str:
    """Human-readable dump of the effective configuration."""
    return json.dumps(cfg.data, sort_keys=True, indent=2)
