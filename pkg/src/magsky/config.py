"""Run configuration: JSON schema validation, defaults, and named presets."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .device import DeviceParams, GeometryError, SkyrmionProfile
from .dynamics import DEFAULT_ABS_TOL, DEFAULT_REL_TOL
from .scenarios import (
    DEFAULT_N_MAX,
    FIGURE_POINTS,
    FIGURE_T_MAX,
    INITIAL_STATES,
    SCENARIOS,
    JCParams,
)

PRESETS = ("fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig4a", "fig4b")

DEVICE_DEFAULTS = {
    "R_K": 100e-9,
    "d_K": 10e-9,
    "M_s": 587e3,
    "B_K": 0.5,
    "a": 0.5e-9,
    "S_bar": 20.0,
    "R_s": 6e-9,
    "T": 0.1,
    "gamma_K_Hz": 1e6,
    "gamma_Sky_Hz": 1e6,
}

SQUEEZE_DEFAULTS = {"K_d_ratio": 0.0, "Delta_tilde_K": 20.0, "Delta_q": 20.0}

COUPLING_KEYS = {"lambda_bar"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepAxis:
    name: str
    min: float
    max: float
    count: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass
class RunConfig:
    scenario: str | None = None
    device: dict | None = None
    model: dict = field(default_factory=dict)
    squeeze: dict = field(default_factory=dict)
    initial_state: tuple | None = None
    t_max: float = FIGURE_T_MAX
    n_points: int = FIGURE_POINTS
    sweep: tuple[SweepAxis, ...] = ()
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    n_max: int = DEFAULT_N_MAX
    compare_reduced: bool = False
    output: str | None = None
    source: str = ""

    def canonical(self) -> dict:
        """Validated content as a plain dict; excludes the output path and source."""
        out = {}
        for f in fields(self):
            if f.name in ("output", "source"):
                continue
            v = getattr(self, f.name)
            if f.name == "sweep":
                v = [vars(ax) for ax in v]
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def device_params(self) -> DeviceParams:
        if self.device is None:
            raise ConfigError("this run needs a 'device' block")
        return device_from_dict(self.device)


def schema() -> dict:
    text = resources.files("magsky").joinpath("run_config.schema.json").read_text()
    return json.loads(text)


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("magsky").joinpath("presets", f"{name}.json").read_text()
    return json.loads(text)


def device_from_dict(d: dict) -> DeviceParams:
    kw = {k: d[k] for k in ("R_K", "d_K", "M_s", "B_K", "a", "S_bar", "g_factor", "gamma_e") if k in d}
    profile = SkyrmionProfile(R_s=d.get("R_s", DEVICE_DEFAULTS["R_s"]), w=d.get("w"))
    try:
        return DeviceParams(profile=profile, **kw)
    except GeometryError as exc:
        raise ConfigError(f"device: {exc}") from exc


def params_type(scenario: str):
    return SCENARIOS[scenario].params_type


def _validate_model(scenario: str | None, model: dict):
    if scenario is None:
        if model:
            raise ConfigError("'model' given without a 'scenario'")
        return
    allowed = {f.name for f in fields(params_type(scenario))}
    for key in model:
        if key not in allowed:
            raise ConfigError(f"model: unknown key {key!r} for scenario {scenario!r}")
    try:
        params_type(scenario)(**model)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model: {exc}") from exc


def _validate_sweep(cfg: RunConfig):
    for ax in cfg.sweep:
        if ax.name in DEVICE_DEFAULTS or ax.name in ("g_factor", "gamma_e", "w"):
            if cfg.device is None:
                raise ConfigError(f"sweep: axis {ax.name!r} refers to the device block, which is absent")
        elif ax.name == "K_d_ratio":
            pass
        elif cfg.scenario is not None and ax.name in {f.name for f in fields(params_type(cfg.scenario))}:
            pass
        else:
            raise ConfigError(f"sweep: axis {ax.name!r} does not name a configurable field")
        if ax.scale == "log" and (ax.min <= 0 or ax.max <= 0):
            raise ConfigError(f"sweep: log axis {ax.name!r} needs positive bounds")


def _resolve_initial(value, scenario):
    if value is None:
        if scenario is None:
            return None
        return tuple(x for x in SCENARIOS[scenario].default_initial if isinstance(x, str))
    if isinstance(value, str):
        return INITIAL_STATES[value]
    return tuple(value)


def parse_config(source) -> RunConfig:
    """Validate a config given as a path, a preset name, or an already-loaded dict.

    Unknown keys are rejected with the offending key named in the message.
    """
    label = ""
    if isinstance(source, dict):
        raw = copy.deepcopy(source)
        label = "<dict>"
    else:
        path = Path(source)
        if path.exists():
            try:
                raw = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
            label = str(path)
        elif str(source) in PRESETS:
            raw = load_preset(str(source))
            label = f"preset:{source}"
        else:
            raise ConfigError(f"config file {source!r} not found")

    try:
        jsonschema.validate(raw, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from exc

    scenario = raw.get("scenario")
    model = dict(raw.get("model", {}))
    _validate_model(scenario, model)

    device = None
    if "device" in raw:
        device = {**DEVICE_DEFAULTS, **raw["device"]}
        device_from_dict(device)
        if COUPLING_KEYS & set(model):
            raise ConfigError(
                "couplings given twice: drop model.lambda_bar or the device block"
            )

    squeeze = {**SQUEEZE_DEFAULTS, **raw.get("squeeze", {})}
    if scenario == "jc-squeezed" and "Delta_q" not in raw.get("squeeze", {}):
        # the squeezed-frame qubit detuning is the model's omega_q
        squeeze["Delta_q"] = JCParams(**model).omega_q

    times = raw.get("times", {})
    tol = raw.get("tolerances", {})
    init = raw.get("initial_state")
    cfg = RunConfig(
        scenario=scenario,
        device=device,
        model=model,
        squeeze=squeeze,
        initial_state=_resolve_initial(init, scenario),
        t_max=float(times.get("t_max", FIGURE_T_MAX)),
        n_points=int(times.get("n_points", FIGURE_POINTS)),
        sweep=tuple(SweepAxis(**{"scale": "linear", **ax}) for ax in raw.get("sweep", [])),
        rel_tol=float(tol.get("rel_tol", DEFAULT_REL_TOL)),
        abs_tol=float(tol.get("abs_tol", DEFAULT_ABS_TOL)),
        n_max=int(raw.get("n_max", DEFAULT_N_MAX)),
        compare_reduced=bool(raw.get("compare_reduced", False)),
        output=raw.get("output"),
        source=label,
    )
    _validate_sweep(cfg)
    if cfg.initial_state is not None and scenario is not None:
        n_qubits = sum(1 for x in SCENARIOS[scenario].default_initial if isinstance(x, str))
        if len(cfg.initial_state) != n_qubits:
            raise ConfigError(
                f"initial_state has {len(cfg.initial_state)} qubit labels, scenario {scenario!r} has {n_qubits} qubits"
            )
    return cfg


def with_overrides(cfg: RunConfig, n_max=None, rel_tol=None) -> RunConfig:
    if n_max is not None:
        if n_max < 1:
            raise ConfigError("--nmax must be >= 1")
        cfg.n_max = int(n_max)
    if rel_tol is not None:
        if not 1e-12 <= rel_tol <= 1e-4:
            raise ConfigError("--rel-tol must lie in [1e-12, 1e-4]")
        cfg.rel_tol = float(rel_tol)
    return cfg
