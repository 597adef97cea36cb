"""Sweep and figure runs that produce CSV tables and JSON reports."""

from __future__ import annotations

import io
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, device_from_dict, params_type
from .constants import CONSTANTS, constants_table
from .device import (
    PROFILE_ANSATZ,
    cooperativity,
    coupling_strength,
    kittel_frequency,
    qubit_spectrum,
    squeezing_transform,
    thermal_occupancy,
)
from .dynamics import evolve, expectation
from .scenarios import SCENARIOS, build_model, initial_state, observables

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
TRUNCATION_TOL = 1e-6

COOPERATIVITY_NOTE = (
    "evaluated as 4*lambda_KS^2/(gamma_K*gamma_Sky); for lambda/2pi = 12.7 MHz and 1 MHz rates "
    "this gives 645 (161 with lambda_bar = lambda_KS/2), not the value of about 51 sometimes quoted "
    "for that regime"
)


@dataclass
class ErrorRecord:
    coords: tuple
    reason: str


@dataclass
class Report:
    command: str
    columns: list  # [(name, unit)]
    rows: list = field(default_factory=list)  # tuples of floats or ErrorRecord
    header: dict = field(default_factory=dict)
    n_coords: int = 0

    @property
    def failures(self) -> int:
        return sum(isinstance(r, ErrorRecord) for r in self.rows)

    def data_rows(self) -> list:
        return [r for r in self.rows if not isinstance(r, ErrorRecord)]

    def column(self, name: str) -> np.ndarray:
        idx = [c for c, _ in self.columns].index(name)
        return np.array([r[idx] for r in self.data_rows()])

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.header.items():
            buf.write(f"# {key}: {value}\n")
        names = [f"{n}[{u}]" for n, u in self.columns] + ["status"]
        buf.write(",".join(names) + "\n")
        width = len(self.columns)
        for row in self.rows:
            if isinstance(row, ErrorRecord):
                cells = [_fmt(v) for v in row.coords] + [""] * (width - len(row.coords))
                reason = row.reason.replace(",", ";").replace("\n", " ")
                buf.write(",".join(cells + [f"error: {reason}"]) + "\n")
            else:
                buf.write(",".join([_fmt(v) for v in row] + ["ok"]) + "\n")
        return buf.getvalue()


def _fmt(v) -> str:
    return f"{float(v):.11e}"


def _header(cfg: RunConfig, command: str, extra=None) -> dict:
    h = {
        "tool": f"magsky {__version__}",
        "command": command,
        "config_sha256": cfg.config_hash(),
        "constants": "; ".join(f"{k}={v!r} {u}" for k, (v, u) in CONSTANTS.items()),
        "profile_ansatz": PROFILE_ANSATZ,
        "n_max": cfg.n_max,
        "rel_tol": repr(cfg.rel_tol),
        "abs_tol": repr(cfg.abs_tol),
    }
    if extra:
        h.update(extra)
    return h


def _grid(cfg: RunConfig):
    """Sweep points in row-major order of the configured axes."""
    axes = list(cfg.sweep)
    if not axes:
        return [], [{}]
    values = [ax.values() for ax in axes]
    points = [dict(zip((ax.name for ax in axes), combo)) for combo in itertools.product(*values)]
    return axes, points


def _pool_map(fn, items, threads: int):
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        # map preserves input order regardless of completion order
        return list(ex.map(fn, items))


def _safe(fn, coords):
    """Run ``fn``; turn failures and non-finite output into error records."""
    try:
        rows = fn()
    except Exception as exc:  # one bad point must not abort the sweep
        return [ErrorRecord(tuple(coords), f"{type(exc).__name__}: {exc}")]
    out = []
    for row in rows:
        if not all(math.isfinite(float(v)) for v in row):
            return [ErrorRecord(tuple(coords), "non-finite value in output")]
        out.append(tuple(float(v) for v in row))
    return out


# --- coupling map -------------------------------------------------------------

DEVICE_AXES = ("R_K", "d_K")


def _coupling_point(args):
    device, point = args

    def compute():
        dev = device_from_dict({**device, **point})
        c = coupling_strength(dev)
        coop = cooperativity(c.lambda_KS, TWO_PI * device["gamma_K_Hz"], TWO_PI * device["gamma_Sky_Hz"])
        return [[
            dev.R_K, dev.d_K, c.lambda_KS / TWO_PI, c.lambda_KS_xy / TWO_PI, coop, c.F_implied, c.error_estimate,
        ]]

    dev0 = {**device, **point}
    return _safe(compute, (dev0["R_K"], dev0["d_K"]))


def run_coupling_map(cfg: RunConfig, threads: int = 1) -> Report:
    """Coupling strength and cooperativity on an ``R_K`` x ``d_K`` grid."""
    if cfg.device is None:
        raise ConfigError("coupling-map needs a 'device' block")
    for ax in cfg.sweep:
        if ax.name not in DEVICE_AXES:
            raise ConfigError(f"coupling-map sweeps only R_K and d_K, not {ax.name!r}")
    _, points = _grid(cfg)
    results = _pool_map(_coupling_point, [(cfg.device, p) for p in points], threads)
    columns = [
        ("R_K", "m"), ("d_K", "m"), ("lambda_KS_over_2pi", "Hz"), ("lambda_KS_xy_over_2pi", "Hz"),
        ("cooperativity", "1"), ("F_implied", "1"), ("quad_rel_err", "1"),
    ]
    extra = {
        "gamma_K_over_2pi": f"{cfg.device['gamma_K_Hz']!r} Hz",
        "gamma_Sky_over_2pi": f"{cfg.device['gamma_Sky_Hz']!r} Hz",
    }
    report = Report("coupling-map", columns, header=_header(cfg, "coupling-map", extra), n_coords=2)
    for rows in results:
        report.rows.extend(rows)
    return report


# --- dynamics -----------------------------------------------------------------

def _partner(name: str) -> str:
    if name.endswith("-full"):
        return name[: -len("-full")] + "-reduced"
    if name.endswith("-reduced"):
        return name[: -len("-reduced")] + "-full"
    raise ConfigError(f"scenario {name!r} has no full/reduced partner")


def _lambda_bar_si(device: dict) -> float:
    dev = device_from_dict(device)
    lam = TWO_PI * device["lambda_KS_Hz"] if "lambda_KS_Hz" in device else coupling_strength(dev).lambda_KS
    if "A0_Hz" in device and "B0_Hz" in device:
        spec = qubit_spectrum(TWO_PI * device["A0_Hz"], TWO_PI * device["B0_Hz"])
        return spec.lambda_bar(lam)
    return lam / 2.0


def _trajectory(cfg: RunConfig, scenario: str, model_kw: dict, squeeze: dict, n_max: int):
    params = params_type(scenario)(**model_kw)
    sq = None
    if scenario == "jc-squeezed":
        dt = squeeze["Delta_tilde_K"]
        sq = squeezing_transform(params.lambda_bar, squeeze["K_d_ratio"] * dt, dt, squeeze["Delta_q"])
    model = build_model(scenario, params, n_max, sq)
    rho0 = initial_state(model.space, cfg.initial_state)
    times = np.linspace(0.0, cfg.t_max, cfg.n_points)
    traj = evolve(model, rho0, times, cfg.rel_tol, cfg.abs_tol)
    series = [expectation(traj, op) for op in observables(scenario, model.space).values()]
    return traj, series


def _dynamics_point(args):
    cfg, point, check_nmax = args
    model_kw = {**cfg.model, **{k: v for k, v in point.items() if k not in ("K_d_ratio",) and k not in (cfg.device or {})}}
    squeeze = {**cfg.squeeze, **({"K_d_ratio": point["K_d_ratio"]} if "K_d_ratio" in point else {})}
    device = {**cfg.device, **{k: v for k, v in point.items() if k in cfg.device}} if cfg.device else None
    coords = tuple(point.values())

    def compute():
        traj, series = _trajectory(cfg, cfg.scenario, model_kw, squeeze, cfg.n_max)
        cols = [traj.times]
        if device is not None:
            cols.append(traj.times / _lambda_bar_si(device))
        cols += series + [traj.trace_errors, traj.min_eigenvalues]
        if cfg.compare_reduced:
            other = _partner(cfg.scenario)
            t2, s2 = _trajectory(cfg, other, model_kw, squeeze, cfg.n_max)
            cols += s2 + [t2.trace_errors, t2.min_eigenvalues]
        if check_nmax and SCENARIOS[cfg.scenario].full:
            _, s3 = _trajectory(cfg, cfg.scenario, model_kw, squeeze, cfg.n_max + 5)
            drift = max(float(np.max(np.abs(a - b))) for a, b in zip(series, s3))
            if drift > TRUNCATION_TOL:
                raise RuntimeError(f"truncation not converged: N_max+5 moves observables by {drift:.3e}")
        table = np.column_stack(cols)
        return [tuple(coords) + tuple(row) for row in table]

    return _safe(compute, coords)


def _dynamics_columns(cfg: RunConfig) -> list:
    cols = [(ax.name, _axis_unit(ax.name)) for ax in cfg.sweep]
    cols.append(("t", "1/lambda_bar"))
    if cfg.device is not None:
        cols.append(("t", "s"))
    suffix = "_full" if cfg.compare_reduced and cfg.scenario.endswith("-full") else ""
    if cfg.compare_reduced and cfg.scenario.endswith("-reduced"):
        suffix = "_reduced"
    names = [c for c, _, _ in SCENARIOS[cfg.scenario].observables]
    cols += [(n + suffix, "1") for n in names]
    cols += [("trace_dev" + suffix, "1"), ("min_eig" + suffix, "1")]
    if cfg.compare_reduced:
        other = _partner(cfg.scenario)
        suf2 = "_reduced" if other.endswith("-reduced") else "_full"
        cols += [(c + suf2, "1") for c, _, _ in SCENARIOS[other].observables]
        cols += [("trace_dev" + suf2, "1"), ("min_eig" + suf2, "1")]
    return cols


_AXIS_UNITS = {"R_K": "m", "d_K": "m", "M_s": "A/m", "B_K": "T", "a": "m", "R_s": "m", "w": "m", "T": "K"}


def _axis_unit(name: str) -> str:
    if name.endswith("_Hz"):
        return "Hz"
    return _AXIS_UNITS.get(name, "lambda_bar" if name not in ("S_bar", "K_d_ratio", "eta", "phi_e") else "1")


def run_dynamics(cfg: RunConfig, threads: int = 1, check_nmax: bool = False) -> Report:
    """Population dynamics of one scenario, optionally overlaid with its partner model."""
    if cfg.scenario is None:
        raise ConfigError("dynamics needs a 'scenario'")
    if cfg.compare_reduced:
        _partner(cfg.scenario)
    _, points = _grid(cfg)
    results = _pool_map(_dynamics_point, [(cfg, p, check_nmax) for p in points], threads)
    extra = {"scenario": cfg.scenario, "initial_state": "".join(cfg.initial_state)}
    if cfg.device is not None:
        extra["lambda_bar_over_2pi"] = f"{_lambda_bar_si(cfg.device) / TWO_PI!r} Hz"
    report = Report("dynamics", _dynamics_columns(cfg), header=_header(cfg, "dynamics", extra), n_coords=len(cfg.sweep))
    for rows in results:
        report.rows.extend(rows)
    return report


# --- squeezing ----------------------------------------------------------------

def _squeeze_point(args):
    cfg, point = args
    device = {**cfg.device, **{k: v for k, v in point.items() if k != "K_d_ratio"}} if cfg.device else None
    coords = tuple(point.values())
    ratios = [point["K_d_ratio"]] if "K_d_ratio" in point else cfg.squeeze.get("ratios") or [cfg.squeeze["K_d_ratio"]]

    def compute():
        rows = []
        if device is not None:
            dev = device_from_dict(device)
            lam_ks = TWO_PI * device["lambda_KS_Hz"] if "lambda_KS_Hz" in device else coupling_strength(dev).lambda_KS
            lam_bar = _lambda_bar_si(device)
            gk, gs = TWO_PI * device["gamma_K_Hz"], TWO_PI * device["gamma_Sky_Hz"]
        else:
            lam_ks, lam_bar = 2.0, 1.0
        dt, dq = cfg.squeeze["Delta_tilde_K"], cfg.squeeze["Delta_q"]
        for ratio in ratios:
            sq = squeezing_transform(1.0, ratio * dt, dt, dq)
            row = [ratio, sq.r, sq.cosh_r, sq.sinh_r, sq.delta_eff, float(sq.valid_rwa)]
            if device is not None:
                lam_eff = lam_bar * sq.cosh_r
                row += [lam_ks / TWO_PI, lam_bar / TWO_PI, lam_eff / TWO_PI, cooperativity(lam_eff, gk, gs)]
            else:
                row += [sq.lambda_eff]
            rows.append(tuple(coords) + tuple(row))
        return rows

    return _safe(compute, coords)


def run_squeeze_sweep(cfg: RunConfig, threads: int = 1) -> Report:
    """Squeezing parameter and enhanced coupling over drive ratios ``K_d / Delta_tilde_K``."""
    for ax in cfg.sweep:
        if ax.name != "K_d_ratio" and (cfg.device is None or ax.name not in cfg.device):
            raise ConfigError(f"squeeze-sweep cannot sweep {ax.name!r}")
    _, points = _grid(cfg)
    results = _pool_map(_squeeze_point, [(cfg, p) for p in points], threads)
    cols = [(ax.name, _axis_unit(ax.name)) for ax in cfg.sweep if ax.name != "K_d_ratio"]
    cols += [("K_d_ratio", "1"), ("r", "1"), ("cosh_r", "1"), ("sinh_r", "1"), ("delta_eff", "lambda_bar"), ("valid_rwa", "1")]
    if cfg.device is not None:
        cols += [("lambda_KS_over_2pi", "Hz"), ("lambda_bar_over_2pi", "Hz"), ("lambda_eff_over_2pi", "Hz"), ("cooperativity_eff", "1")]
    else:
        cols += [("lambda_eff", "lambda_bar")]
    extra = {
        "Delta_tilde_K": f"{cfg.squeeze['Delta_tilde_K']!r} lambda_bar",
        "Delta_q": f"{cfg.squeeze['Delta_q']!r} lambda_bar",
    }
    report = Report("squeeze-sweep", cols, header=_header(cfg, "squeeze-sweep", extra), n_coords=len(cfg.sweep))
    for rows in results:
        report.rows.extend(rows)
    # K_d_ratio swept as an axis is already a data column; drop the duplicate coordinate
    if any(ax.name == "K_d_ratio" for ax in cfg.sweep):
        k = [ax.name for ax in cfg.sweep].index("K_d_ratio")
        report.rows = [
            r if isinstance(r, ErrorRecord) else r[:k] + r[k + 1:] for r in report.rows
        ]
    return report


# --- feasibility --------------------------------------------------------------

def _q(value, unit, uses=()):
    return {"value": float(value), "unit": unit, "constants": list(uses)}


def run_feasibility_report(cfg: RunConfig) -> dict:
    """Headline device numbers with units and the constants each depends on."""
    if cfg.device is None:
        raise ConfigError("feasibility needs a 'device' block")
    d = cfg.device
    dev = device_from_dict(d)
    omega_K = kittel_frequency(dev.B_K, dev.gamma_e)
    c = coupling_strength(dev)
    lam = TWO_PI * d["lambda_KS_Hz"] if "lambda_KS_Hz" in d else c.lambda_KS
    gk, gs = TWO_PI * d["gamma_K_Hz"], TWO_PI * d["gamma_Sky_Hz"]
    coop = cooperativity(lam, gk, gs)
    log.warning("cooperativity %s", COOPERATIVITY_NOTE)
    cpl = ("mu0", "mu_B", "g_factor", "gamma_e", "hbar")
    report = {
        "tool": f"magsky {__version__}",
        "config_sha256": cfg.config_hash(),
        "constants": constants_table(),
        "profile_ansatz": PROFILE_ANSATZ,
        "device": {
            "R_K": _q(dev.R_K, "m"), "d_K": _q(dev.d_K, "m"), "h_K": _q(dev.h_K, "m"),
            "M_s": _q(dev.M_s, "A/m"), "B_K": _q(dev.B_K, "T"), "a": _q(dev.a, "m"),
            "S_bar": _q(dev.S_bar, "1"), "R_s": _q(dev.profile.R_s, "m"), "w": _q(dev.profile.w, "m"),
            "T": _q(d["T"], "K"),
            "gamma_K_over_2pi": _q(d["gamma_K_Hz"], "Hz"), "gamma_Sky_over_2pi": _q(d["gamma_Sky_Hz"], "Hz"),
        },
        "omega_K": _q(omega_K, "rad/s", ("gamma_e",)),
        "omega_K_over_2pi": _q(omega_K / TWO_PI, "Hz", ("gamma_e",)),
        "lambda_KS": _q(lam, "rad/s", cpl),
        "lambda_KS_over_2pi": _q(lam / TWO_PI, "Hz", cpl),
        "lambda_KS_source": "config override" if "lambda_KS_Hz" in d else "quadrature",
        "lambda_KS_xy_over_2pi": _q(c.lambda_KS_xy / TWO_PI, "Hz", cpl),
        "F_implied": _q(c.F_implied, "1", cpl),
        "cooperativity": {**_q(coop, "1"), "note": COOPERATIVITY_NOTE},
        "n_bar": _q(thermal_occupancy(omega_K, d["T"]), "1", ("hbar", "k_B", "gamma_e")),
    }
    sin2 = 1.0
    if "A0_Hz" in d and "B0_Hz" in d:
        spec = qubit_spectrum(TWO_PI * d["A0_Hz"], TWO_PI * d["B0_Hz"])
        sin2 = spec.sin_2theta
        report["omega_q"] = _q(spec.omega_q, "rad/s")
        report["omega_q_over_2pi"] = _q(spec.omega_q / TWO_PI, "Hz")
        report["theta"] = _q(spec.theta, "rad")
    lam_bar = lam * sin2 / 2.0
    report["lambda_bar_over_2pi"] = _q(lam_bar / TWO_PI, "Hz", cpl)
    ratios = cfg.squeeze.get("ratios") or [cfg.squeeze["K_d_ratio"]]
    dt, dq = cfg.squeeze["Delta_tilde_K"], cfg.squeeze["Delta_q"]
    table = []
    for ratio in ratios:
        sq = squeezing_transform(1.0, ratio * dt, dt, dq)
        table.append({
            "K_d_ratio": _q(ratio, "1"),
            "r": _q(sq.r, "1"),
            "cosh_r": _q(sq.cosh_r, "1"),
            "lambda_eff_over_2pi": _q(lam_bar * sq.cosh_r / TWO_PI, "Hz", cpl),
            "delta_eff": _q(sq.delta_eff, "lambda_bar"),
            "valid_rwa": bool(sq.valid_rwa),
        })
    report["squeezing"] = table
    return report
