"""The magnon-skyrmion scenario models, full and magnon-eliminated.

Scenario parameters are dimensionless, in units of the exchange coupling
``lambda_bar``; time is measured in ``1 / lambda_bar``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .device import SqueezeResult
from .dynamics import LindbladModel, compare_models, evolve
from .operators import BOSON, QUBIT, HilbertSpace, basis_state, boson_ops, qubit_ops

ADIABATIC_RATIO = 5.0
DEFAULT_N_MAX = 10
FIGURE_T_MAX = 20.0
FIGURE_POINTS = 400


@dataclass(frozen=True)
class JCParams:
    omega_q: float = 1.0
    omega_K: float = 1.0
    lambda_bar: float = 1.0
    include_counter_rotating: bool = False
    lambda_xy: float = 0.0
    theta: float = math.pi / 4

    def __post_init__(self):
        if self.lambda_bar < 0:
            raise ValueError("lambda_bar must be >= 0")


@dataclass(frozen=True)
class TwoSkyrmionParams:
    """Two skyrmion qubits sharing one damped magnon; qubit 1 is driven.

    ``W1``, ``W2`` and ``G`` are the Lamb-shift and exchange terms produced
    by eliminating the magnon. With ``carry_bare_frequencies`` the reduced
    model keeps the qubit terms ``Omega_2`` and ``Delta_q1`` of the full
    Hamiltonian in addition to ``W1`` and ``W2``.
    """

    Omega_2: float = 1.0
    Delta_q1: float = 1.0
    Delta_K1: float = 1.0
    lambda_bar: float = 1.0
    gamma_K: float = 10.0
    W1: float = 0.0
    W2: float = 0.0
    G: float = 0.0
    Gamma: float | None = None
    carry_bare_frequencies: bool = True

    def __post_init__(self):
        if not self.gamma_K > 0:
            raise ValueError("gamma_K must be positive")

    @property
    def Gamma_eff(self) -> float:
        if self.Gamma is not None:
            return self.Gamma
        lam, g = self.lambda_bar, self.gamma_K
        return g * lam**2 / (self.Delta_K1**2 + g**2 / 4.0)


@dataclass(frozen=True)
class SkyrmionSQParams:
    """Skyrmion qubit and superconducting qubit sharing one damped magnon.

    ``eta`` is the relative magnon coupling of the SQ arm,
    ``J_KT0 / (2 lambda_bar)``. ``omega_Tr`` and ``omega_ac`` are kept for
    bookkeeping; the models work in the frame where they have dropped out.
    """

    eta: float = 1.0
    phi_e: float = math.pi / 2
    G_SS: float = 1.0
    Gamma_SS: float | None = None
    lambda_bar: float = 1.0
    gamma_K: float = 10.0
    omega_Tr: float | None = None
    omega_ac: float | None = None

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if not self.gamma_K > 0:
            raise ValueError("gamma_K must be positive")

    @property
    def J_KT0(self) -> float:
        return 2.0 * self.eta * self.lambda_bar

    @property
    def Gamma_eff(self) -> float:
        if self.Gamma_SS is not None:
            return self.Gamma_SS
        return 4.0 * self.lambda_bar**2 / self.gamma_K

    @classmethod
    def isolated(cls, **kw) -> "SkyrmionSQParams":
        """Parameters meeting ``phi_e = pi/2``, ``G_SS = -eta Gamma_SS / 2``."""
        kw.pop("G_SS", None)
        kw["phi_e"] = math.pi / 2
        base = cls(**kw)
        return cls(**{**_asdict(base), "G_SS": -base.eta * base.Gamma_eff / 2.0})


def _asdict(p):
    return {f.name: getattr(p, f.name) for f in fields(p)}


def _qb_space(n_max):
    return HilbertSpace.build(QUBIT, (BOSON, n_max))


def _qqb_space(n_max):
    return HilbertSpace.build(QUBIT, QUBIT, (BOSON, n_max))


def build_jc(p: JCParams, n_max: int = DEFAULT_N_MAX) -> LindbladModel:
    if n_max < 1:
        raise ValueError("N_max must be >= 1")
    space = _qb_space(n_max)
    q = qubit_ops(space, 0)
    b = boson_ops(space, 1)
    H = 0.5 * p.omega_q * q["sz"] + p.omega_K * b["n"] + p.lambda_bar * (
        b["a"] @ q["sp"] + b["adag"] @ q["sm"]
    )
    if p.include_counter_rotating:
        s2, c2 = math.sin(2 * p.theta), math.cos(2 * p.theta)
        lam_ks = 2.0 * p.lambda_bar / s2
        x = b["a"] + b["adag"]
        # dressed-basis form of the longitudinal + transverse interaction,
        # minus the exchange part already included above
        H = H + p.lambda_bar * (b["a"] @ q["sm"] + b["adag"] @ q["sp"])
        H = H + 0.5 * (lam_ks * c2 - p.lambda_xy * s2) * (x @ q["sz"])
        H = H + 0.5 * p.lambda_xy * c2 * (x @ q["sx"])
    return LindbladModel(space, H, name="jc", info={"params": asdict(p), "n_max": n_max})


def build_squeezed_jc(p: JCParams, sq: SqueezeResult, n_max: int = DEFAULT_N_MAX) -> LindbladModel:
    """JC model in the Bogoliubov (squeezed-magnon) frame.

    ``p.omega_q`` is read as the drive detuning ``Delta_q``; the magnon
    frequency and coupling come from ``sq``.
    """
    space = _qb_space(n_max)
    q = qubit_ops(space, 0)
    b = boson_ops(space, 1)
    H = 0.5 * p.omega_q * q["sz"] + sq.delta_eff * b["n"] + sq.lambda_eff * (
        b["a"] @ q["sp"] + b["adag"] @ q["sm"]
    )
    info = {"params": asdict(p), "squeeze": asdict(sq), "n_max": n_max, "warnings": []}
    if not sq.valid_rwa:
        info["warnings"].append("counter-rotating term lambda_bar*sinh(r) not negligible")
    return LindbladModel(space, H, name="jc-squeezed", info=info)


def squeezed_magnon_gap(Delta_tilde_K: float, K_d: float, n_max: int = 30) -> float:
    """Excitation gap of ``Delta a^dag a - K_d/2 (a^dag^2 + a^2)`` by direct diagonalization."""
    a = np.diag(np.sqrt(np.arange(1, n_max + 1)), 1)
    H = Delta_tilde_K * (a.T @ a) - 0.5 * K_d * (a.T @ a.T + a @ a)
    ev = np.linalg.eigvalsh(H)
    return float(ev[1] - ev[0])


def _adiabatic_warnings(gamma_K, *couplings):
    c = max(abs(x) for x in couplings)
    if c > 0 and gamma_K / c < ADIABATIC_RATIO:
        return [f"gamma_K / coupling = {gamma_K / c:.3g} < {ADIABATIC_RATIO}; elimination unreliable"]
    return []


def build_two_skyrmion_full(p: TwoSkyrmionParams, n_max: int = DEFAULT_N_MAX) -> LindbladModel:
    if n_max < 2:
        raise ValueError("N_max must be >= 2")
    space = _qqb_space(n_max)
    q1, q2, b = qubit_ops(space, 0), qubit_ops(space, 1), boson_ops(space, 2)
    lam = p.lambda_bar
    H = (
        0.5 * p.Omega_2 * q1["sz"]
        + 0.5 * p.Delta_q1 * q2["sz"]
        + p.Delta_K1 * b["n"]
        + 0.5 * lam * ((b["a"] + b["adag"]) @ q1["sx"])
        + lam * (b["a"] @ q2["sp"] + b["adag"] @ q2["sm"])
    )
    return LindbladModel(
        space, H, ((p.gamma_K, b["a"]),), name="two-skyrmion-full",
        info={"params": asdict(p), "n_max": n_max},
    )


def reduce_two_skyrmion(p: TwoSkyrmionParams) -> LindbladModel:
    space = HilbertSpace.build(QUBIT, QUBIT)
    q1, q2 = qubit_ops(space, 0), qubit_ops(space, 1)
    w1, w2 = p.W1, p.W2
    if p.carry_bare_frequencies:
        w1, w2 = w1 + p.Omega_2, w2 + p.Delta_q1
    H = 0.5 * w1 * q1["sz"] + 0.5 * w2 * q2["sz"] - p.G * (q1["sx"] @ q2["sx"])
    sigma = 0.5 * q1["sx"] + q2["sm"]
    info = {
        "params": asdict(p),
        "Gamma": p.Gamma_eff,
        "warnings": _adiabatic_warnings(p.gamma_K, p.lambda_bar),
    }
    return LindbladModel(space, H, ((p.Gamma_eff, sigma),), name="two-skyrmion-reduced", info=info)


def _collective_lowering(q_sky, q_sq, p: SkyrmionSQParams):
    return q_sky["sm"] + p.eta * np.exp(1j * p.phi_e) * q_sq["sm"]


def _sq_exchange(q_sky, q_sq, p: SkyrmionSQParams):
    return p.G_SS * (q_sky["sp"] @ q_sq["sm"] + q_sky["sm"] @ q_sq["sp"])


def build_skyrmion_sq_full(p: SkyrmionSQParams, n_max: int = DEFAULT_N_MAX) -> LindbladModel:
    """Interaction-picture model: skyrmion (factor 0), SQ (1), magnon (2)."""
    if n_max < 2:
        raise ValueError("N_max must be >= 2")
    space = _qqb_space(n_max)
    qs, qt, b = qubit_ops(space, 0), qubit_ops(space, 1), boson_ops(space, 2)
    Lm = _collective_lowering(qs, qt, p)
    H = p.lambda_bar * (b["a"] @ Lm.dag() + b["adag"] @ Lm) + _sq_exchange(qs, qt, p)
    return LindbladModel(
        space, H, ((p.gamma_K, b["a"]),), name="sky-sq-full",
        info={"params": asdict(p), "n_max": n_max},
    )


def reduce_skyrmion_sq(p: SkyrmionSQParams) -> LindbladModel:
    space = HilbertSpace.build(QUBIT, QUBIT)
    qs, qt = qubit_ops(space, 0), qubit_ops(space, 1)
    Lm = _collective_lowering(qs, qt, p)
    H = _sq_exchange(qs, qt, p)
    info = {
        "params": asdict(p),
        "Gamma_SS": p.Gamma_eff,
        "warnings": _adiabatic_warnings(p.gamma_K, p.lambda_bar, p.J_KT0),
    }
    return LindbladModel(space, H, ((p.Gamma_eff, Lm),), name="sky-sq-reduced", info=info)


def isolation_condition(p: SkyrmionSQParams) -> tuple[bool, float]:
    """Residual SQ-to-skyrmion coupling ``|i G_SS + Gamma_SS eta e^{i phi_e} / 2|``."""
    gam = p.Gamma_eff
    residual = abs(1j * p.G_SS + 0.5 * gam * p.eta * np.exp(1j * p.phi_e))
    return residual < 1e-12 * gam, float(residual)


# --- registry -----------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    name: str
    params_type: type
    full: bool
    observables: tuple[tuple[str, int, str], ...]  # (column, factor, operator)
    default_initial: tuple = ()
    squeezed: bool = False


SCENARIOS = {
    "jc": Scenario("jc", JCParams, True, (("P_qubit", 0, "sp_sm"), ("n_magnon", 1, "n")), ("e", 0)),
    "jc-squeezed": Scenario(
        "jc-squeezed", JCParams, True, (("P_qubit", 0, "sp_sm"), ("n_magnon", 1, "n")), ("e", 0), squeezed=True
    ),
    "two-skyrmion-full": Scenario(
        "two-skyrmion-full", TwoSkyrmionParams, True,
        (("P_S1", 0, "sp_sm"), ("P_S2", 1, "sp_sm"), ("n_magnon", 2, "n")), ("e", "g", 0),
    ),
    "two-skyrmion-reduced": Scenario(
        "two-skyrmion-reduced", TwoSkyrmionParams, False, (("P_S1", 0, "sp_sm"), ("P_S2", 1, "sp_sm")), ("e", "g"),
    ),
    "sky-sq-full": Scenario(
        "sky-sq-full", SkyrmionSQParams, True,
        (("P_sky", 0, "sp_sm"), ("P_SQ", 1, "sp_sm"), ("n_magnon", 2, "n")), ("e", "g", 0),
    ),
    "sky-sq-reduced": Scenario(
        "sky-sq-reduced", SkyrmionSQParams, False, (("P_sky", 0, "sp_sm"), ("P_SQ", 1, "sp_sm")), ("e", "g"),
    ),
}

# initial excitations of the figure presets, qubits only; the magnon starts in vacuum
INITIAL_STATES = {
    "fig3a": ("e", "g"),
    "fig3b": ("g", "e"),
    "fig4a": ("e", "g"),
    "fig4b": ("g", "e"),
    "excited-vacuum": ("e",),
}


def build_model(name: str, params, n_max: int = DEFAULT_N_MAX, squeeze: SqueezeResult | None = None):
    if name == "jc":
        return build_jc(params, n_max)
    if name == "jc-squeezed":
        if squeeze is None:
            raise ValueError("jc-squeezed needs a SqueezeResult")
        return build_squeezed_jc(params, squeeze, n_max)
    if name == "two-skyrmion-full":
        return build_two_skyrmion_full(params, n_max)
    if name == "two-skyrmion-reduced":
        return reduce_two_skyrmion(params)
    if name == "sky-sq-full":
        return build_skyrmion_sq_full(params, n_max)
    if name == "sky-sq-reduced":
        return reduce_skyrmion_sq(params)
    raise KeyError(f"unknown scenario {name!r}")


def observables(name: str, space: HilbertSpace) -> dict:
    out = {}
    for column, factor, which in SCENARIOS[name].observables:
        if which == "sp_sm":
            q = qubit_ops(space, factor)
            out[column] = q["sp"] @ q["sm"]
        else:
            out[column] = boson_ops(space, factor)[which]
    return out


def initial_state(space: HilbertSpace, qubit_labels):
    """Product state with the given qubit labels and every boson in vacuum."""
    labels = list(qubit_labels)
    full = []
    for kind in space.kinds:
        full.append(labels.pop(0) if kind == QUBIT else 0)
    if labels:
        raise ValueError(f"too many qubit labels for space {space.kinds}")
    return basis_state(space, full)


def figure_times(t_max: float = FIGURE_T_MAX, n: int = FIGURE_POINTS) -> np.ndarray:
    return np.linspace(0.0, t_max, n)


def truncation_check(name: str, params, qubit_labels, times, n_max: int = DEFAULT_N_MAX, rel_tol: float = 1e-8):
    """Largest change of any observable when N_max grows by 5."""
    m0 = build_model(name, params, n_max)
    m1 = build_model(name, params, n_max + 5)
    t0 = evolve(m0, initial_state(m0.space, qubit_labels), times, rel_tol)
    t1 = evolve(m1, initial_state(m1.space, qubit_labels), times, rel_tol)
    o0, o1 = observables(name, m0.space), observables(name, m1.space)
    return compare_models(t0, t1, {key: (o0[key], o1[key]) for key in o0})
