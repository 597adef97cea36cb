"""Device geometry and materials mapped to Hamiltonian parameters.

All inputs are SI (m, T, A/m, K); frequencies and couplings are returned as
angular frequencies in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .constants import G_FACTOR, GAMMA_E, HBAR, K_B, MU0, MU_B

PROFILE_ANSATZ = "360-domain-wall"
RADIAL_CUTOFF = 20.0  # in units of the skyrmion radius
XY_SCALE = 1.0  # matrix element of cos(helicity) in the qubit subspace


class QuadratureError(RuntimeError):
    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class GeometryError(ValueError):
    pass


class SqueezingInstabilityError(ValueError):
    pass


@dataclass(frozen=True)
class SkyrmionProfile:
    """Radial texture ``Theta(rho) = 2 atan2(sinh(R_s/w), sinh(rho/w))``.

    ``Theta(0) = pi`` (core spin down), ``Theta(R_s) = pi/2``, and it decays
    to 0 far from the core. ``w`` defaults to ``R_s / 2``.
    """

    R_s: float = 6e-9
    w: float | None = None
    ansatz: str = PROFILE_ANSATZ

    def __post_init__(self):
        if self.w is None:
            object.__setattr__(self, "w", self.R_s / 2.0)
        if self.R_s <= 0 or self.w <= 0:
            raise GeometryError("skyrmion radius and wall width must be positive")
        if self.ansatz != PROFILE_ANSATZ:
            raise ValueError(f"unknown profile ansatz {self.ansatz!r}")

    def theta(self, rho):
        rho = np.asarray(rho, dtype=float)
        # sinh overflows past ~710; the angle is 0 to double precision long before
        x = np.minimum(rho / self.w, 700.0)
        return 2.0 * np.arctan2(np.sinh(self.R_s / self.w), np.sinh(x))


def skyrmion_theta(profile: SkyrmionProfile, rho):
    if np.any(np.asarray(rho) < 0):
        raise ValueError("rho must be >= 0")
    return profile.theta(rho)


@dataclass(frozen=True)
class DeviceParams:
    R_K: float = 100e-9
    d_K: float = 10e-9
    M_s: float = 587e3
    B_K: float = 0.5
    gamma_e: float = GAMMA_E
    g_factor: float = G_FACTOR
    a: float = 0.5e-9
    S_bar: float = 20.0
    profile: SkyrmionProfile = field(default_factory=SkyrmionProfile)

    def __post_init__(self):
        for name in ("R_K", "d_K", "M_s", "B_K", "a", "gamma_e"):
            if not getattr(self, name) > 0:
                raise GeometryError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.S_bar >= 0:
            raise GeometryError(f"S_bar must be non-negative, got {self.S_bar}")

    @property
    def h_K(self) -> float:
        return self.R_K + self.d_K

    @property
    def V_K(self) -> float:
        return 4.0 / 3.0 * math.pi * self.R_K**3


def kittel_frequency(B_K: float, gamma_e: float = GAMMA_E) -> float:
    if not B_K > 0:
        raise ValueError(f"bias field must be positive, got {B_K}")
    return gamma_e * B_K


def zero_point_magnetization(M_s: float, R_K: float, gamma_e: float = GAMMA_E, hbar: float = HBAR) -> float:
    """Single-magnon magnetization amplitude ``sqrt(hbar gamma_e M_s / 2 V_K)``."""
    if not (M_s > 0 and R_K > 0 and gamma_e > 0):
        raise ValueError("M_s, R_K and gamma_e must be positive")
    V = 4.0 / 3.0 * math.pi * R_K**3
    return math.sqrt(hbar * gamma_e * M_s / (2.0 * V))


def dipole_field(mu, r):
    """Point-dipole field at displacement(s) ``r`` (shape ``(..., 3)``).

    ``mu`` may be complex, which lets mode functions such as ``e_z + i e_x``
    pass straight through.
    """
    mu = np.asarray(mu)
    r = np.asarray(r, dtype=float)
    rn = np.linalg.norm(r, axis=-1)
    if np.any(rn == 0):
        raise ValueError("dipole field undefined at zero displacement")
    mu_dot_r = np.tensordot(r, mu, axes=([-1], [0]))
    rn = rn[..., None]
    return MU0 / (4.0 * math.pi) * (3.0 * r * mu_dot_r[..., None] / rn**5 - mu / rn**3)


@dataclass(frozen=True)
class CouplingResult:
    lambda_KS: float  # rad/s
    lambda_KS_xy: float  # rad/s
    F_implied: float
    Lambda: float  # texture area over a^2
    error_estimate: float  # relative

    def __iter__(self):
        yield self.lambda_KS
        yield self.lambda_KS_xy


def _plane_fields(moment, h):
    """Field of a z-oriented dipole on the plane a distance ``h`` below it."""
    c = MU0 * moment / (4.0 * math.pi)

    def bz(rho):
        return c * (2.0 * h * h - rho * rho) / (h * h + rho * rho) ** 2.5

    def brho(rho):
        return -3.0 * c * h * rho / (h * h + rho * rho) ** 2.5

    return bz, brho


def _quad(f, a, b, rtol, points=None, atol=0.0):
    val, err = integrate.quad(f, a, b, epsabs=atol, epsrel=rtol, limit=400, points=points)
    return val, err


def coupling_strength(
    dev: DeviceParams,
    method: str = "adaptive",
    rtol: float = 1e-9,
    n_radial: int = 200,
    n_angular: int = 32,
) -> CouplingResult:
    """Skyrmion-magnon couplings from a texture-weighted zero-point field.

    The longitudinal coupling is the ``(s + s^dag)`` quadrature of the
    sphere's zero-point field (moment ``M_K V_K`` along z) projected on z,
    averaged over the skyrmion plane with weight ``1 - cos Theta`` and scaled
    by ``g mu_B S_bar / hbar``. The transverse coupling uses the radial
    in-plane field with weight ``sin Theta``.

    ``method="adaptive"`` uses the azimuthal symmetry and a radial
    Gauss-Kronrod quadrature to ``20 R_s`` plus a bounded tail.
    ``method="grid"`` is a fixed Gauss-Legendre product rule on the full
    plane (``n_radial`` x ``n_angular``) and evaluates :func:`dipole_field`
    directly.
    """
    prof = dev.profile
    h = dev.h_K
    if h <= prof.R_s:
        raise GeometryError(f"center distance {h:.3e} m must exceed skyrmion radius {prof.R_s:.3e} m")
    M_K = zero_point_magnetization(dev.M_s, dev.R_K, dev.gamma_e)
    moment = M_K * dev.V_K
    weight_z = lambda rho: 1.0 - np.cos(prof.theta(rho))  # noqa: E731
    weight_xy = lambda rho: np.sin(prof.theta(rho))  # noqa: E731
    cut = RADIAL_CUTOFF * prof.R_s

    if method == "adaptive":
        bz, brho = _plane_fields(moment, h)
        pts = [prof.R_s, min(h, cut)]
        area, e0 = _quad(lambda p: 2 * math.pi * p * weight_z(p), 0.0, cut, rtol, pts)
        num_z, e1 = _quad(lambda p: 2 * math.pi * p * weight_z(p) * bz(p), 0.0, cut, rtol, pts)
        num_xy, e2 = _quad(lambda p: 2 * math.pi * p * weight_xy(p) * brho(p), 0.0, cut, rtol, pts)
        # tails beyond the cutoff, bounded by the peak field on the plane
        tail_atol = 1e-15 * area
        tail_area, _ = _quad(lambda p: 2 * math.pi * p * weight_z(p), cut, np.inf, 1e-6, atol=tail_atol)
        tail_xy, _ = _quad(lambda p: 2 * math.pi * p * weight_xy(p), cut, np.inf, 1e-6, atol=tail_atol)
        bmax = abs(bz(0.0))
        area += tail_area
        err = max(
            (e0 + tail_area) / area,
            (e1 + bmax * tail_area) / abs(num_z),
            (e2 + bmax * tail_xy) / max(abs(num_xy), 1e-300),
        )
        if err > 1e3 * rtol and err > 1e-6:
            raise QuadratureError(f"radial quadrature did not converge (rel. error ~{err:.2e})", err)
    elif method == "grid":
        xr, wr = np.polynomial.legendre.leggauss(n_radial)
        # split at R_s so the wall is well resolved
        nodes, weights = [], []
        for lo, hi in ((0.0, prof.R_s), (prof.R_s, 4 * prof.R_s), (4 * prof.R_s, cut)):
            nodes.append(0.5 * (hi - lo) * xr + 0.5 * (hi + lo))
            weights.append(0.5 * (hi - lo) * wr)
        rho = np.concatenate(nodes)
        wrho = np.concatenate(weights)
        phi = 2 * math.pi * np.arange(n_angular) / n_angular
        wphi = 2 * math.pi / n_angular
        P, F = np.meshgrid(rho, phi, indexing="ij")
        pts = np.stack([P * np.cos(F), P * np.sin(F), -h * np.ones_like(P)], axis=-1)
        B = dipole_field(np.array([0.0, 0.0, moment]), pts)
        dA = (wrho * rho)[:, None] * wphi
        area = float(np.sum(weight_z(P) * dA))
        num_z = float(np.sum(B[..., 2] * weight_z(P) * dA))
        b_rad = B[..., 0] * np.cos(F) + B[..., 1] * np.sin(F)
        num_xy = float(np.sum(b_rad * weight_xy(P) * dA))
        err = float("nan")
    else:
        raise ValueError(f"unknown quadrature method {method!r}")

    prefactor = dev.g_factor * MU_B * dev.S_bar / HBAR
    lam = prefactor * abs(num_z) / area
    lam_xy = XY_SCALE * prefactor * abs(num_xy) / area
    Lambda = area / dev.a**2
    F = 3 * dev.a**3 * Lambda * HBAR * lam / (
        2 * math.pi * dev.g_factor * MU_B * dev.S_bar * MU0 * dev.R_K**3 * M_K
    ) if dev.S_bar > 0 else 0.0
    return CouplingResult(lam, lam_xy, F, Lambda, err)


@dataclass(frozen=True)
class QubitSpectrum:
    A0: float
    B0: float
    theta: float
    omega_q: float
    sin_2theta: float
    cos_2theta: float

    def lambda_bar(self, lambda_KS: float) -> float:
        """Dressed-basis exchange coupling ``lambda_KS sin(2 theta) / 2``."""
        return lambda_KS * self.sin_2theta / 2.0


def qubit_spectrum(A0: float, B0: float) -> QubitSpectrum:
    if A0 == 0 and B0 == 0:
        raise ValueError("A0 = B0 = 0 is degenerate; mixing angle undefined")
    two_theta = math.atan2(B0, A0)
    omega_q = math.hypot(A0, B0)
    return QubitSpectrum(A0, B0, two_theta / 2.0, omega_q, B0 / omega_q, A0 / omega_q)


@dataclass(frozen=True)
class SqueezeResult:
    r: float
    lambda_eff: float
    delta_eff: float
    valid_rwa: bool
    lambda_bar: float
    cosh_r: float
    sinh_r: float


def squeezing_transform(
    lambda_bar: float,
    K_d: float,
    Delta_tilde_K: float,
    Delta_q: float,
    rwa_ratio: float = 10.0,
) -> SqueezeResult:
    """Bogoliubov frame of the Kerr-driven magnon, ``tanh 2r = K_d / Delta_tilde_K``."""
    if Delta_tilde_K == 0 or abs(K_d) >= abs(Delta_tilde_K):
        raise SqueezingInstabilityError(
            f"|K_d| = {abs(K_d):.4g} must be below |Delta_tilde_K| = {abs(Delta_tilde_K):.4g}"
        )
    r = 0.5 * math.atanh(K_d / Delta_tilde_K)
    ch, sh = math.cosh(r), math.sinh(r)
    delta_eff = Delta_tilde_K / math.cosh(2 * r)
    bound = rwa_ratio * abs(lambda_bar * sh)
    valid = abs(Delta_q) >= bound and abs(delta_eff) >= bound
    return SqueezeResult(r, lambda_bar * ch, delta_eff, valid, lambda_bar, ch, sh)


def cooperativity(lam: float, gamma_K: float, gamma_Sky: float) -> float:
    """``4 lam^2 / (gamma_K gamma_Sky)``; all three in the same units."""
    if not (gamma_K > 0 and gamma_Sky > 0):
        raise ValueError("dissipation rates must be positive")
    return 4.0 * lam**2 / (gamma_K * gamma_Sky)


def thermal_occupancy(omega: float, T: float) -> float:
    """Bose-Einstein occupancy of a mode at angular frequency ``omega``."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    if T < 0:
        raise ValueError("temperature must be >= 0")
    if T == 0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega / (K_B * T))
