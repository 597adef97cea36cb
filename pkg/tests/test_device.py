import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from magsky.constants import G_FACTOR, HBAR, K_B, MU0, MU_B
from magsky.device import (
    DeviceParams,
    GeometryError,
    SkyrmionProfile,
    SqueezingInstabilityError,
    cooperativity,
    coupling_strength,
    dipole_field,
    kittel_frequency,
    qubit_spectrum,
    skyrmion_theta,
    squeezing_transform,
    thermal_occupancy,
    zero_point_magnetization,
)

TWO_PI = 2 * math.pi


def test_kittel():
    assert kittel_frequency(0.5) / TWO_PI == pytest.approx(14e9, rel=1e-15)
    assert kittel_frequency(1.0) / TWO_PI == pytest.approx(28e9, rel=1e-15)
    assert kittel_frequency(1e-12) < 1.0
    with pytest.raises(ValueError):
        kittel_frequency(0.0)


def test_zero_point_magnetization():
    assert zero_point_magnetization(587e3, 100e-9, 1.76e11, 1.0546e-34) == pytest.approx(36.1, abs=0.05)
    m1 = zero_point_magnetization(587e3, 100e-9)
    assert zero_point_magnetization(587e3, 200e-9) == pytest.approx(m1 / 2**1.5, rel=1e-14)
    assert zero_point_magnetization(587e3, 1.0) < 1e-6


def test_dipole_closed_forms():
    mu, h = 2.3e-17, 110e-9
    on_axis = dipole_field([0, 0, mu], [0, 0, -h])
    assert on_axis[2] == pytest.approx(MU0 * mu / (2 * math.pi * h**3), rel=1e-12)
    assert abs(on_axis[0]) == 0 and abs(on_axis[1]) == 0
    eq = dipole_field([0, 0, mu], [h, 0, 0])
    assert eq[2] == pytest.approx(-MU0 * mu / (4 * math.pi * h**3), rel=1e-12)
    with pytest.raises(ValueError):
        dipole_field([0, 0, mu], [0, 0, 0])


def test_dipole_complex_moment_is_linear():
    r = np.array([3e-8, -1e-8, -1.1e-7])
    mz, mx = dipole_field([0, 0, 1.0], r), dipole_field([1.0, 0, 0], r)
    assert np.allclose(dipole_field(np.array([1j, 0, 1.0]), r), mz + 1j * mx, rtol=1e-14)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(0.2, 1), st.floats(0.2, 1), st.floats(0.2, 1))
def test_dipole_divergence_free(x, y, z, mx, my, mz):
    r = np.array([x, y, z])
    if np.linalg.norm(r) < 0.3:
        r = r + 0.5
    mu = np.array([mx, my, mz])
    h = 1e-5 * np.linalg.norm(r)
    div = 0.0
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        div += (dipole_field(mu, r + e)[k] - dipole_field(mu, r - e)[k]) / (2 * h)
    scale = np.linalg.norm(dipole_field(mu, r)) / np.linalg.norm(r)
    assert abs(div) < 1e-8 * scale


def test_skyrmion_profile():
    prof = SkyrmionProfile()
    assert skyrmion_theta(prof, 0.0) == pytest.approx(math.pi, abs=1e-15)
    assert skyrmion_theta(prof, prof.R_s) == pytest.approx(math.pi / 2, abs=1e-15)
    assert skyrmion_theta(prof, 10 * prof.R_s) < 1e-3
    rho = np.linspace(0, 30 * prof.R_s, 2000)
    th = skyrmion_theta(prof, rho)
    assert np.all(np.diff(th) <= 0)
    assert th[-1] < 1e-10
    with pytest.raises(ValueError):
        skyrmion_theta(prof, -1e-9)


def _oracle_lambda(R_K, d_K, M_s=587e3, S_bar=20.0, R_s=6e-9):
    """Texture-weighted on-plane B_z from closed forms, trapezoid on a dense log grid."""
    gamma_e = TWO_PI * 28e9
    V = 4 / 3 * math.pi * R_K**3
    M_K = math.sqrt(HBAR * gamma_e * M_s / (2 * V))
    c = MU0 * M_K * V / (4 * math.pi)
    h = R_K + d_K
    rho = np.concatenate([[0.0], np.geomspace(1e-14, 200 * R_s, 400001)])
    w = R_s / 2
    theta = 2 * np.arctan2(np.sinh(R_s / w), np.sinh(np.minimum(rho / w, 700)))
    weight = (1 - np.cos(theta)) * rho
    bz = c * (2 * h**2 - rho**2) / (h**2 + rho**2) ** 2.5
    avg = np.trapezoid(bz * weight, rho) / np.trapezoid(weight, rho)
    return G_FACTOR * MU_B * S_bar * avg / HBAR


@pytest.mark.parametrize("R_K", [50e-9, 100e-9, 200e-9, 1e-6])
def test_coupling_matches_independent_oracle(R_K):
    lam = coupling_strength(DeviceParams(R_K=R_K, d_K=10e-9)).lambda_KS
    assert lam == pytest.approx(_oracle_lambda(R_K, 10e-9), rel=1e-6)


def test_coupling_anchor_values():
    lam1, _ = coupling_strength(DeviceParams(R_K=100e-9, d_K=10e-9))
    lam2, _ = coupling_strength(DeviceParams(R_K=200e-9, d_K=10e-9))
    assert 0.5 < lam1 / TWO_PI / 12.7e6 < 2
    assert 0.5 < lam2 / TWO_PI / 5.2e6 < 2


def test_coupling_grid_and_adaptive_agree_and_converge():
    dev = DeviceParams()
    adaptive = coupling_strength(dev).lambda_KS
    coarse = coupling_strength(dev, method="grid", n_radial=100, n_angular=16)
    fine = coupling_strength(dev, method="grid", n_radial=200, n_angular=32)
    assert abs(fine.lambda_KS / coarse.lambda_KS - 1) < 1e-3
    assert abs(fine.lambda_KS_xy / coarse.lambda_KS_xy - 1) < 1e-3
    assert fine.lambda_KS == pytest.approx(adaptive, rel=1e-9)


def test_coupling_scales_and_diagnostics():
    assert coupling_strength(DeviceParams(S_bar=0.0)).lambda_KS == 0.0
    c = coupling_strength(DeviceParams())
    half = coupling_strength(DeviceParams(S_bar=10.0))
    assert half.lambda_KS == pytest.approx(c.lambda_KS / 2, rel=1e-12)
    assert c.F_implied > 0 and c.Lambda > 0 and c.error_estimate < 1e-8
    assert c.lambda_KS_xy > 0


def test_coupling_weakly_profile_dependent():
    base = coupling_strength(DeviceParams()).lambda_KS
    wide = coupling_strength(DeviceParams(profile=SkyrmionProfile(w=6e-9))).lambda_KS
    assert abs(wide / base - 1) < 0.05


def test_geometry_errors():
    for kw in ({"d_K": 0.0}, {"R_K": -1e-9}, {"M_s": 0.0}, {"a": 0.0}, {"B_K": 0.0}, {"S_bar": -1.0}):
        with pytest.raises(GeometryError):
            DeviceParams(**kw)


def test_coupling_monotone_on_figure_ranges():
    R = np.geomspace(50e-9, 1e-6, 12)
    d = np.linspace(5e-9, 50e-9, 6)
    lam = np.array([[coupling_strength(DeviceParams(R_K=r, d_K=x)).lambda_KS for x in d] for r in R])
    assert np.all(np.diff(lam, axis=0) < 0)
    assert np.all(np.diff(lam, axis=1) < 0)


def test_qubit_spectrum():
    w = 2.0
    s = qubit_spectrum(0.0, w)
    assert s.theta == math.pi / 4 and s.omega_q == w and s.sin_2theta == 1.0
    s = qubit_spectrum(w, 0.0)
    assert s.theta == 0.0 and s.omega_q == w
    s = qubit_spectrum(w, w)
    assert s.omega_q == pytest.approx(math.sqrt(2) * w, rel=1e-15)
    assert 2 * s.theta == pytest.approx(math.pi / 4, rel=1e-15)
    assert s.lambda_bar(3.0) == pytest.approx(3.0 * math.sin(math.pi / 4) / 2)
    with pytest.raises(ValueError):
        qubit_spectrum(0.0, 0.0)


@given(st.floats(0.01, 100), st.floats(0.01, 100))
def test_qubit_spectrum_invariants(A0, B0):
    s = qubit_spectrum(A0, B0)
    assert 0 < s.theta < math.pi / 2
    assert math.tan(2 * s.theta) == pytest.approx(B0 / A0, rel=1e-9)
    assert s.omega_q == pytest.approx(math.hypot(A0, B0), rel=1e-15)


def test_squeezing_examples():
    s = squeezing_transform(1.0, 0.0, 5.0, 5.0)
    assert s.r == 0 and s.lambda_eff == 1.0 and s.delta_eff == 5.0
    s = squeezing_transform(1.0, 0.8, 1.0, 50.0)
    assert s.r == pytest.approx(0.5493, abs=1e-4)
    assert s.cosh_r == pytest.approx(1.1547, abs=1e-4)
    assert s.lambda_eff == pytest.approx(1.1547, abs=1e-4)
    assert s.delta_eff == pytest.approx(1.0 / 1.6667, rel=1e-4)
    with pytest.raises(SqueezingInstabilityError):
        squeezing_transform(1.0, 1.0, 1.0, 1.0)


def test_squeezing_rwa_flag():
    assert squeezing_transform(1.0, 0.9, 20.0, 20.0).valid_rwa
    assert not squeezing_transform(1.0, 0.99, 1.0, 1.0).valid_rwa


ADMISSIBLE = st.floats(-(1 - 1e-7), 1 - 1e-7)


@given(ADMISSIBLE, st.floats(0.1, 1e3))
def test_symplectic_identity(ratio, delta):
    s = squeezing_transform(1.0, ratio * delta, delta, delta)
    assert abs(s.cosh_r**2 - s.sinh_r**2 - 1.0) < 1e-12
    assert s.lambda_eff == s.lambda_bar * s.cosh_r
    assert s.delta_eff == pytest.approx(delta / math.cosh(2 * s.r), rel=1e-15)


@given(st.floats(1e-3, 0.999), st.floats(1e-3, 0.999))
def test_enhancement_increasing_in_drive(x, y):
    # below ~1e-3 cosh r sits within an ulp of 1 and strictness is unresolvable
    lo, hi = sorted((x, y))
    if hi - lo < 1e-9:
        return
    assert squeezing_transform(1.0, lo, 1.0, 1.0).lambda_eff > squeezing_transform(1.0, 0.0, 1.0, 1.0).lambda_eff
    a = squeezing_transform(1.0, lo, 1.0, 1.0).lambda_eff
    b = squeezing_transform(1.0, hi, 1.0, 1.0).lambda_eff
    assert b > a
    assert squeezing_transform(1.0, -hi, 1.0, 1.0).lambda_eff == b


def test_cooperativity():
    assert cooperativity(0.0, 1.0, 1.0) == 0.0
    lam, g = TWO_PI * 12.7e6, TWO_PI * 1e6
    assert cooperativity(lam, g, g) == pytest.approx(645.16, rel=1e-12)
    assert cooperativity(lam, g, 10 * g) == pytest.approx(cooperativity(lam, g, g) / 10, rel=1e-14)
    with pytest.raises(ValueError):
        cooperativity(lam, 0.0, g)


def test_thermal_occupancy():
    assert thermal_occupancy(TWO_PI * 14e9, 0.1) == pytest.approx(0.0012, rel=0.05)
    assert thermal_occupancy(TWO_PI * 14e9, 0.0) == 0.0
    T = 0.3
    omega = math.log(2) * K_B * T / HBAR
    assert thermal_occupancy(omega, T) == pytest.approx(1.0, rel=1e-12)
