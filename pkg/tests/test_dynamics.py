import math

import numpy as np
import pytest

from magsky.dynamics import (
    IntegrationError,
    LindbladModel,
    compare_models,
    evolve,
    expectation,
    steady_state,
)
from magsky.operators import HilbertSpace, NotHermitianError, basis_state, identity, qubit_ops, zero
from magsky.scenarios import (
    JCParams,
    TwoSkyrmionParams,
    build_jc,
    build_two_skyrmion_full,
    initial_state,
    observables,
    reduce_two_skyrmion,
)

Q = HilbertSpace.build("qubit")


def vacuum_rabi(t, lam=1.0):
    """Single-excitation block of resonant JC, diagonalized independently."""
    block = np.array([[0.0, lam], [lam, 0.0]])  # basis |e,0>, |g,1>
    w, v = np.linalg.eigh(block)
    amp = v @ (np.exp(-1j * np.outer(w, t)) * (v.T @ np.array([1.0, 0.0]))[:, None])
    return np.abs(amp[0]) ** 2, np.abs(amp[1]) ** 2


def test_sigma_z_conserved():
    q = qubit_ops(Q, 0)
    model = LindbladModel(Q, 0.5 * 3.0 * q["sz"])
    traj = evolve(model, basis_state(Q, ["e"]), np.linspace(0, 10, 50))
    assert np.allclose(expectation(traj, q["sz"]), 1.0, atol=1e-12)


def test_spontaneous_decay():
    q = qubit_ops(Q, 0)
    gamma = 0.7
    model = LindbladModel(Q, zero(Q), ((gamma, q["sm"]),))
    t = np.linspace(0, 8, 81)
    traj = evolve(model, basis_state(Q, ["e"]), t)
    p = expectation(traj, q["sp"] @ q["sm"])
    assert np.max(np.abs(p - np.exp(-gamma * t)) / np.exp(-gamma * t)) < 1e-7
    assert np.allclose(expectation(traj, identity(Q)), 1.0, atol=1e-12)


def test_resonant_jc_matches_vacuum_rabi():
    model = build_jc(JCParams(), 10)
    t = np.linspace(0, 5 * math.pi, 300)
    traj = evolve(model, initial_state(model.space, ["e"]), t)
    obs = observables("jc", model.space)
    pe, p1 = vacuum_rabi(t)
    assert np.max(np.abs(expectation(traj, obs["P_qubit"]) - pe)) < 1e-6
    assert np.max(np.abs(expectation(traj, obs["n_magnon"]) - p1)) < 1e-6
    assert np.allclose(pe, np.cos(t) ** 2, atol=1e-12)


def test_jc_excitation_conserved():
    p = JCParams(omega_q=1.3, omega_K=0.9, lambda_bar=0.4)
    model = build_jc(p, 8)
    traj = evolve(model, initial_state(model.space, ["e"]), np.linspace(0, 30, 200))
    obs = observables("jc", model.space)
    total = expectation(traj, obs["P_qubit"]) + expectation(traj, obs["n_magnon"])
    assert np.max(np.abs(total - 1.0)) < 1e-9


def test_halving_rel_tol_changes_little():
    p = TwoSkyrmionParams()
    model = build_two_skyrmion_full(p, 10)
    rho0 = initial_state(model.space, ["e", "g"])
    t = np.linspace(0, 20, 400)
    rel = 1e-8
    a = evolve(model, rho0, t, rel_tol=rel)
    b = evolve(model, rho0, t, rel_tol=rel / 2)
    for op in observables("two-skyrmion-full", model.space).values():
        assert np.max(np.abs(expectation(a, op) - expectation(b, op))) < 10 * rel


def test_trajectory_validity_and_meta():
    model = build_two_skyrmion_full(TwoSkyrmionParams(), 10)
    traj = evolve(model, initial_state(model.space, ["g", "e"]), np.linspace(0, 20, 400))
    assert np.max(traj.trace_errors) < 1e-9
    assert np.min(traj.min_eigenvalues) >= -1e-8
    assert traj.meta["n_max"] == (10,)
    assert traj.meta["rel_tol"] == 1e-8
    assert len(traj.meta["model_hash"]) == 16
    traj.state(-1).validate()


def test_evolve_preconditions():
    model = LindbladModel(Q, zero(Q))
    rho = basis_state(Q, ["e"])
    with pytest.raises(ValueError):
        evolve(model, rho, [0.1, 1.0])
    with pytest.raises(ValueError):
        evolve(model, rho, [0.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        evolve(model, rho, [0.0, 1.0], rel_tol=1e-3)


def test_model_validation():
    q = qubit_ops(Q, 0)
    with pytest.raises(NotHermitianError):
        LindbladModel(Q, q["sp"])
    with pytest.raises(ValueError):
        LindbladModel(Q, zero(Q), ((-1.0, q["sm"]),))


def test_expectation_identity_and_nonhermitian():
    q = qubit_ops(Q, 0)
    model = LindbladModel(Q, 0.5 * q["sx"])
    traj = evolve(model, basis_state(Q, ["e"]), np.linspace(0, 3, 20))
    assert np.allclose(expectation(traj, identity(Q)), 1.0)
    assert np.iscomplexobj(expectation(traj, q["sm"]))


def test_imaginary_part_guard():
    q = qubit_ops(Q, 0)
    model = LindbladModel(Q, zero(Q))
    traj = evolve(model, basis_state(Q, ["e"]), [0.0, 1.0])
    traj.states[1] = np.array([[0.5, 0.5j], [0.5j, 0.5]])
    with pytest.raises(IntegrationError):
        expectation(traj, q["sx"])


def test_drive_term():
    q = qubit_ops(Q, 0)
    model = LindbladModel(Q, zero(Q), drives=((0.5 * q["sx"], lambda t: 1.0),))
    t = np.linspace(0, 3, 31)
    traj = evolve(model, basis_state(Q, ["e"]), t)
    assert np.allclose(expectation(traj, q["sp"] @ q["sm"]), np.cos(t / 2) ** 2, atol=1e-7)


def test_compare_models_identical_and_grid_mismatch():
    model = build_jc(JCParams(), 4)
    rho = initial_state(model.space, ["e"])
    a = evolve(model, rho, np.linspace(0, 2, 10))
    obs = observables("jc", model.space)
    dev = compare_models(a, a, {k: (o, o) for k, o in obs.items()})
    assert all(v == 0.0 for v in dev.values())
    b = evolve(model, rho, np.linspace(0, 2, 11))
    with pytest.raises(ValueError):
        compare_models(a, b, {})


def test_elimination_invalid_at_small_gamma():
    p = TwoSkyrmionParams(gamma_K=2.0)
    full, red = build_two_skyrmion_full(p, 10), reduce_two_skyrmion(p)
    t = np.linspace(0, 10 / p.Gamma_eff, 200)
    tf = evolve(full, initial_state(full.space, ["g", "e"]), t)
    tr = evolve(red, initial_state(red.space, ["g", "e"]), t)
    of, orr = observables("two-skyrmion-full", full.space), observables("two-skyrmion-reduced", red.space)
    dev = compare_models(tf, tr, {k: (of[k], orr[k]) for k in ("P_S1", "P_S2")})
    assert max(dev.values()) > 0.1
    assert red.info["warnings"]


def test_steady_state_decays_to_ground():
    q = qubit_ops(Q, 0)
    model = LindbladModel(Q, 0.5 * q["sz"], ((1.0, q["sm"]),))
    ss = steady_state(model, basis_state(Q, ["e"]))
    assert np.allclose(ss.matrix, basis_state(Q, ["g"]).matrix, atol=1e-9)
