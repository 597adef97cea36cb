"""Master-equation time evolution and expectation values."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .operators import (
    DensityMatrix,
    HilbertSpace,
    NotHermitianError,
    Operator,
    SpaceMismatchError,
)

DEFAULT_REL_TOL = 1e-8
DEFAULT_ABS_TOL = 1e-10

RENORMALIZE_TOL = 1e-9
TRACE_DRIFT_TOL = 1e-6
POSITIVITY_FAIL = -1e-6
IMAG_TOL = 1e-10


class IntegrationError(RuntimeError):
    """Raised when integration fails; ``diagnostics`` carries solver details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class TraceDriftError(IntegrationError):
    pass


class PositivityError(IntegrationError):
    pass


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus weighted collapse operators.

    ``drives`` holds optional time-dependent Hermitian terms ``(O, f)`` that
    add ``f(t) * O`` to the Hamiltonian. Rates are angular frequencies.
    """

    space: HilbertSpace
    H: Operator
    collapses: tuple[tuple[float, Operator], ...] = ()
    drives: tuple[tuple[Operator, Callable[[float], float]], ...] = ()
    name: str = ""
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "collapses", tuple((float(g), L) for g, L in self.collapses))
        object.__setattr__(self, "drives", tuple(self.drives))
        if self.H.space != self.space:
            raise SpaceMismatchError("Hamiltonian space differs from model space")
        if not self.H.is_hermitian():
            raise NotHermitianError(
                f"Hamiltonian not Hermitian (rel. error {self.H.hermiticity_error():.2e})"
            )
        for rate, L in self.collapses:
            if not rate >= 0.0:
                raise ValueError(f"collapse rate must be >= 0, got {rate}")
            if L.space != self.space:
                raise SpaceMismatchError("collapse operator space differs from model space")
        for op, _ in self.drives:
            if op.space != self.space:
                raise SpaceMismatchError("drive operator space differs from model space")
            if not op.is_hermitian():
                raise NotHermitianError("drive operator not Hermitian")

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(repr((self.space.kinds, self.space.dims)).encode())
        h.update(np.ascontiguousarray(self.H.matrix).tobytes())
        for rate, L in self.collapses:
            h.update(np.float64(rate).tobytes())
            h.update(np.ascontiguousarray(L.matrix).tobytes())
        for op, f in self.drives:
            h.update(np.ascontiguousarray(op.matrix).tobytes())
            h.update(getattr(f, "__qualname__", repr(f)).encode())
        return h.hexdigest()[:16]

    def rhs(self) -> Callable[[float, np.ndarray], np.ndarray]:
        """Right-hand side on the flattened density matrix."""
        d = self.space.dim
        heff = self.H.matrix.copy()
        jumps = []
        for rate, L in self.collapses:
            if rate == 0.0:
                continue
            m = L.matrix
            heff = heff - 0.5j * rate * (m.conj().T @ m)
            jumps.append((rate, m, m.conj().T))
        drives = [(op.matrix, f) for op, f in self.drives]

        def f(t, y):
            rho = y.reshape(d, d)
            h = heff
            if drives:
                h = heff + sum(fn(t) * m for m, fn in drives)
            # the (h rho)^dag shortcut is unstable: it drops the damping of
            # any anti-Hermitian roundoff in rho
            out = -1j * (h @ rho - rho @ h.conj().T)
            for rate, m, md in jumps:
                out += rate * (m @ rho @ md)
            return out.ravel()

        return f


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, dim, dim)
    space: HilbertSpace
    trace_errors: np.ndarray
    min_eigenvalues: np.ndarray
    meta: dict = field(default_factory=dict)

    def state(self, i: int) -> DensityMatrix:
        return DensityMatrix(self.space, self.states[i], validate=False)

    def __len__(self):
        return len(self.times)


def evolve(
    model: LindbladModel,
    rho0: DensityMatrix,
    times,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
) -> Trajectory:
    """Integrate the master equation and sample at ``times``.

    Uses an adaptive Dormand-Prince 5(4) pair with dense output. Emitted
    states have their trace renormalized when it drifts by less than 1e-9;
    larger drift up to 1e-6 is kept and recorded in ``meta``, beyond that
    :class:`TraceDriftError` is raised. An eigenvalue below -1e-6 raises
    :class:`PositivityError`.
    """
    if rho0.space != model.space:
        raise SpaceMismatchError("initial state space differs from model space")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 1:
        raise ValueError("times must be a non-empty 1-D grid")
    if times[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    if not 1e-12 <= rel_tol <= 1e-4:
        raise ValueError(f"rel_tol must lie in [1e-12, 1e-4], got {rel_tol}")

    d = model.space.dim
    y0 = np.array(rho0.matrix, dtype=complex).ravel()
    if len(times) == 1:
        ys = y0[None, :]
        nfev = 0
    else:
        sol = solve_ivp(
            model.rhs(),
            (times[0], times[-1]),
            y0,
            method="RK45",
            t_eval=times,
            rtol=rel_tol,
            atol=abs_tol,
        )
        if sol.status != 0:
            raise IntegrationError(
                f"integration failed: {sol.message}",
                {"nfev": sol.nfev, "status": sol.status, "t_reached": float(sol.t[-1]) if len(sol.t) else 0.0},
            )
        ys = sol.y.T
        nfev = int(sol.nfev)

    states = np.empty((len(times), d, d), dtype=complex)
    trace_errors = np.empty(len(times))
    min_eigs = np.empty(len(times))
    drifted = []
    for i, y in enumerate(ys):
        rho = y.reshape(d, d)
        rho = 0.5 * (rho + rho.conj().T)
        tr = np.trace(rho).real
        err = abs(tr - 1.0)
        if err > TRACE_DRIFT_TOL:
            raise TraceDriftError(
                f"trace drift {err:.3e} at t={times[i]:.6g}",
                {"nfev": nfev, "time_index": i, "rel_tol": rel_tol, "abs_tol": abs_tol},
            )
        if err < RENORMALIZE_TOL:
            rho = rho / tr
        else:
            drifted.append(i)
        lam = float(np.linalg.eigvalsh(rho)[0])
        if lam < POSITIVITY_FAIL:
            raise PositivityError(
                f"eigenvalue {lam:.3e} at t={times[i]:.6g}",
                {"nfev": nfev, "time_index": i, "rel_tol": rel_tol},
            )
        states[i] = rho
        trace_errors[i] = abs(np.trace(rho).real - 1.0)
        min_eigs[i] = lam

    meta = {
        "model": model.name,
        "model_hash": model.fingerprint(),
        "rel_tol": rel_tol,
        "abs_tol": abs_tol,
        "n_max": model.space.n_max,
        "nfev": nfev,
        "unrenormalized_indices": drifted,
    }
    return Trajectory(times, states, model.space, trace_errors, min_eigs, meta)


def expectation(traj: Trajectory, op: Operator) -> np.ndarray:
    """Series ``tr(rho(t) op)``; real-valued for Hermitian ``op``."""
    if op.space != traj.space:
        raise SpaceMismatchError("observable space differs from trajectory space")
    vals = np.einsum("tij,ji->t", traj.states, op.matrix)
    if op.is_hermitian():
        imag = float(np.max(np.abs(vals.imag))) if len(vals) else 0.0
        if imag > IMAG_TOL:
            raise IntegrationError(f"imaginary part {imag:.3e} in Hermitian expectation")
        return vals.real.copy()
    return vals


def compare_models(full: Trajectory, reduced: Trajectory, observables) -> dict[str, float]:
    """Sup-norm deviation ``max_t |<O>_full - <O>_reduced|`` per observable.

    ``observables`` maps a name to an ``(op_on_full, op_on_reduced)`` pair.
    """
    if full.times.shape != reduced.times.shape or not np.array_equal(full.times, reduced.times):
        raise ValueError("trajectories use different time grids")
    out = {}
    for name, (op_full, op_red) in dict(observables).items():
        a = expectation(full, op_full)
        b = expectation(reduced, op_red)
        out[name] = float(np.max(np.abs(a - b)))
    return out


def steady_state(
    model: LindbladModel,
    rho0: DensityMatrix,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
) -> DensityMatrix:
    """Long-time state, integrating to ``t = 50 / min(nonzero rates)``."""
    rates = [g for g, _ in model.collapses if g > 0]
    if not rates:
        raise ValueError("steady state needs at least one nonzero collapse rate")
    t_end = 50.0 / min(rates)
    traj = evolve(model, rho0, np.array([0.0, t_end]), rel_tol, abs_tol)
    return traj.state(-1)
