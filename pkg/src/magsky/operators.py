"""Dense operator algebra on composite qubit / truncated-boson spaces.

Qubit layout: index 0 is the excited state, index 1 the ground state, so
``sigma_z = diag(1, -1)`` and ``sigma_minus = |g><e|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

HERMITIAN_RTOL = 1e-12

QUBIT = "qubit"
BOSON = "boson"


class SpaceMismatchError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of qubit and truncated-boson factors.

    ``kinds`` lists the factor types; a boson factor of truncation ``n_max``
    has dimension ``n_max + 1``.
    """

    kinds: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.kinds) != len(self.dims):
            raise ValueError("kinds and dims must have equal length")
        for kind, dim in zip(self.kinds, self.dims):
            if kind == QUBIT and dim != 2:
                raise ValueError(f"qubit factor must have dimension 2, got {dim}")
            if kind == BOSON and dim < 2:
                raise ValueError(f"boson truncation N_max must be >= 1, got dim {dim}")
            if kind not in (QUBIT, BOSON):
                raise ValueError(f"unknown factor kind {kind!r}")

    @classmethod
    def build(cls, *factors) -> "HilbertSpace":
        """``HilbertSpace.build("qubit", ("boson", 10))`` style constructor."""
        kinds, dims = [], []
        for f in factors:
            if f == QUBIT:
                kinds.append(QUBIT)
                dims.append(2)
            else:
                kind, n_max = f
                if kind != BOSON:
                    raise ValueError(f"bad factor spec {f!r}")
                kinds.append(BOSON)
                dims.append(int(n_max) + 1)
        return cls(tuple(kinds), tuple(dims))

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=int))

    @property
    def n_max(self) -> tuple[int, ...]:
        """Truncation levels of the boson factors, in factor order."""
        return tuple(d - 1 for k, d in zip(self.kinds, self.dims) if k == BOSON)

    def __add__(self, other: "HilbertSpace") -> "HilbertSpace":
        return HilbertSpace(self.kinds + other.kinds, self.dims + other.dims)


def _frozen(m):
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


class Operator:
    """Dense complex matrix tagged with the space it acts on."""

    __slots__ = ("space", "matrix")

    def __init__(self, space: HilbertSpace, matrix):
        matrix = _frozen(matrix)
        if matrix.shape != (space.dim, space.dim):
            raise SpaceMismatchError(
                f"matrix shape {matrix.shape} does not match space dimension {space.dim}"
            )
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def __repr__(self):
        return f"Operator(kinds={self.space.kinds}, dims={self.space.dims})"

    def _check(self, other: "Operator"):
        if self.space != other.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.matrix + other.matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.matrix - other.matrix)
        return NotImplemented

    def __neg__(self):
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return Operator(self.space, scalar * self.matrix)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.space, self.matrix / scalar)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.matrix @ other.matrix)
        return NotImplemented

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def hermiticity_error(self) -> float:
        """Relative Frobenius norm of ``H - H^dagger``; 0 for the zero operator."""
        norm = np.linalg.norm(self.matrix)
        if norm == 0.0:
            return 0.0
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T) / norm)

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        return self.hermiticity_error() < rtol


def zero(space: HilbertSpace) -> Operator:
    return Operator(space, np.zeros((space.dim, space.dim)))


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.dim))


def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product; the factor order of the result is ``a`` then ``b``."""
    return Operator(a.space + b.space, np.kron(a.matrix, b.matrix))


def tensor_all(*ops: Operator) -> Operator:
    return reduce(tensor, ops)


_QUBIT_LOCAL = {
    "I": np.eye(2),
    "sx": np.array([[0, 1], [1, 0]]),
    "sy": np.array([[0, -1j], [1j, 0]]),
    "sz": np.array([[1, 0], [0, -1]]),
    "sp": np.array([[0, 1], [0, 0]]),  # |e><g|
    "sm": np.array([[0, 0], [1, 0]]),  # |g><e|
}


def _boson_local(dim: int) -> dict[str, np.ndarray]:
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    return {
        "I": np.eye(dim),
        "a": a,
        "adag": a.T.copy(),
        "n": np.diag(np.arange(dim, dtype=float)),
    }


def embed(space: HilbertSpace, which: int, local) -> Operator:
    """Place a local matrix on factor ``which``, identity elsewhere."""
    if not 0 <= which < len(space.dims):
        raise IndexError(f"factor index {which} out of range for {len(space.dims)} factors")
    local = np.asarray(local)
    if local.shape != (space.dims[which],) * 2:
        raise SpaceMismatchError(
            f"local operator shape {local.shape} does not fit factor of dim {space.dims[which]}"
        )
    mats = [np.eye(d) for d in space.dims]
    mats[which] = local
    return Operator(space, reduce(np.kron, mats))


def make_operators(space: HilbertSpace, which: int, kind: str | None = None) -> dict[str, Operator]:
    """Elementary operators for one factor, embedded in the full space.

    Qubit factors yield ``I, sx, sy, sz, sp, sm``; boson factors yield
    ``I, a, adag, n``. Passing ``kind`` asserts the factor type.
    """
    if not 0 <= which < len(space.kinds):
        raise IndexError(f"factor index {which} out of range for {len(space.kinds)} factors")
    actual = space.kinds[which]
    if kind is not None and kind != actual:
        raise SpaceMismatchError(f"factor {which} is a {actual}, not a {kind}")
    local = _QUBIT_LOCAL if actual == QUBIT else _boson_local(space.dims[which])
    return {name: embed(space, which, m) for name, m in local.items()}


def qubit_ops(space: HilbertSpace, which: int) -> dict[str, Operator]:
    return make_operators(space, which, QUBIT)


def boson_ops(space: HilbertSpace, which: int) -> dict[str, Operator]:
    return make_operators(space, which, BOSON)


class DensityMatrix:
    """A validated density matrix.

    Construction checks unit trace (1e-9), Hermiticity (1e-12 relative) and
    positivity (smallest eigenvalue >= -1e-8).
    """

    __slots__ = ("space", "matrix")

    TRACE_TOL = 1e-9
    HERMITIAN_TOL = 1e-12
    POSITIVITY_TOL = -1e-8

    def __init__(self, space: HilbertSpace, matrix, validate: bool = True):
        matrix = _frozen(matrix)
        if matrix.shape != (space.dim, space.dim):
            raise SpaceMismatchError(f"matrix shape {matrix.shape} vs space dim {space.dim}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", matrix)
        if validate:
            self.validate()

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def trace_error(self) -> float:
        return float(abs(np.trace(self.matrix) - 1.0))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def validate(self):
        if self.trace_error() > self.TRACE_TOL:
            raise InvalidStateError(f"trace deviates from 1 by {self.trace_error():.3e}")
        norm = np.linalg.norm(self.matrix)
        herm = np.linalg.norm(self.matrix - self.matrix.conj().T) / norm
        if herm > self.HERMITIAN_TOL:
            raise InvalidStateError(f"density matrix not Hermitian (rel. error {herm:.3e})")
        lam = self.min_eigenvalue()
        if lam < self.POSITIVITY_TOL:
            raise InvalidStateError(f"negative eigenvalue {lam:.3e}")

    @classmethod
    def from_ket(cls, space: HilbertSpace, ket) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex).ravel()
        ket = ket / np.linalg.norm(ket)
        return cls(space, np.outer(ket, ket.conj()))


def basis_ket(space: HilbertSpace, labels) -> np.ndarray:
    """Product basis vector. Qubit labels are ``"e"``/``"g"``; boson labels are Fock numbers."""
    if len(labels) != len(space.kinds):
        raise SpaceMismatchError(f"{len(labels)} labels for {len(space.kinds)} factors")
    vecs = []
    for kind, dim, label in zip(space.kinds, space.dims, labels):
        v = np.zeros(dim, dtype=complex)
        if kind == QUBIT:
            if label not in ("e", "g"):
                raise ValueError(f"qubit label must be 'e' or 'g', got {label!r}")
            v[0 if label == "e" else 1] = 1.0
        else:
            n = int(label)
            if not 0 <= n < dim:
                raise ValueError(f"Fock level {n} outside truncation N_max={dim - 1}")
            v[n] = 1.0
        vecs.append(v)
    return reduce(np.kron, vecs)


def basis_state(space: HilbertSpace, labels) -> DensityMatrix:
    return DensityMatrix.from_ket(space, basis_ket(space, labels))


def dissipator(L: Operator, rho) -> np.ndarray:
    """Lindblad dissipator ``L rho L^dag - 1/2 {L^dag L, rho}``.

    ``rho`` may be a :class:`DensityMatrix` or a bare matrix on ``L.space``.
    """
    if isinstance(rho, DensityMatrix):
        if rho.space != L.space:
            raise SpaceMismatchError(f"{L.space} vs {rho.space}")
        r = rho.matrix
    else:
        r = np.asarray(rho)
        if r.shape != L.matrix.shape:
            raise SpaceMismatchError(f"rho shape {r.shape} vs operator shape {L.matrix.shape}")
    m = L.matrix
    md = m.conj().T
    ldl = md @ m
    return m @ r @ md - 0.5 * (ldl @ r + r @ ldl)
