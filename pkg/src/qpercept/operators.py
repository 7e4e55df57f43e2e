"""Dense complex linear algebra for small Hilbert spaces.

Operators and states are immutable wrappers around complex matrices.  All
arithmetic is double precision; the default structural tolerance is 1e-9
absolute on unit-scale matrices.  Random sampling takes an explicit seed and
never shares generator state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ValidationError

DEFAULT_TOL = 1e-9


def _as_square_complex(entries) -> np.ndarray:
    mat = np.asarray(entries, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
        raise ValidationError(f"expected a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat.view(float))):
        raise ValidationError("matrix entries must be finite")
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True)
class Operator:
    """A finite-dimensional complex matrix (observable, projector, class operator...)."""

    mat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat", _as_square_complex(self.mat))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.mat.conj().T)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.dim != other.dim:
            raise DimensionMismatch(f"dims {self.dim} and {other.dim}")
        return Operator(self.mat @ other.mat)

    def __add__(self, other: "Operator") -> "Operator":
        if self.dim != other.dim:
            raise DimensionMismatch(f"dims {self.dim} and {other.dim}")
        return Operator(self.mat + other.mat)

    def __sub__(self, other: "Operator") -> "Operator":
        if self.dim != other.dim:
            raise DimensionMismatch(f"dims {self.dim} and {other.dim}")
        return Operator(self.mat - other.mat)

    def __rmul__(self, scalar) -> "Operator":
        return Operator(complex(scalar) * self.mat)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "re": self.mat.real.tolist(),
            "im": self.mat.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Operator":
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        if re.shape != im.shape or re.shape != (data["dim"], data["dim"]):
            raise ValidationError("re/im blocks do not match the declared dim")
        return cls(re + 1j * im)


@dataclass(frozen=True)
class State:
    """Density operator: Hermitian, positive semidefinite, unit trace (within tol)."""

    mat: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        mat = _as_square_complex(self.mat)
        object.__setattr__(self, "mat", mat)
        if np.max(np.abs(mat - mat.conj().T)) > self.tol:
            raise ValidationError("state is not Hermitian within tolerance")
        if abs(np.trace(mat).real - 1.0) > self.tol or abs(np.trace(mat).imag) > self.tol:
            raise ValidationError("state trace differs from 1 beyond tolerance")
        if np.min(np.linalg.eigvalsh((mat + mat.conj().T) / 2)) < -self.tol:
            raise ValidationError("state has an eigenvalue below -tol")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def pure(cls, vector) -> "State":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm <= 0 or not np.isfinite(norm):
            raise ValidationError("pure state vector must have positive finite norm")
        v = v / norm
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "State":
        if dim < 1:
            raise ValidationError("dim must be >= 1")
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def from_bloch(cls, polar: float, azimuth: float) -> "State":
        """Pure two-state density matrix pointing along (polar, azimuth)."""
        return cls(bloch_projector(polar, azimuth).mat)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "re": self.mat.real.tolist(),
            "im": self.mat.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "State":
        return cls(Operator.from_json(data).mat)


@dataclass(frozen=True)
class ParamPositiveOp:
    """Bloch-style parameters (t, x, y, z) of a positive 2x2 operator.

    Positivity requires t >= sqrt(x^2 + y^2 + z^2).
    """

    t: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        vals = (self.t, self.x, self.y, self.z)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("parameters must be finite")
        r = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        if self.t < r - 1e-12:
            raise ValidationError(f"t={self.t} violates t >= sqrt(x^2+y^2+z^2)={r}")


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim, dtype=complex))


def expectation(state: State, op: Operator) -> complex:
    """Expectation value Tr(state . op); complex in general, real for Hermitian op."""
    if state.dim != op.dim:
        raise DimensionMismatch(f"state dim {state.dim} != operator dim {op.dim}")
    return complex(np.trace(state.mat @ op.mat))


def bloch_projector(polar: float, azimuth: float) -> Operator:
    """Rank-one projector onto the spin-half state along (polar, azimuth)."""
    c, s = math.cos(polar), math.sin(polar)
    phase = complex(math.cos(azimuth), math.sin(azimuth))
    return Operator(0.5 * np.array([[1 + c, s * phase], [s * phase.conjugate(), 1 - c]]))


def from_params(p: ParamPositiveOp) -> Operator:
    """Positive 2x2 operator [[t+z, x+iy], [x-iy, t-z]]."""
    return Operator(
        np.array(
            [[p.t + p.z, p.x + 1j * p.y], [p.x - 1j * p.y, p.t - p.z]], dtype=complex
        )
    )


def tensor_product(a: Operator, b: Operator) -> Operator:
    """Kronecker product, row-major block order with `a` as the outer factor."""
    return Operator(np.kron(a.mat, b.mat))


def is_hermitian(op: Operator, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.max(np.abs(op.mat - op.mat.conj().T)) <= tol)


def is_projector(op: Operator, tol: float = DEFAULT_TOL) -> bool:
    """True iff op is Hermitian and idempotent within tol (max-norm)."""
    if not is_hermitian(op, tol):
        return False
    return bool(np.max(np.abs(op.mat @ op.mat - op.mat)) <= tol)


def haar_random_unitary(dim: int, seed: int, size: int | None = None):
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The R-diagonal phase correction makes the distribution exactly Haar.
    Deterministic for a fixed seed.  With `size` given, returns a stacked
    (size, dim, dim) array instead of a single Operator.
    """
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    shape = (dim, dim) if size is None else (size, dim, dim)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    phase = d / np.abs(d)
    q = q * phase[..., np.newaxis, :]
    if size is None:
        return Operator(q)
    return q
