"""Ordered projector decompositions of the identity, the operator-family
metric, and the replicated-space decoherence functional.

A rank pattern (r_1, ..., r_m) summing to the Hilbert dimension labels a
compact manifold of decompositions of real dimension dim^2 - sum(r_i^2);
sampling uses Haar-random unitaries so region integrals can be estimated by
seeded Monte Carlo with membership predicates.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, ValidationError
from .operators import Operator, State, expectation, haar_random_unitary


@dataclass(frozen=True)
class ProjectorDecomposition:
    """Ordered orthogonal projectors of fixed ranks summing to the identity."""

    dim: int
    ranks: tuple[int, ...]
    projectors: tuple[Operator, ...]

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        _validate_ranks(self.dim, ranks)
        object.__setattr__(self, "ranks", ranks)
        projectors = tuple(self.projectors)
        object.__setattr__(self, "projectors", projectors)
        if len(projectors) != len(ranks):
            raise ValidationError("one projector per rank required")
        total = sum(p.mat for p in projectors)
        if np.max(np.abs(total - np.eye(self.dim))) > 1e-10:
            raise ValidationError("projectors must sum to the identity")
        for a, b in itertools.combinations(projectors, 2):
            if np.max(np.abs(a.mat @ b.mat)) > 1e-10:
                raise ValidationError("projectors must be pairwise orthogonal")
        for p, r in zip(projectors, ranks):
            if abs(np.trace(p.mat).real - r) > 1e-8:
                raise ValidationError("projector trace does not match its declared rank")

    def __len__(self) -> int:
        return len(self.ranks)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "ranks": list(self.ranks),
            "projectors": [p.to_json() for p in self.projectors],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProjectorDecomposition":
        return cls(
            dim=data["dim"],
            ranks=tuple(data["ranks"]),
            projectors=tuple(Operator.from_json(p) for p in data["projectors"]),
        )


def _validate_ranks(dim: int, ranks: Sequence[int]) -> None:
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    if len(ranks) == 0 or any(r < 1 for r in ranks):
        raise ValidationError("ranks must be positive integers")
    if sum(ranks) != dim:
        raise ValidationError(f"ranks {tuple(ranks)} do not partition dim {dim}")


def manifold_dimension(dim: int, ranks: Sequence[int]) -> int:
    """Real dimension dim^2 - sum(r_i^2) of the space of decompositions."""
    ranks = tuple(int(r) for r in ranks)
    _validate_ranks(dim, ranks)
    return dim * dim - sum(r * r for r in ranks)


def sample_decomposition(dim: int, ranks: Sequence[int], seed: int) -> ProjectorDecomposition:
    """Decomposition from contiguous column blocks of a Haar-random unitary."""
    ranks = tuple(int(r) for r in ranks)
    _validate_ranks(dim, ranks)
    u = haar_random_unitary(dim, seed).mat
    projectors = []
    start = 0
    for r in ranks:
        block = u[:, start : start + r]
        projectors.append(Operator(block @ block.conj().T))
        start += r
    return ProjectorDecomposition(dim=dim, ranks=ranks, projectors=tuple(projectors))


def density_at(decomposition: ProjectorDecomposition, state: State) -> np.ndarray:
    """Expectations of each projector in the state; they sum to one."""
    if decomposition.dim != state.dim:
        raise DimensionMismatch("decomposition and state dims differ")
    return np.array(
        [float(expectation(state, p).real) for p in decomposition.projectors]
    )


def family_metric(
    family: Callable[[np.ndarray], list[np.ndarray]],
    points: np.ndarray,
    step_sizes: Sequence[float],
    check_step: bool = False,
) -> np.ndarray:
    """Gram-matrix metric of a parameterized class-operator family.

    family(x) returns the list of class operators at parameter vector x; the
    metric is g_ij = sum_alpha Re Tr[(d_i C_alpha)^dag (d_j C_alpha)] with
    central differences of size step_sizes.  With check_step the computation
    repeats at half steps and rejects families whose metric has not converged.
    Returns an (n_points, k, k) array.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    steps = np.asarray(step_sizes, dtype=float)
    if steps.shape != (pts.shape[1],) or np.any(steps <= 0):
        raise ValidationError("one positive step per coordinate required")

    def metric_at(x: np.ndarray, h: np.ndarray) -> np.ndarray:
        k = len(x)
        diffs = []
        for i in range(k):
            shift = np.zeros(k)
            shift[i] = h[i]
            plus = family(x + shift)
            minus = family(x - shift)
            if len(plus) != len(minus):
                raise ValidationError("family must return a fixed number of operators")
            diffs.append([(p - m) / (2 * h[i]) for p, m in zip(plus, minus)])
        g = np.empty((k, k))
        for i in range(k):
            for j in range(i, k):
                val = 0.0
                for da, db in zip(diffs[i], diffs[j]):
                    if not np.all(np.isfinite(da.view(float))) or not np.all(
                        np.isfinite(db.view(float))
                    ):
                        raise ValidationError("family produced non-finite values")
                    val += float(np.trace(da.conj().T @ db).real)
                g[i, j] = val
                g[j, i] = val
        return g

    out = np.stack([metric_at(x, steps) for x in pts])
    if check_step:
        refined = np.stack([metric_at(x, steps / 2) for x in pts])
        scale = max(1.0, float(np.max(np.abs(out))))
        if np.max(np.abs(out - refined)) > 1e-2 * scale:
            raise ValidationError("metric has not converged; reduce the step sizes")
    return out


class ReplicatedDecoherenceFunctional:
    """Bilinear pairing of histories over replicated copies of one state.

    An atomic history picks one projector index per step; its pairing with
    another history is the product over steps of <P(h'_k) P(h_k)>.  Sums of
    atomic histories (unit coefficients) extend bilinearly.  Off-diagonal
    atomic pairs always vanish because each step's projectors are orthogonal.
    """

    def __init__(self, state: State, decompositions: Sequence[ProjectorDecomposition]):
        decomps = tuple(decompositions)
        if len(decomps) == 0:
            raise ValidationError("need at least one step")
        for d in decomps:
            if d.dim != state.dim:
                raise DimensionMismatch("every step must share the state dimension")
        self.state = state
        self.decompositions = decomps
        # <P_j P_i> per step, indexed [step][j, i]
        self._pair = []
        for d in decomps:
            m = len(d)
            table = np.empty((m, m), dtype=complex)
            for j in range(m):
                for i in range(m):
                    table[j, i] = np.trace(
                        state.mat @ d.projectors[j].mat @ d.projectors[i].mat
                    )
            self._pair.append(table)

    @property
    def steps(self) -> int:
        return len(self.decompositions)

    def _check(self, history: Sequence[int]) -> tuple[int, ...]:
        h = tuple(int(i) for i in history)
        if len(h) != self.steps:
            raise ValidationError("history length must equal the number of steps")
        for k, idx in enumerate(h):
            if not 0 <= idx < len(self.decompositions[k]):
                raise ValidationError(f"index {idx} out of range at step {k}")
        return h

    def atomic(self, h, h_prime) -> complex:
        h = self._check(h)
        hp = self._check(h_prime)
        out = complex(1.0)
        for k in range(self.steps):
            out *= self._pair[k][hp[k], h[k]]
        return out

    def evaluate(self, histories, histories_prime) -> complex:
        """Pairing of two unit-coefficient sums of atomic histories."""
        return sum(
            self.atomic(h, hp) for h in histories for hp in histories_prime
        )

    def all_histories(self):
        return itertools.product(*[range(len(d)) for d in self.decompositions])

    def diagonal(self) -> dict[tuple[int, ...], float]:
        """Weights <P(h_1)>...<P(h_n)> of every atomic history; they sum to 1."""
        return {h: self.atomic(h, h).real for h in self.all_histories()}


def replicated_decoherence_functional(
    state: State, decompositions: Sequence[ProjectorDecomposition]
) -> ReplicatedDecoherenceFunctional:
    return ReplicatedDecoherenceFunctional(state, decompositions)


@dataclass(frozen=True)
class SpectralExperience:
    """Per-perception spectral data: terms (coefficient, step index, projector index).

    Each perception's experience operator is the nonnegative combination
    sum(coefficient * P) of projectors drawn from the per-step decompositions.
    """

    terms: tuple[tuple[tuple[float, int, int], ...], ...]

    def __post_init__(self):
        terms = tuple(
            tuple((float(lam), int(d), int(j)) for lam, d, j in per_perception)
            for per_perception in self.terms
        )
        for per_perception in terms:
            for lam, _, _ in per_perception:
                if lam < 0 or not np.isfinite(lam):
                    raise ValidationError("spectral coefficients must be nonnegative")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)


def spectral_operator(
    spectral: SpectralExperience,
    decompositions: Sequence[ProjectorDecomposition],
    perception: int,
) -> Operator:
    """Experience operator of one perception from its spectral terms."""
    decomps = tuple(decompositions)
    dim = decomps[0].dim
    acc = np.zeros((dim, dim), dtype=complex)
    for lam, d_idx, p_idx in spectral.terms[perception]:
        if not 0 <= d_idx < len(decomps):
            raise ValidationError(f"decomposition index {d_idx} out of range")
        if not 0 <= p_idx < len(decomps[d_idx]):
            raise ValidationError(f"projector index {p_idx} out of range")
        acc += lam * decomps[d_idx].projectors[p_idx].mat
    return Operator(acc)


def reconstruct_measures(
    state: State,
    spectral: SpectralExperience,
    decompositions: Sequence[ProjectorDecomposition],
) -> np.ndarray:
    """Measures recovered from the diagonal of the replicated functional.

    Each atomic history contributes its product weight to perception p with
    the coefficient attached to the projector the history selects at the
    term's step; completeness of the other steps collapses the sum to the
    direct expectation of the perception's operator.
    """
    functional = ReplicatedDecoherenceFunctional(state, decompositions)
    diag = functional.diagonal()
    out = np.zeros(len(spectral))
    for p, per_perception in enumerate(spectral.terms):
        for lam, d_idx, p_idx in per_perception:
            if not 0 <= d_idx < functional.steps:
                raise ValidationError(f"decomposition index {d_idx} out of range")
            if not 0 <= p_idx < len(decompositions[d_idx]):
                raise ValidationError(f"projector index {p_idx} out of range")
        total = 0.0
        for h, weight in diag.items():
            coeff = sum(
                lam for lam, d_idx, p_idx in per_perception if h[d_idx] == p_idx
            )
            total += coeff * weight
        out[p] = total
    return out
