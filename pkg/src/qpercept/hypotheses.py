"""Experience-operator constructions and the structural checks between them.

An experience operator assigns a nonnegative measure density to one perception.
The variants below cover the standard construction hierarchy: plain positive
operators, projectors (possibly constrained or group-symmetrized), commuting
products, ordered chains of projectors, unit-coefficient sums of chains, and
real parts of class operators.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import DimensionMismatch, InvalidExperience, ValidationError
from .operators import DEFAULT_TOL, Operator, State, is_projector


@dataclass(frozen=True)
class Explicit:
    """An experience operator given directly as a positive operator."""

    op: Operator


@dataclass(frozen=True)
class Projector:
    op: Operator

    def __post_init__(self):
        if not is_projector(self.op, DEFAULT_TOL):
            raise ValidationError("Projector spec requires an idempotent Hermitian operator")


@dataclass(frozen=True)
class ConstrainedProjector:
    """P_C P P_C: a projector sandwiched by the constraint projector P_C."""

    constraint: Operator
    inner: Operator

    def __post_init__(self):
        for name, op in (("constraint", self.constraint), ("inner", self.inner)):
            if not is_projector(op, DEFAULT_TOL):
                raise ValidationError(f"ConstrainedProjector {name} must be a projector")


@dataclass(frozen=True)
class SymmetrizedProjector:
    """Average of g P g^-1 over a finite symmetry group given by unitaries g.

    Continuous groups are not representable here; callers must pass the full
    finite element list (including the identity).
    """

    inner: Operator
    group: tuple[Operator, ...]

    def __post_init__(self):
        if not is_projector(self.inner, DEFAULT_TOL):
            raise ValidationError("SymmetrizedProjector inner must be a projector")
        group = tuple(self.group)
        if len(group) == 0:
            raise ValidationError("symmetry group must be a nonempty finite list")
        for g in group:
            if np.max(np.abs(g.mat @ g.mat.conj().T - np.eye(g.dim))) > 1e-8:
                raise ValidationError("group elements must be unitary")
        object.__setattr__(self, "group", group)


@dataclass(frozen=True)
class ProductProjector:
    """Product of projectors for the components of one perception.

    The components must commute pairwise; this is verified at realization.
    """

    components: tuple[Operator, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) == 0:
            raise ValidationError("ProductProjector needs at least one component")
        for c in comps:
            if not is_projector(c, DEFAULT_TOL):
                raise ValidationError("ProductProjector components must be projectors")
        object.__setattr__(self, "components", comps)


@dataclass(frozen=True)
class ProjectionSequence:
    """Chain of projectors applied in order; chain[0] is applied last.

    Realizes to C^dagger C with C = chain[0] @ chain[1] @ ... @ chain[-1].
    The caller fixes the order; nothing here infers one.
    """

    chain: tuple[Operator, ...]

    def __post_init__(self):
        chain = tuple(self.chain)
        if len(chain) < 1:
            raise ValidationError("chain must contain at least one projector")
        for p in chain:
            if not is_projector(p, DEFAULT_TOL):
                raise ValidationError("chain entries must be projectors")
        object.__setattr__(self, "chain", chain)

    def class_operator(self) -> Operator:
        mat = self.chain[0].mat
        for p in self.chain[1:]:
            mat = mat @ p.mat
        return Operator(mat)


@dataclass(frozen=True)
class HistorySum:
    """Unit-coefficient sum of projector chains; realizes to C^dagger C."""

    sequences: tuple[ProjectionSequence, ...]

    def __post_init__(self):
        seqs = tuple(
            s if isinstance(s, ProjectionSequence) else ProjectionSequence(tuple(s))
            for s in self.sequences
        )
        if len(seqs) == 0:
            raise ValidationError("HistorySum needs at least one chain")
        object.__setattr__(self, "sequences", seqs)

    def class_operator(self) -> Operator:
        mats = [s.class_operator().mat for s in self.sequences]
        return Operator(sum(mats))


@dataclass(frozen=True)
class LinearlyPositive:
    """Re C for a class operator C; valid only where the state gives <Re C> >= 0."""

    class_op: Operator


ExperienceSpec = Union[
    Explicit,
    Projector,
    ConstrainedProjector,
    SymmetrizedProjector,
    ProductProjector,
    ProjectionSequence,
    HistorySum,
    LinearlyPositive,
]

_SPEC_TAGS = {
    Explicit: "explicit",
    Projector: "projector",
    ConstrainedProjector: "constrained_projector",
    SymmetrizedProjector: "symmetrized_projector",
    ProductProjector: "product_projector",
    ProjectionSequence: "sequence",
    HistorySum: "history_sum",
    LinearlyPositive: "linearly_positive",
}


def realize(spec: ExperienceSpec, state: Optional[State] = None, tol: float = DEFAULT_TOL) -> Operator:
    """Build the experience operator for a spec.

    A state is required only for LinearlyPositive, whose realization must be
    checked to have nonnegative expectation.
    """
    if isinstance(spec, Explicit):
        return spec.op
    if isinstance(spec, Projector):
        return spec.op
    if isinstance(spec, ConstrainedProjector):
        pc = spec.constraint.mat
        return Operator(pc @ spec.inner.mat @ pc)
    if isinstance(spec, SymmetrizedProjector):
        acc = np.zeros((spec.inner.dim, spec.inner.dim), dtype=complex)
        for g in spec.group:
            acc += g.mat @ spec.inner.mat @ g.mat.conj().T
        return Operator(acc / len(spec.group))
    if isinstance(spec, ProductProjector):
        for a, b in itertools.combinations(spec.components, 2):
            comm = a.mat @ b.mat - b.mat @ a.mat
            if np.max(np.abs(comm)) > tol:
                raise ValidationError("ProductProjector components do not commute within tol")
        mat = spec.components[0].mat
        for c in spec.components[1:]:
            mat = mat @ c.mat
        return Operator(mat)
    if isinstance(spec, (ProjectionSequence, HistorySum)):
        c = spec.class_operator().mat
        return Operator(c.conj().T @ c)
    if isinstance(spec, LinearlyPositive):
        if state is None:
            raise ValidationError("LinearlyPositive requires a state to verify nonnegativity")
        if state.dim != spec.class_op.dim:
            raise DimensionMismatch("state and class operator dims differ")
        re_c = (spec.class_op.mat + spec.class_op.mat.conj().T) / 2
        val = float(np.trace(state.mat @ re_c).real)
        if val < -tol:
            raise InvalidExperience(f"<Re C> = {val} is negative beyond tolerance")
        return Operator(re_c)
    raise ValidationError(f"unknown experience spec {type(spec).__name__}")


def spec_to_json(spec: ExperienceSpec) -> dict:
    tag = _SPEC_TAGS[type(spec)]
    if isinstance(spec, (Explicit, Projector)):
        return {"variant": tag, "op": spec.op.to_json()}
    if isinstance(spec, ConstrainedProjector):
        return {"variant": tag, "constraint": spec.constraint.to_json(), "inner": spec.inner.to_json()}
    if isinstance(spec, SymmetrizedProjector):
        return {"variant": tag, "inner": spec.inner.to_json(), "group": [g.to_json() for g in spec.group]}
    if isinstance(spec, ProductProjector):
        return {"variant": tag, "components": [c.to_json() for c in spec.components]}
    if isinstance(spec, ProjectionSequence):
        return {"variant": tag, "chain": [p.to_json() for p in spec.chain]}
    if isinstance(spec, HistorySum):
        return {"variant": tag, "sequences": [[p.to_json() for p in s.chain] for s in spec.sequences]}
    if isinstance(spec, LinearlyPositive):
        return {"variant": tag, "class_op": spec.class_op.to_json()}
    raise ValidationError(f"unknown experience spec {type(spec).__name__}")


def spec_from_json(data: dict) -> ExperienceSpec:
    variant = data["variant"]
    op = Operator.from_json
    if variant == "explicit":
        return Explicit(op(data["op"]))
    if variant == "projector":
        return Projector(op(data["op"]))
    if variant == "constrained_projector":
        return ConstrainedProjector(op(data["constraint"]), op(data["inner"]))
    if variant == "symmetrized_projector":
        return SymmetrizedProjector(op(data["inner"]), tuple(op(g) for g in data["group"]))
    if variant == "product_projector":
        return ProductProjector(tuple(op(c) for c in data["components"]))
    if variant == "sequence":
        return ProjectionSequence(tuple(op(p) for p in data["chain"]))
    if variant == "history_sum":
        return HistorySum(
            tuple(ProjectionSequence(tuple(op(p) for p in chain)) for chain in data["sequences"])
        )
    if variant == "linearly_positive":
        return LinearlyPositive(op(data["class_op"]))
    raise ValidationError(f"unknown spec variant {variant!r}")


@dataclass(frozen=True)
class ExperienceFamily:
    """Ordered labeled experience specs with positive prior weights."""

    entries: tuple[tuple[str, ExperienceSpec, float], ...]

    def __post_init__(self):
        entries = tuple((str(l), s, float(w)) for l, s, w in self.entries)
        if len(entries) == 0:
            raise ValidationError("family must have at least one entry")
        labels = [l for l, _, _ in entries]
        if len(set(labels)) != len(labels):
            raise ValidationError("family labels must be unique")
        for label, _, w in entries:
            if not (w > 0 and np.isfinite(w)):
                raise ValidationError(f"prior weight for {label!r} must be positive and finite")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _, _ in self.entries)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.entries])

    def spec_for(self, label: str) -> ExperienceSpec:
        for l, s, _ in self.entries:
            if l == label:
                return s
        raise KeyError(label)

    def realize_all(self, state: Optional[State] = None, tol: float = DEFAULT_TOL) -> list[Operator]:
        return [realize(s, state, tol) for _, s, _ in self.entries]


def awareness_operator(
    family: ExperienceFamily,
    subset: Optional[Callable[[str], bool]] = None,
    state: Optional[State] = None,
) -> Operator:
    """Weighted sum of experience operators over the labels selected by `subset`.

    This is the positive-operator-valued measure of the selected set: additive
    over disjoint subsets, positive semidefinite for positive specs.  The empty
    selection gives the zero operator.
    """
    if len(family) == 0:
        raise ValidationError("family is empty")
    ops = family.realize_all(state)
    dim = ops[0].dim
    acc = np.zeros((dim, dim), dtype=complex)
    for (label, _, weight), op in zip(family.entries, ops):
        if subset is None or subset(label):
            acc += weight * op.mat
    return Operator(acc)


def _vectorized(ops: list[Operator]) -> np.ndarray:
    cols = [op.mat.reshape(-1) for op in ops]
    return np.column_stack(cols)


def check_pairwise_independence(
    family: ExperienceFamily, tol: float = DEFAULT_TOL, state: Optional[State] = None
):
    """Detect proportional pairs E' = lambda E among the realized operators.

    Returns (ok, offending_pair); the test normalizes each vectorized operator
    and flags a pair whenever the smaller singular value of the stacked pair
    drops below tol.
    """
    if len(family) < 2:
        raise ValidationError("need at least two entries to compare")
    ops = family.realize_all(state)
    vecs = _vectorized(ops)
    norms = np.linalg.norm(vecs, axis=0)
    if np.any(norms == 0):
        idx = int(np.argmin(norms))
        return False, (family.labels[idx], family.labels[idx])
    unit = vecs / norms
    for i, j in itertools.combinations(range(len(family)), 2):
        s = np.linalg.svd(unit[:, [i, j]], compute_uv=False)
        if s[-1] <= max(tol, tol * s[0]):
            return False, (family.labels[i], family.labels[j])
    return True, None


def check_linear_independence(
    family: ExperienceFamily, tol: float = DEFAULT_TOL, state: Optional[State] = None
) -> bool:
    """True iff the whole realized set is linearly independent.

    At most dim^2 operators can be independent, so larger families always fail.
    """
    ops = family.realize_all(state)
    dim = ops[0].dim
    if len(ops) > dim * dim:
        return False
    vecs = _vectorized(ops)
    norms = np.linalg.norm(vecs, axis=0)
    if np.any(norms == 0):
        return False
    s = np.linalg.svd(vecs / norms, compute_uv=False)
    return bool(s[-1] > max(tol, tol * s[0]))


def check_commuting(family: ExperienceFamily, tol: float = DEFAULT_TOL) -> bool:
    ops = family.realize_all()
    for a, b in itertools.combinations(ops, 2):
        if np.max(np.abs(a.mat @ b.mat - b.mat @ a.mat)) > tol:
            return False
    return True


def check_orthogonal(family: ExperienceFamily, tol: float = DEFAULT_TOL) -> bool:
    ops = family.realize_all()
    for a, b in itertools.combinations(ops, 2):
        if np.max(np.abs(a.mat @ b.mat)) > tol:
            return False
    return True


@dataclass(frozen=True)
class PairDecoherence:
    """Decoherence diagnostics for one unordered pair of histories.

    weak_residual is Re <C^dag C'>; medium_residual is |<C^dag C'>|.  The
    consistency flag tests additivity of the pair measure and is None when the
    summed history is not homogeneous (so the condition does not apply); it is
    also None for identical class operators, where the residual is just the
    measure itself.  strongly_decoherent reports whether both histories admit
    projectors reproducing all expectations against the state, with the two
    projectors orthogonal.
    """

    label_a: str
    label_b: str
    applicable: bool
    weak_residual: float
    medium_residual: float
    homogeneous_sum: bool
    consistent: Optional[bool]
    strongly_decoherent: bool


def _chains_sum_homogeneous(spec_a, spec_b, tol: float) -> bool:
    # Sufficient condition: single chains of equal length differing in exactly
    # one slot, where the two differing projectors are orthogonal and sum to a
    # projector.  The summed history then collapses to a single chain.
    if not (isinstance(spec_a, ProjectionSequence) and isinstance(spec_b, ProjectionSequence)):
        return False
    if len(spec_a.chain) != len(spec_b.chain):
        return False
    diff = [
        k
        for k, (p, q) in enumerate(zip(spec_a.chain, spec_b.chain))
        if np.max(np.abs(p.mat - q.mat)) > tol
    ]
    if len(diff) != 1:
        return False
    p, q = spec_a.chain[diff[0]], spec_b.chain[diff[0]]
    if np.max(np.abs(p.mat @ q.mat)) > tol:
        return False
    return is_projector(p + q, max(tol, 1e-9))


def _strong_projector(c_mat: np.ndarray, state: State, tol: float):
    """Projector P with P rho = C rho if one exists, else None.

    On the support of rho the condition pins P to map eigenvector v to C v, so
    a feasible P is the orthogonal projector onto the image of the support;
    feasibility reduces to a Gram consistency check solved in least squares.
    """
    evals, evecs = np.linalg.eigh(state.mat)
    support = evals > 1e-12
    v = evecs[:, support]
    w = c_mat @ v
    if np.max(np.abs(w)) <= tol:
        return np.zeros_like(c_mat)
    gram_residual = w.conj().T @ (v - w)
    if np.max(np.abs(gram_residual)) > tol:
        return None
    u, s, _ = np.linalg.svd(w, full_matrices=False)
    cols = u[:, s > max(tol, 1e-12)]
    proj = cols @ cols.conj().T
    if np.max(np.abs(proj @ v - w)) > max(tol, 1e-9):
        return None
    return proj


def decoherence_report(
    family: ExperienceFamily, state: State, tol: float = DEFAULT_TOL
) -> list[PairDecoherence]:
    """Pairwise decoherence diagnostics for a family of history specs."""
    specs = []
    for label, spec, _ in family.entries:
        if not isinstance(spec, (ProjectionSequence, HistorySum)):
            raise ValidationError(f"entry {label!r} is not a history spec")
        specs.append((label, spec))
    class_ops = {label: spec.class_operator().mat for label, spec in specs}
    for mat in class_ops.values():
        if mat.shape[0] != state.dim:
            raise DimensionMismatch("history and state dims differ")

    strong = {
        label: _strong_projector(mat, state, tol) for label, mat in class_ops.items()
    }
    records = []
    for (la, sa), (lb, sb) in itertools.combinations(specs, 2):
        ca, cb = class_ops[la], class_ops[lb]
        cross = complex(np.trace(state.mat @ ca.conj().T @ cb))
        identical = np.max(np.abs(ca - cb)) <= tol
        homog = _chains_sum_homogeneous(sa, sb, tol)
        consistent = None
        if not identical and homog:
            consistent = abs(2 * cross.real) <= tol
        pa, pb = strong[la], strong[lb]
        strongly = (
            pa is not None
            and pb is not None
            and np.max(np.abs(pa @ pb)) <= max(tol, 1e-9)
        )
        records.append(
            PairDecoherence(
                label_a=la,
                label_b=lb,
                applicable=not identical,
                weak_residual=cross.real,
                medium_residual=abs(cross),
                homogeneous_sum=homog,
                consistent=consistent,
                strongly_decoherent=bool(strongly),
            )
        )
    return records


def normalization_check(spec: ExperienceSpec, mode: str, tol: float = DEFAULT_TOL) -> bool:
    """Check a normalization convention on the realized operator.

    constant_max: largest eigenvalue equals 1; unit: trace equals 1;
    projection: Tr E equals Tr E^2.
    """
    if isinstance(spec, LinearlyPositive):
        raise ValidationError("normalization checks need a state-free realization")
    op = realize(spec)
    herm = (op.mat + op.mat.conj().T) / 2
    if mode == "constant_max":
        return bool(abs(np.max(np.linalg.eigvalsh(herm)) - 1.0) <= tol)
    if mode == "unit":
        return bool(abs(np.trace(op.mat).real - 1.0) <= tol and abs(np.trace(op.mat).imag) <= tol)
    if mode == "projection":
        return bool(abs(np.trace(op.mat) - np.trace(op.mat @ op.mat)) <= tol)
    raise ValidationError(f"unknown normalization mode {mode!r}")
