"""Perception measures, typicality statistics, and relative-state quantities.

A perception space is a finite set of labeled points with positive prior
weights; continuum models are represented on quadrature grids (trapezoid rule)
so that all integrals become fixed-order sums.  A measure profile attaches a
nonnegative density m(p) to each point; every statistic here is a ratio of
weighted sums over the profile.

Tie semantics: the "at most as dense" set uses <= and the "at least as dense"
set uses >=, so plateaus of equal density inflate both sides.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidExperience,
    ValidationError,
    ZeroMeasure,
)
from .hypotheses import ExperienceFamily, ExperienceSpec, realize
from .operators import DEFAULT_TOL, Operator, State, expectation


@dataclass(frozen=True)
class PerceptionSpace:
    """Finite point set with per-point positive prior weights.

    Discrete spaces carry opaque string labels; grid spaces carry the (N, k)
    coordinate array and axis names instead (labels stay None so large grids
    cost no label storage).
    """

    weights: np.ndarray
    labels: Optional[tuple[str, ...]] = None
    points: Optional[np.ndarray] = None
    axes: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) == 0:
            raise ValidationError("weights must be a nonempty one-dimensional array")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("prior weights must be positive and finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(w):
                raise ValidationError("need one weight per label")
            object.__setattr__(self, "labels", labels)
        if self.points is not None:
            pts = np.asarray(self.points, dtype=float)
            if pts.ndim != 2 or pts.shape[0] != len(w):
                raise ValidationError("points must be an (N, k) array aligned with weights")
            pts.setflags(write=False)
            object.__setattr__(self, "points", pts)
        if self.labels is None and self.points is None:
            raise ValidationError("a space needs labels or grid points")

    def __len__(self) -> int:
        return len(self.weights)

    @classmethod
    def discrete(cls, labels: Sequence[str], weights=None) -> "PerceptionSpace":
        labels = tuple(str(l) for l in labels)
        if weights is None:
            weights = np.ones(len(labels))
        return cls(weights=weights, labels=labels)

    @classmethod
    def grid(
        cls,
        axes: dict[str, np.ndarray],
        prior_density: Optional[Callable[..., np.ndarray]] = None,
    ) -> "PerceptionSpace":
        """Cartesian product of strictly increasing axes with trapezoid weights.

        prior_density, if given, is evaluated vectorized on the coordinate
        columns and multiplies the quadrature weights.
        """
        names = tuple(axes.keys())
        arrays = [np.asarray(a, dtype=float) for a in axes.values()]
        for name, arr in zip(names, arrays):
            if arr.ndim != 1 or len(arr) < 2:
                raise ValidationError(f"axis {name!r} needs at least two points")
            if not np.all(np.diff(arr) > 0):
                raise ValidationError(f"axis {name!r} must be strictly increasing")
        axis_weights = []
        for arr in arrays:
            w = np.zeros_like(arr)
            w[:-1] += np.diff(arr) / 2
            w[1:] += np.diff(arr) / 2
            axis_weights.append(w)
        mesh = np.meshgrid(*arrays, indexing="ij")
        pts = np.column_stack([m.reshape(-1) for m in mesh])
        wmesh = np.meshgrid(*axis_weights, indexing="ij")
        weights = np.ones(pts.shape[0])
        for wm in wmesh:
            weights = weights * wm.reshape(-1)
        if prior_density is not None:
            dens = np.asarray(prior_density(*[pts[:, i] for i in range(pts.shape[1])]), dtype=float)
            if dens.shape != (pts.shape[0],):
                raise ValidationError("prior_density must return one value per point")
            if np.any(dens <= 0) or not np.all(np.isfinite(dens)):
                raise ValidationError("prior density must be positive and finite")
            weights = weights * dens
        return cls(weights=weights, points=pts, axes=names)

    def index_of(self, label: str) -> int:
        if self.labels is None:
            raise KeyError(f"grid space has no labels; use integer indices ({label!r})")
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None


@dataclass(frozen=True)
class MeasureProfile:
    """Per-point measure density over a perception space.

    total_measure is the weighted sum of the density; the summation order is
    fixed (index-ascending pairwise) so totals are reproducible.
    """

    space: PerceptionSpace
    density: np.ndarray
    total_measure: float

    def __post_init__(self):
        m = np.asarray(self.density, dtype=float)
        if m.shape != (len(self.space),):
            raise ValidationError("density must have one value per point")
        if not np.all(np.isfinite(m)):
            raise ValidationError("density values must be finite")
        if np.any(m < 0):
            raise ValidationError("density values must be nonnegative")
        m.setflags(write=False)
        object.__setattr__(self, "density", m)
        total = float(np.sum(m * self.space.weights))
        if abs(total - self.total_measure) > 1e-10 * max(1.0, abs(total)):
            raise ValidationError("total_measure inconsistent with density and weights")

    @property
    def point_measures(self) -> np.ndarray:
        return self.density * self.space.weights

    def resolve(self, p) -> int:
        """Accept an integer index or a label and return the index."""
        if isinstance(p, (int, np.integer)):
            if not 0 <= int(p) < len(self.space):
                raise ValidationError(f"index {p} out of range")
            return int(p)
        return self.space.index_of(p)


def profile_from_density(space: PerceptionSpace, density, tol: float = DEFAULT_TOL) -> MeasureProfile:
    """Build a profile from raw density values, clamping tiny negatives to 0."""
    m = np.asarray(density, dtype=float).copy()
    if np.any(m < -tol):
        raise InvalidExperience("density below the negativity tolerance")
    np.clip(m, 0.0, None, out=m)
    total = float(np.sum(m * space.weights))
    return MeasureProfile(space=space, density=m, total_measure=total)


def measure_density(state: State, spec: ExperienceSpec, tol: float = DEFAULT_TOL) -> float:
    """Expectation of the experience operator in the state, clamped at -tol."""
    val = expectation(state, realize(spec, state, tol))
    if abs(val.imag) > tol:
        raise InvalidExperience(f"measure density has imaginary part {val.imag}")
    if val.real < -tol:
        raise InvalidExperience(f"measure density {val.real} below -tol")
    return max(val.real, 0.0)


def build_profile(
    state: State,
    family: ExperienceFamily,
    space: Optional[PerceptionSpace] = None,
    tol: float = DEFAULT_TOL,
) -> MeasureProfile:
    """Evaluate a family's densities on a space (default: the family's own labels).

    When a space is given, its labels must all be covered by the family (for
    unlabeled grid spaces the family entries are matched to grid points in
    order); the space supplies the prior weights.  Without one, the family's
    labels and prior weights define a discrete space.
    """
    if space is None:
        space = PerceptionSpace.discrete(family.labels, family.weights)
        density = [measure_density(state, spec, tol) for _, spec, _ in family.entries]
    elif space.labels is None:
        if len(family) != len(space):
            raise ValidationError("family must cover the grid points in order")
        density = [measure_density(state, spec, tol) for _, spec, _ in family.entries]
    else:
        density = [measure_density(state, family.spec_for(l), tol) for l in space.labels]
    return profile_from_density(space, np.array(density), tol)


def _selection_mask(profile: MeasureProfile, predicate) -> np.ndarray:
    if predicate is None:
        return np.ones(len(profile.space), dtype=bool)
    if isinstance(predicate, np.ndarray):
        mask = np.asarray(predicate, dtype=bool)
        if mask.shape != (len(profile.space),):
            raise ValidationError("mask length must match the space")
        return mask
    space = profile.space
    if space.points is not None:
        return np.fromiter(
            (bool(predicate(tuple(pt))) for pt in space.points), dtype=bool, count=len(space)
        )
    return np.fromiter((bool(predicate(l)) for l in space.labels), dtype=bool, count=len(space))


def set_measure(profile: MeasureProfile, predicate=None) -> float:
    """Measure of the selected subset: sum of density times prior weight.

    predicate receives the label (discrete spaces) or the coordinate tuple
    (grid spaces); a boolean mask is also accepted.  None selects everything.
    """
    mask = _selection_mask(profile, predicate)
    return float(np.sum(profile.point_measures[mask]))


def conditional_probability(profile: MeasureProfile, condition, event) -> float:
    """mu(S1 and S2) / mu(S1) for predicate- or mask-defined sets."""
    cond_mask = _selection_mask(profile, condition)
    event_mask = _selection_mask(profile, event)
    denom = float(np.sum(profile.point_measures[cond_mask]))
    if denom <= 0:
        raise ZeroMeasure("conditioning set has zero measure")
    num = float(np.sum(profile.point_measures[cond_mask & event_mask]))
    return min(max(num / denom, 0.0), 1.0)


def _check_total(profile: MeasureProfile) -> float:
    total = profile.total_measure
    if not (total > 0 and np.isfinite(total)):
        raise ZeroMeasure("typicality needs a positive finite total measure")
    return total


def typicality(profile: MeasureProfile, p) -> float:
    """Measure-weighted fraction of points at most as dense as p (ties included)."""
    total = _check_total(profile)
    idx = profile.resolve(p)
    mask = profile.density <= profile.density[idx]
    return float(np.sum(profile.point_measures[mask]) / total)


def reversed_typicality(profile: MeasureProfile, p) -> float:
    """Measure-weighted fraction of points at least as dense as p (ties included)."""
    total = _check_total(profile)
    idx = profile.resolve(p)
    mask = profile.density >= profile.density[idx]
    return float(np.sum(profile.point_measures[mask]) / total)


def typicality_curves(profile: MeasureProfile):
    """Arrays (T, T_r, T_d) of the three typicalities at every point.

    Computed by sorting once and accumulating tied groups, so plateaus get the
    full two-sided counting semantics.
    """
    total = _check_total(profile)
    m = profile.density
    mu = profile.point_measures

    def _leq_weights(values: np.ndarray) -> np.ndarray:
        # weighted measure of {value' <= value}, ties collapsed via unique
        uniq, inverse = np.unique(values, return_inverse=True)
        sums = np.zeros(len(uniq))
        np.add.at(sums, inverse, mu)
        return np.cumsum(sums)[inverse]

    t = _leq_weights(m) / total
    # mu{m' >= m} = total - mu{m' < m} = total - (mu{m' <= m} - mu{m' == m})
    uniq, inverse = np.unique(m, return_inverse=True)
    sums = np.zeros(len(uniq))
    np.add.at(sums, inverse, mu)
    t_r = 1.0 - t + sums[inverse] / total
    t_d = _leq_weights(np.minimum(t, t_r)) / total
    return t, t_r, t_d


def dual_typicality(profile: MeasureProfile, p) -> float:
    """Fraction of points whose min(T, T_r) is at most that of p."""
    idx = profile.resolve(p)
    t, t_r, t_d = typicality_curves(profile)
    return float(t_d[idx])


def typicality_of_density(profile: MeasureProfile, density_value: float) -> float:
    """Typicality evaluated at a density value rather than a stored point."""
    total = _check_total(profile)
    mask = profile.density <= density_value
    return float(np.sum(profile.point_measures[mask]) / total)


def restricted_typicality(profile: MeasureProfile, p, predicate) -> float:
    """Typicality computed within a subset S containing p."""
    idx = profile.resolve(p)
    mask = _selection_mask(profile, predicate)
    if not mask[idx]:
        raise ValidationError("point p must belong to the restricting set")
    denom = float(np.sum(profile.point_measures[mask]))
    if denom <= 0:
        raise ZeroMeasure("restricting set has zero measure")
    sub = mask & (profile.density <= profile.density[idx])
    return float(np.sum(profile.point_measures[sub]) / denom)


def prior_measure(
    family: ExperienceFamily,
    mode: str = "counting",
    prior_state: Optional[State] = None,
    space: Optional[PerceptionSpace] = None,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Per-point prior weights under a chosen convention.

    counting: every point weighs 1.  trace: Tr E(p).  prior_state: expectation
    of E(p) in a fixed reference state.  riemannian: sqrt(det g) from central
    finite differences of the operator family across grid neighbors; grid
    points where the metric degenerates (det <= tol) come back as NaN.
    """
    ops = family.realize_all()
    if mode == "counting":
        return np.ones(len(family))
    if mode == "trace":
        return np.array([float(np.trace(op.mat).real) for op in ops])
    if mode == "prior_state":
        if prior_state is None:
            raise ValidationError("prior_state mode needs a reference state")
        return np.array([float(expectation(prior_state, op).real) for op in ops])
    if mode == "riemannian":
        if space is None or space.points is None:
            raise ValidationError("riemannian mode needs a grid space")
        if len(space) != len(family):
            raise ValidationError("family must cover the grid points in order")
        return _riemannian_weights(ops, space, tol)
    raise ValidationError(f"unknown prior-measure mode {mode!r}")


def _riemannian_weights(ops: list[Operator], space: PerceptionSpace, tol: float) -> np.ndarray:
    pts = space.points
    ndim = pts.shape[1]
    axes_vals = [np.unique(pts[:, i]) for i in range(ndim)]
    shape = tuple(len(a) for a in axes_vals)
    if int(np.prod(shape)) != len(ops):
        raise ValidationError("grid is not a full cartesian product")
    mats = np.stack([op.mat for op in ops]).reshape(shape + ops[0].mat.shape)
    # np.gradient: central differences inside, one-sided at the boundary
    diffs = [
        np.gradient(mats, axes_vals[axis], axis=axis, edge_order=1)
        for axis in range(ndim)
    ]
    n_points = len(ops)
    flat_diffs = [d.reshape((n_points,) + ops[0].mat.shape) for d in diffs]
    weights = np.empty(n_points)
    for i in range(n_points):
        g = np.empty((ndim, ndim))
        for a in range(ndim):
            for b in range(a, ndim):
                val = np.trace(flat_diffs[a][i].conj().T @ flat_diffs[b][i]).real
                g[a, b] = val
                g[b, a] = val
        det = float(np.linalg.det(g))
        weights[i] = np.sqrt(det) if det > tol else np.nan
    return weights


def relative_state(spec: ExperienceSpec, pure_state, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Normalized E|psi>; errors out when the perception has no support on psi."""
    psi = np.asarray(pure_state, dtype=complex).reshape(-1)
    op = realize(spec)
    if op.dim != psi.shape[0]:
        raise DimensionMismatch("operator and state vector dims differ")
    out = op.mat @ psi
    norm = float(np.linalg.norm(out))
    if norm <= np.sqrt(tol):
        raise ZeroMeasure("experience operator annihilates the state")
    return out / norm


def relative_density(spec: ExperienceSpec, state: State, tol: float = DEFAULT_TOL) -> State:
    """Normalized E rho E as the relative density matrix of the perception."""
    op = realize(spec, state)
    if op.dim != state.dim:
        raise DimensionMismatch("operator and state dims differ")
    mat = op.mat @ state.mat @ op.mat.conj().T
    norm = float(np.trace(mat).real)
    if norm <= tol:
        raise ZeroMeasure("perception has zero measure in this state")
    return State(mat / norm)


def overlap_fraction(
    spec_a: ExperienceSpec, spec_b: ExperienceSpec, state: State, tol: float = DEFAULT_TOL
) -> float:
    """<EE'><E'E> / (<EE><E'E'>), the squared relative-state overlap for projectors."""
    ea = realize(spec_a, state).mat
    eb = realize(spec_b, state).mat
    aa = float(np.trace(state.mat @ ea @ ea).real)
    bb = float(np.trace(state.mat @ eb @ eb).real)
    if aa <= tol or bb <= tol:
        raise ZeroMeasure("overlap fraction needs both perceptions to have support")
    ab = complex(np.trace(state.mat @ ea @ eb))
    ba = complex(np.trace(state.mat @ eb @ ea))
    return float((ab * ba).real / (aa * bb))


def profile_rows(profile: MeasureProfile) -> list[dict]:
    """Row dicts (coordinates/label, weight, density, T, T_r, T_d) for export."""
    t, t_r, t_d = typicality_curves(profile)
    rows = []
    space = profile.space
    for i in range(len(space)):
        label = space.labels[i] if space.labels is not None else f"p{i}"
        row: dict = {"label": label}
        if space.points is not None:
            for k, name in enumerate(space.axes or ()):
                row[name] = float(space.points[i, k])
        row.update(
            weight=float(space.weights[i]),
            density=float(profile.density[i]),
            typicality=float(t[i]),
            reversed_typicality=float(t_r[i]),
            dual_typicality=float(t_d[i]),
        )
        rows.append(row)
    return rows


def profile_to_csv(profile: MeasureProfile, path) -> None:
    rows = profile_rows(profile)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def profile_to_json(profile: MeasureProfile) -> dict:
    return {
        "total_measure": profile.total_measure,
        "points": profile_rows(profile),
    }
