"""Worked two-state models: ball, circle, and sphere perception families,
two-step history diagnostics, and the paired-spin / cat measures.

Angles are radians throughout.  Monte Carlo routines take explicit seeds,
derive shard seeds as seed + shard index, and merge shard results in index
order, so totals are reproducible bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateInput, ValidationError
from .hypotheses import ExperienceFamily, Explicit, ProjectionSequence, realize
from .measures import measure_density
from .operators import (
    Operator,
    ParamPositiveOp,
    State,
    bloch_projector,
    expectation,
    from_params,
    identity,
    tensor_product,
)


@dataclass(frozen=True)
class Direction:
    """A point on the unit two-sphere given by polar and azimuthal angles."""

    polar: float
    azimuth: float

    def __post_init__(self):
        if not (0.0 <= self.polar <= math.pi):
            raise ValidationError("polar angle must lie in [0, pi]")
        if not (math.isfinite(self.polar) and math.isfinite(self.azimuth)):
            raise ValidationError("angles must be finite")

    def unit_vector(self) -> np.ndarray:
        s = math.sin(self.polar)
        return np.array(
            [s * math.cos(self.azimuth), s * math.sin(self.azimuth), math.cos(self.polar)]
        )


# ---------------------------------------------------------------------------
# ball model: three-parameter continuum of positive operators on a qubit


def ball_experience(u: float, v: float, w: float) -> Operator:
    """Experience operator at ball coordinates, projection-normalized."""
    r2 = u * u + v * v + w * w
    if r2 > 1.0 + 1e-12:
        raise ValidationError("ball coordinates must satisfy u^2+v^2+w^2 <= 1")
    t = 1.0 / (1.0 + r2)
    return from_params(ParamPositiveOp(t=t, x=t * u, y=t * v, z=t * w))


def ball_prior_weight(u: float, v: float, w: float) -> float:
    """Prior density sqrt(8)/(1+u^2+v^2+w^2)^3 from the operator-family metric."""
    r2 = u * u + v * v + w * w
    if r2 > 1.0 + 1e-12:
        raise ValidationError("ball coordinates must satisfy u^2+v^2+w^2 <= 1")
    return math.sqrt(8.0) / (1.0 + r2) ** 3


def ball_model_density(state: State, u: float, v: float, w: float) -> float:
    """Measure density of the ball-model perception (u, v, w) in the state.

    For the spin-up pure state this reduces to (1+w)/(1+u^2+v^2+w^2).
    """
    return measure_density(state, Explicit(ball_experience(u, v, w)))


# ---------------------------------------------------------------------------
# circle model: projectors around the equator, pure state at polar angle theta


def _principal(phi: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    out = math.remainder(phi, 2 * math.pi)
    if out <= -math.pi:
        out = math.pi
    return out


@dataclass(frozen=True)
class CircleResult:
    density: float
    typicality: float
    reversed_typicality: float
    dual_typicality: float


def circle_model(theta: float, phi: float) -> CircleResult:
    """Closed-form density and typicalities for the equatorial-circle family.

    Requires sin(theta) > 0 so that the density varies around the circle.
    """
    if math.sin(theta) <= 0:
        raise DegenerateInput("circle model needs sin(theta) > 0")
    p = _principal(phi)
    density = 0.5 * (1.0 + math.sin(theta) * math.cos(p))
    t = 1.0 - abs(p + math.sin(theta) * math.sin(p)) / math.pi
    return CircleResult(
        density=density,
        typicality=t,
        reversed_typicality=1.0 - t,
        dual_typicality=1.0 - abs(1.0 - 2.0 * t),
    )


def circle_density_array(theta: float, phis: np.ndarray) -> np.ndarray:
    """Vectorized circle-model densities, for building grid profiles."""
    if math.sin(theta) <= 0:
        raise DegenerateInput("circle model needs sin(theta) > 0")
    return 0.5 * (1.0 + math.sin(theta) * np.cos(phis))


@dataclass(frozen=True)
class SphereResult:
    density: float
    typicality: float
    cold_probability: float


def sphere_model(theta: float, vartheta: float, varphi: float) -> SphereResult:
    """Closed-form results for the full-sphere projector family.

    psi is the angle between the state direction (theta, 0) and the perception
    direction; the density is cos^2(psi/2), the typicality its square, and the
    cold probability is the chance that a random perception falls on the
    0 < polar < pi/2 hemisphere.
    """
    cos_psi = math.cos(theta) * math.cos(vartheta) + math.sin(theta) * math.sin(
        vartheta
    ) * math.cos(varphi)
    density = 0.5 * (1.0 + cos_psi)
    return SphereResult(
        density=density,
        typicality=density * density,
        cold_probability=(2.0 + math.cos(theta)) / 4.0,
    )


# ---------------------------------------------------------------------------
# two-step histories on a qubit


def two_step_family(q: Operator, r: Operator) -> ExperienceFamily:
    """The four ordered two-step histories built from Q/I-Q then R/I-R.

    Chains are stored last-applied-first, so ("r", "q") realizes to Q R Q.
    The four experience operators always sum to the identity.
    """
    i2 = identity(2)
    chains = {
        "1": (r, q),
        "2": (r, i2 - q),
        "3": (i2 - r, q),
        "4": (i2 - r, i2 - q),
    }
    return ExperienceFamily(
        tuple((label, ProjectionSequence(chain), 1.0) for label, chain in chains.items())
    )


@dataclass(frozen=True)
class TwoStepReport:
    """Decoherence-condition values for one two-step configuration.

    weak_residual is the single real consistency combination
    2 Re <(QR - QRQ)>; medium_residual is the modulus of the complex one;
    linearly_positive reports the interval condition
    max(0, <Q+R-I>) <= Re <QR> <= min(<Q>, <R>).
    """

    weak_residual: float
    medium_residual: float
    linearly_positive: bool
    measures: tuple[float, float, float, float]

    def __post_init__(self):
        total = sum(self.measures)
        if min(self.measures) < -1e-10 or abs(total - 1.0) > 1e-9:
            raise ValidationError("history measures must be nonnegative and sum to 1")


def two_step_analysis(
    state_dir: Direction,
    q_dir: Direction,
    r_dir: Direction,
    state: Optional[State] = None,
) -> TwoStepReport:
    """Evaluate the two-step decoherence conditions for given directions."""
    q = bloch_projector(q_dir.polar, q_dir.azimuth)
    r = bloch_projector(r_dir.polar, r_dir.azimuth)
    rho = state if state is not None else State.from_bloch(state_dir.polar, state_dir.azimuth)

    family = two_step_family(q, r)
    measures = tuple(
        float(expectation(rho, realize(spec)).real) for _, spec, _ in family.entries
    )

    qr = q.mat @ r.mat
    qrq = qr @ q.mat
    cross = complex(np.trace(rho.mat @ (qr - qrq)))

    exp_q = float(expectation(rho, q).real)
    exp_r = float(expectation(rho, r).real)
    re_qr = float(np.trace(rho.mat @ qr).real)
    eps = 1e-12
    linpos = max(0.0, exp_q + exp_r - 1.0) <= re_qr + eps and re_qr <= min(exp_q, exp_r) + eps

    return TwoStepReport(
        weak_residual=2.0 * cross.real,
        medium_residual=abs(cross),
        linearly_positive=bool(linpos),
        measures=measures,  # type: ignore[arg-type]
    )


def _sample_directions(rng: np.random.Generator, count: int):
    """Uniform sphere samples via uniform azimuth and uniform cos(polar)."""
    cos_t = rng.uniform(-1.0, 1.0, count)
    phi = rng.uniform(0.0, 2.0 * math.pi, count)
    sin_t = np.sqrt(1.0 - cos_t * cos_t)
    return np.column_stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t])


def _linpos_mask(a: np.ndarray, qs: np.ndarray, rs: np.ndarray) -> np.ndarray:
    """Vectorized interval condition on Bloch vectors (state a, samples qs/rs)."""
    aq = qs @ a
    ar = rs @ a
    qr = np.einsum("ij,ij->i", qs, rs)
    mid = 0.25 * (1.0 + qr + aq + ar)
    lhs = np.maximum(0.0, 0.5 * (aq + ar))
    rhs = np.minimum(0.5 * (1.0 + aq), 0.5 * (1.0 + ar))
    eps = 1e-12
    return (lhs <= mid + eps) & (mid <= rhs + eps)


@dataclass(frozen=True)
class MonteCarloFraction:
    fraction: float
    hits: int
    samples: int
    seed: int
    shard_count: int

    def provenance(self) -> dict:
        return {"seed": self.seed, "samples": self.samples, "shardCount": self.shard_count}


def linear_positivity_fraction(
    samples: int,
    seed: int,
    shards: int = 1,
    state_dir: Direction = Direction(0.0, 0.0),
) -> MonteCarloFraction:
    """Fraction of uniformly sampled (Q, R) direction pairs that keep the
    two-step histories linearly positive, for a fixed state direction."""
    if samples < 1:
        raise ValidationError("need at least one sample")
    if shards < 1:
        raise ValidationError("need at least one shard")
    a = state_dir.unit_vector()
    base = samples // shards
    sizes = [base + (1 if i < samples % shards else 0) for i in range(shards)]
    hits = 0
    for index, size in enumerate(sizes):
        if size == 0:
            continue
        rng = np.random.default_rng(seed + index)
        qs = _sample_directions(rng, size)
        rs = _sample_directions(rng, size)
        hits += int(np.count_nonzero(_linpos_mask(a, qs, rs)))
    return MonteCarloFraction(
        fraction=hits / samples, hits=hits, samples=samples, seed=seed, shard_count=shards
    )


# ---------------------------------------------------------------------------
# spherical-triangle geometry of the two-step conditions


def spherical_triangle_solid_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Solid angle of the spherical triangle with unit-vector vertices.

    Interior corner angles come from the tangents of the great-circle arcs at
    each vertex; the excess of their sum over pi is the area.  Broadcasts over
    leading axes.
    """

    def corner(p, q, r):
        tq = q - np.sum(p * q, axis=-1, keepdims=True) * p
        tr = r - np.sum(p * r, axis=-1, keepdims=True) * p
        cross = np.cross(tq, tr)
        sin_a = np.linalg.norm(cross, axis=-1)
        cos_a = np.sum(tq * tr, axis=-1)
        return np.arctan2(sin_a, cos_a)

    return corner(a, b, c) + corner(b, c, a) + corner(c, a, b) - math.pi


def _eight_triangle_areas(s: np.ndarray, q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Areas of the eight regions cut by the three great circles through
    each pair of +-s, +-q, +-r; one region per sign choice of the vertices."""
    signs = np.array(
        [(es, eq, er) for es in (1, -1) for eq in (1, -1) for er in (1, -1)], dtype=float
    )
    areas = [
        spherical_triangle_solid_angle(es * s, eq * q, er * r) for es, eq, er in signs
    ]
    return np.stack(areas, axis=-1)


@dataclass(frozen=True)
class TriangleReport:
    status: str  # "ok" or "degenerate"
    inequality_holds: Optional[bool]
    all_triangles_sub_pi: Optional[bool]
    areas: Optional[tuple[float, ...]]


def triangle_equivalence(
    state_dir: Direction, q_dir: Direction, r_dir: Direction, cutoff: float = 1e-9
) -> TriangleReport:
    """Compare the interval condition against its spherical-triangle picture.

    The three great circles through the state, Q, and R directions cut the
    sphere into eight triangles; the interval condition holds exactly when no
    triangle exceeds solid angle pi.  Nearly parallel or antipodal direction
    pairs are reported as degenerate and skipped.
    """
    s, q, r = state_dir.unit_vector(), q_dir.unit_vector(), r_dir.unit_vector()
    for x, y in ((s, q), (s, r), (q, r)):
        angle = math.atan2(float(np.linalg.norm(np.cross(x, y))), float(np.dot(x, y)))
        if angle < cutoff or math.pi - angle < cutoff:
            return TriangleReport("degenerate", None, None, None)
    areas = _eight_triangle_areas(s, q, r)
    all_sub_pi = bool(np.all(areas <= math.pi + 1e-9))
    linpos = bool(_linpos_mask(s, q[np.newaxis, :], r[np.newaxis, :])[0])
    return TriangleReport("ok", linpos, all_sub_pi, tuple(float(a) for a in areas))


# ---------------------------------------------------------------------------
# paired spins and the divided cat


def _computational_projectors():
    p0 = Operator(np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex))
    p1 = Operator(np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex))
    return p0, p1


def _plus_minus_projectors():
    plus = Operator(np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex))
    minus = Operator(np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex))
    return plus, minus


@dataclass(frozen=True)
class EprCatReport:
    """Measures for the paired-spin experiment and the divided-cat sector.

    Region-A measures are independent of the far detector angle; the joint
    same-spin and opposite-spin measures have ratio tan^2(theta/2).  The cat
    sector is two (or n) perfectly correlated binary factors: in the
    alive/dead coupling no perception sees head and body disagree, while in
    the rotated +/- coupling only a 2^(1-n) fraction of the measure is free
    of such disagreements.
    """

    theta: float
    mu_up_a: float
    mu_down_a: float
    mu_up_up: float
    mu_up_down: float
    mu_down_up: float
    mu_down_down: float
    confused_original: float

    def unconfused_fraction_alternative(self, parts: int = 2) -> float:
        return _unconfused_fraction(parts)


def _unconfused_fraction(parts: int) -> float:
    if parts < 1 or int(parts) != parts:
        raise ValidationError("the cat must be divided into a positive number of parts")
    alive = np.zeros(2**parts)
    alive[0] = 1.0
    dead = np.zeros(2**parts)
    dead[-1] = 1.0
    rho = 0.5 * (np.outer(alive, alive) + np.outer(dead, dead))
    plus, minus = _plus_minus_projectors()
    total = 0.0
    unconfused = 0.0
    for pattern in range(2**parts):
        proj = np.eye(1)
        for bit_index in range(parts):
            bit = (pattern >> (parts - 1 - bit_index)) & 1
            proj = np.kron(proj, (minus if bit else plus).mat.real)
        mu = float(np.trace(rho @ proj))
        total += mu
        if pattern == 0 or pattern == 2**parts - 1:
            unconfused += mu
    return unconfused / total


def epr_cat_model(theta: float) -> EprCatReport:
    """Build the singlet experiment at detector angle theta and report measures."""
    if not (0.0 <= theta <= math.pi):
        raise ValidationError("theta must lie in [0, pi]")
    up = np.array([1.0, 0.0], dtype=complex)
    down = np.array([0.0, 1.0], dtype=complex)
    singlet = (np.kron(up, down) - np.kron(down, up)) / math.sqrt(2)
    rho = State.pure(singlet)

    p_up_a, p_down_a = _computational_projectors()
    i2 = identity(2)
    a_up = tensor_product(p_up_a, i2)
    a_down = tensor_product(p_down_a, i2)

    b_up = bloch_projector(theta, 0.0)
    b_down = identity(2) - b_up

    def mu(op: Operator) -> float:
        return float(expectation(rho, op).real)

    report = EprCatReport(
        theta=theta,
        mu_up_a=mu(a_up),
        mu_down_a=mu(a_down),
        mu_up_up=mu(tensor_product(p_up_a, b_up)),
        mu_up_down=mu(tensor_product(p_up_a, b_down)),
        mu_down_up=mu(tensor_product(p_down_a, b_up)),
        mu_down_down=mu(tensor_product(p_down_a, b_down)),
        confused_original=_confused_original(),
    )
    return report


def _confused_original() -> float:
    """Measure of perceptions seeing head and body liveliness disagree when
    perceptions couple to the alive/dead states themselves."""
    p0, p1 = _computational_projectors()
    # spin (x) head (x) body; spin up pairs with both alive, down with both dead
    up_term = np.kron(p0.mat, np.kron(p0.mat, p0.mat))
    down_term = np.kron(p1.mat, np.kron(p1.mat, p1.mat))
    rho = 0.5 * (up_term + down_term)
    i2 = np.eye(2, dtype=complex)
    head_alive_body_dead = np.kron(i2, np.kron(p0.mat, p1.mat))
    head_dead_body_alive = np.kron(i2, np.kron(p1.mat, p0.mat))
    return float(np.trace(rho @ (head_alive_body_dead + head_dead_body_alive)).real)
