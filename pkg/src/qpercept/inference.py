"""Statistics for power-law measure exponents and Bayesian theory comparison.

The exponent family raises every measure density to a power n (n = 1 is the
unmodified theory, and 0**0 is taken as 1 so n = 0 degenerates to counting).
For a unit gaussian density profile the typicalities, posteriors, and moments
below have closed forms; every closed form is cross-checkable by quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import DegenerateInput, ValidationError, ZeroMeasure


def erf(x: float) -> float:
    """Error function (delegates to the C library implementation)."""
    return math.erf(x)


def erfc(x: float) -> float:
    """Complementary error function 1 - erf(x)."""
    return math.erfc(x)


@dataclass(frozen=True)
class PowerLawModel:
    """Measure-density transform m -> m**n; only the power law is built in.

    A caller-supplied scalar transform may replace the power law through
    `transform`; it must map nonnegative reals to nonnegative reals.
    """

    exponent: float = 1.0
    transform: Optional[Callable[[float], float]] = None

    def apply(self, m: float) -> float:
        if self.transform is not None:
            out = float(self.transform(m))
        elif m == 0.0 and self.exponent == 0.0:
            out = 1.0
        else:
            out = float(m**self.exponent)
        if out < 0 or not np.isfinite(out):
            raise ValidationError("transformed density must be finite and nonnegative")
        return out


@dataclass(frozen=True)
class Hypothesis:
    """One theory: an id, a positive prior weight, and a likelihood evaluator."""

    id: str
    prior: float
    evaluator: Callable[[float], float]

    def __post_init__(self):
        if not (self.prior > 0 and np.isfinite(self.prior)):
            raise ValidationError(f"prior for {self.id!r} must be positive and finite")


@dataclass(frozen=True)
class HypothesisSet:
    entries: tuple[Hypothesis, ...]

    def __post_init__(self):
        entries = tuple(self.entries)
        if len(entries) == 0:
            raise ValidationError("need at least one hypothesis")
        ids = [h.id for h in entries]
        if len(set(ids)) != len(ids):
            raise ValidationError("hypothesis ids must be unique")
        object.__setattr__(self, "entries", entries)


def gaussian_typicality(n: float, p: float) -> float:
    """Typicality of observing p under the exponent-n gaussian density.

    Negative exponents make the density diverge in the tails, so the
    typicality is zero there; n = 0 is the constant-density limit.
    """
    if n < 0:
        return 0.0
    return erfc(math.sqrt(n * p * p / 2))


def gaussian_reversed(n: float, p: float) -> float:
    if n < 0:
        return 1.0
    return erf(math.sqrt(n * p * p / 2))


def gaussian_dual(n: float, p: float) -> float:
    if n < 0:
        return 0.0
    t = gaussian_typicality(n, p)
    return 1.0 - abs(1.0 - 2.0 * t)


def posterior_density(p: float, n: float) -> float:
    """Posterior density over the exponent n given one observation p.

    Uses a uniform prior in n; the ordinary typicality is the likelihood.
    Normalized over n in (0, inf) for any p != 0.
    """
    if p == 0:
        raise DegenerateInput("p = 0 carries no information about the exponent")
    if n <= 0:
        return 0.0
    return p * p * erfc(math.sqrt(p * p * n / 2))


def posterior_moment(p: float, m: int) -> float:
    """m-th moment of the exponent posterior: (2m+1)!! / ((m+1) p^(2m))."""
    if p == 0:
        raise DegenerateInput("p = 0 carries no information about the exponent")
    if m < 0 or int(m) != m:
        raise ValidationError("moment order must be a nonnegative integer")
    double_fact = 1
    for k in range(3, 2 * int(m) + 2, 2):
        double_fact *= k
    return double_fact / ((m + 1) * p ** (2 * m))


def averaged_posterior(n: float) -> float:
    """Posterior for n averaged over observations drawn from the unit gaussian.

    Equals (2/pi) * (arctan(1/sqrt(n)) - sqrt(n)/(n+1)); the prefactor makes
    the average of the normalized per-observation posteriors itself integrate
    to one.  The large-n tail is (4/(3 pi)) n^(-3/2), so all moments diverge.
    """
    if n <= 0:
        raise ValidationError("defined for positive exponents only")
    rn = math.sqrt(n)
    return (2.0 / math.pi) * (math.atan(1.0 / rn) - rn / (n + 1.0))


@lru_cache(maxsize=1)
def dual_normalization() -> tuple[float, float]:
    """Normalization N of the dual-typicality posterior and the crossover x1.

    x1 solves erf(x) = erfc(x) = 1/2 (bisection to 1e-12).  1/N is the full
    integral of p^2 min(erfc, erf) over the exponent, reduced by substitution
    to 4 * integral of x*min(erf(x), erfc(x)); the closed form
    1 + 2 x1^2 - 8 * integral_0^x1 x*erfc(x) dx agrees and is used as a
    consistency guard.
    """
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = (lo + hi) / 2
        if erf(mid) < 0.5:
            lo = mid
        else:
            hi = mid
    x1 = (lo + hi) / 2

    below, _ = integrate.quad(lambda x: x * erf(x), 0.0, x1, epsabs=1e-13, epsrel=1e-13)
    above, _ = integrate.quad(lambda x: x * erfc(x), x1, np.inf, epsabs=1e-13, epsrel=1e-13)
    n_inv = 4.0 * (below + above)

    tail_int, _ = integrate.quad(lambda x: x * erfc(x), 0.0, x1, epsabs=1e-13, epsrel=1e-13)
    closed = 1.0 + 2.0 * x1 * x1 - 8.0 * tail_int
    if abs(closed - n_inv) > 1e-9:
        raise ValidationError("dual normalization quadratures disagree")
    return 1.0 / n_inv, x1


def dual_posterior(p: float, n: float) -> float:
    """Posterior over n with the dual typicality as the likelihood."""
    if p == 0:
        raise DegenerateInput("p = 0 carries no information about the exponent")
    if n <= 0:
        return 0.0
    norm, _ = dual_normalization()
    x = math.sqrt(p * p * n / 2)
    return norm * p * p * min(erfc(x), erf(x))


def dual_posterior_moment(p: float, m: int, tail_split: float = 60.0) -> float:
    """m-th moment of the dual posterior by adaptive quadrature.

    The integrand decays like exp(-p^2 n / 2); the integral is split at the
    crossover and again at p^2 n = tail_split where the remainder is
    negligible at double precision.
    """
    if p == 0:
        raise DegenerateInput("p = 0 carries no information about the exponent")
    _, x1 = dual_normalization()
    crossover = 2.0 * x1 * x1 / (p * p)
    split = tail_split / (p * p)
    total = 0.0
    for lo, hi in ((0.0, crossover), (crossover, split), (split, np.inf)):
        val, _ = integrate.quad(
            lambda n: n**m * dual_posterior(p, n), lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200
        )
        total += val
    return total


def bayes_update(hypotheses: HypothesisSet, observation) -> dict[str, float]:
    """Posterior weights prior * likelihood, normalized across the set."""
    likelihoods = []
    for h in hypotheses.entries:
        lk = float(h.evaluator(observation))
        if lk < 0 or not np.isfinite(lk):
            raise ValidationError(f"likelihood for {h.id!r} must be finite and nonnegative")
        likelihoods.append(lk)
    weights = [h.prior * lk for h, lk in zip(hypotheses.entries, likelihoods)]
    total = sum(weights)
    if total <= 0:
        raise ZeroMeasure("all hypotheses have zero likelihood; no update possible")
    return {h.id: w / total for h, w in zip(hypotheses.entries, weights)}


def ranked_hypotheses(entries: list[tuple[str, Callable[[float], float]]]) -> HypothesisSet:
    """Build a hypothesis set with priors 2^-rank in the given order.

    The order encodes the caller's complexity ranking (rank 1 first); what
    counts as complex is background knowledge the caller supplies.
    """
    return HypothesisSet(
        tuple(
            Hypothesis(id=hid, prior=2.0 ** -(rank + 1), evaluator=ev)
            for rank, (hid, ev) in enumerate(entries)
        )
    )


def digit_experiment(k: int, n1: int, n2: int, m1: float, m2: float, m3: float, n: float) -> float:
    """Conditional probability of perceiving the middle digit group.

    The 10^k possible digit strings split into groups of sizes n1, n2 and the
    remainder n3; the groups carry controlled expectation values m1, m2, m3.
    Under exponent n the chance that a perception lands in group 2 is
    m2^n n2 / (m1^n n1 + m2^n n2 + m3^n n3), independent of the overall scale
    of the m's.
    """
    if k < 1 or int(k) != k:
        raise ValidationError("k must be a positive integer")
    if n1 < 1 or n2 < 1 or int(n1) != n1 or int(n2) != n2:
        raise ValidationError("group sizes must be positive integers")
    total = 10**int(k)
    n3 = total - int(n1) - int(n2)
    if n3 < 0:
        raise ValidationError("n1 + n2 exceeds the number of digit strings")
    if min(m1, m2, m3) <= 0:
        raise ValidationError("expectation values must be positive")

    def power(m: float) -> float:
        return 1.0 if n == 0 else float(m**n)

    num = power(m2) * n2
    den = power(m1) * n1 + num + (power(m3) * n3 if n3 > 0 else 0.0)
    return num / den


def canonical_digit_experiment(k: int, n: float) -> float:
    """Digit experiment with n1 = 1, n2 = 10^(k/2), and m_i = 1/n_i."""
    if k % 2 != 0:
        raise ValidationError("the canonical setup needs an even k")
    n1 = 1
    n2 = 10 ** (k // 2)
    n3 = 10**k - n1 - n2
    return digit_experiment(k, n1, n2, 1.0, 1.0 / n2, 1.0 / n3, n)


def confidence_bound(k: int, level: float = 0.99) -> float:
    """Bound b on |n - 1| below which the canonical digit test cannot reject.

    Solves 1 / (10^(b k / 2) + 1 + 10^(-b k / 2)) = 1 - level for b >= 0 by
    bisection.  The left side peaks at 1/3, so levels at or below 2/3 give a
    zero bound; the bound grows as the level approaches 1.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if not 0 < level < 1:
        raise ValidationError("level must be inside (0, 1)")
    threshold = 1.0 - level

    def prob(b: float) -> float:
        e = 10.0 ** (b * k / 2.0)
        return 1.0 / (e + 1.0 + 1.0 / e)

    if prob(0.0) <= threshold:
        return 0.0
    hi = 1.0
    while prob(hi) > threshold:
        hi *= 2
    lo = 0.0
    while hi - lo > 1e-12:
        mid = (lo + hi) / 2
        if prob(mid) > threshold:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def gaussian_99_band(dual_floor: float = 0.01) -> tuple[float, float]:
    """Band of gaussian deviations whose dual typicality stays above the floor.

    For the unit gaussian the dual typicality of a deviation x is
    1 - |1 - 2 erfc(x / sqrt(2))|, so the band endpoints solve
    erfc(x / sqrt(2)) = 1 - floor/2 (too close to the mean) and
    erfc(x / sqrt(2)) = floor/2 (too far).  Bisection to 1e-10.
    """
    if not 0 < dual_floor < 1:
        raise ValidationError("dual_floor must be inside (0, 1)")

    def solve(target: float, lo: float, hi: float) -> float:
        # erfc(x / sqrt 2) is decreasing in x
        while hi - lo > 1e-10:
            mid = (lo + hi) / 2
            if erfc(mid / math.sqrt(2)) > target:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    low = solve(1.0 - dual_floor / 2, 0.0, 1.0)
    high = solve(dual_floor / 2, 1.0, 10.0)
    return low, high
