"""Distribution-distance and sample-size utilities.

Total variation distance in exact and plug-in empirical forms, Bernoulli KL
divergence with Pinsker-style bounds, and the Hoeffding repetition counts
used to size amplification loops.
"""

from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np

from .errors import InfeasibleParameterError

Z95 = 1.959963984540054  # two-sided 95% normal quantile

MAX_EMPIRICAL_SUPPORT = 10**6

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability mass function over an explicit finite support.

    ``support`` holds opaque hashable keys; ``mass`` is the parallel vector
    of probabilities, which must be non-negative and sum to 1 within 1e-9.
    """

    support: tuple
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "mass", mass)
        if len(self.support) != mass.shape[0]:
            raise ValueError("support and mass lengths differ")
        if mass.size and mass.min() < -_NORM_TOL:
            raise ValueError("negative probability mass")
        if abs(float(mass.sum()) - 1.0) > _NORM_TOL:
            raise ValueError("mass does not sum to 1")
        mass.setflags(write=False)

    @classmethod
    def from_pairs(cls, pairs) -> "FiniteDistribution":
        keys, mass = zip(*pairs)
        return cls(tuple(keys), np.array(mass, dtype=np.float64))

    @classmethod
    def uniform(cls, support) -> "FiniteDistribution":
        support = tuple(support)
        return cls(support, np.full(len(support), 1.0 / len(support)))

    @classmethod
    def bernoulli(cls, p: float) -> "FiniteDistribution":
        return cls((0, 1), np.array([1.0 - p, p]))

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.mass.tolist()))


def tv_exact(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Total variation distance, (1/2) sum |p - q|, supports unified by key."""
    pd, qd = p.as_dict(), q.as_dict()
    keys = set(pd) | set(qd)
    return 0.5 * sum(abs(pd.get(k, 0.0) - qd.get(k, 0.0)) for k in keys)


@dataclass(frozen=True)
class TvEstimate:
    value: float
    ci_halfwidth: float
    samples_p: int
    samples_q: int

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "ci_halfwidth": self.ci_halfwidth,
            "samples_p": self.samples_p,
            "samples_q": self.samples_q,
        }


def _counts(samples, support):
    """Histogram of samples over the support.

    ``support`` is either an integer K (samples are already encoded as ints
    in [0, K)) or an iterable of keys.
    """
    if isinstance(support, (int, np.integer)):
        k = int(support)
        if k > MAX_EMPIRICAL_SUPPORT:
            raise InfeasibleParameterError(
                f"support of size {k} exceeds the {MAX_EMPIRICAL_SUPPORT} cap"
            )
        arr = np.asarray(samples)
        return np.bincount(arr, minlength=k).astype(np.float64), k
    keys = list(support)
    if len(keys) > MAX_EMPIRICAL_SUPPORT:
        raise InfeasibleParameterError(
            f"support of size {len(keys)} exceeds the {MAX_EMPIRICAL_SUPPORT} cap"
        )
    index = {key: i for i, key in enumerate(keys)}
    counts = np.zeros(len(keys), dtype=np.float64)
    for s in samples:
        counts[index[s]] += 1
    return counts, len(keys)


def _plugin_tv(counts_p, n_p, counts_q, n_q):
    return 0.5 * float(np.abs(counts_p / n_p - counts_q / n_q).sum())


def _bootstrap_ci(point, draws):
    lo, hi = np.percentile(draws, [2.5, 97.5])
    return max(hi - point, point - lo, 0.0)


def tv_empirical(samples_p, samples_q, support, rng=None, bootstrap=200) -> TvEstimate:
    """Plug-in total variation between two empirical samples.

    The plug-in estimator is positively biased when the distributions are
    close (roughly sum_x sd(p_hat_x)/2 at TV 0), so small values should be
    read as upper bounds. The CI is a percentile bootstrap over multinomial
    resamples of both sides. Refuses supports above MAX_EMPIRICAL_SUPPORT.
    """
    counts_p, k = _counts(samples_p, support)
    counts_q, _ = _counts(samples_q, support)
    n_p, n_q = int(counts_p.sum()), int(counts_q.sum())
    if n_p == 0 or n_q == 0:
        raise ValueError("empty sample")
    point = _plugin_tv(counts_p, n_p, counts_q, n_q)
    if bootstrap <= 0:
        return TvEstimate(point, 0.0, n_p, n_q)
    rng = rng if rng is not None else np.random.default_rng(0)
    rp = rng.multinomial(n_p, counts_p / n_p, size=bootstrap) / n_p
    rq = rng.multinomial(n_q, counts_q / n_q, size=bootstrap) / n_q
    draws = 0.5 * np.abs(rp - rq).sum(axis=1)
    return TvEstimate(point, _bootstrap_ci(point, draws), n_p, n_q)


def tv_empirical_to_exact(samples, reference, support=None, rng=None,
                          bootstrap=200) -> TvEstimate:
    """Plug-in total variation between an empirical sample and a known pmf.

    ``reference`` is a FiniteDistribution, or the string "uniform" together
    with an integer ``support`` size for integer-encoded samples. Same
    positive-bias caveat as tv_empirical.
    """
    if isinstance(reference, FiniteDistribution):
        counts, k = _counts(samples, reference.support)
        ref = np.asarray(reference.mass, dtype=np.float64)
    elif reference == "uniform":
        counts, k = _counts(samples, support)
        ref = np.full(k, 1.0 / k)
    else:
        raise ValueError("reference must be a FiniteDistribution or 'uniform'")
    n = int(counts.sum())
    if n == 0:
        raise ValueError("empty sample")
    point = 0.5 * float(np.abs(counts / n - ref).sum())
    if bootstrap <= 0:
        return TvEstimate(point, 0.0, n, 0)
    rng = rng if rng is not None else np.random.default_rng(0)
    resampled = rng.multinomial(n, counts / n, size=bootstrap) / n
    draws = 0.5 * np.abs(resampled - ref).sum(axis=1)
    return TvEstimate(point, _bootstrap_ci(point, draws), n, 0)


def kl_bernoulli(p: float, q: float) -> float:
    """KL(Bern(p) || Bern(q)) in nats.

    Degenerate q with p != q signals infinity; 0 log 0 terms are 0.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("Bernoulli parameters must lie in [0, 1]")
    if q in (0.0, 1.0):
        return 0.0 if p == q else math.inf
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


class PinskerBound(NamedTuple):
    standard: float  # sqrt(KL / 2); the bound used internally
    loose: float     # sqrt(KL); kept for report comparability


def pinsker_tv_bound(kl: float) -> PinskerBound:
    """Upper bounds on total variation distance implied by a KL divergence."""
    if kl < 0:
        raise ValueError("KL divergence cannot be negative")
    return PinskerBound(math.sqrt(kl / 2.0), math.sqrt(kl))


def hoeffding_repetitions(gap: float, failure: float) -> int:
    """Smallest l with exp(-2 l gap^2) <= failure for [0,1]-bounded means.

    This is the repetition count at which an empirical mean of i.i.d.
    [0,1]-valued draws clears a threshold ``gap`` away from its expectation
    with the stated failure probability.
    """
    if not (0.0 < gap <= 1.0):
        raise ValueError("gap must lie in (0, 1]")
    if not (0.0 < failure < 1.0):
        raise ValueError("failure must lie in (0, 1)")
    return max(1, math.ceil(math.log(1.0 / failure) / (2.0 * gap * gap)))


def mean_ci_halfwidth(values: np.ndarray) -> float:
    """95% normal CI half-width for the mean of the given draws."""
    n = len(values)
    if n <= 1:
        return 1.0
    return Z95 * float(np.std(values, ddof=1)) / math.sqrt(n)


def proportion_ci_halfwidth(p_hat: float, n: int) -> float:
    """95% normal CI half-width for a Bernoulli proportion."""
    if n <= 0:
        return 1.0
    return Z95 * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n)
