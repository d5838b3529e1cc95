"""CUB model: mixture of a shifted Binomial and a discrete Uniform on 1..m.

Probabilities, sampling, the normalized Gini heterogeneity index, the
Gini-based closed-form estimate of ``pi`` and EM maximum likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDataError,
    DomainError,
    EstimationError,
    NumericalError,
)

__all__ = [
    "RatingScale",
    "CubParams",
    "FrequencyTable",
    "FitResult",
    "shifted_binomial_pmf",
    "cub_pmf",
    "sample",
    "gini_index",
    "preliminary_pi",
    "moment_init",
    "log_likelihood",
    "loglik_from_counts",
    "fit_em",
    "fit_em_counts",
]

PARAM_FLOOR = 1e-6
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True)
class RatingScale:
    """Ordinal scale 1..m with an indifference point and fuzzy bounds.

    ``lb`` is the last category treated as a crisp negative block boundary,
    ``ub`` the first category with crisp membership one.
    """

    m: int = 7
    ip: int | None = None
    lb: int | None = None
    ub: int | None = None

    def __post_init__(self):
        m = int(self.m)
        if m <= 3:
            raise DomainError(f"a CUB scale needs m > 3 categories, got m={m}")
        ip = (m + 1) // 2 if self.ip is None else int(self.ip)
        lb = ip - 1 if self.lb is None else int(self.lb)
        ub = m if self.ub is None else int(self.ub)
        if not 1 <= lb < ip < ub <= m:
            raise DomainError(
                f"scale bounds must satisfy 1 <= lb < ip < ub <= m, "
                f"got lb={lb}, ip={ip}, ub={ub}, m={m}"
            )
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "ip", ip)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @property
    def categories(self) -> np.ndarray:
        return np.arange(1, self.m + 1)

    @property
    def is_balanced(self) -> bool:
        """Odd m >= 5 with the indifference point at the middle category."""
        return self.m % 2 == 1 and self.m >= 5 and self.ip == (self.m + 1) // 2

    def require_balanced(self) -> None:
        if not self.is_balanced:
            raise DomainError(
                "fuzzy profiles need an odd scale (m >= 5) with ip = (m+1)/2; "
                f"got m={self.m}, ip={self.ip}"
            )


@dataclass(frozen=True)
class CubParams:
    pi: float
    xi: float

    def __post_init__(self):
        for name in ("pi", "xi"):
            v = float(getattr(self, name))
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def uncertainty_share(self) -> float:
        """Weight ``1 - pi`` of the Uniform component."""
        return 1.0 - self.pi

    @property
    def feeling(self) -> float:
        return 1.0 - self.xi


@dataclass(frozen=True)
class FrequencyTable:
    """Relative frequencies ``freqs[r-1]`` and empirical CDF over 1..m."""

    freqs: np.ndarray
    cdf: np.ndarray
    n: float

    @classmethod
    def from_counts(cls, counts) -> "FrequencyTable":
        counts = np.asarray(counts, dtype=float)
        if counts.ndim != 1 or counts.size < 2:
            raise DomainError("counts must be a 1-d vector over the categories")
        if np.any(counts < 0) or not np.all(np.isfinite(counts)):
            raise DomainError("counts must be finite and nonnegative")
        total = counts.sum()
        if total <= 0:
            raise DomainError("frequency table needs at least one observation")
        freqs = counts / total
        cdf = np.cumsum(freqs)
        cdf[-1] = 1.0
        n = int(total) if float(total).is_integer() else float(total)
        return cls(freqs, cdf, n)

    @classmethod
    def from_ratings(cls, ratings, scale: RatingScale) -> "FrequencyTable":
        r = _check_ratings(ratings, scale)
        return cls.from_counts(np.bincount(r - 1, minlength=scale.m))

    @classmethod
    def from_probabilities(cls, probs, n: float = 1.0) -> "FrequencyTable":
        return cls.from_counts(np.asarray(probs, dtype=float) * n)

    @property
    def m(self) -> int:
        return self.freqs.size

    def F(self, r: int) -> float:
        """Empirical CDF at category ``r`` (0 for r < 1)."""
        if r < 1:
            return 0.0
        return float(self.cdf[min(r, self.m) - 1])

    def mean(self) -> float:
        return float(np.dot(np.arange(1, self.m + 1), self.freqs))


@dataclass
class FitResult:
    params: CubParams
    loglik: float
    iterations: int
    converged: bool
    loglik_trace: list[float] = field(default_factory=list)
    n: float = 0


def _check_scale_freq(freq: FrequencyTable, scale: RatingScale) -> None:
    if freq.m != scale.m:
        raise DomainError(
            f"frequency table has {freq.m} categories but the scale has m={scale.m}"
        )


def _check_ratings(ratings, scale: RatingScale) -> np.ndarray:
    r = np.asarray(ratings)
    if r.ndim != 1:
        raise DomainError("ratings must be a 1-d sequence")
    if r.size and not np.issubdtype(r.dtype, np.integer):
        if not np.all(np.equal(np.mod(r, 1), 0)):
            raise DomainError("ratings must be integers")
    r = r.astype(np.int64)
    bad = (r < 1) | (r > scale.m)
    if np.any(bad):
        raise DomainError(
            f"rating {int(r[bad][0])} outside 1..{scale.m} at position {int(np.argmax(bad))}"
        )
    return r


def shifted_binomial_pmf(scale: RatingScale, xi: float) -> np.ndarray:
    """``b_r(xi) = C(m-1, r-1) xi^(m-r) (1-xi)^(r-1)`` for r = 1..m."""
    xi = float(xi)
    if not 0.0 <= xi <= 1.0:
        raise DomainError(f"xi must lie in [0, 1], got {xi!r}")
    m = scale.m
    k = np.arange(m)  # r - 1
    coef = np.array([math.comb(m - 1, int(j)) for j in k], dtype=float)
    return coef * np.power(xi, m - 1 - k) * np.power(1.0 - xi, k)


def cub_pmf(scale: RatingScale, params: CubParams) -> np.ndarray:
    b = shifted_binomial_pmf(scale, params.xi)
    return params.pi * b + (1.0 - params.pi) / scale.m


def sample(scale: RatingScale, params: CubParams, n: int, rng_seed) -> np.ndarray:
    """Draw ``n`` ratings by inverse-CDF lookup on the CUB pmf.

    ``rng_seed`` is anything ``numpy.random.default_rng`` accepts (an int
    or a ``SeedSequence``); the same seed always yields the same draws.
    """
    if int(n) < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(rng_seed)
    cdf = np.cumsum(cub_pmf(scale, params))
    cdf[-1] = 1.0
    u = rng.random(int(n))
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, scale.m - 1).astype(np.int64) + 1


def gini_index(freq: FrequencyTable, scale: RatingScale | None = None) -> float:
    """Normalized Gini heterogeneity: 0 for a point mass, 1 for uniform."""
    if scale is not None:
        _check_scale_freq(freq, scale)
    m = freq.m
    return float(m / (m - 1) * (1.0 - np.dot(freq.freqs, freq.freqs)))


def _gini_of(p: np.ndarray) -> float:
    m = p.size
    return float(m / (m - 1) * (1.0 - np.dot(p, p)))


def preliminary_pi(freq: FrequencyTable, scale: RatingScale, xi: float) -> float:
    """Closed-form ``pi`` from the Gini identity ``G = 1 - pi^2 (1 - G_SB)``."""
    _check_scale_freq(freq, scale)
    xi = float(xi)
    if not 0.0 < xi < 1.0:
        raise DomainError(f"xi must lie in (0, 1), got {xi!r}")
    g_sb = _gini_of(shifted_binomial_pmf(scale, xi))
    if g_sb >= 1.0 - 1e-12:
        raise EstimationError(
            f"shifted Binomial at xi={xi} is near-uniform (G_SB={g_sb:.15f}); "
            "the Gini relation cannot identify pi"
        )
    g_obs = gini_index(freq)
    ratio = (1.0 - g_obs) / (1.0 - g_sb)
    return float(min(1.0, max(0.0, math.sqrt(max(ratio, 0.0)))))


def moment_init(freq: FrequencyTable, scale: RatingScale) -> CubParams:
    _check_scale_freq(freq, scale)
    m = scale.m
    xi0 = min(0.99, max(0.01, (m - freq.mean()) / (m - 1)))
    try:
        pi0 = preliminary_pi(freq, scale, xi0)
    except EstimationError:
        pi0 = 0.5
    return CubParams(min(0.95, max(0.05, pi0)), xi0)


def loglik_from_counts(counts, scale: RatingScale, params: CubParams) -> float:
    counts = np.asarray(counts, dtype=float)
    p = cub_pmf(scale, params)
    seen = counts > 0
    if np.any(p[seen] <= 0.0):
        cat = int(np.flatnonzero(seen & (p <= 0.0))[0]) + 1
        raise NumericalError(
            f"category {cat} has zero probability under pi={params.pi}, xi={params.xi}",
            category=cat,
        )
    ll = float(np.dot(counts[seen], np.log(p[seen])))
    if not math.isfinite(ll):
        raise NumericalError("log-likelihood is not finite")
    return ll


def log_likelihood(ratings, scale: RatingScale, params: CubParams) -> float:
    r = _check_ratings(ratings, scale)
    return loglik_from_counts(np.bincount(r - 1, minlength=scale.m), scale, params)


def _clamp(v: float) -> float:
    return min(1.0 - PARAM_FLOOR, max(PARAM_FLOOR, v))


def fit_em_counts(
    counts,
    scale: RatingScale,
    tolerance: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    init: CubParams | None = None,
) -> FitResult:
    """EM maximum likelihood on category counts (weights may be fractional)."""
    counts = np.asarray(counts, dtype=float)
    if counts.shape != (scale.m,):
        raise DomainError(f"expected {scale.m} category counts, got shape {counts.shape}")
    if np.count_nonzero(counts > 0) < 2:
        raise DegenerateDataError("EM needs at least two distinct observed categories")
    if tolerance <= 0 or max_iter < 1:
        raise DomainError("tolerance must be > 0 and max_iter >= 1")

    m = scale.m
    n = counts.sum()
    freq = FrequencyTable.from_counts(counts)
    start = init if init is not None else moment_init(freq, scale)
    pi, xi = _clamp(start.pi), _clamp(start.xi)
    down = m - np.arange(1, m + 1)  # m - r

    ll = loglik_from_counts(counts, scale, CubParams(pi, xi))
    trace = [ll]
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        b = shifted_binomial_pmf(scale, xi)
        num = pi * b
        tau = num / (num + (1.0 - pi) / m)
        wt = counts * tau
        swt = wt.sum()
        pi = _clamp(swt / n)
        xi = _clamp(float(np.dot(wt, down)) / ((m - 1) * swt)) if swt > 0 else xi
        new_ll = loglik_from_counts(counts, scale, CubParams(pi, xi))
        trace.append(new_ll)
        delta = new_ll - ll
        ll = new_ll
        if abs(delta) < tolerance:
            converged = True
            break

    total = int(n) if float(n).is_integer() else float(n)
    return FitResult(CubParams(pi, xi), ll, it, converged, trace, total)


def fit_em(
    ratings,
    scale: RatingScale,
    tolerance: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FitResult:
    """Fit (pi, xi) to individual ratings by EM, starting from :func:`moment_init`."""
    r = _check_ratings(ratings, scale)
    if r.size == 0:
        raise DegenerateDataError("no ratings to fit")
    counts = np.bincount(r - 1, minlength=scale.m)
    return fit_em_counts(counts, scale, tolerance, max_iter)
