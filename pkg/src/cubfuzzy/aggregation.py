"""Item weights and weighted-mean aggregation of fuzzy profiles into scores."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, RowRejected
from .ifs import FuzzyProfile

__all__ = [
    "Source",
    "WeightMode",
    "WeightVector",
    "ScoreTriple",
    "fuzzy_proportions",
    "log_inverse_weights",
    "iwam_respondent",
    "iwam",
    "final_scores",
]

G_CLAMP = 1e-6


class Source(str, enum.Enum):
    MU = "mu"
    U = "u"


class WeightMode(str, enum.Enum):
    MEMBERSHIP_PROPORTIONS = "mu"
    UNCERTAINTY_PROPORTIONS = "u"


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    mode: WeightMode | None = None

    def __len__(self):
        return self.weights.size


@dataclass(frozen=True)
class ScoreTriple:
    mu_bar: float
    nu_bar: float
    u_bar: float
    n: int = 0


def _as_matrix(matrix, k: int) -> np.ndarray:
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] == 0:
        raise DomainError("rating matrix must be a non-empty n x K array")
    if a.shape[1] != k:
        raise DomainError(f"matrix has {a.shape[1]} items but {k} profiles were given")
    return a.astype(np.int64)


def _lookup(profiles: Sequence[FuzzyProfile], matrix: np.ndarray, attr: str) -> np.ndarray:
    out = np.empty(matrix.shape, dtype=float)
    for k, prof in enumerate(profiles):
        col = matrix[:, k]
        if np.any((col < 1) | (col > prof.m)):
            bad = col[(col < 1) | (col > prof.m)][0]
            raise DomainError(f"item {k} has rating {bad} outside 1..{prof.m}")
        out[:, k] = getattr(prof, attr)[col - 1]
    return out


def fuzzy_proportions(profiles: Sequence[FuzzyProfile], matrix, source: Source | str) -> np.ndarray:
    """Mean membership (``source='mu'``) or mean hesitation (``'u'``) per item."""
    source = Source(source)
    a = _as_matrix(matrix, len(profiles))
    values = _lookup(profiles, a, "mu" if source is Source.MU else "u")
    return np.array([math.fsum(values[:, k]) / a.shape[0] for k in range(a.shape[1])])


def log_inverse_weights(g, mode: WeightMode | str | None = None, strict: bool = True) -> WeightVector:
    """Weights proportional to ``ln(1/g_k)``, normalized to sum to one.

    Proportions outside (0, 1) raise :class:`DomainError` unless ``strict``
    is off, in which case they are clamped to ``[1e-6, 1 - 1e-6]`` with a
    warning.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise DomainError("proportions must be a non-empty vector")
    bad = (g <= 0.0) | (g >= 1.0) | ~np.isfinite(g)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        if strict:
            raise DomainError(
                f"item {k}: proportion g={g[k]!r} outside (0, 1) gives no usable log-inverse weight"
            )
        warnings.warn(
            f"clamping degenerate proportions at items {np.flatnonzero(bad).tolist()}",
            RuntimeWarning,
            stacklevel=2,
        )
        g = np.clip(np.nan_to_num(g, nan=0.5), G_CLAMP, 1.0 - G_CLAMP)
    logs = -np.log(g)
    w = logs / math.fsum(logs)
    return WeightVector(w, WeightMode(mode) if mode is not None else None)


def iwam_respondent(profiles: Sequence[FuzzyProfile], weights: WeightVector, ratings_row) -> tuple[float, float]:
    values = list(ratings_row)
    if len(values) != len(profiles):
        raise DomainError(f"row has {len(values)} ratings for {len(profiles)} items")
    if any(v is None or v != v or v < 1 for v in values):
        raise RowRejected(f"row {values} has missing ratings")
    row = np.asarray(values, dtype=np.int64)
    w = weights.weights
    mu = math.fsum(w[k] * p.mu[row[k] - 1] for k, p in enumerate(profiles))
    nu = math.fsum(w[k] * p.nu[row[k] - 1] for k, p in enumerate(profiles))
    return mu, nu


def iwam(profiles: Sequence[FuzzyProfile], weights: WeightVector, matrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-respondent weighted membership and non-membership for a complete matrix."""
    a = _as_matrix(matrix, len(profiles))
    if len(weights) != a.shape[1]:
        raise DomainError("weight vector length does not match the number of items")
    if np.any(a < 1):
        raise RowRejected("matrix contains missing ratings; drop incomplete rows first")
    mu = _lookup(profiles, a, "mu") @ weights.weights
    nu = _lookup(profiles, a, "nu") @ weights.weights
    return mu, nu


def final_scores(per_respondent) -> ScoreTriple:
    """Equal-weight means of respondent pairs plus the residual hesitation.

    Accepts either a sequence of ``(mu_j, nu_j)`` pairs or a ``(mu, nu)``
    tuple of arrays as returned by :func:`iwam`.
    """
    if isinstance(per_respondent, tuple) and len(per_respondent) == 2 and np.ndim(per_respondent[0]) == 1:
        mus, nus = (np.asarray(x, dtype=float) for x in per_respondent)
    else:
        pairs = np.asarray(per_respondent, dtype=float).reshape(-1, 2)
        mus, nus = pairs[:, 0], pairs[:, 1]
    n = mus.size
    if n == 0:
        raise DomainError("no respondents to aggregate")
    # fsum is correctly rounded, so the result does not depend on row order
    mu_bar = math.fsum(mus) / n
    nu_bar = math.fsum(nus) / n
    return ScoreTriple(mu_bar, nu_bar, 1.0 - mu_bar - nu_bar, n)
