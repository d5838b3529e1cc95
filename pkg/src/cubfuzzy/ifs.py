"""Intuitionistic fuzzy profiles of a rated item.

Each profile holds, per category r, a membership degree ``mu`` to the set
of satisfied respondents, a non-membership degree ``nu`` and the residual
hesitation ``u = 1 - mu - nu``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .cub import FrequencyTable, RatingScale, _check_scale_freq
from .errors import DegenerateNormalizationError, DomainError, IFSConsistencyError

__all__ = [
    "Variant",
    "FuzzyProfile",
    "membership_zani",
    "membership_cub",
    "nonmembership_cub",
    "uncertainty_profile",
    "build_profile",
]

IFS_SLACK = 1e-12


class Variant(str, enum.Enum):
    ZANI = "zani"
    CUB_IFS = "cub"


@dataclass(frozen=True)
class FuzzyProfile:
    item_id: str | None
    mu: np.ndarray
    nu: np.ndarray
    u: np.ndarray
    variant: Variant
    pi_hat: float | None = None
    # names of blocks whose normalizing mass was empty (increments set to 0)
    flags: tuple[str, ...] = field(default=())

    @property
    def m(self) -> int:
        return self.mu.size

    def at(self, r) -> tuple:
        """``(mu, nu, u)`` at category ``r`` (1-based, scalar or array)."""
        i = np.asarray(r) - 1
        return self.mu[i], self.nu[i], self.u[i]


def _check_pi(pi_hat) -> float:
    pi_hat = float(pi_hat)
    if not 0.0 <= pi_hat <= 1.0:
        raise DomainError(f"pi_hat must lie in [0, 1], got {pi_hat!r}")
    return pi_hat


def membership_zani(freq: FrequencyTable, scale: RatingScale, item_id=None) -> FuzzyProfile:
    """Membership from cumulative relative frequencies above the negative block."""
    _check_scale_freq(freq, scale)
    m, lb, ub = scale.m, scale.lb, scale.ub
    above = float(freq.freqs[lb:].sum())
    if above <= 0.0:
        raise DegenerateNormalizationError(
            f"item {item_id!r}: no observed mass above category {lb}", item=item_id
        )
    mu = np.zeros(m)
    for r in range(lb + 1, ub):
        mu[r - 1] = mu[r - 2] + freq.freqs[r - 1] / above
    mu[ub - 1 :] = 1.0
    nu = np.zeros(m)
    return FuzzyProfile(item_id, mu, nu, 1.0 - mu, Variant.ZANI)


def _block_increments(freqs, lo, hi, pi_hat, strict, item_id, label):
    """Scaled increments ``pi_hat * f_r / sum(f_lo..f_hi)`` over categories lo..hi."""
    block = freqs[lo - 1 : hi]
    mass = float(block.sum())
    if block.size == 0:
        return block, False
    if mass > 0.0:
        return pi_hat * block / mass, False
    if pi_hat > 0.0 and strict:
        raise DegenerateNormalizationError(
            f"item {item_id!r}: no observed mass in the {label} categories {lo}..{hi}",
            item=item_id,
        )
    return np.zeros_like(block), pi_hat > 0.0


def membership_cub(
    freq: FrequencyTable, scale: RatingScale, pi_hat: float, item_id=None, strict=True
) -> tuple[np.ndarray, bool]:
    """Membership penalized by the fitted CUB uncertainty.

    Returns ``(mu, empty_block)``; ``empty_block`` is True when the
    intermediate positive categories carry no mass and ``strict`` is off.
    """
    _check_scale_freq(freq, scale)
    scale.require_balanced()
    pi_hat = _check_pi(pi_hat)
    m, ip, ub = scale.m, scale.ip, scale.ub
    mu = np.zeros(m)
    mu[ip - 1] = (1.0 - pi_hat) / m
    inc, empty = _block_increments(freq.freqs, ip + 1, ub - 1, pi_hat, strict, item_id, "positive")
    for k, r in enumerate(range(ip + 1, ub)):
        mu[r - 1] = mu[r - 2] + inc[k]
    mu[ub - 1 :] = 1.0
    return mu, empty


def nonmembership_cub(
    freq: FrequencyTable, scale: RatingScale, pi_hat: float, item_id=None, strict=True
) -> tuple[np.ndarray, bool]:
    """Non-membership mirrored below the indifference point, anchored at ``nu(ip)``."""
    _check_scale_freq(freq, scale)
    scale.require_balanced()
    pi_hat = _check_pi(pi_hat)
    m, ip = scale.m, scale.ip
    lb = ip - 1
    nu = np.zeros(m)
    nu[ip - 1] = (1.0 - pi_hat) / m
    inc, empty = _block_increments(freq.freqs, 2, lb, pi_hat, strict, item_id, "negative")
    for r in range(lb, 1, -1):
        nu[r - 1] = nu[r] + inc[r - 2]
    nu[0] = 1.0
    return nu, empty


def uncertainty_profile(mu, nu) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    total = mu + nu
    over = total > 1.0 + IFS_SLACK
    if np.any(over):
        r = int(np.flatnonzero(over)[0]) + 1
        raise IFSConsistencyError(
            f"mu + nu = {total[r - 1]!r} exceeds 1 at category {r}", category=r
        )
    return 1.0 - mu - nu


def build_profile(
    freq: FrequencyTable,
    scale: RatingScale,
    variant: Variant | str,
    pi_hat: float | None = None,
    item_id=None,
    strict: bool = True,
) -> FuzzyProfile:
    """Assemble a complete profile for one item.

    With ``strict=False`` an empty intermediate block yields zero increments
    (the profile jumps at the crisp bound) and is recorded in ``flags``.
    """
    variant = Variant(variant)
    if variant is Variant.ZANI:
        return membership_zani(freq, scale, item_id)
    if pi_hat is None:
        raise DomainError("the CUB variant needs an estimated pi_hat")
    if scale.lb != scale.ip - 1:
        raise DomainError(
            f"the CUB variant fixes lb = ip - 1 = {scale.ip - 1}, got lb={scale.lb}"
        )
    mu, mu_empty = membership_cub(freq, scale, pi_hat, item_id, strict)
    nu, nu_empty = nonmembership_cub(freq, scale, pi_hat, item_id, strict)
    u = uncertainty_profile(mu, nu)
    flags = tuple(
        name for name, hit in (("empty_positive_block", mu_empty), ("empty_negative_block", nu_empty)) if hit
    )
    return FuzzyProfile(item_id, mu, nu, u, Variant.CUB_IFS, float(pi_hat), flags)
