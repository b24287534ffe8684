"""Elementary symmetric functions of a curvature vector.

All routines accept a single spectrum of shape ``(n,)`` or a batch of shape
``(..., n)``; the last axis always indexes principal curvatures.  Indices are
zero-based.

Conventions: ``sigma(0, lam) == 1``, ``sigma(k, lam) == 0`` for ``k > n`` and
for ``k < 0`` (so terms such as ``sigma_{l-2}`` vanish cleanly for ``l = 1``).
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CurvatureSpectrum",
    "ConeMembership",
    "as_lambda",
    "sigma_all",
    "sigma",
    "sigma_restricted",
    "sigma_omit1",
    "sigma_omit2",
    "sigma_gradient",
    "sigma_hessian",
    "power_sum",
    "cone_membership",
    "euler_identities",
    "newton_maclaurin_gap",
    "in_positive_cone",
]


def as_lambda(lam):
    """Return ``lam`` as a float array with a trailing curvature axis."""
    arr = np.asarray(lam, dtype=float)
    if arr.ndim == 0:
        raise ValueError("a curvature spectrum needs at least one entry")
    if arr.shape[-1] < 1:
        raise ValueError("empty curvature spectrum")
    if not np.all(np.isfinite(arr)):
        raise ValueError("curvature spectrum has non-finite entries")
    return arr


@dataclass(frozen=True)
class CurvatureSpectrum:
    """Principal curvatures at one point of a hypersurface."""

    lam: np.ndarray = field(repr=True)

    def __post_init__(self):
        arr = as_lambda(self.lam)
        if arr.ndim != 1:
            raise ValueError("CurvatureSpectrum holds a single point; use arrays for batches")
        object.__setattr__(self, "lam", arr)

    @property
    def n(self):
        return self.lam.shape[0]

    @property
    def cone(self):
        return cone_membership(self.lam)

    def __array__(self, dtype=None, copy=None):
        return self.lam if dtype is None else self.lam.astype(dtype)

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class ConeMembership:
    max_gamma: int
    is_positive_cone: bool

    def in_gamma(self, k):
        return k <= self.max_gamma


def sigma_all(lam, kmax=None):
    """Return ``sigma_0, ..., sigma_kmax`` along a new trailing axis.

    Uses the prefix recurrence ``e_j <- e_j + lam_i * e_{j-1}``, which costs
    ``O(n * kmax)`` and avoids the cancellation of power-sum formulas.
    """
    lam = as_lambda(lam)
    n = lam.shape[-1]
    if kmax is None:
        kmax = n
    kmax = int(kmax)
    e = np.zeros(lam.shape[:-1] + (kmax + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        li = lam[..., i : i + 1]
        top = min(i + 1, kmax)
        # RHS is built before assignment, so e[j-1] is still the previous prefix
        e[..., 1 : top + 1] = e[..., 1 : top + 1] + li * e[..., 0:top]
    return e


def sigma(k, lam):
    """k-th elementary symmetric polynomial over strictly increasing index sets."""
    lam = as_lambda(lam)
    k = int(k)
    n = lam.shape[-1]
    if k < 0 or k > n:
        return np.zeros(lam.shape[:-1]) if lam.ndim > 1 else 0.0
    out = sigma_all(lam, k)[..., k]
    return out if lam.ndim > 1 else float(out)


def _check_omit(omit, n):
    idx = [int(i) for i in omit]
    if len(idx) not in (1, 2):
        raise ValueError("omit must name one or two indices")
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate omitted index in {tuple(idx)}")
    for i in idx:
        if not 0 <= i < n:
            raise ValueError(f"omitted index {i} out of range for n={n}")
    return idx


def sigma_restricted(k, lam, omit):
    """``sigma_k`` with the entries listed in ``omit`` set to zero."""
    lam = as_lambda(lam)
    if np.isscalar(omit):
        omit = (omit,)
    idx = _check_omit(omit, lam.shape[-1])
    reduced = lam.copy()
    reduced[..., idx] = 0.0
    return sigma(k, reduced)


def sigma_omit1(k, lam):
    """Vector of ``sigma_k(lam | i)`` for every ``i``; shape ``(..., n)``."""
    lam = as_lambda(lam)
    n = lam.shape[-1]
    if k < 0 or k > n:
        return np.zeros(lam.shape)
    stacked = np.broadcast_to(lam[..., None, :], lam.shape[:-1] + (n, n)).copy()
    diag = np.arange(n)
    stacked[..., diag, diag] = 0.0
    return sigma_all(stacked, k)[..., k]


def sigma_omit2(k, lam):
    """Matrix of ``sigma_k(lam | ij)`` for ``i != j``; the diagonal is zero."""
    lam = as_lambda(lam)
    n = lam.shape[-1]
    out = np.zeros(lam.shape[:-1] + (n, n))
    if k < 0 or k > n or n < 2:
        return out
    stacked = np.broadcast_to(lam[..., None, None, :], lam.shape[:-1] + (n, n, n)).copy()
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    stacked[..., i, j, i] = 0.0
    stacked[..., i, j, j] = 0.0
    out = sigma_all(stacked, k)[..., k]
    diag = np.arange(n)
    out[..., diag, diag] = 0.0
    return out


def sigma_gradient(k, lam):
    """Gradient of ``sigma_k``: component ``i`` is ``sigma_{k-1}(lam | i)``."""
    return sigma_omit1(k - 1, lam)


def sigma_hessian(k, lam):
    """Hessian of ``sigma_k``: off-diagonal ``sigma_{k-2}(lam | ij)``, zero diagonal."""
    return sigma_omit2(k - 2, lam)


def power_sum(k, lam):
    if k < 1:
        raise ValueError("power sums are defined for k >= 1")
    lam = as_lambda(lam)
    out = np.sum(lam**k, axis=-1)
    return out if lam.ndim > 1 else float(out)


def cone_membership(lam):
    """Largest ``k`` with ``sigma_1, ..., sigma_k > 0`` and positivity of all entries."""
    lam = as_lambda(lam)
    if lam.ndim != 1:
        raise ValueError("cone_membership takes a single spectrum")
    n = lam.shape[0]
    if np.min(lam) > 0:
        # every sigma_k is positive here even when a product underflows
        return ConeMembership(max_gamma=n, is_positive_cone=True)
    positive = sigma_all(lam)[1:] > 0
    max_gamma = int(np.argmin(positive)) if not positive.all() else n
    return ConeMembership(max_gamma=max_gamma, is_positive_cone=False)


def in_positive_cone(lam):
    """Boolean mask (per spectrum) for strict positivity of every entry."""
    lam = as_lambda(lam)
    return np.all(lam > 0, axis=-1)


def euler_identities(k, lam):
    """Return ``(sum_i sigma_{k-1}(lam|i) lam_i, sum_i sigma_{k-1}(lam|i) lam_i**2)``.

    The first equals ``k sigma_k`` and the second ``sigma_1 sigma_k - (k+1) sigma_{k+1}``.
    """
    lam = as_lambda(lam)
    n = lam.shape[-1]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    grad = sigma_omit1(k - 1, lam)
    first = np.sum(grad * lam, axis=-1)
    second = np.sum(grad * lam**2, axis=-1)
    if lam.ndim == 1:
        return float(first), float(second)
    return first, second


def newton_maclaurin_gap(k, lam):
    """``(n-k+1) s_{k-1} / (k s_k) - (n-k+2) s_{k-2} / ((k-1) s_{k-1})``.

    Non-negative on the Garding cone and zero exactly at umbilic points.
    """
    lam = as_lambda(lam)
    n = lam.shape[-1]
    if not 2 <= k <= n:
        raise ValueError(f"k={k} outside 2..{n}")
    e = sigma_all(lam, k)
    s2, s1, s0 = e[..., k - 2], e[..., k - 1], e[..., k]
    if np.any(s1 == 0) or np.any(s0 == 0):
        raise ZeroDivisionError("sigma_{k-1} or sigma_k vanishes")
    gap = (n - k + 1) * s1 / (k * s0) - (n - k + 2) * s2 / ((k - 1) * s1)
    return gap if lam.ndim > 1 else float(gap)
