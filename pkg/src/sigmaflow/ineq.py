"""Symmetric-function inequalities on the positive cone and the interlacing
machinery behind them.

The central quantity is

    E_k(lam) = s_1 / (k (k-1)) - k s_k / ((k-1) s_{k-1}) + (k+1) s_{k+1} / (k s_k),

which is non-negative on the positive cone and vanishes only at umbilic
points.  Outside the positive cone it can be negative (``lam = (-1, 3, 3)``),
so evaluators refuse such input unless ``unsafe=True``.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import DomainError, NumericalError
from .symfun import as_lambda, sigma_all

__all__ = [
    "InterlacedSpectrum",
    "lemma21_value",
    "lemma21_k2_oracle",
    "corollary23_value",
    "interlace",
    "cluster_values",
]


def _require_positive(lam, unsafe):
    if not unsafe and not np.all(lam > 0):
        raise DomainError("spectrum is not in the positive cone; pass unsafe=True to evaluate anyway")


def _check_k(k, n):
    if not 2 <= k <= n:
        raise ValueError(f"k={k} outside 2..{n}")


@lru_cache(maxsize=256)
def _centred_terms(n, products):
    """Expand ``sum c * s_a s_b s_c`` in the basis ``m^p s_r(d) s_s(d) s_t(d)`` with ``lam = m + d``.

    ``s_a(m + d) = sum_r C(n-r, a-r) m^(a-r) s_r(d)``.  Coefficients are
    combined in exact integer arithmetic, so the pure ``m`` terms, which
    cancel for quantities vanishing at umbilic points, never reach floating
    point.  Returns ``(coef, m_power, r, s, t)`` tuples with nonzero ``coef``.
    """
    acc = {}
    degree = None
    for c, idx in products:
        deg = sum(idx)
        if degree is None:
            degree = deg
        elif deg != degree:
            raise ValueError("products must share one degree")
        ranges = [range(min(a, n) + 1) for a in idx]
        for r in ranges[0]:
            for s_ in ranges[1]:
                for t in ranges[2]:
                    w = comb(n - r, idx[0] - r) * comb(n - s_, idx[1] - s_) * comb(n - t, idx[2] - t)
                    if w:
                        key = tuple(sorted((r, s_, t)))
                        acc[key] = acc.get(key, 0) + c * w
    return tuple((c, degree - sum(key), *key) for key, c in sorted(acc.items()) if c)


def _stable_numerator(lam, e, products):
    """``sum c * s_a s_b s_c`` from whichever of two forms has the smaller absolute term sum.

    The direct products of ``e = sigma_all(lam)`` are accurate away from
    umbilic points; the expansion about the mean entry is accurate near them.
    The absolute term sum bounds the rounding error of each form.
    """
    n = lam.shape[-1]
    direct = np.zeros(lam.shape[:-1])
    direct_abs = np.zeros(lam.shape[:-1])
    for c, (a, b, d) in products:
        term = c * e[..., a] * e[..., b] * e[..., d]
        direct = direct + term
        direct_abs = direct_abs + np.abs(term)
    m = lam.mean(axis=-1)
    S = sigma_all(lam - m[..., None])
    centred = np.zeros(lam.shape[:-1])
    centred_abs = np.zeros(lam.shape[:-1])
    for c, p, r, s_, t in _centred_terms(n, products):
        term = float(c) * m**p * S[..., r] * S[..., s_] * S[..., t]
        centred = centred + term
        centred_abs = centred_abs + np.abs(term)
    return np.where(centred_abs < direct_abs, centred, direct)


def lemma21_value(k, lam, unsafe=False):
    """Evaluate ``E_k``; accepts batches ``(..., n)``.

    The value is formed as ``N / (k (k-1) s_{k-1} s_k)`` with
    ``N = s_1 s_{k-1} s_k - k^2 s_k^2 + (k^2 - 1) s_{k-1} s_{k+1}``.  Near
    umbilic points, where ``E_k`` vanishes quadratically, ``N`` is expanded
    about the mean entry so that its leading terms cancel exactly.
    """
    lam = as_lambda(lam)
    n = lam.shape[-1]
    _check_k(k, n)
    _require_positive(lam, unsafe)
    e = sigma_all(lam, n + 1)  # s_{n+1} = 0
    products = ((1, (1, k - 1, k)), (-k * k, (0, k, k)), (k * k - 1, (0, k - 1, k + 1)))
    numer = _stable_numerator(lam, e, products)
    out = numer / (k * (k - 1) * e[..., k - 1] * e[..., k])
    return out if lam.ndim > 1 else float(out)


def lemma21_k2_oracle(lam, unsafe=False):
    """Sum-of-squares form of ``2 E_2``: ``sum_{i<j} l_i l_j (l_i - l_j)^2 / (s_1 s_2)``.

    Independent of the ``E_k`` evaluation path; it never calls ``sigma_3``.
    """
    lam = as_lambda(lam)
    _require_positive(lam, unsafe)
    li = lam[..., :, None]
    lj = lam[..., None, :]
    pair = li * lj * (li - lj) ** 2
    numer = 0.5 * pair.sum(axis=(-2, -1))
    e = sigma_all(lam, 2)
    denom = e[..., 1] * e[..., 2]
    if np.any(denom == 0):
        raise DomainError("s_1 * s_2 vanishes")
    out = numer / denom
    return out if lam.ndim > 1 else float(out)


def corollary23_value(k, lam, unsafe=False):
    """``(k-1) s_1 - 2k s_2 / s_1 + (k+1) s_{k+1} / s_k``; accepts batches.

    Evaluated as ``N / (s_1 s_k)`` with the same treatment of the numerator
    as in :func:`lemma21_value`.
    """
    lam = as_lambda(lam)
    n = lam.shape[-1]
    _check_k(k, n)
    _require_positive(lam, unsafe)
    e = sigma_all(lam, n + 1)  # s_{n+1} = 0
    products = ((k - 1, (1, 1, k)), (-2 * k, (0, 2, k)), (k + 1, (0, 1, k + 1)))
    numer = _stable_numerator(lam, e, products)
    out = numer / (e[..., 1] * e[..., k])
    return out if lam.ndim > 1 else float(out)


@dataclass(frozen=True)
class InterlacedSpectrum:
    """Reciprocal roots of ``d/dx prod_i (1 - lam_i x)``.

    ``mu`` is sorted ascending and has ``n - 1`` entries; ``sigma1`` is the
    leading factor so that ``d/dx f = -sigma1 * prod (1 - mu_i x)``.
    """

    mu: np.ndarray
    sigma1: float

    @property
    def n(self):
        return self.mu.shape[0] + 1


def cluster_values(values, rtol=1e-12):
    """Group sorted-descending ``values`` into runs equal to within ``rtol``.

    Returns ``(representatives, multiplicities)``, representatives descending.
    """
    vals = np.sort(np.asarray(values, dtype=float))[::-1]
    reps, mult = [], []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or abs(vals[i] - vals[start]) > rtol * max(abs(vals[start]), abs(vals[i])):
            reps.append(vals[start:i].mean())
            mult.append(i - start)
            start = i
    return np.array(reps), np.array(mult)


def interlace(lam, rtol=1e-13, max_iter=200):
    """Compute the interlaced spectrum ``mu`` of a spectrum in the positive cone.

    Roots of ``f(x) = prod(1 - lam_i x)`` are ``1/lam_i``.  A cluster of ``m``
    equal entries leaves a root of ``f'`` of multiplicity ``m - 1`` in place,
    and between consecutive distinct roots ``f'`` has exactly one simple
    root.  That root is the zero of the logarithmic derivative
    ``sum_j m_j lam_j / (1 - lam_j x)``, which increases strictly from
    ``-inf`` to ``+inf`` across the gap, so bisection always brackets it.
    """
    lam = as_lambda(lam)
    if lam.ndim != 1:
        raise ValueError("interlace takes a single spectrum")
    if not np.all(lam > 0):
        raise DomainError("interlacing needs every entry positive")
    n = lam.shape[0]
    sigma1 = float(lam.sum())
    if n == 1:
        return InterlacedSpectrum(mu=np.zeros(0), sigma1=sigma1)

    reps, mult = cluster_values(lam)
    repeated = np.repeat(reps, mult - 1)

    roots = 1.0 / reps  # ascending because reps is descending
    lo = roots[:-1].copy()
    hi = roots[1:].copy()
    if lo.size:
        weights = (mult * reps)[None, :]

        def logderiv(x):
            return np.sum(weights / (1.0 - reps[None, :] * x[:, None]), axis=1)

        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            neg = logderiv(mid) < 0
            lo = np.where(neg, mid, lo)
            hi = np.where(neg, hi, mid)
            if np.all(hi - lo <= rtol * hi):
                break
        width = np.max((hi - lo) / hi)
        if width > rtol:
            raise NumericalError(f"bisection did not converge (relative width {width:.3e})", residual=width)
        between = 2.0 / (lo + hi)
    else:
        between = np.zeros(0)

    mu = np.sort(np.concatenate([repeated, between]))
    return InterlacedSpectrum(mu=mu, sigma1=sigma1)
