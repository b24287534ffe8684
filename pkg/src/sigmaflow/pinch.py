"""Curvature pinching ratios, the constants delta and theta, and the
quadratic-form certificate that makes the gradient term non-negative.

Indices are zero-based throughout: a witness ``(p, i, j)`` refers to
``lam[p]``, ``lam[i]``, ``lam[j]``.
"""

from dataclasses import dataclass
from math import comb, sqrt

import numpy as np

from .errors import DomainError
from .symfun import as_lambda, sigma_all, sigma_omit1, sigma_omit2

__all__ = [
    "PinchingReport",
    "CertificateParams",
    "Certificate",
    "condition_ratio",
    "condition_ratios",
    "delta_constant",
    "delta_independent",
    "check_condition",
    "check_condition_batch",
    "certify_quadratic_inequality",
    "theta_constant",
    "Theta_constant",
    "section5_terms",
    "check_section5_ratios",
]


@dataclass(frozen=True)
class PinchingReport:
    ratio_min: float
    ratio_max: float
    delta: float
    admissible: bool
    witness: tuple
    inclusive: bool = True

    @property
    def interval(self):
        return (1.0, 1.0 + self.delta)

    def as_row(self):
        return {
            "ratioMin": self.ratio_min,
            "ratioMax": self.ratio_max,
            "delta": self.delta,
            "admissible": self.admissible,
        }


def _positive_spectrum(lam):
    lam = as_lambda(lam)
    if lam.ndim != 1:
        raise ValueError("expected a single spectrum")
    if not np.all(lam > 0):
        raise DomainError("spectrum is not in the positive cone")
    return lam


def _ratio_parts(k, alpha, lam):
    n = lam.shape[-1]
    if not 2 <= k <= n:
        raise ValueError(f"k={k} outside 2..{n}")
    if not alpha * k > 1:
        raise ValueError(f"need alpha*k > 1, got alpha={alpha}, k={k}")
    e = sigma_all(lam, k)
    s1, sk = e[..., 1, None], e[..., k, None]
    numer = (s1**2)[..., None] * sigma_omit2(k - 2, lam)
    denom = (alpha * k - 1) * s1 * sigma_omit1(k - 1, lam) - (alpha - 1) * k**2 * sk
    return numer, denom


def condition_ratios(k, alpha, lam):
    """All pinching ratios as an ``(n, n, n)`` array indexed ``[p, i, j]``.

    Only entries with ``i < j`` are meaningful; the rest are NaN.
    """
    lam = _positive_spectrum(lam)
    numer, denom = _ratio_parts(k, alpha, lam)
    bad = np.flatnonzero(denom <= 0)
    if bad.size:
        raise DomainError(f"non-positive denominator at p={int(bad[0])}: {denom[bad[0]]:.6g}")
    n = lam.shape[0]
    ratios = numer[None, :, :] / denom[:, None, None]
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    return np.where(upper[None, :, :], ratios, np.nan)


def condition_ratio(k, alpha, lam, p, i, j):
    lam = _positive_spectrum(lam)
    n = lam.shape[0]
    if not (0 <= p < n and 0 <= i < j < n):
        raise ValueError(f"need 0 <= p < n and 0 <= i < j < n, got p={p}, i={i}, j={j}")
    numer, denom = _ratio_parts(k, alpha, lam)
    if denom[p] <= 0:
        raise DomainError(f"non-positive denominator at p={p}: {denom[p]:.6g}")
    return float(numer[i, j] / denom[p])


def delta_independent(n):
    """Positive root of ``(n-1) d^2 + (n-2) d = 3``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return (sqrt(n * n + 8 * n - 8) + 2 - n) / (2 * (n - 1))


def delta_constant(n, k):
    """Pinching width: ``3/(n-1)`` for ``k = 2``, the independent root for ``3 <= k <= n-1``."""
    if n < 3 or not 2 <= k <= n - 1:
        raise ValueError(f"delta is defined for n >= 3 and 2 <= k <= n-1, got n={n}, k={k}")
    if k == 2:
        return 3.0 / (n - 1)
    return delta_independent(n)


def _report(ratios, delta, inclusive, index_of):
    finite = np.isfinite(ratios)
    vals = np.where(finite, ratios, np.nan)
    rmin = float(np.nanmin(vals))
    rmax = float(np.nanmax(vals))
    hi = 1.0 + delta
    if inclusive:
        above, below = rmax > hi, rmin < 1.0
    else:
        above, below = rmax >= hi, rmin <= 1.0
    ok = not (above or below)
    # witness: the worst violation, else the extreme ratio
    flat = np.nanargmin(vals) if below and not above else np.nanargmax(vals)
    witness = tuple(int(v) for v in index_of(np.unravel_index(flat, vals.shape)))
    return PinchingReport(rmin, rmax, float(delta), bool(ok), witness, inclusive)


def check_condition(k, alpha, lam, delta=None):
    """Evaluate every ratio ``(p, i<j)`` and test membership in ``[1, 1 + delta]``."""
    lam = _positive_spectrum(lam)
    if delta is None:
        delta = delta_constant(lam.shape[0], k)
    ratios = condition_ratios(k, alpha, lam)
    return _report(ratios, delta, True, lambda idx: idx)


def check_condition_batch(k, alpha, lam, delta=None):
    """Vectorized verdicts for spectra ``lam`` of shape ``(m, n)``.

    Returns ``(admissible, ratio_min, ratio_max)`` as arrays of length ``m``.
    Rows with a non-positive denominator are reported inadmissible with NaN
    ratios instead of raising.
    """
    lam = as_lambda(lam)
    if lam.ndim != 2:
        raise ValueError("expected an (m, n) batch")
    if not np.all(lam > 0):
        raise DomainError("spectrum is not in the positive cone")
    n = lam.shape[1]
    if delta is None:
        delta = delta_constant(n, k)
    numer, denom = _ratio_parts(k, alpha, lam)
    iu = np.triu_indices(n, 1)
    num = numer[:, iu[0], iu[1]]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = num[:, None, :] / denom[:, :, None]
    good = np.all(denom > 0, axis=1)
    rmin = np.where(good, ratios.min(axis=(1, 2)), np.nan)
    rmax = np.where(good, ratios.max(axis=(1, 2)), np.nan)
    ok = good & (rmin >= 1.0) & (rmax <= 1.0 + delta)
    return ok, rmin, rmax


@dataclass(frozen=True)
class CertificateParams:
    n: int
    mode: str  # "coupled" (k = 2) or "independent" (k >= 3)
    delta: float

    def __post_init__(self):
        if self.mode not in ("coupled", "independent"):
            raise ValueError(f"unknown certificate mode {self.mode!r}")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.n < 3:
            raise ValueError("certificates need n >= 3")

    @classmethod
    def for_k(cls, n, k, delta=None):
        mode = "coupled" if k == 2 else "independent"
        return cls(n, mode, delta_constant(n, k) if delta is None else delta)


@dataclass(frozen=True)
class Certificate:
    holds: bool
    margin: float
    worst: float  # location t = ratio - 1 of the worst case


def _margin_poly(n, t, u_total):
    # 2r + 1 - (n-1)(r-1)^2 - sum_p |1 - s_p| with r = 1 + t
    return 3.0 + 2.0 * t - (n - 1) * t * t - u_total


def certify_quadratic_inequality(params, tol=1e-12):
    """Worst-case margin of ``2r + 1 >= (n-1)(1-r)^2 + sum_p |1 - s_p|``.

    ``r`` and the ``n-2`` values ``s_p`` range over ``[1, 1 + delta]``.  In
    independent mode they vary freely, so the ``s_p`` sit at ``1 + delta``
    and the concave dependence on ``r`` leaves only the two endpoints.  In
    coupled mode every ratio equals ``r``, giving
    ``3 - (n-1) t^2 - (n-4) t`` on ``t in [0, delta]``, again concave.
    """
    n, d = params.n, params.delta
    if params.mode == "independent":
        cands = {0.0: _margin_poly(n, 0.0, (n - 2) * d), d: _margin_poly(n, d, (n - 2) * d)}
    else:
        cands = {0.0: _margin_poly(n, 0.0, 0.0), d: _margin_poly(n, d, (n - 2) * d)}
    worst = min(cands, key=cands.get)
    margin = cands[worst]
    return Certificate(holds=bool(margin >= -tol), margin=float(margin), worst=float(worst))


def theta_constant(l, n):
    """Pinching constant ``theta(l, n)`` guaranteeing the section-5 ratio bounds."""
    if n < 2 or not 1 <= l <= n:
        raise ValueError(f"theta needs n >= 2 and 1 <= l <= n, got l={l}, n={n}")
    d = delta_independent(n)
    if l == 1:
        return max(sqrt((n - 1) / n), sqrt(n / ((n - 1) * (1 + d))))
    a = comb(n - 1, l - 1)
    b = comb(n - 2, l - 2)
    first = (((n - 1) / n) * a + b) / (a + b)
    second = (a + b) / ((1 + d) * (n - 1) / n * a + b)
    expo = 1.0 / (l + 1)
    return max(first**expo, second**expo)


def Theta_constant(n):
    return max(theta_constant(l, n) for l in range(1, n + 1))


def section5_terms(l, lam):
    """Return ``(A, B)`` for the speed ``sigma_l`` with test function ``s_1^n / s_n``.

    ``A[i, j, p] = s_{l-1}(lam|p) / (lam_i lam_j) + n s_{l-2}(lam|ij) / s_1
    - s_{l-2}(lam|ij) / lam_p`` for ``i != j`` (zero on ``i == j``) and
    ``B[p] = n (n-1) s_{l-1}(lam|p) / s_1^2``.
    """
    lam = as_lambda(lam)
    n = lam.shape[-1]
    if not 1 <= l <= n:
        raise ValueError(f"l={l} outside 1..{n}")
    s1 = lam.sum(axis=-1)
    om1 = sigma_omit1(l - 1, lam)
    om2 = sigma_omit2(l - 2, lam)
    inv = 1.0 / lam
    A = (
        om1[..., None, None, :] * (inv[..., :, None] * inv[..., None, :])[..., None]
        + (n * om2 / s1[..., None, None])[..., None]
        - om2[..., None] * inv[..., None, None, :]
    )
    off = ~np.eye(n, dtype=bool)
    A = A * off[:, :, None]
    B = n * (n - 1) * om1 / (s1**2)[..., None]
    return A, B


def check_section5_ratios(l, lam, delta=None):
    """Test ``1 < A[i, j, p] / B[q] < 1 + delta`` over all ``i != j`` and all ``p, q``.

    The witness is ``(i, j, p, q)``.
    """
    lam = _positive_spectrum(lam)
    n = lam.shape[0]
    if delta is None:
        delta = delta_independent(n)
    A, B = section5_terms(l, lam)
    if np.any(B == 0):
        raise DomainError("B vanishes")
    ratios = A[:, :, :, None] / B[None, None, None, :]
    off = ~np.eye(n, dtype=bool)
    ratios = np.where(off[:, :, None, None], ratios, np.nan)
    return _report(ratios, delta, False, lambda idx: idx)
