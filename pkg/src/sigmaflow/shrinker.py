"""Pointwise algebra for self-similar solutions ``F(A) = -<X, nu>``.

Speed functions ``F`` and the test function ``G = s_1^k / s_k`` are described
through their values and first/second derivatives in the principal
curvatures.  From those, the zeroth-order part (TERM I) and the
gradient-quadratic part (TERM II) of the elliptic identity satisfied by
``G`` are evaluated, both by the general contraction and by the closed forms
that hold at a critical point of ``G``.

All index conventions are zero-based; a gradient tensor ``h3[p, q, i]`` is
the covariant derivative of the second fundamental form in a principal frame.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ConstraintError, DomainError, NumericalError
from .ineq import corollary23_value
from .pinch import section5_terms
from .symfun import as_lambda, sigma_all, sigma_omit1, sigma_omit2

__all__ = [
    "SpeedFunction",
    "SigmaPower",
    "SigmaSum",
    "SigmaRatio",
    "TestFunction",
    "GradientTensor",
    "Term2Result",
    "SphereRadius",
    "parse_speed",
    "term1_general",
    "term1_sigma_power",
    "term1_sigma_sum",
    "term2_general",
    "term2_sigma_power",
    "term2_sigma_sum",
    "constraint_residual",
    "project_constraint",
    "sample_constrained_tensor",
    "symmetric_tensor",
    "sphere_radius",
]


def _positive(lam):
    lam = as_lambda(lam)
    if not np.all(lam > 0):
        raise DomainError("spectrum is not in the positive cone")
    return lam


def _offdiag(mat):
    n = mat.shape[-1]
    return mat * (~np.eye(n, dtype=bool))


class SpeedFunction:
    """Base class for ``F(A) = f(lam)``.

    Subclasses implement ``value``, ``gradient``, ``hessian`` and
    ``quotient``; all accept ``(..., n)`` arrays.  ``quotient`` returns the
    matrix of divided differences ``(f_p - f_q) / (lam_p - lam_q)`` in a form
    that is regular at ``lam_p == lam_q``; its diagonal is zero.
    """

    #: homogeneity degree in ``lam``; ``None`` when ``f`` is not homogeneous
    degree = None

    def check_domain(self, lam):
        return _positive(lam)

    def value(self, lam):
        raise NotImplementedError

    def gradient(self, lam):
        raise NotImplementedError

    def hessian(self, lam):
        raise NotImplementedError

    def quotient(self, lam):
        raise NotImplementedError

    def quotient_pq(self, lam, p, q):
        if p == q:
            raise ValueError("quotient needs p != q")
        return float(self.quotient(lam)[..., p, q])

    def scaled(self, factor):
        return ScaledSpeed(self, factor)


class SigmaPower(SpeedFunction):
    """``f = s_k ** alpha``."""

    def __init__(self, k, alpha=1.0):
        if k < 1:
            raise ValueError("k must be at least 1")
        self.k = int(k)
        self.alpha = float(alpha)
        self.degree = self.k * self.alpha

    def __repr__(self):
        return f"SigmaPower(k={self.k}, alpha={self.alpha:g})"

    @property
    def elliptic_regime(self):
        """Whether ``alpha * k > 1``, the regime of the rigidity result."""
        return self.alpha * self.k > 1

    def _parts(self, lam):
        lam = self.check_domain(lam)
        n = lam.shape[-1]
        if self.k > n:
            raise ValueError(f"k={self.k} exceeds n={n}")
        sk = sigma_all(lam, self.k)[..., self.k]
        return lam, sk, sk**self.alpha

    def value(self, lam):
        lam, _, f = self._parts(lam)
        return f if lam.ndim > 1 else float(f)

    def gradient(self, lam):
        lam, sk, f = self._parts(lam)
        return (self.alpha * f / sk)[..., None] * sigma_omit1(self.k - 1, lam)

    def hessian(self, lam):
        lam, sk, f = self._parts(lam)
        v = sigma_omit1(self.k - 1, lam)
        w = sigma_omit2(self.k - 2, lam)
        a = self.alpha
        outer = v[..., :, None] * v[..., None, :]
        sk2 = sk[..., None, None]
        return (a * f)[..., None, None] * ((a - 1) * outer / sk2**2 + w / sk2)

    def quotient(self, lam):
        lam, sk, f = self._parts(lam)
        w = sigma_omit2(self.k - 2, lam)
        return -(self.alpha * f / sk)[..., None, None] * w


class SigmaSum(SpeedFunction):
    """``f = sum_l a_l s_l`` with non-negative coefficients ``a_1, a_2, ...``."""

    def __init__(self, a):
        a = np.asarray(a, dtype=float).ravel()
        if a.size == 0 or np.any(a < 0) or not np.any(a > 0):
            raise ValueError("coefficients must be non-negative and not all zero")
        self.a = a

    def __repr__(self):
        return f"SigmaSum(a={self.a.tolist()})"

    @property
    def satisfies_hypothesis(self):
        """``sum_{l >= 2} a_l > 0``, required for the strict positivity of TERM I."""
        return bool(self.a[1:].sum() > 0)

    def _coeffs(self, n):
        if self.a.size > n and np.any(self.a[n:] != 0):
            raise ValueError(f"coefficients beyond l=n={n} must vanish")
        out = np.zeros(n)
        m = min(n, self.a.size)
        out[:m] = self.a[:m]
        return out

    def value(self, lam):
        lam = self.check_domain(lam)
        a = self._coeffs(lam.shape[-1])
        e = sigma_all(lam)[..., 1:]
        out = e @ a
        return out if lam.ndim > 1 else float(out)

    def gradient(self, lam):
        lam = self.check_domain(lam)
        a = self._coeffs(lam.shape[-1])
        return sum(al * sigma_omit1(l - 1, lam) for l, al in enumerate(a, start=1) if al)

    def hessian(self, lam):
        lam = self.check_domain(lam)
        a = self._coeffs(lam.shape[-1])
        return sum(al * sigma_omit2(l - 2, lam) for l, al in enumerate(a, start=1) if al)

    def quotient(self, lam):
        return -self.hessian(lam)

    def euler_excess(self, lam):
        """``sum_p f_p lam_p - f = sum_l (l-1) a_l s_l``."""
        lam = self.check_domain(lam)
        a = self._coeffs(lam.shape[-1])
        e = sigma_all(lam)[..., 1:]
        return e @ (a * np.arange(len(a)))


class SigmaRatio(SpeedFunction):
    """``f = (n-k+1) s_{k-1} / (k s_k)``; every centred sphere is a solution.

    The domain is the Garding cone ``Gamma_k``.
    """

    degree = -1.0

    def __init__(self, k):
        if k < 1:
            raise ValueError("k must be at least 1")
        self.k = int(k)

    def __repr__(self):
        return f"SigmaRatio(k={self.k})"

    def check_domain(self, lam):
        lam = as_lambda(lam)
        n = lam.shape[-1]
        if self.k > n:
            raise ValueError(f"k={self.k} exceeds n={n}")
        e = sigma_all(lam, self.k)[..., 1:]
        if not np.all(e > 0):
            raise DomainError(f"spectrum is not in Gamma_{self.k} (s_k <= 0 somewhere)")
        return lam

    def _parts(self, lam):
        lam = self.check_domain(lam)
        n, k = lam.shape[-1], self.k
        c = (n - k + 1) / k
        e = sigma_all(lam, k)
        return lam, c, e[..., k - 1], e[..., k]

    def value(self, lam):
        lam, c, u, v = self._parts(lam)
        out = c * u / v
        return out if lam.ndim > 1 else float(out)

    def gradient(self, lam):
        lam, c, u, v = self._parts(lam)
        k = self.k
        up = sigma_omit1(k - 2, lam)
        vp = sigma_omit1(k - 1, lam)
        return c * (up / v[..., None] - (u / v**2)[..., None] * vp)

    def hessian(self, lam):
        lam, c, u, v = self._parts(lam)
        k = self.k
        up = sigma_omit1(k - 2, lam)
        vp = sigma_omit1(k - 1, lam)
        upq = sigma_omit2(k - 3, lam)
        vpq = sigma_omit2(k - 2, lam)
        v2 = v[..., None, None]
        u2 = u[..., None, None]
        cross = up[..., :, None] * vp[..., None, :] + vp[..., :, None] * up[..., None, :]
        outer = vp[..., :, None] * vp[..., None, :]
        return c * (upq / v2 - cross / v2**2 - u2 * vpq / v2**2 + 2 * u2 * outer / v2**3)

    def quotient(self, lam):
        lam, c, u, v = self._parts(lam)
        k = self.k
        upq = sigma_omit2(k - 3, lam)
        vpq = sigma_omit2(k - 2, lam)
        v2 = v[..., None, None]
        return c * (-upq / v2 + u[..., None, None] * vpq / v2**2)


class ScaledSpeed(SpeedFunction):
    """``factor * F``; ``factor = 0`` gives the zero speed."""

    def __init__(self, base, factor):
        self.base = base
        self.factor = float(factor)
        self.degree = base.degree

    def __repr__(self):
        return f"{self.factor:g}*{self.base!r}"

    def check_domain(self, lam):
        return self.base.check_domain(lam)

    def value(self, lam):
        return self.factor * self.base.value(lam)

    def gradient(self, lam):
        return self.factor * self.base.gradient(lam)

    def hessian(self, lam):
        return self.factor * self.base.hessian(lam)

    def quotient(self, lam):
        return self.factor * self.base.quotient(lam)


def parse_speed(text):
    """Parse ``sigma:k=2,alpha=1``, ``sum:a1=1,a2=0.5`` or ``ratio:k=2``."""
    kind, _, rest = text.partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"malformed speed parameter {item!r}")
        params[key.strip()] = float(val)
    kind = kind.strip().lower()
    if kind == "sigma":
        return SigmaPower(int(params.pop("k", 1)), params.pop("alpha", 1.0))
    if kind == "ratio":
        return SigmaRatio(int(params.pop("k")))
    if kind == "sum":
        idx = sorted(int(key[1:]) for key in params if key.startswith("a"))
        if not idx:
            raise ValueError("sum speed needs coefficients a1=..., a2=...")
        a = np.zeros(max(idx))
        for key, val in params.items():
            a[int(key[1:]) - 1] = val
        return SigmaSum(a)
    raise ValueError(f"unknown speed kind {kind!r}")


class TestFunction:
    """``g = s_1^k / s_k``, homogeneous of degree zero."""

    __test__ = False  # not a pytest class
    degree = 0

    def __init__(self, k):
        if k < 1:
            raise ValueError("k must be at least 1")
        self.k = int(k)

    def __repr__(self):
        return f"TestFunction(k={self.k})"

    def _parts(self, lam):
        lam = as_lambda(lam)
        if self.k > lam.shape[-1]:
            raise ValueError(f"k={self.k} exceeds n={lam.shape[-1]}")
        e = sigma_all(lam, self.k)
        s1, sk = e[..., 1], e[..., self.k]
        if np.any(s1 <= 0):
            raise DomainError("s_1 must be positive")
        if np.any(sk == 0):
            raise DomainError("s_k vanishes")
        return lam, s1, sk, s1**self.k / sk

    def value(self, lam):
        lam, _, _, g = self._parts(lam)
        return g if lam.ndim > 1 else float(g)

    def log_gradient(self, lam):
        """``grad g / g = k / s_1 - s_{k-1}(lam|p) / s_k``."""
        lam, s1, sk, _ = self._parts(lam)
        return (self.k / s1)[..., None] - sigma_omit1(self.k - 1, lam) / sk[..., None]

    def gradient(self, lam):
        lam, s1, sk, g = self._parts(lam)
        return g[..., None] * ((self.k / s1)[..., None] - sigma_omit1(self.k - 1, lam) / sk[..., None])

    def hessian(self, lam):
        lam, s1, sk, g = self._parts(lam)
        k = self.k
        v = sigma_omit1(k - 1, lam)
        w = sigma_omit2(k - 2, lam)
        s1_ = s1[..., None, None]
        sk_ = sk[..., None, None]
        return g[..., None, None] * (
            k * (k - 1) / s1_**2
            - k * (v[..., :, None] + v[..., None, :]) / (s1_ * sk_)
            - w / sk_
            + 2 * v[..., :, None] * v[..., None, :] / sk_**2
        )

    def quotient(self, lam):
        lam, s1, sk, g = self._parts(lam)
        return (g / sk)[..., None, None] * sigma_omit2(self.k - 2, lam)

    def euler_residual(self, lam):
        """``sum_p g_p lam_p``, zero by degree-zero homogeneity."""
        lam = as_lambda(lam)
        return np.sum(self.gradient(lam) * lam, axis=-1)


def term1_general(F, G, lam, literal=False):
    """``g_i l_i (1 - f_p l_p^2) + g_i l_i^2 (f_p l_p - f)`` (summed over repeated indices).

    When ``G`` is homogeneous of degree zero, ``g_i l_i`` vanishes exactly,
    and evaluating it in floating point leaves a roundoff residue that the
    dimensionful factor ``1 - f_p l_p^2`` can blow up by many orders of
    magnitude.  By default that factor is dropped and ``g_i l_i^2`` is
    evaluated as ``g_i l_i (l_i - mean(l))``, which avoids the cancellation
    near umbilic points.  ``literal=True`` evaluates the contraction as
    written.
    """
    lam = _positive(lam)
    f = F.value(lam)
    fp = F.gradient(lam)
    gp = G.gradient(lam)
    if literal or getattr(G, "degree", None) != 0:
        gl = np.sum(gp * lam, axis=-1)
        gl2 = np.sum(gp * lam**2, axis=-1)
    else:
        gl = 0.0
        gl2 = np.sum(gp * lam * (lam - lam.mean(axis=-1, keepdims=True)), axis=-1)
    out = gl * (1 - np.sum(fp * lam**2, axis=-1)) + gl2 * (np.sum(fp * lam, axis=-1) - f)
    return out if lam.ndim > 1 else float(out)


def term1_sigma_power(k, alpha, lam):
    """Closed form ``(k alpha - 1) f g ((k-1) s_1 - 2k s_2/s_1 + (k+1) s_{k+1}/s_k)``."""
    lam = _positive(lam)
    if k == 1:  # G is constant
        return np.zeros(lam.shape[:-1]) if lam.ndim > 1 else 0.0
    f = SigmaPower(k, alpha).value(lam)
    g = TestFunction(k).value(lam)
    return (k * alpha - 1) * f * g * corollary23_value(k, lam)


def term1_sigma_sum(a, lam):
    """Closed form ``g ((n-1) s_1 - 2n s_2/s_1) sum_l (l-1) a_l s_l`` with ``G = s_1^n/s_n``."""
    lam = _positive(lam)
    n = lam.shape[-1]
    F = SigmaSum(a)
    g = TestFunction(n).value(lam)
    # with s_{n+1} = 0 the bracket is the k = n corollary quantity
    return g * corollary23_value(n, lam) * F.euler_excess(lam)


@dataclass(frozen=True)
class GradientTensor:
    """Fully symmetric third-order tensor ``h[p, q, i]``."""

    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        n = h.shape[0]
        if h.shape != (n, n, n):
            raise ValueError(f"expected an (n, n, n) tensor, got {h.shape}")
        object.__setattr__(self, "h", h)

    @property
    def n(self):
        return self.h.shape[0]

    def symmetry_defect(self):
        h = self.h
        perms = [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
        return max(float(np.max(np.abs(h - h.transpose(p)))) for p in perms)

    def diagonal_slices(self):
        """``D[p, i] = h[p, p, i]``."""
        n = self.n
        return self.h[np.arange(n), np.arange(n), :]

    def grad_sigma1(self):
        """``nabla_i s_1 = sum_p h[p, p, i]``."""
        return self.diagonal_slices().sum(axis=0)


def _tensor(h3):
    return h3.h if isinstance(h3, GradientTensor) else GradientTensor(h3).h


def _test_k(G):
    return G.k if isinstance(G, TestFunction) else int(G)


def term2_general(F, G, lam, h3):
    """Gradient-quadratic term from the full contraction (no critical-point assumption).

    ``sum_i sum_{p,q} (f_i g_pq - g_i f_pq) h_ppi h_qqi
    + 2 sum_i sum_{p<q} (Qg_pq f_i - Qf_pq g_i) h_pqi^2``
    where ``Q`` denotes the divided differences of the gradients.
    """
    lam = _positive(lam)
    h = _tensor(h3)
    n = lam.shape[0]
    if h.shape[0] != n:
        raise ValueError("tensor and spectrum dimensions differ")
    f1, f2, fq = F.gradient(lam), F.hessian(lam), _offdiag(F.quotient(lam))
    g1, g2, gq = G.gradient(lam), G.hessian(lam), _offdiag(G.quotient(lam))
    D = h[np.arange(n), np.arange(n), :]  # D[p, i] = h_ppi
    first = np.einsum("i,pq,pi,qi->", f1, g2, D, D) - np.einsum("i,pq,pi,qi->", g1, f2, D, D)
    h2 = h**2
    second = np.einsum("pq,i,pqi->", gq, f1, h2) - np.einsum("pq,i,pqi->", fq, g1, h2)
    return float(first + second)


def constraint_residual(lam, G, h3):
    """Relative residual of ``k grad s_1 / s_1 = grad s_k / s_k`` per direction ``i``.

    Returns the maximum over ``i`` of ``|sum_p c_p h_ppi| / scale_i`` with
    ``c_p = k/s_1 - s_{k-1}(lam|p)/s_k``.
    """
    lam = _positive(lam)
    k = _test_k(G)
    h = _tensor(h3)
    n = lam.shape[0]
    e = sigma_all(lam, k)
    s1, sk = e[1], e[k]
    v = sigma_omit1(k - 1, lam) / sk
    c = k / s1 - v
    D = h[np.arange(n), np.arange(n), :]
    resid = np.abs(c @ D)
    scale = (k / s1 + np.abs(v)) @ np.abs(D)
    scale = np.maximum(scale, np.finfo(float).tiny)
    return float(np.max(np.where(resid == 0, 0.0, resid / scale)))


def _require_constraint(lam, G, h3, tol):
    r = constraint_residual(lam, G, h3)
    if r > tol:
        raise ConstraintError(
            f"tensor violates the critical-point constraint (relative residual {r:.3e} > {tol:g})",
            residual=r,
        )


def _regrouped(A3, B, h):
    """Regrouped form of ``sum_{i!=j} sum_p A_ijp (h_ijp^2 - h_iip h_jjp) + sum_p B_p (sum_i h_iip)^2``.

    ``B_i h_iii^2 + (2 A_iji + B_j) h_iij^2 + A_ijp h_ijp^2 + 2 (B_i - A_iji) h_iii h_jji
    + (B_p - A_ijp) h_iip h_jjp`` with the last two sums over pairwise distinct indices.
    """
    n = B.shape[0]
    r = np.arange(n)
    hd = h[r, r, r]
    Aiji = A3[:, :, :][r[:, None], r[None, :], r[:, None]]  # Aiji[i, j] = A[i, j, i]
    hiij = h[r[:, None], r[:, None], r[None, :]]  # hiij[i, j] = h_iij
    off = ~np.eye(n, dtype=bool)
    distinct = off[:, :, None] & off[:, None, :] & off[None, :, :]
    total = np.sum(B * hd**2)
    total += np.sum(off * (2 * Aiji + B[None, :]) * hiij**2)
    total += np.sum(distinct * A3 * h**2)
    # hjji[i, j] = h_jji
    total += 2 * np.sum(off * (B[:, None] - Aiji) * hd[:, None] * hiij.T)
    D = h[r, r, :]  # D[i, p] = h_iip
    cross = D[:, None, :] * D[None, :, :]  # cross[i, j, p] = h_iip h_jjp
    total += np.sum(distinct * (B[None, None, :] - A3) * cross)
    return float(total)


def _ab_direct(A3, B, h):
    n = B.shape[0]
    r = np.arange(n)
    off = ~np.eye(n, dtype=bool)
    D = h[r, r, :]
    cross = D[:, None, :] * D[None, :, :]
    grad1 = D.sum(axis=0)
    return float(np.sum(off[:, :, None] * A3 * (h**2 - cross)) + np.sum(B * grad1**2))


@dataclass(frozen=True)
class Term2Result:
    value: float  # prefactor * bracket
    bracket: float  # closed-form expression at the critical point
    decomposition: float  # regrouped A/B form of the bracket
    prefactor: float


def term2_sigma_power(k, alpha, lam, h3, tol=1e-10):
    """TERM II for ``F = s_k^alpha`` and ``G = s_1^k / s_k`` at a critical point of ``G``.

    ``value = alpha k f g / (s_1^3 s_k) * (sum_i sum_{p!=q} s_1^2 s_{k-2}(lam|pq)
    (h_pqi^2 - h_ppi h_qqi) + sum_i B_i (nabla_i s_1)^2)`` with
    ``B_i = -(alpha-1) k^2 s_k + (alpha k - 1) s_1 s_{k-1}(lam|i)``.
    """
    lam = _positive(lam)
    h = _tensor(h3)
    n = lam.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    _require_constraint(lam, k, h, tol)
    e = sigma_all(lam, k)
    s1, sk = e[1], e[k]
    f = sk**alpha
    g = s1**k / sk
    A = s1**2 * sigma_omit2(k - 2, lam)
    B = -(alpha - 1) * k**2 * sk + (alpha * k - 1) * s1 * sigma_omit1(k - 1, lam)
    r = np.arange(n)
    D = h[r, r, :]
    grad1 = D.sum(axis=0)
    cross = np.einsum("pi,qi->pqi", D, D)
    bracket = float(np.einsum("pq,pqi->", A, h**2 - cross) + np.sum(B * grad1**2))
    A3 = np.broadcast_to(A[:, :, None], (n, n, n))
    decomposition = _regrouped(A3, B, h)
    prefactor = alpha * k * f * g / (s1**3 * sk)
    return Term2Result(prefactor * bracket, bracket, decomposition, float(prefactor))


def _phi_direct(l, lam, h):
    """Closed-form double sum for ``Phi(s_l, g)`` divided by ``g``."""
    n = lam.shape[0]
    s1 = lam.sum()
    om1 = sigma_omit1(l - 1, lam)
    om2 = sigma_omit2(l - 2, lam)
    inv = 1.0 / lam
    # coef[p, q, i] for the pair (p, q) and direction i
    coef = om1[None, None, :] * (inv[:, None] * inv[None, :])[:, :, None] + om2[:, :, None] * (
        n / s1 - inv[None, None, :]
    )
    off = ~np.eye(n, dtype=bool)
    r = np.arange(n)
    D = h[r, r, :]
    cross = np.einsum("pi,qi->pqi", D, D)
    grad1 = D.sum(axis=0)
    return float(np.sum(off[:, :, None] * coef * (h**2 - cross)) + np.sum(n * (n - 1) * om1 / s1**2 * grad1**2))


def term2_sigma_sum(a, lam, h3, tol=1e-10):
    """TERM II for ``F = sum_l a_l s_l`` and ``G = s_1^n / s_n`` at a critical point of ``G``.

    Returns a :class:`Term2Result` whose ``bracket`` is the direct double-sum
    evaluation of ``sum_l a_l Phi(s_l, g) / g`` and ``decomposition`` the
    regrouped ``A_ijp / B_p`` form; ``value`` multiplies the bracket by ``g``.
    """
    lam = _positive(lam)
    h = _tensor(h3)
    n = lam.shape[0]
    _require_constraint(lam, n, h, tol)
    coeffs = SigmaSum(a)._coeffs(n)
    g = TestFunction(n).value(lam)
    direct = 0.0
    regrouped = 0.0
    for l, al in enumerate(coeffs, start=1):
        if al == 0:
            continue
        direct += al * _phi_direct(l, lam, h)
        A3, B = section5_terms(l, lam)
        regrouped += al * _regrouped(A3, B, h)
    return Term2Result(float(g * direct), float(direct), float(regrouped), float(g))


def symmetric_tensor(n, rng):
    """Fully symmetric tensor with one independent standard normal per index multiset."""
    raw = rng.standard_normal((n, n, n))
    idx = np.sort(np.stack(np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")), axis=0)
    return raw[idx[0], idx[1], idx[2]]


def project_constraint(lam, G, h3):
    """Orthogonally project each diagonal slice ``(h_11i, ..., h_nni)`` onto
    ``sum_p c_p h_ppi = 0``.

    Slices for different ``i`` share no independent component, so the
    projections are independent and the result stays fully symmetric.
    """
    lam = _positive(lam)
    k = _test_k(G)
    h = _tensor(h3).copy()
    n = lam.shape[0]
    e = sigma_all(lam, k)
    s1, sk = e[1], e[k]
    c = k / s1 - sigma_omit1(k - 1, lam) / sk
    if np.linalg.norm(c) <= 1e-12 * (k / s1) * np.sqrt(n):
        return h  # umbilic: every tensor already satisfies the constraint
    cc = c @ c
    for i in range(n):
        d = h[np.arange(n), np.arange(n), i]
        d = d - (c @ d) / cc * c
        for p in range(n):
            h[p, p, i] = h[p, i, p] = h[i, p, p] = d[p]
    return h


def sample_constrained_tensor(lam, G, seed):
    """Random symmetric tensor satisfying the critical-point constraint of ``G``.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = as_lambda(lam).shape[-1]
    return GradientTensor(project_constraint(lam, G, symmetric_tensor(n, rng)))


@dataclass(frozen=True)
class SphereRadius:
    radius: float | None
    every_radius: bool = False


def _sphere_residual(F, n, r):
    return F.value(np.full(n, 1.0 / r)) - r


def sphere_radius(F, n, bracket=(1e-6, 1e6), cap=1e12, rtol=1e-15):
    """Radius ``r`` of the centred sphere solving ``f(1/r, ..., 1/r) = r``."""
    if isinstance(F, ScaledSpeed):
        F_base, factor = F.base, F.factor
    else:
        F_base, factor = F, 1.0
    if isinstance(F_base, SigmaPower) and factor == 1.0:
        k, a = F_base.k, F_base.alpha
        if k > n:
            raise ValueError(f"k={k} exceeds n={n}")
        return SphereRadius(comb(n, k) ** (a / (1 + k * a)))
    r1, r2 = 0.7, 1.9
    if abs(_sphere_residual(F, n, r1)) <= 1e-12 * r1 and abs(_sphere_residual(F, n, r2)) <= 1e-12 * r2:
        return SphereRadius(None, every_radius=True)
    lo, hi = bracket
    # residual is decreasing in r for non-negative coefficients
    while _sphere_residual(F, n, lo) <= 0 and lo > 1.0 / cap:
        lo /= 10.0
    while _sphere_residual(F, n, hi) >= 0 and hi < cap:
        hi *= 10.0
    flo, fhi = _sphere_residual(F, n, lo), _sphere_residual(F, n, hi)
    if not (flo > 0 > fhi):
        raise NumericalError(f"no sign change of f(1/r) - r on [{lo:g}, {hi:g}]", residual=min(abs(flo), abs(fhi)))
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if _sphere_residual(F, n, mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return SphereRadius(0.5 * (lo + hi))
