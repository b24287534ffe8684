"""Discrete convex hypersurfaces of revolution in R^{n+1}.

A body of revolution is described by its generating profile
``(x(u), rho(u))`` in the half-plane ``rho >= 0``, rotated about the x-axis.
The profile meets the axis at both ends.  Reflecting it across the axis gives
a closed smooth curve, so derivatives are taken with periodic sixth-order
central differences in the sample index; no one-sided stencils are needed
at the poles.

Sign conventions: the unit normal points inward and the second fundamental
form is ``<D_{e_i} e_j, nu>``, so convex bodies have positive principal
curvatures and a centred sphere of radius ``r`` has support ``<X, nu> = -r``.
"""

import csv
from dataclasses import dataclass
from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy.fft import dst

from .errors import DomainError, GeometryError
from .symfun import sigma_all

__all__ = [
    "ProfileCurve",
    "SurfaceSamples",
    "sphere_surface_area",
    "ball_volume",
    "curvatures_of_revolution",
    "surface_area",
    "enclosed_volume",
    "support_identity_residual",
    "minkowski_terms",
    "minkowski_residual",
    "shrinker_residual",
    "theorem18_integrals",
    "save_profile_csv",
    "load_profile_csv",
    "save_samples_csv",
    "parse_shape",
]


def sphere_surface_area(m):
    """Area of the unit ``m``-sphere in ``R^{m+1}``."""
    return 2 * pi ** ((m + 1) / 2) / gamma((m + 1) / 2)


def ball_volume(m):
    """Volume of the unit ball in ``R^m``."""
    return pi ** (m / 2) / gamma(m / 2 + 1)


@dataclass(frozen=True)
class ProfileCurve:
    """Generating curve of a hypersurface of revolution ``M^n`` in ``R^{n+1}``.

    ``x`` and ``rho`` hold ``N + 1`` samples at equally spaced values of some
    smooth parameter; ``rho`` vanishes exactly at both ends and is positive
    in between.  ``n`` is the dimension of the hypersurface.
    """

    x: np.ndarray
    rho: np.ndarray
    n: int = 2

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        if x.ndim != 1 or x.shape != rho.shape:
            raise GeometryError("x and rho must be 1-d arrays of equal length")
        if x.size < 5:
            raise GeometryError("need at least 5 samples")
        if self.n < 2:
            raise GeometryError("hypersurface dimension n must be at least 2")
        if rho[0] != 0.0 or rho[-1] != 0.0:
            raise GeometryError("profile must start and end on the axis (rho = 0)")
        if not np.all(rho[1:-1] > 0):
            bad = int(np.flatnonzero(rho[1:-1] <= 0)[0]) + 1
            raise GeometryError(f"rho must be positive in the interior (sample {bad})")
        seg = np.hypot(np.diff(x), np.diff(rho))
        if not np.all(seg > 0):
            raise GeometryError("repeated consecutive samples (non-monotone arclength)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "n", int(self.n))

    def __len__(self):
        return self.x.size

    @property
    def arclength(self):
        """Cumulative chord length, starting at 0."""
        return np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(self.x), np.diff(self.rho)))])

    @property
    def orientation(self):
        """+1 when the profile runs from larger to smaller x (counter-clockwise)."""
        return 1.0 if self.x[0] > self.x[-1] else -1.0

    def translated(self, dx):
        return ProfileCurve(self.x + dx, self.rho.copy(), self.n)

    def scaled(self, factor):
        rho = self.rho * factor
        rho[0] = rho[-1] = 0.0
        return ProfileCurve(self.x * factor, rho, self.n)

    def with_n(self, n):
        return ProfileCurve(self.x.copy(), self.rho.copy(), n)

    @classmethod
    def ellipsoid(cls, a, b, samples=1025, n=2, center=0.0):
        """Ellipsoid of revolution: semi-axis ``a`` along the axis, ``b`` across it."""
        u = np.linspace(0.0, pi, samples)
        x = center + a * np.cos(u)
        rho = b * np.sin(u)
        rho[0] = rho[-1] = 0.0
        return cls(x, rho, n)

    @classmethod
    def sphere(cls, radius, samples=1025, n=2, center=0.0):
        return cls.ellipsoid(radius, radius, samples, n, center)


def _loop(curve):
    """Closed curve obtained by reflecting the profile across the axis."""
    x, rho = curve.x, curve.rho
    return np.concatenate([x, x[-2:0:-1]]), np.concatenate([rho, -rho[-2:0:-1]])


def _wrap(f):
    return np.concatenate([f[-3:], f, f[:3]])


def _d1(f):
    g = _wrap(f)
    m = f.size
    return (g[6:] - 9 * g[5 : m + 5] + 45 * g[4 : m + 4] - 45 * g[2 : m + 2] + 9 * g[1 : m + 1] - g[: m]) / 60.0


def _d2(f):
    g = _wrap(f)
    m = f.size
    return (
        2 * g[6:]
        - 27 * g[5 : m + 5]
        + 270 * g[4 : m + 4]
        - 490 * f
        + 270 * g[2 : m + 2]
        - 27 * g[1 : m + 1]
        + 2 * g[:m]
    ) / 180.0


@lru_cache(maxsize=64)
def _half_period_weights(m, odd):
    """Quadrature weights on ``m`` samples ``u_j = j pi / N`` of ``[0, pi]``, unit spacing in ``j``.

    The integrand must extend to a smooth periodic function that is even
    (``odd=False``) or odd (``odd=True``) about both ends.  Even extensions
    use the trapezoid rule.  Odd ones are integrated through their sine
    series, ``int_0^pi sin(k u) du = 2/k`` for odd ``k``; the DST-I matrix is
    symmetric, so the weight vector is itself a DST-I.  Both are spectrally
    accurate.
    """
    N = m - 1
    if N < 2:
        raise GeometryError("too few samples for quadrature")
    w = np.ones(m)
    if not odd:
        w[0] = w[-1] = 0.5
    else:
        k = np.arange(1, N)
        c = np.where(k % 2 == 1, 2.0 / (pi * k), 0.0)
        w[1:-1] = dst(c, type=1)
        w[0] = w[-1] = 0.0
    w.flags.writeable = False
    return w


@dataclass(frozen=True)
class SurfaceSamples:
    """Per-sample geometry of a hypersurface of revolution (struct of arrays).

    The principal curvatures at a sample are ``lambda_profile`` once and
    ``lambda_rot`` with multiplicity ``n - 1``.  ``area_weight`` integrates a
    rotation-invariant function against the ``n``-dimensional area measure.
    """

    n: int
    s: np.ndarray
    x: np.ndarray
    rho: np.ndarray
    normal: np.ndarray  # inward unit normal, shape (N+1, 2) in the (x, rho) plane
    tangent: np.ndarray
    lambda_profile: np.ndarray
    lambda_rot: np.ndarray
    support: np.ndarray  # <X, nu>
    tangential: np.ndarray  # <X, T>
    dsupport: np.ndarray  # d<X, nu>/ds along the profile
    area_weight: np.ndarray

    def __len__(self):
        return self.x.size

    @property
    def spectra(self):
        """Principal curvature vectors, shape ``(N+1, n)``."""
        rot = np.repeat(self.lambda_rot[:, None], self.n - 1, axis=1)
        return np.concatenate([self.lambda_profile[:, None], rot], axis=1)

    def integrate(self, values):
        return float(np.sum(self.area_weight * values))


def curvatures_of_revolution(curve):
    """Normals, principal curvatures, support values and area weights at every sample."""
    if not isinstance(curve, ProfileCurve):
        raise TypeError("expected a ProfileCurve")
    m = curve.x.size
    lx, lr = _loop(curve)
    xd, rd = _d1(lx), _d1(lr)
    xdd, rdd = _d2(lx), _d2(lr)
    speed = np.hypot(xd, rd)
    if np.any(speed <= 0):
        raise GeometryError("degenerate parameterization (zero speed)")
    o = curve.orientation
    tangent = np.stack([xd, rd], axis=1) / speed[:, None]
    normal = o * np.stack([-rd, xd], axis=1) / speed[:, None]
    kappa = o * (xd * rdd - rd * xdd) / speed**3
    support = lx * normal[:, 0] + lr * normal[:, 1]
    dsupport = _d1(support) / speed

    sl = slice(0, m)
    rho = curve.rho
    lam_rot = np.empty(m)
    interior = slice(1, m - 1)
    lam_rot[interior] = -normal[interior, 1] / rho[interior]
    # poles of a smooth body of revolution are umbilic
    lam_rot[0] = kappa[0]
    lam_rot[-1] = kappa[m - 1]

    n = curve.n
    weight = sphere_surface_area(n - 1) * rho ** (n - 1) * speed[sl] * _half_period_weights(m, n % 2 == 0)
    return SurfaceSamples(
        n=n,
        s=curve.arclength,
        x=curve.x.copy(),
        rho=rho.copy(),
        normal=normal[sl],
        tangent=tangent[sl],
        lambda_profile=kappa[sl],
        lambda_rot=lam_rot,
        support=support[sl],
        tangential=(lx * tangent[:, 0] + lr * tangent[:, 1])[sl],
        dsupport=dsupport[sl],
        area_weight=weight,
    )


def _samples(obj):
    return obj if isinstance(obj, SurfaceSamples) else curvatures_of_revolution(obj)


def surface_area(samples):
    return float(np.sum(_samples(samples).area_weight))


def enclosed_volume(curve):
    """Volume of the body bounded by the hypersurface, ``|B^n| * int rho^n |dx|``."""
    lx, _ = _loop(curve)
    xd = _d1(lx)[: curve.x.size]
    # rho^n x' is even about the poles for odd n and odd for even n
    total = float(curve.rho**curve.n * xd @ _half_period_weights(xd.size, curve.n % 2 == 0))
    return float(ball_volume(curve.n) * abs(total))


def support_identity_residual(samples):
    """``max |d<X, nu>/ds + lambda_profile <X, T>|`` over the samples.

    The identity ``d<X, nu>/ds = -h(X^T, T)`` holds on every hypersurface;
    in rotational directions both sides vanish identically.
    """
    smp = _samples(samples)
    return float(np.max(np.abs(smp.dsupport + smp.lambda_profile * smp.tangential)))


def minkowski_terms(k, samples):
    """``(k int s_k <X, nu>, (n-k+1) int s_{k-1}, int s_{k-1})``."""
    smp = _samples(samples)
    n = smp.n
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    e = sigma_all(smp.spectra, k)
    first = k * smp.integrate(e[:, k] * smp.support)
    base = smp.integrate(e[:, k - 1])
    return first, (n - k + 1) * base, base


def minkowski_residual(k, samples):
    """Quadrature of ``k int s_k <X, nu> + (n-k+1) int s_{k-1}`` divided by ``int s_{k-1}``."""
    first, second, base = minkowski_terms(k, samples)
    return (first + second) / base


def shrinker_residual(F, samples):
    """Per-sample ``F(lam) + <X, nu>`` and its maximum absolute value."""
    smp = _samples(samples)
    spectra = smp.spectra
    try:
        F.check_domain(spectra)
    except DomainError:
        for idx in range(spectra.shape[0]):
            try:
                F.check_domain(spectra[idx])
            except DomainError as exc:
                raise DomainError(f"sample {idx}: {exc}") from exc
        raise
    field = np.asarray(F.value(spectra)) + smp.support
    return field, float(np.max(np.abs(field)))


def theorem18_integrals(F, k, samples):
    """``(int k s_k (-F + (n-k+1) s_{k-1}/(k s_k)), int (k-1) s_{k-1} (-F + (n-k+2) s_{k-2}/((k-1) s_{k-1})))``.

    Both vanish for a solution of ``F = -<X, nu>`` by the Minkowski identity.
    The second (level ``k-1``) integral is reported as 0 for ``k = 1``.
    """
    smp = _samples(samples)
    n = smp.n
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    spectra = smp.spectra
    e = sigma_all(spectra, k)
    if not np.all(e[:, 1:] > 0):
        bad = int(np.flatnonzero(~np.all(e[:, 1:] > 0, axis=1))[0])
        raise DomainError(f"sample {bad} is not strictly {k}-convex")
    f = np.asarray(F.value(spectra))
    level_k = smp.integrate(k * e[:, k] * (-f + (n - k + 1) * e[:, k - 1] / (k * e[:, k])))
    if k == 1:
        return level_k, 0.0
    level_km1 = smp.integrate(
        (k - 1) * e[:, k - 1] * (-f + (n - k + 2) * e[:, k - 2] / ((k - 1) * e[:, k - 1]))
    )
    return level_k, level_km1


def save_profile_csv(curve, path):
    """Write columns ``s, x, rho``; the dimension ``n`` goes in a comment line."""
    s = curve.arclength
    with open(path, "w", newline="") as fh:
        fh.write(f"# n={curve.n}\n")
        writer = csv.writer(fh)
        writer.writerow(["s", "x", "rho"])
        for row in zip(s, curve.x, curve.rho):
            writer.writerow([repr(float(v)) for v in row])


def load_profile_csv(path, n=None):
    header_n = None
    rows = []
    with open(path, newline="") as fh:
        lines = []
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                if key.strip() == "n":
                    header_n = int(val)
                continue
            lines.append(line)
    reader = csv.DictReader(lines)
    missing = {"x", "rho"} - set(reader.fieldnames or [])
    if missing:
        raise GeometryError(f"profile CSV lacks columns {sorted(missing)}")
    for row in reader:
        rows.append((float(row["x"]), float(row["rho"])))
    arr = np.array(rows)
    return ProfileCurve(arr[:, 0], arr[:, 1], n or header_n or 2)


def save_samples_csv(samples, path):
    smp = _samples(samples)
    cols = ["s", "x", "rho", "lambda_profile", "lambda_rot", "support", "areaWeight"]
    data = np.column_stack(
        [smp.s, smp.x, smp.rho, smp.lambda_profile, smp.lambda_rot, smp.support, smp.area_weight]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in data:
            writer.writerow([repr(float(v)) for v in row])


def parse_shape(text, samples=1025, n=2):
    """``sphere:r``, ``ellipsoid:a,b`` (optionally ``ellipsoid:a,b,center``) or ``file:path.csv``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "file":
        return load_profile_csv(rest, n)
    vals = [float(v) for v in rest.split(",") if v.strip()]
    if kind == "sphere":
        if len(vals) not in (1, 2):
            raise ValueError("sphere takes a radius and an optional center")
        return ProfileCurve.sphere(vals[0], samples, n, *(vals[1:]))
    if kind == "ellipsoid":
        if len(vals) not in (2, 3):
            raise ValueError("ellipsoid takes a, b and an optional center")
        return ProfileCurve.ellipsoid(vals[0], vals[1], samples, n, *(vals[2:]))
    raise ValueError(f"unknown shape {kind!r}")
