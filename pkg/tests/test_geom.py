from math import comb, sqrt

import numpy as np
import pytest

from oracles import ellipsoid_area, ellipsoid_curvatures
from sigmaflow.errors import DomainError, GeometryError
from sigmaflow.geom import (
    ProfileCurve,
    ball_volume,
    curvatures_of_revolution,
    enclosed_volume,
    load_profile_csv,
    minkowski_residual,
    minkowski_terms,
    parse_shape,
    save_profile_csv,
    save_samples_csv,
    shrinker_residual,
    sphere_surface_area,
    support_identity_residual,
    surface_area,
    theorem18_integrals,
)
from sigmaflow.shrinker import SigmaPower, SigmaRatio, SigmaSum, sphere_radius


def test_sphere_signs():
    smp = curvatures_of_revolution(ProfileCurve.sphere(2.0, 65, n=3))
    np.testing.assert_allclose(smp.spectra, 0.5, atol=1e-10)
    np.testing.assert_allclose(smp.support, -2.0, atol=1e-12)
    assert smp.spectra.shape == (65, 3)
    np.testing.assert_allclose(np.hypot(*smp.normal.T), 1.0, atol=1e-14)


def test_orientation_does_not_matter():
    c = ProfileCurve.ellipsoid(1.0, 1.3, 129)
    rev = ProfileCurve(c.x[::-1], c.rho[::-1])
    a, b = curvatures_of_revolution(c), curvatures_of_revolution(rev)
    np.testing.assert_allclose(a.lambda_profile[::-1], b.lambda_profile, rtol=1e-12)
    np.testing.assert_allclose(a.support[::-1], b.support, rtol=1e-12)


def test_ellipsoid_curvatures_against_closed_form():
    errs = []
    for N in (33, 65, 129):
        smp = curvatures_of_revolution(ProfileCurve.ellipsoid(1.0, 1.2, N))
        u = np.linspace(0, np.pi, N)
        kp, kr = ellipsoid_curvatures(1.0, 1.2, u)
        errs.append(max(np.max(np.abs(smp.lambda_profile - kp)), np.max(np.abs(smp.lambda_rot - kr))))
    assert errs[-1] < 1e-10
    assert errs[0] / errs[1] > 16 and errs[1] / errs[2] > 16


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (1.0, 1.2), (1.5, 0.7)])
def test_area_and_volume(a, b):
    c = ProfileCurve.ellipsoid(a, b, 257)
    assert surface_area(c) == pytest.approx(ellipsoid_area(a, b), rel=1e-8)
    assert enclosed_volume(c) == pytest.approx(4 / 3 * np.pi * a * b * b, rel=1e-10)


def test_higher_dimensional_sphere_measures():
    for n in (2, 3, 4, 5):
        c = ProfileCurve.sphere(1.3, 257, n=n)
        assert surface_area(c) == pytest.approx(sphere_surface_area(n) * 1.3**n, rel=1e-9)
        assert enclosed_volume(c) == pytest.approx(ball_volume(n + 1) * 1.3 ** (n + 1), rel=1e-10)
    assert sphere_surface_area(2) == pytest.approx(4 * np.pi)
    assert ball_volume(3) == pytest.approx(4 * np.pi / 3)


def test_support_identity():
    assert support_identity_residual(ProfileCurve.sphere(1.0, 129)) <= 1e-12
    for make in (lambda N: ProfileCurve.sphere(1.0, N, center=0.3), lambda N: ProfileCurve.ellipsoid(1.0, 1.2, N)):
        r = [support_identity_residual(make(N)) for N in (33, 65, 129)]
        assert r[0] / r[1] > 4 and r[1] / r[2] > 4


def test_minkowski_convergence():
    for k in (1, 2):
        res = [abs(minkowski_residual(k, ProfileCurve.ellipsoid(1.0, 1.2, N))) for N in (33, 65, 129, 257)]
        orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
        assert np.all(orders >= 2)
        assert res[-1] < 1e-8
    # origin placement inside the body does not matter
    for k in (1, 2, 3):
        assert abs(minkowski_residual(k, ProfileCurve.ellipsoid(1.0, 1.2, 257, n=3, center=0.4))) < 1e-7
    first, second, base = minkowski_terms(2, ProfileCurve.sphere(1.0, 257))
    assert first == pytest.approx(-8 * np.pi, rel=1e-9) and base == pytest.approx(8 * np.pi, rel=1e-9)


def test_shrinker_residual():
    for n in (2, 3, 4):
        c = ProfileCurve.sphere(sqrt(n), 257, n=n)
        assert shrinker_residual(SigmaPower(1), c)[1] <= 1e-10
        for k, a in [(2, 1.0), (n, 0.5), (2, 2.0)]:
            r = comb(n, k) ** (a / (1 + k * a))
            assert shrinker_residual(SigmaPower(k, a), ProfileCurve.sphere(r, 257, n=n))[1] <= 1e-10
    F = SigmaSum([1.0, 1.0])
    r = sphere_radius(F, 2).radius
    assert shrinker_residual(F, ProfileCurve.sphere(r, 257))[1] <= 1e-10
    assert shrinker_residual(SigmaPower(1), ProfileCurve.ellipsoid(1.0, 1.2, 257))[1] > 0.01


def test_shrinker_residual_reports_sample():
    # a peanut-shaped profile has negative profile curvature at the waist
    u = np.linspace(0, np.pi, 129)
    rho = np.sin(u) * (1 - 0.5 * np.sin(u) ** 2)
    rho[0] = rho[-1] = 0.0
    c = ProfileCurve(2 * np.cos(u), rho)
    with pytest.raises(DomainError, match="sample"):
        shrinker_residual(SigmaPower(2), c)


def test_theorem18_integrals():
    for k in (1, 2, 3):
        a, b = theorem18_integrals(SigmaRatio(k), k, ProfileCurve.sphere(0.8, 257, n=3))
        assert abs(a) <= 1e-10 and abs(b) <= 1e-10
    c = ProfileCurve.sphere(1.7, 257)
    level_k, _ = theorem18_integrals(SigmaPower(1), 1, c)
    first, second, _ = minkowski_terms(1, c)
    smp = curvatures_of_revolution(c)
    s1 = smp.spectra.sum(axis=1)
    assert level_k == pytest.approx(smp.integrate(-s1 * s1 + 2.0), rel=1e-12)
    assert abs(first + second) < 1e-9
    with pytest.raises(ValueError):
        theorem18_integrals(SigmaPower(1), 4, c)


def test_profile_validation():
    with pytest.raises(GeometryError):
        ProfileCurve([0, 1, 2, 3, 4], [0, 1, 1, 1, 0.1])
    with pytest.raises(GeometryError):
        ProfileCurve([0, 1, 2, 3, 4], [0, 1, -1, 1, 0])
    with pytest.raises(GeometryError):
        ProfileCurve([0, 1, 1, 3, 4], [0, 1, 1, 1, 0])
    with pytest.raises(GeometryError):
        ProfileCurve([0, 1, 2], [0, 1, 0])
    with pytest.raises(GeometryError):
        ProfileCurve.sphere(1.0, 33, n=1)


def test_csv_round_trip(tmp_path):
    c = ProfileCurve.ellipsoid(1.0, 1.2, 65, n=3)
    save_profile_csv(c, tmp_path / "p.csv")
    back = load_profile_csv(tmp_path / "p.csv")
    assert back.n == 3
    np.testing.assert_array_equal(back.x, c.x)
    np.testing.assert_array_equal(back.rho, c.rho)
    save_samples_csv(c, tmp_path / "s.csv")
    header = (tmp_path / "s.csv").read_text().splitlines()[0]
    assert header.split(",")[:3] == ["s", "x", "rho"]
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(GeometryError):
        load_profile_csv(tmp_path / "bad.csv")


def test_parse_shape(tmp_path):
    assert len(parse_shape("sphere:2", samples=33)) == 33
    assert parse_shape("ellipsoid:1,1.2,0.5", samples=33, n=4).n == 4
    save_profile_csv(ProfileCurve.sphere(1.0, 33), tmp_path / "p.csv")
    assert len(parse_shape(f"file:{tmp_path / 'p.csv'}")) == 33
    for bad in ("cube:1", "sphere:", "ellipsoid:1"):
        with pytest.raises(ValueError):
            parse_shape(bad)
