import json
from math import comb, sqrt

import numpy as np
import pytest

from sigmaflow.flow import (
    CFL_LIMIT,
    FlowOptions,
    UnsupportedSpeedError,
    hausdorff_distance,
    initial_state,
    redistribute,
    run,
    run_normalized,
    selfsimilar_rescale_check,
    sphere_equivalent_radius,
    sphere_extinction_time,
    sphere_radius_closed_form,
    stable_dt,
    step,
    write_trajectory,
)
from sigmaflow.geom import ProfileCurve
from sigmaflow.shrinker import SigmaPower, SigmaRatio, SigmaSum


def _closed_form_error(traj, n, k, alpha, window=0.9):
    r0 = traj[0].diagnostics.r_eq
    T = sphere_extinction_time(r0, n, k, alpha)
    errs = []
    for s in traj:
        if s.time > window * T:
            break
        exact = sphere_radius_closed_form(r0, n, k, alpha, s.time)
        errs.append(abs(s.diagnostics.r_eq - exact) / exact)
    return max(errs)


def test_closed_form_helpers():
    assert sphere_radius_closed_form(2.0, 2, 1, 1.0, 0.75) == pytest.approx(1.0)
    assert sphere_extinction_time(2.0, 2, 1, 1.0) == pytest.approx(1.0)
    assert sphere_extinction_time(1.0, 3, 2, 1.0) == pytest.approx(1 / 9)
    assert sphere_radius_closed_form(1.0, 3, 2, 1.0, 1.0) == 0.0
    assert sphere_equivalent_radius(ProfileCurve.sphere(1.7, 65, n=3)) == pytest.approx(1.7, rel=1e-10)


@pytest.mark.parametrize("n,k,alpha", [(2, 1, 1.0), (3, 1, 1.0), (3, 2, 0.5), (3, 3, 1.0)])
def test_sphere_runs_with_quarter_cap(n, k, alpha):
    F = SigmaPower(k, alpha)
    r0 = 1.0
    T = sphere_extinction_time(r0, n, k, alpha)
    traj, reason = run(ProfileCurve.sphere(r0, 33, n=n), F, FlowOptions(cfl=CFL_LIMIT / 4, t_end=0.9 * T))
    assert reason == "t_end"
    assert _closed_form_error(traj, n, k, alpha) <= 1e-6
    times = np.array([s.time for s in traj])
    assert np.all(np.diff(times) > 0)
    assert all(s.diagnostics.lam_min > 0 for s in traj)


def test_zero_speed_is_identity():
    F = SigmaPower(1).scaled(0.0)
    c = ProfileCurve.sphere(1.3, 33, n=3)
    st = initial_state(c, F)
    for _ in range(5):
        st = step(st, F, 1e-3)
    np.testing.assert_array_equal(st.curve.x, c.x)
    np.testing.assert_array_equal(st.curve.rho, c.rho)
    assert st.time == pytest.approx(5e-3)
    # uneven spacing triggers a resample, which only slides samples along the curve
    c = ProfileCurve.ellipsoid(1.0, 1.3, 33)
    st = step(initial_state(c, F), F, 1e-3)
    assert hausdorff_distance(st.curve, c) < 1e-4
    with pytest.raises(ValueError):
        run(c, F, FlowOptions(max_steps=3))


def test_reflection_symmetry_is_preserved():
    F = SigmaPower(2, 1.0)
    st = initial_state(ProfileCurve.ellipsoid(1.0, 1.2, 41), F)
    for _ in range(100):
        st = step(st, F, stable_dt(st.curve, F))
        x, r = st.curve.x, st.curve.rho
        assert np.max(np.abs(x + x[::-1])) <= 1e-10
        assert np.max(np.abs(r - r[::-1])) <= 1e-10


def test_step_guards():
    F = SigmaPower(1)
    st = initial_state(ProfileCurve.sphere(1.0, 33), F)
    with pytest.raises(ValueError):
        step(st, F, st.diagnostics.dt_scale)
    with pytest.raises(ValueError):
        step(st, F, -1.0)
    with pytest.raises(ValueError):
        FlowOptions(cfl=0.9)


def test_nonconvex_start_is_flagged():
    u = np.linspace(0, np.pi, 65)
    rho = np.sin(u) * (1 - 0.5 * np.sin(u) ** 2)
    rho[0] = rho[-1] = 0.0
    c = ProfileCurve(2 * np.cos(u), rho)
    F = SigmaPower(1)
    st = initial_state(c, F)
    assert st.status == "nonconvex" and st.terminal
    traj, reason = run(c, F)
    assert reason == "nonconvex" and len(traj) == 1
    with pytest.raises(ValueError):
        step(st, F, 1e-6)


def test_extinction_flag():
    F = SigmaPower(1)
    traj, reason = run(ProfileCurve.sphere(1.0, 33), F, FlowOptions(r_min=0.0, curvature_cap=5.0))
    assert reason == "extinction"
    assert traj[-1].terminal and traj[-1].diagnostics.lam_max > 5.0


def test_normalized_sphere_is_stationary():
    F = SigmaPower(2, 1.0)
    traj, reason = run_normalized(ProfileCurve.sphere(1.3, 33, n=3), F, FlowOptions(max_steps=300, roundness_tol=-1))
    assert reason == "max_steps"
    radii = np.array([s.diagnostics.r_eq for s in traj])
    assert np.max(np.abs(radii / 1.3 - 1)) <= 1e-8
    means = np.array([np.mean(np.hypot(s.curve.x, s.curve.rho)) for s in traj])
    assert np.max(np.abs(means / 1.3 - 1)) <= 1e-8


@pytest.mark.slow
def test_normalized_ellipsoid_rounds_monotonically():
    traj, reason = run_normalized(ProfileCurve.ellipsoid(1.0, 1.2, 49), SigmaPower(1), FlowOptions(max_steps=20000))
    assert reason == "round"
    ro = np.array([s.diagnostics.roundness for s in traj])
    assert ro[-1] < 1.001
    assert np.all(np.diff(ro) <= 1e-12)


@pytest.mark.slow
def test_normalized_flow_keeps_pinching_fixture():
    F = SigmaPower(2, 1.0)
    traj, reason = run_normalized(ProfileCurve.ellipsoid(1.0, 1.1, 33, n=3), F, FlowOptions(max_steps=20000))
    assert reason == "round"
    assert all(s.diagnostics.pinch_admissible for s in traj)


def test_pinch_verdict_applicability():
    st = initial_state(ProfileCurve.sphere(1.0, 33), SigmaPower(1))
    assert st.diagnostics.pinch_admissible is None
    st = initial_state(ProfileCurve.sphere(1.0, 33, n=3), SigmaPower(2, 1.0))
    assert st.diagnostics.pinch_admissible is True


@pytest.mark.parametrize("n,k,alpha", [(2, 1, 1.0), (3, 2, 1.0), (2, 2, 0.5)])
def test_selfsimilar_on_sphere_shrinkers(n, k, alpha):
    F = SigmaPower(k, alpha)
    r = comb(n, k) ** (alpha / (1 + k * alpha))
    T = sphere_extinction_time(r, n, k, alpha)
    traj, _ = run(ProfileCurve.sphere(r, 33, n=n), F, FlowOptions(cfl=0.1, t_end=0.85 * T))
    rep = selfsimilar_rescale_check(traj, F, fraction=0.8)
    assert rep.beta == pytest.approx(k * alpha)
    assert rep.max_deviation <= 1e-4
    # the shrinker reaches the origin at time 1/(1+beta)
    assert rep.extinction_time == pytest.approx(1 / (1 + k * alpha), rel=1e-4)
    assert rep.extinction_time == pytest.approx(T, rel=1e-4)
    assert json.dumps(rep.as_dict())


def test_selfsimilar_on_ellipsoid_grows():
    F = SigmaPower(1)
    traj, _ = run(ProfileCurve.ellipsoid(1.0, 1.5, 33), F, FlowOptions(t_end=0.3))
    rep = selfsimilar_rescale_check(traj, F, fraction=0.8)
    assert rep.max_deviation > 1e-2
    assert rep.deviations[-1] > rep.deviations[1]


def test_selfsimilar_refuses_inhomogeneous_speed():
    F = SigmaSum([1.0, 1.0])
    traj, _ = run(ProfileCurve.sphere(1.0, 33), F, FlowOptions(max_steps=20))
    with pytest.raises(UnsupportedSpeedError):
        selfsimilar_rescale_check(traj, F)
    assert SigmaRatio(2).degree == -1.0


def test_hausdorff_distance():
    a = ProfileCurve.sphere(1.0, 65)
    assert hausdorff_distance(a, ProfileCurve.sphere(1.1, 33)) == pytest.approx(0.1, rel=1e-4)
    assert hausdorff_distance(a, a.translated(0.2)) == pytest.approx(0.2, rel=1e-4)
    assert hausdorff_distance(a, a) == 0.0


def test_redistribute_uniformizes_chords():
    u = np.linspace(0, np.pi, 65) ** 1.3 / np.pi**0.3
    x, rho = np.cos(u), 1.2 * np.sin(u)
    rho[0] = rho[-1] = 0.0
    c = redistribute(ProfileCurve(x, rho))
    seg = np.diff(c.arclength)
    assert seg.max() / seg.min() < 1.01
    assert abs(sqrt(c.x[32] ** 2 + (c.rho[32] / 1.2) ** 2) - 1) < 1e-4


def test_write_trajectory(tmp_path):
    F = SigmaPower(2, 1.0)
    traj, _ = run(ProfileCurve.sphere(1.0, 17, n=3), F, FlowOptions(max_steps=4))
    write_trajectory(traj, tmp_path / "csv", {"seed": 1})
    lines = (tmp_path / "csv" / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "step,time,gauge,roundness,pinch_admissible,max_residual"
    assert len(lines) == len(traj) + 1
    assert lines[1].split(",")[4] == "true"
    assert len(list((tmp_path / "csv" / "profiles").iterdir())) == len(traj)
    assert json.loads((tmp_path / "csv" / "manifest.json").read_text()) == {"seed": 1}
    write_trajectory(traj, tmp_path / "js", {}, profiles=False, fmt="json")
    rows = json.loads((tmp_path / "js" / "trajectory.json").read_text())
    assert [r["step"] for r in rows] == [s.step_count for s in traj]
    assert not (tmp_path / "js" / "profiles").exists()
