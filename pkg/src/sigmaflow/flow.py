"""Desk-scale simulator for the normal-speed flow ``X_t = F(A) nu`` of convex
hypersurfaces of revolution.

The profile samples move with velocity ``f(lam) * nu`` (``nu`` the inward unit
normal), so spheres shrink.  Time integration is classical RK4 with an
adaptive parabolic step bound; samples are re-splined to uniform chord length
whenever their spacing drifts.  The poles need no special treatment: the
reflected profile is a smooth closed curve, its normal at the poles points
along the axis, and the curvature there is the umbilic value.
"""

import csv
import json
import os
from dataclasses import asdict, dataclass, replace
from math import comb

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import DomainError, GeometryError
from .geom import ProfileCurve, ball_volume, curvatures_of_revolution, enclosed_volume, save_profile_csv
from .pinch import check_condition_batch
from .shrinker import ScaledSpeed, SigmaPower, SigmaSum

__all__ = [
    "FlowDiagnostics",
    "FlowState",
    "FlowOptions",
    "SelfSimilarReport",
    "UnsupportedSpeedError",
    "initial_state",
    "stable_dt",
    "step",
    "redistribute",
    "run",
    "run_normalized",
    "selfsimilar_rescale_check",
    "hausdorff_distance",
    "sphere_equivalent_radius",
    "sphere_radius_closed_form",
    "sphere_extinction_time",
    "write_trajectory",
]

#: RK4 stays stable for the sixth-order stencil up to roughly this CFL number
CFL_LIMIT = 0.45


class UnsupportedSpeedError(ValueError):
    """The requested operation needs a homogeneous speed."""


@dataclass(frozen=True)
class FlowDiagnostics:
    volume: float
    r_eq: float
    lam_min: float
    lam_max: float
    roundness: float
    pinch_admissible: bool | None
    max_residual: float
    dt_scale: float  # ds_min^2 / stiffness; the CFL number times this is the step bound


@dataclass(frozen=True)
class FlowState:
    """Snapshot of a run; ``status`` is ``"ok"``, ``"nonconvex"`` or ``"extinction"``."""

    curve: ProfileCurve
    time: float
    step_count: int
    diagnostics: FlowDiagnostics | None
    status: str = "ok"
    message: str = ""

    @property
    def terminal(self):
        return self.status != "ok"


@dataclass(frozen=True)
class FlowOptions:
    cfl: float = 0.2
    dt: float | None = None  # fixed step; overrides the CFL rule
    max_steps: int = 200_000
    t_end: float | None = None
    r_min: float = 0.1
    roundness_tol: float = 1e-3
    redistribute_ratio: float = 1.25
    curvature_cap: float = 1e4
    record_every: int = 1

    def __post_init__(self):
        if not 0 < self.cfl <= CFL_LIMIT:
            raise ValueError(f"cfl must lie in (0, {CFL_LIMIT}]")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")


def sphere_equivalent_radius(curve):
    """Radius of the round ball with the same enclosed volume."""
    return (enclosed_volume(curve) / ball_volume(curve.n + 1)) ** (1.0 / (curve.n + 1))


def sphere_radius_closed_form(r0, n, k, alpha, t):
    """``r(t)`` for a round sphere under ``f = s_k^alpha``."""
    p = 1.0 + k * alpha
    val = r0**p - p * comb(n, k) ** alpha * np.asarray(t, dtype=float)
    return np.maximum(val, 0.0) ** (1.0 / p)


def sphere_extinction_time(r0, n, k, alpha):
    p = 1.0 + k * alpha
    return r0**p / (p * comb(n, k) ** alpha)


def _pinch_params(F, n):
    base = F.base if isinstance(F, ScaledSpeed) else F
    if isinstance(base, SigmaPower) and 2 <= base.k <= n - 1 and base.k * base.alpha > 1 and n >= 3:
        return base.k, base.alpha
    return None


def _pinch_verdict(F, spectra):
    """All-sample verdict of the pinching condition, or None when it does not apply."""
    params = _pinch_params(F, spectra.shape[-1])
    if params is None:
        return None
    ok, _, _ = check_condition_batch(*params, spectra)
    return bool(np.all(ok))


def _diagnostics(curve, F, smp=None):
    smp = curvatures_of_revolution(curve) if smp is None else smp
    spectra = smp.spectra
    lam_min, lam_max = float(spectra.min()), float(spectra.max())
    vol = enclosed_volume(curve)
    r_eq = (vol / ball_volume(curve.n + 1)) ** (1.0 / (curve.n + 1))
    verdict = _pinch_verdict(F, spectra) if lam_min > 0 else False
    try:
        res = float(np.max(np.abs(np.asarray(F.value(spectra)) + smp.support)))
    except DomainError:
        res = float("nan")
    roundness = lam_max / lam_min if lam_min > 0 else float("inf")
    try:
        scale = _dt_scale(curve, F, smp)
    except DomainError:
        scale = float("nan")
    return FlowDiagnostics(vol, r_eq, lam_min, lam_max, roundness, verdict, res, scale)


def initial_state(curve, F):
    """Wrap ``curve`` as step 0; non-convex data yield a flagged state."""
    smp = curvatures_of_revolution(curve)
    diag = _diagnostics(curve, F, smp)
    try:
        F.check_domain(smp.spectra)
    except DomainError as exc:
        return FlowState(curve, 0.0, 0, diag, "nonconvex", str(exc))
    if diag.lam_min <= 0:
        return FlowState(curve, 0.0, 0, diag, "nonconvex", "a principal curvature is not positive")
    return FlowState(curve, 0.0, 0, diag)


def _velocity(x, rho, n, F):
    curve = ProfileCurve(x, rho, n)
    smp = curvatures_of_revolution(curve)
    spectra = smp.spectra
    if not np.all(spectra > 0):
        bad = int(np.flatnonzero(~np.all(spectra > 0, axis=1))[0])
        raise DomainError(f"convexity lost at sample {bad}")
    f = np.asarray(F.value(spectra))
    vel = f[:, None] * smp.normal
    # poles move along the axis
    vel[0, 1] = vel[-1, 1] = 0.0
    return vel


def _dt_scale(curve, F, smp):
    grad = np.asarray(F.gradient(smp.spectra))
    stiff = float(np.max(np.abs(grad[:, 0]) + np.abs(grad[:, 1:]).sum(axis=1)))
    ds = float(np.min(np.hypot(np.diff(curve.x), np.diff(curve.rho))))
    return float("inf") if stiff == 0.0 else ds * ds / stiff


def stable_dt(curve, F, cfl=0.2):
    """``cfl * ds_min^2 / max_i sum_p |df/dlam_p|`` for the current curve."""
    return cfl * _dt_scale(curve, F, curvatures_of_revolution(curve))


def redistribute(curve):
    """Resample the profile at uniform chord length with a periodic cubic spline."""
    x, rho = curve.x, curve.rho
    lx = np.concatenate([x, x[-2:0:-1], x[:1]])
    lr = np.concatenate([rho, -rho[-2:0:-1], rho[:1]])
    s = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(lx), np.diff(lr)))])
    spline = CubicSpline(s, np.column_stack([lx, lr]), bc_type="periodic")
    m = x.size
    target = np.linspace(0.0, s[m - 1], m)
    pts = spline(target)
    new_rho = pts[:, 1].copy()
    new_rho[0] = new_rho[-1] = 0.0
    new_x = pts[:, 0].copy()
    new_x[0], new_x[-1] = x[0], x[-1]
    return ProfileCurve(new_x, new_rho, curve.n)


def _spacing_ratio(curve):
    seg = np.diff(curve.arclength)
    return float(seg.max() / seg.min())


def step(state, F, dt, redistribute_ratio=1.25, curvature_cap=1e4):
    """Advance one RK4 step of size ``dt``.

    Loss of convexity returns the unchanged curve flagged ``"nonconvex"``;
    curvature above ``curvature_cap`` flags ``"extinction"``.
    """
    if state.terminal:
        raise ValueError(f"cannot step from a terminal state ({state.status})")
    if not dt > 0:
        raise ValueError("dt must be positive")
    cap = CFL_LIMIT * state.diagnostics.dt_scale
    if dt > cap * (1 + 1e-12):
        raise ValueError(f"dt={dt:.3e} exceeds the stability cap {cap:.3e}")
    c = state.curve
    n = c.n
    p0 = np.column_stack([c.x, c.rho])
    try:
        k1 = _velocity(p0[:, 0], p0[:, 1], n, F)
        p = p0 + 0.5 * dt * k1
        k2 = _velocity(p[:, 0], p[:, 1], n, F)
        p = p0 + 0.5 * dt * k2
        k3 = _velocity(p[:, 0], p[:, 1], n, F)
        p = p0 + dt * k3
        k4 = _velocity(p[:, 0], p[:, 1], n, F)
        p1 = p0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = p1[:, 1].copy()
        rho[0] = rho[-1] = 0.0
        new = ProfileCurve(p1[:, 0], rho, n)
        if _spacing_ratio(new) > redistribute_ratio:
            new = redistribute(new)
        smp = curvatures_of_revolution(new)
        F.check_domain(smp.spectra)
    except (DomainError, GeometryError) as exc:
        return replace(state, status="nonconvex", message=str(exc))
    diag = _diagnostics(new, F, smp)
    status, message = "ok", ""
    if diag.lam_max > curvature_cap:
        status, message = "extinction", f"curvature {diag.lam_max:.3e} above cap {curvature_cap:g}"
    return FlowState(new, state.time + dt, state.step_count + 1, diag, status, message)


def _choose_dt(state, F, options):
    if options.dt is not None:
        return options.dt
    dt = options.cfl * state.diagnostics.dt_scale
    if not np.isfinite(dt):
        raise ValueError("zero speed: pass a fixed dt")
    return dt


def _rescaled(state, volume0, F):
    """Rescale about the origin so the enclosed volume returns to ``volume0``."""
    c = state.curve
    factor = (volume0 / state.diagnostics.volume) ** (1.0 / (c.n + 1))
    curve = c.scaled(factor)
    return replace(state, curve=curve, diagnostics=_diagnostics(curve, F))


def _drive(initial, F, options, normalized):
    state = initial_state(initial, F)
    traj = [state]
    if state.terminal:
        return traj, state.status
    vol0 = state.diagnostics.volume
    reason = "max_steps"
    while state.step_count < options.max_steps:
        dt = _choose_dt(state, F, options)
        if options.t_end is not None:
            if state.time >= options.t_end * (1 - 1e-14):
                reason = "t_end"
                break
            dt = min(dt, options.t_end - state.time)
        nxt = step(state, F, dt, options.redistribute_ratio, options.curvature_cap)
        if nxt.terminal:
            if traj[-1] is not state:
                traj.append(state)
            traj.append(nxt)
            return traj, nxt.status
        state = _rescaled(nxt, vol0, F) if normalized else nxt
        if state.step_count % options.record_every == 0:
            traj.append(state)
        if not normalized and state.diagnostics.r_eq < options.r_min:
            reason = "r_min"
            break
        if normalized and state.diagnostics.roundness - 1.0 <= options.roundness_tol:
            reason = "round"
            break
    if traj[-1] is not state:
        traj.append(state)
    return traj, reason


def run(initial, F, options=None):
    """Unnormalized flow.  Returns ``(trajectory, stop_reason)``."""
    return _drive(initial, F, options or FlowOptions(), normalized=False)


def run_normalized(initial, F, options=None):
    """Flow rescaled after every step to keep the enclosed volume fixed.

    Stops when ``lam_max / lam_min`` is within ``roundness_tol`` of 1, at the
    step budget, or at a flagged state.  Returns ``(trajectory, stop_reason)``.
    """
    return _drive(initial, F, options or FlowOptions(), normalized=True)


def _dense_loop(curve, factor=16):
    x, rho = curve.x, curve.rho
    lx = np.concatenate([x, x[-2:0:-1], x[:1]])
    lr = np.concatenate([rho, -rho[-2:0:-1], rho[:1]])
    s = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(lx), np.diff(lr)))])
    spline = CubicSpline(s, np.column_stack([lx, lr]), bc_type="periodic")
    m = x.size
    t = np.linspace(0.0, s[m - 1], factor * (m - 1) + 1)
    return spline(t)


def _directed(points, poly):
    """Distance from each point to the polyline ``poly`` (nearest vertex plus its two segments)."""
    tree = cKDTree(poly)
    _, idx = tree.query(points)
    best = np.linalg.norm(points - poly[idx], axis=1)
    for shift in (-1, 0):
        a_idx = np.clip(idx + shift, 0, len(poly) - 2)
        a, b = poly[a_idx], poly[a_idx + 1]
        ab = b - a
        t = np.clip(np.einsum("ij,ij->i", points - a, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
        d = np.linalg.norm(points - (a + t[:, None] * ab), axis=1)
        best = np.minimum(best, d)
    return best


def hausdorff_distance(c1, c2, factor=16):
    """Symmetric Hausdorff distance between two profile curves (spline-densified)."""
    d1 = _dense_loop(c1, factor)
    d2 = _dense_loop(c2, factor)
    return float(max(_directed(d1, d2).max(), _directed(d2, d1).max()))


@dataclass(frozen=True)
class SelfSimilarReport:
    beta: float
    extinction_time: float
    times: np.ndarray
    deviations: np.ndarray  # Hausdorff distance over predicted radius
    max_deviation: float
    fraction: float

    def as_dict(self):
        d = asdict(self)
        d["times"] = self.times.tolist()
        d["deviations"] = self.deviations.tolist()
        return d


def selfsimilar_rescale_check(trajectory, F, fraction=0.8):
    """Compare an unnormalized run against homothetic shrinking of its first frame.

    For ``F`` homogeneous of degree ``beta`` a self-similar solution satisfies
    ``R^{1+beta} = (1+beta)(T - t) * const``.  ``T`` is fitted by linear least
    squares on the sphere-equivalent radius, and every frame with
    ``t <= fraction * T`` is compared with the first frame scaled by
    ``((T - t) / T)^{1/(1+beta)}``.  Deviations are Hausdorff distances
    divided by the predicted sphere-equivalent radius.
    """
    base = F.base if isinstance(F, ScaledSpeed) else F
    if isinstance(base, SigmaSum) or F.degree is None:
        raise UnsupportedSpeedError("self-similar rescaling needs a homogeneous speed")
    beta = float(F.degree)
    states = [s for s in trajectory if not s.terminal and s.diagnostics is not None]
    if len(states) < 3:
        raise ValueError("need at least three frames")
    t = np.array([s.time for s in states])
    y = np.array([s.diagnostics.r_eq for s in states]) ** (1.0 + beta)
    slope, intercept = np.polyfit(t, y, 1)
    if not slope < 0:
        raise ValueError("trajectory is not shrinking")
    T = -intercept / slope
    first = states[0].curve
    r0 = states[0].diagnostics.r_eq
    keep = t <= fraction * T
    devs = []
    for s in (st for st, kp in zip(states, keep) if kp):
        scale = ((T - s.time) / T) ** (1.0 / (1.0 + beta))
        devs.append(hausdorff_distance(s.curve, first.scaled(scale)) / (scale * r0))
    devs = np.array(devs)
    return SelfSimilarReport(beta, float(T), t[keep], devs, float(devs.max()), fraction)


TRAJECTORY_COLUMNS = ["step", "time", "gauge", "roundness", "pinch_admissible", "max_residual"]


def _verdict_text(v):
    return "" if v is None else ("true" if v else "false")


def write_trajectory(trajectory, outdir, manifest, profiles=True, fmt="csv"):
    """Write ``trajectory.csv`` (or ``.json``), per-step profile CSVs and ``manifest.json``."""
    os.makedirs(outdir, exist_ok=True)
    rows = []
    for s in trajectory:
        d = s.diagnostics
        rows.append(
            {
                "step": s.step_count,
                "time": s.time,
                "gauge": d.volume,
                "roundness": d.roundness,
                "pinch_admissible": d.pinch_admissible,
                "max_residual": d.max_residual,
            }
        )
    if fmt == "json":
        with open(os.path.join(outdir, "trajectory.json"), "w") as fh:
            json.dump(rows, fh, indent=1)
    else:
        with open(os.path.join(outdir, "trajectory.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRAJECTORY_COLUMNS)
            for r in rows:
                w.writerow(
                    [
                        r["step"],
                        repr(float(r["time"])),
                        repr(float(r["gauge"])),
                        repr(float(r["roundness"])),
                        _verdict_text(r["pinch_admissible"]),
                        repr(float(r["max_residual"])),
                    ]
                )
    if profiles:
        pdir = os.path.join(outdir, "profiles")
        os.makedirs(pdir, exist_ok=True)
        for s in trajectory:
            save_profile_csv(s.curve, os.path.join(pdir, f"profile_{s.step_count:07d}.csv"))
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
