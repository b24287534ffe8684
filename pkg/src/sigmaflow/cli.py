"""Command-line interface: ``sigmaflow <subcommand> ...``.

Exit codes: 0 when every check passes, 1 when a property violation is
found, 2 for usage or domain errors.  Tables go to ``--out`` (or to
``$SIGMAFLOW_OUTPUT_DIR/<subcommand>.<fmt>`` when that variable is set, or
to stdout otherwise).  Identical flags and seed give byte-identical files.
"""

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .errors import DomainError, GeometryError, NumericalError
from .flow import (
    FlowOptions,
    UnsupportedSpeedError,
    run,
    run_normalized,
    selfsimilar_rescale_check,
    sphere_extinction_time,
    sphere_radius_closed_form,
    write_trajectory,
)
from .geom import (
    ProfileCurve,
    curvatures_of_revolution,
    minkowski_terms,
    parse_shape,
    save_samples_csv,
    shrinker_residual,
    theorem18_integrals,
)
from .ineq import corollary23_value, lemma21_k2_oracle, lemma21_value
from .pinch import (
    CertificateParams,
    Theta_constant,
    certify_quadratic_inequality,
    check_condition,
    check_condition_batch,
    check_section5_ratios,
    delta_constant,
    delta_independent,
    theta_constant,
)
from .sampling import log_uniform_spectra, pinched_spectra
from .shrinker import (
    SigmaPower,
    SigmaSum,
    TestFunction,
    parse_speed,
    sample_constrained_tensor,
    sphere_radius,
    term1_general,
    term2_sigma_power,
    term2_sigma_sum,
)
from .symfun import cone_membership

ENV_OUTPUT_DIR = "SIGMAFLOW_OUTPUT_DIR"

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _render(rows, columns, fmt):
    if fmt == "json":
        return json.dumps([{c: _jsonable(r.get(c)) for c in columns} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _emit(args, rows, columns, name=None):
    text = _render(rows, columns, args.format)
    path = args.out
    if path is None and os.environ.get(ENV_OUTPUT_DIR):
        path = os.path.join(os.environ[ENV_OUTPUT_DIR], f"{name or args.command}.{args.format}")
    if path is None:
        sys.stdout.write(text)
        return
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _int_range(text):
    """``"4"`` or ``"2:8"`` (inclusive)."""
    lo, sep, hi = text.partition(":")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from exc
    if b < a:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(a, b + 1))


def _floats(text):
    try:
        return np.array([float(v) for v in text.replace(" ", ",").split(",") if v])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


# ---------------------------------------------------------------- ineq


def cmd_ineq(args):
    if args.counterexample:
        lam = np.array([-1.0, 3.0, 3.0])
        cone = cone_membership(lam)
        row = {
            "lambda": " ".join(_fmt(v) for v in lam),
            "k": 2,
            "value": corollary23_value(2, lam, unsafe=True),
            "E_k": lemma21_value(2, lam, unsafe=True),
            "max_gamma": int(cone.max_gamma),
            "positive_cone": bool(cone.is_positive_cone),
        }
        _emit(args, [row], list(row))
        return EXIT_OK
    seeds = np.random.SeedSequence(args.seed)
    rows, detail = [], []
    bad = 0
    ns = args.n
    children = seeds.spawn(len(ns))
    for n, child in zip(ns, children):
        if n < 2:
            raise UsageError("n must be at least 2")
        rng = np.random.default_rng(child)
        lam = log_uniform_spectra(n, args.samples, rng)
        s1 = lam.sum(axis=1)
        ks = args.k or list(range(2, n + 1))
        for k in ks:
            if not 2 <= k <= n:
                raise UsageError(f"k={k} outside 2..{n}")
            e = lemma21_value(k, lam)
            norm = e / s1
            oracle = lemma21_k2_oracle(lam) if k == 2 else None
            viol = int(np.sum(norm < -args.tol))
            bad += viol
            row = {
                "n": n,
                "k": k,
                "samples": args.samples,
                "min_E_k": float(e.min()),
                "min_normalized": float(norm.min()),
                "violations": viol,
            }
            if oracle is not None:
                row["max_oracle_gap"] = float(np.max(np.abs(oracle - 2 * e) / s1))
            rows.append(row)
            if args.detail:
                for idx in range(lam.shape[0]):
                    detail.append(
                        {
                            "n": n,
                            "k": k,
                            "sample": idx,
                            "E_k": e[idx],
                            "normalized": norm[idx],
                            "oracle": None if oracle is None else oracle[idx],
                        }
                    )
    cols = ["n", "k", "samples", "min_E_k", "min_normalized", "violations", "max_oracle_gap"]
    _emit(args, rows, cols)
    if args.detail:
        with open(args.detail, "w", newline="") as fh:
            fh.write(_render(detail, ["n", "k", "sample", "E_k", "normalized", "oracle"], "csv"))
    return EXIT_VIOLATION if bad else EXIT_OK


# ----------------------------------------------------------- constants


def cmd_constants(args):
    rows = []
    for n in args.n:
        if n < 2:
            raise UsageError("n must be at least 2")
        for k in range(2, n):
            cert = certify_quadratic_inequality(CertificateParams.for_k(n, k))
            rows.append({"kind": "delta", "n": n, "index": k, "value": delta_constant(n, k), "margin": cert.margin})
        rows.append({"kind": "delta_independent", "n": n, "index": None, "value": delta_independent(n)})
        for l in range(1, n + 1):
            rows.append({"kind": "theta", "n": n, "index": l, "value": theta_constant(l, n)})
        rows.append({"kind": "Theta", "n": n, "index": None, "value": Theta_constant(n)})
    _emit(args, rows, ["kind", "n", "index", "value", "margin"])
    return EXIT_OK


# --------------------------------------------------------------- pinch

PINCH_COLUMNS = ["n", "k", "alpha", "ratioMin", "ratioMax", "delta", "admissible", "witness"]


def _pinch_row(n, k, alpha, rep):
    row = {"n": n, "k": k, "alpha": alpha, **rep.as_row()}
    row["witness"] = " ".join(str(v) for v in rep.witness)
    return row


def cmd_pinch(args):
    rows = []
    if args.remark14_sweep:
        seeds = np.random.SeedSequence(args.seed).spawn(6)
        total_bad = 0
        for n, child in zip(range(3, 9), seeds):
            rng = np.random.default_rng(child)
            lam = pinched_spectra(n, 1.0 / 3.0, args.samples, rng)
            ok, rmin, rmax = check_condition_batch(2, 1.0, lam)
            bad = int(np.sum(~ok))
            lo, hi = float(np.nanmin(rmin)), float(np.nanmax(rmax))
            total_bad += bad
            rows.append(
                {
                    "n": n,
                    "k": 2,
                    "alpha": 1.0,
                    "ratioMin": lo,
                    "ratioMax": hi,
                    "delta": delta_constant(n, 2),
                    "admissible": bad == 0,
                    "witness": None,
                    "samples": args.samples,
                    "violations": bad,
                }
            )
        _emit(args, rows, PINCH_COLUMNS[:-1] + ["samples", "violations"])
        return EXIT_VIOLATION if total_bad else EXIT_OK
    if args.lam is None:
        raise UsageError("pass --lambda or --remark14-sweep")
    lam = args.lam
    n = lam.size
    if args.section5 is not None:
        rep = check_section5_ratios(args.section5, lam, args.delta)
        row = _pinch_row(n, args.section5, None, rep)
        row["kind"] = "section5"
    else:
        rep = check_condition(args.k, args.alpha, lam, args.delta)
        row = _pinch_row(n, args.k, args.alpha, rep)
        row["kind"] = "condition"
    _emit(args, [row], ["kind"] + PINCH_COLUMNS)
    return EXIT_OK if rep.admissible else EXIT_VIOLATION


# ------------------------------------------------------------ shrinker


def _term_sweep(F, n, samples, seed):
    """Minimum TERM I and TERM II over pinched spectra and constrained tensors."""
    rng = np.random.default_rng(seed)
    base = F
    k = alpha = None
    t1, t2 = np.inf, np.inf
    used = 0
    if isinstance(base, SigmaPower):
        k, alpha = base.k, base.alpha
        G = TestFunction(k)
        if not (n >= 3 and 2 <= k <= n - 1 and alpha * k > 1):
            return None
        ratio = 0.8
    elif isinstance(base, SigmaSum):
        G = TestFunction(n)
        ratio = Theta_constant(n)
    else:
        return None
    attempts = 0
    while used < samples and attempts < 50 * samples:
        attempts += 1
        lam = pinched_spectra(n, ratio, 1, rng)[0]
        if isinstance(base, SigmaPower):
            if not check_condition(k, alpha, lam).admissible:
                continue
        h3 = sample_constrained_tensor(lam, G, rng)
        t1 = min(t1, term1_general(F, G, lam))
        if isinstance(base, SigmaPower):
            val = term2_sigma_power(k, alpha, lam, h3).value
        else:
            val = term2_sigma_sum(base.a, lam, h3).value
        t2 = min(t2, val)
        used += 1
    return used, t1, t2


def cmd_shrinker(args):
    F = parse_speed(args.f)
    n = args.n
    sr = sphere_radius(F, n)
    row = {"f": args.f, "n": n, "radius": sr.radius, "every_radius": sr.every_radius}
    r = sr.radius if sr.radius is not None else 1.0
    _, res = shrinker_residual(F, ProfileCurve.sphere(r, args.samples, n))
    row["sphere_residual"] = res
    cols = ["f", "n", "radius", "every_radius", "sphere_residual"]
    status = EXIT_OK
    if args.terms:
        out = _term_sweep(F, n, args.terms, args.seed)
        if out is not None:
            used, t1, t2 = out
            row.update({"term_samples": used, "min_term1": t1, "min_term2": t2})
            cols += ["term_samples", "min_term1", "min_term2"]
            if t1 < -1e-10 or t2 < -1e-9:
                status = EXIT_VIOLATION
    _emit(args, [row], cols)
    return status


# ---------------------------------------------------------------- geom


def cmd_geom(args):
    curve = parse_shape(args.shape, args.samples, args.n)
    smp = curvatures_of_revolution(curve)
    if args.action == "minkowski":
        ks = args.k or list(range(1, curve.n + 1))
        rows, bad = [], 0
        for k in ks:
            first, second, base = minkowski_terms(k, smp)
            resid = (first + second) / base
            bad += abs(resid) > args.tol
            rows.append(
                {"shape": args.shape, "n": curve.n, "k": k, "samples": args.samples, "residual": resid,
                 "k_int_sk_support": first, "int_sk_minus_1": base}
            )
        _emit(args, rows, ["shape", "n", "k", "samples", "residual", "k_int_sk_support", "int_sk_minus_1"])
        return EXIT_VIOLATION if bad else EXIT_OK
    if args.action == "shrinker":
        if args.f is None:
            raise UsageError("geom shrinker needs --f")
        F = parse_speed(args.f)
        _, res = shrinker_residual(F, smp)
        row = {"shape": args.shape, "n": curve.n, "f": args.f, "samples": args.samples, "max_residual": res}
        _emit(args, [row], list(row))
        return EXIT_OK if res <= args.tol else EXIT_VIOLATION
    if args.action == "theorem18":
        if args.f is None:
            raise UsageError("geom theorem18 needs --f")
        F = parse_speed(args.f)
        rows = []
        for k in args.k or [1]:
            a, b = theorem18_integrals(F, k, smp)
            rows.append({"shape": args.shape, "n": curve.n, "k": k, "f": args.f, "level_k": a, "level_k_minus_1": b})
        _emit(args, rows, ["shape", "n", "k", "f", "level_k", "level_k_minus_1"])
        return EXIT_OK
    path = args.out or os.path.join(os.environ.get(ENV_OUTPUT_DIR, "."), "samples.csv")
    save_samples_csv(smp, path)
    return EXIT_OK


# ---------------------------------------------------------------- flow


def _sphere_params(shape):
    kind, _, rest = shape.partition(":")
    if kind.strip().lower() != "sphere":
        return None
    return float(rest.split(",")[0])


def cmd_flow(args):
    F = parse_speed(args.f)
    curve = parse_shape(args.shape, args.samples, args.n)
    r0 = _sphere_params(args.shape)
    closed = r0 is not None and isinstance(F, SigmaPower) and F.k <= curve.n
    t_end = args.t_end
    if t_end is None and args.t_frac is not None:
        if not closed:
            raise UsageError("--t-frac needs a sphere shape and a sigma speed")
        t_end = args.t_frac * sphere_extinction_time(r0, curve.n, F.k, F.alpha)
    opts = FlowOptions(
        cfl=args.cfl,
        dt=args.dt,
        max_steps=args.max_steps,
        t_end=t_end,
        r_min=args.r_min,
        roundness_tol=args.roundness_tol,
        record_every=args.record_every,
    )
    runner = run_normalized if args.action == "normalized" else run
    traj, reason = runner(curve, F, opts)
    outdir = args.out or os.environ.get(ENV_OUTPUT_DIR) or "sigmaflow_flow"
    manifest = {
        "speed": args.f,
        "speedRepr": repr(F),
        "shape": args.shape,
        "n": curve.n,
        "samples": args.samples,
        "mode": args.action,
        "dtPolicy": {
            "rule": "cfl * ds_min^2 / max_i sum_p |df/dlam_p|",
            "cfl": opts.cfl,
            "fixedDt": opts.dt,
            "integrator": "rk4",
        },
        "seed": args.seed,
        "stopReason": reason,
        "steps": traj[-1].step_count,
        "finalTime": traj[-1].time,
        "finalStatus": traj[-1].status,
    }
    status = EXIT_OK
    if closed and args.action == "run":
        good = [s for s in traj if not s.terminal]
        t = np.array([s.time for s in good])
        r = np.array([s.diagnostics.r_eq for s in good])
        exact = sphere_radius_closed_form(r0, curve.n, F.k, F.alpha, t)
        rel = np.abs(r / exact - 1)
        window = t <= 0.9 * sphere_extinction_time(r0, curve.n, F.k, F.alpha)
        # near extinction the relative error is amplified by 1/r^(1+k alpha); judge the first 90%
        manifest["closedFormMaxRelError"] = float(rel.max())
        manifest["closedFormMaxRelError90"] = float(rel[window].max())
        if manifest["closedFormMaxRelError90"] > args.tol:
            status = EXIT_VIOLATION
    if args.action == "selfsimilar":
        rep = selfsimilar_rescale_check(traj, F, args.fraction)
        manifest["selfSimilar"] = {
            "beta": rep.beta,
            "extinctionTime": rep.extinction_time,
            "maxDeviation": rep.max_deviation,
            "fraction": rep.fraction,
        }
        if rep.max_deviation > args.tol:
            status = EXIT_VIOLATION
    write_trajectory(traj, outdir, manifest, profiles=not args.no_profiles, fmt=args.format)
    sys.stdout.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return status


# ---------------------------------------------------------------- main


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (directory for flow runs)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")

    p = argparse.ArgumentParser(prog="sigmaflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("ineq", parents=[common], help="sweep E_k over random positive spectra")
    q.add_argument("--n", type=_int_range, default=[4], help="dimension or range a:b")
    q.add_argument("--k", type=_int_range, default=None, help="k or range a:b (default 2..n)")
    q.add_argument("--samples", type=_positive_int, default=1000)
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--detail", help="also write per-sample values to this CSV")
    q.add_argument("--counterexample", action="store_true", help="evaluate lambda = (-1, 3, 3)")
    q.set_defaults(func=cmd_ineq)

    q = sub.add_parser("constants", parents=[common], help="table of delta, theta and Theta")
    q.add_argument("--n", type=_int_range, default=_int_range("3:8"))
    q.set_defaults(func=cmd_constants)

    q = sub.add_parser("pinch", parents=[common], help="pinching ratios for one spectrum or a sweep")
    q.add_argument("--lambda", dest="lam", type=_floats, help="comma-separated principal curvatures")
    q.add_argument("--k", type=int, default=2)
    q.add_argument("--alpha", type=float, default=1.0)
    q.add_argument("--delta", type=float, default=None)
    q.add_argument("--section5", type=int, metavar="L", help="check the sigma_L ratios instead")
    q.add_argument("--remark14-sweep", action="store_true", help="3 lam_min >= lam_max sufficiency sweep")
    q.add_argument("--samples", type=_positive_int, default=10_000)
    q.set_defaults(func=cmd_pinch)

    q = sub.add_parser("shrinker", parents=[common], help="sphere radius and TERM I/II report")
    q.add_argument("--f", required=True, help="sigma:k=..,alpha=.. | sum:a1=..,a2=.. | ratio:k=..")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--samples", type=_positive_int, default=257, help="profile samples for the sphere check")
    q.add_argument("--terms", type=int, default=0, help="number of TERM I/II samples")
    q.set_defaults(func=cmd_shrinker)

    q = sub.add_parser("geom", parents=[common], help="checks on a discretized body of revolution")
    q.add_argument("action", choices=["minkowski", "shrinker", "theorem18", "samples"])
    q.add_argument("--shape", required=True, help="sphere:r | ellipsoid:a,b | file:path.csv")
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--k", type=_int_range, default=None)
    q.add_argument("--f", default=None)
    q.add_argument("--samples", type=_positive_int, default=1025)
    q.add_argument("--tol", type=float, default=1e-6)
    q.set_defaults(func=cmd_geom)

    q = sub.add_parser("flow", parents=[common], help="run the curvature flow")
    q.add_argument("action", choices=["run", "normalized", "selfsimilar"])
    q.add_argument("--shape", required=True)
    q.add_argument("--f", default="sigma:k=1,alpha=1")
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--samples", type=_positive_int, default=33)
    q.add_argument("--cfl", type=float, default=0.2)
    q.add_argument("--dt", type=float, default=None)
    q.add_argument("--max-steps", type=int, default=200_000)
    q.add_argument("--t-end", type=float, default=None)
    q.add_argument("--t-frac", type=float, default=None, help="stop at this fraction of the sphere lifespan")
    q.add_argument("--r-min", type=float, default=0.1)
    q.add_argument("--roundness-tol", type=float, default=1e-3)
    q.add_argument("--record-every", type=_positive_int, default=1)
    q.add_argument("--fraction", type=float, default=0.8, help="lifespan fraction for the self-similar check")
    q.add_argument("--tol", type=float, default=None)
    q.add_argument("--no-profiles", action="store_true")
    q.set_defaults(func=cmd_flow)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", "unset") is None:
        args.tol = 1e-4 if args.action == "selfsimilar" else 1e-6
    try:
        return args.func(args)
    except (UsageError, DomainError, GeometryError, UnsupportedSpeedError, ValueError) as exc:
        print(f"sigmaflow {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"sigmaflow {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"sigmaflow {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
