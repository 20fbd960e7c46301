"""Batch command-line front end.

Files and exit codes only, no interactive mode: 0 on success, 2 for a
malformed configuration, 3 for a data validation failure, 4 for a numerical
failure. Each failure writes a one-line JSON diagnostic to stderr. All
randomness flows through --seed (default documented in hawkes.rng), and
equal configurations produce byte-identical outputs.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from .core import (
    EventSequence,
    ExpKernel,
    HawkesModel,
    NonlinearSpec,
    conditional_intensity,
)
from .errors import DataValidationError, FitError, SimulationError
from .gmm import (
    BinSeries,
    bin_counts,
    default_delta,
    empirical_moments,
    fit_gmm,
    theoretical_moments,
)
from .infer import decluster, fit_mle, gof_rescaling, rescaled_interarrivals
from .io import (
    fit_result_to_dict,
    load_model,
    read_counts_csv,
    read_events_csv,
    write_counts_csv,
    write_events_csv,
)
from .multivariate import MultivariateHawkesModel
from .renewal import RenewalHawkesModel, solve_K, solve_M
from .rng import DEFAULT_SEED
from .sim import (
    DiscreteModel,
    DynamicContagionModel,
    EtasModel,
    simulate_cluster,
    simulate_discrete,
    simulate_dynamic_contagion,
    simulate_etas,
    simulate_exact_exp,
    simulate_multivariate,
    simulate_nonlinear,
    simulate_renewal_hawkes,
    simulate_thinning,
)

__all__ = ["main"]


def _outdir(args):
    os.makedirs(args.output, exist_ok=True)
    return args.output


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_events(args):
    horizon = getattr(args, "T", None)
    return read_events_csv(args.data, horizon=horizon)


def _cmd_simulate(args):
    out = _outdir(args)
    model = load_model(args.model)
    if isinstance(model, DiscreteModel):
        counts = simulate_discrete(model, int(args.T), args.seed)
        write_counts_csv(os.path.join(out, "counts.csv"), counts)
        return 0
    if isinstance(model, DynamicContagionModel):
        events, shocks = simulate_dynamic_contagion(model, args.T, args.seed)
        write_events_csv(os.path.join(out, "events.csv"), events)
        with open(os.path.join(out, "shocks.csv"), "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "jump"])
            for t, j in shocks:
                writer.writerow([repr(float(t)), repr(float(j))])
        return 0
    if isinstance(model, EtasModel):
        events = simulate_etas(model, args.T, args.seed)
    elif isinstance(model, MultivariateHawkesModel):
        events = simulate_multivariate(model, args.T, args.seed)
    elif isinstance(model, RenewalHawkesModel):
        events = simulate_renewal_hawkes(model, args.T, args.seed)
    elif isinstance(model, NonlinearSpec):
        events = simulate_nonlinear(model, args.T, args.seed)
    elif isinstance(model, HawkesModel):
        if model.lam == 0 and model.lam0 == 0:
            events = EventSequence(np.empty(0), float(args.T))
        elif args.method == "exact":
            events = simulate_exact_exp(model, args.T, args.seed)
        elif args.method == "cluster":
            events = simulate_cluster(model.lam, model.kernel, args.T, args.seed)
        else:
            events = simulate_thinning(model, args.T, args.seed)
    else:
        raise ValueError(f"cannot simulate a {type(model).__name__}")
    write_events_csv(os.path.join(out, "events.csv"), events)
    if args.emit_intensity is not None:
        if not isinstance(model, (HawkesModel, NonlinearSpec)):
            raise ValueError(
                "--emit-intensity supports univariate hawkes/nonlinear models"
            )
        step = float(args.emit_intensity)
        if step <= 0:
            raise ValueError("--emit-intensity step must be positive")
        grid = np.arange(0.0, args.T + step / 2, step)
        grid = grid[grid <= args.T]
        with open(os.path.join(out, "intensity.csv"), "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "intensity"])
            for t in grid:
                writer.writerow(
                    [repr(float(t)),
                     repr(conditional_intensity(model, events, float(t)))]
                )
    return 0


def _cmd_validate(args):
    model = load_model(args.model) if args.model else None
    findings = []
    for path in args.data:
        try:
            events = read_events_csv(path)
            if (
                model is not None
                and isinstance(model, EtasModel)
                and events.marks is not None
                and events.marks.size
                and events.marks.min() < model.m0
            ):
                bad = int(np.argmin(events.marks))
                raise DataValidationError(
                    f"{path}:{bad + 2}: mark {events.marks[bad]} below the "
                    f"detection threshold m0={model.m0}"
                )
            print(f"OK: {path}: {len(events)} events, horizon {events.horizon}")
        except DataValidationError as err:
            findings.append(str(err))
    if findings:
        raise DataValidationError("; ".join(findings))
    return 0


def _cmd_fit_mle(args):
    out = _outdir(args)
    events = _load_events(args)
    result = fit_mle(
        events,
        T=args.T,
        family=args.family,
        restarts=args.restarts,
        seed=args.seed,
        fit_lam0=args.fit_lam0,
        m0=args.m0,
        max_iter=args.max_iter,
    )
    _write_json(os.path.join(out, "fit.json"), fit_result_to_dict(result))
    return 0


def _bins_from_args(args):
    if args.binned:
        counts = read_counts_csv(args.data)
        n_discard = _discard_count(args, counts.size)
        bins = BinSeries(
            counts[n_discard:], args.tau, args.delta or 0.0, n_discard
        )
    else:
        events = _load_events(args)
        n_bins = int(events.horizon / args.tau)
        bins = bin_counts(
            events, args.tau, _discard_count(args, n_bins), args.delta or 0.0
        )
    if args.delta is None:
        bins = BinSeries(
            bins.counts, bins.tau, default_delta(bins), bins.n_discarded
        )
    return bins


def _discard_count(args, n_bins):
    if args.discard_bins is not None:
        return args.discard_bins
    return int(args.discard_frac * n_bins)


def _cmd_fit_gmm(args):
    out = _outdir(args)
    bins = _bins_from_args(args)
    result = fit_gmm(bins, restarts=args.restarts, seed=args.seed)
    payload = fit_result_to_dict(result)
    payload["tau"] = bins.tau
    payload["delta"] = bins.delta
    payload["n_bins"] = int(bins.counts.size)
    payload["n_discarded"] = bins.n_discarded
    _write_json(os.path.join(out, "fit.json"), payload)
    return 0


def _cmd_moments(args):
    out = _outdir(args)
    model = load_model(args.model)
    if not (isinstance(model, HawkesModel) and isinstance(model.kernel, ExpKernel)):
        raise ValueError("moments needs an exponential-kernel hawkes model spec")
    bins = _bins_from_args(args)
    theo = theoretical_moments(
        model.lam, model.kernel.alpha, model.kernel.beta, bins.tau, bins.delta
    )
    emp = empirical_moments(bins)
    _write_json(
        os.path.join(out, "moments.json"),
        {
            "tau": bins.tau,
            "delta": bins.delta,
            "n_bins": int(bins.counts.size),
            "n_discarded": bins.n_discarded,
            "theoretical": {"m1": theo.m1, "m2": theo.m2, "m3": theo.m3},
            "empirical": {"m1": emp.m1, "m2": emp.m2, "m3": emp.m3},
        },
    )
    return 0


def _cmd_gof(args):
    out = _outdir(args)
    model = load_model(args.model)
    events = _load_events(args)
    stat, pval = gof_rescaling(model, events, T=args.T)
    _write_json(
        os.path.join(out, "gof.json"),
        {"ks_statistic": stat, "p_value": pval, "n_events": len(events)},
    )
    increments = rescaled_interarrivals(model, events)
    with open(os.path.join(out, "rescaled.csv"), "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["interarrival"])
        for z in increments:
            writer.writerow([repr(float(z))])
    return 0


def _cmd_decluster(args):
    out = _outdir(args)
    model = load_model(args.model)
    events = _load_events(args)
    result = decluster(model, events, seed=args.seed)
    with open(os.path.join(out, "decluster.csv"), "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "time", "rho", "label"])
        for i, (t, r, lab) in enumerate(
            zip(events.times, result.rho, result.labels)
        ):
            writer.writerow([i, repr(float(t)), repr(float(r)), lab])
    return 0


def _cmd_renewal_mean(args):
    out = _outdir(args)
    model = load_model(args.model)
    if not isinstance(model, RenewalHawkesModel):
        raise ValueError("renewal-mean needs a renewal-family model spec")
    m_grid = solve_M(model.g, model.kernel, args.horizon, h=args.step)
    k_grid = solve_K(model.kernel, args.horizon, h=m_grid.h)
    with open(os.path.join(out, "mean.csv"), "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "K", "M"])
        for t, k, m in zip(m_grid.times, k_grid.values, m_grid.values):
            writer.writerow([repr(float(t)), repr(float(k)), repr(float(m))])
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hawkes",
        description="Batch toolkit for self-exciting point processes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=False, model=False, seed=True):
        if model:
            p.add_argument("--model", required=True, help="model spec JSON")
        if data:
            p.add_argument("--data", required=True, help="event/count CSV")
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--output", required=True, help="output directory")

    p = sub.add_parser("simulate", help="simulate a model to CSV")
    common(p, model=True)
    p.add_argument("--T", type=float, required=True, help="horizon")
    p.add_argument(
        "--method",
        choices=["thinning", "exact", "cluster"],
        default="thinning",
        help="simulator for univariate hawkes models",
    )
    p.add_argument(
        "--emit-intensity",
        type=float,
        default=None,
        metavar="STEP",
        help="also write the intensity sampled on a uniform grid",
    )
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("validate", help="check CSV files against the format")
    p.add_argument("data", nargs="+", help="event CSV files")
    p.add_argument("--model", default=None, help="optional model spec JSON")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("fit-mle", help="maximum-likelihood fit")
    common(p, data=True)
    p.add_argument("--T", type=float, default=None, help="horizon override")
    p.add_argument("--family", choices=["exp", "powerlaw", "etas"], default="exp")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--fit-lam0", action="store_true")
    p.add_argument("--m0", type=float, default=None, help="ETAS mark threshold")
    p.set_defaults(func=_cmd_fit_mle)

    def binned_opts(p):
        p.add_argument("--T", type=float, default=None, help="horizon override")
        p.add_argument("--tau", type=float, required=True, help="bin width")
        p.add_argument("--delta", type=float, default=None,
                       help="covariance lag (default: data-driven, about "
                            "five decay times)")
        p.add_argument("--binned", action="store_true",
                       help="treat --data as a pre-binned count CSV")
        p.add_argument("--discard-frac", type=float, default=0.1)
        p.add_argument("--discard-bins", type=int, default=None)

    p = sub.add_parser("fit-gmm", help="method-of-moments fit on binned data")
    common(p, data=True)
    binned_opts(p)
    p.add_argument("--restarts", type=int, default=10)
    p.set_defaults(func=_cmd_fit_gmm)

    p = sub.add_parser("moments", help="theoretical and empirical bin moments")
    common(p, data=True, model=True, seed=False)
    binned_opts(p)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("gof", help="time-rescaling goodness-of-fit")
    common(p, data=True, model=True, seed=False)
    p.add_argument("--T", type=float, default=None, help="horizon override")
    p.set_defaults(func=_cmd_gof)

    p = sub.add_parser("decluster", help="background/triggered probabilities")
    common(p, data=True, model=True)
    p.add_argument("--T", type=float, default=None, help="horizon override")
    p.set_defaults(func=_cmd_decluster)

    p = sub.add_parser("renewal-mean", help="Volterra K/M mean functions")
    common(p, model=True, seed=False)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--step", type=float, default=None)
    p.set_defaults(func=_cmd_renewal_mean)

    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataValidationError as err:
        return _fail(3, str(err))
    except (SimulationError, FitError) as err:
        return _fail(4, str(err))
    except (ValueError, KeyError, TypeError, OSError) as err:
        return _fail(2, str(err))


def _fail(code, message):
    print(json.dumps({"code": code, "error": message}), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
