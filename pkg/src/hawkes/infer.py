"""Likelihood evaluation, maximum-likelihood fitting, declustering, and
residual goodness-of-fit.

Likelihoods use left-limit intensities throughout. The fast exponential
path and the O(n^2) general path are kept as independent routes to the
same value; their agreement is the module's primary oracle.
"""

import warnings
from dataclasses import dataclass
from math import exp, inf, isfinite, log, sqrt

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .core import (
    ExpKernel,
    HawkesModel,
    PowerLawKernel,
    loglik_terms_general,
)
from .errors import FitError
from .multivariate import MultivariateHawkesModel, is_stationary_mv
from .optim import nelder_mead
from .rng import child_rng, make_rng, philox_key
from .sim import EtasModel

__all__ = [
    "FitResult",
    "DeclusterResult",
    "loglik_general",
    "loglik_exp_fast",
    "loglik_etas",
    "loglik_discrete",
    "loglik_mv",
    "fit_mle",
    "decluster",
    "gof_rescaling",
    "kolmogorov_sf",
]

# Objective value substituted for a non-finite log-likelihood so the simplex
# search never sees infinities.
PENALTY = 1e12


@dataclass(frozen=True)
class FitResult:
    """Outcome of a multi-start fit.

    ``restart_values`` records, per restart, the starting parameters and the
    attained log-likelihood (or negated objective); ``theta_hat`` belongs to
    the restart with the best value (ties broken by lowest restart index).
    ``stationary`` flags whether the estimate lies in the stationary region;
    the search itself does not enforce stationarity.
    """

    theta_hat: dict
    loglik: float
    restarts: int
    iterations: int
    converged: bool
    restart_values: tuple
    stationary: bool | None = None
    flags: tuple = ()


@dataclass(frozen=True)
class DeclusterResult:
    """Per-event background probabilities and sampled labels."""

    rho: np.ndarray
    labels: tuple
    seed: int


def _window(events, T):
    T = events.horizon if T is None else float(T)
    if len(events) and events.times[-1] > T:
        raise ValueError("T must be at least the last event time")
    return T


def _warn_neginf(what):
    warnings.warn(
        f"{what}: some event has non-positive intensity; "
        "log-likelihood is -inf",
        RuntimeWarning,
        stacklevel=3,
    )


def loglik_general(model, events, T=None):
    """Log-likelihood by direct O(n^2) summation, any kernel.

    Returns -inf (with a warning) when an event intensity is non-positive,
    which can happen under inhibitory mis-specification.
    """
    T = _window(events, T)
    logsum, comp = loglik_terms_general(model, events, T)
    if logsum == -inf:
        _warn_neginf("loglik_general")
        return -inf
    return logsum - comp


def loglik_exp_fast(theta, events, T=None):
    """O(n) exponential-kernel log-likelihood via the Markov recursion.

    ``theta`` is (lam0, lam, alpha, beta). Identical in value to
    :func:`loglik_general` on the corresponding model: the recursion
    carries the decaying excess above the background, starting from
    lam0 - lam (no jump is attributed to t=0), and the compensator
    accumulates each event's (alpha/beta)(1 - exp(-beta (T - t_i))).
    """
    lam0, lam, alpha, beta = (float(v) for v in theta)
    if not beta > 0:
        raise ValueError("beta must be positive")
    T = _window(events, T)
    ll = _kernels.exp_loglik(events.times, T, lam0, lam, alpha, beta)
    if ll == -inf:
        _warn_neginf("loglik_exp_fast")
    return ll


def loglik_etas(model, events, T=None):
    """Marked ETAS log-likelihood (ground process plus magnitude terms)."""
    T = _window(events, T)
    if events.marks is None:
        raise ValueError("ETAS likelihood needs marked events")
    marks = events.marks
    if marks.size and marks.min() < model.m0:
        raise ValueError(f"marks below the detection threshold m0={model.m0}")
    times = events.times
    lam = model.lam
    weights = np.asarray(model.productivity(marks), dtype=np.float64)
    nu = model.decay()
    logs = []
    for i in range(times.size):
        rate = lam
        if i:
            rate += float(np.sum(weights[:i] * nu.evaluate(times[i] - times[:i])))
        if not rate > 0:
            _warn_neginf("loglik_etas")
            return -inf
        logs.append(log(rate))
    comp = lam * T
    if times.size:
        comp += float(np.sum(weights * nu.integral(T - times)))
    mark_part = float(
        times.size * log(model.beta) - model.beta * np.sum(marks - model.m0)
    )
    return float(np.sum(logs)) + mark_part - comp


def discrete_intensities(model, counts):
    """Conditional means lambda*_t implied by observed counts."""
    counts = np.asarray(counts, dtype=np.float64)
    T = counts.size
    g = model.g
    L = g.size
    rates = np.full(T, model.lam)
    for t in range(2, T + 1):
        lo = max(t - L, 1)
        acc = 0.0
        for s in range(lo, t):
            acc += g[t - s - 1] * counts[s - 1]
        rates[t - 1] += model.eta * acc
    return rates


def loglik_discrete(model, counts):
    """Log-likelihood of observed counts under the discrete-time model."""
    counts = np.asarray(counts)
    if counts.ndim != 1 or np.any(counts < 0):
        raise ValueError("counts must be non-negative integers")
    y = counts.astype(np.float64)
    m = discrete_intensities(model, counts)
    if model.emission == "poisson":
        terms = y * np.log(m) - m - gammaln(y + 1.0)
    else:
        psi = model.psi
        terms = (
            gammaln(y + psi)
            - gammaln(psi)
            - gammaln(y + 1.0)
            + psi * np.log(psi / (psi + m))
            + y * np.log(m / (psi + m))
        )
    return float(np.sum(terms))


def _mv_exp_loglik(times, dims0, T, lam, alpha, beta):
    """Multivariate exponential log-likelihood, O(n d^2) recursion.

    ``dims0`` are 0-based dimension labels; ``alpha``/``beta`` are d x d
    nested lists (source row, target column).
    """
    d = len(lam)
    exc = [[0.0] * d for _ in range(d)]
    tprev = 0.0
    ll = 0.0
    for ti, di in zip(times, dims0):
        dt = ti - tprev
        for j in range(d):
            for k in range(d):
                exc[j][k] *= exp(-beta[j][k] * dt)
        rate = lam[di]
        for j in range(d):
            rate += exc[j][di]
        if not rate > 0.0:
            return -inf
        ll += log(rate)
        for k in range(d):
            exc[di][k] += alpha[di][k]
        tprev = ti
    comp = 0.0
    for k in range(d):
        comp += lam[k] * T
    for ti, di in zip(times, dims0):
        for k in range(d):
            comp += alpha[di][k] / beta[di][k] * (1.0 - exp(-beta[di][k] * (T - ti)))
    return ll - comp


def loglik_mv(model, events, T=None):
    """Multivariate log-likelihood assembled from per-dimension terms.

    Direct product-form extension of the univariate likelihood:
    sum_k [sum over dim-k events of log lambda*_k - int_0^T lambda*_k].
    """
    T = _window(events, T)
    if events.dims is None:
        if model.d != 1:
            raise ValueError("events must carry dims for a multivariate model")
        dims = np.ones(len(events), dtype=np.int64)
    else:
        dims = events.dims
    times = events.times
    logs = []
    for i in range(times.size):
        k = dims[i] - 1
        rate = float(model.baselines[k])
        for j in range(model.d):
            src = times[:i][dims[:i] == j + 1]
            if src.size:
                rate += float(np.sum(model.kernels[j][k].evaluate(times[i] - src)))
        if not rate > 0:
            _warn_neginf("loglik_mv")
            return -inf
        logs.append(log(rate))
    comp = float(np.sum(model.baselines)) * T
    for j in range(model.d):
        src = times[dims == j + 1]
        if src.size:
            for k in range(model.d):
                comp += float(np.sum(model.kernels[j][k].integral(T - src)))
    return float(np.sum(logs)) - comp


# ---------------------------------------------------------------------------
# Maximum likelihood by direct numerical maximization


def _spacing_scale(times, T):
    n = times.size
    if n >= 3:
        med = float(np.median(np.diff(times)))
        if med > 0:
            return med
    return T / max(n, 1)


def _exp_family(events, T, fit_lam0):
    times = events.times
    n = times.size
    rate = max(n / T, 1e-6)
    beta_b = 1.0 / _spacing_scale(times, T)
    base = {"lambda": 0.5 * rate, "alpha": 0.5 * beta_b, "beta": beta_b}
    names = ["lambda", "alpha", "beta"]
    if fit_lam0:
        names.append("lambda0")
        base["lambda0"] = max(rate, 1e-6)

    def objective(x):
        lam, alpha, beta = exp(x[0]), exp(x[1]), exp(x[2])
        lam0 = exp(x[3]) if fit_lam0 else lam
        ll = _kernels.exp_loglik(times, T, lam0, lam, alpha, beta)
        return -ll if isfinite(ll) else PENALTY

    def theta(x):
        out = {"lambda": exp(x[0]), "alpha": exp(x[1]), "beta": exp(x[2])}
        if fit_lam0:
            out["lambda0"] = exp(x[3])
        return out

    def stationary(th):
        return th["alpha"] / th["beta"] < 1

    return names, base, objective, theta, stationary


def _powerlaw_family(events, T):
    times = events.times
    n = times.size
    rate = max(n / T, 1e-6)
    base = {"lambda": 0.5 * rate, "K": 0.25, "c": 1.0, "p": 1.5}
    names = ["lambda", "K", "c", "p"]

    def objective(x):
        lam, k, c = exp(x[0]), exp(x[1]), exp(x[2])
        p = 1.0 + exp(x[3])
        model = HawkesModel(lam, PowerLawKernel(k, c, p))
        logsum, comp = loglik_terms_general(model, events, T)
        if logsum == -inf or not isfinite(comp):
            return PENALTY
        return comp - logsum

    def theta(x):
        return {
            "lambda": exp(x[0]),
            "K": exp(x[1]),
            "c": exp(x[2]),
            "p": 1.0 + exp(x[3]),
        }

    def stationary(th):
        return PowerLawKernel(th["K"], th["c"], th["p"]).branching_ratio() < 1

    return names, base, objective, theta, stationary


def _pack_logs(names, point):
    x = []
    for name in names:
        v = point[name]
        x.append(log(v - 1.0) if name == "p" else log(v))
    return np.asarray(x)


def _etas_family(events, T, m0):
    if events.marks is None:
        raise ValueError("ETAS fitting needs marked events")
    times = events.times
    marks = events.marks
    n = times.size
    if marks.min() < m0:
        raise ValueError(f"marks below the detection threshold m0={m0}")
    # Gutenberg-Richter rate has a closed-form MLE from the factorized
    # likelihood; only the ground-process parameters need the optimizer.
    beta_hat = 1.0 / max(float(np.mean(marks - m0)), 1e-12)
    mark_part = n * log(beta_hat) - beta_hat * float(np.sum(marks - m0))
    rate = max(n / T, 1e-6)
    base = {"lambda": 0.5 * rate, "A": 0.25, "alpha": beta_hat / 2.0, "c": 0.1, "p": 1.5}
    names = ["lambda", "A", "alpha", "c", "p"]

    def ground_loglik(lam, A, alpha, c, p):
        weights = A * np.exp(alpha * (marks - m0))
        scale = (p - 1.0) * c ** (p - 1.0)
        logs = 0.0
        for i in range(1, n + 1):
            r = lam
            if i > 1:
                r += float(
                    np.sum(
                        weights[: i - 1]
                        * scale
                        * (times[i - 1] - times[: i - 1] + c) ** (-p)
                    )
                )
            if not r > 0:
                return -inf
            logs += log(r)
        if n:
            q = 1.0 - p
            comp_exc = float(np.sum(weights * (1.0 - ((T - times + c) / c) ** q)))
        else:
            comp_exc = 0.0
        return logs - lam * T - comp_exc

    def objective(x):
        lam, A, alpha, c = exp(x[0]), exp(x[1]), exp(x[2]), exp(x[3])
        p = 1.0 + exp(x[4])
        ll = ground_loglik(lam, A, alpha, c, p)
        if not isfinite(ll):
            return PENALTY
        return -(ll + mark_part)

    def theta(x):
        return {
            "lambda": exp(x[0]),
            "A": exp(x[1]),
            "alpha": exp(x[2]),
            "c": exp(x[3]),
            "p": 1.0 + exp(x[4]),
            "beta": beta_hat,
        }

    def stationary(th):
        return th["beta"] > th["alpha"] and (
            th["A"] * th["beta"] / (th["beta"] - th["alpha"]) < 1
        )

    return names, base, objective, theta, stationary


def _mvexp_family(events, T, d):
    if d is None:
        raise ValueError("family='mvexp' needs the dimension count d")
    times = events.times.tolist()
    dims0 = (
        (events.dims - 1).tolist()
        if events.dims is not None
        else [0] * len(events)
    )
    n = len(times)
    rate = max(n / T / d, 1e-6)
    beta_b = 1.0 / _spacing_scale(events.times, T)
    base = {"lambda": np.full(d, 0.5 * rate),
            "alpha": np.full((d, d), 0.25 * beta_b / d),
            "beta": np.full((d, d), beta_b)}
    names = ["lambda", "alpha", "beta"]

    def unpack(x):
        lam = np.exp(x[:d])
        alpha = np.exp(x[d : d + d * d]).reshape(d, d)
        beta = np.exp(x[d + d * d :]).reshape(d, d)
        return lam, alpha, beta

    def objective(x):
        lam, alpha, beta = unpack(x)
        ll = _mv_exp_loglik(
            times, dims0, T, lam.tolist(), alpha.tolist(), beta.tolist()
        )
        return -ll if isfinite(ll) else PENALTY

    def theta(x):
        lam, alpha, beta = unpack(x)
        return {"lambda": lam, "alpha": alpha, "beta": beta}

    def stationary(th):
        try:
            model = MultivariateHawkesModel(
                d,
                th["lambda"],
                [
                    [ExpKernel(th["alpha"][j, k], th["beta"][j, k]) for k in range(d)]
                    for j in range(d)
                ],
            )
            return is_stationary_mv(model)[0]
        except (ValueError, OverflowError):
            return False  # wild estimate (e.g. overflowed parameter)

    return names, base, objective, theta, stationary


def _mv_pack(base, jitter):
    parts = [np.log(np.asarray(base["lambda"], float).ravel()),
             np.log(np.asarray(base["alpha"], float).ravel()),
             np.log(np.asarray(base["beta"], float).ravel())]
    return np.concatenate(parts) + jitter


def fit_mle(
    events,
    T=None,
    family="exp",
    *,
    restarts=10,
    seed=0,
    fit_lam0=False,
    m0=None,
    d=None,
    max_iter=2000,
):
    """Maximize the log-likelihood by multi-start Nelder-Mead.

    Positive parameters are searched on the log scale; stationarity is not
    enforced during the search and is only flagged on the result. Restart 0
    starts from moment-style heuristics, later restarts jitter them with a
    per-restart child stream of ``seed``, so adding restarts never changes
    earlier ones. Raises :class:`FitError` when no restart converges.
    """
    T = _window(events, T)
    if len(events) < 2:
        warnings.warn("fewer than 2 events: the fit is unlikely to be useful",
                      stacklevel=2)
    if family == "exp":
        names, base, objective, theta_of, stationary_of = _exp_family(
            events, T, fit_lam0
        )
    elif family == "powerlaw":
        names, base, objective, theta_of, stationary_of = _powerlaw_family(events, T)
    elif family == "etas":
        if m0 is None:
            raise ValueError("family='etas' needs the detection threshold m0")
        names, base, objective, theta_of, stationary_of = _etas_family(events, T, m0)
    elif family == "mvexp":
        names, base, objective, theta_of, stationary_of = _mvexp_family(events, T, d)
    else:
        raise ValueError(f"unknown model family {family!r}")

    key = philox_key(seed)
    mv = family == "mvexp"
    n_params = (
        len(_mv_pack(base, 0.0)) if mv else len(names)
    )
    outcomes = []
    for k in range(int(restarts)):
        if k == 0:
            jitter = np.zeros(n_params)
        else:
            jitter = child_rng(key, k).normal(0.0, 0.75, size=n_params)
        if mv:
            x0 = _mv_pack(base, jitter)
            start = theta_of(x0)
        else:
            x0 = _pack_logs(names, base) + jitter
            start = theta_of(x0)
        res = nelder_mead(objective, x0, step=0.3, max_iter=max_iter)
        outcomes.append((start, res))

    # Deterministic merge: best attained value, ties to the lowest index.
    best_k = min(
        range(len(outcomes)), key=lambda i: (outcomes[i][1].fx, i)
    )
    best = outcomes[best_k][1]
    if not any(res.converged for _, res in outcomes):
        detail = "; ".join(
            f"restart {i}: value={res.fx:.6g} after {res.iterations} iterations"
            for i, (_, res) in enumerate(outcomes)
        )
        raise FitError(f"no restart converged: {detail}")

    theta = theta_of(best.x)
    restart_values = tuple(
        (start, -res.fx if res.fx < PENALTY else -inf) for start, res in outcomes
    )
    return FitResult(
        theta_hat=theta,
        loglik=-best.fx,
        restarts=len(outcomes),
        iterations=best.iterations,
        converged=best.converged,
        restart_values=restart_values,
        stationary=bool(stationary_of(theta)),
    )


# ---------------------------------------------------------------------------
# Declustering and goodness-of-fit


def event_intensities(model, events):
    """Left-limit (ground) intensity at each event time."""
    times = events.times
    if isinstance(model, EtasModel):
        weights = np.asarray(model.productivity(events.marks))
        nu = model.decay()
        out = np.empty(times.size)
        for i in range(times.size):
            out[i] = model.lam
            if i:
                out[i] += float(
                    np.sum(weights[:i] * nu.evaluate(times[i] - times[:i]))
                )
        return out
    if isinstance(model.kernel, ExpKernel):
        r = _kernels.exp_excitations(times, model.kernel.beta)
        base = model.lam + (model.lam0 - model.lam) * np.exp(
            -model.kernel.beta * times
        )
        return base + model.kernel.alpha * r
    out = np.empty(times.size)
    for i in range(times.size):
        out[i] = model.lam
        if i:
            out[i] += float(np.sum(model.kernel.evaluate(times[i] - times[:i])))
    return out


def decluster(model, events, seed=0):
    """Background probabilities rho_i = lam / lambda*(t_i) and sampled labels.

    The spatiotemporal declustering ratio adapted to the temporal case: the
    numerator is the constant background rate. Labels are drawn
    independently per event (background with probability rho_i) from the
    recorded seed.
    """
    lam = model.lam
    rates = event_intensities(model, events)
    rho = lam / rates
    us = make_rng(seed).random(len(events))
    labels = tuple(
        "background" if u < r else "triggered" for u, r in zip(us, rho)
    )
    return DeclusterResult(rho=rho, labels=labels, seed=int(seed))


def kolmogorov_sf(x):
    """Asymptotic Kolmogorov distribution survival function Q(x)."""
    if x <= 0:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = 2.0 * (-1.0) ** (k - 1) * exp(-2.0 * k * k * x * x)
        total += term
        if abs(term) < 1e-16:
            break
    return min(max(total, 0.0), 1.0)


def rescaled_interarrivals(model, events):
    """Compensator increments between consecutive events."""
    from .core import rescale_times

    lams = rescale_times(model, events)
    return np.diff(lams, prepend=0.0)


def gof_rescaling(model, events, T=None):
    """KS test of the rescaled interarrivals against Exponential(1).

    Under the true model the compensator increments are i.i.d. unit-rate
    exponentials. Returns (KS statistic, asymptotic p-value).
    """
    _window(events, T)
    n = len(events)
    if n < 10:
        raise ValueError("goodness-of-fit needs at least 10 events")
    z = np.sort(rescaled_interarrivals(model, events))
    cdf = 1.0 - np.exp(-z)
    i = np.arange(1, n + 1)
    d_plus = float(np.max(i / n - cdf))
    d_minus = float(np.max(cdf - (i - 1) / n))
    d = max(d_plus, d_minus)
    return d, kolmogorov_sf(sqrt(n) * d)
