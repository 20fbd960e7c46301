"""Interval-censored (binned) inference for the exponential Hawkes model.

Long-run moments of bin counts have closed forms in (lam, alpha, beta); the
method-of-moments fit matches them to empirical bin moments by minimizing
the plain squared residual (identity weighting).
"""

import warnings
from dataclasses import dataclass
from math import ceil, exp, expm1, log

import numpy as np

from .errors import FitError
from .infer import FitResult, PENALTY
from .optim import nelder_mead
from .rng import child_rng, philox_key

__all__ = [
    "BinSeries",
    "MomentTriple",
    "bin_counts",
    "theoretical_moments",
    "empirical_moments",
    "fit_gmm",
    "fit_gmm_from_moments",
]


@dataclass(frozen=True)
class BinSeries:
    """Bin counts K_1..K_n with their width, covariance lag, and discard count."""

    counts: np.ndarray
    tau: float
    delta: float = 0.0
    n_discarded: int = 0

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size < 1:
            raise ValueError("counts must be a non-empty 1-D array")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class MomentTriple:
    """(mean, variance, lag covariance) of bin counts.

    ``kind`` is "theoretical" (the long-run w values) or "empirical" (the
    m values computed from an observed bin series).
    """

    m1: float
    m2: float
    m3: float
    kind: str

    def as_tuple(self):
        return (self.m1, self.m2, self.m3)


def lag_bins(delta, tau):
    """Index lag pairing bins (i, i + lag) for the covariance moment.

    ceil(delta/tau), clamped to at least one bin so the covariance always
    pairs distinct bins (delta = 0 means adjacent windows).
    """
    return max(int(ceil(delta / tau - 1e-9)), 1)


def default_delta(bins):
    """Data-driven covariance lag, a whole number of bins.

    The covariance moment decays at rate beta - alpha, so the lag should be
    about 5 relaxation times to retain signal: with moment-style initial
    values (beta0 = 1/tau and beta0/(beta0 - alpha0) = sqrt(m2/m1)) that is
    5 sqrt(m2/m1) bins.
    """
    k = bins.counts.astype(np.float64)
    m1 = float(np.mean(k))
    m2 = float(np.mean(k**2) - m1**2)
    s = (max(m2 / m1, 1.0 + 1e-6)) ** 0.5 if m1 > 0 else 1.0
    return max(int(round(5.0 * s)), 1) * bins.tau


def bin_counts(events, tau, n_discard=0, delta=0.0):
    """Count events per bin ((i-1) tau, i tau] and drop the first bins.

    The horizon must be an exact multiple of tau (within 1e-9); otherwise
    the trailing partial bin is dropped with a warning. Discarding initial
    bins reduces the bias of matching asymptotic moments on a record that
    starts empty.
    """
    tau = float(tau)
    if not tau > 0:
        raise ValueError("tau must be positive")
    n_discard = int(n_discard)
    if n_discard < 0:
        raise ValueError("n_discard must be non-negative")
    ratio = events.horizon / tau
    n_bins = round(ratio)
    if abs(ratio - n_bins) > 1e-9 * max(1.0, ratio) or n_bins == 0:
        n_bins = int(ratio)
        warnings.warn(
            f"horizon {events.horizon} is not a multiple of tau={tau}; "
            "dropping the trailing partial bin",
            stacklevel=2,
        )
    if n_bins < n_discard + 1:
        raise ValueError("discarding leaves no bins")
    idx = np.ceil(events.times / tau).astype(np.int64)
    idx = idx[idx <= n_bins]
    counts = np.bincount(idx - 1, minlength=n_bins)[:n_bins]
    return BinSeries(
        counts=counts[n_discard:], tau=tau, delta=float(delta), n_discarded=n_discard
    )


def theoretical_moments(lam, alpha, beta, tau, delta):
    """Long-run mean, variance, and lag-delta covariance of bin counts.

    Valid on the stationarity region 0 <= alpha < beta. The variance uses
    the ratio beta/(beta - alpha) so the Poisson reduction (alpha = 0) is
    exact; the covariance decays as exp(-(beta - alpha) delta).
    """
    if not (beta > 0 and alpha >= 0):
        raise ValueError("need beta > 0 and alpha >= 0")
    if alpha >= beta:
        raise ValueError("alpha >= beta: the long-run moments do not exist")
    if not tau > 0:
        raise ValueError("tau must be positive")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    kappa = beta - alpha
    r = beta / kappa
    w1 = lam * r * tau
    w2 = lam * r * (tau * r**2 + (1.0 - r**2) * (-expm1(-kappa * tau)) / kappa)
    w3 = (
        (lam * beta * alpha)
        * (2.0 * beta - alpha)
        * expm1(-kappa * tau) ** 2
        / (2.0 * kappa**4)
        * exp(-kappa * delta)
    )
    return MomentTriple(float(w1), float(w2), float(w3), kind="theoretical")


def empirical_moments(bins):
    """Empirical bin moments m1, m2, m3.

    m3 pairs bins (i, i + lag) over the first n* = n - lag indices and
    centers with the two separate window means (not a pooled mean).
    """
    k = bins.counts.astype(np.float64)
    n = k.size
    if n < 2:
        raise ValueError("need at least 2 bins for the variance moment")
    m1 = float(np.mean(k))
    m2 = float(np.mean(k**2) - m1**2)
    lag = lag_bins(bins.delta, bins.tau)
    n_star = n - lag
    if n_star < 2:
        raise ValueError(
            f"need at least lag+2 bins for the covariance moment (lag={lag})"
        )
    a = k[:n_star]
    b = k[lag : lag + n_star]
    m3 = float(np.mean(a * b) - np.mean(a) * np.mean(b))
    return MomentTriple(m1, m2, m3, kind="empirical")


def _fit_triple(m1, m2, m3, tau, delta, restarts, seed, max_iter):
    """Minimize the squared moment residual over (log lam, log beta, logit(alpha/beta))."""

    def unpack(x):
        lam = exp(x[0])
        beta = exp(x[1])
        ratio = 1.0 / (1.0 + exp(-x[2]))
        return lam, ratio * beta, beta

    def objective(x):
        lam, alpha, beta = unpack(x)
        try:
            w = theoretical_moments(lam, alpha, beta, tau, delta)
        except (ValueError, OverflowError):
            return PENALTY
        h = (m1 - w.m1, m2 - w.m2, m3 - w.m3)
        val = h[0] ** 2 + h[1] ** 2 + h[2] ** 2
        return val if np.isfinite(val) else PENALTY

    # Moment-style starting point: m1 pins the rate, the dispersion ratio
    # m2/m1 approximates (beta/(beta-alpha))^2 for wide bins.
    rate = max(m1 / tau, 1e-8)
    s = max(m2 / m1, 1.0 + 1e-6) ** 0.5 if m1 > 0 else 1.0 + 1e-6
    ratio0 = min(max(1.0 - 1.0 / s, 1e-4), 1.0 - 1e-4)
    base = np.array([log(rate / s), log(1.0 / tau), log(ratio0 / (1.0 - ratio0))])

    key = philox_key(seed)
    outcomes = []
    for k in range(int(restarts)):
        jitter = (
            np.zeros(3) if k == 0 else child_rng(key, k).normal(0.0, 1.0, size=3)
        )
        x0 = base + jitter
        s_lam, s_alpha, s_beta = unpack(x0)
        start = {"lambda": s_lam, "beta": s_beta, "alpha": s_alpha}
        res = nelder_mead(objective, x0, step=0.3, max_iter=max_iter)
        outcomes.append((start, res))
    best_k = min(range(len(outcomes)), key=lambda i: (outcomes[i][1].fx, i))
    best = outcomes[best_k][1]
    if not any(res.converged for _, res in outcomes):
        raise FitError("no GMM restart converged")
    lam, alpha, beta = unpack(best.x)
    theta = {"lambda": lam, "beta": beta, "alpha": alpha}
    restart_values = tuple((start, -res.fx) for start, res in outcomes)
    return theta, best, restart_values


def fit_gmm_from_moments(
    moments, tau, delta, *, restarts=10, seed=0, max_iter=2000, flags=()
):
    """Method-of-moments fit from a given (m1, m2, m3) triple.

    ``FitResult.loglik`` holds the negated criterion value h'h, so larger
    is better, matching the likelihood-fit convention.
    """
    m1, m2, m3 = moments.as_tuple()
    theta, best, restart_values = _fit_triple(
        m1, m2, m3, tau, delta, restarts, seed, max_iter
    )
    return FitResult(
        theta_hat=theta,
        loglik=-best.fx,
        restarts=len(restart_values),
        iterations=best.iterations,
        converged=best.converged,
        restart_values=restart_values,
        stationary=bool(theta["alpha"] < theta["beta"]),
        flags=tuple(flags),
    )


def fit_gmm(bins, tau=None, delta=None, *, restarts=10, seed=0, max_iter=2000):
    """Fit (lam, beta, alpha) to a bin series by moment matching.

    ``tau``/``delta`` default to the values recorded on the bin series.
    A non-positive empirical covariance leaves alpha weakly identified and
    is flagged (and warned about) rather than rejected.
    """
    tau = bins.tau if tau is None else float(tau)
    delta = bins.delta if delta is None else float(delta)
    if tau != bins.tau:
        raise ValueError("tau disagrees with the bin series")
    if delta != bins.delta:
        bins = BinSeries(bins.counts, bins.tau, delta, bins.n_discarded)
    emp = empirical_moments(bins)
    flags = []
    if emp.m2 <= 0:
        raise ValueError("zero empirical variance: moments cannot be matched")
    if emp.m3 <= 0:
        warnings.warn(
            "non-positive empirical covariance moment: alpha is weakly "
            "identified",
            stacklevel=2,
        )
        flags.append("weak-identification")
    return fit_gmm_from_moments(
        emp,
        tau,
        delta,
        restarts=restarts,
        seed=seed,
        max_iter=max_iter,
        flags=flags,
    )
