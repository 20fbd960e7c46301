"""Domain types, excitation kernels, conditional intensity and compensators.

The conventions used throughout the package:

* event times are strictly increasing and live in ``(0, horizon]``;
* the conditional intensity is left-continuous, so intensities at event
  times are evaluated as left limits (the sum runs over ``T_i < t``
  strictly) unless the ``right_limit`` flag is set;
* an exponentially decaying model may start from an initial intensity
  ``lam0`` different from the background rate ``lam``; for every other
  kernel ``lam0`` must equal ``lam``.
"""

from dataclasses import dataclass
from math import exp, fsum, isfinite, log

import numpy as np

from . import _kernels
from .errors import DataValidationError

__all__ = [
    "EventSequence",
    "Kernel",
    "ExpKernel",
    "PowerLawKernel",
    "HawkesModel",
    "NonlinearSpec",
    "kernel_eval",
    "kernel_integral",
    "branching_ratio",
    "conditional_intensity",
    "compensator",
    "is_stationary",
    "rescale_times",
    "adaptive_simpson",
]


def as_times(x):
    """Coerce to a 1-D float64 array without copying when possible."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D array of times")
    return arr


def adaptive_simpson(f, a, b, abs_tol=1e-10, rel_tol=1e-8, max_depth=50):
    """Adaptive Simpson quadrature of ``f`` on ``[a, b]``.

    Interval halving stops once the local Richardson error estimate is below
    both tolerances (the absolute one scaled by the subinterval fraction).
    """
    if b <= a:
        return 0.0

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    total = abs(b - a)
    m = 0.5 * (a + b)
    stack = [(a, b, f(a), f(m), f(b), max_depth)]
    acc = 0.0
    while stack:
        x0, x2, f0, f1, f2, depth = stack.pop()
        xm = 0.5 * (x0 + x2)
        whole = simpson(x0, x2, f0, f1, f2)
        lm = 0.5 * (x0 + xm)
        rm = 0.5 * (xm + x2)
        fl = f(lm)
        fr = f(rm)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        err = (left + right - whole) / 15.0
        tol = max(abs_tol * (x2 - x0) / total, rel_tol * abs(left + right))
        if depth <= 0 or abs(err) <= tol:
            acc += left + right + err
        else:
            stack.append((x0, xm, f0, fl, f1, depth - 1))
            stack.append((xm, x2, f1, fr, f2, depth - 1))
    return acc


class Kernel:
    """Base class for excitation functions.

    Subclasses provide ``evaluate``; the definite integral defaults to
    adaptive Simpson quadrature (abs 1e-10 / rel 1e-8) and the branching
    ratio to the integral over a long horizon, so only kernels with closed
    forms need to override them.
    """

    def evaluate(self, t):
        raise NotImplementedError

    def integral(self, t):
        if np.ndim(t) > 0:
            return np.array([self.integral(float(ti)) for ti in np.asarray(t)])
        return adaptive_simpson(self.evaluate, 0.0, float(t))

    def branching_ratio(self):
        # Fallback: integrate until the tail stops contributing.
        total = 0.0
        a, width = 0.0, 1.0
        while width < 2**40:
            piece = adaptive_simpson(self.evaluate, a, a + width)
            total += piece
            if abs(piece) < 1e-12 * max(total, 1.0):
                break
            a += width
            width *= 2.0
        return total


@dataclass(frozen=True)
class ExpKernel(Kernel):
    """mu(t) = alpha * exp(-beta t).

    ``alpha`` may be negative only when the kernel is used inside a
    :class:`NonlinearSpec`; linear models require ``alpha >= 0``.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def evaluate(self, t):
        return self.alpha * np.exp(-self.beta * np.asarray(t, dtype=np.float64))

    def integral(self, t):
        t = np.asarray(t, dtype=np.float64)
        return self.alpha / self.beta * (1.0 - np.exp(-self.beta * t))

    def branching_ratio(self):
        return self.alpha / self.beta

    def integral_inv(self, x):
        """Inverse of ``integral``; defined for 0 <= x < alpha/beta."""
        return -np.log1p(-self.beta * np.asarray(x) / self.alpha) / self.beta


@dataclass(frozen=True)
class PowerLawKernel(Kernel):
    """Omori-Utsu power law mu(t) = k (t + c)^(-p) with p > 1."""

    k: float
    c: float
    p: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("k must be positive")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not self.p > 1:
            raise ValueError("p must exceed 1")

    def evaluate(self, t):
        return self.k * (np.asarray(t, dtype=np.float64) + self.c) ** (-self.p)

    def integral(self, t):
        t = np.asarray(t, dtype=np.float64)
        q = 1.0 - self.p
        return self.k / (self.p - 1.0) * (self.c**q - (t + self.c) ** q)

    def branching_ratio(self):
        return self.k * self.c ** (1.0 - self.p) / (self.p - 1.0)

    def integral_inv(self, x):
        q = 1.0 - self.p
        base = self.c**q - (self.p - 1.0) * np.asarray(x) / self.k
        return base ** (1.0 / q) - self.c


def _kernel_min_nonneg(kernel):
    """Reject kernels that can go negative (only NonlinearSpec allows them)."""
    probe = kernel.evaluate(0.0)
    if np.any(np.asarray(probe) < 0):
        raise ValueError(
            "excitation function takes negative values; signed kernels are "
            "only permitted inside NonlinearSpec"
        )


@dataclass(frozen=True)
class EventSequence:
    """Arrival times on a finite observation window, with optional marks/dims.

    Times must be strictly increasing and lie in ``(0, horizon]``; duplicate
    timestamps are rejected (simple point process). ``marks`` are real-valued,
    ``dims`` are 1-based dimension labels; both must match ``times`` in length
    when present.
    """

    times: np.ndarray
    horizon: float
    marks: np.ndarray | None = None
    dims: np.ndarray | None = None

    def __post_init__(self):
        times = as_times(self.times)
        horizon = float(self.horizon)
        if horizon < 0:
            raise DataValidationError("horizon must be non-negative")
        if times.size:
            if not np.all(np.diff(times) > 0):
                raise DataValidationError(
                    "event times must be strictly increasing (no duplicates)"
                )
            if times[0] <= 0:
                raise DataValidationError("event times must be positive")
            if times[-1] > horizon:
                raise DataValidationError("event times must not exceed the horizon")
        times.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "horizon", horizon)
        if self.marks is not None:
            marks = np.asarray(self.marks, dtype=np.float64)
            if marks.shape != times.shape:
                raise DataValidationError("marks must match times in length")
            marks.flags.writeable = False
            object.__setattr__(self, "marks", marks)
        if self.dims is not None:
            dims = np.asarray(self.dims, dtype=np.int64)
            if dims.shape != times.shape:
                raise DataValidationError("dims must match times in length")
            if dims.size and dims.min() < 1:
                raise DataValidationError("dims are 1-based dimension labels")
            dims.flags.writeable = False
            object.__setattr__(self, "dims", dims)

    def __len__(self):
        return self.times.shape[0]


@dataclass(frozen=True)
class HawkesModel:
    """Linear Hawkes model: background rate, initial intensity, kernel.

    ``lam0`` defaults to ``lam`` (the homogeneous-start special case). A
    distinct ``lam0`` is only meaningful for the exponential kernel, whose
    Markov decay defines how the initial excess relaxes.
    """

    lam: float
    kernel: Kernel
    lam0: float | None = None

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lam must be non-negative")
        lam0 = self.lam if self.lam0 is None else float(self.lam0)
        if not lam0 >= 0:
            raise ValueError("lam0 must be non-negative")
        object.__setattr__(self, "lam0", lam0)
        _kernel_min_nonneg(self.kernel)
        if lam0 != self.lam and not isinstance(self.kernel, ExpKernel):
            raise ValueError(
                "an initial intensity lam0 != lam requires the exponential kernel"
            )


@dataclass(frozen=True)
class NonlinearSpec:
    """Nonlinear Hawkes model: intensity phi(sum of kernel terms).

    ``phi`` must map reals to non-negative reals and be monotone
    non-decreasing (the thinning bound relies on it); it defaults to the
    clipped-linear ``max(lam + x, 0)``. The kernel may take negative values
    (self-inhibition).
    """

    lam: float
    kernel: Kernel
    phi: object = None

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lam must be non-negative")
        if self.phi is None:
            lam = self.lam
            object.__setattr__(self, "phi", lambda x: max(lam + x, 0.0))


def kernel_eval(kernel, t):
    """Excitation function value mu(t) for t >= 0."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("kernel is defined for non-negative lags only")
    return kernel.evaluate(t)


def kernel_integral(kernel, t):
    """Definite integral of the excitation function over (0, t]."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("kernel is defined for non-negative lags only")
    return kernel.integral(t)


def branching_ratio(kernel):
    """Expected number of direct offspring per event (integral of mu)."""
    return kernel.branching_ratio()


def _check_window(events, t):
    if not 0 <= t <= events.horizon:
        raise ValueError(
            f"t={t} outside the observation window [0, {events.horizon}]"
        )


def excitation_sum(kernel, times, t, right_limit=False):
    """sum mu(t - T_i) over past events (strict past unless right_limit)."""
    past = times[times <= t] if right_limit else times[times < t]
    if past.size == 0:
        return 0.0
    return float(np.sum(kernel.evaluate(t - past)))


def conditional_intensity(model, events, t, right_limit=False):
    """Conditional intensity at time t given the events' strict past.

    Left-continuous by default: at an event time the jump is excluded.
    ``right_limit=True`` returns the post-jump value instead.
    """
    t = float(t)
    _check_window(events, t)
    s = excitation_sum(model.kernel, events.times, t, right_limit)
    if isinstance(model, NonlinearSpec):
        return float(model.phi(s))
    base = model.lam
    if isinstance(model.kernel, ExpKernel):
        base += (model.lam0 - model.lam) * exp(-model.kernel.beta * t)
    return base + s


def compensator(model, events, t):
    """Integrated intensity over (0, t].

    The exponential kernel uses the closed form; other kernels accumulate
    each event's definite kernel integral (closed form where the kernel has
    one, adaptive Simpson otherwise).
    """
    t = float(t)
    _check_window(events, t)
    past = events.times[events.times < t]
    total = model.lam * t
    if isinstance(model.kernel, ExpKernel):
        beta = model.kernel.beta
        total += (model.lam0 - model.lam) / beta * (1.0 - exp(-beta * t))
    if past.size:
        total += float(np.sum(model.kernel.integral(t - past)))
    return total


def is_stationary(model):
    """(eta < 1, eta) for a univariate linear model."""
    eta = model.kernel.branching_ratio()
    return bool(eta < 1), float(eta)


def rescale_times(model, events):
    """Compensator evaluated at each event time.

    Under the true model the increments of the result are i.i.d. unit-rate
    exponential, which is the basis of the residual goodness-of-fit test.
    """
    times = events.times
    if times.size == 0:
        return np.empty(0)
    if isinstance(model.kernel, ExpKernel):
        return _kernels.exp_compensators(
            times, model.lam0, model.lam, model.kernel.alpha, model.kernel.beta
        )
    out = np.empty(times.size)
    for i, ti in enumerate(times):
        prior = times[:i]
        out[i] = model.lam * ti
        if prior.size:
            out[i] += float(np.sum(model.kernel.integral(ti - prior)))
    return out


def loglik_terms_general(model, events, T):
    """Left-limit log intensities and the compensator, by direct summation.

    This is the O(n^2) reference route used by the likelihood oracle; the
    log-intensity sum is compensated (math.fsum) so Poisson reductions are
    exact. Returns ``(sum_log_intensity, compensator)`` where the first item
    is ``-inf`` if any event intensity is non-positive.
    """
    times = events.times
    lam = model.lam
    is_exp = isinstance(model.kernel, ExpKernel)
    logs = []
    for i, ti in enumerate(times):
        s = 0.0
        if i:
            s = float(np.sum(model.kernel.evaluate(ti - times[:i])))
        lstar = lam + s
        if is_exp:
            lstar += (model.lam0 - lam) * exp(-model.kernel.beta * ti)
        if not lstar > 0 or not isfinite(lstar):
            return -np.inf, np.nan
        logs.append(log(lstar))
    total = lam * T
    if is_exp:
        beta = model.kernel.beta
        total += (model.lam0 - lam) / beta * (1.0 - exp(-beta * T))
    if times.size:
        total += float(np.sum(model.kernel.integral(T - times)))
    return fsum(logs), total
