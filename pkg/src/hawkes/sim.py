"""Simulators for the whole model family.

Every simulator takes an integer seed and is deterministic given
``(model, T, seed)``; see :mod:`hawkes.rng` for the generator family and
splitting rule. Thinning-style simulators consume uniforms in a fixed
per-candidate order (interarrival draw, acceptance draw, then any mark
draw) and log their acceptance ratio at DEBUG level.
"""

import logging
import warnings
from dataclasses import dataclass
from math import exp, inf, log

import numpy as np

from . import _kernels
from .core import EventSequence, ExpKernel, NonlinearSpec, PowerLawKernel
from .errors import BoundViolationError, SimulationError
from .multivariate import is_stationary_mv
from .renewal import RenewalHawkesModel
from .rng import UniformBlockStream, child_rng, make_rng, philox_key

logger = logging.getLogger(__name__)

__all__ = [
    "DiscreteModel",
    "DynamicContagionModel",
    "EtasModel",
    "ConstantJump",
    "ExponentialJump",
    "simulate_thinning",
    "simulate_exact_exp",
    "simulate_cluster",
    "simulate_nonlinear",
    "simulate_multivariate",
    "simulate_discrete",
    "simulate_dynamic_contagion",
    "simulate_etas",
    "simulate_renewal_hawkes",
]

# Hard cap on processed nodes in the immigrant-birth recursion.
CLUSTER_NODE_CAP = 1_000_000


# ---------------------------------------------------------------------------
# Model variants owned by this module


@dataclass(frozen=True)
class DiscreteModel:
    """Discrete-time Hawkes model.

    ``g`` is a probability mass function over lags 1..len(g); the excitation
    is eta * g(s). The per-step emission given the conditional mean is
    Poisson or negative binomial with dispersion ``psi`` (variance
    m + m^2/psi).
    """

    lam: float
    eta: float
    g: np.ndarray
    emission: str = "poisson"
    psi: float | None = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.eta >= 0:
            raise ValueError("eta must be non-negative")
        g = np.asarray(self.g, dtype=np.float64)
        if g.ndim != 1 or g.size == 0 or np.any(g < 0):
            raise ValueError("g must be a non-negative pmf over lags 1..L")
        if abs(g.sum() - 1.0) > 1e-9:
            raise ValueError("g must sum to one")
        g.flags.writeable = False
        object.__setattr__(self, "g", g)
        if self.emission not in ("poisson", "negbin"):
            raise ValueError("emission must be 'poisson' or 'negbin'")
        if self.emission == "negbin" and not (self.psi and self.psi > 0):
            raise ValueError("negbin emission needs dispersion psi > 0")


@dataclass(frozen=True)
class ConstantJump:
    """Degenerate jump-size distribution (consumes no randomness)."""

    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("jump sizes must be non-negative")

    def sample(self, rng):
        return self.value

    def mean(self):
        return self.value


@dataclass(frozen=True)
class ExponentialJump:
    """Exponential jump sizes with the given mean."""

    mean_value: float

    def __post_init__(self):
        if not self.mean_value > 0:
            raise ValueError("mean jump size must be positive")

    def sample(self, rng):
        return -self.mean_value * log(rng.random())

    def mean(self):
        return self.mean_value


@dataclass(frozen=True)
class DynamicContagionModel:
    """Hawkes self-excitation plus externally excited shot noise.

    Between jumps the intensity decays at rate ``delta`` toward the
    mean-reverting level ``a``; self events add Y ~ ``self_jumps`` and
    external shocks (Poisson rate ``rho``) add X ~ ``ext_jumps``.
    """

    a: float
    lam0: float
    delta: float
    rho: float
    self_jumps: object
    ext_jumps: object

    def __post_init__(self):
        if not self.a >= 0:
            raise ValueError("a must be non-negative")
        if not self.lam0 >= self.a:
            raise ValueError("lam0 must be at least the mean-reverting level a")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.rho > 0:
            raise ValueError("rho must be positive")


@dataclass(frozen=True)
class EtasModel:
    """Temporal ETAS: marked Hawkes with the three seismological laws.

    Magnitudes are Gutenberg-Richter (shifted exponential, rate ``beta``
    above threshold ``m0``), each event of magnitude m spawns
    A exp(alpha (m - m0)) expected aftershocks, and aftershocks decay in
    time by the Omori-Utsu law with parameters ``c`` and ``p``.
    """

    lam: float
    A: float
    alpha: float
    beta: float
    m0: float
    c: float
    p: float

    def __post_init__(self):
        for name in ("lam", "A", "alpha", "beta", "m0", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if self.beta <= self.alpha:
            warnings.warn(
                "beta <= alpha: the mean aftershock productivity diverges",
                stacklevel=2,
            )
        elif self.A * self.beta / (self.beta - self.alpha) >= 1:
            warnings.warn(
                "effective branching ratio A*beta/(beta-alpha) >= 1: "
                "the ETAS process is supercritical",
                stacklevel=2,
            )

    def productivity(self, m):
        """Expected direct aftershocks of an event with magnitude m."""
        return self.A * np.exp(self.alpha * (np.asarray(m) - self.m0))

    def decay(self):
        """Normalized Omori-Utsu density as a unit-mass power-law kernel."""
        return PowerLawKernel(
            k=(self.p - 1.0) * self.c ** (self.p - 1.0), c=self.c, p=self.p
        )

    def mean_productivity(self):
        """E[productivity(M)] under Gutenberg-Richter magnitudes."""
        if self.beta <= self.alpha:
            return inf
        return self.A * self.beta / (self.beta - self.alpha)


# ---------------------------------------------------------------------------
# Shared helpers


def _require_horizon(T):
    T = float(T)
    if not T > 0:
        raise ValueError("simulation horizon T must be positive")
    return T


def _uniform_scalar_stream(rng):
    """Scalar uniforms drawn through the block protocol."""
    stream = UniformBlockStream(rng)
    blk = stream.next_block().tolist()
    blen = len(blk)
    idx = 0

    def u():
        nonlocal blk, idx
        if idx == blen:
            blk = stream.next_block().tolist()
            idx = 0
        v = blk[idx]
        idx += 1
        return v

    return u


def _check_nonincreasing(kernel):
    lags = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 31)])
    vals = np.asarray(kernel.evaluate(lags), dtype=np.float64)
    if np.any(np.diff(vals) > 1e-12 * np.maximum(1.0, np.abs(vals[:-1]))):
        raise ValueError(
            "thinning requires a non-increasing excitation function; "
            "this kernel increases between events"
        )


def _log_acceptance(name, accepted, candidates):
    ratio = accepted / candidates if candidates else float("nan")
    logger.debug(
        "%s: accepted %d of %d candidates (ratio %.4f)",
        name,
        accepted,
        candidates,
        ratio,
    )


def _warn_if_supercritical(eta):
    if eta >= 1:
        warnings.warn(
            f"branching ratio {eta:.3g} >= 1: non-stationary regime (the "
            "finite-horizon simulation still terminates)",
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# Linear Hawkes simulators


def simulate_thinning(model, T, seed):
    """Ogata's modified thinning on (0, T].

    The bound is the right-limit intensity after every candidate, valid
    because the in-scope kernels are non-increasing; a negative initial
    excess (lam0 < lam, exponential kernel) is clamped at zero inside the
    bound. A detected bound violation aborts the run.
    """
    if isinstance(model, NonlinearSpec):
        return simulate_nonlinear(model, T, seed)
    T = _require_horizon(T)
    if isinstance(model.kernel, ExpKernel):
        stream = UniformBlockStream(make_rng(seed))
        times, candidates = _kernels.sim_thinning_exp(
            model.lam0, model.lam, model.kernel.alpha, model.kernel.beta, T, stream
        )
        _log_acceptance("thinning-exp", times.size, candidates)
        return EventSequence(times, T)
    _check_nonincreasing(model.kernel)
    u = _uniform_scalar_stream(make_rng(seed))
    kernel = model.kernel
    lam = model.lam
    out = []
    past = np.empty(0)
    t = 0.0
    candidates = 0
    while True:
        m = lam + (float(np.sum(kernel.evaluate(t - past))) if past.size else 0.0)
        if not m > 0.0:
            break
        t += -log(u()) / m
        if t > T:
            break
        candidates += 1
        rate = lam + (float(np.sum(kernel.evaluate(t - past))) if past.size else 0.0)
        if rate > m * (1.0 + 1e-9):
            raise BoundViolationError(
                f"intensity {rate} exceeds thinning bound {m} at t={t}"
            )
        if u() * m <= rate:
            out.append(t)
            past = np.asarray(out)
    _log_acceptance("thinning-general", len(out), candidates)
    return EventSequence(np.asarray(out), T)


def simulate_exact_exp(model, T, seed):
    """Exact composition sampler for the exponential model on (0, T].

    Interarrivals are the minimum of a baseline exponential and an
    excitation-driven component from the decaying excess above the
    background; requires lam0 >= lam so the excess is non-negative.
    """
    T = _require_horizon(T)
    if not isinstance(model.kernel, ExpKernel):
        raise ValueError("exact composition simulation requires ExpKernel")
    if model.lam0 < model.lam:
        raise ValueError(
            "exact composition simulation requires lam0 >= lam "
            "(non-negative initial excess)"
        )
    stream = UniformBlockStream(make_rng(seed))
    times = _kernels.sim_exact_exp(
        model.lam0, model.lam, model.kernel.alpha, model.kernel.beta, T, stream
    )
    return EventSequence(times, T)


def _poisson_times(rng, rate, T):
    """Homogeneous Poisson arrival times on (0, T] via exponential gaps."""
    if rate <= 0:
        return np.empty(0)
    out = []
    t = 0.0
    while True:
        gaps = rng.exponential(1.0 / rate, size=256)
        for g in gaps.tolist():
            t += g
            if t > T:
                return np.asarray(out)
            out.append(t)


class _NodeBudget:
    __slots__ = ("used",)

    def __init__(self):
        self.used = 0

    def spend(self):
        self.used += 1
        if self.used > CLUSTER_NODE_CAP:
            raise SimulationError(
                f"immigrant-birth work queue exceeded the {CLUSTER_NODE_CAP}-node cap"
            )


def _grow_cluster(rng, kernel, root_time, T, max_generations, budget):
    """All descendants of one immigrant, via an explicit work queue.

    Every offspring spawns its own offspring (full recursion); the queue
    holds (time, generation) pairs and generations past ``max_generations``
    are not expanded.
    """
    out = []
    queue = [(root_time, 0)]
    while queue:
        t0, gen = queue.pop()
        budget.spend()
        if max_generations is not None and gen >= max_generations:
            continue
        mass = float(kernel.integral(T - t0))
        count = int(rng.poisson(mass)) if mass > 0 else 0
        if count:
            offsets = kernel.integral_inv(rng.random(count) * mass)
            for tc in (t0 + offsets).tolist():
                out.append(tc)
                queue.append((tc, gen + 1))
    return out


def simulate_cluster(lam, kernel, T, seed, max_generations=None):
    """Immigrant-birth simulation: Poisson immigrants, recursive offspring.

    Immigrant i grows its cluster from the child stream (seed, i), so the
    per-cluster recursions are reproducible independently of evaluation
    order. ``max_generations`` truncates the recursion (0 = immigrants
    only); the default grows every generation.
    """
    T = _require_horizon(T)
    if lam < 0:
        raise ValueError("immigration rate must be non-negative")
    _warn_if_supercritical(kernel.branching_ratio())
    if not hasattr(kernel, "integral_inv"):
        raise ValueError(
            "cluster simulation needs a kernel with an invertible integral"
        )
    key = philox_key(seed)
    immigrants = _poisson_times(make_rng(seed), lam, T)
    budget = _NodeBudget()
    times = [immigrants]
    for i, ti in enumerate(immigrants.tolist()):
        rng = child_rng(key, i)
        times.append(
            np.asarray(_grow_cluster(rng, kernel, ti, T, max_generations, budget))
        )
    merged = np.sort(np.concatenate(times)) if times else np.empty(0)
    return EventSequence(merged[merged <= T], T)


# ---------------------------------------------------------------------------
# Nonlinear and multivariate thinning


def _probe_phi(phi, scale):
    xs = np.linspace(-5.0 * scale, 5.0 * scale, 41)
    ys = np.asarray([float(phi(x)) for x in xs])
    if np.any(ys < 0):
        raise ValueError("phi must map into the non-negative reals")
    if np.any(np.diff(ys) < -1e-12 * np.maximum(1.0, np.abs(ys[:-1]))):
        raise ValueError(
            "phi must be monotone non-decreasing (the thinning bound "
            "phi(max(excitation, 0)) relies on it)"
        )


def simulate_nonlinear(spec, T, seed):
    """Thinning for a nonlinear (possibly self-inhibitory) model.

    The excitation sum S(t) from a single-signed non-increasing kernel
    moves monotonically toward zero between events, so
    ``phi(max(S(t+), 0))`` bounds the intensity until the next event.
    """
    T = _require_horizon(T)
    kernel = spec.kernel
    phi = spec.phi
    exp_kernel = isinstance(kernel, ExpKernel)
    if not exp_kernel:
        _check_nonincreasing(kernel)
    _probe_phi(phi, max(1.0, abs(float(kernel.evaluate(0.0)))) * 10.0)
    u = _uniform_scalar_stream(make_rng(seed))
    out = []
    past = np.empty(0)
    s = 0.0  # running excitation sum (exp kernel only)
    t = 0.0
    candidates = 0
    accepted = 0
    while True:
        if exp_kernel:
            s_bound = s
        else:
            s_bound = float(np.sum(kernel.evaluate(t - past))) if past.size else 0.0
        m = float(phi(s_bound if s_bound > 0.0 else 0.0))
        if not m > 0.0:
            break
        e = -log(u()) / m
        t += e
        if t > T:
            break
        candidates += 1
        if exp_kernel:
            s *= exp(-kernel.beta * e)
            s_now = s
        else:
            s_now = float(np.sum(kernel.evaluate(t - past))) if past.size else 0.0
        rate = float(phi(s_now))
        if rate > m * (1.0 + 1e-9):
            raise BoundViolationError(
                f"intensity {rate} exceeds thinning bound {m} at t={t}"
            )
        if u() * m <= rate:
            accepted += 1
            out.append(t)
            if exp_kernel:
                s += kernel.alpha
            else:
                past = np.asarray(out)
    _log_acceptance("thinning-nonlinear", accepted, candidates)
    return EventSequence(np.asarray(out), T)


def simulate_multivariate(model, T, seed):
    """Superposed thinning for mutually exciting processes.

    One uniform drives both acceptance and dimension assignment: the
    candidate is accepted when u*M falls below the total intensity and the
    dimension is read off the cumulative per-dimension rates, so the d=1
    case consumes the stream exactly like univariate thinning.
    """
    T = _require_horizon(T)
    stationary, rho = is_stationary_mv(model)
    if not stationary:
        warnings.warn(
            f"spectral radius {rho:.3g} >= 1: non-stationary regime",
            stacklevel=2,
        )
    if model.all_exponential():
        return _simulate_mv_exp(model, T, seed)
    return _simulate_mv_general(model, T, seed)


def _simulate_mv_exp(model, T, seed):
    d = model.d
    lam = model.baselines.tolist()
    alpha = [[model.kernels[j][k].alpha for k in range(d)] for j in range(d)]
    beta = [[model.kernels[j][k].beta for k in range(d)] for j in range(d)]
    exc = [[0.0] * d for _ in range(d)]  # exc[j][k]: source j -> target k
    u = _uniform_scalar_stream(make_rng(seed))
    times = []
    dims = []
    t = 0.0
    candidates = 0
    while True:
        m = 0.0
        for k in range(d):
            m += lam[k]
        for j in range(d):
            for k in range(d):
                m += exc[j][k]
        if not m > 0.0:
            break
        e = -log(u()) / m
        t += e
        if t > T:
            break
        candidates += 1
        for j in range(d):
            for k in range(d):
                exc[j][k] *= exp(-beta[j][k] * e)
        rates = []
        total = 0.0
        for k in range(d):
            rk = lam[k]
            for j in range(d):
                rk += exc[j][k]
            rates.append(rk)
            total += rk
        if total > m * (1.0 + 1e-9):
            raise BoundViolationError(
                f"total intensity {total} exceeds thinning bound {m} at t={t}"
            )
        uu = u() * m
        if uu <= total:
            cum = 0.0
            for k in range(d):
                cum += rates[k]
                if uu <= cum:
                    times.append(t)
                    dims.append(k + 1)
                    for kk in range(d):
                        exc[k][kk] += alpha[k][kk]
                    break
    _log_acceptance("thinning-multivariate", len(times), candidates)
    return EventSequence(np.asarray(times), T, dims=np.asarray(dims, dtype=np.int64))


def _simulate_mv_general(model, T, seed):
    d = model.d
    for row in model.kernels:
        for ker in row:
            _check_nonincreasing(ker)
    u = _uniform_scalar_stream(make_rng(seed))
    times = []
    dims = []
    by_dim = [[] for _ in range(d)]
    t = 0.0
    candidates = 0

    def rate_vector(at):
        rates = []
        for k in range(d):
            rk = float(model.baselines[k])
            for j in range(d):
                src = by_dim[j]
                if src:
                    rk += float(
                        np.sum(model.kernels[j][k].evaluate(at - np.asarray(src)))
                    )
            rates.append(rk)
        return rates

    while True:
        m = sum(rate_vector(t))
        if not m > 0.0:
            break
        t += -log(u()) / m
        if t > T:
            break
        candidates += 1
        rates = rate_vector(t)
        total = sum(rates)
        if total > m * (1.0 + 1e-9):
            raise BoundViolationError(
                f"total intensity {total} exceeds thinning bound {m} at t={t}"
            )
        uu = u() * m
        if uu <= total:
            cum = 0.0
            for k in range(d):
                cum += rates[k]
                if uu <= cum:
                    times.append(t)
                    dims.append(k + 1)
                    by_dim[k].append(t)
                    break
    _log_acceptance("thinning-multivariate", len(times), candidates)
    return EventSequence(np.asarray(times), T, dims=np.asarray(dims, dtype=np.int64))


# ---------------------------------------------------------------------------
# Discrete-time, dynamic contagion, ETAS, renewal


def simulate_discrete(model, T, seed):
    """Counts Y_1..Y_T of the discrete-time Hawkes process."""
    T = int(T)
    if T < 1:
        raise ValueError("T must be a positive integer")
    rng = make_rng(seed)
    g = model.g
    L = g.size
    y = np.zeros(T, dtype=np.int64)
    for t in range(1, T + 1):
        rate = model.lam
        # sum_{s=1..L} eta g(s) Y_{t-s}, zero when t = 1
        lo = max(t - L, 1)
        for s in range(lo, t):
            rate += model.eta * g[t - s - 1] * y[s - 1]
        if model.emission == "poisson":
            y[t - 1] = rng.poisson(rate)
        else:
            p = model.psi / (model.psi + rate)
            y[t - 1] = rng.negative_binomial(model.psi, p) if rate > 0 else 0
    return y


def simulate_dynamic_contagion(model, T, seed):
    """Dynamic contagion process on (0, T].

    External shocks are pre-generated as a Poisson(rho) stream; between
    jumps the intensity decays toward ``a``, so the current right-limit
    intensity bounds it until the next self or external jump and the bound
    is refreshed at every external shock. Returns ``(events, shocks)``
    where ``shocks`` is an (n, 2) array of (time, jump size).
    """
    T = _require_horizon(T)
    rng = make_rng(seed)
    n_shocks = int(rng.poisson(model.rho * T))
    shock_times = np.sort(rng.random(n_shocks)) * T
    shock_sizes = np.asarray([model.ext_jumps.sample(rng) for _ in range(n_shocks)])
    out = []
    d = model.lam0 - model.a  # decaying excess above the mean-reverting level
    t = 0.0
    i_shock = 0
    candidates = 0
    accepted = 0
    while True:
        next_shock = shock_times[i_shock] if i_shock < n_shocks else inf
        m = model.a + d
        if not m > 0.0:
            if next_shock == inf:
                break
            d = d * exp(-model.delta * (next_shock - t)) + shock_sizes[i_shock]
            t = next_shock
            i_shock += 1
            continue
        tc = t + rng.exponential(1.0 / m)
        if tc > next_shock:
            d = d * exp(-model.delta * (next_shock - t)) + shock_sizes[i_shock]
            t = next_shock
            i_shock += 1
            continue
        if tc > T:
            break
        candidates += 1
        d *= exp(-model.delta * (tc - t))
        t = tc
        rate = model.a + d
        if rng.random() * m <= rate:
            accepted += 1
            out.append(t)
            d += model.self_jumps.sample(rng)
    _log_acceptance("dynamic-contagion", accepted, candidates)
    events = EventSequence(np.asarray(out), T)
    return events, np.column_stack([shock_times, shock_sizes])


def simulate_etas(model, T, seed):
    """Temporal ETAS simulation: thinned ground process plus i.i.d. marks.

    The ground intensity is lam + sum of productivity-weighted Omori-Utsu
    decays, which is non-increasing between events, so the right-limit
    bound applies; each accepted event receives an independent
    Gutenberg-Richter magnitude (drawn by inversion from the same stream).
    """
    T = _require_horizon(T)
    nu = model.decay()
    u = _uniform_scalar_stream(make_rng(seed))
    cap = 256
    times = np.empty(cap)
    marks = np.empty(cap)
    weights = np.empty(cap)
    n = 0
    t = 0.0
    candidates = 0

    def ground_rate(at):
        if n == 0:
            return model.lam
        return model.lam + float(
            np.sum(weights[:n] * nu.evaluate(at - times[:n]))
        )

    while True:
        m = ground_rate(t)
        e = -log(u()) / m
        t += e
        if t > T:
            break
        candidates += 1
        rate = ground_rate(t)
        if rate > m * (1.0 + 1e-9):
            raise BoundViolationError(
                f"ground intensity {rate} exceeds thinning bound {m} at t={t}"
            )
        if u() * m <= rate:
            mark = model.m0 - log(u()) / model.beta
            if n == cap:
                cap *= 2
                times = np.resize(times, cap)
                marks = np.resize(marks, cap)
                weights = np.resize(weights, cap)
            times[n] = t
            marks[n] = mark
            weights[n] = float(model.productivity(mark))
            n += 1
    _log_acceptance("thinning-etas", n, candidates)
    return EventSequence(times[:n].copy(), T, marks=marks[:n].copy())


def simulate_renewal_hawkes(model, T, seed):
    """Cluster-representation simulation of the renewal Hawkes process.

    Immigrants arrive by i.i.d. waiting times from the renewal density
    (drawn by inversion); each immigrant then grows an offspring cluster
    exactly as in :func:`simulate_cluster`, using the per-immigrant child
    streams.
    """
    T = _require_horizon(T)
    if not isinstance(model, RenewalHawkesModel):
        raise TypeError("expected a RenewalHawkesModel")
    key = philox_key(seed)
    root = make_rng(seed)
    immigrants = []
    t = 0.0
    while True:
        t += float(model.g.ppf(root.random()))
        if t > T:
            break
        immigrants.append(t)
    budget = _NodeBudget()
    times = [np.asarray(immigrants)]
    for i, ti in enumerate(immigrants):
        rng = child_rng(key, i)
        times.append(
            np.asarray(_grow_cluster(rng, model.kernel, ti, T, None, budget))
        )
    merged = np.sort(np.concatenate(times))
    return EventSequence(merged[merged <= T], T)
