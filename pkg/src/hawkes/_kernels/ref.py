"""Pure-Python reference implementations of the numerical hot loops.

These mirror ``hawkes._kernels.native`` operation for operation (same
floating-point order, same uniform-block consumption) so that the two
backends produce bit-identical results for identical seeds.
"""

from math import exp, inf, log

import numpy as np

from ..errors import BoundViolationError

# Relative slack for the thinning-bound check; the bound is exact in real
# arithmetic, so anything past rounding noise means a broken bound.
_BOUND_SLACK = 1e-9


def exp_loglik(times, T, lam0, lam, alpha, beta):
    """Log-likelihood of an exponentially decaying Hawkes model, O(n).

    Uses the Markov recursion for the left-limit intensity at each event.
    Returns ``-inf`` when some event has non-positive intensity.
    """
    comp = lam * T + (lam0 - lam) / beta * (1.0 - exp(-beta * T))
    ll = 0.0
    excess = lam0 - lam
    tprev = 0.0
    for ti in times.tolist():
        excess *= exp(-beta * (ti - tprev))
        lstar = lam + excess
        if not lstar > 0.0:
            return -inf
        ll += log(lstar)
        comp += alpha / beta * (1.0 - exp(-beta * (T - ti)))
        excess += alpha
        tprev = ti
    return ll - comp


def exp_excitations(times, beta):
    """R_i = sum_{j<i} exp(-beta (t_i - t_j)) for each event, O(n)."""
    n = times.shape[0]
    out = np.empty(n)
    r = 0.0
    tprev = 0.0
    for i, ti in enumerate(times.tolist()):
        if i > 0:
            r = exp(-beta * (ti - tprev)) * (r + 1.0)
        out[i] = r
        tprev = ti
    return out


def exp_compensators(times, lam0, lam, alpha, beta):
    """Integrated intensity evaluated at each event time, O(n)."""
    n = times.shape[0]
    out = np.empty(n)
    comp = 0.0
    excess = lam0 - lam
    tprev = 0.0
    for i, ti in enumerate(times.tolist()):
        dt = ti - tprev
        dec = exp(-beta * dt)
        comp += lam * dt + excess / beta * (1.0 - dec)
        out[i] = comp
        excess = excess * dec + alpha
        tprev = ti
    return out


def sim_thinning_exp(lam0, lam, alpha, beta, T, stream):
    """Ogata thinning for the linear exponential model on (0, T].

    The bound is the right-limit intensity after each candidate; when
    ``lam0 < lam`` the (negative, increasing) initial-decay term is clamped
    at zero inside the bound so it stays an upper bound.

    Returns ``(times, n_candidates)``.
    """
    d0 = lam0 - lam
    se = 0.0
    t = 0.0
    out = []
    candidates = 0
    blk = stream.next_block().tolist()
    blen = len(blk)
    idx = 0
    while True:
        m = lam + se + (d0 if d0 > 0.0 else 0.0)
        if not m > 0.0:
            break
        if idx == blen:
            blk = stream.next_block().tolist()
            idx = 0
        e = -log(blk[idx]) / m
        idx += 1
        t += e
        if t > T:
            break
        candidates += 1
        dec = exp(-beta * e)
        d0 *= dec
        se *= dec
        rate = lam + d0 + se
        if rate > m * (1.0 + _BOUND_SLACK):
            raise BoundViolationError(
                f"intensity {rate} exceeds thinning bound {m} at t={t}"
            )
        if idx == blen:
            blk = stream.next_block().tolist()
            idx = 0
        u = blk[idx] * m
        idx += 1
        if u <= rate:
            out.append(t)
            se += alpha
    return np.asarray(out, dtype=np.float64), candidates


def sim_exact_exp(lam0, lam, alpha, beta, T, stream):
    """Exact (composition) simulation of the exponential model on (0, T].

    Each interarrival is the minimum of a baseline Exponential(lam) draw and
    an excitation-driven draw from the decaying excess; a non-positive
    logarithm argument means no excitation-driven arrival ever occurs.
    Requires ``lam0 >= lam`` (enforced by the caller).
    """
    g = lam0 - lam
    t = 0.0
    out = []
    blk = stream.next_block().tolist()
    blen = len(blk)
    idx = 0
    while True:
        if idx == blen:
            blk = stream.next_block().tolist()
            idx = 0
        u1 = blk[idx]
        idx += 1
        if idx == blen:
            blk = stream.next_block().tolist()
            idx = 0
        u2 = blk[idx]
        idx += 1
        e1 = inf if lam <= 0.0 else -log(u1) / lam
        if g > 0.0:
            d = 1.0 + beta * log(u2) / g
            e2 = inf if d <= 0.0 else -log(d) / beta
        else:
            e2 = inf
        w = e1 if e1 < e2 else e2
        if w == inf:
            break
        t += w
        if t > T:
            break
        g = g * exp(-beta * w) + alpha
        out.append(t)
    return np.asarray(out, dtype=np.float64)
