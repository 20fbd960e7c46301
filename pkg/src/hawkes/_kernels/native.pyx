# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot loops in ``hawkes._kernels.ref``.

Floating-point operation order and uniform-block consumption match the
reference implementation exactly; see ref.py for the algorithm notes.
"""

from libc.math cimport exp, log, INFINITY

import numpy as np

from ..errors import BoundViolationError

cdef double _BOUND_SLACK = 1e-9


def exp_loglik(const double[::1] times, double T, double lam0, double lam,
               double alpha, double beta):
    cdef Py_ssize_t i, n = times.shape[0]
    cdef double comp, ll, excess, tprev, ti, lstar
    comp = lam * T + (lam0 - lam) / beta * (1.0 - exp(-beta * T))
    ll = 0.0
    excess = lam0 - lam
    tprev = 0.0
    for i in range(n):
        ti = times[i]
        excess *= exp(-beta * (ti - tprev))
        lstar = lam + excess
        if not lstar > 0.0:
            return -INFINITY
        ll += log(lstar)
        comp += alpha / beta * (1.0 - exp(-beta * (T - ti)))
        excess += alpha
        tprev = ti
    return ll - comp


def exp_excitations(const double[::1] times, double beta):
    cdef Py_ssize_t i, n = times.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double r = 0.0, tprev = 0.0, ti
    for i in range(n):
        ti = times[i]
        if i > 0:
            r = exp(-beta * (ti - tprev)) * (r + 1.0)
        o[i] = r
        tprev = ti
    return out


def exp_compensators(const double[::1] times, double lam0, double lam,
                     double alpha, double beta):
    cdef Py_ssize_t i, n = times.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double comp = 0.0, excess = lam0 - lam, tprev = 0.0, ti, dt, dec
    for i in range(n):
        ti = times[i]
        dt = ti - tprev
        dec = exp(-beta * dt)
        comp += lam * dt + excess / beta * (1.0 - dec)
        o[i] = comp
        excess = excess * dec + alpha
        tprev = ti
    return out


def sim_thinning_exp(double lam0, double lam, double alpha, double beta,
                     double T, stream):
    cdef double d0 = lam0 - lam, se = 0.0, t = 0.0
    cdef double m, e, dec, rate, u
    cdef Py_ssize_t idx = 0, blen, candidates = 0
    cdef double[::1] blk
    out = []
    _blk = stream.next_block()
    blk = _blk
    blen = blk.shape[0]
    while True:
        m = lam + se + (d0 if d0 > 0.0 else 0.0)
        if not m > 0.0:
            break
        if idx == blen:
            _blk = stream.next_block()
            blk = _blk
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
            _blk = stream.next_block()
            blk = _blk
            idx = 0
        u = blk[idx] * m
        idx += 1
        if u <= rate:
            out.append(t)
            se += alpha
    return np.asarray(out, dtype=np.float64), candidates


def sim_exact_exp(double lam0, double lam, double alpha, double beta,
                  double T, stream):
    cdef double g = lam0 - lam, t = 0.0
    cdef double u1, u2, e1, e2, d, w
    cdef Py_ssize_t idx = 0, blen
    cdef double[::1] blk
    out = []
    _blk = stream.next_block()
    blk = _blk
    blen = blk.shape[0]
    while True:
        if idx == blen:
            _blk = stream.next_block()
            blk = _blk
            idx = 0
        u1 = blk[idx]
        idx += 1
        if idx == blen:
            _blk = stream.next_block()
            blk = _blk
            idx = 0
        u2 = blk[idx]
        idx += 1
        e1 = INFINITY if lam <= 0.0 else -log(u1) / lam
        if g > 0.0:
            d = 1.0 + beta * log(u2) / g
            e2 = INFINITY if d <= 0.0 else -log(d) / beta
        else:
            e2 = INFINITY
        w = e1 if e1 < e2 else e2
        if w == INFINITY:
            break
        t += w
        if t > T:
            break
        g = g * exp(-beta * w) + alpha
        out.append(t)
    return np.asarray(out, dtype=np.float64)
