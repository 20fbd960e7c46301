"""Derivative-free simplex (Nelder-Mead) minimizer shared by the fitters.

Standard coefficients: reflection 1, expansion 2, contraction 0.5,
shrink 0.5. Convergence requires the spread of simplex function values to
drop below ``f_tol`` and the simplex diameter below ``x_tol``; likelihood
surfaces here can be very flat near the maximum, hence the tight default
function tolerance and the multi-start wrappers in the fitting code.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["SimplexResult", "nelder_mead"]


@dataclass
class SimplexResult:
    x: np.ndarray
    fx: float
    iterations: int
    converged: bool
    n_eval: int


def nelder_mead(f, x0, step=0.25, f_tol=1e-8, x_tol=1e-4, max_iter=2000):
    """Minimize ``f`` from ``x0``; ``step`` sizes the initial simplex."""
    x0 = np.asarray(x0, dtype=np.float64)
    n = x0.size
    steps = np.broadcast_to(np.asarray(step, dtype=np.float64), (n,))
    sim = np.empty((n + 1, n))
    sim[0] = x0
    for i in range(n):
        sim[i + 1] = x0
        sim[i + 1, i] += steps[i]
    fvals = np.array([f(v) for v in sim])
    n_eval = n + 1

    iterations = 0
    converged = False
    while iterations < max_iter:
        order = np.argsort(fvals, kind="stable")
        sim = sim[order]
        fvals = fvals[order]
        spread = fvals[-1] - fvals[0]
        diam = float(np.max(np.linalg.norm(sim[1:] - sim[0], axis=1)))
        if spread < f_tol and diam < x_tol:
            converged = True
            break
        iterations += 1

        centroid = sim[:-1].mean(axis=0)
        xr = centroid + (centroid - sim[-1])
        fr = f(xr)
        n_eval += 1
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - sim[-1])
            fe = f(xe)
            n_eval += 1
            if fe < fr:
                sim[-1], fvals[-1] = xe, fe
            else:
                sim[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            sim[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (sim[-1] - centroid)
            fc = f(xc)
            n_eval += 1
            if fc < min(fr, fvals[-1]):
                sim[-1], fvals[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
                    fvals[i] = f(sim[i])
                n_eval += n

    best = int(np.argmin(fvals))
    return SimplexResult(
        x=sim[best].copy(),
        fx=float(fvals[best]),
        iterations=iterations,
        converged=converged,
        n_eval=n_eval,
    )
