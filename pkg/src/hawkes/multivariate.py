"""Mutually exciting Hawkes processes: per-dimension intensity, the matrix
of pairwise branching ratios, and the spectral-radius stationarity check."""

import math
from dataclasses import dataclass

import numpy as np

from .core import ExpKernel, Kernel

__all__ = [
    "MultivariateHawkesModel",
    "BranchingMatrix",
    "intensity_k",
    "branching_matrix",
    "spectral_radius",
    "is_stationary_mv",
]


@dataclass(frozen=True)
class MultivariateHawkesModel:
    """d counting processes with baseline rates and a d x d kernel matrix.

    ``kernels[j][k]`` is the excitation of target dimension ``k+1`` by events
    in source dimension ``j+1``. A scalar baseline is shared across
    dimensions (the common convention); pass a length-d sequence to give
    each dimension its own rate.
    """

    d: int
    baselines: np.ndarray
    kernels: tuple

    def __init__(self, d, baselines, kernels):
        d = int(d)
        if d < 1:
            raise ValueError("d must be at least 1")
        lam = np.asarray(baselines, dtype=np.float64)
        if lam.ndim == 0:
            lam = np.full(d, float(lam))
        if lam.shape != (d,):
            raise ValueError("baselines must be scalar or length d")
        if np.any(lam <= 0):
            raise ValueError("baseline rates must be positive")
        lam.flags.writeable = False
        rows = tuple(tuple(row) for row in kernels)
        if len(rows) != d or any(len(r) != d for r in rows):
            raise ValueError("kernels must form a d x d matrix")
        for row in rows:
            for ker in row:
                if not isinstance(ker, Kernel):
                    raise TypeError("kernel matrix entries must be Kernel instances")
                if np.asarray(ker.evaluate(0.0)) < 0:
                    raise ValueError("mutually exciting kernels must be non-negative")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "baselines", lam)
        object.__setattr__(self, "kernels", rows)

    def all_exponential(self):
        return all(
            isinstance(k, ExpKernel) for row in self.kernels for k in row
        )


@dataclass(frozen=True)
class BranchingMatrix:
    """Matrix of pairwise kernel integrals phi[j, k]."""

    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
            raise ValueError("phi must be square")
        if not np.all(np.isfinite(phi)) or np.any(phi < 0):
            raise ValueError("phi entries must be finite and non-negative")
        phi.flags.writeable = False
        object.__setattr__(self, "phi", phi)


def intensity_k(model, events, k, t, right_limit=False):
    """Conditional intensity of dimension k (1-based) at time t."""
    if not 1 <= k <= model.d:
        raise ValueError(f"dimension index k={k} outside 1..{model.d}")
    if events.dims is None and model.d > 1:
        raise ValueError("events must carry dims for a multivariate model")
    t = float(t)
    total = float(model.baselines[k - 1])
    times = events.times
    dims = events.dims if events.dims is not None else np.ones(len(events), int)
    keep = times <= t if right_limit else times < t
    for j in range(model.d):
        src = times[keep & (dims == j + 1)]
        if src.size:
            total += float(np.sum(model.kernels[j][k - 1].evaluate(t - src)))
    return total


def branching_matrix(model):
    """Entrywise branching ratios of the kernel matrix."""
    phi = np.empty((model.d, model.d))
    for j in range(model.d):
        for k in range(model.d):
            phi[j, k] = model.kernels[j][k].branching_ratio()
    return BranchingMatrix(phi)


def _gelfand_radius(mat, squarings=60):
    """Spectral radius by Gelfand's formula with repeated squaring.

    rho = lim ||A^n||^(1/n); doubling n by squaring makes the defective-case
    correction (a power of log n over n) vanish within ~50 squarings. Each
    step renormalizes and accumulates the scale in log space.
    """
    b = np.array(mat, dtype=np.float64)
    log_rho = 0.0
    for k in range(squarings):
        r = float(np.max(np.abs(b)))
        if r == 0.0:
            return 0.0  # nilpotent: some power vanished exactly
        log_rho += math.log(r) / 2.0**k
        b = (b / r) @ (b / r)
    r = float(np.max(np.abs(b)))
    if r > 0.0:
        log_rho += math.log(r) / 2.0**squarings
    return math.exp(log_rho)


def spectral_radius(phi, tol=1e-10, max_iter=10_000):
    """Largest absolute eigenvalue of a non-negative matrix.

    Power iteration with Rayleigh-quotient convergence; when the plain
    iteration stalls it retries on the shifted matrix ``phi + I`` (curing
    rotational ambiguity from periodic structure), and as a last resort
    falls back to Gelfand's formula via repeated squaring, which also
    covers defective (Jordan-block) matrices where vector iteration only
    converges at rate 1/n.
    """
    mat = phi.phi if isinstance(phi, BranchingMatrix) else np.asarray(phi, float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("matrix must be square")
    if mat.size == 0:
        raise ValueError("matrix must be non-empty")

    def power_iter(a):
        v = np.full(a.shape[0], 1.0 / np.sqrt(a.shape[0]))
        rho_prev = np.inf
        for _ in range(max_iter):
            w = a @ v
            norm = np.linalg.norm(w)
            if norm == 0.0:
                return 0.0  # iterate annihilated: nilpotent direction
            if not np.isfinite(norm):
                return None
            v = w / norm
            rho = float(v @ (a @ v))
            if abs(rho - rho_prev) <= tol * max(1.0, abs(rho)):
                return abs(rho)
            rho_prev = rho
        return None

    rho = power_iter(mat)
    if rho is None:
        shifted = power_iter(mat + np.eye(mat.shape[0]))
        if shifted is not None:
            rho = shifted - 1.0
    if rho is None:
        rho = _gelfand_radius(mat)
    return max(rho, 0.0)


def is_stationary_mv(model):
    """(spectral radius < 1, spectral radius) for the branching matrix."""
    rho = spectral_radius(branching_matrix(model))
    return bool(rho < 1), float(rho)
