"""File formats: event/count CSV files and JSON model specifications.

Event CSV: header ``time[,mark][,dim]``, UTF-8, ``.`` decimal separator,
strictly ascending times. Pre-binned CSV: header ``count``. Model specs are
JSON objects with an optional ``"schema": 1`` version tag and a ``family``
discriminator (default ``hawkes``).
"""

import csv
import json

import numpy as np

from .core import EventSequence, ExpKernel, HawkesModel, NonlinearSpec, PowerLawKernel
from .errors import DataValidationError
from .multivariate import MultivariateHawkesModel
from .renewal import RenewalDensity, RenewalHawkesModel
from .sim import (
    ConstantJump,
    DiscreteModel,
    DynamicContagionModel,
    EtasModel,
    ExponentialJump,
)

__all__ = [
    "read_events_csv",
    "write_events_csv",
    "read_counts_csv",
    "write_counts_csv",
    "model_from_spec",
    "load_model",
    "fit_result_to_dict",
]

_EVENT_HEADERS = (["time"], ["time", "mark"], ["time", "dim"],
                  ["time", "mark", "dim"])


def read_events_csv(path, horizon=None):
    """Load an event sequence; the horizon defaults to the last event time."""
    times, marks, dims = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataValidationError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if header not in _EVENT_HEADERS:
            raise DataValidationError(
                f"{path}: header must be one of "
                + ", ".join("/".join(h) for h in _EVENT_HEADERS)
            )
        has_mark = "mark" in header
        has_dim = "dim" in header
        prev = 0.0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataValidationError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                t = float(row[0])
            except ValueError:
                raise DataValidationError(
                    f"{path}:{lineno}: time {row[0]!r} is not a number"
                ) from None
            if t <= prev:
                kind = "duplicate" if t == prev else "out-of-order"
                raise DataValidationError(
                    f"{path}:{lineno}: {kind} timestamp {row[0]} "
                    "(times must be strictly increasing)"
                )
            prev = t
            times.append(t)
            col = 1
            if has_mark:
                try:
                    marks.append(float(row[col]))
                except ValueError:
                    raise DataValidationError(
                        f"{path}:{lineno}: mark {row[col]!r} is not a number"
                    ) from None
                col += 1
            if has_dim:
                try:
                    d = int(row[col])
                except ValueError:
                    raise DataValidationError(
                        f"{path}:{lineno}: dim {row[col]!r} is not an integer"
                    ) from None
                if d < 1:
                    raise DataValidationError(
                        f"{path}:{lineno}: dim must be a 1-based index"
                    )
                dims.append(d)
    if horizon is None:
        horizon = times[-1] if times else 0.0
    return EventSequence(
        np.asarray(times),
        float(horizon),
        marks=np.asarray(marks) if marks else None,
        dims=np.asarray(dims) if dims else None,
    )


def write_events_csv(path, events):
    cols = ["time"]
    if events.marks is not None:
        cols.append("mark")
    if events.dims is not None:
        cols.append("dim")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for i, t in enumerate(events.times):
            row = [repr(float(t))]
            if events.marks is not None:
                row.append(repr(float(events.marks[i])))
            if events.dims is not None:
                row.append(str(int(events.dims[i])))
            writer.writerow(row)


def read_counts_csv(path):
    """Load a pre-binned series (header ``count``)."""
    counts = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["count"]:
            raise DataValidationError(f"{path}: header must be 'count'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                c = int(row[0])
            except ValueError:
                raise DataValidationError(
                    f"{path}:{lineno}: count {row[0]!r} is not an integer"
                ) from None
            if c < 0:
                raise DataValidationError(f"{path}:{lineno}: negative count")
            counts.append(c)
    return np.asarray(counts, dtype=np.int64)


def write_counts_csv(path, counts):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["count"])
        for c in counts:
            writer.writerow([int(c)])


def _kernel_from_spec(spec):
    kind = spec.get("type")
    if kind == "exp":
        return ExpKernel(float(spec["alpha"]), float(spec["beta"]))
    if kind == "powerlaw":
        return PowerLawKernel(float(spec["K"]), float(spec["c"]), float(spec["p"]))
    raise ValueError(f"unknown kernel type {kind!r}")


def _jump_from_spec(spec):
    kind = spec.get("type", "exponential")
    if kind == "exponential":
        return ExponentialJump(float(spec["mean"]))
    if kind == "constant":
        return ConstantJump(float(spec["value"]))
    raise ValueError(f"unknown jump distribution type {kind!r}")


def _density_from_spec(spec):
    family = spec.get("family")
    if family == "exponential":
        return RenewalDensity.exponential(float(spec["rate"]))
    if family == "gamma":
        return RenewalDensity.gamma(float(spec["shape"]), float(spec["rate"]))
    if family == "weibull":
        return RenewalDensity.weibull(float(spec["shape"]), float(spec["scale"]))
    raise ValueError(f"unknown renewal density family {family!r}")


def model_from_spec(spec):
    """Build a model object from a JSON-style dict."""
    if not isinstance(spec, dict):
        raise ValueError("model spec must be a JSON object")
    if "schema" in spec and spec["schema"] != 1:
        raise ValueError(f"unsupported schema version {spec['schema']!r}")
    family = spec.get("family", "hawkes")
    if family == "hawkes":
        return HawkesModel(
            lam=float(spec["lambda"]),
            kernel=_kernel_from_spec(spec["kernel"]),
            lam0=float(spec["lambda0"]) if "lambda0" in spec else None,
        )
    if family == "nonlinear":
        phi = spec.get("phi", {"type": "relu"})
        if phi.get("type") != "relu":
            raise ValueError(
                "only the clipped-linear transform {'type': 'relu'} is "
                "supported in JSON specs"
            )
        return NonlinearSpec(
            lam=float(spec["lambda"]), kernel=_kernel_from_spec(spec["kernel"])
        )
    if family == "etas":
        return EtasModel(
            lam=float(spec["lambda"]),
            A=float(spec["A"]),
            alpha=float(spec["alpha"]),
            beta=float(spec["beta"]),
            m0=float(spec["m0"]),
            c=float(spec["c"]),
            p=float(spec["p"]),
        )
    if family == "discrete":
        emission = spec.get("emission", {"type": "poisson"})
        return DiscreteModel(
            lam=float(spec["lambda"]),
            eta=float(spec["eta"]),
            g=np.asarray(spec["g"], dtype=np.float64),
            emission=emission.get("type", "poisson"),
            psi=float(emission["psi"]) if "psi" in emission else None,
        )
    if family == "dynamic-contagion":
        return DynamicContagionModel(
            a=float(spec["a"]),
            lam0=float(spec["lambda0"]),
            delta=float(spec["delta"]),
            rho=float(spec["rho"]),
            self_jumps=_jump_from_spec(spec.get("G", {"type": "exponential", "mean": 1.0})),
            ext_jumps=_jump_from_spec(spec.get("H", {"type": "exponential", "mean": 1.0})),
        )
    if family == "renewal":
        return RenewalHawkesModel(
            g=_density_from_spec(spec["g"]), kernel=_kernel_from_spec(spec["kernel"])
        )
    if family == "multivariate":
        d = int(spec["d"])
        kernels = [_kernel_from_spec(k) for k in spec["kernels"]]
        if len(kernels) != d * d:
            raise ValueError("kernels must be a row-major list of d*d entries")
        rows = [kernels[j * d : (j + 1) * d] for j in range(d)]
        return MultivariateHawkesModel(d, spec["baselines"], rows)
    raise ValueError(f"unknown model family {family!r}")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as err:
            raise ValueError(f"{path}: invalid JSON ({err})") from None
    return model_from_spec(spec)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def fit_result_to_dict(result):
    """JSON-ready view of a FitResult."""
    return {
        "theta": _jsonable(result.theta_hat),
        "loglik": result.loglik,
        "converged": result.converged,
        "iterations": result.iterations,
        "stationary": result.stationary,
        "flags": list(result.flags),
        "restarts": [
            {"start": _jsonable(start), "loglik": _jsonable(ll)}
            for start, ll in result.restart_values
        ],
    }
