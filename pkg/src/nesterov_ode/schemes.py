"""Discrete first-order iterations.

All runs share one loop: a proximal gradient step from the extrapolated point
followed by a momentum update.  The variants differ only in the momentum
coefficient and in when the momentum clock is reset.

* ``gradient_descent_run``: no momentum.
* ``nesterov_run``: coefficient ``(k-1)/(k+r-1)``; ``r = 3`` is the classical
  scheme.
* ``speed_restart_run``: coefficient ``(j-1)/(j+r-1)`` with ``j`` reset to 1
  whenever the step length shrinks (and ``j >= k_min``).
* ``gradient_restart_run``: same, resetting when the objective increases.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .objectives import as_composite

__all__ = [
    "DivergenceError",
    "SchemeParams",
    "IterateTrace",
    "momentum",
    "nesterov_run",
    "gradient_descent_run",
    "speed_restart_run",
    "gradient_restart_run",
    "run_scheme",
    "write_trace_csv",
]

RESTARTS = ("none", "speed", "gradient")


class DivergenceError(ArithmeticError):
    """A run produced a non-finite state."""

    def __init__(self, message, k=None, t=None):
        super().__init__(message)
        self.k = k
        self.t = t


def momentum(k, r):
    return (k - 1) / (k + r - 1)


@dataclass
class SchemeParams:
    s: float
    r: float = 3.0
    k_max: int = 1000
    k_min: int = 10
    restart: str = "none"
    allow_large_step: bool = False

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"step size must be positive, got {self.s}")
        if self.restart not in RESTARTS:
            raise ValueError(f"restart must be one of {RESTARTS}, got {self.restart!r}")
        if self.k_max < 0:
            raise ValueError("k_max must be nonnegative")
        if self.k_min < 1:
            raise ValueError("k_min must be at least 1")


@dataclass
class IterateTrace:
    k: np.ndarray
    x: np.ndarray | None
    f_gap: np.ndarray
    step_norm: np.ndarray
    restarted: np.ndarray
    scheme: str
    params: SchemeParams | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.k.size

    @property
    def restart_indices(self):
        return np.nonzero(self.restarted)[0]

    def y(self, r=None):
        """Extrapolated points ``y_k`` rebuilt from the stored iterates."""
        if self.x is None:
            raise ValueError("trace was recorded without iterates")
        if r is None:
            r = self.params.r if self.params is not None else 3.0
        y = self.x.copy()
        if self.scheme == "gd":
            return y
        j = 1
        for k in range(1, self.k.size):
            y[k] = self.x[k] + momentum(j if self.scheme != "nesterov" else k, r) * (
                self.x[k] - self.x[k - 1])
            j = 1 if self.restarted[k] else j + 1
        return y


def _gap_function(obj, f_star):
    if f_star is None and obj.gap is not None:
        return obj.gap
    if f_star is None:
        f_star = obj.f_star
    if f_star is None:
        raise ValueError(f"optimal value of {obj.name or 'objective'} is unknown; pass f_star")
    return lambda x: obj.value(x) - f_star


@np.errstate(over="ignore", invalid="ignore")
def _run(obj, x0, params, scheme, f_star=None, keep_iterates=True):
    obj = as_composite(obj)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (obj.n,):
        raise ValueError(f"x0 must have shape ({obj.n},), got {x0.shape}")
    s, r, k_max, k_min = params.s, params.r, params.k_max, params.k_min
    if s > 1.0 / obj.L * (1 + 1e-12) and not params.allow_large_step:
        raise ValueError(f"step size {s} exceeds 1/L = {1.0 / obj.L}; set allow_large_step")
    gap = _gap_function(obj, f_star)
    g, h = obj.g, obj.h
    value = obj.value

    xs = np.empty((k_max + 1, obj.n)) if keep_iterates else None
    f_gap = np.empty(k_max + 1)
    step = np.zeros(k_max + 1)
    restarted = np.zeros(k_max + 1, dtype=bool)

    started = time.perf_counter()
    x_prev = x0.copy()
    y = x0.copy()
    if keep_iterates:
        xs[0] = x0
    f_gap[0] = gap(x0)
    f_prev = value(x0) if scheme == "gradient" else None
    j = 1
    for k in range(1, k_max + 1):
        x = h.prox(y - s * g.grad(y), s)
        fg = gap(x)
        d = x - x_prev
        step[k] = math.sqrt(float(d @ d))
        # x_prev is finite, so a finite step norm means a finite x
        if not (math.isfinite(fg) and math.isfinite(step[k])):
            raise DivergenceError(f"non-finite iterate at k={k}", k=k)
        if scheme == "gd":
            y = x
        elif scheme == "nesterov":
            y = x + momentum(k, r) * (x - x_prev)
        else:
            y = x + momentum(j, r) * (x - x_prev)
            if scheme == "speed":
                fire = step[k] < step[k - 1]
            else:
                f_cur = value(x)
                fire = f_cur > f_prev
                f_prev = f_cur
            if fire and j >= k_min:
                j = 1
                restarted[k] = True
            else:
                j += 1
        f_gap[k] = fg
        if keep_iterates:
            xs[k] = x
        x_prev = x

    meta = {"wall_time": time.perf_counter() - started, "objective": obj.name}
    return IterateTrace(np.arange(k_max + 1), xs, f_gap, step, restarted,
                        scheme=scheme, params=params, meta=meta)


def nesterov_run(obj, x0, params: SchemeParams, f_star=None, keep_iterates=True):
    """Generalized Nesterov scheme with momentum ``(k-1)/(k+r-1)``."""
    if params.restart != "none":
        raise ValueError("nesterov_run takes restart='none'; use the restart runners")
    return _run(obj, x0, params, "nesterov", f_star, keep_iterates)


def gradient_descent_run(obj, x0, s, k_max, f_star=None, allow_large_step=False,
                         keep_iterates=True):
    params = SchemeParams(s=s, k_max=k_max, allow_large_step=allow_large_step)
    return _run(obj, x0, params, "gd", f_star, keep_iterates)


def speed_restart_run(obj, x0, params: SchemeParams, f_star=None, keep_iterates=True):
    """Restart the momentum clock when ``||x_k - x_{k-1}|| < ||x_{k-1} - x_{k-2}||``.

    ``x_{-1} = x_0``, so the step before the first one has length zero and the
    first comparison can never fire.
    """
    if params.restart != "speed":
        raise ValueError("speed_restart_run needs restart='speed'")
    return _run(obj, x0, params, "speed", f_star, keep_iterates)


def gradient_restart_run(obj, x0, params: SchemeParams, f_star=None, keep_iterates=True):
    """Restart the momentum clock when ``f(x_k) > f(x_{k-1})``."""
    if params.restart != "gradient":
        raise ValueError("gradient_restart_run needs restart='gradient'")
    return _run(obj, x0, params, "gradient", f_star, keep_iterates)


def run_scheme(name, obj, x0, params: SchemeParams, f_star=None, keep_iterates=True):
    """Dispatch by short name: ``gd``/``PG``, ``oN``, ``srN``, ``grN``."""
    key = name.lower()
    if key in ("gd", "pg", "gradient_descent"):
        return gradient_descent_run(obj, x0, params.s, params.k_max, f_star=f_star,
                                    allow_large_step=params.allow_large_step,
                                    keep_iterates=keep_iterates)
    if key in ("on", "nesterov"):
        return nesterov_run(obj, x0, replace(params, restart="none"), f_star, keep_iterates)
    if key in ("srn", "speed"):
        return speed_restart_run(obj, x0, replace(params, restart="speed"), f_star,
                                 keep_iterates)
    if key in ("grn", "gradient"):
        return gradient_restart_run(obj, x0, replace(params, restart="gradient"), f_star,
                                    keep_iterates)
    raise ValueError(f"unknown scheme {name!r}")


def write_trace_csv(trace: IterateTrace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "f_gap", "step_norm", "restarted"])
        for k, fg, sn, rs in zip(trace.k, trace.f_gap, trace.step_norm, trace.restarted):
            w.writerow([int(k), repr(float(fg)), repr(float(sn)), int(rs)])
