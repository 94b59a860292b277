"""Continuous-time engine for ``X'' + (r/t) X' + grad f(X) = 0``.

The integrator is the explicit finite-difference scheme

    Z_{k+1} = (1 - r dt / max(delta, t_k)) Z_k - dt grad f(X_k)
    X_{k+1} = X_k + dt Z_{k+1}

with ``X_0 = x0`` and ``Z_0 = 0``.  Eliminating ``Z`` gives the two-step
recursion ``X_{k+1} = (2 - a_k) X_k - dt^2 grad f(X_k) - (1 - a_k) X_{k-1}``,
which is stable for ``dt < 2/sqrt(L)``.  The damping singularity at ``t = 0``
is smoothed by ``delta``; the default ``delta = r dt`` keeps the damping factor
in ``[0, 1)`` on every step.

With ``restart=True`` the damping clock is reset, and the velocity zeroed,
whenever the speed stops increasing (``<Z_k, Z_{k+1} - Z_k> <= 0``), but no
sooner than ``restart_spacing`` steps after the previous reset.

For diagonal quadratics the exact trajectory is available in closed form
through Bessel functions (:func:`quadratic_closed_form`).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import bessel_ratio
from .objectives import QuadraticSpec
from .prox import lasso_directional_subgradient
from .schemes import DivergenceError

__all__ = [
    "OdeParams",
    "ContinuousTrace",
    "integrate",
    "integrate_composite_lasso",
    "quadratic_closed_form",
    "quadratic_closed_form_velocity",
    "closed_form_trace",
    "write_trace_csv",
]


@dataclass
class OdeParams:
    r: float = 3.0
    dt: float = 1e-3
    T: float = 10.0
    delta: float | None = None
    restart: bool = False
    restart_spacing: int = 10
    max_restarts: int | None = None  # stop integrating after this many restarts

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if not self.T >= self.dt:
            raise ValueError("horizon T must be at least one time step")
        if self.delta is None:
            self.delta = max(self.r, 1.0) * self.dt
        if not self.delta > 0:
            raise ValueError("smoothing delta must be positive")
        if self.restart_spacing < 1:
            raise ValueError("restart_spacing must be at least 1")

    @property
    def steps(self):
        return int(math.floor(self.T / self.dt + 1e-9))


@dataclass
class ContinuousTrace:
    t: np.ndarray
    X: np.ndarray
    V: np.ndarray
    f_gap: np.ndarray
    restart_times: list = field(default_factory=list)
    restart_mask: np.ndarray | None = None
    dt: float | None = None
    params: OdeParams | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.t.size

    @property
    def speed(self):
        return np.linalg.norm(self.V, axis=1)

    def at(self, times):
        """Linear interpolation of ``X`` at the requested times."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if times.max() > self.t[-1] * (1 + 1e-12) or times.min() < 0:
            raise ValueError("requested times fall outside the trace horizon")
        out = np.empty((times.size, self.X.shape[1]))
        for i in range(self.X.shape[1]):
            out[:, i] = np.interp(times, self.t, self.X[:, i])
        return out


def _gap_function(obj, f_star):
    if f_star is None and getattr(obj, "gap", None) is not None:
        return obj.gap
    if f_star is None:
        f_star = obj.f_star
    if f_star is None:
        raise ValueError("optimal value unknown; pass f_star")
    return lambda x: obj.value(x) - f_star


@np.errstate(over="ignore", invalid="ignore")
def _integrate(force, gap, x0, params: OdeParams, constrain=None):
    x = np.array(x0, dtype=float)
    n = x.size
    N = params.steps
    dt, r, delta = params.dt, params.r, params.delta
    spacing = params.restart_spacing

    X = np.empty((N + 1, n))
    V = np.zeros((N + 1, n))
    f_gap = np.empty(N + 1)
    mask = np.zeros(N + 1, dtype=bool)
    restart_times = []

    z = np.zeros(n)
    X[0] = x
    f_gap[0] = gap(x)
    k0 = 0  # index where the damping clock last started
    for k in range(N):
        a = r * dt / max(delta, (k - k0) * dt)
        z_new = (1.0 - a) * z - dt * force(x, z)
        # a resting state (z = 0) is not a speed maximum
        if (params.restart and k - k0 >= spacing and float(z @ (z_new - z)) <= 0.0
                and float(z @ z) > 0.0):
            k0 = k
            mask[k] = True
            restart_times.append(k * dt)
            z_new = -dt * force(x, np.zeros(n))
            if params.max_restarts is not None and len(restart_times) >= params.max_restarts:
                N = k
                break
        x_new = x + dt * z_new
        if constrain is not None:
            constrain(x, x_new, z_new)
        x = x_new
        z = z_new
        fg = gap(x)
        # x_k is finite and x_{k+1} = x_k + dt z, so checking z covers both
        if not (math.isfinite(fg) and math.isfinite(float(z @ z))):
            raise DivergenceError(f"non-finite ODE state at t={(k + 1) * dt:.6g}",
                                  k=k + 1, t=(k + 1) * dt)
        X[k + 1] = x
        V[k + 1] = z
        f_gap[k + 1] = fg

    t = np.arange(N + 1) * dt
    return ContinuousTrace(t, X[:N + 1], V[:N + 1], f_gap[:N + 1], restart_times,
                           mask[:N + 1], dt, params)


def integrate(obj, x0, params: OdeParams, f_star=None) -> ContinuousTrace:
    """Integrate the (generalized, optionally restarted) ODE for a smooth objective."""
    if hasattr(obj, "h"):
        if not obj.h.is_zero:
            raise ValueError("integrate needs a smooth objective; use integrate_composite_lasso")
        obj = obj.g
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (obj.n,):
        raise ValueError(f"x0 must have shape ({obj.n},)")
    gap = _gap_function(obj, f_star)
    grad = obj.grad
    trace = _integrate(lambda x, z: grad(x), gap, x0, params)
    trace.meta["objective"] = obj.name
    return trace


def integrate_composite_lasso(A, y, lam, x0, params: OdeParams, f_star=0.0) -> ContinuousTrace:
    """Integrate ``X'' + (r/t) X' + G(X, X') = 0`` for the lasso.

    ``G`` is the directional subgradient of ``0.5 ||y - A x||^2 + lam ||x||_1``
    taken along the current velocity.  A coordinate that reaches or crosses
    zero during a step while ``|A_i^T (A x - y)| <= lam`` is set to zero with
    zero velocity; from there the subgradient rule keeps it at zero until the
    correlation exceeds ``lam``.  Without this the Euler iterates chatter
    across zero and never become sparse.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    lam = float(lam)

    def value(x):
        res = y - A @ x
        return 0.5 * float(res @ res) + lam * float(np.abs(x).sum())

    def force(x, z):
        return lasso_directional_subgradient(A, y, lam, x, z)

    def constrain(x, x_new, z_new):
        if lam == 0.0:
            return
        c = A.T @ (A @ x - y)
        stick = ((np.sign(x_new) != np.sign(x)) | (x == 0)) & (np.abs(c) <= lam)
        x_new[stick] = 0.0
        z_new[stick] = 0.0

    trace = _integrate(force, lambda x: value(x) - f_star, np.asarray(x0, dtype=float),
                       params, constrain)
    trace.meta["objective"] = "lasso"
    return trace


def _spec(spec):
    if isinstance(spec, QuadraticSpec):
        return spec.lam
    return np.asarray(spec, dtype=float)


def quadratic_closed_form(spec, x0, t, r=3.0):
    """Exact solution for ``f = 0.5 <x, diag(lam) x>``.

    Each coordinate is ``x0_i * 2^nu Gamma(nu+1) J_nu(u) / u^nu`` with
    ``u = t sqrt(lam_i)`` and ``nu = (r-1)/2``; for ``r = 3`` this is
    ``2 x0_i J_1(u) / u``.  Returns shape ``(n,)`` for scalar ``t`` and
    ``(len(t), n)`` otherwise.
    """
    lam = _spec(spec)
    x0 = np.asarray(x0, dtype=float)
    nu = 0.5 * (r - 1.0)
    if nu < 0:
        raise ValueError("closed form needs r >= 1")
    tt = np.asarray(t, dtype=float)
    u = np.multiply.outer(tt, np.sqrt(lam))
    return bessel_ratio(nu, u) * x0


def quadratic_closed_form_velocity(spec, x0, t, r=3.0):
    """Time derivative of :func:`quadratic_closed_form`."""
    lam = _spec(spec)
    x0 = np.asarray(x0, dtype=float)
    nu = 0.5 * (r - 1.0)
    tt = np.asarray(t, dtype=float)
    sq = np.sqrt(lam)
    u = np.multiply.outer(tt, sq)
    # d/du [J_nu(u)/u^nu] = -J_{nu+1}(u)/u^nu
    return -x0 * sq * u * bessel_ratio(nu + 1.0, u) / (2.0 * (nu + 1.0))


def closed_form_trace(spec, x0, t, r=3.0) -> ContinuousTrace:
    lam = _spec(spec)
    t = np.asarray(t, dtype=float)
    X = np.atleast_2d(quadratic_closed_form(lam, x0, t, r))
    V = np.atleast_2d(quadratic_closed_form_velocity(lam, x0, t, r))
    f_gap = 0.5 * np.sum(lam * X * X, axis=1)
    dt = float(t[1] - t[0]) if t.size > 1 else None
    return ContinuousTrace(t, X, V, f_gap, [], np.zeros(t.size, dtype=bool), dt,
                           meta={"objective": "closed_form", "r": r})


def write_trace_csv(trace: ContinuousTrace, path, coordinates=False):
    """Write ``t,f_gap,speed,restarted`` (plus ``x0..`` columns when asked, n <= 4)."""
    n = trace.X.shape[1]
    if coordinates and n > 4:
        raise ValueError("per-coordinate columns are limited to n <= 4")
    mask = trace.restart_mask if trace.restart_mask is not None else np.zeros(len(trace), bool)
    speed = trace.speed
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["t", "f_gap", "speed", "restarted"]
        if coordinates:
            header += [f"x{i}" for i in range(n)]
        w.writerow(header)
        for i in range(len(trace)):
            row = [repr(float(trace.t[i])), repr(float(trace.f_gap[i])),
                   repr(float(speed[i])), int(mask[i])]
            if coordinates:
                row += [repr(float(v)) for v in trace.X[i]]
            w.writerow(row)
