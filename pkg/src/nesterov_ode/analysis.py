"""Diagnostics over discrete and continuous traces.

Energy functionals (Lyapunov quantities whose decay certifies a rate),
scaled errors, root times of oscillating trajectories, the velocity ratio
``sup ||X'(u)|| / u``, scheme-to-ODE deviation and log-linear rate fits.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .ode import ContinuousTrace
from .schemes import IterateTrace

__all__ = [
    "EnergySeries",
    "Check",
    "energy_continuous",
    "energy_discrete",
    "is_nonincreasing",
    "scaled_error",
    "oscillation_roots",
    "velocity_ratio_max",
    "scheme_ode_deviation",
    "linear_rate_fit",
    "cesaro_mean",
    "trapezoid_integral",
    "rate_bound",
    "generalized_rate_bound",
    "generalized_sum_bound",
    "write_series_csv",
    "write_summary",
]

CONTINUOUS_VARIANTS = ("continuous_r3", "continuous_r", "continuous_alpha")
DISCRETE_VARIANTS = ("discrete_r", "discrete_t3")


@dataclass
class EnergySeries:
    grid: np.ndarray
    values: np.ndarray
    variant: str
    warning: str | None = None

    def __len__(self):
        return self.values.size

    def max_increase(self):
        """Largest single-step increase (negative when strictly decreasing)."""
        if self.values.size < 2:
            return 0.0
        return float(np.max(np.diff(self.values)))


@dataclass
class Check:
    """One bound-versus-measured line of a report."""

    name: str
    bound: float
    measured: float
    passed: bool
    note: str = ""

    def __post_init__(self):
        # numpy scalars would otherwise leak into the JSON summary as floats
        self.passed = bool(self.passed)
        self.bound = float(self.bound)
        self.measured = float(self.measured)


def _dist2(X, x_star):
    d = X - np.asarray(x_star, dtype=float)
    return np.sum(d * d, axis=1)


def energy_continuous(trace: ContinuousTrace, x_star, variant="continuous_r3", r=3.0,
                      alpha=None, mu=None) -> EnergySeries:
    """Evaluate a continuous-time energy at every sample of ``trace``.

    ``continuous_r3``:  ``t^2 f_gap + 2 ||X + t V / 2 - x*||^2``
    ``continuous_r``:   ``2 t^2 f_gap / (r-1) + (r-1) ||X + t V / (r-1) - x*||^2``
    ``continuous_alpha``: ``t^a f_gap + (2r-a)^2 t^(a-2) / 8 ||X + 2 t V / (2r-a) - x*||^2``
    (needs ``mu > 0`` and ``2 <= alpha <= 2r/3``).
    """
    t = trace.t[:, None]
    X, V, fg = trace.X, trace.V, trace.f_gap
    tt = trace.t
    warning = None
    if variant == "continuous_r3":
        vals = tt ** 2 * fg + 2.0 * _dist2(X + 0.5 * t * V, x_star)
    elif variant == "continuous_r":
        if r <= 1:
            raise ValueError("continuous_r needs r > 1")
        if r < 3:
            warning = "energy is not monotone in general for r < 3"
        vals = 2.0 * tt ** 2 / (r - 1) * fg + (r - 1) * _dist2(X + t * V / (r - 1), x_star)
    elif variant == "continuous_alpha":
        if mu is None or not mu > 0:
            raise ValueError("continuous_alpha needs a strong convexity modulus mu > 0")
        if alpha is None:
            alpha = 2.0 * r / 3.0
        if not (2.0 <= alpha <= 2.0 * r / 3.0 + 1e-12):
            raise ValueError("continuous_alpha needs 2 <= alpha <= 2r/3")
        c = 2.0 * r - alpha
        vals = tt ** alpha * fg + c * c * tt ** (alpha - 2) / 8.0 * _dist2(
            X + 2.0 * t * V / c, x_star)
    else:
        raise ValueError(f"unknown continuous energy variant {variant!r}")
    return EnergySeries(tt.copy(), vals, variant, warning)


def energy_discrete(trace: IterateTrace, x_star, variant="discrete_r", r=None,
                    s=None) -> EnergySeries:
    """Evaluate a discrete energy along a scheme trace.

    ``discrete_r``:
        ``2 (k+r-2)^2 s f_gap / (r-1) + (r-1) ||z_k - x*||^2`` with
        ``z_k = ((k+r-1) y_k - k x_k) / (r-1)``.
    ``discrete_t3``:
        ``s (2k+3r-5)(2k+2r-5)(4k+4r-9)/16 f_gap
        + (2k+3r-5)/16 ||2(k+r-1) y_k - (2k+1) x_k - (2r-3) x*||^2``.

    ``y_k`` is rebuilt from the stored iterates.
    """
    if trace.x is None:
        raise ValueError("energy_discrete needs a trace with stored iterates")
    if trace.scheme != "nesterov":
        raise ValueError("discrete energies are defined for the unrestarted scheme")
    params = trace.params
    if r is None:
        r = params.r
    if s is None:
        s = params.s
    if params is not None and abs(params.r - r) > 1e-12:
        raise ValueError("r does not match the trace")
    x_star = np.asarray(x_star, dtype=float)
    X = trace.x
    Y = trace.y(r)
    k = trace.k.astype(float)[:, None]
    kk = trace.k.astype(float)
    fg = trace.f_gap
    warning = None
    if variant == "discrete_r":
        if r <= 3:
            warning = "the summed bound needs r > 3"
        Z = ((k + r - 1) * Y - k * X) / (r - 1)
        vals = 2.0 * (kk + r - 2) ** 2 * s / (r - 1) * fg + (r - 1) * _dist2(Z, x_star)
    elif variant == "discrete_t3":
        if r < 4.5:
            warning = "the cubic-rate energy is analysed for r >= 9/2 only"
        W = 2.0 * (k + r - 1) * Y - (2.0 * k + 1) * X - (2 * r - 3) * x_star
        vals = (s * (2 * kk + 3 * r - 5) * (2 * kk + 2 * r - 5) * (4 * kk + 4 * r - 9) / 16.0 * fg
                + (2 * kk + 3 * r - 5) / 16.0 * np.sum(W * W, axis=1))
    else:
        raise ValueError(f"unknown discrete energy variant {variant!r}")
    return EnergySeries(kk.copy(), vals, variant, warning)


def is_nonincreasing(series: EnergySeries, rel_tol, start=0):
    """True when no step increases the energy by more than ``rel_tol * E(0)``."""
    v = series.values[start:]
    scale = abs(series.values[0]) if series.values[0] != 0 else 1.0
    if v.size < 2:
        return True
    return bool(np.max(np.diff(v)) <= rel_tol * scale)


def scaled_error(trace, power=2.0, s=None):
    """``t^p f_gap`` for ODE traces, ``s^(p/2) k^p f_gap`` for scheme traces."""
    if not power > 0:
        raise ValueError("power must be positive")
    if isinstance(trace, ContinuousTrace):
        return trace.t ** power * trace.f_gap
    if s is None:
        s = trace.params.s
    return s ** (power / 2.0) * trace.k.astype(float) ** power * trace.f_gap


def oscillation_roots(trace: ContinuousTrace, coordinate=0, x_star=0.0, signal=None):
    """Times where ``X_i(t) - x*_i`` changes sign, by linear interpolation.

    Samples with ``|X - x*| < 1e-13 |x0 - x*|`` are treated as numerical zeros
    and skipped.  ``signal`` may be passed directly instead of a coordinate.
    """
    if signal is None:
        xs = np.asarray(x_star, dtype=float)
        xs = float(xs) if xs.ndim == 0 else float(xs[coordinate])
        signal = trace.X[:, coordinate] - xs
    signal = np.asarray(signal, dtype=float)
    scale = abs(signal[0])
    if scale == 0.0:
        scale = float(np.max(np.abs(signal)))
    if scale == 0.0:
        return []
    keep = np.abs(signal) >= 1e-13 * scale
    t = trace.t[keep]
    v = signal[keep]
    idx = np.nonzero(np.sign(v[:-1]) != np.sign(v[1:]))[0]
    return [float(t[i] - v[i] * (t[i + 1] - t[i]) / (v[i + 1] - v[i])) for i in idx]


def velocity_ratio_max(trace: ContinuousTrace, t_end, t_min=None):
    """``max ||V(u)|| / u`` over samples ``u`` in ``[t_min, t_end]``.

    The first few Euler steps carry the smoothing transient near ``t = 0``,
    so by default samples below ``10 dt`` are left out.
    """
    if t_end > trace.t[-1] * (1 + 1e-12):
        raise ValueError("t_end exceeds the trace horizon")
    if t_min is None:
        t_min = 10.0 * (trace.dt or 0.0)
    sel = (trace.t > 0) & (trace.t >= t_min - 1e-15) & (trace.t <= t_end * (1 + 1e-12))
    if not np.any(sel):
        return 0.0
    return float(np.max(np.linalg.norm(trace.V[sel], axis=1) / trace.t[sel]))


def scheme_ode_deviation(itrace: IterateTrace, ctrace: ContinuousTrace, s=None, T=None):
    """``max_{k <= T/sqrt(s)} ||x_k - X(k sqrt(s))||`` with ``X`` interpolated."""
    if itrace.x is None:
        raise ValueError("scheme trace has no stored iterates")
    if s is None:
        s = itrace.params.s
    h = math.sqrt(s)
    k_end = itrace.k[-1] if T is None else min(int(math.floor(T / h + 1e-9)), itrace.k[-1])
    if k_end * h > ctrace.t[-1] * (1 + 1e-9):
        raise ValueError("ODE trace horizon is shorter than the scheme window")
    times = np.minimum(np.arange(k_end + 1) * h, ctrace.t[-1])
    X = ctrace.at(times)
    return float(np.max(np.linalg.norm(itrace.x[:k_end + 1] - X, axis=1)))


def linear_rate_fit(trace, window):
    """Least-squares fit of ``log f_gap`` against ``k`` over ``window = (k_lo, k_hi)``.

    Returns ``(slope, r_squared)``.
    """
    if isinstance(trace, IterateTrace):
        k, fg = trace.k.astype(float), trace.f_gap
    else:
        k, fg = (np.asarray(a, dtype=float) for a in trace)
    lo, hi = window
    sel = (k >= lo) & (k <= hi)
    y = fg[sel]
    if y.size < 2:
        raise ValueError("window holds fewer than two samples")
    if np.any(y <= 0):
        raise ValueError("nonpositive gaps inside the fit window")
    x = k[sel]
    ly = np.log(y)
    slope, intercept = np.polyfit(x, ly, 1)
    resid = ly - (slope * x + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def trapezoid_integral(t, y):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def cesaro_mean(trace: ContinuousTrace, power=3.0):
    """``(1/t) int_0^t u^p f_gap(u) du`` at the trace horizon."""
    return trapezoid_integral(trace.t, trace.t ** power * trace.f_gap) / trace.t[-1]


def rate_bound(k, dist0_sq, s):
    """``2 ||x0 - x*||^2 / (s (k+1)^2)``."""
    k = np.asarray(k, dtype=float)
    return 2.0 * dist0_sq / (s * (k + 1.0) ** 2)


def generalized_rate_bound(k, dist0_sq, s, r):
    """``(r-1)^2 ||x0 - x*||^2 / (2 s (k+r-2)^2)``."""
    k = np.asarray(k, dtype=float)
    return (r - 1.0) ** 2 * dist0_sq / (2.0 * s * (k + r - 2.0) ** 2)


def generalized_sum_bound(dist0_sq, s, r):
    """``(r-1)^2 ||x0 - x*||^2 / (2 s (r-3))`` for ``r > 3``."""
    if not r > 3:
        raise ValueError("summed bound needs r > 3")
    return (r - 1.0) ** 2 * dist0_sq / (2.0 * s * (r - 3.0))


def write_series_csv(path, grid, values, header=("grid", "value")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for g, v in zip(grid, values):
            w.writerow([repr(float(g)), repr(float(v))])


def write_summary(path, checks, extra=None):
    """JSON summary of :class:`Check` records."""
    record = {"checks": [asdict(c) for c in checks],
              "passed": all(c.passed for c in checks)}
    if extra:
        record.update(extra)
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return record
