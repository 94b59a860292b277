"""Smooth and composite objectives plus the analytic catalog.

A :class:`SmoothObjective` bundles a value function, its gradient and the
constants ``L`` (gradient Lipschitz) and ``mu`` (strong convexity, ``0`` when
unknown).  A :class:`CompositeObjective` adds a nonsmooth part described by a
:class:`~nesterov_ode.prox.ProxSpec`.

When the minimum is known analytically the objective also carries ``f_star``,
``x_star`` and, for quadratics, an exact ``gap`` function that evaluates
``f(x) - f_star`` without the cancellation of subtracting two large numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit, log_expit

from .prox import ProxSpec
from .rng import stream

__all__ = [
    "SmoothObjective",
    "CompositeObjective",
    "QuadraticSpec",
    "as_composite",
    "evaluate",
    "grad",
    "spectral_norm_sq",
    "quadratic",
    "dense_quadratic",
    "log_sum_exp",
    "least_squares",
    "logistic",
    "smoothed_abs",
    "capped_linear",
    "masked_least_squares",
    "make_standard_objectives",
]


@dataclass(frozen=True, eq=False)
class SmoothObjective:
    n: int
    value: Callable
    gradient: Callable
    L: float
    mu: float = 0.0
    name: str = ""
    f_star: float | None = None
    x_star: np.ndarray | None = None
    gap: Callable | None = None

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("dimension must be positive")
        if not self.L > 0:
            raise ValueError("Lipschitz constant must be positive")
        if self.mu < 0:
            raise ValueError("strong convexity modulus must be nonnegative")

    def __call__(self, x):
        return self.value(x)

    def grad(self, x):
        return self.gradient(x)


@dataclass(frozen=True, eq=False)
class CompositeObjective:
    g: SmoothObjective
    h: ProxSpec = field(default_factory=ProxSpec.zero)
    name: str = ""
    f_star: float | None = None
    x_star: np.ndarray | None = None

    @property
    def n(self):
        return self.g.n

    @property
    def L(self):
        return self.g.L

    @property
    def mu(self):
        return self.g.mu

    @property
    def gap(self):
        # an exact gap of g is only the gap of g + h when h vanishes
        return self.g.gap if self.h.is_zero else None

    def value(self, x):
        hv = self.h.value(x)
        if hv == np.inf:
            return np.inf
        return self.g.value(x) + hv

    __call__ = value


def as_composite(obj) -> CompositeObjective:
    if isinstance(obj, CompositeObjective):
        return obj
    return CompositeObjective(obj, ProxSpec.zero(), name=obj.name,
                              f_star=obj.f_star, x_star=obj.x_star)


def _check_dim(obj, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != obj.n:
        raise ValueError(f"expected a vector of dimension {obj.n}, got shape {x.shape}")
    return x


def evaluate(obj, x) -> float:
    """f(x) for a smooth or composite objective (``inf`` outside dom h)."""
    return float(obj.value(_check_dim(obj, x)))


def grad(obj, x):
    """Gradient of the smooth part."""
    x = _check_dim(obj, x)
    if isinstance(obj, CompositeObjective):
        return obj.g.grad(x)
    return obj.grad(x)


def spectral_norm_sq(A, max_iter=200, tol=1e-12):
    """Largest eigenvalue of ``A^T A`` by power iteration."""
    A = np.asarray(A, dtype=float)
    v = stream(0, "power-iteration").normal(A.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        lam_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= tol * abs(lam_new):
            lam = lam_new
            break
        lam = lam_new
    # Rayleigh quotient at the final vector
    return float(np.linalg.norm(A @ v) ** 2)


@dataclass(frozen=True)
class QuadraticSpec:
    """``f(x) = 0.5 <x, diag(eigenvalues) x>`` with ``f* = 0`` at the origin."""

    eigenvalues: tuple

    def __post_init__(self):
        lam = tuple(float(v) for v in np.atleast_1d(self.eigenvalues))
        if not lam or min(lam) <= 0:
            raise ValueError("quadratic eigenvalues must be positive")
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def lam(self):
        return np.array(self.eigenvalues)

    @property
    def L(self):
        return max(self.eigenvalues)

    @property
    def mu(self):
        return min(self.eigenvalues)

    def objective(self) -> SmoothObjective:
        return quadratic(self.eigenvalues)


def quadratic(eigenvalues, name="quadratic") -> SmoothObjective:
    lam = np.array(eigenvalues, dtype=float).ravel()
    if lam.size == 0 or np.any(lam <= 0):
        raise ValueError("quadratic eigenvalues must be positive")

    def value(x):
        return 0.5 * float(x @ (lam * x))

    def gradient(x):
        return lam * x

    return SmoothObjective(lam.size, value, gradient, L=float(lam.max()), mu=float(lam.min()),
                           name=name, f_star=0.0, x_star=np.zeros(lam.size), gap=value)


def dense_quadratic(A, b, name="quadratic") -> SmoothObjective:
    """``0.5 x^T A x + b^T x`` for symmetric positive definite ``A``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    ev = np.linalg.eigvalsh(A)
    if ev[0] <= 0:
        raise ValueError("A must be positive definite")
    x_star = -np.linalg.solve(A, b)
    f_star = 0.5 * float(b @ x_star)

    def value(x):
        return 0.5 * float(x @ (A @ x)) + float(b @ x)

    def gradient(x):
        return A @ x + b

    def gap(x):
        d = x - x_star
        return 0.5 * float(d @ (A @ d))

    return SmoothObjective(b.size, value, gradient, L=float(ev[-1]), mu=float(ev[0]),
                           name=name, f_star=f_star, x_star=x_star, gap=gap)


def log_sum_exp(A, b, rho, name="log_sum_exp") -> SmoothObjective:
    """``rho * log sum_i exp((a_i^T x - b_i) / rho)``; ``L = ||A||_2^2 / rho``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    rho = float(rho)

    # shifted by the max for stability; scipy's logsumexp costs ~10x more per call
    def value(x):
        z = (A @ x - b) / rho
        zmax = z.max()
        return rho * (float(zmax) + math.log(float(np.exp(z - zmax).sum())))

    def gradient(x):
        z = (A @ x - b) / rho
        p = np.exp(z - z.max())
        return A.T @ (p / p.sum())

    return SmoothObjective(A.shape[1], value, gradient, L=spectral_norm_sq(A) / rho,
                           name=name)


def least_squares(A, b, scale=0.5, name="least_squares") -> SmoothObjective:
    """``scale * ||A x - b||^2``; ``L = 2 scale ||A||_2^2``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)

    def value(x):
        r = A @ x - b
        return scale * float(r @ r)

    def gradient(x):
        return 2.0 * scale * (A.T @ (A @ x - b))

    L = 2.0 * scale * spectral_norm_sq(A)
    return SmoothObjective(A.shape[1], value, gradient, L=L, name=name)


def logistic(A, y, name="logistic") -> SmoothObjective:
    """``sum_i -y_i a_i^T x + log(1 + exp(a_i^T x))``; ``L = ||A||_2^2 / 4``."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)

    def value(x):
        z = A @ x
        # log(1 + e^z) = -log(sigmoid(-z))
        return float(np.sum(-y * z - log_expit(-z)))

    def gradient(x):
        return A.T @ (expit(A @ x) - y)

    return SmoothObjective(A.shape[1], value, gradient, L=spectral_norm_sq(A) / 4.0,
                           name=name)


def smoothed_abs(eps=1e-6, n=1, name="smoothed_abs") -> SmoothObjective:
    """Huber smoothing of ``||x||_1`` with width ``eps`` (``L = 1/eps``)."""

    def value(x):
        a = np.abs(x)
        return float(np.sum(np.where(a <= eps, 0.5 * x * x / eps, a - 0.5 * eps)))

    def gradient(x):
        return np.clip(x / eps, -1.0, 1.0)

    return SmoothObjective(n, value, gradient, L=1.0 / eps, name=name, f_star=0.0,
                           x_star=np.zeros(n), gap=value)


def capped_linear(name="capped_linear") -> SmoothObjective:
    """``f(x) = x`` for ``x >= 0`` and ``x + x^2/2`` below, minimized at ``-1``.

    Convex with a 1-Lipschitz derivative; on ``x >= 0`` the ODE started at
    ``x0 > 0`` follows ``x0 - t^2/8`` until it reaches the origin.
    """

    def value(x):
        v = x[0]
        return float(v if v >= 0 else v + 0.5 * v * v)

    def gradient(x):
        v = x[0]
        return np.array([1.0 if v >= 0 else 1.0 + v])

    return SmoothObjective(1, value, gradient, L=1.0, name=name, f_star=-0.5,
                           x_star=np.array([-1.0]))


def masked_least_squares(mask, M, name="matrix_completion") -> SmoothObjective:
    """``0.5 ||P_obs(X - M)||_F^2`` on row-major vectorized matrices; ``L = 1``."""
    mask = np.asarray(mask, dtype=bool).ravel()
    m = np.asarray(M, dtype=float).ravel()
    w = mask.astype(float)

    def value(x):
        r = w * (x - m)
        return 0.5 * float(r @ r)

    def gradient(x):
        return w * (x - m)

    return SmoothObjective(m.size, value, gradient, L=1.0, name=name)


def make_standard_objectives():
    """Named constructors for the analytic objectives."""
    return {
        "quadratic": quadratic,
        "dense_quadratic": dense_quadratic,
        "log_sum_exp": log_sum_exp,
        "least_squares": least_squares,
        "logistic": logistic,
        "smoothed_abs": smoothed_abs,
        "capped_linear": capped_linear,
        "masked_least_squares": masked_least_squares,
    }
