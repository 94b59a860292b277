"""Proximal operators and gradient mappings for composite objectives.

Every nonsmooth term ``h`` used by the experiments is described by a
:class:`ProxSpec`.  ``ProxSpec.prox(v, s)`` returns

    argmin_z  ||z - v||^2 / (2 s) + h(z)

and :func:`proximal_subgradient` builds the gradient mapping
``G_s(y) = (y - prox(y - s grad g(y), s)) / s`` on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import isotonic_regression

__all__ = [
    "ProxSpec",
    "prox",
    "proximal_subgradient",
    "lasso_directional_subgradient",
    "soft_threshold",
    "project_l1_ball",
    "prox_sorted_l1",
]

VARIANTS = ("zero", "l1", "nonneg", "l1_ball", "nuclear", "sorted_l1")


def soft_threshold(v, tau):
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def project_l1_ball(v, delta):
    """Euclidean projection onto ``{z : ||z||_1 <= delta}`` by sort and threshold."""
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    if a.sum() <= delta:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, u.size + 1)
    rho = np.nonzero(u - (css - delta) / j > 0)[0][-1]
    theta = (css[rho] - delta) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def prox_sorted_l1(v, weights):
    """Prox of ``z -> sum_i weights_i |z|_(i)`` (weights nonincreasing).

    Sorts ``|v|`` in decreasing order (stable, so ties keep their original
    order), subtracts the weights, fits the nonincreasing isotonic regression
    (pool adjacent violators) and clips at zero.
    """
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    order = np.argsort(-a, kind="stable")
    w = a[order] - weights
    x_sorted = np.maximum(isotonic_regression(w, increasing=False).x, 0.0)
    out = np.empty_like(v)
    out[order] = x_sorted
    return np.sign(v) * out


@dataclass(frozen=True)
class ProxSpec:
    """The nonsmooth part ``h`` of a composite objective.

    Use the constructors (``ProxSpec.l1(4.0)`` etc.) rather than building the
    dataclass directly.
    """

    variant: str = "zero"
    lam: float = 0.0
    delta: float = 0.0
    rows: int = 0
    cols: int = 0
    weights: np.ndarray | None = field(default=None, compare=False)
    # last nuclear prox output and its penalty value, so h(prox(v)) skips an SVD;
    # the output array must not be modified in place afterwards
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown prox variant {self.variant!r}")
        if self.variant in ("l1", "nuclear") and not self.lam > 0:
            raise ValueError(f"{self.variant} penalty needs lam > 0")
        if self.variant == "l1_ball" and not self.delta > 0:
            raise ValueError("l1_ball radius delta must be positive")
        if self.variant == "nuclear" and (self.rows <= 0 or self.cols <= 0):
            raise ValueError("nuclear variant needs positive rows and cols")
        if self.variant == "sorted_l1":
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1 or w.size == 0:
                raise ValueError("sorted_l1 weights must be a nonempty vector")
            if np.any(w < 0) or np.any(np.diff(w) > 0):
                raise ValueError("sorted_l1 weights must be nonnegative and nonincreasing")
            object.__setattr__(self, "weights", w)

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def l1(cls, lam):
        return cls("l1", lam=float(lam))

    @classmethod
    def nonneg(cls):
        return cls("nonneg")

    @classmethod
    def l1_ball(cls, delta):
        return cls("l1_ball", delta=float(delta))

    @classmethod
    def nuclear(cls, lam, rows, cols):
        return cls("nuclear", lam=float(lam), rows=int(rows), cols=int(cols))

    @classmethod
    def sorted_l1(cls, weights):
        return cls("sorted_l1", weights=np.asarray(weights, dtype=float))

    @property
    def is_zero(self):
        return self.variant == "zero"

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if self.variant == "nuclear" and v.size != self.rows * self.cols:
            raise ValueError(
                f"nuclear prox expects {self.rows}x{self.cols}={self.rows * self.cols} "
                f"entries, got {v.size}"
            )
        if self.variant == "sorted_l1" and v.size != self.weights.size:
            raise ValueError(
                f"sorted_l1 prox expects {self.weights.size} entries, got {v.size}"
            )
        return v

    def value(self, z):
        """h(z); ``inf`` outside the domain of an indicator."""
        z = self._check(z)
        if self.variant == "zero":
            return 0.0
        if self.variant == "l1":
            return self.lam * float(np.abs(z).sum())
        if self.variant == "nonneg":
            return 0.0 if np.all(z >= 0) else np.inf
        if self.variant == "l1_ball":
            # relative slack absorbs the round-off of the projection itself
            return 0.0 if np.abs(z).sum() <= self.delta * (1 + 1e-12) else np.inf
        if self.variant == "nuclear":
            last = self._memo.get("last")
            if last is not None and last[0] is z:
                return last[1]
            sv = np.linalg.svd(z.reshape(self.rows, self.cols), compute_uv=False)
            return self.lam * float(sv.sum())
        a = np.sort(np.abs(z))[::-1]
        return float(self.weights @ a)

    def prox(self, v, s):
        if not s > 0:
            raise ValueError(f"prox step must be positive, got {s}")
        v = self._check(v)
        if self.variant == "zero":
            return v.copy()
        if self.variant == "l1":
            return soft_threshold(v, s * self.lam)
        if self.variant == "nonneg":
            return np.maximum(v, 0.0)
        if self.variant == "l1_ball":
            return project_l1_ball(v, self.delta)
        if self.variant == "nuclear":
            u, sv, vt = np.linalg.svd(v.reshape(self.rows, self.cols), full_matrices=False)
            sv = np.maximum(sv - s * self.lam, 0.0)
            out = ((u * sv) @ vt).ravel()
            # one tuple store, so concurrent callers never see a mixed pair
            self._memo["last"] = (out, self.lam * float(sv.sum()))
            return out
        return prox_sorted_l1(v, s * self.weights)


def prox(h: ProxSpec, v, s):
    return h.prox(v, s)


def proximal_subgradient(obj, y, s):
    """Gradient mapping ``G_s(y)`` of a composite objective.

    With ``h = 0`` this returns the gradient of the smooth part itself, not a
    round-off perturbed copy of it.
    """
    if not s > 0:
        raise ValueError(f"step must be positive, got {s}")
    y = np.asarray(y, dtype=float)
    g = obj.g.grad(y)
    if obj.h.is_zero:
        return g
    return (y - obj.h.prox(y - s * g, s)) / s


def lasso_directional_subgradient(A, y, lam, x, p):
    """Directional subgradient of ``0.5 ||y - A x||^2 + lam ||x||_1``.

    Coordinates with ``x_i != 0`` use ``sgn(x_i)``, those with ``x_i == 0``
    use the sign of the direction ``p_i``; when both vanish the component is
    ``sgn(c_i) (|c_i| - lam)_+`` with ``c = A^T (A x - y)``, which keeps the
    coordinate pinned at zero whenever the correlation is below ``lam``.
    """
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if A.shape[1] != x.size or x.shape != p.shape or A.shape[0] != np.size(y):
        raise ValueError("inconsistent lasso dimensions")
    c = A.T @ (A @ x - y)
    sgn = np.where(x != 0, np.sign(x), np.sign(p))
    out = c + lam * sgn
    both = (x == 0) & (p == 0)
    if np.any(both):
        cb = c[both]
        out[both] = np.sign(cb) * np.maximum(np.abs(cb) - lam, 0.0)
    return out
