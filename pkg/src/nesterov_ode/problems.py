"""Seeded test problems and their reference optima.

Each generator draws its raw data (matrices, vectors, penalty weights) from
named random streams, so ``generate(name, scale, seed)`` is reproducible
bit for bit.  The raw data is kept in ``ProblemInstance.data`` and the
objective is rebuilt from it, which is also how JSON records are loaded.

Desk-scale dimensions (the default) are roughly a tenth of the original
linear sizes; ``scale="paper"`` gives the full sizes where they are
practical in dense form.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .objectives import (
    CompositeObjective,
    dense_quadratic,
    least_squares,
    log_sum_exp,
    logistic,
    masked_least_squares,
)
from .prox import ProxSpec
from .rng import stream

__all__ = [
    "ProblemInstance",
    "ReferenceResult",
    "PROBLEMS",
    "generate",
    "reference_solve",
    "slope_weights",
    "instance_to_record",
    "instance_from_record",
    "save_instance",
    "load_instance",
    "cached_instance",
    "list_problems",
]

SCALES = ("desk", "paper")


@dataclass
class ProblemInstance:
    name: str
    objective: CompositeObjective
    x0: np.ndarray
    data: dict
    scale: str = "desk"
    seed: int = 42
    f_star: float | None = None
    x_star: np.ndarray | None = None
    confidence: str = "unsolved"
    provenance: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.objective.n

    def with_reference(self, ref: "ReferenceResult"):
        self.f_star = ref.f_star
        self.x_star = ref.x_star
        self.confidence = ref.confidence
        return self

    def dist0_sq(self):
        if self.x_star is None:
            raise ValueError("instance has no reference solution")
        d = self.x0 - self.x_star
        return float(d @ d)


# ---------------------------------------------------------------------------
# generators: each returns (data, x0) with data holding arrays and scalars

def _gaussian(seed, name, label, shape, var=1.0):
    return stream(seed, name, label).normal(shape, scale=math.sqrt(var))


def _sparse_signal(seed, name, p, k, var=1.0):
    idx = stream(seed, name, "support").permutation(p)[:k]
    x = np.zeros(p)
    x[np.sort(idx)] = _gaussian(seed, name, "signal", k, var)
    return x


def _gen_quadratic(seed, dims):
    n = dims["n"]
    name = "quadratic"
    eig = stream(seed, name, "eig").uniform(n, 0.001, 1.0)
    eig[0], eig[-1] = 0.001, 1.0
    Q = stream(seed, name, "Q").orthogonal(n)
    A = (Q * eig) @ Q.T
    A = 0.5 * (A + A.T)
    b = _gaussian(seed, name, "b", n, 25.0)
    return {"A": A, "b": b}, np.zeros(n)


def _gen_lasso_design(name, var_b):
    def gen(seed, dims):
        m, n = dims["m"], dims["n"]
        A = _gaussian(seed, name, "A", (m, n))
        b = _gaussian(seed, name, "b", m, var_b)
        return {"A": A, "b": b, "lam": 4.0}, np.zeros(n)
    return gen


def _gen_nls(source, var_b):
    def gen(seed, dims):
        # same design and response as the matching lasso instance
        m, n = dims["m"], dims["n"]
        A = _gaussian(seed, source, "A", (m, n))
        b = _gaussian(seed, source, "b", m, var_b)
        return {"A": A, "b": b}, np.zeros(n)
    return gen


def _logistic_labels(seed, name, A, x_true):
    prob = 1.0 / (1.0 + np.exp(-(A @ x_true)))
    return (stream(seed, name, "labels").uniform(A.shape[0]) < prob).astype(float)


def _gen_logistic(seed, dims):
    m, n = dims["m"], dims["n"]
    name = "logistic"
    A = _gaussian(seed, name, "A", (m, n))
    x_true = _gaussian(seed, name, "x_true", n, 0.01)
    return {"A": A, "y": _logistic_labels(seed, name, A, x_true)}, np.zeros(n)


def _gen_l1_logistic(seed, dims):
    m, n, k = dims["m"], dims["n"], dims["k"]
    name = "l1_logistic"
    A = _gaussian(seed, name, "A", (m, n))
    x_true = _sparse_signal(seed, name, n, k, 225.0)
    return {"A": A, "y": _logistic_labels(seed, name, A, x_true), "lam": 5.0}, np.zeros(n)


def _gen_logistic_sparse(seed, dims):
    m, n, density = dims["m"], dims["n"], dims["density"]
    name = "logistic_sparse"
    A = _gaussian(seed, name, "A", (m, n)) * stream(seed, name, "mask").bernoulli(density, (m, n))
    x_true = _gaussian(seed, name, "x_true", n, 0.25)
    return {"A": A, "y": _logistic_labels(seed, name, A, x_true)}, np.zeros(n)


def _gen_log_sum_exp(seed, dims):
    m, n = dims["m"], dims["n"]
    name = "log_sum_exp"
    A = _gaussian(seed, name, "A", (m, n))
    b = _gaussian(seed, name, "b", m, 2.0)
    return {"A": A, "b": b, "rho": 20.0}, np.zeros(n)


def _gen_matrix_completion(seed, dims):
    d, rank, frac = dims["d"], dims["rank"], dims["observed"]
    name = "matrix_completion"
    U = stream(seed, name, "U").orthogonal(d)[:, :rank]
    V = stream(seed, name, "V").orthogonal(d)[:, :rank]
    M = (U * np.arange(1.0, rank + 1)) @ V.T
    mask = stream(seed, name, "mask").bernoulli(frac, (d, d))
    return {"M": M, "mask": mask.astype(float), "lam": 0.05}, np.zeros(d * d)


def _gen_lasso_l1_constrained(seed, dims):
    m, n, density, k = dims["m"], dims["n"], dims["density"], dims["k"]
    name = "lasso_l1_constrained"
    A = _gaussian(seed, name, "A", (m, n), 0.04) * stream(seed, name, "mask").bernoulli(
        density, (m, n))
    x_true = _sparse_signal(seed, name, n, k)
    b = A @ x_true + _gaussian(seed, name, "noise", m)
    return {"A": A, "b": b, "delta": float(np.abs(x_true).sum())}, np.zeros(n)


def slope_weights(p, q=0.05, factor=1.1):
    """``factor * Phi^{-1}(1 - q i / (2p))`` for ``i = 1..p``."""
    i = np.arange(1, p + 1)
    return factor * ndtri(1.0 - q * i / (2.0 * p))


def _gen_slope(seed, dims):
    m, n, k = dims["m"], dims["n"], dims["k"]
    name = "slope"
    A = _gaussian(seed, name, "A", (m, n))
    x_true = _sparse_signal(seed, name, n, k, 25.0)
    b = A @ x_true + _gaussian(seed, name, "noise", m)
    return {"A": A, "b": b, "weights": slope_weights(n)}, np.zeros(n)


def _gen_lasso(seed, dims):
    m, n, k = dims["m"], dims["n"], dims["k"]
    name = "lasso"
    A = _gaussian(seed, name, "A", (m, n))
    x_true = _sparse_signal(seed, name, n, k, 25.0)
    b = A @ x_true + _gaussian(seed, name, "noise", m)
    return {"A": A, "b": b, "lam": 1.5 * math.sqrt(2.0 * math.log(n))}, np.zeros(n)


# ---------------------------------------------------------------------------
# objective builders (data -> CompositeObjective)

def _build(name, data):
    if name == "quadratic":
        g = dense_quadratic(data["A"], data["b"])
        return CompositeObjective(g, ProxSpec.zero(), name=name, f_star=g.f_star,
                                  x_star=g.x_star)
    if name in ("lasso_fat", "lasso_square", "lasso"):
        return CompositeObjective(least_squares(data["A"], data["b"]),
                                  ProxSpec.l1(data["lam"]), name=name)
    if name in ("nls_fat", "nls_square"):
        return CompositeObjective(least_squares(data["A"], data["b"], scale=1.0),
                                  ProxSpec.nonneg(), name=name)
    if name in ("logistic", "logistic_sparse"):
        return CompositeObjective(logistic(data["A"], data["y"]), ProxSpec.zero(), name=name)
    if name == "l1_logistic":
        return CompositeObjective(logistic(data["A"], data["y"]), ProxSpec.l1(data["lam"]),
                                  name=name)
    if name == "log_sum_exp":
        return CompositeObjective(log_sum_exp(data["A"], data["b"], data["rho"]),
                                  ProxSpec.zero(), name=name)
    if name == "matrix_completion":
        d = data["M"].shape[0]
        return CompositeObjective(masked_least_squares(data["mask"] > 0, data["M"]),
                                  ProxSpec.nuclear(data["lam"], d, d), name=name)
    if name == "lasso_l1_constrained":
        return CompositeObjective(least_squares(data["A"], data["b"]),
                                  ProxSpec.l1_ball(data["delta"]), name=name)
    if name == "slope":
        return CompositeObjective(least_squares(data["A"], data["b"]),
                                  ProxSpec.sorted_l1(data["weights"]), name=name)
    raise ValueError(f"unknown problem {name!r}")


# name -> (generator, desk dims, paper dims, figure id, description)
PROBLEMS = {
    "quadratic": (_gen_quadratic, {"n": 50}, {"n": 500}, "fig7a",
                  "0.5 x'Ax + b'x, eigenvalues in [0.001, 1], b ~ N(0, 25)"),
    "log_sum_exp": (_gen_log_sum_exp, {"m": 200, "n": 50}, {"m": 200, "n": 50}, "fig7b",
                    "rho log sum exp((a_i'x - b_i)/rho), rho = 20"),
    "matrix_completion": (_gen_matrix_completion, {"d": 30, "rank": 2, "observed": 0.1},
                          {"d": 300, "rank": 5, "observed": 0.1}, "fig7c",
                          "0.5 ||P(X - M)||_F^2 + 0.05 ||X||_*"),
    "lasso_l1_constrained": (_gen_lasso_l1_constrained,
                             {"m": 100, "n": 500, "density": 0.01, "k": 5},
                             {"m": 5000, "n": 50000, "density": 0.005, "k": 250}, "fig7d",
                             "0.5 ||Ax - b||^2 s.t. ||x||_1 <= ||x_true||_1, sparse A"),
    "slope": (_gen_slope, {"m": 40, "n": 200, "k": 2}, {"m": 1000, "n": 10000, "k": 20},
              "fig7e", "0.5 ||Ax - b||^2 + sorted-l1 with BH-type weights"),
    "lasso": (_gen_lasso, {"m": 100, "n": 50, "k": 2}, {"m": 1000, "n": 500, "k": 20}, "fig7f",
              "0.5 ||Ax - b||^2 + 1.5 sqrt(2 log p) ||x||_1"),
    "logistic_sparse": (_gen_logistic_sparse, {"m": 200, "n": 20, "density": 0.1},
                        {"m": 20000, "n": 2000, "density": 0.001}, "fig7h",
                        "logistic loss, sparse Gaussian design (dense stand-in)"),
    "lasso_fat": (_gen_lasso_design("lasso_fat", 25.0), {"m": 10, "n": 50},
                  {"m": 100, "n": 500}, "fig4a", "0.5 ||Ax - b||^2 + 4 ||x||_1, b ~ N(0, 25)"),
    "lasso_square": (_gen_lasso_design("lasso_square", 9.0), {"m": 50, "n": 50},
                     {"m": 500, "n": 500}, "fig4b", "0.5 ||Ax - b||^2 + 4 ||x||_1, b ~ N(0, 9)"),
    "nls_fat": (_gen_nls("lasso_fat", 25.0), {"m": 10, "n": 50}, {"m": 100, "n": 500}, "fig4c",
                "||Ax - b||^2 s.t. x >= 0, lasso_fat data"),
    "nls_square": (_gen_nls("lasso_square", 9.0), {"m": 50, "n": 50}, {"m": 500, "n": 500},
                   "fig4d", "||Ax - b||^2 s.t. x >= 0, lasso_square data"),
    "logistic": (_gen_logistic, {"m": 50, "n": 10}, {"m": 500, "n": 100}, "fig4e",
                 "logistic loss, labels from x_true ~ N(0, 1/100)"),
    "l1_logistic": (_gen_l1_logistic, {"m": 20, "n": 100, "k": 1},
                    {"m": 200, "n": 1000, "k": 10}, "fig4f",
                    "logistic loss + 5 ||x||_1, sparse x_true ~ N(0, 225)"),
}


def list_problems():
    return sorted(PROBLEMS)


def generate(name, scale="desk", seed=42) -> ProblemInstance:
    if name not in PROBLEMS:
        raise ValueError(f"unknown problem {name!r}; known: {', '.join(list_problems())}")
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {SCALES}, got {scale!r}")
    gen, desk, paper, fig, desc = PROBLEMS[name]
    dims = desk if scale == "desk" else paper
    data, x0 = gen(int(seed), dims)
    obj = _build(name, data)
    inst = ProblemInstance(name, obj, x0, data, scale, int(seed),
                           provenance={"figure": fig, "seed": int(seed), "scale": scale,
                                       "dims": dict(dims), "description": desc})
    if obj.f_star is not None:
        inst.f_star = obj.f_star
        inst.x_star = obj.x_star
        inst.confidence = "analytic"
    return inst


# ---------------------------------------------------------------------------
# reference optimum

@dataclass
class ReferenceResult:
    f_star: float
    x_star: np.ndarray
    iterations: int
    grad_map_norm: float
    confidence: str


@np.errstate(over="ignore", invalid="ignore")
def reference_solve(instance, max_iter=1_000_000, tol=1e-13, stall=5000, k_min=10,
                    x0=None, polish=20000) -> ReferenceResult:
    """Best objective value found by the speed-restarted proximal scheme.

    Stops after ``max_iter`` iterations, when the gradient mapping norm drops
    to ``tol``, or when the best value has not improved for ``stall``
    iterations (round-off floor).  Objectives with a known optimum return it
    directly with confidence ``"analytic"``.  ``grad_map_norm`` is measured
    at the returned point.
    """
    obj = instance.objective if isinstance(instance, ProblemInstance) else instance
    if obj.f_star is not None and obj.x_star is not None:
        return ReferenceResult(float(obj.f_star), np.array(obj.x_star), 0, 0.0, "analytic")
    if x0 is None:
        x0 = instance.x0 if isinstance(instance, ProblemInstance) else np.zeros(obj.n)
    g, h = obj.g, obj.h
    s = 1.0 / obj.L
    x_prev = np.array(x0, dtype=float)
    y = x_prev.copy()
    best_f = obj.value(x_prev)
    best_x = x_prev.copy()
    last_improve = 0
    step_prev = 0.0
    gnorm = math.inf
    j = 1
    confidence = "budget"
    k = 0
    for k in range(1, max_iter + 1):
        x = h.prox(y - s * g.grad(y), s)
        gnorm = float(np.linalg.norm(y - x)) / s
        fx = obj.value(x)
        if fx < best_f:
            best_f, best_x, last_improve = fx, x, k
        if gnorm <= tol:
            confidence = "converged"
            break
        if k - last_improve > stall:
            confidence = "floor"
            break
        step = float(np.linalg.norm(x - x_prev))
        y = x + (j - 1.0) / (j + 2.0) * (x - x_prev)
        if step < step_prev and j >= k_min:
            j = 1
        else:
            j += 1
        step_prev = step
        x_prev = x
    # the loop measures G_s at the extrapolated point y; once converged, x is
    # within s * tol of y.  Otherwise polish the best point with plain
    # proximal gradient steps, which are monotone up to round-off.
    if confidence != "converged":
        x = best_x
    for _ in range(polish + 1):
        x_next = h.prox(x - s * g.grad(x), s)
        gnorm = float(np.linalg.norm(x - x_next)) / s
        if gnorm <= tol:
            break
        x = x_next
    best_f = min(best_f, obj.value(x))
    return ReferenceResult(float(best_f), x, k, gnorm, confidence)


# ---------------------------------------------------------------------------
# records

def instance_to_record(inst: ProblemInstance) -> dict:
    data = {}
    for key, val in inst.data.items():
        if isinstance(val, np.ndarray):
            data[key] = {"shape": list(val.shape), "values": [float(v) for v in val.ravel()]}
        else:
            data[key] = float(val)
    return {
        "name": inst.name,
        "scale": inst.scale,
        "seed": inst.seed,
        "n": inst.n,
        "provenance": inst.provenance,
        "data": data,
        "x0": [float(v) for v in inst.x0],
        "f_star": inst.f_star,
        "x_star": None if inst.x_star is None else [float(v) for v in inst.x_star],
        "confidence": inst.confidence,
    }


def instance_from_record(rec: dict) -> ProblemInstance:
    data = {}
    for key, val in rec["data"].items():
        if isinstance(val, dict):
            data[key] = np.array(val["values"], dtype=float).reshape(val["shape"])
        else:
            data[key] = val
    obj = _build(rec["name"], data)
    inst = ProblemInstance(rec["name"], obj, np.array(rec["x0"], dtype=float), data,
                           rec["scale"], rec["seed"], provenance=rec.get("provenance", {}))
    inst.f_star = rec.get("f_star")
    xs = rec.get("x_star")
    inst.x_star = None if xs is None else np.array(xs, dtype=float)
    inst.confidence = rec.get("confidence", "unsolved")
    return inst


def save_instance(inst: ProblemInstance, path):
    with open(path, "w") as fh:
        json.dump(instance_to_record(inst), fh)
        fh.write("\n")


def load_instance(path) -> ProblemInstance:
    with open(path) as fh:
        return instance_from_record(json.load(fh))


def default_cache_dir():
    env = os.environ.get("NESTEROV_ODE_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "nesterov_ode"


def cached_instance(name, scale="desk", seed=42, cache_dir=None, **solve_kw) -> ProblemInstance:
    """Generate an instance with its reference optimum, reusing a cached record.

    The record is written once; later calls load it if the regenerated data
    matches (the generator is deterministic, so it always should).
    """
    inst = generate(name, scale, seed)
    if inst.confidence == "analytic":
        return inst
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = cache / f"{name}-{scale}-{seed}.json"
    if path.exists():
        try:
            rec = json.loads(path.read_text())
            if rec.get("x_star") is not None and rec.get("x0") == [float(v) for v in inst.x0]:
                inst.f_star = rec["f_star"]
                inst.x_star = np.array(rec["x_star"], dtype=float)
                inst.confidence = rec["confidence"]
                return inst
        except (ValueError, KeyError):
            pass
    inst.with_reference(reference_solve(inst, **solve_kw))
    cache.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    save_instance(inst, tmp)
    os.replace(tmp, path)
    return inst
