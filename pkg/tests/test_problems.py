import json
from statistics import NormalDist

import numpy as np
import pytest

from nesterov_ode.objectives import evaluate
from nesterov_ode.problems import (
    PROBLEMS,
    cached_instance,
    default_cache_dir,
    generate,
    instance_from_record,
    instance_to_record,
    list_problems,
    load_instance,
    reference_solve,
    save_instance,
    slope_weights,
)

NAMES = list_problems()


def test_catalog_is_complete():
    assert set(NAMES) == {
        "quadratic", "log_sum_exp", "matrix_completion", "lasso_l1_constrained", "slope",
        "lasso", "logistic_sparse", "lasso_fat", "lasso_square", "nls_fat", "nls_square",
        "logistic", "l1_logistic"}


def test_desk_quadratic_condition_number():
    q = generate("quadratic")
    assert q.n == 50
    assert q.objective.L / q.objective.mu == pytest.approx(1000, rel=1e-9)
    assert q.confidence == "analytic"
    assert reference_solve(q).f_star == q.objective.f_star


def test_lasso_fat_shape_and_penalty():
    inst = generate("lasso_fat")
    assert inst.data["A"].shape == (10, 50)
    assert inst.objective.h.lam == 4.0
    assert np.all(inst.x0 == 0)


def test_pinned_draws():
    inst = generate("lasso_fat")
    assert np.allclose(inst.data["A"][0, :3], [-0.59371623, 1.18226083, -0.27247246],
                       rtol=0, atol=1e-8)
    assert np.allclose(inst.data["b"][:2], [-6.90480562, -5.55612244], rtol=0, atol=1e-8)


def test_nls_reuses_lasso_data():
    a, b = generate("lasso_fat"), generate("nls_fat")
    assert np.array_equal(a.data["A"], b.data["A"])
    assert b.objective.h.variant == "nonneg"


def test_matrix_completion_desk():
    inst = generate("matrix_completion")
    M = inst.data["M"]
    assert M.shape == (30, 30)
    sv = np.linalg.svd(M, compute_uv=False)
    assert np.allclose(sv[:2], [2.0, 1.0]) and sv[2] < 1e-12
    assert 0.05 < inst.data["mask"].mean() < 0.15
    assert inst.objective.L == 1.0


def test_slope_weights():
    w = slope_weights(4)
    phi_inv = NormalDist().inv_cdf
    expected = [1.1 * phi_inv(1 - 0.05 * i / 8) for i in range(1, 5)]
    assert np.allclose(w, expected, rtol=1e-12, atol=0)
    assert np.all(np.diff(w) < 0)
    assert slope_weights(1, q=0.05, factor=1.0)[0] == pytest.approx(1.959963984540054, rel=1e-12)


@pytest.mark.parametrize("name", NAMES)
def test_determinism(name):
    a, b = generate(name, seed=3), generate(name, seed=3)
    for key in a.data:
        assert np.array_equal(np.asarray(a.data[key]), np.asarray(b.data[key]))
    assert np.array_equal(a.x0, b.x0)


def test_seeds_differ():
    assert not np.array_equal(generate("lasso", seed=1).data["A"], generate("lasso", seed=2).data["A"])


def test_full_scale_dimensions():
    inst = generate("logistic", scale="paper")
    assert inst.data["A"].shape == (500, 100)
    assert inst.provenance["scale"] == "paper"


def test_errors():
    with pytest.raises(ValueError):
        generate("ridge")
    with pytest.raises(ValueError):
        generate("lasso", scale="huge")


def _feasible_point(inst, rng):
    x = rng.normal(size=inst.n) * 0.5
    h = inst.objective.h
    if h.variant == "nonneg":
        return np.abs(x)
    if h.variant == "l1_ball":
        return x * h.delta / np.abs(x).sum() * rng.random()
    return x


@pytest.mark.parametrize("name", NAMES)
def test_reference_is_a_lower_bound(name):
    inst = cached_instance(name)
    rng = np.random.default_rng(0)
    assert inst.confidence in ("analytic", "converged")
    for _ in range(100):
        x = _feasible_point(inst, rng)
        assert inst.f_star <= evaluate(inst.objective, x) + 1e-12
    assert inst.f_star == pytest.approx(evaluate(inst.objective, inst.x_star), abs=1e-9)


def test_reference_self_consistency():
    inst = generate("lasso_fat")
    a = reference_solve(inst)
    b = reference_solve(inst, max_iter=2_000_000, stall=10_000)
    assert abs(a.f_star - b.f_star) <= 1e-10
    c = reference_solve(inst, x0=np.random.default_rng(1).normal(size=inst.n))
    assert abs(a.f_star - c.f_star) <= 1e-9
    assert a.grad_map_norm <= 1e-13


def test_reference_budget_flag():
    inst = generate("log_sum_exp")
    r = reference_solve(inst, max_iter=50, polish=0)
    assert r.confidence == "budget"


def test_record_round_trip(tmp_path):
    inst = cached_instance("slope", cache_dir=tmp_path)
    rec = instance_to_record(inst)
    again = instance_from_record(json.loads(json.dumps(rec)))
    for key in inst.data:
        assert np.array_equal(np.asarray(inst.data[key]), np.asarray(again.data[key]))
    assert again.f_star == inst.f_star and again.confidence == inst.confidence
    path = tmp_path / "slope.json"
    save_instance(inst, path)
    loaded = load_instance(path)
    x = np.linspace(-1, 1, inst.n)
    assert evaluate(loaded.objective, x) == evaluate(inst.objective, x)


def test_cache_written_once(tmp_path):
    a = cached_instance("lasso", cache_dir=tmp_path)
    path = tmp_path / "lasso-desk-42.json"
    assert path.exists()
    stamp = path.stat().st_mtime_ns
    b = cached_instance("lasso", cache_dir=tmp_path)
    assert path.stat().st_mtime_ns == stamp
    assert a.f_star == b.f_star and np.array_equal(a.x_star, b.x_star)


def test_default_cache_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("NESTEROV_ODE_CACHE", str(tmp_path))
    assert default_cache_dir() == tmp_path


def test_provenance():
    inst = generate("slope", seed=9)
    assert inst.provenance["seed"] == 9 and inst.provenance["scale"] == "desk"
    assert inst.provenance["figure"] == PROBLEMS["slope"][3]
