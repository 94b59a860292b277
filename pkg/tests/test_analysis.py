import json
import math

import numpy as np
import pytest

from nesterov_ode.analysis import (
    Check,
    cesaro_mean,
    energy_continuous,
    energy_discrete,
    generalized_rate_bound,
    generalized_sum_bound,
    is_nonincreasing,
    linear_rate_fit,
    oscillation_roots,
    rate_bound,
    scaled_error,
    scheme_ode_deviation,
    trapezoid_integral,
    velocity_ratio_max,
    write_series_csv,
    write_summary,
)
from nesterov_ode.objectives import capped_linear, quadratic
from nesterov_ode.ode import OdeParams, closed_form_trace, integrate
from nesterov_ode.problems import cached_instance
from nesterov_ode.schemes import SchemeParams, nesterov_run, speed_restart_run

LAM = np.array([0.04, 0.01])
X0 = np.ones(2)


@pytest.fixture(scope="module")
def fig_trace():
    return integrate(quadratic(LAM), X0, OdeParams(dt=1e-3, T=50))


def test_continuous_energy_initial_values(fig_trace):
    e3 = energy_continuous(fig_trace, np.zeros(2), "continuous_r3")
    assert e3.values[0] == 2 * 2.0
    er = energy_continuous(fig_trace, np.zeros(2), "continuous_r", r=5)
    assert er.values[0] == 4 * 2.0
    assert len(e3) == len(fig_trace)


def test_continuous_energy_at_minimizer():
    tr = integrate(quadratic(LAM), np.zeros(2), OdeParams(dt=1e-2, T=5))
    assert np.all(energy_continuous(tr, np.zeros(2)).values == 0)


def test_continuous_r3_energy_decays(fig_trace):
    e = energy_continuous(fig_trace, np.zeros(2), "continuous_r3")
    assert is_nonincreasing(e, 1e-6)


@pytest.mark.parametrize("name", ["log_sum_exp", "logistic", "quadratic"])
def test_continuous_energy_decays_on_catalog(name):
    inst = cached_instance(name)
    tr = integrate(inst.objective, inst.x0, OdeParams(dt=1e-3, T=10), f_star=inst.f_star)
    e = energy_continuous(tr, inst.x_star, "continuous_r3")
    assert e.max_increase() <= 1e-6 * e.values[0]


@pytest.mark.parametrize("r", [4.0, 5.0])
def test_continuous_r_energy_and_integral(r):
    tr = integrate(quadratic(LAM), X0, OdeParams(r=r, dt=1e-3, T=100))
    e = energy_continuous(tr, np.zeros(2), "continuous_r", r=r)
    assert e.max_increase() <= 1e-6 * e.values[0]
    integral = trapezoid_integral(tr.t, tr.t * tr.f_gap)
    assert integral <= (r - 1) ** 2 * 2.0 / (2 * (r - 3)) * 1.01


def test_continuous_r_warns_below_three():
    tr = integrate(quadratic(LAM), X0, OdeParams(r=2, dt=1e-2, T=1))
    assert energy_continuous(tr, np.zeros(2), "continuous_r", r=2).warning
    with pytest.raises(ValueError):
        energy_continuous(tr, np.zeros(2), "continuous_r", r=1)


def test_continuous_alpha():
    r = 6.0
    tr = integrate(quadratic(LAM), X0, OdeParams(r=r, dt=1e-3, T=60))
    e = energy_continuous(tr, np.zeros(2), "continuous_alpha", r=r, alpha=3.0, mu=0.01)
    assert e.values[0] == 0.0
    with pytest.raises(ValueError):
        energy_continuous(tr, np.zeros(2), "continuous_alpha", r=r, alpha=3.0)
    with pytest.raises(ValueError):
        energy_continuous(tr, np.zeros(2), "continuous_alpha", r=r, alpha=5.0, mu=0.01)
    with pytest.raises(ValueError):
        energy_continuous(tr, np.zeros(2), "mystery")


def test_discrete_energy_initial_value():
    inst = cached_instance("quadratic")
    r, s = 4.0, 1 / inst.objective.L
    t = nesterov_run(inst.objective, inst.x0, SchemeParams(s=s, r=r, k_max=10))
    e = energy_discrete(t, inst.x_star, "discrete_r")
    expected = (2 * (r - 2) ** 2 * s / (r - 1) * t.f_gap[0]
                + (r - 1) * inst.dist0_sq())
    assert e.values[0] == pytest.approx(expected, rel=1e-13)


def test_discrete_energy_at_minimizer():
    t = nesterov_run(quadratic(LAM), np.zeros(2), SchemeParams(s=1.0 / 0.04, r=4, k_max=20))
    assert np.all(energy_discrete(t, np.zeros(2), "discrete_r").values == 0)


def test_discrete_energy_decays_on_desk_quadratic():
    inst = cached_instance("quadratic")
    t = nesterov_run(inst.objective, inst.x0, SchemeParams(s=1 / inst.objective.L, r=4,
                                                           k_max=10_000))
    e = energy_discrete(t, inst.x_star, "discrete_r")
    assert is_nonincreasing(e, 1e-10)


def test_discrete_energy_warnings():
    t = nesterov_run(quadratic(LAM), X0, SchemeParams(s=10.0, r=3, k_max=20))
    assert energy_discrete(t, np.zeros(2), "discrete_r").warning
    assert energy_discrete(t, np.zeros(2), "discrete_t3").warning
    no_x = nesterov_run(quadratic(LAM), X0, SchemeParams(s=10.0, k_max=5), keep_iterates=False)
    with pytest.raises(ValueError):
        energy_discrete(no_x, np.zeros(2))
    gd = speed_restart_run(quadratic(LAM), X0, SchemeParams(s=10.0, k_max=5, restart="speed"))
    with pytest.raises(ValueError):
        energy_discrete(gd, np.zeros(2))


def test_scaled_error_forms(fig_trace):
    assert np.array_equal(scaled_error(fig_trace, 2), fig_trace.t ** 2 * fig_trace.f_gap)
    t = nesterov_run(quadratic([1.0]), np.ones(1), SchemeParams(s=0.25, k_max=50))
    assert np.allclose(scaled_error(t, 3), 0.25 ** 1.5 * t.k ** 3.0 * t.f_gap)
    zero = nesterov_run(quadratic([1.0]), np.zeros(1), SchemeParams(s=0.25, k_max=5))
    assert np.all(scaled_error(zero, 2) == 0)
    with pytest.raises(ValueError):
        scaled_error(t, 0)


def test_r1_scaled_error_grows():
    tr = integrate(quadratic([1.0]), np.ones(1), OdeParams(r=1, dt=1e-3, T=100))
    se = scaled_error(tr, 2)
    at10 = se[np.searchsorted(tr.t, 10.0)]
    assert se.max() >= 2 * at10


def test_r3_scaled_error_bounded():
    tr = integrate(quadratic([1.0]), np.ones(1), OdeParams(r=3, dt=1e-3, T=100))
    assert scaled_error(tr, 2).max() <= 2 * 1.0 * 1.05


def test_low_friction_unbounded_over_decades():
    t = np.arange(0, 200.0, 1e-2)
    tr = closed_form_trace([1.0], np.ones(1), t, r=1)
    se = scaled_error(tr, 2)
    decades = [(1, 10), (10, 100), (100, 200)]
    peaks = [se[(t >= a) & (t < b)].max() for a, b in decades]
    assert peaks[-1] / peaks[0] >= 2


def test_tightness_anchor():
    for x0 in (1.0, 4.0):
        tr = integrate(capped_linear(), np.array([x0]), OdeParams(dt=1e-3, T=4 * math.sqrt(x0)),
                       f_star=0.0)
        se = scaled_error(tr, 2)
        i = int(np.argmax(se))
        assert abs(se[i] - 2 * x0 ** 2) <= 0.05 * 2 * x0 ** 2
        assert abs(tr.t[i] - 2 * math.sqrt(x0)) <= 0.05


def test_theorem7_quadratic_r25():
    r = 2.5
    x0 = np.array([1.0, 2.0])
    tr = integrate(quadratic([1.0, 1.0]), x0, OdeParams(r=r, dt=1e-3, T=60))
    bound = (r - 1) ** 2 * float(x0 @ x0) / 2
    assert scaled_error(tr, 2).max() <= bound * 1.05


def test_cesaro_lower_bound():
    t = np.arange(0, 200.0 + 1e-9, 1e-2)
    tr = closed_form_trace(LAM, X0, t)
    lower = 0.5 * sum(2 * 1.0 / (math.pi * math.sqrt(l)) for l in LAM)
    assert cesaro_mean(tr, 3) >= lower


def test_roots_of_oscillating_mode():
    mu = 0.04
    tr = integrate(quadratic([mu]), np.ones(1), OdeParams(dt=1e-3, T=170))
    roots = oscillation_roots(tr)
    assert len(roots) >= 10
    roots = np.array(roots[:10])
    assert roots[0] < 7.6635 / math.sqrt(mu)
    assert np.all(np.diff(roots) < 7.6635 / math.sqrt(mu))
    assert np.all(roots[2:] - roots[:-2] > math.pi / math.sqrt(mu))


def test_roots_empty_for_resting_state():
    tr = integrate(quadratic([0.04]), np.zeros(1), OdeParams(dt=1e-2, T=10))
    assert oscillation_roots(tr) == []


def test_roots_of_explicit_signal(fig_trace):
    roots = oscillation_roots(fig_trace, signal=np.cos(fig_trace.t))
    assert roots[0] == pytest.approx(math.pi / 2, abs=1e-6)


def test_velocity_ratio_lemma():
    L = 1.0
    t_end = 0.5 * math.sqrt(12 / L)
    tr = integrate(quadratic([L]), np.ones(1), OdeParams(dt=1e-4, T=t_end))
    t_end = tr.t[-1]
    bound = 1.0 / (4 * (1 - L * t_end ** 2 / 12)) + 1e-3
    assert velocity_ratio_max(tr, t_end) <= bound


def test_velocity_ratio_small_time():
    tr = integrate(quadratic([1.0]), np.ones(1), OdeParams(dt=1e-5, T=0.05))
    assert velocity_ratio_max(tr, 0.05, t_min=0.049) == pytest.approx(0.25, abs=1e-2)
    rest = integrate(quadratic([1.0]), np.zeros(1), OdeParams(dt=1e-3, T=1))
    assert velocity_ratio_max(rest, 1.0) == 0.0
    with pytest.raises(ValueError):
        velocity_ratio_max(rest, 2.0)


def test_deviation_of_identical_traces():
    h = 0.01
    tr = integrate(quadratic(LAM), X0, OdeParams(dt=h, T=5))
    it = nesterov_run(quadratic(LAM), X0, SchemeParams(s=h * h, k_max=500))
    it.x[:] = tr.X
    assert scheme_ode_deviation(it, tr) == 0.0
    short = integrate(quadratic(LAM), X0, OdeParams(dt=h, T=1))
    with pytest.raises(ValueError):
        scheme_ode_deviation(it, short)


def test_linear_fit_synthetic():
    k = np.arange(0, 100)
    slope, r2 = linear_rate_fit((k, 0.9 ** k), (0, 99))
    assert slope == pytest.approx(math.log(0.9), abs=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        linear_rate_fit((k, np.zeros(100)), (0, 99))
    with pytest.raises(ValueError):
        linear_rate_fit((k, 0.9 ** k), (200, 300))


def test_linear_fit_on_speed_restart():
    inst = cached_instance("quadratic")
    t = speed_restart_run(inst.objective, inst.x0,
                          SchemeParams(s=1 / inst.objective.L, k_max=2000, restart="speed"))
    slope, r2 = linear_rate_fit(t, (100, 1000))
    assert slope < 0 and r2 >= 0.9


def test_bounds():
    assert rate_bound(0, 2.0, 0.5) == 8.0
    assert generalized_rate_bound(1, 2.0, 1.0, 3) == pytest.approx(4 * 2 / (2 * 4))
    assert generalized_sum_bound(2.0, 1.0, 5) == pytest.approx(16 * 2 / 4)
    with pytest.raises(ValueError):
        generalized_sum_bound(1.0, 1.0, 3)


def test_writers(tmp_path):
    write_series_csv(tmp_path / "s.csv", [0, 1], [0.1, 1 / 3], ("t", "v"))
    assert (tmp_path / "s.csv").read_text() == "t,v\n0.0,0.1\n1.0,0.3333333333333333\n"
    rec = write_summary(tmp_path / "x.json", [Check("a", 1.0, 0.5, True)], {"seed": 1})
    assert rec["passed"] and rec["seed"] == 1
    assert '"measured": 0.5' in (tmp_path / "x.json").read_text()


def test_summary_keeps_numpy_verdicts_boolean(tmp_path):
    write_summary(tmp_path / "x.json", [Check("a", np.float64(1.0), np.float64(2.0),
                                              np.float64(2.0) <= 1.0)])
    rec = json.loads((tmp_path / "x.json").read_text())
    assert rec["checks"][0]["passed"] is False
    assert rec["passed"] is False
