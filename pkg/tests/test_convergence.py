import numpy as np
import pytest

from ocaselect import (
    DescentProblem,
    check_linear_bound,
    check_sublinear_bound,
    gradient_check,
    lemma1_check,
    make_quadratic,
    rcd_run,
)


def test_make_quadratic_trivial():
    p = make_quadratic(1, 1.0, seed=0)
    assert p.Q.shape == (1, 1)
    assert p.sigma == 1.0
    assert p.L_max == 1.0
    assert abs(np.linalg.norm(p.x0 - p.x_star) - 10.0) < 1e-9


def test_make_quadratic_spectrum():
    p = make_quadratic(2, 4.0, seed=3)
    eigs = np.linalg.eigvalsh(p.Q)
    assert np.allclose(eigs, [1.0, 4.0])
    assert abs(p.sigma - 1.0) < 1e-10
    assert p.L_max <= 4.0 + 1e-12
    d = make_quadratic(2, 4.0, seed=3, rotate=False)
    assert d.L_max == 4.0
    assert d.sigma == 1.0


def test_make_quadratic_deterministic():
    a = make_quadratic(5, 50.0, seed=11)
    b = make_quadratic(5, 50.0, seed=11)
    assert np.array_equal(a.Q, b.Q)
    assert np.array_equal(a.b, b.b)
    assert np.array_equal(a.x0, b.x0)


def test_problem_validation():
    with pytest.raises(ValueError):
        DescentProblem(Q=np.array([[1.0, 2.0], [0.0, 1.0]]), b=np.zeros(2), x0=np.zeros(2))
    with pytest.raises(ValueError):
        DescentProblem(Q=np.diag([1.0, -1.0]), b=np.zeros(2), x0=np.zeros(2))


def test_problem_r0_is_tight_sublevel_radius():
    p = make_quadratic(4, 10.0, seed=2)
    # R0^2 = 2 * gap0 / sigma for a quadratic
    assert p.R0 == pytest.approx(np.sqrt(2.0 * p.initial_gap() / p.sigma))


def test_one_step_exact_on_unit_quadratic():
    p = DescentProblem(Q=np.array([[1.0]]), b=np.zeros(1), x0=np.array([1.0]))
    trace = rcd_run(p, 3, seed=0)
    assert trace.values[1] == pytest.approx(p.f_star, abs=1e-15)
    assert trace.values[0] == pytest.approx(0.5)


def test_descent_non_increasing():
    for seed in range(5):
        p = make_quadratic(6, 30.0, seed=seed)
        trace = rcd_run(p, 500, seed=seed + 100)
        diffs = np.diff(trace.values)
        assert (diffs <= 1e-9 * max(1.0, p.initial_gap())).all()


def test_diagonal_converges_to_optimum():
    p = DescentProblem(Q=np.diag([1.0, 4.0]), b=np.array([1.0, 2.0]),
                       x0=np.array([5.0, -3.0]))
    trace = rcd_run(p, 4000, seed=1)
    assert trace.values[-1] - p.f_star < 1e-8


def test_sublevel_containment():
    for seed in range(5):
        p = make_quadratic(5, 20.0, seed=seed)
        trace = rcd_run(p, 300, seed=seed)
        assert trace.max_distance_to_opt <= p.R0 * (1 + 1e-9)


def test_rcd_deterministic():
    p = make_quadratic(4, 12.0, seed=0)
    a = rcd_run(p, 100, seed=5)
    b = rcd_run(p, 100, seed=5)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.indices, b.indices)


def test_gradient_matches_finite_differences():
    for seed in range(3):
        p = make_quadratic(6, 40.0, seed=seed)
        assert gradient_check(p, n_points=10, seed=seed) < 1e-6


def test_linear_rate_factor_diag_1_4():
    p = DescentProblem(Q=np.diag([1.0, 4.0]), b=np.zeros(2), x0=np.array([3.0, 1.0]))
    assert p.linear_rate() == 0.875  # 1 - 1/(2*4), exact


def test_bounds_hold_small_battery():
    p = make_quadratic(5, 25.0, seed=7)
    sub = check_sublinear_bound(p, 400, 40, seed=0)
    lin = check_linear_bound(p, 400, 40, seed=0)
    assert sub.passed and sub.descent_ok
    assert lin.passed and lin.descent_ok
    assert sub.max_ratio < 1.0  # the sublinear bound is loose in practice
    assert lin.mean_gap[0] == pytest.approx(p.initial_gap())


def test_bound_checks_require_enough_runs():
    p = make_quadratic(2, 4.0, seed=0)
    with pytest.raises(ValueError):
        check_sublinear_bound(p, 50, 10, seed=0)
    with pytest.raises(ValueError):
        check_linear_bound(p, 50, 29, seed=0)


def test_fault_injection_detected():
    # doubled step stalls the stiffest coordinate: bounds must flag it
    p = DescentProblem(Q=np.diag([1.0, 4.0]), b=np.zeros(2), x0=np.array([3.0, 7.0]))
    bad = 2.0 / p.L_max
    lin = check_linear_bound(p, 800, 40, seed=0, step_size=bad)
    assert not lin.passed


def test_lemma1_recurrence_examples():
    # a=1, u0=0.25: u1 = 0.1875 <= 1/1; u4 <= 1/4
    rep = lemma1_check(1.0, 0.25, 10)
    assert rep.passed
    u1 = 0.25 - 0.25**2
    assert u1 == 0.1875 and u1 <= 1.0
    u = 0.25
    for _ in range(4):
        u = u - u * u
    assert u <= 0.25

    # u0 = 1/(4a): u1 = 3/(16a)
    for a in (0.5, 1.0, 2.0):
        u0 = 0.25 / a
        u1 = u0 - a * u0 * u0
        assert u1 == pytest.approx(3.0 / (16.0 * a))
        assert lemma1_check(a, u0, 1000).passed


def test_lemma1_non_increasing_nonnegative():
    rep = lemma1_check(2.0, 0.1, 500)
    assert rep.passed
    u = 0.1
    for _ in range(500):
        nxt = u - 2.0 * u * u
        assert 0.0 <= nxt <= u
        u = nxt


def test_lemma1_preconditions():
    with pytest.raises(ValueError):
        lemma1_check(-1.0, 0.1, 10)
    with pytest.raises(ValueError):
        lemma1_check(1.0, 0.3, 10)  # above 1/(4a)
    with pytest.raises(ValueError):
        lemma1_check(1.0, 0.0, 10)
