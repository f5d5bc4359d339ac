import numpy as np
import pytest

from projopt import (
    BoxAffineSet,
    DimensionMismatchError,
    DualAscentConfig,
    InfeasibleSetError,
    InvalidBoxError,
    InvalidInputError,
    dual_gradient,
    dual_value,
    kkt_residuals,
    lagrangian_value,
    phi,
    project_box_affine,
)
from projopt.box_affine import _dual_increase

from generators import random_box_affine_instance
from oracles import project_box_affine_bruteforce

DIAGONAL = BoxAffineSet(u=[0.0, 0.0], v=[1.0, 1.0], A=[[1.0, 1.0]], b=[1.0])


def test_set_validation():
    with pytest.raises(InvalidBoxError, match="index 0"):
        BoxAffineSet(u=[1.0], v=[0.0])
    with pytest.raises(DimensionMismatchError):
        BoxAffineSet(u=[0.0], v=[1.0], A=[[1.0, 1.0]], b=[1.0])
    with pytest.raises(DimensionMismatchError):
        BoxAffineSet(u=[0.0, 0.0], v=[1.0, 1.0], A=[[1.0, 1.0]], b=None)
    pure_box = BoxAffineSet(u=[0.0], v=[1.0])
    assert pure_box.num_equalities == 0


def test_phi_interior_branch():
    set_ = BoxAffineSet(u=[-1.0, -1.0], v=[1.0, 1.0], A=[[1.0, 1.0]], b=[0.5])
    result = phi([0.0], [0.3, 0.1], set_)
    assert np.allclose(result.x, [0.3, 0.1])
    assert np.allclose(result.lambda1, 0.0)
    assert np.allclose(result.lambda2, 0.0)


def test_phi_lower_branch():
    set_ = BoxAffineSet(u=[-1.0, -1.0], v=[1.0, 1.0], A=[[1.0, 1.0]], b=[0.0])
    result = phi([2.0], [0.0, 0.0], set_)
    assert np.allclose(result.x, [-1.0, -1.0])
    assert np.allclose(result.lambda1, [1.0, 1.0])
    assert np.allclose(result.lambda2, [0.0, 0.0])


def test_phi_upper_branch():
    result = phi([0.0], [5.0, 0.0], DIAGONAL)
    assert np.allclose(result.x, [1.0, 0.0])
    assert np.allclose(result.lambda1, [0.0, 0.0])
    assert np.allclose(result.lambda2, [4.0, 0.0])


def test_phi_case_invariants():
    rng = np.random.default_rng(21)
    for _ in range(200):
        y, set_ = random_box_affine_instance(rng)
        mu = rng.normal(size=set_.num_equalities)
        result = phi(mu, y, set_)
        assert np.all(result.lambda1 >= 0.0)
        assert np.all(result.lambda2 >= 0.0)
        assert np.all(result.x >= set_.u) and np.all(result.x <= set_.v)
        active_low = result.lambda1 > 0.0
        active_high = result.lambda2 > 0.0
        assert np.array_equal(result.x[active_low], set_.u[active_low])
        assert np.array_equal(result.x[active_high], set_.v[active_high])
        assert not np.any(active_low & active_high)


def test_phi_nonexpansive_through_matrix():
    rng = np.random.default_rng(22)
    for _ in range(200):
        y, set_ = random_box_affine_instance(rng, m=int(rng.integers(1, 3)))
        m1 = rng.normal(size=set_.num_equalities)
        m2 = rng.normal(size=set_.num_equalities)
        dx = np.linalg.norm(phi(m1, y, set_).x - phi(m2, y, set_).x)
        assert dx <= np.linalg.norm(set_.A.T @ (m1 - m2)) + 1e-12


def test_lagrangian_feasible_stationary_point():
    y = np.array([0.4, 0.6])
    result = phi([0.0], y, DIAGONAL)
    assert lagrangian_value(result, [0.0], y, DIAGONAL) == pytest.approx(0.0, abs=1e-15)
    assert lagrangian_value(result, [3.0], y, DIAGONAL) == pytest.approx(0.0, abs=1e-15)


def test_lagrangian_hand_evaluated():
    y = [0.0, 0.0]
    mu = [-0.5]
    result = phi(mu, y, DIAGONAL)
    assert np.allclose(result.x, [0.5, 0.5])
    assert lagrangian_value(result, mu, y, DIAGONAL) == pytest.approx(0.25)


def test_lagrangian_bound_terms_vanish_on_phi_outputs():
    # Complementarity by construction: the bound terms contribute zero.
    rng = np.random.default_rng(23)
    for _ in range(100):
        y, set_ = random_box_affine_instance(rng)
        mu = rng.normal(size=set_.num_equalities)
        p = phi(mu, y, set_)
        bound_terms = float(p.lambda1 @ (set_.u - p.x)) + float(p.lambda2 @ (p.x - set_.v))
        assert abs(bound_terms) <= 1e-12


def test_dual_value_pure_box_is_constant():
    set_ = BoxAffineSet(u=[0.0, 0.0], v=[1.0, 1.0])
    y = np.array([2.0, -0.5])
    expected = 0.5 * float(np.dot(np.clip(y, 0, 1) - y, np.clip(y, 0, 1) - y))
    assert dual_value(np.zeros(0), y, set_) == pytest.approx(expected)


def test_dual_value_hand_evaluated():
    assert dual_value([0.5], [1.0, 1.0], DIAGONAL) == pytest.approx(0.25)


def test_dual_gradient_zero_at_feasible_primal():
    assert np.allclose(dual_gradient([0.5], [1.0, 1.0], DIAGONAL), [0.0], atol=1e-15)


def test_dual_gradient_direct_evaluation():
    assert np.allclose(dual_gradient([0.0], [1.0, 1.0], DIAGONAL), [1.0])


def test_dual_gradient_matches_finite_differences():
    rng = np.random.default_rng(24)
    checked = 0
    while checked < 200:
        y, set_ = random_box_affine_instance(rng, m=int(rng.integers(1, 3)))
        mu = rng.normal(scale=1.5, size=set_.num_equalities)
        z = y - set_.A.T @ mu
        margin = min(np.min(np.abs(z - set_.u)), np.min(np.abs(z - set_.v)))
        if margin < 1e-4:
            continue
        g = dual_gradient(mu, y, set_)
        h = 1e-6
        for k in range(set_.num_equalities):
            e = np.zeros(set_.num_equalities)
            e[k] = h
            fd = (dual_value(mu + e, y, set_) - dual_value(mu - e, y, set_)) / (2 * h)
            assert abs(fd - g[k]) <= 1e-5 * (1.0 + abs(g[k]))
        checked += 1


def test_dual_midpoint_concavity():
    rng = np.random.default_rng(25)
    for _ in range(300):
        y, set_ = random_box_affine_instance(rng, m=int(rng.integers(1, 3)))
        m1 = rng.normal(scale=2.0, size=set_.num_equalities)
        m2 = rng.normal(scale=2.0, size=set_.num_equalities)
        mid = dual_value(0.5 * (m1 + m2), y, set_)
        assert mid >= 0.5 * (dual_value(m1, y, set_) + dual_value(m2, y, set_)) - 1e-9


def test_dual_increase_matches_value_difference():
    # The cancellation-free line-search formula agrees with direct differences
    # at moderate scales where both are accurate.
    rng = np.random.default_rng(26)
    for _ in range(300):
        y, set_ = random_box_affine_instance(rng, m=int(rng.integers(1, 3)))
        mu = rng.normal(size=set_.num_equalities)
        g = rng.normal(size=set_.num_equalities)
        alpha = float(rng.uniform(0.01, 3.0))
        z = y - set_.A.T @ mu
        d = set_.A.T @ g
        direct = dual_value(mu + alpha * g, y, set_) - dual_value(mu, y, set_)
        stable = _dual_increase(set_, z, g, d, alpha)
        assert stable == pytest.approx(direct, abs=1e-9)


def test_project_interior_split():
    result = project_box_affine([1.0, 1.0], DIAGONAL)
    assert result.converged
    assert np.allclose(result.x, [0.5, 0.5], atol=1e-8)
    assert result.mu[0] == pytest.approx(0.5, abs=1e-7)


def test_project_asymmetric_point():
    # True projection is the corner (1, 0); the optimal multiplier is any
    # value on a flat segment of the dual, so only x and optimality of the
    # multiplier are pinned down.
    result = project_box_affine([5.0, 0.0], DIAGONAL)
    assert result.converged
    assert np.allclose(result.x, [1.0, 0.0], atol=1e-8)
    assert np.allclose(dual_gradient(result.mu, [5.0, 0.0], DIAGONAL), 0.0, atol=1e-8)
    residuals = kkt_residuals(result, [5.0, 0.0], DIAGONAL)
    assert max(residuals.values()) <= 1e-8


def test_project_feasible_point_is_identity():
    y = np.array([0.25, 0.75])
    result = project_box_affine(y, DIAGONAL)
    assert result.converged
    assert result.iterations == 0
    assert np.array_equal(result.x, y)
    assert np.allclose(result.mu, 0.0)


def test_project_pure_box_is_clip():
    set_ = BoxAffineSet(u=[0.0, 0.0], v=[1.0, 1.0])
    result = project_box_affine([5.0, -1.0], set_)
    assert result.converged
    assert np.array_equal(result.x, [1.0, 0.0])
    assert result.mu.size == 0


def test_project_matches_bruteforce_oracle():
    rng = np.random.default_rng(27)
    for _ in range(150):
        y, set_ = random_box_affine_instance(rng)
        result = project_box_affine(y, set_)
        oracle = project_box_affine_bruteforce(y, set_.u, set_.v, set_.A, set_.b)
        assert result.converged
        assert np.max(np.abs(result.x - oracle)) <= 1e-6


def test_weak_duality():
    rng = np.random.default_rng(28)
    for _ in range(100):
        y, set_ = random_box_affine_instance(rng)
        oracle = project_box_affine_bruteforce(y, set_.u, set_.v, set_.A, set_.b)
        primal = 0.5 * float(np.dot(oracle - y, oracle - y))
        for _ in range(5):
            mu = rng.normal(scale=2.0, size=set_.num_equalities)
            assert dual_value(mu, y, set_) <= primal + 1e-9


def test_kkt_residuals_on_converged_results():
    rng = np.random.default_rng(29)
    for _ in range(100):
        y, set_ = random_box_affine_instance(rng)
        result = project_box_affine(y, set_)
        assert result.converged
        residuals = kkt_residuals(result, y, set_)
        assert max(residuals.values()) <= 1e-6


def test_kkt_residuals_report_constructed_violations():
    y = np.array([1.0, 1.0])
    clean = project_box_affine(y, DIAGONAL)
    shifted = type(clean)(
        x=clean.x + np.array([0.0, 0.6]),  # pushes x above v by 0.1
        mu=clean.mu,
        lambda1=clean.lambda1,
        lambda2=clean.lambda2,
        equality_residual=clean.equality_residual,
        iterations=clean.iterations,
        converged=clean.converged,
    )
    assert kkt_residuals(shifted, y, DIAGONAL)["box"] == pytest.approx(0.1, abs=1e-7)

    negative = type(clean)(
        x=clean.x,
        mu=clean.mu,
        lambda1=np.array([-1.0, 0.0]),
        lambda2=clean.lambda2,
        equality_residual=clean.equality_residual,
        iterations=clean.iterations,
        converged=clean.converged,
    )
    assert kkt_residuals(negative, y, DIAGONAL)["dual_sign"] == pytest.approx(1.0)


def test_equality_residual_matches_recomputation():
    rng = np.random.default_rng(30)
    for _ in range(50):
        y, set_ = random_box_affine_instance(rng)
        result = project_box_affine(y, set_)
        recomputed = set_.equality_violation(result.x)
        assert abs(result.equality_residual - recomputed) <= 1e-12


def test_zero_row_with_nonzero_rhs_is_infeasible():
    set_ = BoxAffineSet(u=[0.0, 0.0], v=[1.0, 1.0], A=[[0.0, 0.0]], b=[1.0])
    with pytest.raises(InfeasibleSetError, match="row 0"):
        project_box_affine([0.5, 0.5], set_)


def test_divergence_detection_on_empty_set():
    # Max of A x over the box is 2, so b = 5 is unreachable; a large initial
    # step makes the multiplier blow past the divergence bound quickly.
    set_ = BoxAffineSet(u=[0.0, 0.0], v=[1.0, 1.0], A=[[1.0, 1.0]], b=[5.0])
    config = DualAscentConfig(initial_step=1e13)
    with pytest.raises(InfeasibleSetError, match="multiplier"):
        project_box_affine([0.0, 0.0], set_, config)


def test_iteration_cap_returns_best_iterate():
    set_ = BoxAffineSet(u=[0.0, 0.0], v=[1.0, 1.0], A=[[1.0, 1.0]], b=[5.0])
    config = DualAscentConfig(max_iterations=10)
    result = project_box_affine([0.0, 0.0], set_, config)
    assert not result.converged
    assert result.iterations == 10
    assert result.equality_residual > 0.0


def test_idempotence():
    rng = np.random.default_rng(31)
    for _ in range(100):
        y, set_ = random_box_affine_instance(rng)
        once = project_box_affine(y, set_).x
        twice = project_box_affine(once, set_).x
        assert np.max(np.abs(twice - once)) <= 1e-9


def test_nonexpansiveness():
    rng = np.random.default_rng(32)
    for _ in range(100):
        y1, set_ = random_box_affine_instance(rng)
        y2 = rng.uniform(-5, 5, set_.dimension)
        p1 = project_box_affine(y1, set_).x
        p2 = project_box_affine(y2, set_).x
        assert np.linalg.norm(p1 - p2) <= np.linalg.norm(y1 - y2) + 1e-9


def test_config_validation():
    with pytest.raises(InvalidInputError):
        DualAscentConfig(initial_step=0.0)
    with pytest.raises(InvalidInputError):
        DualAscentConfig(backtracking_factor=1.0)
    with pytest.raises(InvalidInputError):
        DualAscentConfig(max_iterations=0)


def test_dimension_checks():
    with pytest.raises(DimensionMismatchError):
        phi([0.0, 0.0], [1.0, 1.0], DIAGONAL)
    with pytest.raises(DimensionMismatchError):
        project_box_affine([1.0, 1.0, 1.0], DIAGONAL)
