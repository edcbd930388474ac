import math

import numpy as np
import pytest

from fracdelay.delayed_ml import (
    SeriesParams,
    YQuery,
    build_kernel_for,
    delayed_cos_frac,
    delayed_sin_frac,
    depth_for_horizon,
    y_eval,
    y_eval_grid,
    y_eval_many,
)
from fracdelay.errors import ConvergenceError, DomainError, KernelDepthError, SingularityError
from fracdelay.kernel import kernel_build
from fracdelay.special import MLParams, ml2_matrix

A = np.array([[0.0, 1.0], [-1.0, 0.0]])
OM = np.array([[0.3, 0.1], [0.0, 0.2]])


def table_for(a, om, mu, gammas, h, t_max):
    return build_kernel_for(np.atleast_2d(a), np.atleast_2d(om), mu, gammas, h, t_max)


def test_scalar_two_terms():
    t = table_for(0.0, 1.0, 1.5, [1.0], 1.0, 1.5)
    y = y_eval(t, YQuery(1.5, 1.0, 1.0, 1.5))
    assert y[0, 0] == pytest.approx(1 - 0.5 ** 1.5 / math.gamma(2.5), abs=1e-15)
    assert y[0, 0] == pytest.approx(0.7340385, abs=5e-8)


def test_omega_null_matches_ml_matrix():
    a = np.array([[1.0, 0.5], [0.2, 2.0]])
    tab = table_for(a, np.zeros((2, 2)), 1.5, [1.3], 1.0, 0.9)
    for t in [0.1, 0.5, 0.9]:
        ref = t ** 0.3 * ml2_matrix(MLParams(1.5, 1.3), -a, t ** 1.5)
        assert np.allclose(y_eval(tab, YQuery(1.5, 1.3, 1.0, t)), ref, rtol=1e-12, atol=1e-14)


def test_classical_cosine():
    a = np.diag([1.0, 2.0])
    tab = table_for(a @ a, np.zeros((2, 2)), 2.0, [1.0], 1.0, 1.0)
    assert np.allclose(y_eval(tab, YQuery(2.0, 1.0, 1.0, 1.0)), np.diag([math.cos(1), math.cos(2)]), atol=1e-14)


def test_support_and_identity_at_zero():
    tab = table_for(A, OM, 1.5, [1.0, 2.0], 1.0, 2.0)
    assert not y_eval_many(tab, 1.5, 2.0, 1.0, [-2.0, -0.1, 0.0]).any()
    assert np.array_equal(y_eval(tab, YQuery(1.5, 1.0, 1.0, 0.0)), np.eye(2))
    assert not y_eval(tab, YQuery(1.5, 1.0, 1.0, -1e-9)).any()


def test_singular_at_zero():
    tab = table_for(A, OM, 1.5, [0.75], 1.0, 1.0)
    with pytest.raises(SingularityError):
        y_eval(tab, YQuery(1.5, 0.75, 1.0, 0.0))
    with pytest.raises(SingularityError) as info:
        y_eval_grid(tab, 1.5, 0.75, 1.0, [0.0, 0.5])
    assert info.value.point == 0.0


def test_query_validation():
    for bad in [(1.0, 1.0, 1.0, 0.5), (2.1, 1.0, 1.0, 0.5), (1.5, 0.0, 1.0, 0.5), (1.5, 1.0, 0.0, 0.5)]:
        with pytest.raises(DomainError):
            YQuery(*bad)


def test_series_params_validation():
    with pytest.raises(DomainError):
        SeriesParams(tol=0.0)
    with pytest.raises(DomainError):
        SeriesParams(k_extra=0)
    with pytest.raises(DomainError):
        SeriesParams(k_extra=5, k_hard_max=3)


def test_grid_below_zero_all_null():
    tab = table_for(A, OM, 1.5, [1.5], 1.0, 1.0)
    assert not np.any(y_eval_grid(tab, 1.5, 1.5, 1.0, [-3.0, -2.0, -0.5]))


def test_single_point_grid_matches_eval():
    tab = table_for(A, OM, 1.7, [1.2], 1.0, 2.5)
    assert np.array_equal(y_eval_grid(tab, 1.7, 1.2, 1.0, [2.3])[0], y_eval(tab, YQuery(1.7, 1.2, 1.0, 2.3)))


def test_grid_must_increase():
    tab = table_for(A, OM, 1.5, [1.0], 1.0, 1.0)
    with pytest.raises(DomainError):
        y_eval_grid(tab, 1.5, 1.0, 1.0, [0.5, 0.5])


def test_continuous_across_delay():
    tab = table_for(A, OM, 1.5, [1.0], 1.0, 1.1)
    left, right = y_eval_grid(tab, 1.5, 1.0, 1.0, [1 - 1e-8, 1 + 1e-8])
    assert np.abs(left - right).max() < 1e-6


def test_shallow_table_raises_depth_error():
    tab = kernel_build(A, OM, 3)
    with pytest.raises(KernelDepthError):
        y_eval(tab, YQuery(1.5, 1.0, 1.0, 2.5))
    with pytest.raises(KernelDepthError):
        y_eval(tab, YQuery(1.5, 1.0, 1.0, 4.5))


def test_hard_cap_raises_convergence_error():
    big = 40.0 * np.eye(2)
    tab = kernel_build(big, np.zeros((2, 2)), 30)
    with pytest.raises(ConvergenceError) as info:
        y_eval(tab, YQuery(1.5, 1.0, 1.0, 0.9), SeriesParams(k_hard_max=30))
    assert info.value.last_term > 0


def test_depth_is_sufficient_and_capped():
    p = SeriesParams()
    k = depth_for_horizon(A, OM, 1.5, [1.0, 1.5], 1.0, 5.0, p)
    assert 5 <= k <= p.k_hard_max
    tab = kernel_build(A, OM, k)
    y_eval_many(tab, 1.5, 1.0, 1.0, np.linspace(0.01, 5.0, 40), p)


def test_truncation_soundness():
    grid = np.linspace(0.05, 4.0, 40)
    coarse = y_eval_many(table_for(A, OM, 1.5, [1.5], 1.0, 4.0), 1.5, 1.5, 1.0, grid)
    p = SeriesParams(tol=0.5e-16, k_hard_max=800)
    fine_tab = build_kernel_for(A, OM, 1.5, [1.5], 1.0, 4.0, p)
    fine = y_eval_many(fine_tab, 1.5, 1.5, 1.0, grid, p)
    assert np.abs(fine - coarse).max() < 10 * 1e-16 * max(1.0, np.abs(fine).max())


def test_delayed_cos_pieces():
    om = np.array([[0.0, 2.0], [1.0, 0.0]])
    assert np.array_equal(delayed_cos_frac(om, 1.0, 0.8, -0.5), np.eye(2))
    assert not delayed_cos_frac(om, 1.0, 0.8, -1.5).any()
    w, t = 1.3, 0.4
    assert delayed_cos_frac(np.array([[w]]), 1.0, 1.0, t)[0, 0] == pytest.approx(1 - w * w * t * t / 2, rel=1e-15)


def test_delayed_sin_pieces():
    om = np.array([[0.5, 0.1], [0.2, 0.4]])
    t = -0.3
    assert np.allclose(delayed_sin_frac(om, 1.0, 0.7, t), om * (t + 1.0) ** 0.7 / math.gamma(1.7), rtol=1e-15)
    assert not delayed_sin_frac(om, 1.0, 0.7, -1.2).any()
    t = 0.6
    assert np.allclose(delayed_sin_frac(om, 1.0, 1.0, t), om * (t + 1.0) - np.linalg.matrix_power(om, 3) * t ** 3 / 6,
                       rtol=1e-14)


def test_delayed_cos_alpha_window():
    with pytest.raises(DomainError):
        delayed_cos_frac(np.eye(2), 1.0, 0.5, 0.1)
    with pytest.raises(DomainError):
        delayed_sin_frac(np.eye(2), 1.0, 1.1, 0.1)


def test_laplace_pair():
    from fracdelay.quadrature import QuadParams, integrate_panels
    from fracdelay.solver import kernel_panels

    mu, gamma, h = 1.5, 1.2, 1.0
    margin = 2 * (np.abs(A).sum(axis=0).max() + np.abs(OM).sum(axis=0).max()) ** (1 / mu)
    T_L = 14.0
    tab = table_for(A, OM, mu, [gamma], h, T_L)
    panels = kernel_panels(0.0, T_L, h, mu, gamma, 1e-12)
    for s in margin * np.array([1.5, 2.0, 3.0, 4.0, 5.0]):
        assert math.exp(-(s - margin / 2) * T_L) < 1e-8
        val, _ = integrate_panels(
            lambda x, o: np.exp(-s * x)[..., None, None] * y_eval_many(tab, mu, gamma, h, x),
            panels, np.zeros(len(panels), dtype=int), 1, QuadParams(qtol=1e-12), (2, 2),
        )
        ref = s ** (mu - gamma) * np.linalg.inv(s ** mu * np.eye(2) + A + OM * math.exp(-h * s))
        assert np.abs(val[0] - ref).max() <= 1e-4 * np.abs(ref).max()
