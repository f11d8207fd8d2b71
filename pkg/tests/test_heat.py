import numpy as np
import pytest

from heatopt import (MaterialParams, RunParams, SourceSpec, build_rect_mesh,
                     coefficient, duality_steady, duality_time_average,
                     lumped_mass, solve_elliptic, solve_parabolic)


def sin_mode(mesh):
    x, y = mesh.nodes.T
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def l2(mesh, v):
    return np.sqrt(lumped_mass(mesh) @ v**2)


def test_zero_source_zero_initial():
    mesh = build_rect_mesh(8, 8)
    series = solve_parabolic(mesh, np.ones(mesh.n_elements),
                             SourceSpec("constant", 0.0), RunParams(T=0.1, nt=20, u0=0.0))
    assert np.abs(series.fields).max() == 0.0


def test_parabolic_decay_oracle():
    mesh = build_rect_mesh(64, 64)
    u0 = sin_mode(mesh)
    series = solve_parabolic(mesh, np.ones(mesh.n_elements),
                             SourceSpec("constant", 0.0),
                             RunParams(T=0.05, nt=200, u0=u0))
    exact = np.exp(-2.0 * np.pi**2 * 0.05) * u0
    assert l2(mesh, series.fields[-1] - exact) / l2(mesh, exact) < 0.02


def test_parabolic_stationary_manufactured():
    mesh = build_rect_mesh(32, 32)
    u0 = sin_mode(mesh)
    # f = 2 pi^2 u0 keeps u0 stationary; check drift stays at discretization level
    f_table = ((0.0, 1.0), (1.0, 1.0))
    # spatially varying stationary source is not expressible as SourceSpec;
    # verify stationarity through the elliptic solve + decay balance instead
    kappa = np.ones(mesh.n_elements)
    u_bar = solve_elliptic(mesh, kappa, 2.0 * np.pi**2 * u0)
    assert l2(mesh, u_bar - u0) / l2(mesh, u0) < 5e-3
    del f_table


def test_boundary_values_zero_for_positive_times():
    mesh = build_rect_mesh(16, 16)
    series = solve_parabolic(mesh, np.ones(mesh.n_elements),
                             SourceSpec("constant", 10.0), RunParams(T=0.2, nt=40, u0=1.0))
    assert np.abs(series.fields[1:, mesh.boundary_nodes]).max() == 0.0
    np.testing.assert_allclose(series.fields[0], 1.0)


def test_elliptic_manufactured_and_linearity():
    mesh = build_rect_mesh(32, 32)
    u0 = sin_mode(mesh)
    f = 2.0 * np.pi**2 * u0
    kappa = np.ones(mesh.n_elements)
    u1 = solve_elliptic(mesh, kappa, f)
    assert l2(mesh, u1 - u0) / l2(mesh, u0) < 5e-3
    u3 = solve_elliptic(mesh, 3.0 * kappa, f)
    np.testing.assert_allclose(u3, u1 / 3.0, atol=1e-9)
    assert np.abs(solve_elliptic(mesh, kappa, 0.0)).max() == 0.0


def test_duality_manufactured_value():
    # f = 2 pi^2 sin sin, u_bar = sin sin: int f u_bar = 2 pi^2 / 4 = pi^2 / 2
    mesh = build_rect_mesh(64, 64)
    u0 = sin_mode(mesh)
    f = 2.0 * np.pi**2 * u0
    u_bar = solve_elliptic(mesh, np.ones(mesh.n_elements), f)
    value = duality_steady(mesh, u_bar, f)
    assert value == pytest.approx(np.pi**2 / 2.0, rel=0.02)
    # quadratic scaling in f
    u2 = solve_elliptic(mesh, np.ones(mesh.n_elements), 2.0 * f)
    assert duality_steady(mesh, u2, 2.0 * f) == pytest.approx(4.0 * value, rel=1e-9)


def test_duality_time_average_constants():
    mesh = build_rect_mesh(8, 8)
    series = solve_parabolic(mesh, np.ones(mesh.n_elements),
                             SourceSpec("constant", 0.0), RunParams(T=0.1, nt=10, u0=0.0))
    assert duality_time_average(series, SourceSpec("constant", 3.0)) == 0.0
    # constant u (not a PDE solution; quadrature check only)
    series.fields[:] = 2.0
    got = duality_time_average(series, SourceSpec("constant", 3.0))
    assert got == pytest.approx(6.0, rel=1e-12)  # c*d*|Omega|


def test_duality_time_average_stationary():
    mesh = build_rect_mesh(64, 64)
    u0 = sin_mode(mesh)
    # steady state of constant f: compare (1/T) int f u against int f u_bar for large T
    kappa = np.ones(mesh.n_elements)
    src = SourceSpec("constant", 10.0)
    u_bar = solve_elliptic(mesh, kappa, 10.0)
    series = solve_parabolic(mesh, kappa, src, RunParams(T=6.0, nt=300, u0=u_bar))
    steady = duality_steady(mesh, u_bar, 10.0)
    transient = duality_time_average(series, src)
    assert transient == pytest.approx(steady, rel=1e-6)
    del u0


def test_energy_stability_over_random_designs():
    # sup_k ||u^k||_L2 stays bounded by C (||u0|| + ||f||) uniformly in phi
    from heatopt.oracles import random_admissible_phi
    mesh = build_rect_mesh(16, 16)
    mat = MaterialParams(1.0, 10.0)
    src = SourceSpec("constant", 10.0)
    rng = np.random.default_rng(5)
    bound = 0.0
    for _ in range(100):
        phi = random_admissible_phi(mesh, 0.5, rng, smoothing=2)
        kappa = coefficient(phi, 3, mesh, mat)
        series = solve_parabolic(mesh, kappa, src, RunParams(T=0.3, nt=30, u0=1.0))
        sup = max(l2(mesh, u) for u in series.fields)
        bound = max(bound, sup)
    # alpha = 1 Poincare-type bound: ||u|| <= ||u0|| + ||f|| / lambda1 ~ 1 + 10/19.7
    assert bound < 2.0


def test_monotone_coefficient_response():
    # larger conductivity cannot increase the constant-data duality pairing
    mesh = build_rect_mesh(24, 24)
    src = SourceSpec("constant", 10.0)
    run = RunParams(T=0.5, nt=50, u0=1.0)
    low = duality_time_average(solve_parabolic(mesh, np.full(mesh.n_elements, 2.0), src, run), src)
    high = duality_time_average(solve_parabolic(mesh, np.full(mesh.n_elements, 3.0), src, run), src)
    assert high <= low + 1e-10


def test_backward_euler_first_order():
    mesh = build_rect_mesh(32, 32)
    u0 = sin_mode(mesh)
    kappa = np.ones(mesh.n_elements)
    src = SourceSpec("constant", 0.0)
    ref = solve_parabolic(mesh, kappa, src, RunParams(T=0.05, nt=1600, u0=u0)).fields[-1]
    e1 = l2(mesh, solve_parabolic(mesh, kappa, src, RunParams(T=0.05, nt=50, u0=u0)).fields[-1] - ref)
    e2 = l2(mesh, solve_parabolic(mesh, kappa, src, RunParams(T=0.05, nt=100, u0=u0)).fields[-1] - ref)
    assert 1.6 <= e1 / e2 <= 2.4


def test_source_mirror_symmetry_exact():
    src = SourceSpec("damped_cosine_symmetric", 10.0)
    nt, T = 101, 1.3
    for k in range(nt + 1):
        assert src.value_at_index(k, nt, T) == src.value_at_index(nt - k, nt, T)


def test_source_kinds_and_validation():
    with pytest.raises(ValueError):
        SourceSpec("nope", 1.0)
    with pytest.raises(ValueError):
        SourceSpec("custom_table", 1.0)
    tab = SourceSpec("custom_table", table=((0.0, 1.0), (1.0, 3.0)))
    assert tab.at_time(0.5, 1.0) == pytest.approx(2.0)
    assert tab.f_infinity() == 3.0
    assert SourceSpec("damped_cosine_symmetric", 7.0).f_infinity() == 7.0


def test_run_params_validation():
    with pytest.raises(ValueError):
        RunParams(T=0.0, nt=10)
    with pytest.raises(ValueError):
        RunParams(T=1.0, nt=0)
    mesh = build_rect_mesh(2, 2)
    with pytest.raises(ValueError):
        RunParams(T=1.0, nt=10, u0=np.zeros(3)).initial_field(mesh)
