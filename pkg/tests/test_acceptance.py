"""End-to-end acceptance checks.

Each test covers one numbered criterion; the slow optimization-based criteria
(3, 6, 7, 8) share a module-scoped bundle of optimization runs so the whole
suite fits the stated runtime budgets on one core.
"""

import time

import numpy as np
import pytest

from heatopt import (DesignField, MaterialParams, OptimizerConfig, SourceSpec,
                     assemble_stiffness, build_rect_mesh, check_source_assumption,
                     coefficient, lumped_mass, run, smallest_eigenpair)
from heatopt.oracles import (elliptic_manufactured_error, parabolic_decay_error,
                             parabolic_time_error, run_derivative_suite,
                             run_galerkin_suite)

GAMMA = 0.5
MAT = MaterialParams(alpha=1.0, beta=10.0)


def _optimize(mesh, source, mode, T=1.0, epsilon=1e-4):
    cfg = OptimizerConfig(mode=mode, T=T, epsilon=epsilon)
    phi0 = DesignField(np.full(mesh.n_nodes, GAMMA), GAMMA, 3)
    return cfg, run(cfg, mesh, MAT, source, phi0)


@pytest.fixture(scope="module")
def replication_runs():
    """Criterion 6 bundle: T sweep for f = 10 and the mirror-symmetric source."""
    mesh = build_rect_mesh(48, 48)
    results = {}
    t0 = time.time()
    for kind in ("constant", "damped_cosine_symmetric"):
        source = SourceSpec(kind, amplitude=10.0)
        for mode, T in (("parabolic", 0.1), ("parabolic", 1.0),
                        ("parabolic", 5.0), ("elliptic", np.inf)):
            _, res = _optimize(mesh, source, mode, T=1.0 if mode == "elliptic" else T)
            results[(kind, T)] = res
    return mesh, results, time.time() - t0


def test_criterion_1_elliptic_convergence_order():
    t0 = time.time()
    ratio = elliptic_manufactured_error(32) / elliptic_manufactured_error(64)
    elapsed = time.time() - t0
    assert 3.2 <= ratio <= 4.8
    assert elapsed < 10.0


def test_criterion_2_parabolic_decay_and_order():
    t0 = time.time()
    rel = parabolic_decay_error(64, nt=200, T=0.05) / (np.exp(-0.1 * np.pi**2) * 0.5)
    ratio = parabolic_time_error(64, nt=50) / parabolic_time_error(64, nt=100)
    elapsed = time.time() - t0
    assert rel <= 0.02
    assert 1.6 <= ratio <= 2.4
    assert elapsed < 30.0


def test_criterion_3_eigenvalue_and_assumption(replication_runs):
    mesh64 = build_rect_mesh(64, 64)
    pair = smallest_eigenpair(assemble_stiffness(mesh64, np.ones(mesh64.n_elements)),
                              lumped_mass(mesh64), mesh64)
    assert pair.lambda1 == pytest.approx(2.0 * np.pi**2, rel=0.01)

    # f = 10, u0 = 1 must pass on every optimized design of the replication runs
    mesh, results, _ = replication_runs
    for res in results.values():
        kappa = coefficient(res.design.phi, 3, mesh, MAT)
        lam1 = smallest_eigenpair(assemble_stiffness(mesh, kappa),
                                  lumped_mass(mesh), mesh).lambda1
        assert check_source_assumption(10.0, 1.0, lam1)


def test_criterion_4_derivative_oracle():
    t0 = time.time()
    reports = {r.name: r for r in run_derivative_suite(samples=20)}
    elapsed = time.time() - t0
    mismatch = reports["fd_vs_correlation_max_mismatch"]
    # tolerance encodes max(2% relative, 1e-6 absolute)
    assert mismatch.passed, mismatch
    nonpos = reports["nonpositivity_max_derivative"]
    assert nonpos.measured <= 1e-8, nonpos
    assert elapsed < 180.0


def test_criterion_5_galerkin_scalar_suite():
    t0 = time.time()
    reports = {r.name: r for r in run_galerkin_suite()}
    elapsed = time.time() - t0
    assert reports["mode_product_min"].measured >= -1e-14
    assert reports["h_ratio_strictly_decreasing"].measured == 1.0
    assert all(r.passed for r in reports.values())
    assert elapsed < 1.0


def test_criterion_6_replication_monotone_in_horizon(replication_runs):
    _, results, elapsed = replication_runs
    for kind in ("constant", "damped_cosine_symmetric"):
        for T in (0.1, 1.0, 5.0, np.inf):
            assert results[(kind, T)].converged, (kind, T)
        J = {T: results[(kind, T)].history[-1].J for T in (0.1, 1.0, 5.0, np.inf)}
        assert J[0.1] >= J[1.0] >= J[5.0] >= J[np.inf] - 1e-4, (kind, J)
    assert elapsed < 1200.0


def test_criterion_7_epsilon_sweep():
    mesh = build_rect_mesh(48, 48)
    source = SourceSpec("constant", 10.0)
    finals = {}
    for eps in (1e-3, 1e-4, 1e-5):
        _, res = _optimize(mesh, source, "elliptic", epsilon=eps)
        assert res.converged, eps
        finals[eps] = res.history[-1].J
        phi_pos = np.maximum(res.design.phi, 0.0)
        frac = np.mean((phi_pos > 0.05) & (phi_pos < 0.95))
        print(f"epsilon={eps:.0e}: J={finals[eps]:.8f} "
              f"intermediate-set fraction={frac:.4f}")
    assert finals[1e-4] <= finals[1e-3] + 1e-5
    assert finals[1e-5] <= finals[1e-4] + 1e-5


def test_criterion_8_feasibility_audit(replication_runs):
    mesh, results, _ = replication_runs
    target = GAMMA * mesh.area
    eta1 = 1e-6 * mesh.area
    for key, res in results.items():
        for rec in res.history:
            assert rec.volume <= target + eta1 and rec.volume >= target - eta1, key
        assert np.abs(res.design.phi).max() <= 1.0, key
