"""Smallest eigenpair of the diffusion operator plus Galerkin mode closed forms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fem import cg_solve
from .mesh import Mesh


@dataclass(frozen=True)
class EigenPair:
    """Smallest eigenvalue and its M-normalized eigenvector (zero on the boundary)."""

    lambda1: float
    w1: np.ndarray


def smallest_eigenpair(K: sp.csr_matrix, m_diag: np.ndarray, mesh: Mesh,
                       tol: float = 1e-8, max_iter: int = 500) -> EigenPair:
    """Inverse power iteration for K w = lambda M w on the interior nodes.

    K is the full (uneliminated) stiffness matrix and m_diag the lumped mass
    diagonal; boundary rows are restricted away. CG is the inner solver.
    Converges when ||K w - lambda M w|| <= tol * lambda (M-normalized w).
    """
    free = mesh.interior_nodes
    Kff = K[free][:, free].tocsr()
    mf = m_diag[free]
    x = np.ones(free.size)
    x /= np.sqrt(x @ (mf * x))
    lam = float(x @ (Kff @ x))
    y = None
    for _ in range(max_iter):
        y = cg_solve(Kff, mf * x, rel_tol=1e-12, x0=y)
        y /= np.sqrt(y @ (mf * y))
        lam = float(y @ (Kff @ y))
        res = np.linalg.norm(Kff @ y - lam * (mf * y))
        x = y
        if res <= tol * lam:
            w = np.zeros(mesh.n_nodes)
            w[free] = x
            return EigenPair(lambda1=lam, w1=w)
    raise RuntimeError(f"inverse power iteration stagnated after {max_iter} iterations")


def check_source_assumption(f_const: float, u0_const: float, lambda1: float) -> bool:
    """True iff f (u0 - f / lambda1) >= 0, the horizon-monotonicity condition."""
    if lambda1 <= 0.0:
        raise ValueError(f"lambda1 must be positive, got {lambda1}")
    return f_const * (u0_const - f_const / lambda1) >= 0.0


def mode_coefficient(t: float, lam: float, d0: float, F: float) -> float:
    """Galerkin mode amplitude d(t) = (d0 - F/lam) e^{-lam t} + F/lam."""
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return (d0 - F / lam) * np.exp(-lam * t) + F / lam


def mode_product(t: float, T: float, lam: float, d0: float, F: float) -> float:
    """d(t) * d(T - t); nonnegative whenever d0 * F >= 0."""
    return mode_coefficient(t, lam, d0, F) * mode_coefficient(T - t, lam, d0, F)


def h_ratio(S: float, lam: float) -> float:
    """Normalized decay mass (1 - e^{-lam S}) / (lam S); strictly decreasing in S."""
    if S <= 0.0 or lam <= 0.0:
        raise ValueError(f"need S > 0 and lambda > 0, got S={S}, lambda={lam}")
    return (1.0 - np.exp(-lam * S)) / (lam * S)
