"""P1 assembly, Dirichlet elimination and a Jacobi-preconditioned CG solver."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh


class SolverDivergenceError(RuntimeError):
    """CG failed to reach the requested tolerance within max_iter."""

    def __init__(self, residual: float, max_iter: int):
        super().__init__(f"CG did not converge in {max_iter} iterations "
                         f"(relative residual {residual:.3e})")
        self.residual = residual
        self.max_iter = max_iter


def assemble_stiffness(mesh: Mesh, coeff) -> sp.csr_matrix:
    """Stiffness matrix with a per-element coefficient.

    K_ij = sum_e coeff_e * area_e * grad N_i . grad N_j; symmetric PSD.
    """
    coeff = np.broadcast_to(np.asarray(coeff, dtype=float), (mesh.n_elements,))
    if np.any(coeff <= 0.0):
        raise ValueError("stiffness coefficient must be strictly positive on every element")
    g = mesh.element_grads
    local = np.einsum("eid,ejd->eij", g, g) * (mesh.element_area * coeff)[:, None, None]
    rows = np.repeat(mesh.elements, 3, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, 3)).ravel()
    n = mesh.n_nodes
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_mass(mesh: Mesh, lumped: bool = True) -> sp.csr_matrix:
    """Mass matrix: consistent (area/12 pattern) or row-sum lumped diagonal."""
    if lumped:
        return sp.diags(lumped_mass(mesh)).tocsr()
    local = mesh.element_area / 12.0 * (np.ones((3, 3)) + np.eye(3))
    data = np.broadcast_to(local, (mesh.n_elements, 3, 3))
    rows = np.repeat(mesh.elements, 3, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, 3)).ravel()
    n = mesh.n_nodes
    return sp.coo_matrix((data.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def lumped_mass(mesh: Mesh) -> np.ndarray:
    """Diagonal of the lumped mass matrix (area/3 per incident element)."""
    w = np.zeros(mesh.n_nodes)
    np.add.at(w, mesh.elements.ravel(),
              np.full(3 * mesh.n_elements, mesh.element_area / 3.0))
    return w


def apply_dirichlet(K: sp.csr_matrix, b: np.ndarray, nodes: np.ndarray,
                    value: float = 0.0) -> tuple[sp.csr_matrix, np.ndarray]:
    """Symmetric elimination of Dirichlet nodes.

    Rows and columns of the constrained nodes are zeroed, unit diagonal put in
    their place, and the right-hand side corrected so the solution of the
    reduced system equals `value` at the constrained nodes.
    """
    n = K.shape[0]
    x = np.zeros(n)
    x[nodes] = value
    b2 = b - K @ x
    b2[nodes] = value
    keep = np.ones(n)
    keep[nodes] = 0.0
    P = sp.diags(keep)
    K2 = (P @ K @ P + sp.diags(1.0 - keep)).tocsr()
    return K2, b2


def cg_solve(A: sp.csr_matrix, b: np.ndarray, rel_tol: float = 1e-10,
             max_iter: int = 20000, x0: np.ndarray | None = None) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradients for SPD systems.

    Deterministic: zero initial guess unless x0 is given. Converges when
    ||A x - b|| <= rel_tol * ||b||.
    """
    b = np.asarray(b, dtype=float)
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros_like(b)
    inv_diag = 1.0 / A.diagonal()
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = np.array(x0, dtype=float)
        r = b - A @ x
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    tol = rel_tol * b_norm
    if np.linalg.norm(r) <= tol:
        return x
    for _ in range(max_iter):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol:
            return x
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverDivergenceError(np.linalg.norm(r) / b_norm, max_iter)


def dirichlet_energy(mesh: Mesh, phi: np.ndarray) -> float:
    """Integral of |grad phi|^2 over the mesh (no 1/2 or epsilon factor)."""
    v = phi[mesh.elements]                                   # (ne, 3)
    grad = np.einsum("ei,eid->ed", v, mesh.element_grads)    # (ne, 2)
    return float(mesh.element_area * np.sum(grad * grad))
