"""Descent field of the time-averaged duality pairing via time correlation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .design import DesignField, MaterialParams, coefficient
from .heat import FieldSeries, RunParams, SourceSpec, duality_time_average, solve_parabolic
from .mesh import Mesh


@dataclass(frozen=True)
class SensitivityField:
    """Nodal descent field; vanishes wherever phi <= 0."""

    g: np.ndarray
    mode: str  # "parabolic" | "elliptic"


def _element_gradients(series_fields: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Per-element gradients of each field, shape (nk, ne, 2)."""
    v = series_fields[..., mesh.elements]  # (nk, ne, 3)
    return np.einsum("...ei,eid->...ed", v, mesh.element_grads)


def _gradient_operators(mesh: Mesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Sparse (ne x nn) maps from nodal values to element gradient components."""
    rows = np.repeat(np.arange(mesh.n_elements), 3)
    cols = mesh.elements.ravel()
    shape = (mesh.n_elements, mesh.n_nodes)
    gx = sp.coo_matrix((mesh.element_grads[:, :, 0].ravel(), (rows, cols)), shape).tocsr()
    gy = sp.coo_matrix((mesh.element_grads[:, :, 1].ravel(), (rows, cols)), shape).tocsr()
    return gx, gy


def _project_to_nodes(mesh: Mesh, elem_values: np.ndarray) -> np.ndarray:
    """Area-weighted average of element values onto nodes."""
    idx = mesh.elements.ravel()
    num = np.bincount(idx, weights=np.repeat(elem_values, 3), minlength=mesh.n_nodes)
    den = np.bincount(idx, minlength=mesh.n_nodes)
    return num / den


def correlation_integral(series: FieldSeries) -> np.ndarray:
    """Per-element trapezoidal sum of grad u(t_k) . grad u(t_{nt-k}) over (0, T).

    Requires a uniform time grid so the mirror pairing k <-> nt - k is exact.
    """
    dts = np.diff(series.times)
    if not np.allclose(dts, dts[0], rtol=1e-10, atol=0.0):
        raise ValueError("correlation integral requires a uniform time grid")
    mesh = series.mesh
    gx_op, gy_op = _gradient_operators(mesh)
    ft = np.ascontiguousarray(series.fields.T)            # (nn, nt+1)
    gx = gx_op @ ft                                       # (ne, nt+1)
    gy = gy_op @ ft
    dots = gx * gx[:, ::-1] + gy * gy[:, ::-1]            # (ne, nt+1)
    weights = np.full(series.nt + 1, dts[0])
    weights[0] = weights[-1] = 0.5 * dts[0]
    return dots @ weights


def _chi_factor(phi: np.ndarray, m: int) -> np.ndarray:
    """Nodal factor |phi|^{m-1} * chi_{phi > 0} (strict inequality at zero)."""
    pos = phi > 0.0
    if m == 1:
        return pos.astype(float)
    return np.where(pos, np.abs(phi) ** (m - 1), 0.0)


def descent_field(design: DesignField, series: FieldSeries,
                  mat: MaterialParams, T: float) -> SensitivityField:
    """g = (m (beta-alpha) / T) |phi|^{m-1} chi_{phi>0} int_0^T grad u(t).grad u(T-t) dt.

    This is minus the derivative density of the duality pairing, used directly
    as the source of the level-set update. Element correlations are projected
    to nodes by area-weighted averaging.
    """
    mesh = series.mesh
    if design.phi.shape != (mesh.n_nodes,):
        raise ValueError("design field does not match the series mesh")
    corr = correlation_integral(series)
    scale = design.m * (mat.beta - mat.alpha) / T
    nodal = _project_to_nodes(mesh, scale * corr)
    return SensitivityField(g=_chi_factor(design.phi, design.m) * nodal, mode="parabolic")


def elliptic_descent_field(design: DesignField, mesh: Mesh, u_bar: np.ndarray,
                           mat: MaterialParams) -> SensitivityField:
    """Steady-state descent field m (beta-alpha) |phi|^{m-1} chi_{phi>0} |grad u_bar|^2."""
    if design.phi.shape != (mesh.n_nodes,) or u_bar.shape != (mesh.n_nodes,):
        raise ValueError("design or state does not match the mesh")
    grad = _element_gradients(u_bar, mesh)               # (ne, 2)
    elem = design.m * (mat.beta - mat.alpha) * np.einsum("ed,ed->e", grad, grad)
    nodal = _project_to_nodes(mesh, elem)
    return SensitivityField(g=_chi_factor(design.phi, design.m) * nodal, mode="elliptic")


def directional_derivative(mesh: Mesh, design: DesignField, mat: MaterialParams,
                           source: SourceSpec, run: RunParams,
                           h_elem: np.ndarray, s: float) -> float:
    """Finite-difference quotient of the duality pairing under a coefficient bump.

    Perturbs the per-element coefficient by s * h_elem and requires the result
    to stay uniformly elliptic (>= alpha/2).
    """
    kappa = coefficient(design.phi, design.m, mesh, mat)
    h_elem = np.broadcast_to(np.asarray(h_elem, dtype=float), (mesh.n_elements,))
    perturbed = kappa + s * h_elem
    if np.any(perturbed < mat.alpha / 2.0):
        raise ValueError("perturbed coefficient violates uniform ellipticity (< alpha/2)")
    e0 = duality_time_average(solve_parabolic(mesh, kappa, source, run), source)
    e1 = duality_time_average(solve_parabolic(mesh, perturbed, source, run), source)
    return (e1 - e0) / s


def correlation_derivative(series: FieldSeries, h_elem: np.ndarray) -> float:
    """Derivative of the duality pairing predicted by the correlation formula.

    Returns -(1/T) sum_e h_e area_e int_0^T grad u(t) . grad u(T-t) dt.
    """
    mesh = series.mesh
    h_elem = np.broadcast_to(np.asarray(h_elem, dtype=float), (mesh.n_elements,))
    corr = correlation_integral(series)
    return float(-(mesh.element_area / series.T) * (h_elem @ corr))
