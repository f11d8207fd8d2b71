"""Uniform right-triangle mesh of a rectangle with P1 element geometry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Mesh:
    """Structured triangulation of a rectangle.

    Nodes are numbered row-major; every grid cell is split along the
    bottom-left -> top-right diagonal, so the element count is 2*nx*ny and
    all elements share the same area.
    """

    nx: int
    ny: int
    domain: tuple[float, float, float, float]  # (x_min, x_max, y_min, y_max)
    nodes: np.ndarray          # (n_nodes, 2)
    elements: np.ndarray       # (n_elements, 3), counter-clockwise
    boundary_nodes: np.ndarray  # sorted node indices on the boundary
    element_area: float
    element_grads: np.ndarray  # (n_elements, 3, 2), constant P1 gradients

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def area(self) -> float:
        """Total area of the rectangle."""
        x_min, x_max, y_min, y_max = self.domain
        return (x_max - x_min) * (y_max - y_min)

    @property
    def interior_nodes(self) -> np.ndarray:
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.nonzero(mask)[0]


def build_rect_mesh(nx: int, ny: int,
                    domain: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)) -> Mesh:
    """Build the uniform triangulation with nx-by-ny cells, two triangles each."""
    if nx < 1 or ny < 1:
        raise ValueError(f"subdivision counts must be >= 1, got nx={nx}, ny={ny}")
    x_min, x_max, y_min, y_max = domain
    if not (x_max > x_min and y_max > y_min):
        raise ValueError(f"degenerate or inverted rectangle: {domain}")

    x = np.linspace(x_min, x_max, nx + 1)
    y = np.linspace(y_min, y_max, ny + 1)
    xx, yy = np.meshgrid(x, y)  # row-major: node = j*(nx+1) + i
    nodes = np.column_stack([xx.ravel(), yy.ravel()])

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny))
    n00 = (jj * (nx + 1) + ii).ravel()
    n10 = n00 + 1
    n01 = n00 + (nx + 1)
    n11 = n01 + 1
    lower = np.column_stack([n00, n10, n11])
    upper = np.column_stack([n00, n11, n01])
    elements = np.empty((2 * nx * ny, 3), dtype=np.int64)
    elements[0::2] = lower
    elements[1::2] = upper

    on_boundary = np.zeros(nodes.shape[0], dtype=bool)
    idx = np.arange(nodes.shape[0]).reshape(ny + 1, nx + 1)
    on_boundary[idx[0, :]] = True
    on_boundary[idx[-1, :]] = True
    on_boundary[idx[:, 0]] = True
    on_boundary[idx[:, -1]] = True
    boundary_nodes = np.nonzero(on_boundary)[0]

    hx = (x_max - x_min) / nx
    hy = (y_max - y_min) / ny
    element_area = 0.5 * hx * hy

    p = nodes[elements]  # (ne, 3, 2)
    # grad N_i = (y_j - y_k, x_k - x_j) / (2A) for cyclic (i, j, k)
    j = [1, 2, 0]
    k = [2, 0, 1]
    grads = np.empty((elements.shape[0], 3, 2))
    grads[:, :, 0] = p[:, j, 1] - p[:, k, 1]
    grads[:, :, 1] = p[:, k, 0] - p[:, j, 0]
    grads /= 2.0 * element_area

    return Mesh(nx=nx, ny=ny, domain=tuple(domain), nodes=nodes, elements=elements,
                boundary_nodes=boundary_nodes, element_area=element_area,
                element_grads=grads)


def element_basis_gradients(mesh: Mesh, e: int) -> np.ndarray:
    """Constant gradients of the three P1 hat functions on element e, shape (3, 2)."""
    if not 0 <= e < mesh.n_elements:
        raise IndexError(f"element index {e} out of range [0, {mesh.n_elements})")
    return mesh.element_grads[e]
