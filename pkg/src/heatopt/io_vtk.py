"""Legacy ASCII VTK export and CSV writers for optimization artifacts."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .mesh import Mesh
from .optimizer import ObjectiveRecord
from .oracles import OracleReport

HISTORY_HEADER = ["iter", "E", "I_dirichlet", "J", "volume", "lambda_shift", "phi_change_L1"]
ORACLE_HEADER = ["name", "passed", "measured", "expected", "tolerance", "relative"]


def write_vtk(path: str | Path, mesh: Mesh, point_data: dict[str, np.ndarray]) -> None:
    """Write nodal scalar fields as a legacy VTK unstructured grid (triangles)."""
    lines = [
        "# vtk DataFile Version 3.0",
        "heatopt scalar fields",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_nodes} double",
    ]
    lines.extend(f"{x:.17e} {y:.17e} 0.0" for x, y in mesh.nodes)
    lines.append(f"CELLS {mesh.n_elements} {4 * mesh.n_elements}")
    lines.extend(f"3 {a} {b} {c}" for a, b, c in mesh.elements)
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines.extend("5" for _ in range(mesh.n_elements))
    lines.append(f"POINT_DATA {mesh.n_nodes}")
    for name, values in point_data.items():
        if values.shape != (mesh.n_nodes,):
            raise ValueError(f"field {name!r} has shape {values.shape}, "
                             f"expected ({mesh.n_nodes},)")
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(f"{v:.17e}" for v in values)
    Path(path).write_text("\n".join(lines) + "\n")


def write_history_csv(path: str | Path, history: list[ObjectiveRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HISTORY_HEADER)
        for r in history:
            writer.writerow([r.iter, f"{r.E:.17e}", f"{r.I_dirichlet:.17e}",
                             f"{r.J:.17e}", f"{r.volume:.17e}",
                             f"{r.lambda_shift:.17e}", f"{r.phi_change_L1:.17e}"])


def write_oracle_csv(path: str | Path, reports: list[OracleReport]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ORACLE_HEADER)
        for r in reports:
            writer.writerow([r.name, int(r.passed), f"{r.measured:.17e}",
                             f"{r.expected:.17e}", f"{r.tolerance:.17e}",
                             int(r.relative)])
