"""Level-set design field, two-material coefficient and volume projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import lumped_mass
from .mesh import Mesh

BOX_TOL = 1e-12


@dataclass(frozen=True)
class MaterialParams:
    alpha: float
    beta: float

    def __post_init__(self):
        # beta == alpha is tolerated as the degenerate single-material case
        if not (self.beta >= self.alpha > 0.0):
            raise ValueError(f"need beta >= alpha > 0, got alpha={self.alpha}, beta={self.beta}")


@dataclass
class DesignField:
    """Level-set function phi with |phi| <= 1, target volume fraction and exponent."""

    phi: np.ndarray
    gamma: float
    m: int = 3

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.m < 1:
            raise ValueError(f"exponent m must be >= 1, got {self.m}")
        if np.max(np.abs(self.phi)) > 1.0 + BOX_TOL:
            raise ValueError("level-set values must satisfy |phi| <= 1")


def coefficient(phi: np.ndarray, m: int, mesh: Mesh, mat: MaterialParams) -> np.ndarray:
    """Per-element conductivity alpha + (beta - alpha) * mean_e (phi_+)^m.

    The positive part is raised to m nodewise and averaged over the three
    element nodes, consistent with the lumped quadratures elsewhere.
    """
    if np.max(np.abs(phi)) > 1.0 + BOX_TOL:
        raise ValueError("level-set values must satisfy |phi| <= 1")
    pp = np.maximum(phi, 0.0) ** m
    elem_mean = pp[mesh.elements].mean(axis=1)
    return mat.alpha + (mat.beta - mat.alpha) * elem_mean


def clip_shift(phi: np.ndarray, lam: float) -> np.ndarray:
    """Nodewise max(-1, min(phi + lambda, 1))."""
    return np.clip(phi + lam, -1.0, 1.0)


def volume(mesh: Mesh, phi: np.ndarray) -> float:
    """Lumped-mass L1 norm of the positive part, ||phi_+||_L1."""
    return float(lumped_mass(mesh) @ np.maximum(phi, 0.0))


def project_volume(mesh: Mesh, phi: np.ndarray, gamma_vol: float,
                   eta1: float) -> tuple[np.ndarray, float]:
    """Shift-and-clip phi so that ||phi_+||_L1 is within eta1 of gamma_vol.

    The shift lambda is found by bisection on [-2, 2]: V(lambda) is continuous
    and nondecreasing with V(-2) = 0 and V(2) = |domain| whenever |phi| <= 1.
    """
    if not 0.0 < gamma_vol < mesh.area:
        raise ValueError(f"target volume must lie in (0, {mesh.area}), got {gamma_vol}")
    w = lumped_mass(mesh)

    def vol_at(lam: float) -> float:
        return float(w @ np.maximum(clip_shift(phi, lam), 0.0))

    # resolve lambda itself to machine precision, not just the volume residual:
    # a coarse lambda makes the accepted iterates jitter when the unclipped
    # set is small, which shows up as noise in the objective history
    lo, hi = -2.0, 2.0
    for _ in range(60):
        lam = 0.5 * (lo + hi)
        if vol_at(lam) < gamma_vol:
            lo = lam
        else:
            hi = lam
    lam = 0.5 * (lo + hi)
    out = clip_shift(phi, lam)
    if abs(float(w @ np.maximum(out, 0.0)) - gamma_vol) > eta1:
        raise AssertionError("volume bisection exhausted; input violates |phi| <= 1?")
    return out, lam
