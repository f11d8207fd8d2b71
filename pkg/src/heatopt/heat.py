"""Backward Euler heat solver, steady solver and duality pairings."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fem import apply_dirichlet, assemble_stiffness, cg_solve, lumped_mass
from .mesh import Mesh

SOURCE_KINDS = ("constant", "damped_cosine_symmetric", "custom_table")


@dataclass(frozen=True)
class SourceSpec:
    """Heat source f(x, t).

    constant: f = amplitude everywhere.
    damped_cosine_symmetric: f(t) = amplitude * (exp(-pi^2 t / 2) cos(4 pi^2 t) + 1)
        for t <= T/2, mirrored about T/2 so that f(t) = f(T - t) holds exactly
        at paired time indices.
    custom_table: piecewise-linear in time through (time, value) pairs,
        spatially constant.
    """

    kind: str = "constant"
    amplitude: float = 10.0
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}, expected one of {SOURCE_KINDS}")
        if self.kind == "custom_table" and len(self.table) < 1:
            raise ValueError("custom_table source requires at least one (time, value) pair")

    def _base(self, t: float) -> float:
        if self.kind == "constant":
            return self.amplitude
        if self.kind == "damped_cosine_symmetric":
            return self.amplitude * (np.exp(-np.pi**2 * t / 2.0) * np.cos(4.0 * np.pi**2 * t) + 1.0)
        times = np.array([p[0] for p in self.table])
        values = np.array([p[1] for p in self.table])
        return float(np.interp(t, times, values))

    def value_at_index(self, k: int, nt: int, T: float) -> float:
        """Spatially constant source value at time index k of a uniform nt-step grid.

        The mirror-symmetric kind evaluates at index min(k, nt - k) so the
        discrete symmetry f_k = f_{nt-k} is exact.
        """
        if self.kind == "damped_cosine_symmetric":
            k = min(k, nt - k)
        return self._base(k * (T / nt))

    def at_time(self, t: float, T: float) -> float:
        """Source value at time t (mirror applied for the symmetric kind)."""
        if self.kind == "damped_cosine_symmetric":
            t = min(t, T - t)
        return self._base(t)

    def f_infinity(self) -> float:
        """Long-time limit f_inf used by the steady problem."""
        if self.kind in ("constant", "damped_cosine_symmetric"):
            return self.amplitude
        return self.table[-1][1]


@dataclass(frozen=True)
class RunParams:
    """Time horizon, step count, initial data and inner-solver tolerance."""

    T: float = 1.0
    nt: int = 100
    u0: float | np.ndarray = 1.0
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.T <= 0.0 or self.nt < 1:
            raise ValueError(f"need T > 0 and nt >= 1, got T={self.T}, nt={self.nt}")

    def initial_field(self, mesh: Mesh) -> np.ndarray:
        if np.isscalar(self.u0):
            return np.full(mesh.n_nodes, float(self.u0))
        u0 = np.asarray(self.u0, dtype=float)
        if u0.shape != (mesh.n_nodes,):
            raise ValueError(f"u0 shape {u0.shape} does not match {mesh.n_nodes} nodes")
        return u0.copy()


@dataclass
class FieldSeries:
    """State trajectory on a uniform time grid: fields[k] is u(t_k)."""

    times: np.ndarray           # (nt+1,)
    fields: np.ndarray          # (nt+1, n_nodes)
    mesh: Mesh
    coeff: np.ndarray = field(default=None)  # per-element kappa used

    @property
    def nt(self) -> int:
        return len(self.times) - 1

    @property
    def T(self) -> float:
        return float(self.times[-1])


def solve_parabolic(mesh: Mesh, coeff: np.ndarray, source: SourceSpec,
                    run: RunParams, guess: np.ndarray | None = None) -> FieldSeries:
    """Backward Euler with lumped mass: (M/dt + K) u^{k+1} = M/dt u^k + M f^{k+1}.

    Homogeneous Dirichlet conditions are eliminated once from the step matrix;
    each step's CG starts from `guess[k]` when a prior trajectory of matching
    shape is supplied (e.g. the previous optimization iterate's state, which
    changes little between design updates), else from the previous state.
    """
    dt = run.T / run.nt
    K = assemble_stiffness(mesh, coeff)
    w = lumped_mass(mesh)
    A = (sp.diags(w / dt) + K).tocsr()
    A_bc, _ = apply_dirichlet(A, np.zeros(mesh.n_nodes), mesh.boundary_nodes)

    if guess is not None and guess.shape != (run.nt + 1, mesh.n_nodes):
        guess = None
    u = run.initial_field(mesh)
    fields = np.empty((run.nt + 1, mesh.n_nodes))
    fields[0] = u
    x0 = u.copy()
    x0[mesh.boundary_nodes] = 0.0
    delta = prev_delta = None if guess is None else x0 - guess[0]
    for k in range(1, run.nt + 1):
        f_k = source.value_at_index(k, run.nt, run.T)
        rhs = (w / dt) * u + w * f_k
        rhs[mesh.boundary_nodes] = 0.0
        if guess is not None:
            # prior trajectory plus the linearly extrapolated drift: the drift
            # varies slowly in time even when the state itself does not, so
            # this start tracks oscillatory sources; one extra matvec picks
            # it over the previous time step when its residual is smaller
            alt = guess[k] + 2.0 * delta - prev_delta
            if (np.linalg.norm(rhs - A_bc @ alt)
                    < np.linalg.norm(rhs - A_bc @ x0)):
                x0 = alt
        u = cg_solve(A_bc, rhs, rel_tol=run.rel_tol, x0=x0)
        u[mesh.boundary_nodes] = 0.0
        fields[k] = u
        if guess is not None:
            prev_delta, delta = delta, u - guess[k]
        x0 = u
    times = np.arange(run.nt + 1) * dt
    return FieldSeries(times=times, fields=fields, mesh=mesh, coeff=np.asarray(coeff))


def solve_elliptic(mesh: Mesh, coeff: np.ndarray, f_inf,
                   rel_tol: float = 1e-10, x0: np.ndarray | None = None) -> np.ndarray:
    """Steady state: K u = M f_inf with homogeneous Dirichlet conditions."""
    K = assemble_stiffness(mesh, coeff)
    w = lumped_mass(mesh)
    f = np.broadcast_to(np.asarray(f_inf, dtype=float), (mesh.n_nodes,))
    K_bc, rhs = apply_dirichlet(K, w * f, mesh.boundary_nodes)
    return cg_solve(K_bc, rhs, rel_tol=rel_tol, x0=x0)


def duality_time_average(series: FieldSeries, source: SourceSpec) -> float:
    """(1/T) integral over (0, T) of int_Omega f u dx, trapezoidal in time."""
    w = lumped_mass(series.mesh)
    nt, T = series.nt, series.T
    pair = np.array([source.value_at_index(k, nt, T) * (w @ series.fields[k])
                     for k in range(nt + 1)])
    return float(np.trapezoid(pair, dx=T / nt) / T)


def duality_steady(mesh: Mesh, u_bar: np.ndarray, f_inf) -> float:
    """int_Omega f_inf u_bar dx with lumped-mass quadrature."""
    w = lumped_mass(mesh)
    f = np.broadcast_to(np.asarray(f_inf, dtype=float), (mesh.n_nodes,))
    return float(w @ (f * u_bar))
