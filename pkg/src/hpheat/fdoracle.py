"""Staggered finite-difference oracle, independent of the element machinery.

This module exists to cross-check the element solver, so it deliberately
shares no discretization code with it: temperatures live at cell centers,
fluxes at cell faces, and all spatial coupling is by central differences.
The boundary faces carry the prescribed flux data directly, which is the
finite-difference analogue of how the mixed weak form takes flux data.

Unknowns per step are the m cell temperatures and the m - 1 interior face
fluxes.  The semi-discrete system

    M dz/dt + K z + b_l q_left(t) + b_r q_right(t) = 0

is stepped by the same theta family as the element solver, with the same
optional exact-average treatment of the boundary data, so that time
discretization differences never pollute the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .materials import MaterialParams
from .timefun import TimeFunction


@dataclass
class StaggeredGrid:
    """State on a uniform staggered grid: T at m centers, q at m + 1 faces."""

    length: float
    T: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        if self.length <= 0.0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        if self.q.size != self.T.size + 1:
            raise ValueError("face array must have one more entry than the cell array")
        if self.T.size < 3:
            raise ValueError("need at least three cells")

    @property
    def cells(self) -> int:
        return self.T.size

    @property
    def dx(self) -> float:
        return self.length / self.cells

    @classmethod
    def uniform(cls, cells: int, length: float, temperature: float) -> "StaggeredGrid":
        return cls(
            length=length,
            T=np.full(cells, float(temperature)),
            q=np.zeros(cells + 1),
        )


def _operator(cells: int, dx: float, mat: MaterialParams):
    """Mass diagonal, stiffness matrix and boundary-data columns for z = [T; q_int]."""
    m = cells
    dim = 2 * m - 1
    mass = np.empty(dim)
    mass[:m] = mat.rho * mat.c_v
    mass[m:] = mat.tau

    rows, cols, vals = [], [], []

    def add(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    b_left = np.zeros(dim)
    b_right = np.zeros(dim)

    # Energy balance per cell: rho c_v dT_i/dt + (q_{i+1} - q_i) / dx = 0.
    for i in range(m):
        if i + 1 < m:
            add(i, m + i, 1.0 / dx)
        else:
            b_right[i] += 1.0 / dx
        if i > 0:
            add(i, m + i - 1, -1.0 / dx)
        else:
            b_left[i] += -1.0 / dx

    # Flux law per interior face j: tau dq_j/dt + q_j
    #   + lam (T_j - T_{j-1}) / dx - kappa2 (q_{j+1} - 2 q_j + q_{j-1}) / dx^2 = 0.
    lam_dx = mat.conductivity / dx
    k_dx2 = mat.kappa2 / dx**2
    for j in range(1, m):
        r = m + j - 1
        add(r, r, 1.0 + 2.0 * k_dx2)
        add(r, j, lam_dx)
        add(r, j - 1, -lam_dx)
        if j + 1 < m:
            add(r, m + j, -k_dx2)
        else:
            b_right[r] += -k_dx2
        if j - 1 > 0:
            add(r, m + j - 2, -k_dx2)
        else:
            b_left[r] += -k_dx2

    stiff = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    return mass, stiff, b_left, b_right


def fd_step(
    grid: StaggeredGrid,
    mat: MaterialParams,
    dt: float,
    q_left: float,
    q_right: float,
) -> StaggeredGrid:
    """One backward Euler step with the boundary fluxes at the new time level."""
    if dt <= 0.0:
        raise ValueError(f"time step must be positive, got {dt}")
    m = grid.cells
    mass, stiff, b_left, b_right = _operator(m, grid.dx, mat)
    z0 = np.concatenate((grid.T, grid.q[1:-1]))
    lhs = sp.diags(mass) + dt * stiff
    rhs = mass * z0 - dt * (b_left * q_left + b_right * q_right)
    z1 = splu(lhs.tocsc()).solve(rhs)
    q_new = np.empty(m + 1)
    q_new[0] = q_left
    q_new[-1] = q_right
    q_new[1:-1] = z1[m:]
    return StaggeredGrid(length=grid.length, T=z1[:m], q=q_new)


def _temperature_probe_weights(cells: int, dx: float, x: float) -> tuple[int, int, float]:
    """Linear two-point rule on cell centers; extrapolating at the ends."""
    centers_first = 0.5 * dx
    s = (x - centers_first) / dx
    i = int(np.floor(s))
    i = min(max(i, 0), cells - 2)
    w1 = s - i
    return i, i + 1, w1


@dataclass
class FdSolution:
    times: np.ndarray
    temperature_probes: dict[float, np.ndarray]
    flux_probes: dict[float, np.ndarray]
    final: StaggeredGrid


def fd_solve(
    mat: MaterialParams,
    length: float,
    initial_temperature: float,
    q_left: TimeFunction,
    q_right: TimeFunction,
    cells: int,
    dt: float,
    n_steps: int,
    theta: float = 0.5,
    probe_temperatures: tuple[float, ...] = (),
    probe_fluxes: tuple[float, ...] = (),
    load_mode: str = "average",
) -> FdSolution:
    """Theta-stepped staggered solve recording probe histories.

    Temperature probes interpolate (or extrapolate, at the faces) linearly
    between cell centers; flux probes snap to the nearest face and read the
    boundary data when that face is a boundary.
    """
    if cells < 3:
        raise ValueError(f"need at least three cells, got {cells}")
    if not 0.5 <= theta <= 1.0:
        raise ValueError(f"theta must be in [1/2, 1], got {theta}")
    if load_mode not in ("average", "sampled"):
        raise ValueError(f"load_mode must be 'average' or 'sampled', got {load_mode!r}")

    m = cells
    dx = length / m
    mass, stiff, b_left, b_right = _operator(m, dx, mat)
    lhs = (sp.diags(mass) + dt * theta * stiff).tocsc()
    solver = splu(lhs)
    m_expl = (sp.diags(mass) - dt * (1.0 - theta) * stiff).tocsr()

    t_probe_rules = {x: _temperature_probe_weights(m, dx, x) for x in probe_temperatures}
    q_probe_faces = {}
    for x in probe_fluxes:
        j = int(round(x / dx))
        q_probe_faces[x] = min(max(j, 0), m)

    times = np.arange(n_steps + 1) * dt
    t_hist = {x: np.empty(n_steps + 1) for x in probe_temperatures}
    q_hist = {x: np.empty(n_steps + 1) for x in probe_fluxes}

    z = np.concatenate((np.full(m, float(initial_temperature)), np.zeros(m - 1)))

    def record(k: int, t: float) -> None:
        for x, (i0, i1, w1) in t_probe_rules.items():
            t_hist[x][k] = (1.0 - w1) * z[i0] + w1 * z[i1]
        for x, j in q_probe_faces.items():
            if j == 0:
                q_hist[x][k] = q_left.value(t)
            elif j == m:
                q_hist[x][k] = q_right.value(t)
            else:
                q_hist[x][k] = z[m + j - 1]

    record(0, 0.0)
    for n in range(n_steps):
        t0, t1 = times[n], times[n + 1]
        if load_mode == "average":
            ql = q_left.average(t0, t1)
            qr = q_right.average(t0, t1)
        else:
            ql = theta * q_left.value(t1) + (1.0 - theta) * q_left.value(t0)
            qr = theta * q_right.value(t1) + (1.0 - theta) * q_right.value(t0)
        rhs = m_expl @ z - dt * (b_left * ql + b_right * qr)
        z = solver.solve(rhs)
        record(n + 1, times[n + 1])

    q_final = np.empty(m + 1)
    q_final[0] = q_left.value(times[-1])
    q_final[-1] = q_right.value(times[-1])
    q_final[1:-1] = z[m:]
    final = StaggeredGrid(length=length, T=z[:m].copy(), q=q_final)
    return FdSolution(
        times=times,
        temperature_probes=t_hist,
        flux_probes=q_hist,
        final=final,
    )
