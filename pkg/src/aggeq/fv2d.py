"""Conservative 2-d finite-volume scheme for aggregation dynamics.

Cell averages rho_ij on a uniform Cartesian grid are advanced with the
explicit update

    rho^{n+1}_ij = rho^n_ij
        - dt/dx (ax_{i+1/2,j} rho_{i+1/2,j} - ax_{i-1/2,j} rho_{i-1/2,j})
        - dt/dy (ay_{i,j+1/2} rho_{i,j+1/2} - ay_{i,j-1/2} rho_{i,j-1/2})
        + dt w_inf/(2 dx) (rho_{i+1,j} - 2 rho_ij + rho_{i-1,j})
        + dt w_inf/(2 dy) (rho_{i,j+1} - 2 rho_ij + rho_{i,j-1}),

with interface values given by arithmetic means. This is a Lax-Friedrichs
type flux: the w_inf terms are numerical viscosity sized by the maximal
transport speed. Under the CFL condition w_inf (1/dx + 1/dy) dt <= 1/2 the
update is a convex combination of nonnegative cell values, hence positivity
preserving; conservativity and the antisymmetry of the velocity kernel give
exact conservation of mass and of the center of mass.

The velocity is assembled from a precomputed translation-invariant kernel:
for each cell-index offset, the kernel holds the integral of the (hatted)
gradient of W over a pair of cells at that offset. The 4-d cell-pair
integral reduces, via the difference variable, to a 2-d integral against the
tent-shaped cell autocorrelation weight; each offset is integrated with
Gauss-Legendre panels split along the tent's kink axes (which also pins the
gradient's origin singularity to panel corners for near-diagonal offsets).
Cell velocities are then a discrete convolution of the cell averages with
the kernel table, evaluated either directly or via zero-padded FFTs; the
two assemblies agree to rounding and the FFT one is the fast path.

The grid is a truncation of the whole plane: ghost values outside the box
are zero, which is only faithful while the support stays away from the
boundary. Every step therefore guards that the boundary ring carries no
mass above 1e-14 and aborts otherwise, advising a larger box.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft
from scipy.signal import convolve as _sig_convolve

from .measures import DiscreteMeasure
from .potentials import Potential

__all__ = [
    "Grid2D",
    "FvState",
    "VelocityKernel",
    "CflError",
    "SupportBoundaryError",
    "build_kernel",
    "compute_velocity",
    "cfl_dt",
    "fv_step",
    "init_cells",
    "fv_diagnostics",
    "state_to_measure",
]

BOUNDARY_TOL = 1e-14


class CflError(ValueError):
    """Raised when a step is attempted with a CFL-violating dt."""


class SupportBoundaryError(RuntimeError):
    """Raised when mass reaches the truncation boundary of the grid."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell grid; cell (i, j) is [x_i, x_{i+1}) x [y_j, y_{j+1})."""

    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx <= 0 or self.ny <= 0:
            raise ValueError("grid must have positive cell counts")
        if self.dx <= 0.0 or self.dy <= 0.0:
            raise ValueError("grid spacings must be positive")

    def x_centers(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.dy

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy


@dataclass(frozen=True)
class FvState:
    """Cell-average density with simulation bookkeeping.

    ``rho`` is indexed [i, j] with i the x index; rho[i, j] approximates the
    mean of the density over cell (i, j).
    """

    grid: Grid2D
    rho: np.ndarray
    time: float = 0.0
    step_count: int = 0
    renormalization: float = 1.0  # factor applied to the raw cell averages at init

    def __post_init__(self):
        rho = np.ascontiguousarray(np.asarray(self.rho, dtype=float))
        if rho.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"rho shape {rho.shape} does not match grid ({self.grid.nx}, {self.grid.ny})"
            )
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    def mass(self) -> float:
        return float(np.sum(self.rho)) * self.grid.cell_area


@dataclass(frozen=True)
class VelocityKernel:
    """Tables of cell-pair gradient integrals, indexed by cell offsets.

    dwx[p + nx - 1, q + ny - 1] holds the integral of the x gradient
    component over a pair of cells whose index offset is (p, q) = (field
    cell - source cell); same for dwy. Both tables are exactly antisymmetric
    under offset negation and vanish at offset (0, 0).
    """

    nx: int
    ny: int
    dx: float
    dy: float
    w_inf: float
    dwx: np.ndarray
    dwy: np.ndarray
    _fft_shape: tuple[int, int]
    _dwx_hat: np.ndarray
    _dwy_hat: np.ndarray

    def matches(self, grid: Grid2D) -> bool:
        return (
            self.nx == grid.nx
            and self.ny == grid.ny
            and np.isclose(self.dx, grid.dx, rtol=1e-14)
            and np.isclose(self.dy, grid.dy, rtol=1e-14)
        )


def _tent_nodes_1d(h: float, n_nodes: int):
    """Quadrature nodes/weights on [-h, h] against the tent weight (h - |u|).

    One Gauss-Legendre panel per sign of u: the tent is linear on each, so
    it is integrated exactly and the kink at u = 0 never sits inside a
    panel. Total weight sums to h^2.
    """
    g, w = np.polynomial.legendre.leggauss(n_nodes)
    t = 0.5 * (g + 1.0)          # nodes on (0, 1)
    wt = 0.5 * w                 # matching weights
    u_pos = h * t
    w_pos = h * wt * (h - u_pos)
    nodes = np.concatenate([-u_pos, u_pos])
    weights = np.concatenate([w_pos, w_pos])
    return nodes, weights


def build_kernel(p: Potential, grid: Grid2D, nodes_per_axis: int = 8) -> VelocityKernel:
    """Precompute the velocity kernel tables for `p` on `grid`.

    Each offset costs (2 * nodes_per_axis)^2 gradient evaluations (256 for
    the default); only a half-space of offsets is integrated, the rest
    follows by antisymmetry.
    """
    nx, ny, dx, dy = grid.nx, grid.ny, grid.dx, grid.dy
    un, uw = _tent_nodes_1d(dx, nodes_per_axis)
    vn, vw = _tent_nodes_1d(dy, nodes_per_axis)
    U = np.repeat(un, vn.size)
    V = np.tile(vn, un.size)
    W2 = np.repeat(uw, vw.size) * np.tile(vw, uw.size)

    # half-space of offsets: p > 0 with all q, plus p == 0 with q > 0
    ps = np.concatenate([np.zeros(ny - 1, dtype=int), np.repeat(np.arange(1, nx), 2 * ny - 1)])
    qs = np.concatenate([np.arange(1, ny), np.tile(np.arange(-(ny - 1), ny), nx - 1)])

    dwx = np.zeros((2 * nx - 1, 2 * ny - 1))
    dwy = np.zeros((2 * nx - 1, 2 * ny - 1))

    chunk = max(1, 2_000_000 // U.size)
    for lo in range(0, ps.size, chunk):
        pc = ps[lo : lo + chunk, None]
        qc = qs[lo : lo + chunk, None]
        X = pc * dx + U[None, :]
        Y = qc * dy + V[None, :]
        R = np.hypot(X, Y)
        scale = np.zeros_like(R)
        np.divide(p.radial_slope(R), R, out=scale, where=R > 0.0)
        vx = (scale * X) @ W2
        vy = (scale * Y) @ W2
        ip = pc[:, 0] + nx - 1
        jq = qc[:, 0] + ny - 1
        dwx[ip, jq] = vx
        dwy[ip, jq] = vy
        dwx[2 * (nx - 1) - ip, 2 * (ny - 1) - jq] = -vx
        dwy[2 * (nx - 1) - ip, 2 * (ny - 1) - jq] = -vy
    dwx[nx - 1, ny - 1] = 0.0
    dwy[nx - 1, ny - 1] = 0.0

    Lx = sfft.next_fast_len(2 * nx)
    Ly = sfft.next_fast_len(2 * ny)
    kx = _wrap_offset_table(dwx, nx, ny, Lx, Ly)
    ky = _wrap_offset_table(dwy, nx, ny, Lx, Ly)
    return VelocityKernel(
        nx=nx,
        ny=ny,
        dx=dx,
        dy=dy,
        w_inf=p.w_inf,
        dwx=dwx,
        dwy=dwy,
        _fft_shape=(Lx, Ly),
        _dwx_hat=sfft.rfft2(kx),
        _dwy_hat=sfft.rfft2(ky),
    )


def _wrap_offset_table(table: np.ndarray, nx: int, ny: int, Lx: int, Ly: int) -> np.ndarray:
    """Place an offset-indexed table into circular-convolution layout."""
    out = np.zeros((Lx, Ly))
    out[:nx, :ny] = table[nx - 1 :, ny - 1 :]
    out[:nx, Ly - ny + 1 :] = table[nx - 1 :, : ny - 1]
    out[Lx - nx + 1 :, :ny] = table[: nx - 1, ny - 1 :]
    out[Lx - nx + 1 :, Ly - ny + 1 :] = table[: nx - 1, : ny - 1]
    return out


def _correlate_fft(rho: np.ndarray, kernel: VelocityKernel) -> tuple[np.ndarray, np.ndarray]:
    Lx, Ly = kernel._fft_shape
    nx, ny = rho.shape
    pad = np.zeros((Lx, Ly))
    pad[:nx, :ny] = rho
    rho_hat = sfft.rfft2(pad)
    cx = sfft.irfft2(rho_hat * kernel._dwx_hat, s=(Lx, Ly))[:nx, :ny]
    cy = sfft.irfft2(rho_hat * kernel._dwy_hat, s=(Lx, Ly))[:nx, :ny]
    return cx, cy


def _correlate_direct(rho: np.ndarray, kernel: VelocityKernel) -> tuple[np.ndarray, np.ndarray]:
    nx, ny = rho.shape
    full_x = _sig_convolve(rho, kernel.dwx, mode="full", method="direct")
    full_y = _sig_convolve(rho, kernel.dwy, mode="full", method="direct")
    sl = (slice(nx - 1, 2 * nx - 1), slice(ny - 1, 2 * ny - 1))
    return full_x[sl], full_y[sl]


def compute_velocity(
    state: FvState, kernel: VelocityKernel, assembly: str = "fft"
) -> tuple[np.ndarray, np.ndarray]:
    """Cell velocities (ax, ay): minus the kernel convolution over 1/(dx dy).

    Pulled toward mass: the velocity field transports cell mass down the
    interaction potential's convolved gradient. Bounded by w_inf in each
    component for any unit-mass state.
    """
    if not kernel.matches(state.grid):
        raise ValueError("velocity kernel was built for a different grid")
    if assembly == "fft":
        cx, cy = _correlate_fft(state.rho, kernel)
    elif assembly == "direct":
        cx, cy = _correlate_direct(state.rho, kernel)
    else:
        raise ValueError(f"unknown assembly {assembly!r} (expected 'fft' or 'direct')")
    scale = -1.0 / (state.grid.dx * state.grid.dy)
    return scale * cx, scale * cy


def cfl_dt(p: Potential, grid: Grid2D, safety: float = 1.0, max_dt: float | None = None) -> float:
    """Largest stable step: safety * (1/2) / (w_inf (1/dx + 1/dy))."""
    if not 0.0 < safety <= 1.0:
        raise ValueError("safety must lie in (0, 1]")
    if p.w_inf == 0.0:
        if max_dt is None:
            raise ValueError("w_inf is zero (no transport); supply max_dt explicitly")
        return max_dt
    return safety * 0.5 / (p.w_inf * (1.0 / grid.dx + 1.0 / grid.dy))


def _boundary_max(rho: np.ndarray) -> float:
    return max(
        float(np.max(np.abs(rho[0, :]))),
        float(np.max(np.abs(rho[-1, :]))),
        float(np.max(np.abs(rho[:, 0]))),
        float(np.max(np.abs(rho[:, -1]))),
    )


def _advance(state: FvState, kernel: VelocityKernel, dt: float, assembly: str = "fft"):
    """One explicit update; returns (new_state, per-step info dict)."""
    grid = state.grid
    dx, dy, w_inf = grid.dx, grid.dy, kernel.w_inf
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if w_inf > 0.0:
        dt_max = 0.5 / (w_inf * (1.0 / dx + 1.0 / dy))
        if dt > dt_max * (1.0 + 1e-12):
            raise CflError(
                f"dt={dt} violates the CFL condition; maximal admissible dt is {dt_max}"
            )
    bmax = _boundary_max(state.rho)
    if bmax > BOUNDARY_TOL:
        raise SupportBoundaryError(
            f"support reached the truncation boundary (ring max {bmax:.3e} > "
            f"{BOUNDARY_TOL:.0e}); rerun on a larger box"
        )

    ax, ay = compute_velocity(state, kernel, assembly)
    rho = state.rho

    rp = np.zeros((grid.nx + 2, grid.ny + 2))
    rp[1:-1, 1:-1] = rho
    axp = np.zeros_like(rp)
    axp[1:-1, 1:-1] = ax
    ayp = np.zeros_like(rp)
    ayp[1:-1, 1:-1] = ay

    c = (slice(1, -1), slice(1, -1))
    e = (slice(2, None), slice(1, -1))
    w = (slice(0, -2), slice(1, -1))
    nn = (slice(1, -1), slice(2, None))
    ss = (slice(1, -1), slice(0, -2))

    flux_e = 0.5 * (axp[c] + axp[e]) * 0.5 * (rp[c] + rp[e])
    flux_w = 0.5 * (axp[w] + axp[c]) * 0.5 * (rp[w] + rp[c])
    flux_n = 0.5 * (ayp[c] + ayp[nn]) * 0.5 * (rp[c] + rp[nn])
    flux_s = 0.5 * (ayp[ss] + ayp[c]) * 0.5 * (rp[ss] + rp[c])

    new = (
        rho
        - (dt / dx) * (flux_e - flux_w)
        - (dt / dy) * (flux_n - flux_s)
        + (dt * w_inf / (2.0 * dx)) * (rp[e] - 2.0 * rho + rp[w])
        + (dt * w_inf / (2.0 * dy)) * (rp[nn] - 2.0 * rho + rp[ss])
    )

    info = {
        "max_speed": max(float(np.max(np.abs(ax))), float(np.max(np.abs(ay)))),
        "min_rho": float(np.min(new)),
        "boundary_max": bmax,
    }
    new_state = replace(
        state, rho=new, time=state.time + dt, step_count=state.step_count + 1
    )
    return new_state, info


def fv_step(state: FvState, kernel: VelocityKernel, dt: float, assembly: str = "fft") -> FvState:
    """One explicit finite-volume update (validates CFL and the boundary guard)."""
    new_state, _ = _advance(state, kernel, dt, assembly)
    return new_state


# -- initialization ----------------------------------------------------------

_INIT_QUAD_NODES = 4


def init_cells(density, grid: Grid2D) -> FvState:
    """Cell averages of an analytic density or an atomic measure.

    Analytic densities (callables of vectorized x, y) are integrated per
    cell with tensor Gauss-Legendre quadrature and then renormalized to
    unit total mass; the applied factor is recorded on the state. Atomic
    measures deposit each atom's full mass into its containing cell.
    """
    if isinstance(density, DiscreteMeasure):
        rho = _cells_from_measure(density, grid)
    elif callable(density):
        rho = _cells_from_density(density, grid)
    else:
        raise TypeError("density must be a callable density or a DiscreteMeasure")
    raw_mass = float(np.sum(rho)) * grid.cell_area
    if raw_mass <= 0.0:
        raise ValueError("initial data carries no mass on the grid")
    return FvState(grid=grid, rho=rho / raw_mass, renormalization=1.0 / raw_mass)


def _cells_from_density(density, grid: Grid2D) -> np.ndarray:
    g, w = np.polynomial.legendre.leggauss(_INIT_QUAD_NODES)
    t = 0.5 * (g + 1.0)
    wt = 0.5 * w
    xn = grid.origin[0] + (np.arange(grid.nx)[:, None] + t[None, :]) * grid.dx
    yn = grid.origin[1] + (np.arange(grid.ny)[:, None] + t[None, :]) * grid.dy
    vals = density(
        xn.reshape(-1)[:, None], yn.reshape(-1)[None, :]
    ).reshape(grid.nx, _INIT_QUAD_NODES, grid.ny, _INIT_QUAD_NODES)
    if np.min(vals) < -1e-12:
        raise ValueError("initial density takes negative values")
    rho = np.einsum("a,b,iajb->ij", wt, wt, vals)
    return np.maximum(rho, 0.0)


def _cells_from_measure(measure: DiscreteMeasure, grid: Grid2D) -> np.ndarray:
    if measure.dim != 2:
        raise ValueError("finite-volume initialization needs 2-d atoms")
    pos = measure.positions
    ix = np.floor((pos[:, 0] - grid.origin[0]) / grid.dx).astype(int)
    iy = np.floor((pos[:, 1] - grid.origin[1]) / grid.dy).astype(int)
    if np.any((ix < 0) | (ix >= grid.nx) | (iy < 0) | (iy >= grid.ny)):
        raise ValueError("atom lies outside the grid")
    rho = np.zeros((grid.nx, grid.ny))
    np.add.at(rho, (ix, iy), measure.masses / grid.cell_area)
    return rho


# -- diagnostics -------------------------------------------------------------

def state_to_measure(state: FvState, drop_tol: float = 0.0) -> DiscreteMeasure:
    """Atomize: cell masses at cell centers (cells with rho > drop_tol)."""
    xc = state.grid.x_centers()
    yc = state.grid.y_centers()
    keep = state.rho > drop_tol
    ii, jj = np.nonzero(keep)
    pos = np.column_stack([xc[ii], yc[jj]])
    return DiscreteMeasure(pos, state.rho[ii, jj] * state.grid.cell_area)


def _grid_energy(state: FvState, p: Potential) -> float:
    """Interaction energy of the cell-center atomization, via FFT."""
    grid = state.grid
    nx, ny = grid.nx, grid.ny
    poff = np.arange(-(nx - 1), nx) * grid.dx
    qoff = np.arange(-(ny - 1), ny) * grid.dy
    wtab = p.radial_value(np.hypot(poff[:, None], qoff[None, :]))
    Lx = sfft.next_fast_len(2 * nx)
    Ly = sfft.next_fast_len(2 * ny)
    wrapped = _wrap_offset_table(wtab, nx, ny, Lx, Ly)
    masses = state.rho * grid.cell_area
    pad = np.zeros((Lx, Ly))
    pad[:nx, :ny] = masses
    conv = sfft.irfft2(sfft.rfft2(pad) * sfft.rfft2(wrapped), s=(Lx, Ly))[:nx, :ny]
    return 0.5 * float(np.sum(masses * conv))


def fv_diagnostics(state: FvState, p: Potential) -> dict:
    """Mass, center of mass, second moment, energy and density extrema."""
    grid = state.grid
    xc = grid.x_centers()
    yc = grid.y_centers()
    cell_mass = state.rho * grid.cell_area
    mass = float(np.sum(cell_mass))
    com_x = float(xc @ np.sum(cell_mass, axis=1)) / mass
    com_y = float(np.sum(cell_mass, axis=0) @ yc) / mass
    m2 = float(np.sum(cell_mass * (xc[:, None] ** 2 + yc[None, :] ** 2)))
    return {
        "mass": mass,
        "com": (com_x, com_y),
        "m2": m2,
        "energy": _grid_energy(state, p),
        "min_rho": float(np.min(state.rho)),
        "max_rho": float(np.max(state.rho)),
    }
