"""Independent oracles used by the test suite.

Everything here is deliberately naive: brute-force enumeration, plain
nested loops, dense quadrature, Monte Carlo. None of it shares code with
the implementations under test.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix


def brute_force_assignment_cost(x, y, n):
    """Optimal quadratic transport cost between two uniform n-atom measures.

    Enumerates all n! assignments (Birkhoff vertices). Exact for equal
    uniform masses with equal atom counts.
    """
    C = np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=-1)
    best = np.inf
    idx = np.arange(n)
    for perm in permutations(range(n)):
        cost = C[idx, perm].sum() / n
        if cost < best:
            best = cost
    return best


def linprog_transport_cost(a, b, C):
    """Transportation LP solved by HiGHS; exact reference for general masses."""
    n, m = C.shape
    rows, cols, vals = [], [], []
    for i in range(n):
        for j in range(m):
            k = i * m + j
            rows.extend((i, n + j))
            cols.extend((k, k))
            vals.extend((1.0, 1.0))
    A = csr_matrix((vals, (rows, cols)), shape=(n + m, n * m))
    res = linprog(
        C.ravel(), A_eq=A, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs"
    )
    assert res.status == 0, res.message
    return res.fun


def quantile_cost_1d(x, mx, y, my):
    """Squared-cost of the monotone coupling via dense CDF inversion."""
    xs = np.sort(x)
    ys = np.sort(y)
    mxs = np.asarray(mx)[np.argsort(x)]
    mys = np.asarray(my)[np.argsort(y)]
    cx = np.concatenate([[0], np.cumsum(mxs)])
    cy = np.concatenate([[0], np.cumsum(mys)])
    levels = np.unique(np.concatenate([cx, cy]))
    cost = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        if hi - lo <= 0:
            continue
        mid = 0.5 * (lo + hi)
        xi = xs[min(np.searchsorted(cx, mid, side="right") - 1, len(xs) - 1)]
        yi = ys[min(np.searchsorted(cy, mid, side="right") - 1, len(ys) - 1)]
        cost += (hi - lo) * (xi - yi) ** 2
    return cost


def central_difference_gradient(f, x, h):
    """Componentwise central differences of a scalar field at point x."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def pair_energy_loops(positions, masses, w_of_r):
    """Interaction energy by explicit double loop."""
    n = len(masses)
    total = 0.0
    for i in range(n):
        for j in range(n):
            r = np.linalg.norm(positions[i] - positions[j])
            total += masses[i] * masses[j] * w_of_r(r)
    return 0.5 * total


def mc_cell_pair_integral(grad_component, p_off, q_off, dx, dy, n_samples, seed):
    """Monte Carlo estimate of the 4-d cell-pair gradient integral.

    Samples x uniformly in the field cell, x' in the source cell offset by
    (-p_off, -q_off) index units, and averages grad_component(x - x').
    Returns (estimate, standard_error), both scaled by (dx dy)^2.
    """
    rng = np.random.default_rng(seed)
    sx = rng.uniform(0.0, dx, n_samples)
    sy = rng.uniform(0.0, dy, n_samples)
    tx = rng.uniform(0.0, dx, n_samples)
    ty = rng.uniform(0.0, dy, n_samples)
    u = p_off * dx + sx - tx
    v = q_off * dy + sy - ty
    vals = grad_component(u, v)
    scale = (dx * dy) ** 2
    return scale * vals.mean(), scale * vals.std(ddof=1) / np.sqrt(n_samples)


def scalar_fv_update(rho, ax, ay, dx, dy, dt, w_inf):
    """The explicit finite-volume update as plain nested loops (ghost zeros)."""
    nx, ny = rho.shape

    def r(i, j):
        return rho[i, j] if 0 <= i < nx and 0 <= j < ny else 0.0

    def vx(i, j):
        return ax[i, j] if 0 <= i < nx and 0 <= j < ny else 0.0

    def vy(i, j):
        return ay[i, j] if 0 <= i < nx and 0 <= j < ny else 0.0

    out = np.zeros_like(rho)
    for i in range(nx):
        for j in range(ny):
            fe = 0.5 * (vx(i, j) + vx(i + 1, j)) * 0.5 * (r(i, j) + r(i + 1, j))
            fw = 0.5 * (vx(i - 1, j) + vx(i, j)) * 0.5 * (r(i - 1, j) + r(i, j))
            fn = 0.5 * (vy(i, j) + vy(i, j + 1)) * 0.5 * (r(i, j) + r(i, j + 1))
            fs = 0.5 * (vy(i, j - 1) + vy(i, j)) * 0.5 * (r(i, j - 1) + r(i, j))
            out[i, j] = (
                rho[i, j]
                - dt / dx * (fe - fw)
                - dt / dy * (fn - fs)
                + dt * w_inf / (2 * dx) * (r(i + 1, j) - 2 * r(i, j) + r(i - 1, j))
                + dt * w_inf / (2 * dy) * (r(i, j + 1) - 2 * r(i, j) + r(i, j - 1))
            )
    return out


def quadruple_loop_velocity(rho, dwx, dwy, dx, dy):
    """Velocity assembly straight from the cell-pair definition (no FFT, no
    vectorized correlation); dwx/dwy are offset tables centered at (nx-1, ny-1)."""
    nx, ny = rho.shape
    ax = np.zeros_like(rho)
    ay = np.zeros_like(rho)
    for i in range(nx):
        for j in range(ny):
            sx = 0.0
            sy = 0.0
            for k in range(nx):
                for l in range(ny):
                    sx += rho[k, l] * dwx[i - k + nx - 1, j - l + ny - 1]
                    sy += rho[k, l] * dwy[i - k + nx - 1, j - l + ny - 1]
            ax[i, j] = -sx / (dx * dy)
            ay[i, j] = -sy / (dx * dy)
    return ax, ay


def density_moments_quadrature(density, box, n_cells=600):
    """Dense midpoint quadrature of mass, center of mass and second moment."""
    (x0, y0), (x1, y1) = box
    xs = np.linspace(x0, x1, n_cells + 1)
    ys = np.linspace(y0, y1, n_cells + 1)
    xm = 0.5 * (xs[:-1] + xs[1:])
    ym = 0.5 * (ys[:-1] + ys[1:])
    w = (xs[1] - xs[0]) * (ys[1] - ys[0])
    vals = density(xm[:, None], ym[None, :]) * w
    mass = vals.sum()
    com = np.array([(vals * xm[:, None]).sum(), (vals * ym[None, :]).sum()]) / mass
    m2 = (vals * (xm[:, None] ** 2 + ym[None, :] ** 2)).sum() / mass
    return mass, com, m2
