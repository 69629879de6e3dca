"""Discrete measures: weighted atoms in R^d with moments and nonlocal fields.

A ``DiscreteMeasure`` is the universal representation used by the solvers
and diagnostics: the particle scheme evolves one directly, and finite-volume
fields are atomized to one (cell masses at cell centers) before transport
distances are computed. Instances are immutable; the backing arrays are
marked read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .potentials import Potential

__all__ = [
    "DiscreteMeasure",
    "velocity_at",
    "interaction_energy",
    "save_measure_csv",
    "load_measure_csv",
]

#: atoms lighter than this are dropped when normalizing (degeneracy guard)
MASS_DROP_TOL = 1e-14


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely many weighted atoms; masses are nonnegative."""

    positions: np.ndarray  # (n, d)
    masses: np.ndarray     # (n,)

    def __post_init__(self):
        pos = np.atleast_1d(np.asarray(self.positions, dtype=float))
        if pos.ndim == 1:
            pos = pos[:, None]
        if pos.ndim != 2:
            raise ValueError(f"positions must be an (n, d) array, got shape {pos.shape}")
        if pos.shape[0] > 0 and pos.shape[1] not in (1, 2):
            raise ValueError(f"only dimensions 1 and 2 are supported, got d={pos.shape[1]}")
        m = np.asarray(self.masses, dtype=float).reshape(-1)
        if m.shape[0] != pos.shape[0]:
            raise ValueError(
                f"got {pos.shape[0]} positions but {m.shape[0]} masses"
            )
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if not np.all(np.isfinite(m)) or np.any(m < 0.0):
            raise ValueError("masses must be finite and nonnegative")
        pos = np.ascontiguousarray(pos)
        m = np.ascontiguousarray(m)
        pos.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", m)

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def center_of_mass(self) -> np.ndarray:
        tot = self.total_mass()
        if tot <= 0.0:
            raise ValueError("center of mass of a zero measure is undefined")
        return self.masses @ self.positions / tot

    def second_moment(self) -> float:
        """Sum of m_i |x_i|^2 (about the origin)."""
        return float(self.masses @ np.sum(self.positions**2, axis=1))

    def is_probability(self, tol: float = 1e-12) -> bool:
        return abs(self.total_mass() - 1.0) <= tol

    def normalized(self, drop_tol: float = MASS_DROP_TOL) -> "DiscreteMeasure":
        """Rescale to unit mass, dropping atoms below `drop_tol`."""
        keep = self.masses > drop_tol
        if not np.any(keep):
            raise ValueError("measure has no atoms above the drop tolerance")
        m = self.masses[keep]
        return DiscreteMeasure(self.positions[keep], m / np.sum(m))


def velocity_at(measure: DiscreteMeasure, p: Potential, x) -> np.ndarray:
    """Nonlocal velocity -sum_i m_i grad_hat(x - x_i) at one or more points.

    The hatted gradient vanishes at the origin, so an atom sitting exactly
    at `x` contributes nothing; the field is defined everywhere, including
    on the support.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    diff = pts[:, None, :] - measure.positions[None, :, :]   # (k, n, d)
    g = p.grad_hat(diff)
    out = -np.einsum("j,kjd->kd", measure.masses, g)
    return out[0] if single else out


def interaction_energy(measure: DiscreteMeasure, p: Potential) -> float:
    """Interaction energy 1/2 sum_ij m_i m_j W(x_i - x_j).

    Diagonal terms vanish because W(0) = 0. Quadratic in the number of
    atoms; intended for desk-scale supports.
    """
    pos, m = measure.positions, measure.masses
    diff = pos[:, None, :] - pos[None, :, :]
    w = p.eval(diff)
    return 0.5 * float(m @ w @ m)


def save_measure_csv(measure: DiscreteMeasure, path) -> None:
    """Write atoms as CSV: header `x[,y],mass`, one row per atom."""
    path = Path(path)
    cols = ["x", "y"][: measure.dim] + ["mass"]
    data = np.column_stack([measure.positions, measure.masses])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_measure_csv(path) -> DiscreteMeasure:
    """Read a measure written by `save_measure_csv` (header required)."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        fields = [f.strip() for f in header.split(",")]
        if fields not in (["x", "mass"], ["x", "y", "mass"]):
            raise ValueError(
                f"{path}: expected header 'x,mass' or 'x,y,mass', got {header!r}"
            )
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(fields):
        raise ValueError(f"{path}: row width does not match header")
    return DiscreteMeasure(data[:, :-1], data[:, -1])
