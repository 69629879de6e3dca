"""Built-in experiment presets.

* ``three_bump_w1`` - grid run of the three-bump data with the stiff
  exponential kernel (a = 5). The bounded kernel evaporates a slow halo
  through the scheme's numerical viscosity, so the box is generously padded
  and the horizon kept short of the halo's arrival at the boundary ring.
* ``three_bump_w2`` - grid run of the same data with W(x) = |x|; confining,
  so the full collapse to a point is reachable (1000 steps).
* ``two_particle_abs`` - two equal atoms a unit apart under |x|: they march
  at closing speed one and glue at t = 1 at the midpoint.
* ``collapse50_morse`` - 50 seeded atoms under the a = 5 kernel; total
  collapse onto the (conserved) center of mass.

Particle presets pick merge_radius = 10 w_inf dt: fixed-step integration
cannot resolve approaches below one step's travel, so a bound pair
oscillates inside that scale instead of passing through zero distance; a
radius above it captures every contact while staying far below the support
scale.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config
from .measures import DiscreteMeasure, save_measure_csv

__all__ = ["PRESET_NAMES", "preset_config", "preset_description"]

_DESCRIPTIONS = {
    "three_bump_w1": "three-bump density, fv2d, W = 1 - exp(-5|x|), 500x500 box [-2,3]^2, t_end 0.55",
    "three_bump_w2": "three-bump density, fv2d, W = |x|, 200x200 box [-0.5,1.5]^2, 1000 steps to t_end 2.25",
    "two_particle_abs": "two atoms at (+-1/2, 0) under W = |x|; analytic gluing at t = 1",
    "collapse50_morse": "50 seeded atoms under W = 1 - exp(-5|x|); total collapse onto the center of mass",
}

PRESET_NAMES = tuple(sorted(_DESCRIPTIONS))


def preset_description(name: str) -> str:
    return _DESCRIPTIONS[name]


def _two_particle_atoms(outdir: Path) -> str:
    path = outdir / "initial_atoms.csv"
    measure = DiscreteMeasure(np.array([[-0.5, 0.0], [0.5, 0.0]]), np.array([0.5, 0.5]))
    save_measure_csv(measure, path)
    return str(path)


def _collapse50_atoms(outdir: Path, seed: int = 7) -> str:
    path = outdir / "initial_atoms.csv"
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0.0, 0.4, size=(50, 2))
    measure = DiscreteMeasure(pos, np.full(50, 1.0 / 50.0))
    save_measure_csv(measure, path)
    return str(path)


def preset_config(name: str, output_dir: str) -> RunConfig:
    """Materialize a preset (writing any input files) into `output_dir`."""
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if name == "three_bump_w1":
        doc = {
            "scheme": "fv2d",
            "potential": {"kind": "morse", "a": 5.0},
            "initial": {"kind": "three_bump", "cx": 100.0},
            "grid": {"nx": 500, "ny": 500, "dx": 0.01, "dy": 0.01, "origin": [-2.0, -2.0]},
            "cfl_safety": 0.9,
            "velocity_assembly": "fft",
            "t_end": 0.55,
            "snapshot_every": 300,
            "output_dir": str(outdir),
        }
    elif name == "three_bump_w2":
        doc = {
            "scheme": "fv2d",
            "potential": {"kind": "abs"},
            "initial": {"kind": "three_bump", "cx": 100.0},
            "grid": {"nx": 200, "ny": 200, "dx": 0.01, "dy": 0.01, "origin": [-0.5, -0.5]},
            "cfl_safety": 0.9,
            "velocity_assembly": "fft",
            "t_end": 2.25,
            "snapshot_every": 100,
            "output_dir": str(outdir),
        }
    elif name == "two_particle_abs":
        doc = {
            "scheme": "particles",
            "potential": {"kind": "abs"},
            "initial": {"kind": "atoms", "path": _two_particle_atoms(outdir)},
            "t_end": 1.2,
            "dt": 1e-4,
            "merge_radius": 1e-3,
            "snapshot_every": 1000,
            "output_dir": str(outdir),
        }
    elif name == "collapse50_morse":
        doc = {
            "scheme": "particles",
            "potential": {"kind": "morse", "a": 5.0},
            "initial": {"kind": "atoms", "path": _collapse50_atoms(outdir)},
            "t_end": 1.5,
            "dt": 1e-4,
            "merge_radius": 5e-3,
            "snapshot_every": 1000,
            "seed": 7,
            "output_dir": str(outdir),
        }
    else:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return parse_config(doc)
