"""Run orchestration: execute a config, write snapshots/diagnostics/report.

A completed run directory contains:

* ``config.json``      - canonical echo of the configuration
* ``snapshots/``       - per-snapshot data (atom CSVs, or density matrices
                         with JSON sidecars) plus ``snapshots.json`` index
* ``diagnostics.csv``  - conserved-quantity series (per step for particles,
                         per written snapshot for the grid scheme)
* ``report.json``      - every invariant check with measured value and
                         threshold; ``passed`` is the conjunction

Scheme failures (CFL violation, support reaching the box boundary) write a
partial report with the diagnostic message before propagating.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fv2d
from .config import ConfigError, RunConfig, config_to_json
from .densities import gaussian_sum, three_bump, uniform_box
from .measures import (
    DiscreteMeasure,
    interaction_energy,
    load_measure_csv,
    save_measure_csv,
)
from .particles import default_merge_radius, simulate
from .potentials import Potential, from_spec
from .transport import wasserstein2

__all__ = ["RunReport", "run", "load_report", "compare", "contraction_test"]

OUTPUT_ROOT_ENV = "AGGEQ_OUTPUT_ROOT"


@dataclass(frozen=True)
class RunReport:
    scheme: str
    output_dir: Path
    report: dict

    @property
    def passed(self) -> bool:
        return bool(self.report.get("passed", False))

    @property
    def snapshots(self) -> list[dict]:
        return self.report["snapshots"]


def resolve_output_dir(output_dir: str) -> Path:
    """Relative output dirs land under $AGGEQ_OUTPUT_ROOT when it is set."""
    path = Path(output_dir)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not path.is_absolute():
        path = Path(root) / path
    return path


def build_potential(config: RunConfig) -> Potential:
    spec = config.potential
    return from_spec(spec["kind"], spec.get("a"), spec.get("mollify_eps"))


def build_initial(config: RunConfig):
    """Density callable (fv2d) or DiscreteMeasure (particles/atoms)."""
    spec = config.initial
    kind = spec["kind"]
    if kind == "atoms":
        return load_measure_csv(spec["path"])
    if kind == "three_bump":
        return three_bump(float(spec.get("cx", 100.0)))
    if kind == "uniform_box":
        return uniform_box(spec["corners"])
    if kind == "custom_gaussians":
        gs = spec["gaussians"]
        return gaussian_sum(
            [g["center"] for g in gs], [g["weight"] for g in gs], [g["cx"] for g in gs]
        )
    raise ConfigError(f"config key 'initial.kind': unknown kind {kind!r}")


def _invariant(name, value, threshold, passed, description=""):
    return {
        "name": name,
        "value": value,
        "threshold": threshold,
        "passed": bool(passed),
        "description": description,
    }


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_diagnostics(path: Path, header: list[str], rows: list[list[float]]):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def run(config: RunConfig) -> RunReport:
    outdir = resolve_output_dir(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "snapshots").mkdir(exist_ok=True)
    (outdir / "config.json").write_text(config_to_json(config), encoding="utf-8")
    started = time.monotonic()
    try:
        if config.scheme == "particles":
            report = _run_particles(config, outdir)
        else:
            report = _run_fv(config, outdir)
    except Exception as exc:
        partial = {
            "scheme": config.scheme,
            "passed": False,
            "aborted": f"{type(exc).__name__}: {exc}",
            "invariants": [],
            "snapshots": [],
            "runtime_s": time.monotonic() - started,
        }
        (outdir / "report.json").write_text(
            json.dumps(partial, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        raise
    report["runtime_s"] = time.monotonic() - started
    report["passed"] = all(inv["passed"] for inv in report["invariants"])
    (outdir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return RunReport(scheme=config.scheme, output_dir=outdir, report=report)


def load_report(output_dir) -> RunReport:
    outdir = Path(output_dir)
    report = json.loads((outdir / "report.json").read_text(encoding="utf-8"))
    return RunReport(scheme=report["scheme"], output_dir=outdir, report=report)


# -- particle scheme ---------------------------------------------------------

def _run_particles(config: RunConfig, outdir: Path) -> dict:
    p = build_potential(config)
    ini = build_initial(config)
    if not isinstance(ini, DiscreteMeasure):
        raise ConfigError("config key 'initial.kind': particle runs need atomic data")
    ini = DiscreteMeasure(ini.positions, ini.masses / ini.total_mass())
    merge_radius = config.merge_radius
    if merge_radius is None:
        merge_radius = default_merge_radius(ini)

    traj = simulate(ini, p, T=config.t_end, dt=config.dt, merge_radius=merge_radius)

    lam, w_inf = p.constants()
    K = 2.0 * w_inf + w_inf**2
    com0 = traj[0][1].center_of_mass()
    mass0 = traj[0][1].total_mass()
    log_env0 = np.log1p(traj[0][1].second_moment())

    rows = []
    energies = []
    worst_mass = 0.0
    worst_com = 0.0
    worst_m2_slack = -np.inf
    for t, state in traj:
        com = state.center_of_mass()
        com_x = float(com[0])
        com_y = float(com[1]) if state.dim > 1 else 0.0
        m2 = state.second_moment()
        energy = interaction_energy(state, p)
        energies.append(energy)
        rows.append([t, state.total_mass(), com_x, com_y, m2, energy, state.n_atoms])
        worst_mass = max(worst_mass, abs(state.total_mass() - mass0))
        worst_com = max(worst_com, float(np.linalg.norm(com - com0)))
        worst_m2_slack = max(worst_m2_slack, float(np.log1p(m2) - (K * t + log_env0)))
    _write_diagnostics(
        outdir / "diagnostics.csv",
        ["t", "mass", "com_x", "com_y", "m2", "energy", "n_atoms"],
        rows,
    )

    snapshots = []
    idx = list(range(0, len(traj), config.snapshot_every))
    if idx[-1] != len(traj) - 1:
        idx.append(len(traj) - 1)
    for k, i in enumerate(idx):
        t, state = traj[i]
        fname = f"snapshots/snap_{k:06d}.csv"
        save_measure_csv(state, outdir / fname)
        com = state.center_of_mass()
        snapshots.append(
            {
                "t": t,
                "file": fname,
                "n_atoms": state.n_atoms,
                "mass": state.total_mass(),
                "com": [float(c) for c in com],
                "m2": state.second_moment(),
                "energy": energies[i],
            }
        )
    (outdir / "snapshots" / "snapshots.json").write_text(
        json.dumps(snapshots, indent=2) + "\n", encoding="utf-8"
    )

    dE = np.diff(energies)
    max_energy_rise = float(dE.max()) if dE.size else 0.0
    invariants = [
        _invariant("mass_conservation", worst_mass, 1e-12, worst_mass <= 1e-12,
                   "max |total mass - initial| over the trajectory"),
        _invariant("com_drift", worst_com, 1e-8, worst_com <= 1e-8,
                   "max center-of-mass drift over the trajectory"),
        _invariant("energy_monotone", max_energy_rise, 1e-8, max_energy_rise <= 1e-8,
                   "max per-step interaction-energy increase"),
        _invariant("m2_gronwall_log_slack", worst_m2_slack, 1e-9, worst_m2_slack <= 1e-9,
                   "max of log(1+M2) - (K t + log(1+M2_0)), K = 2 w_inf + w_inf^2"),
    ]
    return {
        "scheme": "particles",
        "potential": config.potential,
        "dt": config.dt,
        "merge_radius": merge_radius,
        "t_end": config.t_end,
        "n_atoms_initial": traj[0][1].n_atoms,
        "n_atoms_final": traj[-1][1].n_atoms,
        "invariants": invariants,
        "snapshots": snapshots,
    }


# -- finite-volume scheme ----------------------------------------------------

def _save_fv_snapshot(state: fv2d.FvState, p: Potential, outdir: Path, k: int) -> dict:
    fname = f"snapshots/rho_{k:06d}.csv"
    # rows = fixed y (ascending), columns = x
    np.savetxt(outdir / fname, state.rho.T, delimiter=",", fmt="%.17g")
    diag = fv2d.fv_diagnostics(state, p)
    sidecar = {
        "t": state.time,
        "nx": state.grid.nx,
        "ny": state.grid.ny,
        "dx": state.grid.dx,
        "dy": state.grid.dy,
        "origin": list(state.grid.origin),
        "mass": diag["mass"],
        "com": [diag["com"][0], diag["com"][1]],
        "m2": diag["m2"],
        "energy": diag["energy"],
    }
    (outdir / fname).with_suffix(".json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )
    return {"file": fname, **sidecar}


def _run_fv(config: RunConfig, outdir: Path) -> dict:
    p = build_potential(config)
    gspec = config.grid
    grid = fv2d.Grid2D(
        nx=int(gspec["nx"]),
        ny=int(gspec["ny"]),
        dx=float(gspec["dx"]),
        dy=float(gspec["dy"]),
        origin=tuple(float(v) for v in gspec["origin"]),
    )
    ini = build_initial(config)
    state = fv2d.init_cells(ini, grid)
    kernel = fv2d.build_kernel(p, grid)
    dt = fv2d.cfl_dt(p, grid, config.cfl_safety)
    n_steps = max(1, int(np.ceil(config.t_end / dt - 1e-9)))

    xc = grid.x_centers()
    yc = grid.y_centers()
    r2 = xc[:, None] ** 2 + yc[None, :] ** 2
    area = grid.cell_area
    lam, w_inf = p.constants()
    C = 2.0 * w_inf + w_inf**2 + w_inf * max(grid.dx, grid.dy)
    log_env0 = np.log1p(float(np.sum(state.rho * r2)) * area)
    com0 = None

    worst = {
        "mass": 0.0, "com": 0.0, "min_rho": 0.0, "speed_excess": -np.inf,
        "m2_slack": -np.inf, "boundary": 0.0,
    }
    rows = []
    snapshots = []

    def com_of(rho):
        mass = float(np.sum(rho)) * area
        cx = float(xc @ np.sum(rho, axis=1)) * area / mass
        cy = float(np.sum(rho, axis=0) @ yc) * area / mass
        return mass, cx, cy

    mass0, cx0, cy0 = com_of(state.rho)
    com0 = (cx0, cy0)

    def track(st, info=None):
        mass, cx, cy = com_of(st.rho)
        m2 = float(np.sum(st.rho * r2)) * area
        worst["mass"] = max(worst["mass"], abs(mass - mass0))
        worst["com"] = max(worst["com"], float(np.hypot(cx - com0[0], cy - com0[1])))
        worst["m2_slack"] = max(worst["m2_slack"], float(np.log1p(m2) - (C * st.time + log_env0)))
        if info is not None:
            worst["min_rho"] = min(worst["min_rho"], info["min_rho"])
            worst["speed_excess"] = max(
                worst["speed_excess"], info["max_speed"] / w_inf - 1.0 if w_inf > 0 else 0.0
            )
            worst["boundary"] = max(worst["boundary"], info["boundary_max"])

    def snap(st):
        entry = _save_fv_snapshot(st, p, outdir, len(snapshots))
        snapshots.append(entry)
        diag = fv2d.fv_diagnostics(st, p)
        rows.append([st.time, diag["mass"], diag["com"][0], diag["com"][1],
                     diag["m2"], diag["energy"], diag["min_rho"]])

    track(state)
    snap(state)
    try:
        for n in range(1, n_steps + 1):
            step_dt = dt if n < n_steps else config.t_end - (n_steps - 1) * dt
            state, info = fv2d._advance(state, kernel, step_dt, config.velocity_assembly)
            track(state, info)
            if n % config.snapshot_every == 0 or n == n_steps:
                snap(state)
    finally:
        _write_diagnostics(
            outdir / "diagnostics.csv",
            ["t", "mass", "com_x", "com_y", "m2", "energy", "min_rho"],
            rows,
        )
        (outdir / "snapshots" / "snapshots.json").write_text(
            json.dumps(snapshots, indent=2) + "\n", encoding="utf-8"
        )

    invariants = [
        _invariant("mass_conservation", worst["mass"], 1e-12, worst["mass"] <= 1e-12,
                   "max |total mass - initial| over all steps"),
        _invariant("com_conservation", worst["com"], 1e-8, worst["com"] <= 1e-8,
                   "max center-of-mass drift over all steps"),
        _invariant("positivity", worst["min_rho"], -1e-15, worst["min_rho"] >= -1e-15,
                   "min cell value over all steps"),
        _invariant("velocity_bound", worst["speed_excess"], 1e-12,
                   worst["speed_excess"] <= 1e-12,
                   "max of max|a|/w_inf - 1 over all steps"),
        _invariant("m2_gronwall_log_slack", worst["m2_slack"], 1e-9,
                   worst["m2_slack"] <= 1e-9,
                   "max of log(1+M2) - (C t + log(1+M2_0)), C = 2 w_inf + w_inf^2 + w_inf max(dx,dy)"),
        _invariant("support_containment", worst["boundary"], fv2d.BOUNDARY_TOL,
                   worst["boundary"] <= fv2d.BOUNDARY_TOL,
                   "max boundary-ring density over all steps"),
    ]
    return {
        "scheme": "fv2d",
        "potential": config.potential,
        "dt": dt,
        "n_steps": n_steps,
        "t_end": config.t_end,
        "grid": config.grid,
        "renormalization": state.renormalization,
        "invariants": invariants,
        "snapshots": snapshots,
    }


# -- cross-run comparison ----------------------------------------------------

def _snapshot_measure(report: RunReport, entry: dict) -> DiscreteMeasure:
    path = report.output_dir / entry["file"]
    if report.scheme == "particles":
        return load_measure_csv(path).normalized()
    rho = np.loadtxt(path, delimiter=",", ndmin=2).T  # stored as (ny rows, nx cols)
    grid = fv2d.Grid2D(
        nx=entry["nx"], ny=entry["ny"], dx=entry["dx"], dy=entry["dy"],
        origin=tuple(entry["origin"]),
    )
    state = fv2d.FvState(grid=grid, rho=rho, time=entry["t"])
    return fv2d.state_to_measure(state).normalized()


def _match_snapshot(report: RunReport, t: float, tol: float) -> dict:
    best = min(report.snapshots, key=lambda s: abs(s["t"] - t))
    if abs(best["t"] - t) > tol:
        raise ValueError(
            f"no snapshot of {report.output_dir} within {tol} of t={t}; "
            "snapshot grids are incompatible"
        )
    return best


def compare(run_a: RunReport, run_b: RunReport, times, out_csv=None) -> list[tuple[float, float]]:
    """Transport distance between two runs at matching snapshot times."""
    if abs(run_a.report["t_end"] - run_b.report["t_end"]) > 1e-12:
        raise ValueError("runs have different t_end; refusing to compare")
    tol = 0.5 * max(run_a.report["dt"], run_b.report["dt"]) + 1e-12
    series = []
    for t in times:
        ea = _match_snapshot(run_a, t, tol)
        eb = _match_snapshot(run_b, t, tol)
        ma = _snapshot_measure(run_a, ea)
        mb = _snapshot_measure(run_b, eb)
        d, _ = wasserstein2(ma, mb)
        series.append((float(t), d))
    if out_csv is not None:
        _write_diagnostics(Path(out_csv), ["t", "d_w"], [list(row) for row in series])
    return series


# -- contraction diagnostics -------------------------------------------------

def contraction_test(
    p: Potential,
    seed: int,
    T: float,
    n_atoms: int,
    dt: float = 1e-4,
    n_times: int = 20,
    rel_slack: float = 1e-3,
) -> dict:
    """Empirical transport-distance stability check for the particle flow.

    Two seeded random atomic measures are evolved with the same potential;
    at every sampled time the distance must stay below exp(-2 lam t) times
    the initial distance (within `rel_slack`). The recentered variant
    translates the second measure onto the first one's center of mass,
    which sharpens the admissible rate to exp(-lam t).
    """
    lam, w_inf = p.constants()
    if lam > 0:
        raise ValueError("contraction rate is only defined for lam <= 0")
    rng = np.random.default_rng(seed)

    def random_measure():
        pos = rng.uniform(0.0, 1.0, size=(n_atoms, 2))
        mass = rng.uniform(0.5, 1.5, size=n_atoms)
        return DiscreteMeasure(pos, mass / mass.sum())

    mu0 = random_measure()
    nu0 = random_measure()
    merge_radius = 10.0 * max(w_inf, 1e-6) * dt

    def distances(m0, n0):
        tm = simulate(m0, p, T=T, dt=dt, merge_radius=merge_radius)
        tn = simulate(n0, p, T=T, dt=dt, merge_radius=merge_radius)
        stride = max(1, len(tm) // n_times)
        picks = list(range(stride, len(tm), stride))
        if picks[-1] != len(tm) - 1:
            picks.append(len(tm) - 1)
        out = []
        for i in picks:
            t = tm[i][0]
            d, _ = wasserstein2(tm[i][1], tn[i][1])
            out.append((t, d))
        return out

    d0, _ = wasserstein2(mu0, nu0)
    series = distances(mu0, nu0)
    checks = [d <= np.exp(-2.0 * lam * t) * d0 * (1.0 + rel_slack) for t, d in series]

    shift = mu0.center_of_mass() - nu0.center_of_mass()
    nu0_centered = DiscreteMeasure(nu0.positions + shift, nu0.masses)
    d0c, _ = wasserstein2(mu0, nu0_centered)
    series_c = distances(mu0, nu0_centered)
    checks_c = [d <= np.exp(-lam * t) * d0c * (1.0 + rel_slack) for t, d in series_c]

    return {
        "potential": {"kind": p.kind, "a": p.a},
        "lam": lam,
        "seed": seed,
        "T": T,
        "n_atoms": n_atoms,
        "dt": dt,
        "d0": d0,
        "series": [[t, d] for t, d in series],
        "bound_holds": all(checks),
        "d0_recentered": d0c,
        "series_recentered": [[t, d] for t, d in series_c],
        "recentered_bound_holds": all(checks_c),
        "passed": all(checks) and all(checks_c),
    }
