"""Run configuration: a single JSON document per run.

Exactly the fields required by the selected scheme must be present;
validation errors name the offending key. Serialization is canonical
(sorted keys, two-space indent), so parse -> serialize round-trips to the
identical byte string.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = ["ConfigError", "RunConfig", "parse_config", "config_to_json", "load_config"]


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


_SCHEMES = ("particles", "fv2d")
_INITIAL_KINDS = ("three_bump", "atoms", "uniform_box", "custom_gaussians")
_ASSEMBLIES = ("fft", "direct")

_COMMON_KEYS = {"scheme", "potential", "initial", "t_end", "snapshot_every", "output_dir", "seed"}
_PARTICLE_KEYS = {"dt", "merge_radius"}
_FV_KEYS = {"grid", "cfl_safety", "velocity_assembly"}


@dataclass(frozen=True)
class RunConfig:
    scheme: str
    potential: dict
    initial: dict
    t_end: float
    output_dir: str
    snapshot_every: int = 1
    seed: int = 0
    # particles only
    dt: float | None = None
    merge_radius: float | None = None
    # fv2d only
    grid: dict | None = None
    cfl_safety: float | None = None
    velocity_assembly: str | None = None

    def to_dict(self) -> dict:
        out = {
            "scheme": self.scheme,
            "potential": dict(self.potential),
            "initial": dict(self.initial),
            "t_end": self.t_end,
            "snapshot_every": self.snapshot_every,
            "output_dir": self.output_dir,
            "seed": self.seed,
        }
        if self.scheme == "particles":
            out["dt"] = self.dt
            if self.merge_radius is not None:
                out["merge_radius"] = self.merge_radius
        else:
            out["grid"] = dict(self.grid)
            out["cfl_safety"] = self.cfl_safety
            out["velocity_assembly"] = self.velocity_assembly
        return out


def _require(cond, key, msg):
    if not cond:
        raise ConfigError(f"config key '{key}': {msg}")


def _check_potential(spec) -> dict:
    _require(isinstance(spec, dict), "potential", "must be an object")
    kind = spec.get("kind")
    _require(kind in ("morse", "abs"), "potential.kind", f"unknown kind {kind!r}")
    allowed = {"kind", "a", "mollify_eps"}
    extra = set(spec) - allowed
    _require(not extra, "potential", f"unexpected keys {sorted(extra)}")
    if kind == "morse":
        _require("a" in spec and float(spec["a"]) > 0, "potential.a",
                 "Morse potential needs a positive stiffness 'a'")
    else:
        _require("a" not in spec, "potential.a", "the |x| potential takes no parameter")
    if "mollify_eps" in spec:
        _require(float(spec["mollify_eps"]) > 0, "potential.mollify_eps", "must be positive")
    return dict(spec)


def _check_initial(spec, scheme) -> dict:
    _require(isinstance(spec, dict), "initial", "must be an object")
    kind = spec.get("kind")
    _require(kind in _INITIAL_KINDS, "initial.kind", f"unknown kind {kind!r}")
    if kind == "three_bump":
        allowed = {"kind", "cx"}
        if "cx" in spec:
            _require(float(spec["cx"]) > 0, "initial.cx", "must be positive")
    elif kind == "atoms":
        allowed = {"kind", "path"}
        _require("path" in spec, "initial.path", "atoms initial data needs a file path")
    elif kind == "uniform_box":
        allowed = {"kind", "corners"}
        _require("corners" in spec, "initial.corners", "uniform_box needs box corners")
    else:  # custom_gaussians
        allowed = {"kind", "gaussians"}
        gs = spec.get("gaussians")
        _require(isinstance(gs, list) and gs, "initial.gaussians", "need a nonempty list")
        for k, g in enumerate(gs):
            _require(
                isinstance(g, dict) and {"center", "weight", "cx"} <= set(g),
                f"initial.gaussians[{k}]",
                "each entry needs center, weight, cx",
            )
    extra = set(spec) - allowed
    _require(not extra, "initial", f"unexpected keys {sorted(extra)}")
    if scheme == "particles":
        _require(kind == "atoms", "initial.kind",
                 "the particle scheme takes atomic initial data (kind 'atoms')")
    return dict(spec)


def parse_config(doc: dict) -> RunConfig:
    """Validate a decoded JSON document and build a RunConfig."""
    _require(isinstance(doc, dict), "<root>", "config must be a JSON object")
    scheme = doc.get("scheme")
    if scheme is None:
        raise ConfigError("config key 'scheme': missing (expected 'particles' or 'fv2d')")
    _require(scheme in _SCHEMES, "scheme", f"unknown scheme {scheme!r}")

    allowed = _COMMON_KEYS | (_PARTICLE_KEYS if scheme == "particles" else _FV_KEYS)
    extra = set(doc) - allowed
    _require(not extra, "<root>",
             f"keys {sorted(extra)} are not valid for scheme '{scheme}'")
    for key in ("potential", "initial", "t_end", "output_dir"):
        _require(key in doc, key, "missing")

    t_end = float(doc["t_end"])
    _require(t_end > 0, "t_end", "must be positive")
    snapshot_every = int(doc.get("snapshot_every", 1))
    _require(snapshot_every >= 1, "snapshot_every", "must be a positive integer")

    kwargs = dict(
        scheme=scheme,
        potential=_check_potential(doc["potential"]),
        initial=_check_initial(doc["initial"], scheme),
        t_end=t_end,
        snapshot_every=snapshot_every,
        output_dir=str(doc["output_dir"]),
        seed=int(doc.get("seed", 0)),
    )
    if scheme == "particles":
        _require("dt" in doc, "dt", "missing (particle scheme needs a step size)")
        dt = float(doc["dt"])
        _require(0 < dt <= t_end, "dt", "need 0 < dt <= t_end")
        kwargs["dt"] = dt
        if "merge_radius" in doc:
            _require(float(doc["merge_radius"]) > 0, "merge_radius", "must be positive")
            kwargs["merge_radius"] = float(doc["merge_radius"])
    else:
        _require("grid" in doc, "grid", "missing (fv2d scheme needs a grid)")
        grid = doc["grid"]
        _require(isinstance(grid, dict), "grid", "must be an object")
        for key in ("nx", "ny", "dx", "dy", "origin"):
            _require(key in grid, f"grid.{key}", "missing")
        _require(int(grid["nx"]) > 0 and int(grid["ny"]) > 0, "grid.nx", "cell counts must be positive")
        _require(float(grid["dx"]) > 0 and float(grid["dy"]) > 0, "grid.dx", "spacings must be positive")
        kwargs["grid"] = dict(grid)
        _require("cfl_safety" in doc, "cfl_safety", "missing")
        safety = float(doc["cfl_safety"])
        _require(0 < safety <= 1, "cfl_safety", "must lie in (0, 1]")
        kwargs["cfl_safety"] = safety
        assembly = doc.get("velocity_assembly", "fft")
        _require(assembly in _ASSEMBLIES, "velocity_assembly", f"unknown assembly {assembly!r}")
        kwargs["velocity_assembly"] = assembly
    return RunConfig(**kwargs)


def config_to_json(config: RunConfig) -> str:
    """Canonical serialization: sorted keys, two-space indent, newline-terminated."""
    return json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n"


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(json.load(fh))
