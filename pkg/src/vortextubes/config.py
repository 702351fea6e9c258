"""Run configuration for the end-to-end pipeline."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .curves import ClosedCurve, arclength_reparam, circle, load_curve, trefoil
from .errors import VortexTubeError
from .io import config_hash


class ConfigError(VortexTubeError):
    """Invalid or incomplete configuration; ``problems`` lists every issue."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def resolve_curve(spec) -> ClosedCurve:
    """Curve from a file path, a built-in name (``"trefoil"``, ``"circle"``)
    or a dict ``{"builtin": name, ...keyword arguments}``.

    Curves are returned in arc-length parametrization.
    """
    if isinstance(spec, ClosedCurve):
        c = spec
    elif isinstance(spec, dict):
        kw = dict(spec)
        name = kw.pop("builtin", None)
        if name == "circle":
            c = circle(float(kw.get("radius", 1.0)), tuple(kw.get("center", (0.0, 0.0, 0.0))))
        elif name == "trefoil":
            c = trefoil()
            if "center" in kw:
                c = c.transformed(np.eye(3), kw["center"])
        elif "modes" in kw:
            from .curves import make_fourier_curve
            c = make_fourier_curve((np.array(kw["cos"]), np.array(kw["sin"])), int(kw["modes"]))
        else:
            raise ConfigError([f"unknown curve specification {spec!r}"])
    elif spec in ("trefoil", "circle"):
        c = trefoil() if spec == "trefoil" else circle()
    else:
        p = Path(spec)
        if not p.exists():
            raise ConfigError([f"curve file not found: {spec}"])
        c = load_curve(p)
    return c if c.is_arclength else arclength_reparam(c)


@dataclass
class RunConfig:
    """Everything a pipeline run depends on.

    ``eps`` is either one value for all tubes or one value per curve.
    """

    curves: list = field(default_factory=list)
    eps: float | list = 0.05
    lam: float | None = None
    grid: tuple = (256, 16, 32)
    solver_tol: float = 1e-10
    ode_tol: float = 1e-10
    boundary_samples: int = 128
    birkhoff_iters: int = 10_000
    conjugacy_modes: int = 64
    torsion_nodes: int = 128
    section_seeds: int = 8
    section_iters: int = 50
    global_fit: bool = True
    fit_method: str = "bessel"
    fit_L: int = 24
    fit_sources: int = 1600
    fit_source_radius: float = 2.05
    fit_reg: float | None = None
    fit_tol: float = 1e-3
    global_orbits: bool = False
    n_returns: int = 1000
    out_dir: str = "out"
    seed: int = 0

    # -- construction ----------------------------------------------------------
    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError([f"unknown key {k!r}" for k in unknown])
        kw = dict(d)
        if "grid" in kw:
            kw["grid"] = tuple(int(v) for v in kw["grid"])
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = list(self.grid)
        return d

    @property
    def hash(self) -> str:
        """sha256 of the canonical JSON form (``out_dir`` excluded: moving the
        output does not change the results)."""
        d = self.to_dict()
        d.pop("out_dir")
        return config_hash(d)

    # -- checks ----------------------------------------------------------------
    def eps_list(self) -> list[float]:
        if isinstance(self.eps, (list, tuple)):
            return [float(e) for e in self.eps]
        return [float(self.eps)] * len(self.curves)

    def validate(self) -> None:
        problems = []
        if not self.curves:
            problems.append("missing input: curves")
        eps = self.eps if isinstance(self.eps, (list, tuple)) else [self.eps]
        if isinstance(self.eps, (list, tuple)) and len(self.eps) != len(self.curves):
            problems.append("eps list length must match the number of curves")
        if any(not np.isfinite(e) or e <= 0 for e in eps):
            problems.append("eps must be positive")
        for name in ("solver_tol", "ode_tol", "fit_tol"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive")
        if self.lam is not None and self.lam == 0:
            problems.append("lam must be nonzero")
        if self.fit_reg is not None and self.fit_reg < 0:
            problems.append("fit_reg must be non-negative")
        if len(self.grid) != 3 or self.grid[0] % 2 or self.grid[2] % 2 or min(self.grid) <= 0:
            problems.append("grid must be three positive integers with even n_alpha and n_theta")
        for name in ("boundary_samples", "birkhoff_iters", "conjugacy_modes", "torsion_nodes",
                     "section_seeds", "section_iters", "n_returns", "fit_L", "fit_sources"):
            if int(getattr(self, name)) <= 0:
                problems.append(f"{name} must be positive")
        if self.fit_method not in ("bessel", "mfs"):
            problems.append("fit_method must be 'bessel' or 'mfs'")
        if problems:
            raise ConfigError(problems)
