"""Globally defined Beltrami fields approximating local tube fields."""

from .bessel import helmholtz_basis, qhat, spherical_j
from .checks import (DecayReport, ResidualReport, beltrami_residual, decay_check, helmholtz_defect,
                     navier_stokes_factor, sample_grid)
from .fields import (BesselSeriesField, GlobalBeltramiField, HelmholtzField, PlaneWaveField, PointSourceField,
                     beltrami_project, field_from_dict)
from .fit import (DEFAULT_REG, FitReport, TargetSet, bessel_fit, enclosing_ball, fibonacci_sphere,
                  mfs_fit, solve_regularized, tube_targets)
from .helmholtz import greens, greens_derivatives, radial_helmholtz_defect
from .pipeline import (OrbitReport, PipelineConfig, PipelineResult, SectionMap, TubeReport,
                       check_disjoint, orbit_report, pipeline, section_map)

__all__ = [
    "BesselSeriesField", "DEFAULT_REG", "DecayReport", "FitReport", "GlobalBeltramiField",
    "HelmholtzField", "OrbitReport", "PlaneWaveField", "PipelineConfig", "PipelineResult", "PointSourceField",
    "ResidualReport", "SectionMap", "TargetSet", "TubeReport", "beltrami_project",
    "beltrami_residual", "bessel_fit", "check_disjoint", "decay_check", "enclosing_ball",
    "fibonacci_sphere", "field_from_dict", "greens", "greens_derivatives", "helmholtz_basis",
    "helmholtz_defect", "mfs_fit", "navier_stokes_factor", "orbit_report", "pipeline", "qhat",
    "radial_helmholtz_defect", "sample_grid", "section_map", "solve_regularized", "spherical_j",
    "tube_targets",
]
