"""Thin vortex tubes around closed curves: tube geometry, harmonic fields,
boundary dynamics, leading-order predictions and global Beltrami fields.

Public names are imported lazily so that the command-line entry point can
configure thread limits before numpy is loaded.
"""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "chart": ["TubeChart"],
    "curves": ["AdmissibilityReport", "ClosedCurve", "arclength_reparam", "check_admissible", "circle",
               "load_curve", "make_fourier_curve", "trefoil"],
    "flow": ["analyze_boundary", "boundary_map", "conjugacy", "field_X", "integrate",
             "measure_preservation_check", "monodromy_core", "normal_torsion", "poincare_map",
             "rotation_number", "trajectory_asymptotic"],
    "grid": ["TubeGrid", "TubeScalarField", "laplacian_apply"],
    "harmonic": ["HarmonicField", "asymptotic_check", "solve_harmonic"],
    "neumann": ["NeumannSolver", "harmonic_source", "solve_neumann"],
    "predictions": ["PredictionSet", "binormal_deform", "central_difference", "genericity_derivatives",
                    "predict"],
}
_WHERE = {name: mod for mod, names in _EXPORTS.items() for name in names}

__all__ = sorted(_WHERE)


def __getattr__(name):
    if name in _WHERE:
        return getattr(import_module(f".{_WHERE[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + __all__)
