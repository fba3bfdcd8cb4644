"""Quasilinear Maxwell equations with an interface.

Submodules:

* :mod:`mxil.maxwell_algebra` exact symbol matrices and algebraic identities
* :mod:`mxil.material_laws` Kerr and linear isotropic constitutive laws
* :mod:`mxil.compatibility` time-derivative jets and compatibility residuals
* :mod:`mxil.halfspace_transform` reflection, charts and the interface normaliser
* :mod:`mxil.grid_solver` finite-difference evolution and checkpoints
* :mod:`mxil.diagnostics` norms, constraint residuals and blow-up monitors
* :mod:`mxil.scenario_cli` scenario files and the ``mxil`` command line
"""

from . import (
    compatibility,
    diagnostics,
    grid_solver,
    halfspace_transform,
    material_laws,
    maxwell_algebra,
    scenario_cli,
)

__version__ = "0.1.0"

__all__ = [
    "compatibility",
    "diagnostics",
    "grid_solver",
    "halfspace_transform",
    "material_laws",
    "maxwell_algebra",
    "scenario_cli",
]
