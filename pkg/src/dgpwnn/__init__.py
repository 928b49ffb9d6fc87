"""Discontinuous Galerkin plane-wave neural networks for Helmholtz and Maxwell problems."""

from .galerkin import RunReport, WidthSchedule, run
from .helmholtz_forms import HelmholtzForms, HelmholtzParams
from .maxwell_forms import MaxwellForms, MaxwellParams
from .mesh import InvalidConfigError, build_uniform_mesh
from .planewave import DirectionSet, PWExpansion, init_directions
from .problems import maxwell_dipole, point_source_3d, waveguide_exact_2d
from .trainer import TrainConfig, augment_basis

__all__ = [
    "DirectionSet",
    "HelmholtzForms",
    "HelmholtzParams",
    "InvalidConfigError",
    "MaxwellForms",
    "MaxwellParams",
    "PWExpansion",
    "RunReport",
    "TrainConfig",
    "WidthSchedule",
    "augment_basis",
    "build_uniform_mesh",
    "init_directions",
    "maxwell_dipole",
    "point_source_3d",
    "run",
    "waveguide_exact_2d",
]
