"""
salt-lab: stochastic fluid laboratory

Semimartingale driving paths, Stratonovich calculus on sampled paths,
and pseudo-spectral SALT Euler and rotating shallow-water solvers on the
doubly periodic domain.
"""

__version__ = "0.1.0"
__license__ = "MIT"

from src.models import (
    DrivingPath,
    EulerState,
    Grid2D,
    NoiseBasis,
    ParticleSet,
    RswParams,
    RswState,
    RunConfig,
    ScalarField,
    TimeGrid,
    VectorField2D,
)

__all__ = [
    "DrivingPath",
    "EulerState",
    "Grid2D",
    "NoiseBasis",
    "ParticleSet",
    "RswParams",
    "RswState",
    "RunConfig",
    "ScalarField",
    "TimeGrid",
    "VectorField2D",
]
