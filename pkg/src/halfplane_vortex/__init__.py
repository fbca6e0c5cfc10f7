"""Two-layer quasi-geostrophic point vortices on the upper half plane."""
from .errors import DomainError, SingularityError
from .model import (
    PairGeometry,
    SystemState,
    Vortex,
    hamiltonian,
    make_state,
    pair_geometry,
    separation_rate_squared,
    stream_gradient,
    streamfunction,
    velocities,
    velocity,
    y_momentum,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "PairGeometry",
    "SingularityError",
    "SystemState",
    "Vortex",
    "hamiltonian",
    "make_state",
    "pair_geometry",
    "separation_rate_squared",
    "stream_gradient",
    "streamfunction",
    "velocities",
    "velocity",
    "y_momentum",
]
