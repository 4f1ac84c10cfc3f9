"""Thread-safe regularized lattice Boltzmann solver for one or two fluids."""

from .boundary import BoundarySpec, Face, FaceKind, classify_nodes, load_mask
from .fields import FieldSet, TwoFluidFieldSet, allocate, memory_report
from .lattice import LatticeKind, make_descriptor, validate_moments
from .parallel import WorkerPool
from .solver import CollisionParams, Simulation, equilibrium

__version__ = "0.1.0"
