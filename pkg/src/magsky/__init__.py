"""Magnon-skyrmion hybrid quantum system simulator."""

__version__ = "0.1.0"

from .operators import (  # noqa: E402
    DensityMatrix,
    HilbertSpace,
    Operator,
    basis_state,
    boson_ops,
    qubit_ops,
)
from .dynamics import LindbladModel, Trajectory, compare_models, evolve, expectation  # noqa: E402
from .device import DeviceParams, SkyrmionProfile, coupling_strength, squeezing_transform  # noqa: E402
from .scenarios import SCENARIOS, build_model  # noqa: E402

__all__ = [
    "__version__",
    "DensityMatrix",
    "HilbertSpace",
    "Operator",
    "basis_state",
    "boson_ops",
    "qubit_ops",
    "LindbladModel",
    "Trajectory",
    "compare_models",
    "evolve",
    "expectation",
    "DeviceParams",
    "SkyrmionProfile",
    "coupling_strength",
    "squeezing_transform",
    "SCENARIOS",
    "build_model",
]
