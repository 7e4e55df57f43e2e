"""Perception-measure statistics for finite-dimensional quantum states.

Submodules:
    operators   dense complex matrices, states, projectors, Haar sampling
    hypotheses  experience-operator variants and structural checks
    measures    perception spaces, measure profiles, typicalities
    inference   power-law exponent statistics and Bayesian updating
    toymodels   ball/circle/sphere models, two-step histories, paired spins
    manyworlds  projector decompositions and the replicated functional
    reproduce   reference-constant battery
"""

from .errors import (
    DegenerateInput,
    DimensionMismatch,
    InvalidExperience,
    QPerceptError,
    ValidationError,
    ZeroMeasure,
)
from .operators import (
    Operator,
    ParamPositiveOp,
    State,
    bloch_projector,
    expectation,
    from_params,
    haar_random_unitary,
    identity,
    is_projector,
    tensor_product,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateInput",
    "DimensionMismatch",
    "InvalidExperience",
    "QPerceptError",
    "ValidationError",
    "ZeroMeasure",
    "Operator",
    "ParamPositiveOp",
    "State",
    "bloch_projector",
    "expectation",
    "from_params",
    "haar_random_unitary",
    "identity",
    "is_projector",
    "tensor_product",
    "__version__",
]
