"""Regularized property elicitation for finite prediction tasks."""

from .core import (
    LOSSES,
    REGULARIZERS,
    Agent,
    OutcomeDistribution,
    Population,
    RegularizedObjective,
    TreatmentVector,
    expected_loss,
    objective_value,
)
from .elicitation import (
    EquivalenceReport,
    PropertyValue,
    check_equivalence,
    check_nonenforcing,
    check_subset_intersection,
    check_unfair_optimum_containment,
    dp_levelset_00_membership,
    regularized_property,
    unregularized_property,
)
from .errors import (
    ConfigurationError,
    DatasetError,
    DegeneratePopulationError,
    EnumerationLimitError,
    InvalidDistributionError,
    RegPropError,
    TrainingDivergedError,
    UnsupportedGroupStructureError,
)
from .kernels import BACKEND

__version__ = "0.1.0"
