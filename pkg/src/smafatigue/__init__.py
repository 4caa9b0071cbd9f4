"""Phase-field fatigue simulator for superelastic shape-memory alloys."""

__version__ = "0.1.0"

from .material import (  # noqa: F401
    ConstitutiveError,
    MaterialParams,
    PointState,
    material_case,
    mixture_elastic,
    update_state,
)
from .phasefield import PhaseFieldConfig  # noqa: F401
