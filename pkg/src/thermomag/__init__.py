"""Precision limits for magnetometry with a thermal spin of arbitrary length."""

__version__ = "0.1.0"

from .fisher_classical import (
    CfiReport,
    FisherReport,
    MeasurementAxis,
    cfi,
    ensemble_precision,
    fisher_report,
    outcome_probabilities,
    probability_derivatives,
    pure_state_cfi,
    qubit_closed_form,
)
from .fisher_quantum import QfiReport, optimal_angle, pure_state_qfi, qfi, sld_operator
from .spin_algebra import AxisVector, SpinLength, axis_projection, build_spin_matrices, rotation_y
from .thermal_state import ParamPoint, ThermalSpinState, closed_form_moments, density_matrix, thermal_state
