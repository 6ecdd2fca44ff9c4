from topofabric.control.compensators import (
    SmithPredictor,
    design_gain,
    design_lead_lag,
    discretize,
    lead_compensation,
    smith_discrete,
    smith_predictor,
)
from topofabric.control.envelope import (
    check_operational_envelope,
    noise_threshold,
    robustness_radius,
    topological_robustness_bound,
)
from topofabric.control.margins import (
    delay_margin_bound,
    direct_margin_line,
    effective_phase_margin,
    margin_is_safe,
    phase_margin,
)
from topofabric.control.ortsf import design_point, ortsf_loop, ortsf_transform
from topofabric.control.prediction import (
    extrapolate,
    predict_trace,
    prediction_error_bound,
    predictor_lipschitz,
)
from topofabric.control.simulation import (
    discrete_response,
    simulate_closed_loop,
    step_response,
)
from topofabric.control.transfer import frequency_response, hinf_norm

__all__ = [
    "SmithPredictor",
    "check_operational_envelope",
    "delay_margin_bound",
    "design_gain",
    "design_lead_lag",
    "design_point",
    "direct_margin_line",
    "discrete_response",
    "discretize",
    "effective_phase_margin",
    "extrapolate",
    "frequency_response",
    "hinf_norm",
    "lead_compensation",
    "margin_is_safe",
    "noise_threshold",
    "ortsf_loop",
    "ortsf_transform",
    "phase_margin",
    "predict_trace",
    "prediction_error_bound",
    "predictor_lipschitz",
    "robustness_radius",
    "simulate_closed_loop",
    "smith_discrete",
    "smith_predictor",
    "step_response",
    "topological_robustness_bound",
]
