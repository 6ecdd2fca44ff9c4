import math

from topofabric.exceptions import InputError
from topofabric.models.control import EnvelopeReport


def robustness_radius(gamma: float, K_c: float, delay: float, g_norm: float) -> float:
    """Largest plant perturbation ||Delta G||_inf tolerated: ln(gamma) / (K_c delay ||G||_inf)."""
    if gamma <= 1:
        raise InputError(f"gain margin must exceed 1, got {gamma}")
    if K_c <= 0 or g_norm <= 0:
        raise InputError("gains must be positive")
    if delay <= 0:
        return math.inf
    return math.log(gamma) / (K_c * delay * g_norm)


def noise_threshold(eps_safe: float, L_c: float, L_y: float) -> float:
    """Largest sensor noise sigma* = eps_safe / (L_c L_y) keeping the topology within eps_safe."""
    if L_c <= 0 or L_y <= 0:
        raise InputError("Lipschitz constants must be positive")
    return eps_safe / (L_c * L_y)


def topological_robustness_bound(
    L_context: float, delta: float, total_loss: float, L_c: float, L_y: float, sigma_max: float
) -> float:
    """Context drift under noise sigma_max: L_context delta + sqrt(L_total) + L_c L_y sigma_max."""
    return L_context * delta + math.sqrt(max(total_loss, 0.0)) + L_c * L_y * sigma_max


def check_operational_envelope(
    model_error: float,
    r_robust: float,
    sigma_max: float,
    sigma_star: float,
    total_loss: float,
    loss_threshold: float,
) -> EnvelopeReport:
    """All three conditions are strict inequalities."""
    return EnvelopeReport(
        control_stable=model_error < r_robust,
        topology_stable=sigma_max < sigma_star,
        context_consistent=total_loss < loss_threshold,
    )
