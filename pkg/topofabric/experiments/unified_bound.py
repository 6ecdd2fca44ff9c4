import logging
import math

from topofabric.exceptions import InputError
from topofabric.experiments.reports import output_dir, write_plot_json
from topofabric.models.experiment import BoundRecord, BoundReport, BoundSection, RunReport

logger = logging.getLogger(__name__)

REQUIRED_CONSTANTS = ("C1", "C2", "L_ortsf", "L_context", "eps_conf", "sigma")
SLACK = 1e-12


def check_constants(constants: BoundSection) -> None:
    """
    Raises:
        InputError: Listing every missing constant, or on per-dimension lists of the wrong size.
    """
    missing = [name for name in REQUIRED_CONSTANTS if getattr(constants, name) is None]
    if missing:
        raise InputError(f"unified bound constants missing: {', '.join(missing)}")
    for name in ("C1", "C2"):
        values = getattr(constants, name)
        if len(values) != 2 or any(v <= 0 for v in values):
            raise InputError(f"{name} needs two positive entries (dimensions 0 and 1)")


def evaluate_unified_bound(
    run: RunReport,
    constants: BoundSection,
    dimension_weights: tuple[float, float] = (0.5, 0.5),
) -> BoundReport:
    """
    Measured left-hand side against the unified right-hand side, step by step.

    LHS: d_PH to the previous step + sup multi-scale drift + command change.
    RHS: sum_k alpha_k (C1_k + C2_k) kappa sqrt(L_ricci) + L_ortsf C_sem sqrt(L_context)
    + L_context dt + sqrt(2 L_c^2 sigma^2 ln(2 / eps_conf)). Errored steps are skipped.
    """
    check_constants(constants)
    confidence = math.sqrt(
        2.0 * constants.L_c**2 * constants.sigma**2 * math.log(2.0 / constants.eps_conf)
    )
    topology_weight = sum(
        a * (c1 + c2)
        for a, c1, c2 in zip(dimension_weights, constants.C1, constants.C2, strict=True)
    )
    report = BoundReport()
    for record in run.records:
        if record.error is not None:
            continue
        ph_term = record.ph_distance or 0.0
        multiscale_term = record.multiscale_drift or 0.0
        command_term = record.command_delta or 0.0
        kappa = constants.kappa or math.sqrt(record.edges)
        topology_rhs = topology_weight * kappa * math.sqrt(max(record.ricci_loss or 0.0, 0.0))
        control_rhs = constants.L_ortsf * constants.C_sem * math.sqrt(
            max(record.context_loss or 0.0, 0.0)
        )
        context_rhs = constants.L_context * (record.dt or 0.0)
        lhs = ph_term + multiscale_term + command_term
        rhs = topology_rhs + control_rhs + context_rhs + confidence
        report.records.append(
            BoundRecord(
                t=record.t,
                ph_term=ph_term,
                multiscale_term=multiscale_term,
                command_term=command_term,
                lhs=lhs,
                topology_rhs=topology_rhs,
                control_rhs=control_rhs,
                context_rhs=context_rhs,
                confidence_rhs=confidence,
                rhs=rhs,
                satisfied=lhs <= rhs + SLACK,
            )
        )
    unsatisfied = sum(not r.satisfied for r in report.records)
    logger.info(f"unified bound: {len(report.records)} steps, {unsatisfied} unsatisfied")
    return report


def write_bound_report(report: BoundReport, out: str) -> list[str]:
    directory = output_dir(out)
    data = report.to_csv(directory / "unified_bound.csv")
    plot = write_plot_json(
        directory / "unified_bound.plot.json",
        data,
        x="t",
        series=["lhs", "rhs"],
        title="Unified stability bound",
        x_label="time (s)",
    )
    return [data, plot]
