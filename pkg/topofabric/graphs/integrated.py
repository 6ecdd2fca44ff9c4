"""
The integrated semantic-to-control cycle as a LangGraph graph.

One invocation processes one frame: solve semantics, extract the reasoning trace, run the
delay-robust control transform, simulate the control interval, verify, optionally resolve a
constraint violation hierarchically, and update priors.
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from topofabric.cochain.lexicographic import lexicographic_solve
from topofabric.control.margins import phase_margin
from topofabric.control.ortsf import design_point, ortsf_loop, ortsf_transform
from topofabric.control.prediction import predict_trace
from topofabric.control.simulation import simulate_closed_loop
from topofabric.graphs.base import BaseGraphState
from topofabric.graphs.pipeline_graph import PipelineStateGraph
from topofabric.models.constraints import AffineConstraint, EnergySpec
from topofabric.models.control import LoopModel, MarginReport, OrtsfCommand
from topofabric.models.experiment import ExperimentConfig, StepRecord
from topofabric.models.scene import ReasoningTrace, SceneState
from topofabric.semantics.distance import contextual_distance, contextual_stability_bound
from topofabric.semantics.onn import SemanticProblem, onn_solve
from topofabric.semantics.trace import build_reasoning_trace
from topofabric.topology.filtration import filtration_values
from topofabric.topology.multiscale import multiscale_analysis
from topofabric.topology.persistence import diagrams
from topofabric.topology.stability import ph_distance

logger = logging.getLogger(__name__)

PIPELINE_NAME = "integrated_cycle"


class ControlDesign(BaseModel):
    """The compensated loop shared by every frame of a run."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    gain: float
    crossover_hz: float
    loop: LoopModel
    margin: MarginReport
    bounded: bool


class FrameState(BaseGraphState):
    scene: SceneState
    previous: SceneState | None = Field(default=None, description="Solved scene of the last frame")
    history: list[ReasoningTrace] = Field(default_factory=list)
    previous_command: float | None = None
    solved: SceneState | None = None
    trace: ReasoningTrace | None = None
    command: OrtsfCommand | None = None
    record: StepRecord | None = None


def design_control(config: ExperimentConfig) -> ControlDesign:
    """Size the loop once and check its closed-loop stability with a unit step."""
    gain, f_c = design_point(config.control)
    loop = ortsf_loop(config.control)
    sim = simulate_closed_loop(
        loop,
        sampling_period=config.control.sampling_period,
        horizon=config.pipeline.horizon,
    )
    return ControlDesign(
        gain=gain, crossover_hz=f_c, loop=loop, margin=phase_margin(loop), bounded=sim.bounded
    )


class IntegratedCycle:
    """Node implementations bound to one experiment configuration."""

    def __init__(self, config: ExperimentConfig, design: ControlDesign | None = None):
        self.config = config
        self.design = design or design_control(config)

    def _filtration(self, scene: SceneState):
        topology = self.config.topology
        return filtration_values(scene.graph, scene.states, topology.alpha, topology.beta)

    def solve_semantics(self, state: FrameState) -> dict:
        solver = self.config.solver
        solved, _ = onn_solve(
            state.scene,
            weights=solver.weights,
            eta=solver.eta,
            tol=solver.tol,
            k_max=solver.k_max,
            rho=solver.rho,
        )
        info = solved.solve_info
        record = StepRecord(
            t=state.scene.timestamp,
            edges=state.scene.graph.m,
            dt=state.scene.timestamp - state.previous.timestamp if state.previous else None,
            total_loss=info.loss,
            context_loss=info.losses.get("context"),
            ricci_loss=info.losses.get("ricci"),
            constraint_residual=info.constraint_residual,
            converged=info.converged,
            penalized=info.penalized,
        )
        return {"solved": solved, "record": record}

    def extract_trace(self, state: FrameState) -> dict:
        topology = self.config.topology
        return {"trace": build_reasoning_trace(state.solved, topology.alpha, topology.beta)}

    def transform_control(self, state: FrameState) -> dict:
        window = [*state.history, state.trace][-self.config.pipeline.history :]
        command = ortsf_transform(window, self.config.control)
        value = float(command.command[0]) if command.command.size else 0.0
        delta = None if state.previous_command is None else abs(value - state.previous_command)
        record = state.record.model_copy(
            update={
                "command": value,
                "command_delta": delta,
                "phase_margin": self.design.margin.phase_margin,
            }
        )
        return {"command": command, "record": record}

    def simulate_interval(self, state: FrameState) -> dict:
        references = state.command.references
        channel = references[:, 0] if references.shape[1] else np.zeros(references.shape[0])
        sim = simulate_closed_loop(
            self.design.loop,
            reference=channel if channel.size >= 4 else np.resize(channel, 4),
            sampling_period=self.config.control.sampling_period,
        )
        record = state.record.model_copy(
            update={"output": float(sim.output[-1]), "unbounded": not self.design.bounded}
        )
        return {"record": record}

    def verify(self, state: FrameState) -> dict:
        cfg = self.config
        solved, record = state.solved, state.record
        weights = cfg.topology.dimension_weights
        alpha, beta = cfg.topology.alpha, cfg.topology.beta

        previous_trace = state.history[-1] if state.history else None
        predicted, _ = predict_trace(state.trace, previous_trace, cfg.control.delay)
        rebuilt = solved.with_states(predicted.states)
        context = contextual_distance(solved, rebuilt, weights, alpha, beta)

        updates: dict = {
            "context_distance": context,
            "loss_violation": record.total_loss >= cfg.pipeline.loss_threshold,
            "context_violation": context > cfg.pipeline.L_context * cfg.pipeline.eps_transform,
            "constraint_violation": record.penalized
            or record.constraint_residual > cfg.pipeline.residual_tol,
        }
        margin = self.design.margin
        updates["margin_violation"] = (
            not margin.has_crossover or margin.phase_margin < cfg.control.phi_safe
        )

        previous = state.previous
        if previous is not None:
            f_prev, f_now = self._filtration(previous), self._filtration(solved)
            updates["ph_distance"] = ph_distance(
                diagrams(previous.graph, f_prev), diagrams(solved.graph, f_now), weights
            )
            if previous.graph.edges == solved.graph.edges:
                analysis = multiscale_analysis(solved.graph, f_prev, cfg.topology.scales, f_now)
                updates["multiscale_drift"] = analysis.sup_drift
            if previous.constraint.matrix.shape == solved.constraint.matrix.shape:
                drift = contextual_distance(previous, solved, weights, alpha, beta)
                bound = contextual_stability_bound(
                    cfg.pipeline.L_context,
                    record.dt or 0.0,
                    record.total_loss,
                    cfg.pipeline.eps_conf,
                    cfg.pipeline.L_c,
                    cfg.pipeline.sigma,
                )
                updates["context_bound"] = bound
                updates["context_bound_violation"] = drift > bound
        return {"record": record.model_copy(update=updates)}

    def needs_hierarchy(self, state: FrameState) -> bool:
        return self.config.pipeline.hierarchy and state.record.constraint_violation

    def resolve_hierarchy(self, state: FrameState) -> dict:
        """Minimize the context residual first, then the semantic loss within eps_lex of it."""
        problem = SemanticProblem(state.scene, self.config.solver.weights)
        K, tau = problem.composite, problem.target
        levels = [
            EnergySpec.quadratic(2.0 * K.T @ K, -2.0 * K.T @ tau, float(tau @ tau)),
            EnergySpec.quadratic(problem.hessian, -problem.linear),
        ]
        s = lexicographic_solve(
            levels,
            AffineConstraint.empty(problem.observed.size),
            eps_lex=self.config.solver.eps_lex,
            x0=state.solved.states.reshape(-1),
        )
        residual = float(np.linalg.norm(K @ s - tau))
        logger.info(f"Hierarchical resolution left a constraint residual of {residual:.3e}")
        solved = state.solved.with_states(
            s.reshape(state.solved.states.shape), state.solved.solve_info
        )
        record = state.record.model_copy(
            update={
                "hierarchical": True,
                "constraint_residual": residual,
                "total_loss": problem.total(s),
            }
        )
        return {"solved": solved, "record": record}

    def update_priors(self, state: FrameState) -> dict:
        logger.info(f"Prior update for t={state.scene.timestamp} is a no-op")
        return {}


def build_integrated_graph(config: ExperimentConfig, design: ControlDesign | None = None):
    """Compile the per-frame graph for ``config``."""
    cycle = IntegratedCycle(config, design)
    graph = PipelineStateGraph(FrameState, pipeline_name=PIPELINE_NAME)
    graph.add_node(cycle.solve_semantics)
    graph.add_node(cycle.extract_trace)
    graph.add_node(cycle.transform_control)
    graph.add_node(cycle.simulate_interval)
    graph.add_node(cycle.verify)
    graph.add_node(cycle.resolve_hierarchy)
    graph.add_node(cycle.update_priors)
    graph.add_chain(
        "solve_semantics",
        "extract_trace",
        "transform_control",
        "simulate_interval",
        "verify",
        start=True,
    )
    graph.add_branch("verify", cycle.needs_hierarchy, "resolve_hierarchy", "update_priors")
    graph.add_chain("resolve_hierarchy", "update_priors", end=True)
    return graph.compile()
