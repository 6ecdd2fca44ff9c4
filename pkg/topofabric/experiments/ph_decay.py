import logging
import math

import numpy as np
from scipy.stats import linregress

from topofabric.cochain.projection import project_matrix
from topofabric.exceptions import InputError
from topofabric.experiments.reports import output_dir, write_plot_json
from topofabric.models.constraints import AffineConstraint
from topofabric.models.experiment import DecayTable, ExperimentConfig, PhDecaySection
from topofabric.models.graph import WeightedGraph
from topofabric.models.scene import SceneState
from topofabric.models.topology import PersistenceDiagram
from topofabric.rng import make_rng
from topofabric.semantics.onn import SemanticProblem, onn_solve
from topofabric.topology.filtration import filtration_values
from topofabric.topology.persistence import diagrams
from topofabric.topology.stability import ph_distance

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 50
VANISHING_DISTANCE = 1e-12


def synthetic_scene(section: PhDecaySection, seed: int) -> SceneState:
    """
    A ring of ``vertices`` with ``extra_edges`` random chords and Gaussian states.

    The context constraint pins the induced cochain of the first edge to its observed value.
    """
    rng = make_rng(seed)
    n = section.vertices
    pairs = {(i, i % n + 1) if i < n else (1, n) for i in range(1, n + 1)}
    candidates = [(u, v) for u in range(1, n + 1) for v in range(u + 2, n + 1) if (u, v) != (1, n)]
    order = rng.permutation(len(candidates))
    pairs |= {candidates[k] for k in order[: section.extra_edges]}
    graph = WeightedGraph.from_pairs(sorted(pairs))
    states = rng.normal(size=(n, section.d))
    free = SceneState(graph=graph, states=states, constraint=AffineConstraint.empty(graph.m))
    observed = free.cochain_operator() @ states.reshape(-1)
    pin = np.zeros((1, graph.m))
    pin[0, 0] = 1.0
    return SceneState(
        graph=graph,
        states=states,
        constraint=AffineConstraint(matrix=pin, target=observed[:1]),
    )


def checkpoint_iterations(section: PhDecaySection) -> np.ndarray:
    last = section.iterations // 2
    grid = np.unique(np.round(np.geomspace(1, last, 4 * section.checkpoints)).astype(int))
    if grid.size < section.checkpoints:
        raise InputError(
            f"only {grid.size} distinct checkpoints fit in {section.iterations} iterations; "
            f"{section.checkpoints} requested"
        )
    return grid


def run_ph_decay(config: ExperimentConfig) -> DecayTable:
    """
    Track d_PH(G(k), G(2k)) along stochastic projected-gradient runs of ``onn_solve``.

    Each run starts ``amplitude`` away from the constrained optimum inside the feasible set and
    steps with eta_k = 1 / (mu (k + k0)) on gradients perturbed by ``noise``, where mu is the
    smallest eigenvalue of the semantic Hessian. k0 is raised until eta_0 <= 1 / ||Q||. The
    distances are averaged over ``repeats`` independent noise streams.
    """
    section = config.ph_decay
    scene = synthetic_scene(section, config.seed)
    problem = SemanticProblem(scene, config.solver.weights)
    eigenvalues = np.linalg.eigvalsh(problem.hessian)
    mu, lipschitz = float(eigenvalues[0]), float(eigenvalues[-1])
    if mu <= 0:
        raise InputError("synthetic semantic loss is not strongly convex; raise the data weight")
    k0 = max(section.k0, math.ceil(lipschitz / mu))
    ks = checkpoint_iterations(section)
    logger.info(
        f"ph-decay: mu {mu:.4g}, ||Q|| {lipschitz:.4g}, k0 {k0}, "
        f"{section.repeats} run(s) of {2 * int(ks[-1])} iterations"
    )

    optimum = problem.constrained_optimum()
    free = project_matrix(problem.reduced_constraint())
    totals = np.zeros(ks.size)
    for run in range(section.repeats):
        rng = make_rng(config.seed, stream=run + 1)
        direction = free @ rng.standard_normal(optimum.size)
        norm = float(np.linalg.norm(direction))
        start = optimum + section.amplitude * direction / norm if norm > 0 else optimum.copy()
        totals += _decay_run(config, scene, start, ks, mu, k0, rng)

    distances = (totals / section.repeats).tolist()
    table = DecayTable(iterations=ks.tolist(), lags=ks.tolist(), distances=distances)
    return fit_decay(table, section.burn_in)


def _decay_run(
    config: ExperimentConfig,
    scene: SceneState,
    start: np.ndarray,
    ks: np.ndarray,
    mu: float,
    k0: int,
    rng: np.random.Generator,
) -> np.ndarray:
    topology = config.topology
    wanted = set(ks.tolist()) | set((2 * ks).tolist())
    snapshots: dict[int, dict[int, PersistenceDiagram]] = {}

    def schedule(k: int) -> float:
        return 1.0 / (mu * (k + k0))

    def record(s: np.ndarray, iteration: int) -> None:
        if iteration in wanted:
            states = s.reshape(scene.states.shape)
            f = filtration_values(scene.graph, states, topology.alpha, topology.beta)
            snapshots[iteration] = diagrams(scene.graph, f)

    onn_solve(
        scene,
        config.solver.weights,
        tol=0.0,
        k_max=2 * int(ks[-1]),
        initial=start,
        schedule=schedule,
        gradient_noise=config.ph_decay.noise,
        rng=rng,
        callback=record,
    )
    return np.array(
        [
            ph_distance(snapshots[int(k)], snapshots[int(2 * k)], topology.dimension_weights)
            for k in ks
        ]
    )


def fit_decay(table: DecayTable, burn_in: int) -> DecayTable:
    """Log-log least-squares slope over the checkpoints past ``burn_in``."""
    tail = [
        (k, d)
        for k, d in zip(table.iterations, table.distances, strict=True)
        if k >= burn_in and d > VANISHING_DISTANCE
    ]
    if len(tail) < MIN_FIT_POINTS:
        note = (
            "distances vanish; slope undefined"
            if all(d <= VANISHING_DISTANCE for d in table.distances)
            else f"only {len(tail)} usable points past burn-in; fit refused"
        )
        logger.warning(f"ph-decay fit skipped: {note}")
        return table.model_copy(update={"fitted": False, "note": note})
    k, d = np.array(tail, dtype=float).T
    fit = linregress(np.log(k), np.log(d))
    logger.info(f"ph-decay slope {fit.slope:.4f} (r^2 {fit.rvalue**2:.4f}) over {len(tail)} points")
    return table.model_copy(
        update={
            "slope": float(fit.slope),
            "intercept": float(fit.intercept),
            "r_squared": float(fit.rvalue**2),
            "fitted": math.isfinite(fit.slope),
        }
    )


def write_decay_table(table: DecayTable, out: str) -> list[str]:
    directory = output_dir(out)
    data = table.to_csv(directory / "ph_decay.csv")
    plot = write_plot_json(
        directory / "ph_decay.plot.json",
        data,
        x="iteration",
        series=["ph_distance"],
        title="Persistence distance between iterates k and 2k",
        x_label="iteration k",
        y_label="d_PH",
        log_log=True,
    )
    return [data, plot]
