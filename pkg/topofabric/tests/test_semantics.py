import math
from unittest import TestCase

import numpy as np
from parameterized import parameterized
from scipy.stats import special_ortho_group

from topofabric.exceptions import InputError
from topofabric.models.constraints import AffineConstraint
from topofabric.models.graph import WeightedGraph
from topofabric.models.scene import LossWeights, SceneState, SemanticMap
from topofabric.rng import make_rng
from topofabric.semantics import (
    apply_ontology_rules,
    build_reasoning_trace,
    context_drift_bound,
    contextual_distance,
    contextual_stability_bound,
    edge_interactions,
    fuse_class_posteriors,
    fuse_maps,
    kabsch,
    onn_solve,
    parse_rule,
    project_pose,
    tracking_bound,
    tracking_report,
)
from topofabric.semantics.onn import SemanticProblem
from topofabric.semantics.ontology import parse_atom
from topofabric.tests.factories import SceneStateFactory, WeightedGraphFactory, random_orthogonal


def two_node_scene(states, constraint: AffineConstraint | None = None) -> SceneState:
    graph = WeightedGraph.from_pairs([(1, 2)])
    return SceneStateFactory(
        graph=graph,
        states=np.asarray(states, dtype=float).reshape(2, -1),
        constraint=constraint or AffineConstraint.empty(1),
    )


def rotation_about_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


class OnnSolveTest(TestCase):
    """Tests for the semantic solve."""

    def test_optimal_scene_needs_no_iterations(self):
        scene = SceneStateFactory(states=np.full((3, 2), 0.7))
        solved, history = onn_solve(scene)
        self.assertTrue(solved.solve_info.converged)
        self.assertEqual(solved.solve_info.iterations, 0)
        self.assertEqual(history, [])
        np.testing.assert_allclose(solved.states, scene.states)

    def test_pinned_edge_matches_kkt(self):
        pin = AffineConstraint(matrix=[[1.0]], target=[1.0])
        solved, _ = onn_solve(two_node_scene([0.2, 0.5], pin), tol=1e-12)
        # projection of the observation onto s2 - s1 = 1
        np.testing.assert_allclose(solved.states.reshape(-1), [-0.15, 0.85], atol=1e-7)
        self.assertLess(solved.solve_info.constraint_residual, 1e-9)

    def test_solution_matches_dense_saddle_solve(self):
        rng = make_rng(31)
        graph = WeightedGraphFactory()
        scene = SceneStateFactory(
            graph=graph,
            states=rng.standard_normal((3, 2)),
            constraint=AffineConstraint(matrix=[[1.0, 0.0, 0.0]], target=[0.4]),
        )
        solved, _ = onn_solve(scene, tol=1e-12, k_max=50_000)
        problem = SemanticProblem(scene, LossWeights())
        C = problem.composite
        system = np.block([[problem.hessian, C.T], [C, np.zeros((1, 1))]])
        rhs = np.concatenate([problem.linear, problem.target])
        expected = np.linalg.solve(system, rhs)[:6]
        np.testing.assert_allclose(solved.states.reshape(-1), expected, atol=1e-7)

    def test_conflicting_constraint_uses_exact_penalty(self):
        # cycle sums of an induced cochain vanish, so this row cannot be met
        cycle = AffineConstraint(matrix=[[1.0, -1.0, 1.0]], target=[1.0])
        scene = SceneStateFactory(states=np.arange(6, dtype=float).reshape(3, 2), constraint=cycle)
        with self.assertLogs("topofabric.semantics.onn", level="INFO") as log:
            solved, history = onn_solve(scene)
        self.assertTrue(solved.solve_info.penalized)
        self.assertAlmostEqual(solved.solve_info.constraint_residual, 1.0, places=6)
        self.assertEqual(len(history), 1)
        self.assertTrue(any("exact-penalty" in message for message in log.output))

    def test_loss_history_is_non_increasing(self):
        rng = make_rng(32)
        scene = SceneStateFactory(states=rng.standard_normal((3, 4)))
        _, history = onn_solve(scene)
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(history, history[1:])))

    def test_step_outside_interval_rejected(self):
        with self.assertRaises(InputError):
            onn_solve(SceneStateFactory(), eta=10.0)

    def test_constrained_optimum_matches_iterative_solve(self):
        pin = AffineConstraint(matrix=[[1.0]], target=[1.0])
        scene = two_node_scene([0.2, 0.5], pin)
        solved, _ = onn_solve(scene, tol=1e-12)
        optimum = SemanticProblem(scene, LossWeights()).constrained_optimum()
        np.testing.assert_allclose(optimum, [-0.15, 0.85], atol=1e-12)
        np.testing.assert_allclose(solved.states.reshape(-1), optimum, atol=1e-7)

    # ==================== Iteration Hook Tests ====================

    def test_callback_sees_every_iterate_when_tol_is_zero(self):
        seen = []
        onn_solve(
            SceneStateFactory(states=np.full((3, 2), 0.7)),
            tol=0.0,
            k_max=25,
            callback=lambda s, iteration: seen.append(iteration),
        )
        self.assertEqual(seen, list(range(1, 26)))

    def test_noisy_iterates_stay_on_the_constraint(self):
        pin = AffineConstraint(matrix=[[1.0, 0.0, 0.0]], target=[0.4])
        scene = SceneStateFactory(states=make_rng(33).standard_normal((3, 2)), constraint=pin)
        problem = SemanticProblem(scene, LossWeights())
        residuals = []
        onn_solve(
            scene,
            tol=0.0,
            k_max=200,
            initial=np.zeros(6),
            schedule=lambda k: 0.1 / (k + 5),
            gradient_noise=0.5,
            rng=make_rng(34),
            callback=lambda s, _: residuals.append(
                float(np.linalg.norm(problem.composite @ s - problem.target))
            ),
        )
        self.assertEqual(len(residuals), 200)
        self.assertLessEqual(max(residuals), 1e-10)

    def test_initial_point_is_used(self):
        scene = two_node_scene([0.0, 0.0])
        first = []
        onn_solve(
            scene,
            tol=0.0,
            k_max=1,
            eta=0.1,
            initial=[1.0, -1.0],
            callback=lambda s, _: first.append(s.copy()),
        )
        # the data term still anchors to the observed zeros
        problem = SemanticProblem(scene, LossWeights())
        expected = np.array([1.0, -1.0]) - 0.1 * problem.gradient(np.array([1.0, -1.0]))
        np.testing.assert_allclose(first[0], expected, atol=1e-12)

    def test_same_noise_stream_same_result(self):
        scene = SceneStateFactory(states=make_rng(35).standard_normal((3, 2)))

        def run():
            solved, _ = onn_solve(
                scene, tol=0.0, k_max=50, gradient_noise=0.3, rng=make_rng(36, stream=2)
            )
            return solved.states

        np.testing.assert_array_equal(run(), run())

    @parameterized.expand(
        [
            ("negative_noise", {"gradient_noise": -0.1}),
            ("wrong_initial_size", {"initial": np.zeros(4)}),
            ("schedule_too_large", {"schedule": lambda k: 10.0}),
        ]
    )
    def test_invalid_hooks_rejected(self, _, options):
        with self.assertRaises(InputError):
            onn_solve(SceneStateFactory(), tol=0.0, k_max=5, **options)

    def test_schedule_checked_at_every_step(self):
        with self.assertRaises(InputError):
            onn_solve(
                SceneStateFactory(),
                tol=0.0,
                k_max=10,
                schedule=lambda k: 0.01 if k < 3 else 100.0,
            )


class ReasoningTraceTest(TestCase):
    """Tests for build_reasoning_trace."""

    def test_two_node_trace(self):
        solved, _ = onn_solve(two_node_scene([0.0, 1.0]))
        trace = build_reasoning_trace(solved)
        self.assertEqual(trace.interactions.shape, (1, 2))
        self.assertEqual(trace.diagrams[1].points, [])

    def test_triangle_trace_has_one_essential_cycle(self):
        solved, _ = onn_solve(SceneStateFactory(states=np.arange(6, dtype=float).reshape(3, 2)))
        trace = build_reasoning_trace(solved)
        self.assertEqual(len(trace.diagrams[1].essential()), 1)

    def test_identical_scenes_serialize_identically(self):
        scene = SceneStateFactory(states=np.arange(6, dtype=float).reshape(3, 2), timestamp=1.0)
        first = build_reasoning_trace(onn_solve(scene)[0])
        second = build_reasoning_trace(onn_solve(scene.model_copy())[0])
        self.assertEqual(first.to_json(), second.to_json())

    def test_unsolved_scene_rejected(self):
        with self.assertRaises(InputError):
            build_reasoning_trace(SceneStateFactory())

    def test_interactions_carry_weight(self):
        scene = two_node_scene([1.0, 3.0])
        np.testing.assert_allclose(edge_interactions(scene), [[-2.0, 1.0]])


class ContextualDistanceTest(TestCase):
    """Tests for contextual_distance and the context bounds."""

    def test_scene_against_itself(self):
        scene = SceneStateFactory(states=np.arange(6, dtype=float).reshape(3, 2))
        self.assertEqual(contextual_distance(scene, scene), 0.0)

    def test_target_shift_only(self):
        states = np.arange(6, dtype=float).reshape(3, 2)
        matrix = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
        original = AffineConstraint(matrix=matrix, target=[0.0, 0.0])
        a = SceneStateFactory(states=states, constraint=original)
        shifted = AffineConstraint(matrix=matrix, target=[0.18, 0.24])
        b = SceneStateFactory(states=states, constraint=shifted)
        self.assertAlmostEqual(contextual_distance(a, b), 0.3)

    def test_perturbed_states_stay_within_stability_bound(self):
        rng = make_rng(33)
        for _ in range(20):
            states = rng.standard_normal((3, 2))
            eps = 0.05
            a = SceneStateFactory(states=states)
            b = SceneStateFactory(states=states + rng.uniform(-eps, eps, states.shape))
            # each edge value moves by at most ||S_i - S_j|| change <= 2 eps sqrt(d)
            self.assertLessEqual(contextual_distance(a, b), 2 * eps * math.sqrt(2) + 1e-12)

    def test_constraint_shape_mismatch_rejected(self):
        a = SceneStateFactory(constraint=AffineConstraint(matrix=[[1.0, 0, 0]], target=[0.0]))
        with self.assertRaises(InputError):
            contextual_distance(a, SceneStateFactory())

    def test_drift_bound(self):
        self.assertAlmostEqual(context_drift_bound(0.1, 2.0, 0.05), 0.2)

    def test_stability_bound_without_noise(self):
        self.assertAlmostEqual(contextual_stability_bound(1.0, 0.5, 0.04, 0.05), 0.7)

    def test_stability_bound_confidence_checked(self):
        with self.assertRaises(InputError):
            contextual_stability_bound(1.0, 0.5, 0.04, 1.5)


class MapFusionTest(TestCase):
    """Tests for fuse_maps and the rigid alignment."""

    def setUp(self):
        rng = make_rng(34)
        self.points = rng.uniform(-1.0, 1.0, (12, 3))
        self.classes = ["cup", "table", "book"] * 4

    def test_identical_maps(self):
        A = SemanticMap(points=self.points, classes=self.classes)
        result = fuse_maps(A, A, eps=1e-3)
        np.testing.assert_allclose(result.rotation, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(result.translation, 0.0, atol=1e-12)
        self.assertAlmostEqual(result.objective, 0.0, places=12)

    def test_translation_recovered(self):
        A = SemanticMap(points=self.points, classes=self.classes)
        B = SemanticMap(points=self.points + [1.0, 0.0, 0.0], classes=self.classes)
        pairs = [(i, i) for i in range(12)]
        result = fuse_maps(A, B, eps=2.0, correspondences=pairs)
        np.testing.assert_allclose(result.translation, [1.0, 0.0, 0.0], atol=1e-6)
        np.testing.assert_allclose(result.rotation, np.eye(3), atol=1e-6)

    def test_rigid_transform_recovered(self):
        rotation = rotation_about_z(0.3)
        A = SemanticMap(points=self.points, classes=self.classes)
        B = SemanticMap(
            points=project_pose(self.points, rotation, [0.2, -0.1, 0.5]), classes=self.classes
        )
        result = fuse_maps(A, B, eps=1.0, correspondences=[(i, i) for i in range(12)])
        self.assertLess(np.linalg.norm(result.rotation - rotation), 1e-6)
        self.assertLess(np.linalg.norm(result.translation - [0.2, -0.1, 0.5]), 1e-6)

    def test_label_mismatch_adds_label_weight(self):
        A = SemanticMap(points=self.points, classes=self.classes)
        B = SemanticMap(points=self.points, classes=["plate", *self.classes[1:]])
        result = fuse_maps(A, B, eps=1e-3, label_weight=1.0)
        self.assertEqual(result.mismatches, 1)
        self.assertAlmostEqual(result.objective, result.geometric_cost + 1.0)

    def test_strict_mode_drops_mismatched_pairs(self):
        A = SemanticMap(points=self.points, classes=self.classes)
        B = SemanticMap(points=self.points, classes=["plate", *self.classes[1:]])
        result = fuse_maps(A, B, eps=1e-3, strict=True)
        self.assertNotIn((0, 0), result.correspondences)
        self.assertEqual(result.mismatches, 0)

    def test_strict_mode_filters_fixed_correspondences(self):
        A = SemanticMap(points=self.points, classes=self.classes)
        B = SemanticMap(points=self.points, classes=["plate", *self.classes[1:]])
        pairs = [(i, i) for i in range(12)]
        with self.assertLogs("topofabric.semantics.fusion", level="INFO") as log:
            result = fuse_maps(A, B, eps=1e-3, strict=True, correspondences=pairs)
        self.assertNotIn((0, 0), result.correspondences)
        self.assertEqual(len(result.correspondences), 11)
        self.assertEqual(result.mismatches, 0)
        self.assertIn("dropped 1 fixed", log.output[0])

    @parameterized.expand([(seed,) for seed in range(30)])
    def test_random_rigid_transforms_recovered(self, seed):
        rng = make_rng(400 + seed)
        n = int(rng.integers(6, 25))
        points = rng.uniform(-2.0, 2.0, (n, 3))
        classes = [str(c) for c in rng.integers(0, 4, n)]
        rotation = special_ortho_group.rvs(3, random_state=rng)
        translation = rng.uniform(-1.0, 1.0, 3)
        A = SemanticMap(points=points, classes=classes)
        B = SemanticMap(points=project_pose(points, rotation, translation), classes=classes)
        result = fuse_maps(A, B, eps=1.0, correspondences=[(i, i) for i in range(n)])
        self.assertLess(np.linalg.norm(result.rotation - rotation), 1e-6)
        self.assertLess(np.linalg.norm(result.translation - translation), 1e-6)
        self.assertLess(result.geometric_cost, 1e-12)

    @parameterized.expand([(seed,) for seed in range(10)])
    def test_each_mismatch_costs_exactly_the_label_weight(self, seed):
        rng = make_rng(500 + seed)
        relabelled = int(rng.integers(0, 6))
        label_weight = float(rng.uniform(0.1, 5.0))
        A = SemanticMap(points=self.points, classes=self.classes)
        B = SemanticMap(
            points=self.points,
            classes=["plate"] * relabelled + self.classes[relabelled:],
        )
        pairs = [(i, i) for i in range(12)]
        result = fuse_maps(A, B, eps=1e-3, label_weight=label_weight, correspondences=pairs)
        self.assertEqual(result.mismatches, relabelled)
        self.assertAlmostEqual(
            result.objective - result.geometric_cost, label_weight * relabelled, places=12
        )

    def test_too_few_correspondences_rejected(self):
        A = SemanticMap(points=self.points, classes=self.classes)
        B = SemanticMap(points=self.points + 10.0, classes=self.classes)
        with self.assertRaises(InputError):
            fuse_maps(A, B, eps=0.1)

    def test_collinear_points_rejected(self):
        line = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]])
        with self.assertRaises(InputError):
            kabsch(line, line)


class PosteriorFusionTest(TestCase):
    """Tests for fuse_class_posteriors."""

    @parameterized.expand(
        [
            ("uniform", [[0.25] * 4, [0.25] * 4], [0.25] * 4),
            ("two_frames", [[0.8, 0.2], [0.5, 0.5]], [2 / 3, 1 / 3]),
            ("single_frame", [[0.1, 0.6, 0.3]], [0.1, 0.6, 0.3]),
            ("ruled_out", [[0.5, 0.5], [1.0, 0.0]], [1.0, 0.0]),
        ]
    )
    def test_fusion(self, _name, frames, expected):
        np.testing.assert_allclose(fuse_class_posteriors(frames), expected, atol=1e-12)

    @parameterized.expand(
        [
            ("empty", []),
            ("not_normalized", [[0.5, 0.6]]),
            ("negative", [[1.5, -0.5]]),
            ("all_ruled_out", [[1.0, 0.0], [0.0, 1.0]]),
        ]
    )
    def test_invalid_frames_rejected(self, _name, frames):
        with self.assertRaises(InputError):
            fuse_class_posteriors(frames)


class OntologyTest(TestCase):
    """Tests for rule parsing and forward chaining."""

    def setUp(self):
        self.graspable = parse_rule("Cup(x) -> Graspable(x)")
        self.pickup = parse_rule("Table(x) & On(y, x) & Book(y) -> CandidateForPickUp(y)")

    def test_cup_is_graspable(self):
        scene = SceneStateFactory(
            graph=WeightedGraph.from_pairs([(1, 2)]),
            states=np.zeros((2, 1)),
            constraint=AffineConstraint.empty(1),
            labels=["Cup", "Table"],
        )
        derived = apply_ontology_rules(scene, None, [self.graspable])
        self.assertEqual([str(atom) for atom in derived], ["Graspable(1)"])

    def test_book_on_table_is_candidate(self):
        scene = SceneStateFactory(
            graph=WeightedGraph.from_pairs([(1, 2)]),
            states=np.zeros((2, 1)),
            constraint=AffineConstraint.empty(1),
            labels=["Table", "Book"],
        )
        derived = apply_ontology_rules(scene, {"On": [(2, 1)]}, [self.pickup, self.graspable])
        self.assertEqual([str(atom) for atom in derived], ["CandidateForPickUp(2)"])

    def test_no_rules_no_facts(self):
        self.assertEqual(apply_ontology_rules(SceneStateFactory(), None, []), [])

    @parameterized.expand(
        [
            ("no_arrow", "Cup(x) Graspable(x)"),
            ("unbound_head", "Cup(x) -> Graspable(y)"),
            ("binary_head", "Cup(x) -> Near(x, x)"),
            ("bad_atom", "Cup x -> Graspable(x)"),
        ]
    )
    def test_malformed_rules_rejected(self, _name, text):
        with self.assertRaises(InputError):
            parse_rule(text)

    def test_atom_arguments_are_trimmed(self):
        self.assertEqual(parse_atom(" On( a ,b ) ").args, ("a", "b"))


class TrackingTest(TestCase):
    """Tests for tracking_report."""

    def test_constant_traces_have_no_jumps(self):
        segments = [[(0.0, [1.0, 2.0])], [(0.5, [1.0, 2.0])], [(1.0, [1.0, 2.0])]]
        report = tracking_report(segments, {}, L_phi=1.0, M=1.0, mu=1.0)
        self.assertEqual(report.errors, [0.0, 0.0])
        self.assertFalse(report.violated)

    def test_single_jump(self):
        segments = [[(0.0, [0.0, 0.0])], [(1.0, [0.12, 0.16])]]
        report = tracking_report(segments, {}, L_phi=1.0, M=1.0, mu=1.0)
        self.assertAlmostEqual(report.cumulative, 0.2)

    def test_settling_sequences_respect_bound(self):
        rng = make_rng(35)
        for _ in range(100):
            L_phi, M, mu = rng.uniform(0.5, 2.0, 3)
            times = np.concatenate([[0.0], np.sort(rng.uniform(0.0, 5.0, 10))])
            state = rng.standard_normal(3)
            segments, transitions = [[(0.0, state)]], {}
            for k in range(1, times.size):
                phi = random_orthogonal(rng, 3)
                direction = rng.standard_normal(3)
                size = L_phi * M * math.exp(-mu * times[k]) * (times[k] - times[k - 1])
                state = phi @ state + size * direction / np.linalg.norm(direction)
                transitions[k - 1] = phi
                segments.append([(times[k], state)])
            report = tracking_report(segments, transitions, L_phi, M, mu)
            self.assertLessEqual(report.cumulative, report.bound + 1e-12)

    def test_transition_shape_checked(self):
        segments = [[(0.0, [1.0, 2.0])], [(1.0, [1.0, 2.0])]]
        with self.assertRaisesRegex(InputError, "boundary 0"):
            tracking_report(segments, {0: np.eye(3)}, L_phi=1.0, M=1.0, mu=1.0)

    def test_bound_needs_positive_decay(self):
        with self.assertRaises(InputError):
            tracking_bound(1.0, 1.0, 0.0, 1.0)
