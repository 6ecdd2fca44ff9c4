from unittest import TestCase

import numpy as np
from parameterized import parameterized
from scipy import linalg

from topofabric.connection import (
    apply_gauge,
    assemble_connection_laplacian,
    connection_kernel_dimension,
    consistency_energy,
    cycle_holonomy,
    random_orthogonal_gauge,
    solve_anchored,
)
from topofabric.exceptions import InputError, SingularSystemError
from topofabric.models.connection import ConnectionGraph, GaugeAnchor
from topofabric.models.graph import WeightedGraph
from topofabric.rng import make_rng
from topofabric.tests.factories import (
    ConnectionGraphFactory,
    random_connected_graph,
    random_orthogonal,
)


def pair(transform: float) -> ConnectionGraph:
    return ConnectionGraph.from_edges([1, 2], [(1, 2, 1.0, [[transform]])], d=1)


def random_connection(rng: np.random.Generator, n: int = 6, d: int = 3) -> ConnectionGraph:
    base = random_connected_graph(rng, n, extra=3)
    transforms = [random_orthogonal(rng, d) for _ in base.edges]
    return ConnectionGraph(base=base, d=d, transforms=transforms)


def null_space_oracle(cg: ConnectionGraph, anchor: GaugeAnchor, b: np.ndarray) -> np.ndarray:
    """argmin 0.5 f^T L f - b^T f subject to A f = a, via the null space of A."""
    laplacian = assemble_connection_laplacian(cg)
    particular = np.linalg.lstsq(anchor.matrix, anchor.value, rcond=None)[0]
    basis = linalg.null_space(anchor.matrix)
    reduced = basis.T @ laplacian @ basis
    z = np.linalg.solve(reduced, basis.T @ (b - laplacian @ particular))
    return particular + basis @ z


class ConnectionLaplacianTest(TestCase):
    """Tests for the connection Laplacian and the consistency energy."""

    @parameterized.expand(
        [
            ("identity", 1.0, [[1.0, -1.0], [-1.0, 1.0]]),
            ("flip", -1.0, [[1.0, 1.0], [1.0, 1.0]]),
        ]
    )
    def test_two_node_scalar_laplacian(self, _name, transform, expected):
        np.testing.assert_allclose(assemble_connection_laplacian(pair(transform)), expected)

    def test_flip_kernel_is_alternating(self):
        laplacian = assemble_connection_laplacian(pair(-1.0))
        np.testing.assert_allclose(laplacian @ np.array([1.0, -1.0]), 0.0)

    def test_identity_transforms_have_d_dimensional_kernel(self):
        base = random_connected_graph(make_rng(3), 7)
        self.assertEqual(connection_kernel_dimension(ConnectionGraph.identity(base, 3)), 3)

    def test_laplacian_is_symmetric_psd(self):
        laplacian = assemble_connection_laplacian(random_connection(make_rng(4)))
        np.testing.assert_allclose(laplacian, laplacian.T, atol=1e-12)
        self.assertGreater(np.min(np.linalg.eigvalsh(laplacian)), -1e-10)

    def test_constant_section_is_consistent(self):
        cg = ConnectionGraphFactory(d=1)
        self.assertEqual(consistency_energy(cg, np.full(3, 2.5)), 0.0)

    def test_two_node_energy(self):
        self.assertAlmostEqual(consistency_energy(pair(1.0), np.array([0.0, 2.0])), 2.0)

    def test_energy_matches_quadratic_form(self):
        rng = make_rng(5)
        cg = random_connection(rng)
        f = rng.standard_normal(cg.size)
        quadratic = 0.5 * f @ assemble_connection_laplacian(cg) @ f
        self.assertAlmostEqual(consistency_energy(cg, f), quadratic, places=10)

    def test_section_size_checked(self):
        with self.assertRaises(InputError):
            consistency_energy(pair(1.0), np.zeros(3))

    def test_head_first_edge_is_inverted(self):
        cg = ConnectionGraph.from_edges([1, 2], [(2, 1, 1.0, [[2.0]])], d=1)
        np.testing.assert_allclose(cg.transforms[0], [[0.5]])

    def test_identity_holonomy_on_triangle(self):
        cg = ConnectionGraphFactory(d=2)
        np.testing.assert_allclose(cycle_holonomy(cg, [1, 2, 3]), np.eye(2))


class GaugeTest(TestCase):
    """Tests for apply_gauge."""

    def test_identity_gauge_changes_nothing(self):
        rng = make_rng(6)
        cg = random_connection(rng)
        f = rng.standard_normal(cg.size)
        moved, section = apply_gauge(cg, f, [np.eye(cg.d)] * cg.base.n)
        np.testing.assert_allclose(section, f)
        for before, after in zip(cg.transforms, moved.transforms, strict=True):
            np.testing.assert_allclose(after, before)

    def test_sign_flip_at_one_vertex(self):
        cg = ConnectionGraphFactory(d=1)
        moved, _ = apply_gauge(cg, np.zeros(3), [[[-1.0]], [[1.0]], [[1.0]]])
        # edges (1,2) and (1,3) touch vertex 1, (2,3) does not
        np.testing.assert_allclose([t[0, 0] for t in moved.transforms], [-1.0, -1.0, 1.0])

    def test_energy_is_gauge_invariant(self):
        rng = make_rng(8)
        for _ in range(10):
            cg = random_connection(rng)
            f = rng.standard_normal(cg.size)
            gauge = random_orthogonal_gauge(cg.base.n, cg.d, rng)
            moved, section = apply_gauge(cg, f, gauge)
            self.assertAlmostEqual(
                consistency_energy(moved, section), consistency_energy(cg, f), delta=1e-10
            )

    def test_non_orthogonal_gauge_rejected(self):
        with self.assertRaises(InputError):
            apply_gauge(pair(1.0), np.zeros(2), [[[2.0]], [[1.0]]])


class AnchoredSolveTest(TestCase):
    """Tests for solve_anchored."""

    def test_anchor_picks_the_constant(self):
        cg = pair(1.0)
        f = solve_anchored(cg, GaugeAnchor.clamp_first(cg, [3.0]))
        np.testing.assert_allclose(f, [3.0, 3.0], atol=1e-12)

    def test_homogeneous_system(self):
        cg = ConnectionGraphFactory(d=2)
        f = solve_anchored(cg, GaugeAnchor.clamp_first(cg, [0.0, 0.0]))
        np.testing.assert_allclose(f, 0.0, atol=1e-12)

    @parameterized.expand([("ldl",), ("lu",)])
    def test_random_systems_match_null_space_oracle(self, method):
        rng = make_rng(9)
        for _ in range(5):
            cg = random_connection(rng)
            anchor = GaugeAnchor.clamp(cg, cg.base.vertices[2], rng.standard_normal(cg.d))
            b = rng.standard_normal(cg.size)
            f = solve_anchored(cg, anchor, b, method=method)
            np.testing.assert_allclose(anchor.matrix @ f, anchor.value, atol=1e-8)
            np.testing.assert_allclose(f, null_space_oracle(cg, anchor, b), atol=1e-8)

    def test_anchor_missing_the_kernel_is_singular(self):
        base = WeightedGraph.from_pairs([(1, 2), (3, 4)], allow_disconnected=True)
        cg = ConnectionGraph.identity(base, 1)
        with self.assertRaises(SingularSystemError):
            solve_anchored(cg, GaugeAnchor.clamp_first(cg, [1.0]))

    def test_unknown_factorization_rejected(self):
        cg = pair(1.0)
        with self.assertRaises(InputError):
            solve_anchored(cg, GaugeAnchor.clamp_first(cg, [1.0]), method="qr")
