import math
import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np
from parameterized import parameterized

from topofabric.control import (
    check_operational_envelope,
    delay_margin_bound,
    design_gain,
    design_lead_lag,
    design_point,
    direct_margin_line,
    discretize,
    effective_phase_margin,
    extrapolate,
    frequency_response,
    hinf_norm,
    lead_compensation,
    margin_is_safe,
    noise_threshold,
    ortsf_loop,
    ortsf_transform,
    phase_margin,
    predict_trace,
    prediction_error_bound,
    predictor_lipschitz,
    robustness_radius,
    simulate_closed_loop,
    smith_predictor,
    step_response,
    topological_robustness_bound,
)
from topofabric.control.compensators import delay_samples
from topofabric.control.simulation import growth_ratio
from topofabric.exceptions import InputError
from topofabric.models.control import LoopModel, OrtsfConfig, RationalTF
from topofabric.models.scene import ReasoningTrace
from topofabric.models.topology import PersistenceDiagram

INTEGRATOR = RationalTF(num=[1.0], den=[0.0, 1.0])
FIRST_ORDER = RationalTF(num=[1.0], den=[1.0, 1.0])
CLASSIC_PLANT = RationalTF(num=[1.0], den=[0.0, 1.0, 1.0])
TRIANGLE = [(0, 1), (0, 2), (1, 2)]


def classic_loop(delay: float = 0.0) -> LoopModel:
    return LoopModel(plant=CLASSIC_PLANT, delay=delay)


def make_trace(timestamp: float, magnitudes, edges=TRIANGLE, d: int = 2) -> ReasoningTrace:
    """Trace whose edge residuals point along the first axis with the given norms."""
    interactions = np.zeros((len(edges), d + 1))
    interactions[:, 0] = magnitudes
    return ReasoningTrace(
        timestamp=timestamp,
        edges=list(edges),
        states=np.zeros((3, d)),
        interactions=interactions,
        constraint_matrix=np.zeros((0, len(edges))),
        constraint_target=np.zeros(0),
        diagrams={0: PersistenceDiagram(dim=0), 1: PersistenceDiagram(dim=1)},
        loss=0.0,
        converged=True,
    )


# ==================== Transfer Function Tests ====================


class FrequencyResponseTest(TestCase):
    """Tests for transfer function evaluation on the imaginary axis."""

    def test_integrator_at_unit_frequency(self):
        self.assertAlmostEqual(frequency_response(INTEGRATOR, 1.0), -1j)

    def test_first_order_at_unit_frequency(self):
        self.assertAlmostEqual(frequency_response(FIRST_ORDER, 1.0), 0.5 - 0.5j)

    def test_dc_value_is_coefficient_ratio(self):
        tf = RationalTF(num=[3.0, 1.0], den=[2.0, 5.0])
        self.assertAlmostEqual(frequency_response(tf, 0.0), 1.5)

    def test_pole_on_grid_point_is_nudged(self):
        value = frequency_response(INTEGRATOR, 0.0)
        self.assertTrue(np.isfinite(value))
        self.assertGreater(abs(value), 1e8)

    def test_vectorized_evaluation(self):
        response = frequency_response(FIRST_ORDER, [0.0, 1.0])
        np.testing.assert_allclose(response, [1.0, 0.5 - 0.5j])

    def test_negative_frequency_is_rejected(self):
        with self.assertRaises(InputError):
            frequency_response(FIRST_ORDER, -1.0)

    def test_descending_constructor(self):
        tf = RationalTF.from_descending([1.0], [1.0, 1.0, 0.0])
        np.testing.assert_array_equal(tf.den, CLASSIC_PLANT.den)


class HinfNormTest(TestCase):
    """Tests for the H-infinity norm of stable transfer functions."""

    @parameterized.expand(
        [
            ("low_pass", RationalTF(num=[1.0], den=[1.0, 1.0]), 1.0),
            ("high_pass", RationalTF(num=[0.0, 1.0], den=[1.0, 1.0]), 1.0),
            ("resonant", RationalTF(num=[1.0], den=[1.0, 0.2, 1.0]), 1 / (0.2 * math.sqrt(0.99))),
        ]
    )
    def test_known_norms(self, _name, tf, expected):
        self.assertAlmostEqual(hinf_norm(tf), expected, places=4)

    def test_resonant_peak_value(self):
        tf = RationalTF(num=[1.0], den=[1.0, 0.2, 1.0])
        self.assertAlmostEqual(hinf_norm(tf), 5.025, places=3)

    @parameterized.expand(
        [
            ("integrator", RationalTF(num=[1.0], den=[0.0, 1.0])),
            ("unstable", RationalTF(num=[1.0], den=[-1.0, 1.0])),
            ("improper", RationalTF(num=[0.0, 0.0, 1.0], den=[1.0, 1.0])),
        ]
    )
    def test_unbounded_norm_is_rejected(self, _name, tf):
        with self.assertRaises(InputError):
            hinf_norm(tf)


# ==================== Margin Tests ====================


class PhaseMarginTest(TestCase):
    """Tests for crossover and margin computation."""

    def test_classic_loop(self):
        report = phase_margin(classic_loop())
        omega_c = math.sqrt((math.sqrt(5) - 1) / 2)
        self.assertTrue(report.has_crossover)
        self.assertAlmostEqual(report.crossover_rad, omega_c, places=6)
        self.assertAlmostEqual(report.crossover_hz, omega_c / (2 * math.pi), places=6)
        self.assertAlmostEqual(report.phase_margin, 90 - math.degrees(math.atan(omega_c)), 4)
        self.assertAlmostEqual(report.phase_margin, 51.8, delta=0.1)
        self.assertTrue(math.isinf(report.gain_margin))

    def test_delay_lowers_margin_by_crossover_phase(self):
        base = phase_margin(classic_loop())
        delayed = phase_margin(classic_loop(0.05))
        self.assertAlmostEqual(delayed.crossover_rad, base.crossover_rad, places=8)
        expected = base.phase_margin - 360 * base.crossover_hz * 0.05
        self.assertAlmostEqual(delayed.phase_margin, expected, delta=0.5)
        self.assertTrue(math.isfinite(delayed.gain_margin))
        self.assertGreater(delayed.gain_margin, 1.0)

    def test_delay_margin(self):
        report = phase_margin(classic_loop())
        self.assertAlmostEqual(report.delay_margin, 1.15, delta=0.01)

    def test_loop_below_unity_has_no_crossover(self):
        loop = LoopModel(plant=FIRST_ORDER, compensator=RationalTF.gain(0.5))
        report = phase_margin(loop)
        self.assertFalse(report.has_crossover)
        self.assertIsNone(report.phase_margin)
        self.assertIsNone(report.crossover_hz)

    def test_compensated_default_loop_keeps_margin(self):
        report = phase_margin(ortsf_loop(OrtsfConfig(delay=0.052)))
        self.assertGreaterEqual(report.phase_margin, 26.0)
        self.assertLessEqual(report.phase_margin, 30.0)

    def test_compensation_beats_uncompensated_loop(self):
        config = OrtsfConfig(delay=0.1)
        gain, f_c = design_point(config)
        direct = phase_margin(
            LoopModel(plant=config.plant, compensator=RationalTF.gain(gain), delay=0.1)
        )
        compensated = phase_margin(ortsf_loop(config))
        self.assertGreater(compensated.phase_margin, direct.phase_margin)
        self.assertAlmostEqual(direct.phase_margin, direct_margin_line(30.0, f_c, 0.1), 5)


class MarginFormulaTest(TestCase):
    """Tests for the closed-form margin helpers."""

    def test_delay_margin_bound(self):
        self.assertAlmostEqual(delay_margin_bound(2.5, 1.2, 0.8), 0.954, places=3)
        self.assertAlmostEqual(delay_margin_bound(math.e, 1.0, 1.0), 1.0)

    def test_doubling_gain_halves_bound(self):
        self.assertAlmostEqual(
            delay_margin_bound(3.0, 2.0, 1.0), delay_margin_bound(3.0, 1.0, 1.0) / 2
        )

    @parameterized.expand([("unit_gain_margin", 1.0, 1.0, 1.0), ("zero_gain", 2.0, 0.0, 1.0)])
    def test_invalid_bound_inputs(self, _name, gamma, K_c, g_norm):
        with self.assertRaises(InputError):
            delay_margin_bound(gamma, K_c, g_norm)

    def test_effective_margin(self):
        self.assertAlmostEqual(effective_phase_margin(30.0, 1.0, 0.05), 12.0)

    def test_compensation_and_drift_terms(self):
        self.assertAlmostEqual(effective_phase_margin(30.0, 1.0, 0.05, phi_comp=18.0), 30.0)
        self.assertAlmostEqual(
            effective_phase_margin(30.0, 1.0, 0.05, drift=1.0, uncertainty=2.0), -8.0
        )

    def test_negative_delay_is_rejected(self):
        with self.assertRaises(InputError):
            effective_phase_margin(30.0, 1.0, -0.1)

    @parameterized.expand([(30.0, True), (29.9, False), (45.0, True)])
    def test_safety_threshold(self, margin, expected):
        self.assertEqual(margin_is_safe(margin), expected)

    def test_direct_line_scalar_and_array(self):
        self.assertAlmostEqual(direct_margin_line(30.0, 1.0, 0.05), 12.0)
        np.testing.assert_allclose(direct_margin_line(30.0, 1.0, [0.0, 0.05]), [30.0, 12.0])


# ==================== Compensator Tests ====================


class LeadLagTest(TestCase):
    """Tests for lead compensator design."""

    def test_thirty_degree_lead(self):
        tf = design_lead_lag(1.0, 30.0)
        alpha = tf.den[1] / tf.num[1]
        self.assertAlmostEqual(alpha, 1 / 3)
        phase = math.degrees(np.angle(frequency_response(tf, 2 * math.pi)))
        self.assertAlmostEqual(phase, 30.0, places=6)

    def test_phase_peaks_at_crossover(self):
        tf = design_lead_lag(1.0, 30.0)
        peak = np.angle(frequency_response(tf, 2 * math.pi))
        for f in (0.8, 1.25):
            self.assertLess(np.angle(frequency_response(tf, 2 * math.pi * f)), peak)

    def test_zero_lead_is_pure_gain(self):
        tf = design_lead_lag(1.0, 0.0, K_c=2.5)
        self.assertAlmostEqual(tf.dc_gain(), 2.5)
        self.assertEqual(tf.den.size, 1)

    @parameterized.expand([("right_angle", 1.0, 90.0), ("negative", 1.0, -5.0), ("no_f", 0, 10)])
    def test_invalid_lead(self, _name, f_c, phi):
        with self.assertRaises(InputError):
            design_lead_lag(f_c, phi)

    def test_lead_cancels_delay_phase(self):
        self.assertAlmostEqual(lead_compensation(0.275664, 0.052), 5.1604, places=3)

    def test_lead_is_capped(self):
        self.assertEqual(lead_compensation(1.0, 1.0), 60.0)
        self.assertEqual(lead_compensation(1.0, 1.0, max_compensation=45.0), 45.0)


class DesignTest(TestCase):
    """Tests for gain sizing and the design point."""

    def test_gain_for_thirty_degrees(self):
        self.assertAlmostEqual(design_gain(CLASSIC_PLANT, 30.0), 2 * math.sqrt(3), places=5)

    def test_unreachable_margin(self):
        with self.assertRaises(InputError):
            design_gain(FIRST_ORDER, 30.0)

    def test_default_design_point(self):
        gain, f_c = design_point(OrtsfConfig())
        self.assertAlmostEqual(gain, 2 * math.sqrt(3), places=5)
        self.assertAlmostEqual(f_c, 0.275664, places=5)

    def test_explicit_design_values_are_used(self):
        gain, f_c = design_point(OrtsfConfig(design_gain=2.0, crossover_hz=0.5))
        self.assertEqual((gain, f_c), (2.0, 0.5))


class SmithPredictorTest(TestCase):
    """Tests for the Smith predictor structure."""

    def test_perfect_model_removes_delay_from_loop(self):
        controller = RationalTF.gain(2.0)
        predictor = smith_predictor(controller, FIRST_ORDER, 0.5)
        s = 1j * 0.7
        delay = np.exp(-s * 0.5)
        loop = predictor(s) * FIRST_ORDER(s) * delay
        expected = controller(s) * FIRST_ORDER(s) / (1 + controller(s) * FIRST_ORDER(s)) * delay
        self.assertAlmostEqual(loop / (1 + loop), expected)

    def test_model_errors_scale_internal_model(self):
        predictor = smith_predictor(RationalTF.gain(1.0), FIRST_ORDER, 0.5, 0.1, -0.2)
        self.assertAlmostEqual(predictor.model.num[0], 1.1)
        self.assertAlmostEqual(predictor.model_delay, 0.4)


class DiscretizationTest(TestCase):
    """Tests for bilinear discretization and delay rounding."""

    def test_discrete_dc_gain_is_preserved(self):
        b, a = discretize(RationalTF(num=[2.0], den=[1.0, 1.0]), 0.01)
        self.assertAlmostEqual(np.sum(b) / np.sum(a), 2.0)

    def test_improper_is_rejected(self):
        with self.assertRaises(InputError):
            discretize(RationalTF(num=[0.0, 1.0], den=[1.0]), 0.01)

    def test_exact_delay_samples(self):
        self.assertEqual(delay_samples(0.05, 0.01), 5)

    def test_rounded_delay_warns(self):
        with self.assertLogs("topofabric.control.compensators", level="WARNING") as logs:
            samples = delay_samples(0.0105, 0.01)
        self.assertEqual(samples, 1)
        self.assertIn("rounded to 1 samples", logs.output[0])


# ==================== Simulation Tests ====================


class SimulationTest(TestCase):
    """Tests for discrete closed-loop simulation."""

    def test_step_response_settles_to_dc_gain(self):
        time, output = step_response(FIRST_ORDER, 10.0, sampling_period=0.01)
        self.assertEqual(time.size, output.size)
        self.assertAlmostEqual(output[-1], 1.0, places=3)

    def test_stable_loop_is_bounded(self):
        result = simulate_closed_loop(classic_loop(), sampling_period=0.01, horizon=60)
        self.assertTrue(result.bounded)
        self.assertAlmostEqual(result.output[-1], 1.0, places=2)
        self.assertEqual(result.delay_samples, 0)

    def test_delay_beyond_margin_diverges(self):
        result = simulate_closed_loop(classic_loop(2.0), sampling_period=0.01, horizon=100)
        self.assertEqual(result.delay_samples, 200)
        self.assertFalse(result.bounded)
        self.assertGreater(result.growth_ratio, 1.05)

    @parameterized.expand([("inside_margin", 0.8, True), ("beyond_margin", 1.2, False)])
    def test_default_lead_lag_follows_bode_delay_margin(self, _name, fraction, bounded):
        config = OrtsfConfig()
        compensator = ortsf_loop(config).compensator
        margin = phase_margin(LoopModel(plant=config.plant, compensator=compensator))
        T_s = 0.01
        delay = round(fraction * margin.delay_margin / T_s) * T_s
        loop = LoopModel(plant=config.plant, compensator=compensator, delay=delay)
        result = simulate_closed_loop(loop, sampling_period=T_s, horizon=100)
        if bounded:
            self.assertLess(result.growth_ratio, 1.05)
        else:
            self.assertGreater(result.growth_ratio, 1.0)

    def test_smith_predictor_tolerates_long_delay(self):
        predictor = smith_predictor(RationalTF.gain(2.0), FIRST_ORDER, 0.5)
        loop = LoopModel(plant=FIRST_ORDER, compensator=predictor, delay=0.5)
        result = simulate_closed_loop(loop, sampling_period=0.01, horizon=40)
        self.assertTrue(result.bounded)
        self.assertAlmostEqual(result.output[-1], 2 / 3, places=2)

    def test_zero_reference_gives_zero_output(self):
        result = simulate_closed_loop(classic_loop(), reference=0.0, sampling_period=0.01)
        self.assertEqual(result.growth_ratio, 0.0)
        self.assertTrue(result.bounded)

    def test_too_short_reference(self):
        with self.assertRaises(InputError):
            simulate_closed_loop(classic_loop(), reference=[1.0, 1.0, 1.0])

    def test_coarse_sampling_warns(self):
        with self.assertLogs("topofabric.control.simulation", level="WARNING") as logs:
            simulate_closed_loop(classic_loop(), sampling_period=0.5, horizon=20)
        self.assertIn("coarse", logs.output[0])

    def test_growth_ratio_of_non_finite_output(self):
        self.assertTrue(math.isinf(growth_ratio(np.array([1.0, 1.0, np.inf, np.nan]))))

    def test_csv_export(self):
        result = simulate_closed_loop(classic_loop(), sampling_period=0.1, horizon=2.0)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "sim.csv"
            result.to_csv(path)
            lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "t,reference,output,control")
        self.assertEqual(len(lines), result.time.size + 1)


# ==================== Prediction Tests ====================


class PredictionTest(TestCase):
    """Tests for finite-difference trace prediction."""

    def test_extrapolation(self):
        self.assertAlmostEqual(float(extrapolate(4.0, 2.0, 0.5, 1.0)), 5.0)

    def test_extrapolation_needs_positive_spacing(self):
        with self.assertRaises(InputError):
            extrapolate(4.0, 2.0, 0.5, 0.0)

    def test_lipschitz_constants(self):
        self.assertAlmostEqual(predictor_lipschitz(0.05, 0.1), 1.5)
        self.assertAlmostEqual(predictor_lipschitz(0.05, 0.1, joint=True), 2.0)

    def test_error_bound(self):
        self.assertAlmostEqual(prediction_error_bound(2.0, 3.0, 0.1), 0.6)

    def test_first_trace_is_held(self):
        trace = make_trace(1.0, [1.0, 2.0, 3.0])
        predicted, held = predict_trace(trace, None, 0.1)
        self.assertTrue(held)
        self.assertTrue(predicted.predicted)
        self.assertAlmostEqual(predicted.timestamp, 1.1)
        np.testing.assert_array_equal(predicted.interactions, trace.interactions)

    def test_linear_motion_is_extrapolated(self):
        previous = make_trace(0.0, [1.0, 1.0, 1.0])
        current = make_trace(0.1, [2.0, 2.0, 2.0])
        predicted, held = predict_trace(current, previous, 0.05)
        self.assertFalse(held)
        np.testing.assert_allclose(predicted.interactions[:, 0], 2.5)

    def test_changed_edge_set_holds_and_warns(self):
        previous = make_trace(0.0, [1.0, 1.0], edges=[(0, 1), (1, 2)])
        current = make_trace(0.1, [2.0, 2.0, 2.0])
        with self.assertLogs("topofabric.control.prediction", level="WARNING"):
            predicted, held = predict_trace(current, previous, 0.05)
        self.assertTrue(held)
        np.testing.assert_array_equal(predicted.interactions, current.interactions)

    def test_negative_horizon(self):
        with self.assertRaises(InputError):
            predict_trace(make_trace(0.0, [1.0, 1.0, 1.0]), None, -0.1)


# ==================== Transform Tests ====================


class OrtsfTransformTest(TestCase):
    """Tests for turning trace histories into control commands."""

    config = OrtsfConfig(sampling_period=0.01)

    def history(self, scales, offset: float = 0.0) -> list[ReasoningTrace]:
        return [
            make_trace(0.1 * k, np.array([1.0, 2.0, 3.0]) * s + offset)
            for k, s in enumerate(scales)
        ]

    def test_zero_history_gives_zero_command(self):
        result = ortsf_transform(self.history([0.0, 0.0, 0.0]), self.config)
        np.testing.assert_array_equal(result.commands, 0.0)
        self.assertEqual(result.branch, "lead-lag")
        self.assertTrue(result.held)
        self.assertEqual(result.references.shape, (30, 1))

    def test_short_delay_uses_lead_lag(self):
        with self.assertLogs("topofabric.control.ortsf", level="INFO") as logs:
            result = ortsf_transform(self.history([1.0, 1.2]), self.config)
        self.assertEqual(result.branch, "lead-lag")
        self.assertAlmostEqual(result.compensation, 360 * result.crossover_hz * 0.052)
        self.assertTrue(any("lead-lag" in line for line in logs.output))

    def test_long_delay_uses_smith_predictor(self):
        config = self.config.model_copy(update={"delay": 0.3})
        with self.assertLogs("topofabric.control.ortsf", level="INFO") as logs:
            result = ortsf_transform(self.history([1.0, 1.2]), config)
        self.assertEqual(result.branch, "smith")
        self.assertEqual(result.compensation, 0.0)
        self.assertTrue(any("Smith predictor" in line for line in logs.output))

    def test_commands_are_lipschitz_in_residuals(self):
        u = 1e-3
        base = ortsf_transform(self.history([1.0, 1.5, 1.2, 1.8]), self.config)
        moved = ortsf_transform(self.history([1.0, 1.5, 1.2, 1.8], offset=u), self.config)
        difference = np.max(np.abs(base.commands - moved.commands))
        self.assertGreater(difference, 0.0)
        self.assertLessEqual(difference, base.lipschitz_bound * u + 1e-12)

    def test_output_weights_select_channels(self):
        config = self.config.model_copy(
            update={"output_weights": [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]}
        )
        result = ortsf_transform(self.history([1.0]), config)
        self.assertEqual(result.command.shape, (2,))
        np.testing.assert_allclose(result.references[0], [1.0, 3.0])

    def test_mismatched_weights(self):
        config = self.config.model_copy(update={"output_weights": [[1.0, 0.0]]})
        with self.assertRaises(InputError):
            ortsf_transform(self.history([1.0]), config)

    def test_empty_history(self):
        with self.assertRaises(InputError):
            ortsf_transform([], self.config)

    def test_timestamps_must_increase(self):
        history = [make_trace(0.2, [1.0, 1.0, 1.0]), make_trace(0.1, [1.0, 1.0, 1.0])]
        with self.assertRaises(InputError):
            ortsf_transform(history, self.config)


# ==================== Envelope Tests ====================


class EnvelopeTest(TestCase):
    """Tests for the robustness radius, noise threshold and operational envelope."""

    def test_robustness_radius(self):
        self.assertAlmostEqual(robustness_radius(math.e, 1.0, 1.0, 1.0), 1.0)
        self.assertTrue(math.isinf(robustness_radius(2.0, 1.0, 0.0, 1.0)))

    def test_robustness_radius_needs_gain_margin(self):
        with self.assertRaises(InputError):
            robustness_radius(0.5, 1.0, 1.0, 1.0)

    def test_noise_threshold(self):
        self.assertAlmostEqual(noise_threshold(0.1, 2.0, 0.5), 0.1)

    def test_topological_bound(self):
        self.assertAlmostEqual(topological_robustness_bound(1.0, 0.5, 4.0, 2.0, 0.5, 0.1), 2.6)

    def test_inside_envelope(self):
        report = check_operational_envelope(0.1, 1.0, 0.01, 0.1, 0.5, 1.0)
        self.assertTrue(report.safe)

    @parameterized.expand(
        [
            ("model_error", (1.0, 1.0, 0.01, 0.1, 0.5, 1.0), "control_stable"),
            ("noise", (0.1, 1.0, 0.1, 0.1, 0.5, 1.0), "topology_stable"),
            ("loss", (0.1, 1.0, 0.01, 0.1, 1.0, 1.0), "context_consistent"),
        ]
    )
    def test_boundary_values_are_unsafe(self, _name, args, failed):
        report = check_operational_envelope(*args)
        self.assertFalse(report.safe)
        self.assertFalse(getattr(report, failed))
