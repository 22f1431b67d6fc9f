"""
Test cases for polynomial flow maps.

This module contains tests for full and directional map construction,
evaluation, chaining and the text format.
"""

import io
import math

import numpy as np
from django.test import SimpleTestCase, tag
from numpy.testing import assert_allclose, assert_array_equal

from common.exceptions import NumericalError, UsageError
from dynamics.integrators import propagate
from dynamics.stm import stm_propagate
from dynamics.systems import Cr3bpSystem
from flowmaps.maps import (
    KIND_DIRECTIONAL,
    DirectionFrame,
    PolyFlowMap,
    build_da_map,
    build_dda_map,
    chain_maps,
    eval_map,
    eval_map_batch,
    stretching_direction,
)
from flowmaps.serialization import dump_map, dumps_map, load_map, loads_map
from .helpers import HORIZON, halo_direction_frame, start_state

NEAR_L2 = np.array([1.18, 0.0, 0.01, 0.0, -0.15, 0.0])
SPAN = 0.3


class DirectionFrameTestCase(SimpleTestCase):
    """
    Test cases for stretching directions and direction frames.
    """

    def test_stretching_direction_of_diagonal_stm(self):
        direction = stretching_direction(np.diag([1.0, -5.0, 2.0]))
        assert_allclose(direction, [0.0, 1.0, 0.0], atol=1e-15)

    def test_stretching_direction_sign_convention(self):
        stm = np.array([[0.0, 0.0], [-3.0, 1.0]])
        direction = stretching_direction(stm)
        self.assertGreater(direction[0], 0.0)
        self.assertAlmostEqual(np.linalg.norm(direction), 1.0)

    def test_stretching_direction_rejects_bad_input(self):
        with self.assertRaises(UsageError):
            stretching_direction(np.ones((2, 3)))
        with self.assertRaises(NumericalError):
            stretching_direction(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_frame_is_orthonormal(self):
        frame = DirectionFrame.from_direction([1.0, 2.0, 0.0, -1.0, 0.5, 3.0])
        basis = frame.basis
        assert_allclose(basis.T @ basis, np.eye(6), atol=1e-14)
        self.assertEqual(frame.L.shape, (6, 5))

    def test_decompose_recompose(self):
        frame = DirectionFrame.from_direction([0.0, 0.0, 3.0])
        deltas = np.array([[1.0, 2.0, 3.0], [-0.5, 0.0, 0.25]])
        coordinates = frame.decompose(deltas)
        assert_allclose(coordinates[:, 0], deltas[:, 2])
        assert_allclose(frame.recompose(coordinates), deltas, atol=1e-15)

    def test_zero_direction_is_rejected(self):
        with self.assertRaises(UsageError):
            DirectionFrame.from_direction([0.0, 0.0])

    def test_non_orthogonal_basis_is_rejected(self):
        with self.assertRaises(UsageError):
            DirectionFrame(np.array([1.0, 0.0]), np.array([[1.0], [0.0]]))


class FullMapTestCase(SimpleTestCase):
    """
    Test cases for full Taylor maps about a short CR3BP arc.
    """

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.system = Cr3bpSystem()
        cls.flow_map = build_da_map(cls.system, NEAR_L2, 0.0, SPAN, order=2)

    def test_zero_deviation_gives_reference(self):
        expected = propagate(self.system.rhs, NEAR_L2, 0.0, SPAN)
        assert_allclose(eval_map(self.flow_map, np.zeros(6)), expected, atol=1e-10)
        assert_allclose(self.flow_map.final_reference, expected, atol=1e-10)

    def test_linear_part_is_stm(self):
        stm = stm_propagate(self.system, NEAR_L2, 0.0, SPAN)
        assert_allclose(self.flow_map.stm(), stm, atol=1e-10)
        assert_allclose(self.flow_map.jacobian(np.zeros(6)), stm, atol=1e-10)

    def test_batch_matches_single_evaluation(self):
        rng = np.random.default_rng(3)
        deltas = 1e-4 * rng.normal(size=(5, 6))
        batch = eval_map_batch(self.flow_map, deltas)
        for row, delta in zip(batch, deltas):
            assert_allclose(row, self.flow_map.evaluate(delta), rtol=1e-14, atol=1e-15)

    def test_truncation_error_scales_with_order(self):
        """
        Test the map error against direct propagation falls off as the
        cube of the deviation for a second-order map.
        """
        direction = np.array([1.0, -0.5, 0.3, 0.2, 1.0, -0.4])
        direction /= np.linalg.norm(direction)
        scales = [4e-3, 2e-3, 1e-3]
        errors = []
        for scale in scales:
            delta = scale * direction
            exact = propagate(self.system.rhs, NEAR_L2 + delta, 0.0, SPAN)
            errors.append(np.linalg.norm(self.flow_map.evaluate(delta) - exact))
        slope = math.log(errors[0] / errors[2]) / math.log(scales[0] / scales[2])
        self.assertAlmostEqual(slope, 3.0, delta=0.4)

    def test_evaluate_checks_shape(self):
        with self.assertRaises(UsageError):
            self.flow_map.evaluate(np.zeros(5))
        with self.assertRaises(UsageError):
            self.flow_map.evaluate_batch(np.zeros((2, 4)))

    def test_invalid_maps_are_rejected(self):
        components = self.flow_map.components
        with self.assertRaises(UsageError):
            PolyFlowMap(NEAR_L2, 0.0, SPAN, 'sideways', 2, components)
        with self.assertRaises(UsageError):
            PolyFlowMap(NEAR_L2, 0.0, SPAN, KIND_DIRECTIONAL, 2, components)
        with self.assertRaises(UsageError):
            PolyFlowMap(NEAR_L2, 0.0, SPAN, 'full', 2, components[:5])

    def test_chained_maps_match_single_map(self):
        first = build_da_map(self.system, NEAR_L2, 0.0, SPAN / 2, order=2)
        second = build_da_map(self.system, first.final_reference, SPAN / 2, SPAN, order=2)
        chained = chain_maps(first, second)
        self.assertEqual((chained.t0, chained.tf), (0.0, SPAN))
        delta = 1e-4 * np.array([1.0, 0.5, -1.0, 0.0, 2.0, 0.3])
        assert_allclose(chained.evaluate(delta), self.flow_map.evaluate(delta), atol=1e-10)
        assert_allclose(chained.stm(), self.flow_map.stm(), atol=1e-9)

    def test_chain_requires_adjacent_full_maps(self):
        later = build_da_map(self.system, NEAR_L2, 1.0, 1.1, order=2)
        with self.assertRaises(UsageError):
            chain_maps(self.flow_map, later)
        frame = DirectionFrame.from_direction(np.eye(6)[0])
        directional = build_dda_map(self.system, NEAR_L2, 0.0, SPAN, 2, frame)
        with self.assertRaises(UsageError):
            chain_maps(directional, self.flow_map)


class DirectionalMapTestCase(SimpleTestCase):
    """
    Test cases for directional maps.
    """

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.system = Cr3bpSystem()
        stm = stm_propagate(cls.system, NEAR_L2, 0.0, SPAN)
        cls.frame = DirectionFrame.from_direction(stretching_direction(stm))
        cls.full = build_da_map(cls.system, NEAR_L2, 0.0, SPAN, order=3)
        cls.directional = build_dda_map(cls.system, NEAR_L2, 0.0, SPAN, 3, cls.frame)

    def test_term_count_is_bounded(self):
        for count in self.directional.term_counts():
            self.assertLessEqual(count, 3 + 5)
        self.assertEqual(self.directional.context.size, 1 + 3 + 5)

    def test_agrees_with_full_map_along_direction(self):
        delta = 5e-3 * self.frame.gamma_star
        assert_allclose(self.directional.evaluate(delta), self.full.evaluate(delta), atol=1e-10)

    def test_transverse_deviations_propagate_linearly(self):
        delta = 1e-3 * self.frame.L[:, 0] + 2e-3 * self.frame.L[:, 3]
        expected = self.directional.final_reference + self.full.stm() @ delta
        assert_allclose(self.directional.evaluate(delta), expected, atol=1e-12)

    def test_stm_in_original_coordinates(self):
        assert_allclose(self.directional.stm(), self.full.stm(), atol=1e-10)
        assert_allclose(self.directional.jacobian(np.zeros(6)), self.full.stm(), atol=1e-10)

    def test_frame_dimension_must_match(self):
        with self.assertRaises(UsageError):
            build_dda_map(self.system, NEAR_L2, 0.0, SPAN, 2, DirectionFrame.from_direction([1.0, 0.0, 0.0]))

    @tag('slow')
    def test_halo_order_three_truncation(self):
        """
        Test the order-3 full map about the halo start state errs as the
        fourth power of the deviation.
        """
        system = Cr3bpSystem()
        state = start_state()
        flow_map = build_da_map(system, state, 0.0, HORIZON, order=3)
        gamma = halo_direction_frame().gamma_star
        scales = np.logspace(-4.0, -2.0, 7)
        errors = []
        for scale in scales:
            exact = propagate(system.rhs, state + scale * gamma, 0.0, HORIZON)
            errors.append(np.linalg.norm(flow_map.evaluate(scale * gamma) - exact))
        slope, _ = np.polyfit(np.log(scales), np.log(errors), 1)
        self.assertAlmostEqual(slope, 4.0, delta=0.3)


class SerializationTestCase(SimpleTestCase):
    """
    Test cases for the flow map text format.
    """

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        system = Cr3bpSystem()
        cls.full = build_da_map(system, NEAR_L2, 0.0, 0.1, order=2)
        cls.directional = build_dda_map(system, NEAR_L2, 0.0, 0.1, 2,
                                        DirectionFrame.from_direction([1.0, 1.0, 0.0, 0.0, 0.0, 0.0]))

    def assertSameMap(self, loaded, original):
        self.assertEqual(loaded.kind, original.kind)
        self.assertEqual(loaded.order, original.order)
        self.assertEqual((loaded.t0, loaded.tf), (original.t0, original.tf))
        self.assertEqual(loaded.system, original.system)
        assert_array_equal(loaded.reference_state, original.reference_state)
        assert_array_equal(loaded.coefficient_matrix, original.coefficient_matrix)

    def test_full_map_text_is_exact(self):
        text = dumps_map(self.full)
        self.assertTrue(text.startswith('kind full\n'))
        self.assertSameMap(loads_map(text), self.full)

    def test_directional_map_keeps_frame(self):
        stream = io.StringIO()
        dump_map(self.directional, stream)
        stream.seek(0)
        loaded = load_map(stream)
        self.assertSameMap(loaded, self.directional)
        assert_array_equal(loaded.frame.gamma_star, self.directional.frame.gamma_star)
        assert_array_equal(loaded.frame.L, self.directional.frame.L)

    def test_missing_header_is_rejected(self):
        text = dumps_map(self.full).replace('order 2\n', '')
        with self.assertRaises(UsageError):
            loads_map(text)

    def test_unterminated_component_is_rejected(self):
        text = dumps_map(self.full).rstrip('\n')
        text = text[:text.rfind('end')]
        with self.assertRaises(UsageError):
            loads_map(text)

    def test_out_of_order_component_is_rejected(self):
        text = dumps_map(self.full).replace('component 1\n', 'component 4\n')
        with self.assertRaises(UsageError):
            loads_map(text)
