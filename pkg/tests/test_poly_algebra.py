"""
Test cases for truncated polynomial arithmetic.

This module contains tests for contexts, ring operations, intrinsics,
evaluation and composition.
"""

import math

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from common.exceptions import DomainError, UsageError
from poly_algebra import (
    TRUNCATION_DIRECTIONAL,
    TruncatedPolynomial,
    compose,
    constant,
    evaluate,
    graded_lex_indices,
    intrinsic,
    monomial_count,
    mul,
    poly_context,
    variables,
)
from poly_algebra.intrinsics import exp, inv_sqrt, log, sqrt


def random_polynomial(context, rng, zero_constant=False):
    coeffs = rng.normal(size=context.size)
    if zero_constant:
        coeffs[0] = 0.0
    return TruncatedPolynomial(context, coeffs)


def brute_force_product(p, q):
    """Double loop over coefficient pairs, dropping products above the truncation."""
    ctx = p.context
    coeffs = np.zeros(ctx.size)
    for a, ca in zip(ctx.multi_indices, p.coeffs):
        for b, cb in zip(ctx.multi_indices, q.coeffs):
            alpha = tuple(x + y for x, y in zip(a, b))
            position = ctx.index_of.get(alpha)
            if position is not None:
                coeffs[position] += ca * cb
    return coeffs


def brute_force_value(p, point):
    return sum(c * math.prod(x ** e for x, e in zip(point, alpha))
               for alpha, c in zip(p.context.multi_indices, p.coeffs))


class MonomialCountTestCase(SimpleTestCase):
    """
    Test cases for monomial counting and ordering.
    """

    def test_six_variables_third_order(self):
        self.assertEqual(monomial_count(6, 3), 83)

    def test_single_variable(self):
        for order in range(1, 8):
            self.assertEqual(monomial_count(1, order), order)

    def test_two_variables_second_order(self):
        self.assertEqual(monomial_count(2, 2), 5)

    def test_context_size_includes_constant(self):
        self.assertEqual(poly_context(6, 3).size, 84)

    def test_graded_lex_order(self):
        self.assertEqual(
            graded_lex_indices(2, 2),
            [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)],
        )

    def test_order_cap_enforced(self):
        with self.assertRaises(UsageError):
            poly_context(3, 11)
        with self.assertRaises(UsageError):
            poly_context(0, 2)

    def test_directional_context_size(self):
        ctx = poly_context(6, 3, TRUNCATION_DIRECTIONAL)
        # constant, six linear terms, chi^2 and chi^3
        self.assertEqual(ctx.size, 9)
        self.assertLessEqual(ctx.size - 1, 8)


class ArithmeticTestCase(SimpleTestCase):
    """
    Test cases for addition, multiplication and the ring axioms.
    """

    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_cancellation(self):
        ctx = poly_context(2, 3)
        x1, _ = variables(ctx)
        result = (1.0 + x1) + (2.0 - x1)
        expected = constant(ctx, 3.0)
        assert_allclose(result.coeffs, expected.coeffs)

    def test_additive_identity(self):
        ctx = poly_context(3, 4)
        p = random_polynomial(ctx, self.rng)
        assert_allclose((p + constant(ctx, 0.0)).coeffs, p.coeffs)

    def test_sum_matches_dense_addition(self):
        ctx = poly_context(3, 4)
        p, q = random_polynomial(ctx, self.rng), random_polynomial(ctx, self.rng)
        assert_allclose((p + q).coeffs, p.coeffs + q.coeffs, rtol=0, atol=1e-15)

    def test_difference_of_squares(self):
        ctx = poly_context(1, 2)
        (x1,) = variables(ctx)
        result = (1.0 + x1) * (1.0 - x1)
        assert_allclose(result.coeffs, [1.0, 0.0, -1.0], atol=1e-15)

    def test_truncation_boundary(self):
        ctx = poly_context(1, 1)
        (x1,) = variables(ctx)
        assert_allclose((x1 * x1).coeffs, [0.0, 0.0])

    def test_product_matches_convolution(self):
        ctx = poly_context(2, 5)
        p, q = random_polynomial(ctx, self.rng), random_polynomial(ctx, self.rng)
        assert_allclose(mul(p, q).coeffs, brute_force_product(p, q), rtol=1e-12, atol=1e-12)

    def test_directional_product_matches_convolution(self):
        ctx = poly_context(4, 3, TRUNCATION_DIRECTIONAL)
        p, q = random_polynomial(ctx, self.rng), random_polynomial(ctx, self.rng)
        assert_allclose((p * q).coeffs, brute_force_product(p, q), rtol=1e-12, atol=1e-12)

    def test_ring_axioms(self):
        for n_vars, order in [(1, 5), (2, 3), (3, 4), (4, 2)]:
            ctx = poly_context(n_vars, order)
            p, q, r = (random_polynomial(ctx, self.rng) for _ in range(3))
            assert_allclose(((p * q) * r).coeffs, (p * (q * r)).coeffs, rtol=1e-12, atol=1e-12)
            assert_allclose((p * q).coeffs, (q * p).coeffs, rtol=1e-12, atol=1e-12)
            assert_allclose((p * (q + r)).coeffs, (p * q + p * r).coeffs, rtol=1e-12, atol=1e-12)
            assert_allclose(((p + q) + r).coeffs, (p + (q + r)).coeffs, rtol=1e-12, atol=1e-12)

    def test_context_mismatch(self):
        p = constant(poly_context(2, 3), 1.0)
        q = constant(poly_context(2, 4), 1.0)
        with self.assertRaises(UsageError):
            p + q
        with self.assertRaises(UsageError):
            p * q

    def test_stored_term_bound(self):
        ctx = poly_context(3, 3)
        p = random_polynomial(ctx, self.rng)
        product = p * p * p
        self.assertLessEqual(product.nonconstant_term_count(), monomial_count(3, 3))

    def test_truncation_consistency(self):
        order = 3
        ctx = poly_context(2, order)
        p, q = random_polynomial(ctx, self.rng), random_polynomial(ctx, self.rng)
        direction = np.array([0.6, 0.8])
        discrepancies = []
        for delta in (1e-2, 5e-3):
            point = delta * direction
            discrepancies.append(abs((p * q).evaluate(point) - p.evaluate(point) * q.evaluate(point)))
        self.assertGreaterEqual(discrepancies[0] / discrepancies[1], 2 ** order)

    def test_integer_power(self):
        ctx = poly_context(2, 4)
        p = random_polynomial(ctx, self.rng)
        assert_allclose((p ** 3).coeffs, (p * p * p).coeffs, rtol=1e-12, atol=1e-12)

    def test_derivative(self):
        ctx = poly_context(2, 3)
        x, y = variables(ctx)
        p = x * x * y + 3.0 * y
        dx = p.derivative(0)
        self.assertAlmostEqual(dx.coefficient((1, 1)), 2.0)
        self.assertEqual(dx.nonconstant_term_count(), 1)


class IntrinsicsTestCase(SimpleTestCase):
    """
    Test cases for elementary functions of polynomials.
    """

    def test_exp_maclaurin(self):
        ctx = poly_context(1, 3)
        (x1,) = variables(ctx)
        assert_allclose(intrinsic('exp', x1).coeffs, [1.0, 1.0, 0.5, 1.0 / 6.0], rtol=1e-15)

    def test_sqrt_of_one(self):
        ctx = poly_context(2, 3)
        result = sqrt(constant(ctx, 1.0))
        assert_allclose(result.coeffs, constant(ctx, 1.0).coeffs)

    def test_reciprocal_matches_finite_differences(self):
        ctx = poly_context(2, 3)
        x1, x2 = variables(ctx)
        p = intrinsic('reciprocal', 2.0 + x1 + x2)

        def f(a, b):
            return 1.0 / (2.0 + a + b)

        h = 1e-3
        self.assertAlmostEqual(p.constant_part, 0.5, places=15)
        d1 = (f(h, 0.0) - f(-h, 0.0)) / (2 * h)
        self.assertLess(abs(p.coefficient((1, 0)) - d1) / abs(d1), 1e-4)
        d11 = (f(h, 0.0) - 2 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h)
        self.assertLess(abs(p.coefficient((2, 0)) - d11 / 2.0) / abs(d11 / 2.0), 1e-4)
        dxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)
        self.assertLess(abs(p.coefficient((1, 1)) - dxy) / abs(dxy), 1e-4)

    def test_exp_of_negation_is_inverse(self):
        rng = np.random.default_rng(3)
        ctx = poly_context(3, 4)
        p = random_polynomial(ctx, rng, zero_constant=True)
        product = intrinsic('exp', p) * intrinsic('exp', -p)
        assert_allclose(product.coeffs, constant(ctx, 1.0).coeffs, atol=1e-12)

    def test_domain_errors_name_the_intrinsic(self):
        ctx = poly_context(1, 2)
        (x1,) = variables(ctx)
        with self.assertRaises(DomainError) as raised:
            sqrt(x1 - 1.0)
        self.assertEqual(raised.exception.function, 'sqrt')
        with self.assertRaises(DomainError) as raised:
            intrinsic('reciprocal', x1)
        self.assertEqual(raised.exception.function, 'reciprocal')
        with self.assertRaises(DomainError):
            log(x1)

    def test_scalar_dispatch(self):
        self.assertAlmostEqual(inv_sqrt(4.0), 0.5)
        assert_allclose(exp(np.array([0.0, 1.0])), [1.0, math.e])
        with self.assertRaises(DomainError):
            sqrt(-1.0)


class EvaluationTestCase(SimpleTestCase):
    """
    Test cases for evaluation and composition.
    """

    def test_hand_arithmetic(self):
        ctx = poly_context(2, 2)
        p = TruncatedPolynomial.from_terms(ctx, {(0, 0): 1.0, (1, 0): 2.0, (0, 2): 3.0})
        self.assertAlmostEqual(evaluate(p, [1.0, 2.0]), 15.0)

    def test_origin_gives_constant(self):
        rng = np.random.default_rng(5)
        ctx = poly_context(3, 3)
        p = random_polynomial(ctx, rng)
        self.assertEqual(p.evaluate(np.zeros(3)), p.constant_part)

    def test_matches_direct_summation(self):
        rng = np.random.default_rng(11)
        ctx = poly_context(3, 4)
        p = random_polynomial(ctx, rng)
        point = rng.normal(size=3)
        self.assertAlmostEqual(p.evaluate(point), brute_force_value(p, point), places=10)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(13)
        ctx = poly_context(3, 3)
        p = random_polynomial(ctx, rng)
        points = rng.normal(size=(5, 3))
        batch = p.evaluate_many(points)
        for point, value in zip(points, batch):
            self.assertEqual(p.evaluate(point), value)

    def test_length_mismatch(self):
        p = constant(poly_context(2, 2), 1.0)
        with self.assertRaises(UsageError):
            p.evaluate([1.0, 2.0, 3.0])

    def test_binomial_substitution(self):
        source = poly_context(1, 2)
        target = poly_context(2, 2)
        (x,) = variables(source)
        y1, y2 = variables(target)
        result = compose(x * x, [y1 + y2])
        assert_allclose(result.coeffs, [0.0, 0.0, 0.0, 1.0, 2.0, 1.0], atol=1e-15)

    def test_identity_substitution(self):
        rng = np.random.default_rng(17)
        ctx = poly_context(3, 3)
        p = random_polynomial(ctx, rng)
        assert_allclose(p.compose(variables(ctx)).coeffs, p.coeffs, rtol=1e-14, atol=1e-14)

    def test_composition_agrees_with_evaluation(self):
        rng = np.random.default_rng(19)
        ctx = poly_context(2, 3)
        p = random_polynomial(ctx, rng)
        subs = [random_polynomial(ctx, rng, zero_constant=True) for _ in range(2)]
        composed = p.compose(subs)
        for point in rng.normal(scale=1e-3, size=(20, 2)):
            inner = [s.evaluate(point) for s in subs]
            exact = p.evaluate(inner)
            # truncation error is O(|point|^4); compare at the truncation order
            self.assertLess(abs(composed.evaluate(point) - exact), 1e-6 * max(1.0, abs(exact)))

    def test_composition_arity(self):
        ctx = poly_context(2, 2)
        with self.assertRaises(UsageError):
            constant(ctx, 1.0).compose(variables(poly_context(3, 2))[:1])

    def test_text_round_trip(self):
        rng = np.random.default_rng(23)
        ctx = poly_context(3, 2)
        p = random_polynomial(ctx, rng)
        restored = TruncatedPolynomial.from_text(ctx, p.to_text())
        assert_allclose(restored.coeffs, p.coeffs, rtol=0, atol=0)

    def test_all_graded_indices_distinct(self):
        indices = graded_lex_indices(3, 4)
        self.assertEqual(len(indices), len(set(indices)))
        self.assertEqual(len(indices) - 1, monomial_count(3, 4))
        self.assertTrue(all(sum(a) <= sum(b) for a, b in zip(indices, indices[1:])))
