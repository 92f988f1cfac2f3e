import unittest

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.components.exceptions import FieldError
from src.components.gf import (
    canonical_rotation,
    difference_counts,
    field_new,
    field_summary,
    is_irreducible,
    is_perfect_difference_set,
    is_prime_power,
    prime_power,
    primitive_element,
    singer_difference_set,
)


class TestPrimePowers(unittest.TestCase):
    def test_decomposition(self):
        self.assertEqual(prime_power(9), (3, 2))
        self.assertEqual(prime_power(8), (2, 3))
        self.assertEqual(prime_power(7), (7, 1))

    def test_rejects_non_prime_powers(self):
        for q in (0, 1, 6, 12):
            with self.assertRaises(FieldError):
                prime_power(q)
        self.assertFalse(is_prime_power(10))
        self.assertTrue(is_prime_power(4))


class TestFiniteField(unittest.TestCase):
    def setUp(self):
        self.gf8 = field_new(2, 3)
        self.gf9 = field_new(3, 2)

    def test_smallest_modulus(self):
        self.assertEqual(self.gf8.modulus_poly, (1, 1, 0, 1))
        self.assertEqual(self.gf8.size, 8)
        self.assertEqual(self.gf9.modulus_poly, (1, 0, 1))

    def test_irreducibility(self):
        self.assertTrue(is_irreducible([1, 1, 0, 1], 2))
        self.assertFalse(is_irreducible([1, 0, 1], 2))

    def test_inverses(self):
        for f in (self.gf8, self.gf9):
            for a in list(f.elements())[1:]:
                self.assertEqual(f.mul(a, f.inverse(a)), f.one)
        with self.assertRaises(FieldError):
            self.gf8.inverse(self.gf8.zero)

    def test_primitive_element_order(self):
        for f in (self.gf8, self.gf9):
            g = primitive_element(f)
            self.assertEqual(f.order(g), f.size - 1)
            powers = {f.pow(g, e) for e in range(f.size - 1)}
            self.assertEqual(len(powers), f.size - 1)

    def test_rejections(self):
        with self.assertRaises(FieldError):
            field_new(4, 1)
        with self.assertRaises(FieldError):
            field_new(2, 13)
        with self.assertRaises(FieldError):
            self.gf8.element([1, 0, 0, 1])

    def test_summary(self):
        summary = field_summary(self.gf9)
        self.assertEqual(summary["size"], 9)
        self.assertEqual(summary["modulus"], [1, 0, 1])


class TestDifferenceSets(unittest.TestCase):
    def test_counts(self):
        counts = difference_counts([0, 1, 3], 7)
        self.assertEqual(counts.tolist(), [0, 1, 1, 1, 1, 1, 1])
        self.assertTrue(is_perfect_difference_set([0, 1, 3], 7))
        self.assertFalse(is_perfect_difference_set([0, 1, 2], 7))

    def test_canonical_rotation(self):
        self.assertEqual(canonical_rotation([2, 3, 5], 7), (0, 1, 3))

    def test_singer_q2(self):
        singer = singer_difference_set(2)
        self.assertEqual(singer.modulus, 7)
        self.assertEqual(len(singer.residues), 3)
        self.assertEqual(singer.residues[0], 0)

    def test_non_prime_power_rejected(self):
        with self.assertRaises(FieldError):
            singer_difference_set(6)

    def test_size_limit(self):
        with self.assertRaises(FieldError):
            singer_difference_set(17)
        with self.assertRaises(FieldError):
            singer_difference_set(5, limit=100)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
def test_singer_sets_are_perfect(q):
    singer = singer_difference_set(q)
    v = q * q + q + 1
    assert singer.modulus == v
    assert len(singer.residues) == q + 1
    counts = difference_counts(singer.residues, v)
    assert counts[0] == 0
    assert all(c == 1 for c in counts[1:])


SMALL_FIELDS = [(2, 1), (2, 2), (5, 1), (2, 3), (3, 2)]


@pytest.mark.parametrize("p,k", SMALL_FIELDS)
@settings(max_examples=1000, deadline=None)
@given(data=st.data())
def test_field_axioms(p, k, data):
    f = field_new(p, k)
    index = st.integers(0, f.size - 1)
    x, y, z = (f.from_index(data.draw(index)) for _ in range(3))
    assert f.add(x, f.add(y, z)) == f.add(f.add(x, y), z)
    assert f.mul(x, f.mul(y, z)) == f.mul(f.mul(x, y), z)
    assert f.add(x, y) == f.add(y, x)
    assert f.mul(x, y) == f.mul(y, x)
    assert f.mul(x, f.add(y, z)) == f.add(f.mul(x, y), f.mul(x, z))
    assert f.add(x, f.zero) == x
    assert f.mul(x, f.one) == x
    assert f.add(x, f.neg(x)) == f.zero
    assert f.sub(f.add(x, y), y) == x
    if not x.is_zero():
        assert f.mul(x, f.inverse(x)) == f.one


@pytest.mark.parametrize("p,k", SMALL_FIELDS)
def test_every_nonzero_element_satisfies_fermat(p, k):
    f = field_new(p, k)
    for a in list(f.elements())[1:]:
        assert f.pow(a, f.size - 1) == f.one
        assert (f.size - 1) % f.order(a) == 0


class TestSmallFieldValues(unittest.TestCase):
    def test_gf4_modulus_and_square(self):
        gf4 = field_new(2, 2)
        self.assertEqual(gf4.modulus_poly, (1, 1, 1))
        x = gf4.element([0, 1])
        self.assertEqual(gf4.mul(x, x), gf4.element([1, 1]))

    def test_primitive_elements(self):
        self.assertEqual(primitive_element(field_new(5, 1)), field_new(5, 1).element([2]))
        self.assertEqual(primitive_element(field_new(7, 1)), field_new(7, 1).element([3]))
        gf4 = field_new(2, 2)
        self.assertEqual(primitive_element(gf4), gf4.element([0, 1]))

    def test_order_in_z7(self):
        gf7 = field_new(7, 1)
        self.assertEqual(gf7.order(gf7.element([3])), 6)
        self.assertEqual(gf7.order(gf7.element([2])), 3)
