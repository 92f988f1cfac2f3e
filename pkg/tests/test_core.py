import unittest

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.components.core import (
    DgrSystem,
    Gap,
    Ruler,
    ViolationKind,
    canonical_form,
    canonical_hash,
    difference_list,
    find_gaps,
    gap_floor,
    is_golomb,
    largest_gap,
    occupancy,
    reflect_ruler,
    reflect_system,
    regular_system,
    translate,
    translate_system,
    verify_dgr,
)
from src.components.exceptions import InvalidRulerError
from src.utils.instance_generator import InstanceGenerator


class TestRuler(unittest.TestCase):
    def test_marks_are_sorted(self):
        self.assertEqual(Ruler((4, 1, 2)).marks, (1, 2, 4))

    def test_rejects_duplicates_and_negatives(self):
        with self.assertRaises(InvalidRulerError):
            Ruler((1, 1, 3))
        with self.assertRaises(InvalidRulerError):
            Ruler((-1, 2))

    def test_length_and_str(self):
        r = Ruler.of(1, 2, 5, 7)
        self.assertEqual(r.length, 6)
        self.assertEqual(str(r), "{1,2,5,7}")
        self.assertIn(5, r)


class TestDifferences(unittest.TestCase):
    def test_golomb_ruler(self):
        entries = difference_list(Ruler.of(1, 2, 4))
        self.assertEqual([e.value for e in entries], [1, 3, 2])
        self.assertFalse(any(e.duplicate for e in entries))
        self.assertTrue(is_golomb(Ruler.of(1, 2, 4)))

    def test_duplicate_difference_flagged(self):
        entries = difference_list(Ruler.of(1, 2, 3))
        self.assertEqual([(e.value, e.duplicate) for e in entries], [(1, True), (2, False), (1, True)])
        self.assertFalse(is_golomb(Ruler.of(1, 2, 3)))

    def test_small_rulers(self):
        self.assertEqual(difference_list(Ruler.of(5)), [])
        self.assertTrue(is_golomb(Ruler.of(5)))
        self.assertTrue(is_golomb(Ruler(())))


class TestVerify(unittest.TestCase):
    def setUp(self):
        self.valid = DgrSystem.build([[1, 2, 4], [3, 5, 6]], 6)

    def test_valid_system(self):
        report = verify_dgr(self.valid)
        self.assertTrue(report.valid)
        self.assertEqual(report.to_dict(), {"valid": True, "violations": []})

    def test_overlap(self):
        s = DgrSystem.build([[1, 2, 4], [4, 5, 7]], 7)
        report = verify_dgr(s)
        self.assertEqual(len(report.of_kind(ViolationKind.OVERLAP)), 1)

    def test_duplicate_difference_lists_pairs(self):
        s = DgrSystem.build([[1, 2, 3]], 3)
        dup = verify_dgr(s).of_kind(ViolationKind.DUPLICATE_DIFFERENCE)
        self.assertEqual(len(dup), 1)
        self.assertEqual(dict(dup[0].details)["pairs"], [[1, 2], [2, 3]])

    def test_out_of_range_and_cardinality(self):
        s = DgrSystem(2, 3, 6, (Ruler.of(0, 2, 5), Ruler.of(3, 4)))
        report = verify_dgr(s)
        self.assertEqual(len(report.of_kind(ViolationKind.OUT_OF_RANGE)), 1)
        self.assertEqual(len(report.of_kind(ViolationKind.WRONG_CARDINALITY)), 1)

    def test_all_violations_reported(self):
        s = DgrSystem.build([[1, 2, 3], [3, 9, 10]], 8)
        kinds = {v.kind for v in verify_dgr(s).violations}
        self.assertEqual(kinds, {ViolationKind.DUPLICATE_DIFFERENCE, ViolationKind.OVERLAP, ViolationKind.OUT_OF_RANGE})

    def test_wrong_ruler_count(self):
        s = DgrSystem(2, 3, 6, (Ruler.of(1, 2, 4),))
        self.assertEqual(len(verify_dgr(s).of_kind(ViolationKind.WRONG_RULER_COUNT)), 1)

    def test_empty_system_is_valid(self):
        self.assertTrue(verify_dgr(DgrSystem.empty(3)).valid)

    def test_bad_header(self):
        report = verify_dgr(DgrSystem(0, 0, 3, ()))
        self.assertFalse(report.valid)
        self.assertEqual(len(report.of_kind(ViolationKind.BAD_HEADER)), 1)


class TestGeometry(unittest.TestCase):
    def test_translate(self):
        self.assertEqual(translate(Ruler.of(1, 2, 4), 3).marks, (4, 5, 7))
        with self.assertRaises(InvalidRulerError):
            translate(Ruler.of(1, 2), -2)

    def test_translate_system(self):
        s = translate_system(DgrSystem.build([[1, 2, 4]], 4), 2)
        self.assertEqual(s.header, (1, 3, 6))
        self.assertEqual(s.union(), (3, 4, 6))

    def test_reflection_is_involution(self):
        s = DgrSystem.build([[1, 2, 6, 8], [3, 5, 9, 10]], 10)
        mirrored = reflect_system(s)
        self.assertTrue(verify_dgr(mirrored).valid)
        self.assertEqual(reflect_system(mirrored), s)

    def test_reflect_ruler_and_wider_span(self):
        self.assertEqual(reflect_ruler(Ruler.of(1, 2, 4), 6).marks, (3, 5, 6))
        wider = DgrSystem.build([[1, 2, 4]], 4).with_span(6)
        self.assertEqual(wider.header, (1, 3, 6))
        self.assertTrue(verify_dgr(wider).valid)

    def test_gaps(self):
        s = DgrSystem.build([[1, 2, 5, 7]], 7)
        self.assertEqual(occupancy(s).tolist(), [True, True, False, False, True, False, True])
        self.assertEqual(find_gaps(s), [Gap(2, 2), Gap(5, 1)])
        self.assertEqual(largest_gap(s), Gap(2, 2))
        self.assertEqual(list(Gap(2, 2).positions), [3, 4])

    def test_boundary_gaps_included(self):
        s = DgrSystem.build([[2, 3]], 5)
        self.assertEqual(find_gaps(s), [Gap(0, 1), Gap(3, 2)])

    def test_full_union_has_no_gap(self):
        self.assertIsNone(largest_gap(regular_system(3, 2)))

    def test_gap_floor(self):
        self.assertEqual(gap_floor(7, 1, 4), 1)
        self.assertEqual(gap_floor(12, 1, 5), 2)
        self.assertEqual(gap_floor(6, 2, 3), 0)
        self.assertEqual(gap_floor(35, 1, 8), 4)

    def test_regular_system(self):
        s = regular_system(3, 2)
        self.assertEqual(s.header, (3, 2, 6))
        self.assertTrue(verify_dgr(s).valid)
        with self.assertRaises(InvalidRulerError):
            regular_system(2, 3)


class TestCanonicalForm(unittest.TestCase):
    def test_mirror_images_share_hash(self):
        s = DgrSystem.build([[3, 5, 9, 10], [1, 2, 6, 8]], 10)
        self.assertEqual(canonical_hash(s), canonical_hash(reflect_system(s)))
        self.assertEqual(len(canonical_hash(s)), 16)

    def test_canonical_form_sorts_rulers(self):
        s = DgrSystem.build([[3, 5, 6], [1, 2, 4]], 6)
        self.assertEqual(canonical_form(s).rulers[0].marks[0], 1)

    def test_single_ruler_prefers_mirror(self):
        s = DgrSystem.build([[1, 3, 4]], 4)
        self.assertEqual(canonical_form(s), DgrSystem.build([[1, 2, 4]], 4))

    def test_tight_system_has_no_gaps(self):
        tight = DgrSystem.build([[1, 2, 5], [3, 4, 6]], 6)
        self.assertTrue(verify_dgr(tight).valid)
        self.assertEqual(find_gaps(tight), [])
        for i_count, j_marks in [(1, 1), (3, 1), (2, 2), (4, 2)]:
            self.assertEqual(find_gaps(regular_system(i_count, j_marks)), [])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), i_count=st.integers(1, 3), j_marks=st.integers(2, 4))
def test_generated_systems_verify(seed, i_count, j_marks):
    s = InstanceGenerator(seed).system(i_count, j_marks)
    assert verify_dgr(s).valid
    assert verify_dgr(reflect_system(s)).valid
    assert canonical_hash(s) == canonical_hash(reflect_system(s))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), i_count=st.integers(1, 3), j_marks=st.integers(2, 4))
def test_tight_witness_gap_at_least_floor(seed, i_count, j_marks):
    s = InstanceGenerator(seed).system(i_count, j_marks)
    union = s.union()
    tight = translate_system(s, 1 - union[0], union[-1] - union[0] + 1)
    gap = largest_gap(tight)
    width = gap.width if gap else 0
    assert width >= gap_floor(tight.n_span, i_count, j_marks)


@pytest.mark.parametrize("marks", [(1, 2, 4), (1, 2, 5, 7), (1, 2, 5, 10, 12), (1, 3, 7, 12, 14)])
def test_numpy_mask_matches_union(marks):
    s = DgrSystem.build([marks], marks[-1])
    assert np.flatnonzero(occupancy(s)).tolist() == [m - 1 for m in marks]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), i_count=st.integers(1, 3), j_marks=st.integers(2, 4))
def test_gap_widths_account_for_empty_positions(seed, i_count, j_marks):
    s = InstanceGenerator(seed).system(i_count, j_marks)
    assert sum(g.width for g in find_gaps(s)) == s.n_span - i_count * j_marks
    union = s.union()
    tight = translate_system(s, 1 - union[0], union[-1] - union[0] + 1)
    if tight.n_span == i_count * j_marks:
        assert find_gaps(tight) == []


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), i_count=st.integers(1, 3), j_marks=st.integers(2, 4))
def test_canonical_form_is_idempotent(seed, i_count, j_marks):
    s = InstanceGenerator(seed).system(i_count, j_marks)
    once = canonical_form(s)
    assert canonical_form(once) == once
    assert canonical_form(reflect_system(s)) == once
    assert verify_dgr(once).valid
