import unittest

import pytest

from src.components.bounds import ExactSeed, propagate, search_seeds, seed_table
from src.components.conjectures import (
    BUDGET_EXCEEDED,
    CONFIRMED,
    EMPTY,
    INCONCLUSIVE,
    NOT_APPLICABLE,
    check_conjecture1,
    check_conjecture2,
    check_conjecture3,
    check_conjecture4,
    check_conjecture5,
    check_conjecture6,
    golomb_lengths,
)
from src.components.core import DgrSystem
from src.components.search import SearchConfig

OPTIMAL_RULERS = {
    3: [1, 2, 4],
    4: [1, 2, 5, 7],
    5: [1, 2, 5, 10, 12],
    6: [1, 2, 5, 11, 13, 18],
    7: [1, 2, 5, 11, 19, 24, 26],
    8: [1, 2, 5, 10, 16, 23, 33, 35],
}


def single_ruler_table(max_k):
    seeds = [
        ExactSeed(1, k, marks[-1], DgrSystem.build([marks], marks[-1]))
        for k, marks in OPTIMAL_RULERS.items()
        if k <= max_k
    ]
    return seed_table(1, max_k, exact=seeds, include_prime_power=False)


class TestGrowthConjecture(unittest.TestCase):
    def test_propagated_table(self):
        table = propagate(seed_table(3, 3, exact=[ExactSeed(1, 3, 4, DgrSystem.build([[1, 2, 4]], 4))],
                                     include_prime_power=False))
        report = check_conjecture2(table)
        self.assertEqual(report.status, CONFIRMED)
        self.assertEqual([(r["i"], r["h"], r["h_next"]) for r in report.rows], [(1, 4, 6), (2, 6, 9)])
        self.assertEqual(report.unevaluated, [])

    def test_non_exact_cells_are_listed(self):
        table = seed_table(3, 3, exact=[ExactSeed(1, 3, 4, DgrSystem.build([[1, 2, 4]], 4))],
                           include_prime_power=False)
        report = check_conjecture2(table)
        self.assertEqual(report.status, EMPTY)
        self.assertEqual(report.unevaluated, [[1, 3], [2, 3]])


class TestGolombConjecture(unittest.TestCase):
    def setUp(self):
        self.table = single_ruler_table(8)

    def test_lengths_match_published(self):
        entries = golomb_lengths(self.table)
        self.assertEqual([e.g_value for e in entries], [0, 1, 3, 6, 11, 17, 25, 34])
        self.assertTrue(all(e.matches for e in entries))

    def test_no_violation(self):
        report = check_conjecture6(self.table)
        self.assertEqual(report.status, CONFIRMED)
        self.assertEqual(report.violations, [])
        self.assertEqual(len(report.rows), 14)
        in_scope = [r for r in report.rows if r["form"] == "G(k+2) < k^2+k" and r["in_scope"]]
        self.assertEqual([(r["k"], r["g"], r["bound"]) for r in in_scope], [(6, 34, 42)])

    def test_out_of_scope_failures_are_not_violations(self):
        report = check_conjecture6(self.table)
        small = [r for r in report.rows if r["form"] == "G(k+2) < k^2+k" and r["k"] == 2]
        self.assertFalse(small[0]["holds"])
        self.assertFalse(small[0]["in_scope"])

    def test_missing_values_unevaluated(self):
        table = single_ruler_table(5)
        table.cell(1, 5).h_upper = None
        report = check_conjecture6(table)
        self.assertEqual(report.unevaluated, [5])

    def test_report_serialization(self):
        data = check_conjecture6(self.table).to_dict()
        self.assertEqual(data["conjecture"], 6)
        self.assertEqual(data["violations"], 0)
        self.assertIn("format_version", data)
        self.assertEqual(len(check_conjecture6(self.table).to_dataframe()), 14)


class TestSearchBackedConjectures(unittest.TestCase):
    def test_subset_probe_is_inconclusive(self):
        report = check_conjecture1(1, 3, 8)
        self.assertEqual(report.status, INCONCLUSIVE)
        self.assertTrue(report.rows[0]["holds"])
        self.assertEqual(report.rows[0]["h"], 4)
        self.assertEqual(report.rows[0]["checked"], 35)

    def test_regular_extension(self):
        report = check_conjecture3(2, 3)
        self.assertEqual(report.status, CONFIRMED)
        self.assertEqual(report.witness.header, (3, 3, 9))

    def test_regular_extension_not_applicable(self):
        self.assertEqual(check_conjecture3(1, 3).status, NOT_APPLICABLE)

    def test_completion(self):
        report = check_conjecture4(2, 2)
        self.assertEqual(report.status, CONFIRMED)
        self.assertEqual(len(report.rows), 15)

    def test_completion_not_applicable(self):
        self.assertEqual(check_conjecture4(1, 3).status, NOT_APPLICABLE)

    def test_square_plus_two_scope(self):
        with self.assertRaises(ValueError):
            check_conjecture5(3)

    def test_square_plus_two_budget(self):
        report = check_conjecture5(4, SearchConfig(node_budget=1))
        self.assertEqual(report.status, BUDGET_EXCEEDED)
        self.assertEqual(report.violations, [])


@pytest.mark.parametrize("i0,j", [(2, 2), (3, 2), (2, 3)])
def test_regular_extension_small_cases(i0, j):
    assert check_conjecture3(i0, j).status == CONFIRMED


@pytest.mark.slow
def test_single_ruler_baseline_from_search():
    exact, lower = search_seeds(1, 8)
    assert lower == {}
    table = seed_table(1, 8, exact, lower, include_prime_power=False)
    assert check_conjecture6(table).violations == []
    assert [e.g_value for e in golomb_lengths(table)] == [0, 1, 3, 6, 11, 17, 25, 34]
