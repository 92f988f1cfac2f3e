import shutil
import tempfile
import unittest
from pathlib import Path

import pytest

from src.components.bounds import (
    BoundKind,
    BoundsTable,
    ExactSeed,
    RuleId,
    materialize_witness,
    propagate,
    record_falsifier,
    regularity_report,
    rule_shift,
    search_seeds,
    seed_table,
    square_cell_annotations,
)
from src.components.constructions import shift_pair
from src.components.core import DgrSystem, verify_dgr
from src.components.exceptions import (
    BoundsContradictionError,
    DgrError,
    MissingWitnessError,
    NonConstructiveChainError,
)
from src.components.witness_store import WitnessStore

H13 = ExactSeed(1, 3, 4, DgrSystem.build([[1, 2, 4]], 4))
H14 = ExactSeed(1, 4, 7, DgrSystem.build([[1, 2, 5, 7]], 7))


def upper_rules(table, i, j):
    apps = [table.applications[a] for a in table.cell(i, j).provenance]
    return [(a.rule, a.value) for a in apps if a.kind is BoundKind.H_UPPER]


class TestSeeding(unittest.TestCase):
    def test_trivial_columns(self):
        table = seed_table(3, 3, include_prime_power=False)
        for i in range(1, 4):
            self.assertEqual(table.cell(i, 1).h_upper, i)
            self.assertTrue(table.cell(i, 2).regular)
            self.assertEqual(table.cell(i, 2).y_upper, 2 * i)
        self.assertIsNone(table.cell(2, 3).h_upper)
        self.assertEqual(table.cell(2, 3).h_lower, 6)

    def test_exact_seed_needs_valid_witness(self):
        bad = ExactSeed(1, 3, 4, DgrSystem.build([[1, 2, 3]], 3))
        with self.assertRaises(DgrError):
            seed_table(2, 3, exact=[bad])

    def test_seed_below_ij_contradicts(self):
        with self.assertRaises(BoundsContradictionError):
            seed_table(2, 3, lower={(1, 3): 5}, exact=[H13])

    def test_prime_power_facts(self):
        table = seed_table(4, 3)
        self.assertTrue(table.cell(4, 3).exact)
        self.assertEqual(table.cell(4, 3).h_upper, 12)
        with self.assertRaises(NonConstructiveChainError):
            materialize_witness(table, (4, 3))

    def test_prime_power_upper_fact_recorded(self):
        table = seed_table(5, 4)
        self.assertEqual(table.cell(5, 4).h_upper, 20)
        values = {v for rule, v in upper_rules(table, 5, 4) if rule is RuleId.PRIME_POWER}
        self.assertEqual(values, {20, 23})

    def test_singer_seed(self):
        table = seed_table(1, 4, include_prime_power=False, include_singer=True)
        self.assertEqual(table.cell(1, 3).h_upper, 4)
        self.assertEqual(table.upper_app(1, 3).rule, RuleId.SINGER)
        witness = materialize_witness(table, (1, 4))
        self.assertEqual(witness.header, (1, 4, table.cell(1, 4).h_upper))


class TestPropagation(unittest.TestCase):
    def setUp(self):
        self.table = propagate(seed_table(3, 3, exact=[H13], include_prime_power=False))

    def test_provenance_chain_for_two_rulers(self):
        self.assertEqual(
            upper_rules(self.table, 2, 3),
            [(RuleId.R1_CONCAT, 8), (RuleId.R2_EXTEND, 7), (RuleId.R3_DOUBLE, 6)],
        )
        self.assertTrue(self.table.cell(2, 3).exact)

    def test_extend_witness(self):
        app = next(
            self.table.applications[a] for a in self.table.cell(2, 3).provenance
            if self.table.applications[a].rule is RuleId.R2_EXTEND
        )
        witness = materialize_witness(self.table, app)
        self.assertEqual([r.marks for r in witness.rulers], [(3, 4, 6), (1, 2, 7)])

    def test_three_rulers_regular(self):
        cell = self.table.cell(3, 3)
        self.assertTrue(cell.regular)
        app = self.table.upper_app(3, 3)
        self.assertEqual(app.rule, RuleId.R6_REGULAR)
        self.assertEqual(app.params["mode"], "merge")
        witness = materialize_witness(self.table, (3, 3))
        self.assertEqual(witness.header, (3, 3, 9))
        self.assertTrue(verify_dgr(witness).valid)

    def test_every_constructive_bound_materializes(self):
        for key in self.table.keys():
            app = self.table.upper_app(*key)
            if app is None or not app.constructive:
                continue
            witness = materialize_witness(self.table, app.app_id)
            self.assertEqual(witness.header, (key[0], key[1], app.value))
            self.assertTrue(verify_dgr(witness).valid)

    def test_input_table_untouched(self):
        seeded = seed_table(3, 3, exact=[H13], include_prime_power=False)
        before = len(seeded.applications)
        propagate(seeded)
        self.assertEqual(len(seeded.applications), before)
        self.assertIsNone(seeded.cell(2, 3).h_upper)

    def test_fixpoint_is_stable(self):
        again = propagate(self.table)
        self.assertEqual(len(again.applications), len(self.table.applications))
        self.assertEqual(again.to_dict(), self.table.to_dict())
        for key in self.table.keys():
            self.assertEqual(again.cell(*key), self.table.cell(*key))

    def test_exact_cells_materialize(self):
        exact = [key for key in self.table.keys() if self.table.cell(*key).exact]
        self.assertIn((3, 3), exact)
        for key in exact:
            app = self.table.upper_app(*key)
            self.assertTrue(app.constructive)
            witness = materialize_witness(self.table, key)
            self.assertEqual(witness.header, (key[0], key[1], self.table.cell(*key).h_upper))
            self.assertTrue(verify_dgr(witness).valid)

    def test_y_bounds(self):
        cell = self.table.cell(2, 3)
        self.assertGreaterEqual(cell.y_lower, cell.h_lower)

    def test_chain_lists_ancestors_first(self):
        chain = self.table.chain(self.table.cell(2, 3).upper_source)
        self.assertTrue(chain[0].startswith("#"))
        self.assertIn("R3", chain[-1])

    def test_dataframe(self):
        frame = self.table.to_dataframe()
        self.assertEqual(len(frame), 9)
        row = frame[(frame["i"] == 2) & (frame["j"] == 3)].iloc[0]
        self.assertEqual(row["h_upper"], 6)
        self.assertEqual(row["upper_rule"], "R3")
        self.assertTrue(row["exact"])

    def test_unknown_cell(self):
        with self.assertRaises(KeyError):
            self.table.cell(4, 1)


class TestDoubling(unittest.TestCase):
    def test_four_marks_double(self):
        table = propagate(seed_table(2, 4, exact=[H13, H14], include_prime_power=False))
        self.assertEqual(table.cell(2, 4).h_upper, 10)
        self.assertEqual(table.upper_app(2, 4).rule, RuleId.R3_DOUBLE)
        witness = materialize_witness(table, (2, 4))
        self.assertEqual([r.marks for r in witness.rulers], [(2, 3, 5, 10), (1, 6, 7, 9)])


class TestContradiction(unittest.TestCase):
    def test_wrong_exact_value_detected(self):
        wrong = ExactSeed(2, 3, 7, DgrSystem.build([[3, 4, 6], [1, 2, 7]], 7))
        table = seed_table(3, 3, exact=[H13, wrong], include_prime_power=False)
        with self.assertRaises(BoundsContradictionError) as ctx:
            propagate(table)
        error = ctx.exception
        self.assertEqual(tuple(error.key), (2, 3))
        self.assertEqual((error.lower, error.upper), (7, 6))
        dump = error.dump()
        self.assertIn("borne inférieure", dump)
        self.assertIn("R3", dump)


class TestPersistence(unittest.TestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.table = propagate(seed_table(3, 3, exact=[H13], include_prime_power=False))

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def test_save_and_load(self):
        store = WitnessStore(str(self.tmp / "store"))
        path = self.table.save(self.tmp / "table.json", store)
        loaded = BoundsTable.load(path, store)
        self.assertEqual(loaded.to_dict(), self.table.to_dict())
        self.assertGreater(store.size(), 0)
        witness = materialize_witness(loaded, (3, 3))
        self.assertEqual(witness.header, (3, 3, 9))

    def test_missing_store_entry(self):
        store = WitnessStore(str(self.tmp / "store"))
        path = self.table.save(self.tmp / "table.json", store)
        loaded = BoundsTable.load(path, store)
        seed_app = loaded.upper_app(1, 3)
        del loaded.witnesses[seed_app.app_id]
        with self.assertRaises(MissingWitnessError):
            materialize_witness(loaded, (1, 3))


class TestFalsifier(unittest.TestCase):
    def setUp(self):
        self.table = seed_table(1, 3, include_prime_power=False)

    def test_progression_raises_y(self):
        app = record_falsifier(self.table, 1, 3, [1, 2, 3])
        self.assertEqual(app.value, 4)
        self.assertEqual(self.table.cell(1, 3).y_lower, 4)

    def test_set_with_ruler_rejected(self):
        with self.assertRaises(DgrError):
            record_falsifier(self.table, 1, 3, [1, 2, 4])

    def test_bad_set_rejected(self):
        with self.assertRaises(DgrError):
            record_falsifier(self.table, 1, 3, [0, 1, 2])


class TestYBounds(unittest.TestCase):
    def setUp(self):
        table = seed_table(3, 3, exact=[H13], include_prime_power=False)
        # Y(1, 3) = 4 : {1, 2, 3} n'a pas de règle, tout ensemble de 4 entiers en contient une
        record_falsifier(table, 1, 3, [1, 2, 3])
        table.record(RuleId.R7_Y, (1, 3), BoundKind.Y_UPPER, 4)
        self.table = propagate(table)

    def test_upper_grows_by_j_per_ruler(self):
        self.assertEqual([self.table.cell(i, 3).y_upper for i in (1, 2, 3)], [4, 7, 10])
        source = self.table.applications[self.table.cell(3, 3).y_upper_source]
        self.assertIs(source.rule, RuleId.R7_Y)
        self.assertEqual(source.antecedents, ((2, 3),))

    def test_y_chain_holds_everywhere(self):
        for i, j in self.table.keys():
            cell = self.table.cell(i, j)
            self.assertGreaterEqual(cell.y_lower, cell.h_lower)
            prev = self.table.get(i - 1, j)
            if prev is None:
                continue
            self.assertGreaterEqual(cell.y_lower, prev.y_lower)
            if j >= 3 and prev.y_upper is not None:
                self.assertLessEqual(cell.y_upper, prev.y_upper + j)

    def test_y_lower_follows_h(self):
        self.assertEqual(self.table.cell(1, 3).y_lower, 4)
        self.assertEqual(self.table.cell(2, 3).y_lower, 6)
        self.assertEqual(self.table.cell(3, 3).y_lower, 9)


class TestReports(unittest.TestCase):
    def setUp(self):
        self.table = propagate(seed_table(3, 3, exact=[H13], include_prime_power=False))

    def test_regularity(self):
        entries = {e.j: e for e in regularity_report(self.table)}
        self.assertEqual(entries[3].regular_from, 2)
        self.assertEqual(entries[3].iota_lower_exclusive, 1.0)
        self.assertEqual(entries[2].regular_from, 1)
        self.assertIsNone(entries[1].iota_lower_exclusive)

    def test_square_annotations(self):
        notes = square_cell_annotations(self.table)
        self.assertEqual(len(notes), 4)
        self.assertTrue(all(n.status == "égal" for n in notes))
        self.assertFalse(any(n.in_scope for n in notes))
        self.assertTrue(self.table.cell(2, 3).annotations)

SINGLE_RULERS = {
    3: [1, 2, 4],
    4: [1, 2, 5, 7],
    5: [1, 2, 5, 10, 12],
    6: [1, 2, 5, 11, 13, 18],
    7: [1, 2, 5, 11, 19, 24, 26],
}


class TestShiftRule(unittest.TestCase):
    def setUp(self):
        seeds = [ExactSeed(1, k, m[-1], DgrSystem.build([m], m[-1])) for k, m in SINGLE_RULERS.items()]
        self.table = seed_table(2, 7, exact=seeds, include_prime_power=False)

    def test_two_rulers_from_one_longer(self):
        for j, expected in [(3, 8), (4, 13), (5, 19), (6, 27)]:
            cand = rule_shift(self.table, 2, j)
            self.assertEqual(cand.value, expected)
            self.assertTrue(cand.constructive)
            marks = SINGLE_RULERS[j + 1]
            built = shift_pair(DgrSystem.build([marks], marks[-1]).rulers[0], marks[-1]).system
            self.assertEqual(built.header, (2, j, expected))

    def test_only_two_rulers(self):
        self.assertIsNone(rule_shift(self.table, 1, 3))


@pytest.mark.slow
def test_search_seeded_table():
    exact, lower = search_seeds(3, 5)
    table = propagate(seed_table(3, 5, exact, lower))
    for seed in exact:
        assert table.cell(seed.i, seed.j).h_upper >= seed.value
    assert table.cell(2, 3).h_upper == 6
    for key in table.keys():
        app = table.upper_app(*key)
        if app is not None and app.constructive:
            assert materialize_witness(table, app.app_id).n_span == app.value


if __name__ == "__main__":
    unittest.main()
