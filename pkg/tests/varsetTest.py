import faulthandler
import unittest

from anbsak.errors import *
from anbsak.varset import VarSet, Family, popcount


class VarSetTestCase(unittest.TestCase):
    def test_set_operations(self):
        a = VarSet.of(0, 2, 5)
        self.assertEqual(int(a), 0b100101)
        self.assertEqual(len(a), 3)
        self.assertEqual(list(a), [0, 2, 5])
        self.assertIn(2, a)
        self.assertNotIn(1, a)
        self.assertEqual(a | VarSet.of(1), VarSet.of(0, 1, 2, 5))
        self.assertEqual(a & VarSet.of(2, 3), VarSet.of(2))
        self.assertEqual(a - VarSet.of(0), VarSet.of(2, 5))
        self.assertEqual(a.add(3).remove(0), VarSet.of(2, 3, 5))
        self.assertTrue(VarSet.of(2).issubset(a))
        self.assertTrue(a.issuperset(VarSet()))
        self.assertFalse(VarSet())
        self.assertEqual(repr(VarSet.of(0, 2)), 'VarSet({0, 2})')
        self.assertIsInstance(a | 1, VarSet)

    def test_errors(self):
        with self.assertRaises(AnbSAKValueError):
            VarSet.of(0).remove(1)
        with self.assertRaises(AnbSAKValueError):
            VarSet(-1)

    def test_rank(self):
        universe = VarSet.of(1, 3, 4)
        ranks = [s.rank(universe) for s in (VarSet(), VarSet.of(1), VarSet.of(3), VarSet.of(1, 3),
                                            VarSet.of(4), VarSet.of(1, 3, 4))]
        self.assertEqual(ranks, [0, 1, 2, 3, 4, 7])
        with self.assertRaises(AnbSAKValueError):
            VarSet.of(2).rank(universe)

    def test_family(self):
        fam = Family(VarSet.of(0), VarSet.of(2, 3, 5))
        self.assertEqual(fam.size, 8)
        self.assertEqual(len(fam.masks), 8)
        # ranks follow ascending mask order and strict subsets come first
        self.assertEqual(fam.masks, sorted(fam.masks))
        for rank, mask in enumerate(fam.masks):
            self.assertEqual(fam.rank(mask), rank)
            self.assertIn(mask, fam)
            self.assertTrue(mask & 1)
            self.assertEqual(popcount(rank), len(fam.varset(rank)) - 1)
        self.assertNotIn(VarSet.of(2), fam)
        self.assertNotIn(VarSet.of(0, 1), fam)
        self.assertEqual(list(fam.free_index_bits(0b101)), [(0, 2), (2, 5)])


class FamilyMasksTestCase(unittest.TestCase):
    def setUp(self):
        # a runaway mask expansion would otherwise hang the suite
        faulthandler.dump_traceback_later(60, exit=True)

    def tearDown(self):
        faulthandler.cancel_dump_traceback_later()

    def test_small_families(self):
        self.assertEqual(Family(1, 0b110).masks, [0b001, 0b011, 0b101, 0b111])
        self.assertEqual(Family(0, 0).masks, [0])
        self.assertEqual(Family(0b100, 0b001).masks, [0b100, 0b101])

    def test_wide_family(self):
        fam = Family(0, (1 << 16) - 1)
        self.assertEqual(len(fam.masks), 1 << 16)
        self.assertEqual(fam.masks, list(range(1 << 16)))
        self.assertEqual(fam.varset(fam.size - 1), VarSet.full(16))


if __name__ == '__main__':
    unittest.main()
