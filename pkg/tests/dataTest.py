import unittest

import numpy as np
from parameterized import parameterized

from anbsak import constants
from anbsak.data import (Dataset, CsvIO, Jft, jft, jft_marginalize, jft_to_cft, cft, group_rows, median_cutoff,
                         discretize_median, fold_assignment, ingest_csv)
from anbsak.errors import *
from anbsak.varset import VarSet

WEATHER = constants.project_to_absolute_path('tests/data/weather.csv')
WEATHER_TEST = constants.project_to_absolute_path('tests/data/weather_test.csv')
WEATHER_UNKNOWN = constants.project_to_absolute_path('tests/data/weather_unknown.csv')
WEATHER_MISSING = constants.project_to_absolute_path('tests/data/weather_missing_feature.csv')


class DatasetTestCase(unittest.TestCase):
    def setUp(self):
        self.ds = Dataset([[0, 1, 2], [1, 1, 0], [0, 0, 2], [0, 1, 1]], [2, 2, 3])

    def test_basics(self):
        self.assertEqual(self.ds.n_vars, 3)
        self.assertEqual(self.ds.n_rows, 4)
        self.assertEqual(self.ds.names, ['X0', 'X1', 'X2'])
        self.assertEqual(self.ds.class_counts().tolist(), [3, 1])
        self.assertEqual(self.ds.all_vars(), VarSet.of(0, 1, 2))

    def test_validation(self):
        with self.assertRaises(AnbSAKValueError):
            Dataset([[0, 2]], [2, 2])
        with self.assertRaises(AnbSAKValueError):
            Dataset([[0, 1]], [2, 1])
        with self.assertRaises(AnbSAKValueError):
            Dataset([[0, 1, 0]], [2, 2])

    def test_input_not_frozen(self):
        raw = np.array([[0, 1], [1, 0]])
        Dataset(raw, [2, 2])
        raw[0, 0] = 1
        self.assertEqual(raw[0, 0], 1)

    def test_read_only(self):
        with self.assertRaises(ValueError):
            self.ds.data[0, 0] = 1

    def test_select_and_take(self):
        sub = self.ds.select([2, 0])
        self.assertEqual(sub.arities, (3, 2))
        self.assertEqual(sub.names, ['X2', 'X0'])
        self.assertEqual(sub.data[:, 0].tolist(), [2, 0, 2, 1])
        rows = self.ds.take([1, 3])
        self.assertEqual(rows.data.tolist(), [[1, 1, 0], [0, 1, 1]])
        with self.assertRaises(AnbSAKSchemaError):
            self.ds.select_names(['X0', 'nope'])

    def test_json(self):
        again = Dataset.from_json(self.ds.to_json())
        self.assertEqual(again, self.ds)
        empty = Dataset(np.zeros((0, 2)), [2, 2])
        self.assertEqual(Dataset.from_json(empty.to_json()).n_rows, 0)


class FrequencyTableTestCase(unittest.TestCase):
    def setUp(self):
        self.ds = Dataset([[0, 1, 2], [1, 1, 0], [0, 0, 2], [0, 1, 1]], [2, 2, 3])

    def test_jft(self):
        t = jft(self.ds, VarSet.of(0, 2))
        self.assertEqual(t.counts.shape, (2, 3))
        self.assertEqual(t.counts.tolist(), [[0, 1, 2], [1, 0, 0]])
        self.assertEqual(t.total, 4)
        self.assertEqual(t.flat().tolist(), [0, 1, 2, 1, 0, 0])

    def test_marginalize(self):
        full = jft(self.ds, self.ds.all_vars())
        m = jft_marginalize(full, 1)
        self.assertEqual(m.vars, VarSet.of(0, 2))
        self.assertTrue(np.array_equal(m.counts, jft(self.ds, VarSet.of(0, 2)).counts))
        with self.assertRaises(AnbSAKValueError):
            jft_marginalize(full, 0, 'anb')
        self.assertEqual(jft_marginalize(full, 0, 'gbn').vars, VarSet.of(1, 2))

    def test_cft(self):
        # child X0 given parents {X1, X2}: q = 6 configurations, mixed-radix with X1 most significant
        table = cft(self.ds, 0, VarSet.of(1, 2))
        self.assertEqual(table.counts.shape, (6, 2))
        self.assertEqual(table.counts[1 * 3 + 2].tolist(), [1, 0])
        self.assertEqual(table.counts[1 * 3 + 0].tolist(), [0, 1])
        self.assertEqual(table.parent_totals().sum(), 4)
        # child not first in variable order
        t2 = jft_to_cft(jft(self.ds, VarSet.of(0, 2)), 2)
        self.assertEqual(t2.counts.tolist(), [[0, 1, 2], [1, 0, 0]])

    def test_empty_data(self):
        empty = Dataset(np.zeros((0, 2)), [2, 3])
        self.assertEqual(jft(empty, VarSet.of(0, 1)).counts.sum(), 0)
        self.assertEqual(jft(empty, VarSet.of(0, 1)).nnz, 0)
        self.assertEqual(cft(empty, 1, VarSet.of(0)).counts.shape, (2, 3))

    def test_sparse_layout(self):
        t = jft(self.ds, self.ds.all_vars())
        self.assertEqual(t.nnz, 4)
        self.assertEqual(t.keys.tolist(), [[0, 0, 2], [0, 1, 1], [0, 1, 2], [1, 1, 0]])
        self.assertEqual(t.weights.tolist(), [1, 1, 1, 1])
        m = jft_marginalize(t, 2, 'gbn')
        self.assertEqual(m.keys.tolist(), [[0, 0], [0, 1], [1, 1]])
        self.assertEqual(m.weights.tolist(), [1, 2, 1])
        c = jft_to_cft(m, 1)
        self.assertEqual(c.parent_keys.tolist(), [[0], [1]])
        self.assertEqual(c.observed_totals().tolist(), [3, 1])
        self.assertEqual(c.q, 2)
        self.assertEqual(c.r, 2)

    def test_wide_schema_stays_sparse(self):
        # 4^13 cells, far beyond any dense allocation
        rng = np.random.default_rng(0)
        ds = Dataset(rng.integers(0, 4, size=(200, 13)), [4] * 13)
        t = jft(ds, ds.all_vars())
        self.assertEqual(t.q, 4 ** 13)
        self.assertLessEqual(t.nnz, 200)
        self.assertEqual(t.total, 200)
        m = jft_marginalize(t, 12)
        self.assertEqual(m.total, 200)
        self.assertEqual(m.keys.shape[1], 12)
        with self.assertRaises(AnbSAKLimitError):
            t.counts

    def test_from_dense(self):
        dense = np.array([[0.25, 0.0], [0.5, 0.25]])
        t = Jft.from_dense(VarSet.of(0, 1), dense)
        self.assertEqual(t.nnz, 3)
        self.assertEqual(t.arities, (2, 2))
        np.testing.assert_allclose(t.counts, dense)

    def test_group_rows(self):
        keys, inverse = group_rows(np.array([[1, 0], [0, 2], [1, 0], [0, 1]]))
        self.assertEqual(keys.tolist(), [[0, 1], [0, 2], [1, 0]])
        self.assertEqual(inverse.tolist(), [2, 1, 2, 0])
        keys, inverse = group_rows(np.zeros((3, 0), dtype=np.int64))
        self.assertEqual(keys.shape, (1, 0))
        self.assertEqual(inverse.tolist(), [0, 0, 0])


class DiscretizeTestCase(unittest.TestCase):
    @parameterized.expand([
        ([1, 2, 3, 4], 2.5),
        ([1, 1, 1, 2], 1.0),
        ([1, 2, 2, 2], 1.0),
        ([5, 1, 3], 3.0),
    ])
    def test_median_cutoff(self, values, expected):
        self.assertEqual(median_cutoff(values), expected)

    def test_discretize(self):
        self.assertEqual(discretize_median([1, 2, 3, 4]).tolist(), [0, 0, 1, 1])
        self.assertEqual(discretize_median([1, 2, 2, 2]).tolist(), [0, 1, 1, 1])
        # binary columns are left unchanged
        self.assertEqual(discretize_median([0, 1, 1, 0]).tolist(), [0, 1, 1, 0])
        with self.assertRaises(AnbSAKValueError):
            median_cutoff([3, 3, 3])


class CsvTestCase(unittest.TestCase):
    def test_ingest(self):
        with self.assertLogs('anbsak.data', level='INFO'):
            ds = ingest_csv(WEATHER, 'play')
        self.assertEqual(ds.n_rows, 14)  # one row has a missing value
        self.assertEqual(ds.names, ['play', 'outlook', 'temperature', 'humidity', 'windy'])
        self.assertEqual(ds.states[0], ['no', 'yes'])
        self.assertEqual(ds.states[1], ['sunny', 'overcast', 'rainy'])
        # temperature has 12 distinct values and is split at its median, humidity has 10 and is not
        self.assertEqual(ds.cutoffs, {'temperature': 72.0})
        self.assertEqual(ds.arities[2], 2)
        self.assertEqual(ds.arities[3], 10)
        self.assertEqual(ds.class_counts().tolist(), [5, 9])

    def test_discretize_options(self):
        ds = ingest_csv(WEATHER, 'play', discretize='none')
        self.assertEqual(ds.cutoffs, {})
        ds = ingest_csv(WEATHER, 'play', discretize=['humidity'])
        self.assertEqual(list(ds.cutoffs), ['humidity'])

    def test_missing_class_column(self):
        with self.assertRaises(AnbSAKValueError):
            ingest_csv(WEATHER, 'nonexistent')

    def test_missing_file(self):
        with self.assertRaises(AnbSAKIOError):
            ingest_csv(constants.project_to_absolute_path('tests/data/nonexistent.csv'), 'play')

    def test_schema_import(self):
        train = ingest_csv(WEATHER, 'play')
        test, has_class = CsvIO().to_dataset_with_schema(WEATHER_TEST, train.schema())
        self.assertFalse(has_class)
        self.assertEqual(test.names, train.names)
        self.assertEqual(test.arities, train.arities)
        self.assertEqual(test.data[:, 2].tolist(), [0, 1, 0])  # 66 <= 72 < 90
        same, has_class = CsvIO().to_dataset_with_schema(WEATHER, train.schema())
        self.assertTrue(has_class)
        self.assertEqual(same, train)

    def test_schema_mismatch(self):
        schema = ingest_csv(WEATHER, 'play').schema()
        with self.assertRaises(AnbSAKSchemaError):
            CsvIO().to_dataset_with_schema(WEATHER_UNKNOWN, schema)
        with self.assertRaises(AnbSAKSchemaError):
            CsvIO().to_dataset_with_schema(WEATHER_MISSING, schema)


class FoldTestCase(unittest.TestCase):
    @parameterized.expand([(2,), (3,), (10,)])
    def test_fold_sizes(self, folds):
        classes = np.array([0] * 37 + [1] * 23 + [2] * 11)
        labels, stratified = fold_assignment(classes, folds, seed=4)
        self.assertTrue(stratified)
        sizes = np.bincount(labels, minlength=folds)
        self.assertLessEqual(sizes.max() - sizes.min(), 1)
        for c in range(3):
            per_fold = np.bincount(labels[classes == c], minlength=folds)
            self.assertLessEqual(per_fold.max() - per_fold.min(), 1)

    def test_deterministic(self):
        classes = np.arange(40) % 2
        a, _ = fold_assignment(classes, 5, seed=11)
        b, _ = fold_assignment(classes, 5, seed=11)
        self.assertTrue(np.array_equal(a, b))

    def test_unstratified_fallback(self):
        classes = np.array([0] * 9 + [1])
        with self.assertLogs('anbsak.data', level='WARNING'):
            labels, stratified = fold_assignment(classes, 3, seed=0)
        self.assertFalse(stratified)
        sizes = np.bincount(labels)
        self.assertLessEqual(sizes.max() - sizes.min(), 1)

    def test_errors(self):
        with self.assertRaises(AnbSAKValueError):
            fold_assignment(np.array([0, 1]), 1, 0)
        with self.assertRaises(AnbSAKValueError):
            fold_assignment(np.array([0, 1]), 3, 0)


if __name__ == '__main__':
    unittest.main()
