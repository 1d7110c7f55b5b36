import unittest

import numpy as np
from parameterized import parameterized

from anbsak.data import Dataset
from anbsak.errors import *
from anbsak.evaluate import load_fixture, sample
from anbsak.fsel import (FselConfig, Hyperparams, pc_search, select_hyperparams, run_selection, fs_anb_learn,
                         FsAnbLearner)
from anbsak.search import ExactLearner
from anbsak.varset import VarSet

# X1 copies the class, X2 is balanced against it
COPY_AND_BALANCED = Dataset([[0, 0, 0], [0, 0, 0], [0, 0, 1], [0, 0, 1],
                             [1, 1, 0], [1, 1, 0], [1, 1, 1], [1, 1, 1]], [2, 2, 2])


def noisy_copies(seed, n_rows=200, n_features=3, fidelity=0.95):
    """Every feature copies the class with the given fidelity"""
    rng = np.random.default_rng(seed)
    c = rng.integers(0, 2, n_rows)
    cols = [c] + [np.where(rng.random(n_rows) < fidelity, c, 1 - c) for _ in range(n_features)]
    return Dataset(np.column_stack(cols), [2] * (n_features + 1))


class PcSearchTestCase(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(pc_search(COPY_AND_BALANCED, 1.0, 3.0), VarSet.of(1))
        self.assertEqual(pc_search(COPY_AND_BALANCED, 1.0, 1e9), VarSet.of(1, 2))
        self.assertEqual(pc_search(COPY_AND_BALANCED, 1.0, 1e-9), VarSet())
        with self.assertRaises(AnbSAKValueError):
            pc_search(COPY_AND_BALANCED, 1.0, 0.0)

    @parameterized.expand([(s,) for s in range(5)])
    def test_monotone_in_delta(self, seed):
        rng = np.random.default_rng(seed)
        ds = Dataset(rng.integers(0, 2, size=(60, 6)), [2] * 6)
        previous = VarSet()
        for delta in (0.01, 0.5, 1.0, 3.0, 20.0, 150.0, 1e6):
            kept = pc_search(ds, 1.0, delta)
            self.assertTrue(previous.issubset(kept))
            self.assertNotIn(0, kept)
            previous = kept

    def test_noise_features_removed(self):
        truth = load_fixture('cancer')
        removed = [0, 0]
        for seed in range(5):
            ds = sample(truth, 10000, seed)
            rng = np.random.default_rng(100 + seed)
            noise = rng.integers(0, 2, size=(10000, 2))
            ds = Dataset(np.column_stack((ds.data, noise)), ds.arities + (2, 2))
            kept = pc_search(ds, 1.0, 3.0)
            self.assertIn(3, kept)
            for k, v in enumerate((5, 6)):
                removed[k] += v not in kept
        self.assertGreaterEqual(min(removed), 3)


class SelectionTestCase(unittest.TestCase):
    def test_config(self):
        config = FselConfig()
        grid = config.grid()
        self.assertEqual(len(grid), 9)
        self.assertEqual(grid[0], Hyperparams(1.0, 3.0))
        self.assertEqual(grid[1], Hyperparams(2.0, 3.0))
        self.assertEqual(grid[-1], Hyperparams(5.0, 150.0))
        with self.assertRaises(AnbSAKValueError):
            FselConfig(delta_grid=(3.0, -1.0))
        with self.assertRaises(AnbSAKValueError):
            FselConfig(ess_grid=())
        with self.assertRaises(AnbSAKValueError):
            FselConfig(folds=1)

    def test_degenerate_grid(self):
        ds = noisy_copies(0)
        selection = run_selection(ds)
        self.assertEqual(selection.hyperparams, Hyperparams(1.0, 3.0))
        self.assertEqual(selection.pipeline_runs, 9)
        self.assertEqual(len(selection.trace), 9)
        self.assertTrue(selection.stratified)
        for point in selection.trace:
            self.assertEqual(point['retained'], [['X1', 'X2', 'X3']] * 2)
            self.assertEqual(point['mean_accuracy'], selection.trace[0]['mean_accuracy'])
        obj = selection.to_json()
        self.assertEqual(obj['selected'], {'ess': 1.0, 'delta': 3.0})
        self.assertEqual(obj['seed'], 0)

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        ds = Dataset(rng.integers(0, 2, size=(80, 5)), [2] * 5)
        config = FselConfig(cv_seed=7)
        a, b = run_selection(ds, config), run_selection(ds, config)
        self.assertEqual(a.hyperparams, b.hyperparams)
        self.assertEqual(a.dumps(), b.dumps())
        self.assertEqual(select_hyperparams(ds, config), a.hyperparams)


class FsAnbTestCase(unittest.TestCase):
    def test_no_feature_removed(self):
        ds = noisy_copies(1)
        net, removed = fs_anb_learn(ds)
        self.assertEqual(removed, VarSet())
        self.assertTrue(net.dag.is_anb())
        plain = ExactLearner(mode='anb').fit(ds)
        self.assertEqual(net.dag, plain.dag)
        for a, b in zip(net.cpts, plain.cpts):
            np.testing.assert_allclose(a.theta, b.theta)
        self.assertEqual(net.metadata['method'], 'fsanb')
        self.assertEqual(net.metadata['removed'], [])

    def test_everything_removed(self):
        config = FselConfig(ess_grid=(1.0,), delta_grid=(1.0,))
        with self.assertLogs('anbsak.fsel', level='WARNING'):
            net, removed = fs_anb_learn(COPY_AND_BALANCED.select([0, 2]), config)
        self.assertEqual(removed, VarSet.of(1))
        self.assertEqual(net.n_vars, 1)
        self.assertEqual(net.names, ['X0'])
        self.assertEqual(net.metadata['removed'], ['X2'])
        # balanced classes: ties go to class 0
        self.assertEqual(list(net.predict_batch(np.array([[0], [1]]))), [0, 0])

    def test_learner(self):
        ds = noisy_copies(2, n_features=2)
        learner = FsAnbLearner(cv_seed=3, DELTA_GRID=(3.0,))
        net = learner.fit(ds)
        self.assertEqual(learner.config().delta_grid, (3.0,))
        self.assertEqual(learner.config().cv_seed, 3)
        self.assertEqual(learner.removed, VarSet())
        self.assertIs(learner.last_metadata, net.metadata)
        self.assertEqual(net.metadata['selection']['pipeline_runs'], 3)


if __name__ == '__main__':
    unittest.main()
