import contextlib
import csv
import io
import json
import os
import tempfile
import unittest

import numpy as np

from anbsak import constants
from anbsak.cli import main, build_parser, RunConfig
from anbsak.errors import *
from anbsak.model import BayesNet

WEATHER = constants.project_to_absolute_path('tests/data/weather.csv')
WEATHER_TEST = constants.project_to_absolute_path('tests/data/weather_test.csv')
WEATHER_UNKNOWN = constants.project_to_absolute_path('tests/data/weather_unknown.csv')
WEATHER_MISSING_FEATURE = constants.project_to_absolute_path('tests/data/weather_missing_feature.csv')
SEPARABLE = constants.project_to_absolute_path('tests/data/separable.csv')


def run(argv):
    """Runs the command line, returning the exit status, stdout and stderr"""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        status = main(argv)
    return status, out.getvalue(), err.getvalue()


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.model = os.path.join(self.tmp.name, 'model.json')

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_learn_and_predict(self):
        status, out, _ = run(['-q', 'learn', WEATHER, '--class-column', 'play', '-o', self.model,
                              '--dot', self.path('model.dot')])
        self.assertEqual(status, 0)
        self.assertIn('anb', out)
        net = BayesNet.load(self.model)
        self.assertEqual(net.names[0], 'play')
        self.assertTrue(net.dag.is_anb())
        self.assertEqual(net.metadata['seed'], 0)
        self.assertEqual(net.metadata['removed'], [])
        self.assertEqual(net.metadata['training_rows'], 14)
        with open(self.path('model.dot')) as f:
            self.assertIn('digraph', f.read())

        status, out, _ = run(['-q', 'predict', self.model, WEATHER_TEST, '--posteriors'])
        self.assertEqual(status, 0)
        rows = list(csv.reader(io.StringIO(out)))
        self.assertEqual(rows[0], ['row', 'predicted', 'P(no)', 'P(yes)'])
        self.assertEqual(len(rows), 4)
        for row in rows[1:]:
            self.assertIn(row[1], ('no', 'yes'))
            self.assertAlmostEqual(float(row[2]) + float(row[3]), 1.0)

        status, out, _ = run(['-q', 'predict', self.model, WEATHER, '-o', self.path('pred.csv')])
        self.assertEqual(status, 0)
        self.assertIn('accuracy', out)
        with open(self.path('pred.csv')) as f:
            self.assertEqual(len(list(csv.reader(f))), 15)

    def test_predict_schema_mismatch(self):
        self.assertEqual(run(['-q', 'learn', WEATHER, '--class-column', 'play', '-m', 'nb', '-o', self.model])[0], 0)
        for data in (WEATHER_UNKNOWN, WEATHER_MISSING_FEATURE):
            status, _, err = run(['-q', 'predict', self.model, data])
            self.assertEqual(status, 2)
            self.assertIn('error', err)

    def test_gbn_stats(self):
        self.assertEqual(run(['-q', 'learn', WEATHER, '--class-column', 'play', '-m', 'gbn', '-o', self.model])[0], 0)
        stats = BayesNet.load(self.model).metadata['structure_stats']
        self.assertIn('empty_class_parent_configurations', stats)
        self.assertGreaterEqual(stats['class_parent_configurations'], 1)

    def test_fsanb_reproducible(self):
        contents = []
        for k in range(2):
            path = self.path('fs%d.json' % k)
            self.assertEqual(run(['-q', 'learn', SEPARABLE, '--class-column', 'label', '-m', 'fsanb',
                                  '--seed', '5', '-o', path])[0], 0)
            with open(path, 'rb') as f:
                contents.append(f.read())
        self.assertEqual(contents[0], contents[1])
        model = json.loads(contents[0])
        meta = model['metadata']
        self.assertNotIn('timing', meta)
        self.assertEqual(meta['method'], 'fsanb')
        self.assertEqual(meta['seed'], 5)
        self.assertEqual(meta['selection']['seed'], 5)
        self.assertIn('key', [v['name'] for v in model['variables']])

    def test_timing_opt_in(self):
        self.assertEqual(run(['-q', 'learn', WEATHER, '--class-column', 'play', '--timing', '-o', self.model])[0], 0)
        with open(self.model) as f:
            meta = json.load(f)['metadata']
        self.assertGreaterEqual(meta['timing']['seconds'], 0.0)
        self.assertNotIn('seconds', meta)

    def test_exit_codes(self):
        status, _, err = run(['learn', self.path('nonexistent.csv'), '--class-column', 'play', '-o', self.model])
        self.assertEqual(status, 1)
        self.assertIn('error', err)
        status, _, _ = run(['-q', 'learn', WEATHER, '--class-column', 'nonexistent', '-o', self.model])
        self.assertEqual(status, 2)
        status, _, _ = run(['-q', 'learn', WEATHER, '--class-column', 'play', '--ess', '0', '-o', self.model])
        self.assertEqual(status, 2)
        status, _, _ = run(['-q', 'learn', WEATHER, '--class-column', 'play', '-m', 'fsanb',
                            '--delta-grid', '3,x', '-o', self.model])
        self.assertEqual(status, 2)
        status, _, _ = run(['-q', 'learn', WEATHER, '--class-column', 'play',
                            '-o', self.path('missing_dir/model.json')])
        self.assertEqual(status, 1)
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as cm:
                main(['learn', WEATHER, '--method', 'tan', '-o', self.model, '--class-column', 'play'])
        self.assertEqual(cm.exception.code, 2)

    def test_variable_cap(self):
        rng = np.random.default_rng(0)
        wide = self.path('wide.csv')
        with open(wide, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['c%d' % i for i in range(30)])
            writer.writerows(rng.integers(0, 2, size=(20, 30)).tolist())
        status, _, err = run(['-q', 'learn', wide, '--class-column', 'c0', '-o', self.model])
        self.assertEqual(status, 2)
        self.assertIn('30', err)
        self.assertFalse(os.path.exists(self.model))

    def test_pcsearch(self):
        status, out, _ = run(['-q', 'pcsearch', SEPARABLE, '--class-column', 'label', '--delta', '3',
                              '--json', self.path('pc.json')])
        self.assertEqual(status, 0)
        self.assertIn('kept 1 of 2', out)
        with open(self.path('pc.json')) as f:
            obj = json.load(f)
        kept = {r['name']: r['retained'] for r in obj['features']}
        self.assertEqual(kept, {'key': True, 'noise': False})
        self.assertEqual(obj['config']['seed'], 0)

    def test_bench_cv(self):
        status, out, _ = run(['-q', 'bench', '--data', SEPARABLE, '--class-column', 'label', '-m', 'nb',
                              '--folds', '2', '--json', self.path('cv.json'), '--text', self.path('cv.txt')])
        self.assertEqual(status, 0)
        self.assertIn('mean', out)
        with open(self.path('cv.json')) as f:
            obj = json.load(f)
        self.assertEqual(obj['mean_accuracy'], 1.0)
        self.assertEqual(obj['config']['method'], 'nb')
        self.assertTrue(os.path.isfile(self.path('cv.txt')))
        self.assertEqual(run(['-q', 'bench', '--suite', 'cv'])[0], 2)

    def test_bench_table3(self):
        status, out, _ = run(['-q', 'bench', '--suite', 'table3', '--network', 'cancer', '--sizes', '100,200',
                              '--seeds', '2', '--csv', self.path('t3.csv')])
        self.assertEqual(status, 0)
        self.assertIn('cancer', out)
        with open(self.path('t3.csv')) as f:
            self.assertEqual(len(list(csv.reader(f))), 5)

    def test_sample(self):
        out_csv = self.path('cancer.csv')
        status, _, _ = run(['-q', 'sample', 'cancer', '-n', '50', '--seed', '3', '-o', out_csv])
        self.assertEqual(status, 0)
        with open(out_csv) as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], ['Cancer', 'Pollution', 'Smoker', 'Xray', 'Dyspnoea'])
        self.assertEqual(len(rows), 51)
        self.assertEqual(run(['-q', 'sample', self.path('nonexistent.json'), '-o', out_csv])[0], 1)

    def test_run_config(self):
        args = build_parser().parse_args(['-v', 'learn', WEATHER, '--class-column', 'play', '-o', 'x.json'])
        config = RunConfig.from_args(args)
        self.assertEqual(config.method, 'anb')
        self.assertEqual(config.verbosity, 1)
        self.assertEqual(config.delta_grid, (3.0, 20.0, 150.0))
        self.assertIsInstance(config.learner().get_option('ess'), float)
        with self.assertRaises(AnbSAKValueError):
            RunConfig('learn', method='tan')


if __name__ == '__main__':
    unittest.main()
