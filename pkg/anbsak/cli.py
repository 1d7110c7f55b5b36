"""
Command-line front end.

    anbsak learn data.csv --class-column Class --method fsanb -o model.json
    anbsak predict model.json test.csv -o predictions.csv --posteriors
    anbsak bench --suite cv --data monks.csv --class-column class --method fsanb --folds 10
    anbsak bench --suite table3 --network cancer --sizes 100,1000,10000 --seeds 5
    anbsak pcsearch data.csv --class-column Class --ess 1 --delta 3
    anbsak sample cancer -n 1000 --seed 3 -o cancer.csv

Exit status: 0 on success, 1 on I/O errors, 2 on invalid input or flags.
"""

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field

from anbsak.base import parse_number_list
from anbsak.data import CsvIO
from anbsak.errors import *
from anbsak.evaluate import crossval, dump_report, load_fixture, sample, table3_experiment
from anbsak.fsel import FsAnbLearner, FselConfig, pc_search
from anbsak.model import BayesNet
from anbsak.scoring import BdeuConfig, log_bayes_factor
from anbsak.search import ExactLearner, NaiveBayesLearner
from anbsak.varset import VarSet
from anbsak import constants

logger = logging.getLogger(__name__)

METHODS = ('nb', 'anb', 'gbn', 'fsanb')


@dataclass(frozen=True)
class RunConfig:
    """
    Validated settings of one invocation
    """
    command: str
    method: str = 'anb'
    ess: float = constants.DEFAULT_ESS
    ess_grid: tuple = constants.DEFAULT_ESS_GRID
    delta_grid: tuple = constants.DEFAULT_DELTA_GRID
    folds: int = constants.DEFAULT_FOLDS
    seed: int = constants.DEFAULT_SEED
    max_vars: int = constants.MAX_VARS
    verbosity: int = 0
    echo: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise AnbSAKValueError("Unknown method %r (expected one of %s)" % (self.method, ', '.join(METHODS)))
        if not self.ess > 0:
            raise AnbSAKValueError("--ess must be positive")
        if self.folds < 2:
            raise AnbSAKValueError("--folds must be at least 2")
        if self.max_vars < 1:
            raise AnbSAKValueError("--max-vars must be positive")
        FselConfig(self.ess_grid, self.delta_grid, self.seed)

    @classmethod
    def from_args(cls, args):
        echo = {k: v for k, v in vars(args).items() if k != 'func'}
        return cls(command=args.command,
                   method=getattr(args, 'method', 'anb'),
                   ess=getattr(args, 'ess', constants.DEFAULT_ESS),
                   ess_grid=tuple(parse_number_list(args.ess_grid)) if hasattr(args, 'ess_grid')
                   else constants.DEFAULT_ESS_GRID,
                   delta_grid=tuple(parse_number_list(args.delta_grid)) if hasattr(args, 'delta_grid')
                   else constants.DEFAULT_DELTA_GRID,
                   folds=getattr(args, 'folds', constants.DEFAULT_FOLDS),
                   seed=getattr(args, 'seed', constants.DEFAULT_SEED),
                   max_vars=getattr(args, 'max_vars', constants.MAX_VARS),
                   verbosity=args.verbose - args.quiet,
                   echo=echo)

    def learner(self):
        if self.method == 'nb':
            return NaiveBayesLearner(ess=self.ess)
        if self.method == 'fsanb':
            return FsAnbLearner(ess_grid=self.ess_grid, delta_grid=self.delta_grid, cv_seed=self.seed,
                                max_vars=self.max_vars)
        return ExactLearner(mode=self.method, ess=self.ess, max_vars=self.max_vars)


def read_dataset(args):
    io = CsvIO()
    discretize = args.discretize
    if discretize not in ('auto', 'none'):
        discretize = [c.strip() for c in discretize.split(',') if c.strip()]
    return io.to_dataset(args.data, class_column=args.class_column, missing_marker=args.missing,
                         discretize=discretize, max_states=args.max_states)


def write_json(obj, path):
    try:
        with open(path, 'w') as f:
            json.dump(obj, f, indent=2)
    except OSError as e:
        raise AnbSAKIOError('Unable to write "%s": %s' % (path, e))


def cmd_learn(args, config):
    dataset = read_dataset(args)
    learner = config.learner()
    start = time.perf_counter()
    net = learner.fit(dataset)
    net.metadata.update({'method': config.method, 'seed': config.seed, 'ess': config.ess,
                         'training_rows': dataset.n_rows})
    if args.timing:
        net.metadata['timing'] = {'seconds': time.perf_counter() - start}
    if config.method != 'fsanb':
        net.metadata['removed'] = []
    net.save(args.output)
    if args.dot:
        try:
            with open(args.dot, 'w') as f:
                f.write(net.dag.to_dot(net.names))
        except OSError as e:
            raise AnbSAKIOError('Unable to write "%s": %s' % (args.dot, e))
    print('Learned %s model over %d variables (%d removed), written to %s'
          % (config.method, net.n_vars, len(net.metadata['removed']), args.output))
    return 0


def cmd_predict(args, config):
    net = BayesNet.load(args.model)
    dataset, has_class = CsvIO().to_dataset_with_schema(args.data, net.schema(), missing_marker=args.missing)
    posteriors = net.posterior_batch(dataset)
    predicted = posteriors.argmax(axis=1)
    class_states = net.states[constants.CLASS_INDEX]
    header = ['row', 'predicted']
    if args.posteriors:
        header += ['P(%s)' % s for s in class_states]
    try:
        out = open(args.output, 'w', newline='') if args.output else sys.stdout
        try:
            writer = csv.writer(out)
            writer.writerow(header)
            for k, (label, post) in enumerate(zip(predicted, posteriors)):
                row = [k, class_states[label]]
                if args.posteriors:
                    row += [repr(float(p)) for p in post]
                writer.writerow(row)
        finally:
            if out is not sys.stdout:
                out.close()
    except OSError as e:
        raise AnbSAKIOError('Unable to write "%s": %s' % (args.output, e))
    if has_class:
        print('accuracy %.4f over %d rows' % (float((predicted == dataset.class_column).mean()), dataset.n_rows))
    return 0


def cmd_bench(args, config):
    if args.suite == 'table3':
        report = table3_experiment(args.network, parse_number_list(args.sizes, int),
                                   range(config.seed, config.seed + args.seeds), config.ess, args.reference)
    else:
        if not args.data or not args.class_column:
            raise AnbSAKValueError("--suite cv needs --data and --class-column")
        dataset = read_dataset(args)
        report = crossval(dataset, config.learner(), config.folds, config.seed)
    if args.json:
        obj = report.to_json()
        obj['config'] = config.echo
        write_json(obj, args.json)
    dump_report(report, text_path=args.text, csv_path=args.csv if args.suite == 'table3' else None)
    sys.stdout.write(report.to_text())
    return 0


def cmd_pcsearch(args, config):
    dataset = read_dataset(args)
    retained = pc_search(dataset, config.ess, args.delta)
    bdeu = BdeuConfig(config.ess)
    rows = []
    for i in range(1, dataset.n_vars):
        lbf = log_bayes_factor(dataset, constants.CLASS_INDEX, i, VarSet(), bdeu)
        rows.append({'name': dataset.names[i], 'log_bayes_factor': lbf, 'retained': i in retained})
    result = {'schema': constants.SELECTION_SCHEMA, 'class': dataset.names[constants.CLASS_INDEX],
              'ess': config.ess, 'delta': args.delta, 'features': rows, 'config': config.echo}
    if args.json:
        write_json(result, args.json)
    print('%-24s  %12s  %s' % ('feature', 'ln BF', 'kept'))
    for r in rows:
        print('%-24s  %12.4f  %s' % (r['name'], r['log_bayes_factor'], 'yes' if r['retained'] else 'no'))
    print('ln(delta) = %.4f; kept %d of %d' % (math.log(args.delta), len(retained), dataset.n_vars - 1))
    return 0


def cmd_sample(args, config):
    net = load_fixture(args.network)
    dataset = sample(net, args.rows, config.seed)
    CsvIO().to_file(dataset, args.output)
    print('Sampled %d rows from %s (seed %d) to %s' % (args.rows, args.network, config.seed, args.output))
    return 0


def add_seed_argument(parser):
    parser.add_argument('--seed', type=int, default=constants.DEFAULT_SEED,
                        help='random seed, echoed in every output (default 0)')


def add_data_arguments(parser, required=True):
    parser.add_argument('--class-column', required=required, help='name of the class column')
    parser.add_argument('--missing', default=constants.DEFAULT_MISSING_MARKER,
                        help='missing-value marker; rows containing it are dropped (default ?)')
    parser.add_argument('--discretize', default='auto',
                        help="'auto', 'none' or a comma-separated list of columns to median-discretize")
    parser.add_argument('--max-states', type=int, default=constants.DEFAULT_MAX_STATES,
                        help='numeric columns with more distinct values are discretized in auto mode')


def add_learning_arguments(parser):
    parser.add_argument('-m', '--method', choices=METHODS, default='anb', help='learner (default anb)')
    parser.add_argument('--ess', type=float, default=constants.DEFAULT_ESS,
                        help="equivalent sample size N' for BDeu and EAP (default 1.0)")
    parser.add_argument('--ess-grid', default=','.join('%g' % e for e in constants.DEFAULT_ESS_GRID),
                        help="N' grid of the feature-selection tests")
    parser.add_argument('--delta-grid', default=','.join('%g' % d for d in constants.DEFAULT_DELTA_GRID),
                        help='delta grid of the feature-selection tests')
    parser.add_argument('--max-vars', type=int, default=constants.MAX_VARS, help='variable cap of exact search')


def build_parser():
    parser = argparse.ArgumentParser(prog='anbsak', description="Exact BDeu learning of ANB and BN classifiers.")
    parser.add_argument('-v', '--verbose', action='count', default=0, help='more logging (repeatable)')
    parser.add_argument('-q', '--quiet', action='count', default=0, help='less logging')
    parser.add_argument('--version', action='version', version=constants.ANBSAK_VERSION)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('learn', help='learn a classifier from a CSV file')
    p.add_argument('data', help='training CSV file with a header row')
    add_data_arguments(p)
    add_learning_arguments(p)
    p.add_argument('-o', '--output', required=True, help='model JSON file to write')
    p.add_argument('--dot', help='also write the structure as GraphViz dot')
    p.add_argument('--timing', action='store_true', help='record the learning time under metadata.timing')
    add_seed_argument(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser('predict', help='classify the rows of a CSV file')
    p.add_argument('model', help='model JSON file')
    p.add_argument('data', help='CSV file with the model variables')
    p.add_argument('--missing', default=constants.DEFAULT_MISSING_MARKER, help='missing-value marker')
    p.add_argument('-o', '--output', help='predictions CSV (default stdout)')
    p.add_argument('--posteriors', action='store_true', help='add one posterior column per class')
    add_seed_argument(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser('bench', help='cross-validation or the sample-size experiment')
    p.add_argument('--suite', choices=('cv', 'table3'), default='cv')
    p.add_argument('--data', help='CSV file for --suite cv')
    add_data_arguments(p, required=False)
    add_learning_arguments(p)
    p.add_argument('--folds', type=int, default=constants.DEFAULT_FOLDS, help='cross-validation folds')
    p.add_argument('--network', default='cancer', help="fixture network for --suite table3 (cancer, asia or a file)")
    p.add_argument('--sizes', default=','.join(str(n) for n in constants.TABLE3_SIZES), help='sample sizes')
    p.add_argument('--seeds', type=int, default=5, help='number of seeds, counted up from --seed')
    p.add_argument('--reference', choices=('dp', 'enumerate'), default='dp', help='reference ANB method')
    p.add_argument('--json', help='JSON report file')
    p.add_argument('--text', help='text report file')
    p.add_argument('--csv', help='per-seed CSV file (table3 only)')
    add_seed_argument(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser('pcsearch', help='Bayes-factor parent/child search for the class')
    p.add_argument('data', help='CSV file')
    add_data_arguments(p)
    p.add_argument('--ess', type=float, default=constants.DEFAULT_ESS, help="N' of the tests")
    p.add_argument('--delta', type=float, default=constants.DEFAULT_DELTA_GRID[0], help='independence threshold')
    p.add_argument('--json', help='JSON result file')
    add_seed_argument(p)
    p.set_defaults(func=cmd_pcsearch)

    p = sub.add_parser('sample', help='sample a fixture network to CSV')
    p.add_argument('network', help='cancer, asia or a model file')
    p.add_argument('-n', '--rows', type=int, default=1000, help='number of rows')
    p.add_argument('-o', '--output', required=True, help='CSV file to write')
    add_seed_argument(p)
    p.set_defaults(func=cmd_sample)
    return parser


def configure_logging(verbosity):
    level = {-1: logging.ERROR, 0: logging.WARNING, 1: logging.INFO}.get(verbosity)
    if level is None:
        level = logging.DEBUG if verbosity > 1 else logging.CRITICAL
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', force=True)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig.from_args(args)
        configure_logging(config.verbosity)
        return args.func(args, config)
    except (AnbSAKIOError, OSError) as e:
        print('error: %s' % e, file=sys.stderr)
        return 1
    except (AnbSAKException, ValueError) as e:
        print('error: %s' % e, file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
