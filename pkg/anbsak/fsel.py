"""
Feature selection for ANB classifiers: a zero-order Bayes-factor search for the class
variable's parents and children, with its hyperparameters chosen by a seeded cross-validation
over a grid of (N', delta) pairs.
"""

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from anbsak.base import AnbSAKLearner, is_better
from anbsak.data import fold_assignment
from anbsak.errors import *
from anbsak.graph import Dag
from anbsak.model import fit_eap
from anbsak.scoring import BdeuConfig, log_bayes_factor
from anbsak.search import search_exact
from anbsak.varset import VarSet
from anbsak import constants

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FselConfig:
    ess_grid: tuple = constants.DEFAULT_ESS_GRID  #: N' values tried for the Bayes-factor tests
    delta_grid: tuple = constants.DEFAULT_DELTA_GRID  #: independence thresholds tried
    cv_seed: int = constants.DEFAULT_SEED
    folds: int = constants.DEFAULT_SELECTION_FOLDS
    structure_ess: float = constants.DEFAULT_ESS  #: N' for structure learning and EAP
    reuse_grid_ess: bool = False  #: learn structures with the grid's N' instead of structure_ess
    max_vars: int = constants.MAX_VARS

    def __post_init__(self):
        object.__setattr__(self, 'ess_grid', tuple(float(e) for e in self.ess_grid))
        object.__setattr__(self, 'delta_grid', tuple(float(d) for d in self.delta_grid))
        if not self.ess_grid or not self.delta_grid:
            raise AnbSAKValueError("Hyperparameter grids must not be empty")
        if any(not e > 0 for e in self.ess_grid):
            raise AnbSAKValueError("Every N' in the grid must be positive: %s" % (self.ess_grid,))
        if any(not d > 0 for d in self.delta_grid):
            raise AnbSAKValueError("Every delta in the grid must be positive: %s" % (self.delta_grid,))
        if not self.structure_ess > 0:
            raise AnbSAKValueError("Structure N' must be positive, got %r" % self.structure_ess)
        if self.folds < 2:
            raise AnbSAKValueError("Selection needs at least 2 folds")

    def grid(self):
        """Grid points in tie-break order: smaller delta first, then smaller N'"""
        return [Hyperparams(e, d) for d in sorted(set(self.delta_grid)) for e in sorted(set(self.ess_grid))]


@dataclass(frozen=True, order=True)
class Hyperparams:
    ess: float  #: N' of the Bayes-factor tests
    delta: float  #: threshold above which independence is accepted


def pc_search(dataset, ess=constants.DEFAULT_ESS, delta=constants.DEFAULT_DELTA_GRID[0]):
    """
    Zero-order parent/child search for the class: keeps every feature whose independence from
    the class is not accepted, i.e. BF(X0, X_i | {}) <= delta

    :param dataset: data, class first
    :type dataset: data.Dataset
    :param ess: N' of the tests
    :type ess: float
    :param delta: independence threshold
    :type delta: float
    :return: retained features
    :rtype: VarSet
    """
    if not delta > 0:
        raise AnbSAKValueError("delta must be positive, got %r" % delta)
    config = BdeuConfig(ess)
    c = constants.CLASS_INDEX
    log_delta = math.log(delta)
    retained = VarSet()
    for i in range(dataset.n_vars):
        if i != c and log_bayes_factor(dataset, c, i, VarSet(), config) <= log_delta:
            retained = retained.add(i)
    logger.debug('PC search (N\'=%g, delta=%g): kept %d of %d features', ess, delta, len(retained),
                 dataset.n_vars - 1)
    return retained


def class_prior_net(dataset, ess=constants.DEFAULT_ESS, metadata=None):
    """A network over the class alone: predicts the most probable class under EAP"""
    return fit_eap(Dag.empty(1), dataset.select([constants.CLASS_INDEX]), ess, metadata)


def learn_reduced(dataset, retained, config, structure_ess):
    """
    Exact ANB over the class and the retained features, with EAP parameters

    :return: network over the reduced variables and the search metadata
    """
    variables = [constants.CLASS_INDEX] + VarSet(retained).to_list()
    if len(variables) == 1:
        return class_prior_net(dataset, structure_ess), {}
    reduced = dataset.select(variables)
    result = search_exact(reduced, 'anb', BdeuConfig(structure_ess), config.max_vars)
    return fit_eap(result.dag, reduced, structure_ess), result.metadata()


@dataclass
class Selection:
    """
    Outcome of the hyperparameter search with one trace entry per grid point
    """
    hyperparams: Hyperparams
    trace: list = field(default_factory=list)
    pipeline_runs: int = 0
    stratified: bool = True
    seed: int = constants.DEFAULT_SEED

    def to_json(self):
        return {
            'schema': constants.SELECTION_SCHEMA,
            'seed': self.seed,
            'stratified': self.stratified,
            'selected': {'ess': self.hyperparams.ess, 'delta': self.hyperparams.delta},
            'pipeline_runs': self.pipeline_runs,
            'trace': self.trace,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)


def run_selection(dataset, config=FselConfig()):
    """
    Evaluates every grid point with the full pipeline (PC search, exact ANB, EAP, accuracy) on a
    seeded stratified split and keeps the point with the best mean accuracy.  Networks are
    cached per (fold, retained features), so grid points that keep the same features share a
    fit.

    :param dataset: data, class first
    :type dataset: data.Dataset
    :param config: grids and seed
    :type config: FselConfig
    :rtype: Selection
    """
    labels, stratified = fold_assignment(dataset.class_column, config.folds, config.cv_seed)
    splits = [(dataset.take(np.flatnonzero(labels != f)), dataset.take(np.flatnonzero(labels == f)))
              for f in range(config.folds)]
    cache = {}
    selection = Selection(None, stratified=stratified, seed=config.cv_seed)
    best_acc = -1.0
    for hp in config.grid():
        structure_ess = hp.ess if config.reuse_grid_ess else config.structure_ess
        accuracies, kept = [], []
        for f, (train, test) in enumerate(splits):
            retained = pc_search(train, hp.ess, hp.delta)
            key = (f, int(retained), structure_ess)
            if key not in cache:
                cache[key], _ = learn_reduced(train, retained, config, structure_ess)
            net = cache[key]
            accuracies.append(net.accuracy(test.select_names(net.names)))
            kept.append([dataset.names[v] for v in retained])
        mean = float(np.mean(accuracies))
        selection.pipeline_runs += 1
        selection.trace.append({'ess': hp.ess, 'delta': hp.delta, 'fold_accuracies': accuracies,
                                'mean_accuracy': mean, 'retained': kept})
        logger.info('Grid point N\'=%g delta=%g: mean accuracy %.4f', hp.ess, hp.delta, mean)
        if is_better(mean, best_acc):
            best_acc = mean
            selection.hyperparams = hp
    return selection


def select_hyperparams(dataset, config=FselConfig()):
    """
    The (N', delta) pair with the best cross-validated accuracy; ties go to the smaller delta,
    then the smaller N'

    :rtype: Hyperparams
    """
    return run_selection(dataset, config).hyperparams


def fs_anb_learn(dataset, config=FselConfig()):
    """
    Feature-selected ANB: select hyperparameters, run the PC search on all the data, learn the
    exact ANB over the class and the retained features and fit EAP parameters.  When no feature
    survives the result predicts from the class prior alone.

    :param dataset: data, class first
    :type dataset: data.Dataset
    :param config: selection configuration
    :type config: FselConfig
    :return: network over the retained variables and the removed features
    :rtype: (model.BayesNet, VarSet)
    """
    selection = run_selection(dataset, config)
    hp = selection.hyperparams
    retained = pc_search(dataset, hp.ess, hp.delta)
    removed = dataset.all_vars().remove(constants.CLASS_INDEX) - retained
    structure_ess = hp.ess if config.reuse_grid_ess else config.structure_ess
    if not retained:
        logger.warning('PC search removed every feature; predicting from the class prior')
    net, search_meta = learn_reduced(dataset, retained, config, structure_ess)
    net.metadata.update(search_meta)
    net.metadata.update({
        'method': 'fsanb',
        'hyperparams': {'ess': hp.ess, 'delta': hp.delta},
        'removed': [dataset.names[v] for v in removed],
        'selection': selection.to_json(),
    })
    return net, removed


class FsAnbLearner(AnbSAKLearner):
    """
    Feature-selected exact ANB

    Options:

    * ess_grid, delta_grid: hyperparameter grids
    * cv_seed: seed of the selection split
    * reuse_grid_ess: learn structures with the selected N'
    * max_vars: variable cap after selection
    """
    @classmethod
    def cts_type(cls):
        return 'fsanb'

    def __init__(self, **kwargs):
        AnbSAKLearner.__init__(self)
        self.set_options(ess_grid=constants.DEFAULT_ESS_GRID, delta_grid=constants.DEFAULT_DELTA_GRID,
                         cv_seed=constants.DEFAULT_SEED, reuse_grid_ess=False, max_vars=constants.MAX_VARS)
        self.set_options(**kwargs)
        self.removed = VarSet()  #: features removed by the last fit

    def config(self):
        return FselConfig(ess_grid=self.get_option('ess_grid'), delta_grid=self.get_option('delta_grid'),
                          cv_seed=self.get_option('cv_seed'), reuse_grid_ess=self.get_option('reuse_grid_ess'),
                          max_vars=self.get_option('max_vars'))

    def fit(self, dataset, **kwargs):
        self.set_options(**kwargs)
        net, self.removed = fs_anb_learn(dataset, self.config())
        self.last_metadata = net.metadata
        return net
