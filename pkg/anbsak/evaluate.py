"""
Experiments: fixture networks, ancestral sampling, class-posterior KL divergence,
cross-validated accuracy, reference optimal ANBs and the sample-size experiment that compares
learned ANBs with the truth.
"""

import csv
import io
import itertools
import json
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np
from more_itertools import bucket

from anbsak.data import Dataset, fold_assignment
from anbsak.errors import *
from anbsak.graph import Dag, d_separated, shd, num_parameters
from anbsak.model import BayesNet, fit_eap, fit_exact
from anbsak.scoring import BdeuConfig, large_sample_score_table
from anbsak.search import iter_dags, optimize, search_exact
from anbsak.varset import VarSet
from anbsak import constants

logger = logging.getLogger(__name__)


# --------------------------------------------------------------------------------------
#
#  Fixtures and sampling
#
# --------------------------------------------------------------------------------------


def fixture_path(network):
    """
    File of a fixture network: a name from TABLE3_NETWORKS or a path to a model file
    """
    if network in constants.TABLE3_NETWORKS:
        return os.path.join(constants.fixture_dir(), constants.TABLE3_NETWORKS[network])
    return network


def load_fixture(network):
    """
    Loads a ground-truth network with authoritative CPTs

    :param network: 'cancer', 'asia' or a model file path
    :type network: str
    :rtype: model.BayesNet
    """
    path = fixture_path(network)
    if not os.path.isfile(path):
        raise AnbSAKIOError('Fixture network "%s" not found at %s' % (network, path))
    return BayesNet.load(path)


def sample(net, n, seed=constants.DEFAULT_SEED):
    """
    Ancestral sampling in topological order

    :param net: network
    :type net: model.BayesNet
    :param n: number of rows
    :type n: int
    :param seed: generator seed
    :type seed: int
    :rtype: data.Dataset
    """
    if n < 1:
        raise AnbSAKValueError("Sample size must be positive, got %d" % n)
    rng = np.random.default_rng(seed)
    data = np.zeros((n, net.n_vars), dtype=np.int64)
    for i in net.dag.topological_order():
        probs = net.cpts[i].theta[net._config_index(data, i)]
        u = rng.random(n)
        states = (u[:, None] >= np.cumsum(probs, axis=1)).sum(axis=1)
        data[:, i] = np.minimum(states, net.arities[i] - 1)
    return Dataset(data, net.arities, net.names, net.states, net.cutoffs)


# --------------------------------------------------------------------------------------
#
#  Divergences and independence checks against exact joints
#
# --------------------------------------------------------------------------------------


def feature_configurations(arities):
    """All complete rows with the class slot set to 0, in mixed-radix feature order"""
    grids = np.indices(arities[1:]).reshape(len(arities) - 1, -1).T
    return np.hstack((np.zeros((grids.shape[0], 1), dtype=np.int64), grids))


def class_posterior_kld(learned, truth, reference=None):
    """
    Expected KL divergence between class posteriors,
    sum_x P*(x) sum_c P_ref(c|x) ln(P_ref(c|x) / P(c|x)),
    over every feature configuration x.  The weights P*(x) come from the truth's exact joint;
    the reference posterior is the truth's unless another network is given.

    :param learned: network under test
    :type learned: model.BayesNet
    :param truth: ground truth
    :type truth: model.BayesNet
    :param reference: network whose posterior is compared against
    :type reference: model.BayesNet
    :rtype: float
    """
    reference = reference or truth
    for net in (learned, reference):
        if net.arities != truth.arities:
            raise AnbSAKSchemaError("Networks disagree on variables: %s vs %s" % (net.arities, truth.arities))
    if truth.n_vars > constants.MAX_KLD_VARS:
        raise AnbSAKLimitError("KL divergence enumerates at most %d variables" % constants.MAX_KLD_VARS)
    weights = truth.joint_table().sum(axis=constants.CLASS_INDEX).reshape(-1)
    rows = feature_configurations(truth.arities)
    live = weights > 0
    p_ref = reference.posterior_batch(rows[live])
    p_hat = learned.posterior_batch(rows[live])
    positive = p_ref > 0
    if np.any(positive & ~(p_hat > 0)):
        raise AnbSAKContentError("Learned posterior is zero where the reference is positive")
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(positive, p_ref * (np.log(p_ref) - np.log(p_hat)), 0.0)
    return max(float(weights[live] @ terms.sum(axis=1)), 0.0)


def conditionally_independent(joint, x, y, z=VarSet(), tol=constants.INDEPENDENCE_TOLERANCE):
    """
    |P(x, y | z) - P(x | z) P(y | z)| <= tol on every cell with P(z) > 0

    :param joint: probability array with one axis per variable
    :type joint: numpy array
    :rtype: bool
    """
    keep = VarSet(z).add(x).add(y)
    drop = tuple(v for v in range(joint.ndim) if v not in keep)
    p_xyz = joint.sum(axis=drop, keepdims=True) if drop else joint
    p_xz = p_xyz.sum(axis=y, keepdims=True)
    p_yz = p_xyz.sum(axis=x, keepdims=True)
    p_z = p_xyz.sum(axis=(x, y), keepdims=True)
    with np.errstate(divide='ignore', invalid='ignore'):
        gap = np.where(p_z > 0, p_xyz / p_z - (p_xz / p_z) * (p_yz / p_z), 0.0)
    return bool(np.all(np.abs(gap) <= tol))


def imap_violations(dag, joint, tol=constants.INDEPENDENCE_TOLERANCE):
    """
    Every d-separation statement (x, y, z) of the DAG that the joint does not satisfy

    :rtype: list of (int, int, VarSet)
    """
    n = dag.n_vars
    violations = []
    for x, y in itertools.combinations(range(n), 2):
        rest = VarSet.full(n).remove(x).remove(y)
        for rank in range(1 << len(rest)):
            z = VarSet(sum(1 << v for k, v in enumerate(rest) if (rank >> k) & 1))
            if d_separated(dag, x, y, z) and not conditionally_independent(joint, x, y, z, tol):
                violations.append((x, y, z))
    return violations


def factorizes(dag, joint, tol=constants.INDEPENDENCE_TOLERANCE):
    """
    True if the joint equals the product of its own conditionals along the DAG, i.e. the DAG is
    an I-map of the joint
    """
    return bool(np.max(np.abs(fit_exact(dag, joint).joint_table() - joint)) <= tol)


def reference_optimal_anb(truth, method='dp'):
    """
    The ANB I-map of the truth's distribution with the fewest parameters.

    * 'dp' maximizes the large-sample score over the exact joint with the exact ANB search and
      verifies that the result factorizes the joint;
    * 'enumerate' filters every ANB structure by the factorization test and keeps the one with
      the fewest parameters (small networks only).

    :param truth: ground truth
    :type truth: model.BayesNet
    :param method: 'dp' or 'enumerate'
    :type method: str
    :rtype: graph.Dag
    """
    if truth.n_vars > constants.MAX_REFERENCE_VARS:
        raise AnbSAKLimitError("Reference ANBs are limited to %d variables" % constants.MAX_REFERENCE_VARS)
    joint = truth.joint_table()
    if method == 'dp':
        # a larger effective sample size exposes weaker dependencies
        for sample_size in (constants.LARGE_SAMPLE_SIZE, constants.LARGE_SAMPLE_SIZE * 1e2,
                            constants.LARGE_SAMPLE_SIZE * 1e4):
            dag, _, _, _ = optimize(large_sample_score_table(joint, 'anb', sample_size))
            if factorizes(dag, joint):
                return dag
            logger.info('Large-sample optimum at N=%g is not an I-map; retrying', sample_size)
        raise AnbSAKContentError("Large-sample optimum %r is not an I-map of the truth" % dag)
    if method == 'enumerate':
        if truth.n_vars > constants.MAX_ENUMERATE_ANB:
            raise AnbSAKLimitError("Enumeration is limited to %d variables" % constants.MAX_ENUMERATE_ANB)
        best, best_params = None, None
        for parents in iter_dags(truth.n_vars, 'anb'):
            dag = Dag(parents)
            params = num_parameters(dag, truth.arities)
            if (best is None or params < best_params) and factorizes(dag, joint):
                best, best_params = dag, params
        return best
    raise AnbSAKValueError("Unknown reference method %r" % method)


# --------------------------------------------------------------------------------------
#
#  Cross-validation
#
# --------------------------------------------------------------------------------------


@dataclass
class CvReport:
    """
    Per-fold accuracies of one learner on one dataset
    """
    method: str
    folds: int
    seed: int
    fold_accuracies: list = field(default_factory=list)
    fold_seconds: list = field(default_factory=list)
    stratified: bool = True
    fold_metadata: list = field(default_factory=list)

    @property
    def mean_accuracy(self):
        return float(np.mean(self.fold_accuracies))

    def to_json(self):
        return {
            'schema': constants.REPORT_SCHEMA,
            'kind': 'crossval',
            'method': self.method,
            'folds': self.folds,
            'seed': self.seed,
            'stratified': self.stratified,
            'fold_accuracies': self.fold_accuracies,
            'mean_accuracy': self.mean_accuracy,
            'fold_seconds': self.fold_seconds,
            'fold_metadata': self.fold_metadata,
        }

    def to_text(self):
        lines = ['%d-fold cross-validation of %s (seed %d%s)'
                 % (self.folds, self.method, self.seed, '' if self.stratified else ', unstratified'),
                 '%6s  %10s  %10s' % ('fold', 'accuracy', 'seconds')]
        for k, (acc, sec) in enumerate(zip(self.fold_accuracies, self.fold_seconds)):
            lines.append('%6d  %10.4f  %10.3f' % (k, acc, sec))
        lines.append('%6s  %10.4f' % ('mean', self.mean_accuracy))
        return '\n'.join(lines) + '\n'


def crossval(dataset, learner, folds=constants.DEFAULT_FOLDS, seed=constants.DEFAULT_SEED):
    """
    k-fold cross-validated accuracy with a seeded stratified split

    :param dataset: data, class first
    :type dataset: data.Dataset
    :param learner: learner whose fit() returns a BayesNet
    :type learner: base.AnbSAKLearner
    :param folds: number of folds
    :type folds: int
    :param seed: split seed
    :type seed: int
    :rtype: CvReport
    """
    labels, stratified = fold_assignment(dataset.class_column, folds, seed)
    report = CvReport(learner.cts_type(), folds, seed, stratified=stratified)
    for f in range(folds):
        train = dataset.take(np.flatnonzero(labels != f))
        test = dataset.take(np.flatnonzero(labels == f))
        start = time.perf_counter()
        net = learner.fit(train)
        acc = net.accuracy(test.select_names(net.names))
        report.fold_seconds.append(time.perf_counter() - start)
        report.fold_accuracies.append(acc)
        report.fold_metadata.append({k: v for k, v in learner.last_metadata.items() if k != 'selection'})
        logger.info('Fold %d/%d: accuracy %.4f', f + 1, folds, acc)
    return report


# --------------------------------------------------------------------------------------
#
#  Sample-size experiment
#
# --------------------------------------------------------------------------------------


@dataclass
class Table3Report:
    """
    One row per (sample size, seed): SHD to the reference ANB, KLD to the posterior of the true
    structure refit on the same sample, and KLD to the true posterior
    """
    network: str
    ess: float
    reference: list
    rows: list = field(default_factory=list)

    COLUMNS = ('size', 'seed', 'shd', 'kld', 'kld_true', 'score', 'seconds')

    def medians(self):
        """Median SHD and KLDs per sample size, ascending"""
        by_size = bucket(self.rows, key=lambda r: r['size'])
        ret = []
        for size in sorted(set(r['size'] for r in self.rows)):
            rows = list(by_size[size])
            ret.append({'size': size,
                        'seeds': len(rows),
                        'shd': float(np.median([r['shd'] for r in rows])),
                        'kld': float(np.median([r['kld'] for r in rows])),
                        'kld_true': float(np.median([r['kld_true'] for r in rows]))})
        return ret

    def to_json(self):
        return {
            'schema': constants.REPORT_SCHEMA,
            'kind': 'table3',
            'network': self.network,
            'ess': self.ess,
            'seeds': sorted(set(r['seed'] for r in self.rows)),
            'reference': self.reference,
            'rows': self.rows,
            'medians': self.medians(),
        }

    def to_text(self):
        lines = ['%s: exact ANB (N\'=%g) against the reference optimal ANB' % (self.network, self.ess),
                 '%8s  %6s  %6s  %12s  %12s' % ('N', 'seeds', 'SHD', 'KLD', 'KLD(true)')]
        for m in self.medians():
            lines.append('%8d  %6d  %6g  %12.3e  %12.3e'
                         % (m['size'], m['seeds'], m['shd'], m['kld'], m['kld_true']))
        return '\n'.join(lines) + '\n'

    def to_csv(self):
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=self.COLUMNS, extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        writer.writerows(self.rows)
        return out.getvalue()


def table3_experiment(network, sizes=constants.TABLE3_SIZES, seeds=range(5), ess=constants.DEFAULT_ESS,
                      reference_method='dp'):
    """
    Samples the fixture network at every size and seed, learns the exact ANB and compares it
    with the reference optimal ANB (SHD) and with the true structure refit on the same sample
    (class-posterior KLD)

    :param network: 'cancer', 'asia' or a model file path
    :type network: str
    :param sizes: sample sizes
    :type sizes: sequence of int
    :param seeds: sampling seeds
    :type seeds: sequence of int
    :param ess: N' for structure learning and EAP
    :type ess: float
    :param reference_method: see reference_optimal_anb()
    :type reference_method: str
    :rtype: Table3Report
    """
    truth = load_fixture(network)
    reference = reference_optimal_anb(truth, reference_method)
    config = BdeuConfig(ess)
    report = Table3Report(network, ess, reference.to_json(truth.names)['variables'])
    for size in sizes:
        for seed in seeds:
            start = time.perf_counter()
            data = sample(truth, size, seed)
            result = search_exact(data, 'anb', config)
            learned = fit_eap(result.dag, data, ess)
            refit = fit_eap(truth.dag, data, ess)
            report.rows.append({
                'size': int(size),
                'seed': int(seed),
                'shd': shd(result.dag, reference),
                'kld': class_posterior_kld(learned, truth, refit),
                'kld_true': class_posterior_kld(learned, truth),
                'score': result.score,
                'seconds': time.perf_counter() - start,
                'structure': result.dag.to_json(truth.names)['variables'],
            })
            logger.info('%s N=%d seed=%d: SHD %d, KLD %.3e', network, size, seed,
                        report.rows[-1]['shd'], report.rows[-1]['kld'])
    return report


def dump_report(report, json_path=None, text_path=None, csv_path=None):
    """Writes a report's JSON, text and (for sample-size experiments) CSV renditions"""
    outputs = [(json_path, lambda: json.dumps(report.to_json(), indent=2)),
               (text_path, report.to_text),
               (csv_path, getattr(report, 'to_csv', None))]
    for path, render in outputs:
        if path is None or render is None:
            continue
        try:
            with open(path, 'w') as f:
                f.write(render())
        except OSError as e:
            raise AnbSAKIOError('Unable to write "%s": %s' % (path, e))
