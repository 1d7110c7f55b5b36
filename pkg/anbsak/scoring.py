"""
BDeu local scores, the subset-indexed local score table, Bayes-factor independence tests and the
conditional log likelihood metric.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from anbsak.data import Jft, jft, jft_marginalize, jft_to_cft, cft
from anbsak.errors import *
from anbsak.varset import VarSet, Family
from anbsak import constants

logger = logging.getLogger(__name__)

MODES = ('anb', 'gbn')


@dataclass(frozen=True)
class BdeuConfig:
    ess: float = constants.DEFAULT_ESS  #: equivalent sample size N'

    def __post_init__(self):
        if not self.ess > 0:
            raise AnbSAKValueError("Equivalent sample size must be positive, got %r" % self.ess)


def check_mode(mode):
    if mode not in MODES:
        raise AnbSAKValueError("Unknown structure mode %r (expected one of %s)" % (mode, ', '.join(MODES)))
    return mode


def bdeu_local(table, config=BdeuConfig()):
    """
    Log BDeu local score of a conditional frequency table:

    sum_j [ lnG(N'/q) - lnG(N'/q + N_j) + sum_k ( lnG(N'/(r q) + N_ijk) - lnG(N'/(r q)) ) ]

    Unobserved parent configurations and empty cells contribute zero, so only the observed
    cells of the sparse table are visited.

    :param table: conditional frequency table
    :type table: data.Cft
    :param config: score hyperparameters
    :type config: BdeuConfig
    :return: log score
    :rtype: float
    """
    a_j = config.ess / table.q
    a_jk = a_j / table.r
    n_jk = np.asarray(table.cell_counts, dtype=float)
    n_j = table.observed_totals()
    score = (gammaln(a_j) - gammaln(a_j + n_j)).sum()
    score += (gammaln(a_jk + n_jk) - gammaln(a_jk)).sum()
    return float(score)


def large_sample_local(table, sample_size=constants.LARGE_SAMPLE_SIZE):
    """
    Asymptotic local score of a conditional probability table taken from an exact joint:
    -N H(X | Pa) - 1/2 log(N) (r - 1) q.  Among I-maps it prefers the fewest parameters.

    :param table: conditional table whose counts are joint probabilities
    :type table: data.Cft
    :param sample_size: effective sample size N
    :type sample_size: float
    :rtype: float
    """
    p = np.asarray(table.cell_counts, dtype=float)
    p_j = table.observed_totals()[table.cell_parent]
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(p > 0, p * np.log(p / p_j), 0.0)
    return float(sample_size * terms.sum() - 0.5 * math.log(sample_size) * (table.r - 1) * table.q)


def admissible_family(mode, n_vars, child):
    """
    Parent-set family of a child: subsets of V minus the child, containing X0 in ANB mode.
    The class variable has no family in ANB mode.

    :rtype: varset.Family or None
    """
    others = ((1 << n_vars) - 1) & ~(1 << child)
    if mode == 'anb':
        if child == constants.CLASS_INDEX:
            return None
        return Family(1 << constants.CLASS_INDEX, others & ~(1 << constants.CLASS_INDEX))
    return Family(0, others)


class LocalScoreTable:
    """
    Log local scores for every admissible (child, parent set) pair, stored as one dense array per
    child indexed by the parent set's rank within the child's admissible family.
    """

    def __init__(self, n_vars, mode):
        self.n_vars = n_vars
        self.mode = check_mode(mode)
        self.families = [admissible_family(mode, n_vars, i) for i in range(n_vars)]
        self.scores = [None if fam is None else np.full(fam.size, np.nan) for fam in self.families]
        self.eval_counter = 0  #: number of local score evaluations performed

    def children(self):
        return [i for i, fam in enumerate(self.families) if fam is not None]

    def family(self, child):
        return self.families[child]

    def set(self, child, parents, score):
        fam = self.families[child]
        if fam is None or int(parents) not in fam:
            raise AnbSAKValueError("Parent set %r is not admissible for X%d in %s mode"
                                   % (VarSet(parents), child, self.mode))
        self.scores[child][fam.rank(parents)] = score
        self.eval_counter += 1

    def score(self, child, parents):
        """
        Stored local score of a child given a parent set
        """
        fam = self.families[child]
        if fam is None or int(parents) not in fam:
            raise AnbSAKValueError("Parent set %r is not admissible for X%d in %s mode"
                                   % (VarSet(parents), child, self.mode))
        return float(self.scores[child][fam.rank(parents)])

    def is_complete(self):
        return all(s is None or not np.isnan(s).any() for s in self.scores)

    def items(self):
        """Yields (child, parent VarSet, score) in child, then rank order"""
        for child, fam in enumerate(self.families):
            if fam is None:
                continue
            for rank, mask in enumerate(fam.masks):
                yield child, VarSet(mask), float(self.scores[child][rank])

    def dump(self, out):
        """
        Writes a diagnostic text dump, one 'child<TAB>parent bitmask<TAB>score' line per entry

        :param out: writable text stream
        """
        for child, parents, score in self.items():
            out.write('%d\t%d\t%r\n' % (child, int(parents), score))


def score_table_from_jft(root, mode, local_score):
    """
    Fills a local score table by depth-first marginalization of a joint table over all
    variables.  Each recursion step scores every eligible child of the current table and
    then marginalizes one more variable, visiting every admissible subset exactly once.

    :param root: joint table over all variables (counts or probabilities)
    :type root: data.Jft
    :param mode: 'anb' or 'gbn'
    :type mode: str
    :param local_score: maps a data.Cft to a log score
    :type local_score: callable
    :rtype: LocalScoreTable
    """
    n_vars = len(root.vars)
    table = LocalScoreTable(n_vars, mode)
    class_bit = 1 << constants.CLASS_INDEX

    def free_vars(jt):
        if mode == 'anb':
            return [v for v in jt.vars if v != constants.CLASS_INDEX]
        return list(jt.vars)

    def get_local_scores(jt, efvs):
        fvs = free_vars(jt)
        for x in fvs:
            table.set(x, jt.vars.remove(x), local_score(jft_to_cft(jt, x)))
        if len(fvs) > 1:
            for j, v in enumerate(efvs):
                get_local_scores(jft_marginalize(jt, v, mode), efvs[:j])

    if mode == 'anb' and not int(root.vars) & class_bit:
        raise AnbSAKValueError("ANB score tables need the class variable")
    get_local_scores(root, free_vars(root))
    logger.debug('Local score table (%s, %d variables): %d evaluations', mode, n_vars, table.eval_counter)
    return table


def check_variable_cap(n_vars, max_vars=constants.MAX_VARS):
    if n_vars > max_vars:
        raise AnbSAKLimitError("%d variables exceed the exact-search cap of %d (tables grow as n 2^n)"
                               % (n_vars, max_vars))


def build_score_table(dataset, mode='anb', config=BdeuConfig(), max_vars=constants.MAX_VARS):
    """
    Computes all admissible BDeu local scores from one joint frequency table of the data

    :param dataset: training data
    :type dataset: data.Dataset
    :param mode: 'anb' (parent sets contain X0) or 'gbn' (unrestricted)
    :type mode: str
    :param config: BDeu hyperparameters
    :type config: BdeuConfig
    :param max_vars: variable cap
    :type max_vars: int
    :rtype: LocalScoreTable
    """
    check_mode(mode)
    check_variable_cap(dataset.n_vars, max_vars)
    root = jft(dataset, dataset.all_vars())
    return score_table_from_jft(root, mode, lambda c: bdeu_local(c, config))


def large_sample_score_table(joint, mode='anb', sample_size=constants.LARGE_SAMPLE_SIZE):
    """
    Local score table of the asymptotic score over an exact joint distribution

    :param joint: probability array with one axis per variable
    :type joint: numpy array
    :rtype: LocalScoreTable
    """
    joint = np.asarray(joint, dtype=float)
    root = Jft.from_dense(VarSet.full(joint.ndim), joint)
    return score_table_from_jft(root, mode, lambda c: large_sample_local(c, sample_size))


def total_score(dag, dataset, config=BdeuConfig()):
    """
    Total log BDeu of a DAG, the sum of its local scores

    :param dag: structure
    :type dag: graph.Dag
    :rtype: float
    """
    return sum(bdeu_local(cft(dataset, i, dag.parents[i]), config) for i in range(dag.n_vars))


def bayes_factor(dataset, x, y, z=VarSet(), config=BdeuConfig()):
    """
    Bayes factor of "y is not a parent of x" against "y is a parent of x", both given z.
    Values above a threshold delta accept the independence of x and y given z.  Factors beyond
    the float range come back as inf; use log_bayes_factor() to compare them.

    :param dataset: data
    :type dataset: data.Dataset
    :param x: tested child
    :type x: int
    :param y: candidate parent
    :type y: int
    :param z: conditioning set excluding x and y
    :type z: VarSet
    :param config: BDeu hyperparameters
    :type config: BdeuConfig
    :rtype: float
    """
    z = VarSet(z)
    if x == y:
        raise AnbSAKValueError("Bayes factor needs two distinct variables")
    if x in z or y in z:
        raise AnbSAKValueError("Conditioning set must exclude X%d and X%d" % (x, y))
    with np.errstate(over='ignore'):
        return float(np.exp(log_bayes_factor(dataset, x, y, z, config)))


def log_bayes_factor(dataset, x, y, z=VarSet(), config=BdeuConfig()):
    z = VarSet(z)
    return bdeu_local(cft(dataset, x, z), config) - bdeu_local(cft(dataset, x, z.add(y)), config)


def cll(net, dataset):
    """
    Conditional log likelihood of the class: sum_d ln P(x0_d | x1_d..xn_d), normalizing the
    joint over all class states

    :param net: Bayesian network over the dataset's variables
    :type net: model.BayesNet
    :param dataset: evaluation data
    :type dataset: data.Dataset
    :rtype: float
    """
    log_joint = net.log_joint_by_class(dataset)
    log_evidence = logsumexp(log_joint, axis=1)
    bad = np.flatnonzero(~np.isfinite(log_evidence))
    if bad.size:
        raise AnbSAKContentError("Zero-probability evidence in rows %s" % ', '.join(str(i) for i in bad[:20]))
    observed = log_joint[np.arange(dataset.n_rows), dataset.class_column]
    bad = np.flatnonzero(~np.isfinite(observed))
    if bad.size:
        raise AnbSAKContentError("Zero probability for the observed class in rows %s"
                                 % ', '.join(str(i) for i in bad[:20]))
    return float((observed - log_evidence).sum())
