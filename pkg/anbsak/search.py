"""
Exact structure optimization over variable subsets: best parents, best sinks and the
sink-peeling reconstruction of the optimal network, in the ANB-constrained space (the class is
a parentless parent of every feature) or the unconstrained space.

Subsets are processed layer by layer in popcount order, which satisfies the recursions'
requirement that every strict subset of a set is finished before the set itself.  Within a
layer all sets are independent, so each layer is one vectorized numpy step.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from anbsak.base import AnbSAKLearner
from anbsak.data import cft, jft
from anbsak.errors import *
from anbsak.graph import Dag
from anbsak.scoring import (BdeuConfig, LocalScoreTable, bdeu_local, build_score_table, check_mode,
                            check_variable_cap)
from anbsak.varset import VarSet, Family, iter_bits
from anbsak import constants

logger = logging.getLogger(__name__)


def _popcounts(size):
    pc = np.zeros(size, dtype=np.int64)
    for k in range(max(size - 1, 0).bit_length()):
        pc += (np.arange(size) >> k) & 1
    return pc


def _tied(a, b):
    return np.isclose(a, b, rtol=constants.SCORE_TIE_TOLERANCE, atol=constants.SCORE_TIE_TOLERANCE)


class BestParentsTable:
    """
    For every child and every candidate parent set Z, the best-scoring admissible parent set
    contained in Z and its local score.  Arrays are indexed by the rank of Z within the child's
    admissible family.
    """

    def __init__(self, local_scores):
        self.local_scores = local_scores  #: the LocalScoreTable the table was built from
        self.n_vars = local_scores.n_vars
        self.mode = local_scores.mode
        self.families = local_scores.families
        self.scores = [None] * self.n_vars  #: best local score per child, by candidate rank
        self.parents = [None] * self.n_vars  #: rank of the best parent set per child, by candidate rank
        self.iterations = 0  #: candidate sets visited

    def best(self, child, candidates):
        """
        Best parents of a child within a candidate set

        :param child: child variable
        :type child: int
        :param candidates: candidate parent set (contains X0 in ANB mode)
        :type candidates: VarSet
        :return: best parent set and its local score
        :rtype: (VarSet, float)
        """
        fam = self.families[child]
        if fam is None or int(candidates) not in fam:
            raise AnbSAKValueError("%r is not a candidate set for X%d in %s mode"
                                   % (VarSet(candidates), child, self.mode))
        r = fam.rank(candidates)
        return fam.varset(int(self.parents[child][r])), float(self.scores[child][r])


def best_parents(scores, mode=None):
    """
    Best parent sets of every child within every candidate set.  The best score for Z is the
    maximum of Z's own local score and the best scores of the sets one element smaller.  Ties go
    to the smaller parent set, then the lower bitmask.

    :param scores: complete local score table
    :type scores: scoring.LocalScoreTable
    :param mode: 'anb' or 'gbn'; must match the table when given
    :type mode: str
    :rtype: BestParentsTable
    """
    if mode is not None and check_mode(mode) != scores.mode:
        raise AnbSAKValueError("Score table is in %s mode, not %s" % (scores.mode, mode))
    if not scores.is_complete():
        raise AnbSAKValueError("Local score table is incomplete")
    bps = BestParentsTable(scores)
    for child in scores.children():
        fam = scores.family(child)
        m = len(fam.free_bits)
        local = scores.scores[child]
        best = local.copy()
        best_rank = np.arange(fam.size, dtype=np.int64)
        pc = _popcounts(fam.size)
        for layer in range(1, m + 1):
            idx = np.flatnonzero(pc == layer)
            for k in range(m):
                sel = idx[(idx >> k) & 1 == 1]
                sub = sel ^ (1 << k)
                cand, cand_rank = best[sub], best_rank[sub]
                inc, inc_rank = best[sel], best_rank[sel]
                # smaller parent set, then lower mask; rank order is mask order within a family
                cand_key = (pc[cand_rank] << m) | cand_rank
                inc_key = (pc[inc_rank] << m) | inc_rank
                tied = _tied(cand, inc)
                take = np.where(tied, cand_key < inc_key, cand > inc)
                best[sel] = np.where(take, cand, inc)
                best_rank[sel] = np.where(take, cand_rank, inc_rank)
        bps.scores[child] = best
        bps.parents[child] = best_rank
        bps.iterations += fam.size
    logger.debug('Best parents (%s): %d candidate sets', scores.mode, bps.iterations)
    return bps


def sink_family(mode, n_vars):
    """
    The sets the sink recursion runs over: all subsets of V, or those containing X0 in ANB mode
    """
    full = (1 << n_vars) - 1
    if mode == 'anb':
        c = 1 << constants.CLASS_INDEX
        return Family(c, full & ~c)
    return Family(0, full)


class BestSinkTable:
    """
    For every set Z in the sink family, the best sink of an optimal network over Z and the
    cumulative score of that network.  In ANB mode the cumulative score omits the constant
    local score of the parentless class, so the entry for {X0} is 0.
    """

    def __init__(self, n_vars, mode):
        self.n_vars = n_vars
        self.mode = mode
        self.family = sink_family(mode, n_vars)
        self.scores = np.zeros(self.family.size)  #: cumulative score per set rank
        self.sinks = np.full(self.family.size, -1, dtype=np.int64)  #: best sink per set rank, -1 for the base set
        self.iterations = 0  #: sets visited

    def sink(self, z):
        return int(self.sinks[self.family.rank(z)])

    def score(self, z):
        return float(self.scores[self.family.rank(z)])

    @property
    def full_score(self):
        return float(self.scores[-1])


def best_sinks(scores, bps, mode=None):
    """
    Best sinks of every set in the sink family.  The best sink X of Z maximizes the best-parents
    score of X within Z minus X plus the cumulative score of Z minus X.  Ties go to the lowest
    variable index.

    :param scores: local score table
    :type scores: scoring.LocalScoreTable
    :param bps: best parents of the same table
    :type bps: BestParentsTable
    :param mode: 'anb' or 'gbn'; must match the tables when given
    :type mode: str
    :rtype: BestSinkTable
    """
    mode = scores.mode if mode is None else check_mode(mode)
    if mode != scores.mode or mode != bps.mode:
        raise AnbSAKValueError("Score and best-parent tables disagree on the mode")
    sinks = BestSinkTable(scores.n_vars, mode)
    fam = sinks.family
    m = len(fam.free_bits)
    pc = _popcounts(fam.size)
    for layer in range(1, m + 1):
        idx = np.flatnonzero(pc == layer)
        cur = np.full(idx.size, -np.inf)
        cur_sink = np.full(idx.size, -1, dtype=np.int64)
        for k, v in enumerate(fam.free_bits):
            has = (idx >> k) & 1 == 1
            sub = idx[has] ^ (1 << k)
            # rank of Z minus v within v's own admissible family: drop bit k and compress
            child_rank = (sub & ((1 << k) - 1)) | ((sub >> (k + 1)) << k)
            cand = bps.scores[v][child_rank] + sinks.scores[sub]
            inc = cur[has]
            take = (cand > inc) & ~_tied(cand, inc)
            cur[has] = np.where(take, cand, inc)
            cur_sink[has] = np.where(take, v, cur_sink[has])
        sinks.scores[idx] = cur
        sinks.sinks[idx] = cur_sink
    sinks.iterations = fam.size
    logger.debug('Best sinks (%s): %d sets', mode, sinks.iterations)
    return sinks


def best_net(bps, sinks):
    """
    Reconstructs the optimal network by peeling sinks off V: each peeled sink gets its best
    parents within the remaining variables.

    :param bps: best parents table
    :type bps: BestParentsTable
    :param sinks: best sink table
    :type sinks: BestSinkTable
    :rtype: graph.Dag
    """
    if bps.mode != sinks.mode or bps.n_vars != sinks.n_vars:
        raise AnbSAKValueError("Best-parent and best-sink tables do not belong together")
    n = sinks.n_vars
    parents = [VarSet()] * n
    z = VarSet.full(n)
    total = 0.0
    while True:
        s = sinks.sink(z)
        if s < 0:
            break
        z = z.remove(s)
        parents[s], _ = bps.best(s, z)
        total += bps.local_scores.score(s, parents[s])
    if sinks.mode == 'anb' and z != VarSet.of(constants.CLASS_INDEX) or sinks.mode == 'gbn' and z:
        raise AnbSAKContentError("Sink peeling stopped early at %r" % z)
    if not math.isclose(total, sinks.full_score, rel_tol=constants.SCORE_TIE_TOLERANCE,
                        abs_tol=constants.RECONSTRUCTION_TOLERANCE):
        raise AnbSAKContentError("Reconstructed score %r does not match the optimum %r"
                                 % (total, sinks.full_score))
    return Dag(parents)


@dataclass
class SearchResult:
    """
    An optimal structure and the search's bookkeeping
    """
    dag: Dag
    mode: str
    score: float  #: total log score of the structure
    eval_counter: int  #: local score evaluations
    parent_iterations: int  #: candidate sets visited by the best-parents stage
    sink_iterations: int  #: sets visited by the best-sinks stage
    extra: dict = field(default_factory=dict)

    def metadata(self):
        meta = dict(self.extra)
        meta.update({
            'mode': self.mode,
            'score': self.score,
            'eval_counter': self.eval_counter,
            'parent_iterations': self.parent_iterations,
            'sink_iterations': self.sink_iterations,
        })
        return meta


def optimize(scores):
    """
    Runs the best-parents, best-sinks and reconstruction stages on a complete score table

    :param scores: complete local score table
    :type scores: scoring.LocalScoreTable
    :return: structure, cumulative score, best-parent and best-sink tables
    """
    bps = best_parents(scores)
    sinks = best_sinks(scores, bps)
    dag = best_net(bps, sinks)
    return dag, sinks.full_score, bps, sinks


def search_exact(dataset, mode='anb', config=BdeuConfig(), max_vars=constants.MAX_VARS):
    """
    Learns a BDeu-optimal structure and reports the search counters

    :param dataset: training data, class first
    :type dataset: data.Dataset
    :param mode: 'anb' or 'gbn'
    :type mode: str
    :param config: BDeu hyperparameters
    :type config: scoring.BdeuConfig
    :param max_vars: variable cap
    :type max_vars: int
    :rtype: SearchResult
    """
    check_mode(mode)
    if dataset.n_vars == 1:
        score = bdeu_local(cft(dataset, constants.CLASS_INDEX, VarSet()), config)
        return SearchResult(Dag.empty(1), mode, score, 0, 0, 0)
    scores = build_score_table(dataset, mode, config, max_vars)
    dag, cumulative, bps, sinks = optimize(scores)
    if mode == 'anb':
        cumulative += bdeu_local(cft(dataset, constants.CLASS_INDEX, VarSet()), config)
    logger.info('Exact %s search over %d variables: score %.6f, %d local scores',
                mode.upper(), dataset.n_vars, cumulative, scores.eval_counter)
    return SearchResult(dag, mode, cumulative, scores.eval_counter, bps.iterations, sinks.iterations)


def learn_exact(dataset, mode='anb', config=BdeuConfig(), max_vars=constants.MAX_VARS):
    """
    BDeu-optimal structure in the ANB or unconstrained space; see search_exact()

    :rtype: graph.Dag
    """
    return search_exact(dataset, mode, config, max_vars).dag


# --------------------------------------------------------------------------------------
#
#  Enumeration oracles and fixed structures
#
# --------------------------------------------------------------------------------------


def _acyclic_masks(parents):
    placed = 0
    remaining = list(parents)
    progress = True
    while progress:
        progress = False
        for i, p in enumerate(remaining):
            if not (placed >> i) & 1 and p & ~placed == 0:
                placed |= 1 << i
                progress = True
    return placed == (1 << len(parents)) - 1


def iter_dags(n_vars, mode='anb'):
    """
    Yields every DAG of the mode's space as a tuple of parent masks.  Every unordered pair of
    variables is absent or oriented either way; in ANB mode the class is fixed as a parent of all
    features and only feature pairs vary.
    """
    check_mode(mode)
    c = constants.CLASS_INDEX
    if mode == 'anb':
        variables = [v for v in range(n_vars) if v != c]
        base = [0 if v == c else 1 << c for v in range(n_vars)]
    else:
        variables = list(range(n_vars))
        base = [0] * n_vars
    pairs = list(itertools.combinations(variables, 2))
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        parents = list(base)
        for (a, b), s in zip(pairs, states):
            if s == 1:
                parents[b] |= 1 << a
            elif s == 2:
                parents[a] |= 1 << b
        if _acyclic_masks(parents):
            yield tuple(parents)


def enumerate_optimal(dataset, mode='anb', config=BdeuConfig()):
    """
    Exhaustive search over every acyclic structure of the mode's space, with local scores tallied
    directly from the data.  Only usable for a handful of variables.

    :param dataset: data
    :type dataset: data.Dataset
    :param mode: 'anb' or 'gbn'
    :type mode: str
    :param config: BDeu hyperparameters
    :type config: scoring.BdeuConfig
    :return: a maximizing structure and its total log score
    :rtype: (graph.Dag, float)
    """
    check_mode(mode)
    cap = constants.MAX_ENUMERATE_ANB if mode == 'anb' else constants.MAX_ENUMERATE_GBN
    if dataset.n_vars > cap:
        raise AnbSAKLimitError("Enumeration in %s mode is limited to %d variables, got %d"
                               % (mode, cap, dataset.n_vars))
    cache = {}

    def local(child, mask):
        key = (child, mask)
        if key not in cache:
            cache[key] = bdeu_local(cft(dataset, child, VarSet(mask)), config)
        return cache[key]

    best, best_score = None, -math.inf
    for parents in iter_dags(dataset.n_vars, mode):
        s = sum(local(i, p) for i, p in enumerate(parents))
        if s > best_score:
            best, best_score = parents, s
    return Dag(best), best_score


def naive_bayes_structure(n_vars):
    """
    The class is the only parent of every feature

    :param n_vars: variable count, class included
    :type n_vars: int
    :rtype: graph.Dag
    """
    if n_vars < 1:
        raise AnbSAKValueError("A structure needs at least one variable")
    c = VarSet.of(constants.CLASS_INDEX)
    return Dag([VarSet() if i == constants.CLASS_INDEX else c for i in range(n_vars)])


def structure_stats(dag, dataset):
    """
    Class-centred statistics of a structure: the number of class parents and children, and the
    number of configurations of the class parents that never occur in the data (the posterior of
    such rows is decided by the prior alone).

    :param dag: structure
    :type dag: graph.Dag
    :param dataset: data the structure is evaluated on
    :type dataset: data.Dataset
    :rtype: dict
    """
    c = constants.CLASS_INDEX
    pa0 = dag.parents[c]
    empty = 0
    configurations = 1
    if pa0:
        table = jft(dataset, pa0)
        configurations = table.q
        empty = table.q - table.nnz
    return {
        'class_parents': len(pa0),
        'class_children': len(dag.children[c]),
        'class_parent_configurations': configurations,
        'empty_class_parent_configurations': empty,
    }


# --------------------------------------------------------------------------------------
#
#  Learners
#
# --------------------------------------------------------------------------------------


class NaiveBayesLearner(AnbSAKLearner):
    """
    Naive Bayes with EAP parameters

    Options:

    * ess: EAP equivalent sample size (default 1.0)
    """
    @classmethod
    def cts_type(cls):
        return 'nb'

    def __init__(self, **kwargs):
        AnbSAKLearner.__init__(self)
        self.set_options(ess=constants.DEFAULT_ESS)
        self.set_options(**kwargs)

    def fit(self, dataset, **kwargs):
        from anbsak.model import fit_eap
        self.set_options(**kwargs)
        dag = naive_bayes_structure(dataset.n_vars)
        self.last_metadata = {'method': 'nb'}
        return fit_eap(dag, dataset, self.get_option('ess'), metadata=self.last_metadata)


class ExactLearner(AnbSAKLearner):
    """
    BDeu-optimal structure learning followed by EAP parameter fitting

    Options:

    * mode: 'anb' (default) or 'gbn'
    * ess: BDeu and EAP equivalent sample size (default 1.0)
    * max_vars: variable cap (default 26)
    """
    @classmethod
    def cts_type(cls):
        return 'exact'

    def __init__(self, **kwargs):
        AnbSAKLearner.__init__(self)
        self.set_options(mode='anb', ess=constants.DEFAULT_ESS, max_vars=constants.MAX_VARS)
        self.set_options(**kwargs)

    def fit(self, dataset, **kwargs):
        from anbsak.model import fit_eap
        self.set_options(**kwargs)
        mode = check_mode(self.get_option('mode'))
        config = BdeuConfig(self.get_option('ess'))
        result = search_exact(dataset, mode, config, self.get_option('max_vars'))
        self.last_metadata = dict(result.metadata(), method=mode)
        if mode == 'gbn':
            self.last_metadata['structure_stats'] = structure_stats(result.dag, dataset)
        return fit_eap(result.dag, dataset, config.ess, metadata=self.last_metadata)
