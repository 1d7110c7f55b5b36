"""
Discrete Bayesian networks: EAP parameter estimation, exact inference on small networks and
Markov-blanket classification.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from anbsak.data import Dataset, Jft, cft, jft_to_cft
from anbsak.errors import *
from anbsak.graph import Dag
from anbsak.varset import VarSet
from anbsak import constants

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cpt:
    """
    Conditional probability table of one variable.  ``theta[j, k]`` is P(X_child = k | Pa = j)
    with j the mixed-radix parent configuration index.
    """
    child: int
    parents: VarSet
    theta: np.ndarray = field(repr=False, compare=False)
    pseudo_count: float = 0.0  #: N'_ijk used for the estimate; 0 for exact parameters

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 2:
            raise AnbSAKValueError("CPT of X%d must be two-dimensional" % self.child)
        if np.any(theta < 0) or not np.allclose(theta.sum(axis=1), 1.0, rtol=0, atol=1e-9):
            raise AnbSAKValueError("CPT rows of X%d are not probability distributions" % self.child)
        object.__setattr__(self, 'theta', theta)

    @property
    def q(self):
        return self.theta.shape[0]

    @property
    def r(self):
        return self.theta.shape[1]


class BayesNet:
    """
    A structure with one CPT per variable, plus the column metadata needed to re-encode raw
    files.  Variable 0 is the class.
    """

    def __init__(self, dag, cpts, names=None, states=None, cutoffs=None, metadata=None):
        self.dag = dag
        self.cpts = list(cpts)
        n = dag.n_vars
        if len(self.cpts) != n:
            raise AnbSAKValueError("Expected %d CPTs, got %d" % (n, len(self.cpts)))
        self.arities = tuple(c.r for c in self.cpts)
        for i, c in enumerate(self.cpts):
            if c.child != i or c.parents != dag.parents[i]:
                raise AnbSAKValueError("CPT %d does not match the structure" % i)
            q = int(np.prod([self.arities[p] for p in c.parents], dtype=np.int64))
            if c.q != q:
                raise AnbSAKValueError("CPT of X%d has %d parent configurations, expected %d" % (i, c.q, q))
        self.names = list(names) if names is not None else ['X%d' % i for i in range(n)]
        if states is None:
            states = [[str(k) for k in range(r)] for r in self.arities]
        self.states = [list(s) for s in states]
        self.cutoffs = dict(cutoffs) if cutoffs else {}
        self.metadata = dict(metadata) if metadata else {}

    @property
    def n_vars(self):
        return self.dag.n_vars

    def schema(self):
        """Column metadata in the Dataset.schema() format"""
        ret = []
        for nm, st in zip(self.names, self.states):
            col = {'name': nm, 'states': list(st)}
            if nm in self.cutoffs:
                col['cutoff'] = self.cutoffs[nm]
            ret.append(col)
        return ret

    def num_parameters(self):
        return sum((c.r - 1) * c.q for c in self.cpts)

    def _config_index(self, data, i):
        ps = self.dag.parents[i].to_list()
        if not ps:
            return np.zeros(data.shape[0], dtype=np.int64)
        return np.ravel_multi_index(tuple(data[:, p] for p in ps), tuple(self.arities[p] for p in ps))

    def _log_factor(self, data, i):
        """ln theta_i for every row of a complete state matrix"""
        with np.errstate(divide='ignore'):
            return np.log(self.cpts[i].theta[self._config_index(data, i), data[:, i]])

    def _rows(self, dataset_or_rows):
        data = dataset_or_rows.data if isinstance(dataset_or_rows, Dataset) else dataset_or_rows
        data = np.asarray(data, dtype=np.int64)
        if data.ndim == 1:
            data = data.reshape(1, -1)
        if data.shape[1] != self.n_vars:
            raise AnbSAKSchemaError("Rows have %d columns, the network has %d variables"
                                    % (data.shape[1], self.n_vars))
        if data.size and (data.min() < 0 or np.any(data.max(axis=0) >= np.array(self.arities))):
            raise AnbSAKSchemaError("Rows contain states outside the network's arities")
        return data

    def log_joint_by_class(self, dataset, variables=None):
        """
        ln P(x0 = c, x1..xn) for every row and every class state c

        :param dataset: rows (the class column is ignored)
        :type dataset: data.Dataset or numpy array
        :param variables: factors to include; all variables when None
        :return: array of shape (rows, r0)
        """
        data = self._rows(dataset).copy()
        c = constants.CLASS_INDEX
        variables = range(self.n_vars) if variables is None else variables
        ret = np.empty((data.shape[0], self.arities[c]))
        for k in range(self.arities[c]):
            data[:, c] = k
            ret[:, k] = sum((self._log_factor(data, i) for i in variables), np.zeros(data.shape[0]))
        return ret

    def blanket_factors(self):
        """The class and its children: the only factors that depend on the class"""
        c = constants.CLASS_INDEX
        return [c] + self.dag.children[c].to_list()

    def posterior_batch(self, dataset):
        """
        Class posteriors of many rows, from the Markov-blanket factors in log space

        :param dataset: rows over all variables (class column ignored)
        :type dataset: data.Dataset or numpy array
        :return: array of shape (rows, r0)
        """
        log_scores = self.log_joint_by_class(dataset, self.blanket_factors())
        with np.errstate(invalid='ignore'):
            log_scores -= log_scores.max(axis=1, keepdims=True)
            post = np.exp(log_scores)
            return post / post.sum(axis=1, keepdims=True)

    def predict_batch(self, dataset):
        """Most probable class of every row, ties to the lowest class index"""
        return np.argmax(self.posterior_batch(dataset), axis=1)

    def accuracy(self, dataset):
        if dataset.n_rows == 0:
            raise AnbSAKContentError("Accuracy of an empty dataset is undefined")
        return float(np.mean(self.predict_batch(dataset) == dataset.class_column))

    def joint_table(self):
        """
        The full joint distribution as an array with one axis per variable

        :rtype: numpy array
        """
        if self.n_vars > constants.MAX_KLD_VARS:
            raise AnbSAKLimitError("Joint tables are limited to %d variables" % constants.MAX_KLD_VARS)
        n = self.n_vars
        joint = np.ones(self.arities)
        for i, c in enumerate(self.cpts):
            ps = c.parents.to_list()
            t = c.theta.reshape(tuple(self.arities[p] for p in ps) + (c.r,))
            order = ps + [i]
            t = t.transpose([order.index(v) for v in sorted(order)])
            joint = joint * t.reshape([self.arities[v] if v in order else 1 for v in range(n)])
        return joint

    def to_json(self):
        variables = []
        for i, c in enumerate(self.cpts):
            var = {
                'name': self.names[i],
                'arity': c.r,
                'states': self.states[i],
                'parents': [self.names[p] for p in c.parents],
                'pseudo_count': c.pseudo_count,
                'cpt': c.theta.tolist(),
            }
            if self.names[i] in self.cutoffs:
                var['cutoff'] = self.cutoffs[self.names[i]]
            variables.append(var)
        return {'schema': constants.MODEL_SCHEMA, 'version': constants.ANBSAK_VERSION,
                'class': self.names[constants.CLASS_INDEX], 'variables': variables,
                'metadata': self.metadata}

    @classmethod
    def from_json(cls, obj):
        if obj.get('schema') != constants.MODEL_SCHEMA:
            raise AnbSAKSchemaError("Unsupported model schema %r" % obj.get('schema'))
        try:
            variables = obj['variables']
            names = [v['name'] for v in variables]
            parents = [VarSet.from_iterable(names.index(p) for p in v['parents']) for v in variables]
            cpts = [Cpt(i, parents[i], np.array(v['cpt'], dtype=float), v.get('pseudo_count', 0.0))
                    for i, v in enumerate(variables)]
            states = [v['states'] for v in variables]
            cutoffs = {v['name']: v['cutoff'] for v in variables if 'cutoff' in v}
        except (KeyError, ValueError, TypeError) as e:
            raise AnbSAKSchemaError("Malformed model file: %s" % e)
        return cls(Dag(parents), cpts, names, states, cutoffs, obj.get('metadata'))

    def save(self, filename):
        try:
            with open(filename, 'w') as f:
                json.dump(self.to_json(), f, indent=1)
        except OSError as e:
            raise AnbSAKIOError('Unable to write "%s": %s' % (filename, e))

    @classmethod
    def load(cls, filename):
        try:
            with open(filename, 'r') as f:
                obj = json.load(f)
        except OSError as e:
            raise AnbSAKIOError('Unable to read "%s": %s' % (filename, e))
        except json.JSONDecodeError as e:
            raise AnbSAKSchemaError('"%s" is not a model file: %s' % (filename, e))
        return cls.from_json(obj)

    def __repr__(self):
        return "BayesNet(%d variables, %d parameters)" % (self.n_vars, self.num_parameters())


def fit_eap(dag, dataset, ess=constants.DEFAULT_ESS, metadata=None):
    """
    Expected a posteriori parameters under the BDeu prior:
    theta_ijk = (N'_ijk + N_ijk) / (N'_ij + N_ij) with N'_ijk = ess / (r_i q_i).
    Unseen parent configurations get the uniform prior mean.

    :param dag: structure over the dataset's variables
    :type dag: graph.Dag
    :param dataset: training data
    :type dataset: data.Dataset
    :param ess: equivalent sample size
    :type ess: float
    :param metadata: stored with the network
    :type metadata: dict
    :rtype: BayesNet
    """
    if dag.n_vars != dataset.n_vars:
        raise AnbSAKValueError("Structure has %d variables, data has %d" % (dag.n_vars, dataset.n_vars))
    if not ess > 0:
        raise AnbSAKValueError("Equivalent sample size must be positive, got %r" % ess)
    cpts = []
    for i in range(dag.n_vars):
        counts = cft(dataset, i, dag.parents[i]).counts.astype(float)
        q, r = counts.shape
        a_jk = ess / (r * q)
        theta = (counts + a_jk) / (counts.sum(axis=1, keepdims=True) + ess / q)
        cpts.append(Cpt(i, dag.parents[i], theta, a_jk))
    return BayesNet(dag, cpts, dataset.names, dataset.states, dataset.cutoffs, metadata)


def fit_exact(dag, joint, names=None, states=None):
    """
    Parameters read off an exact joint distribution: theta_ijk = P(x_i = k, pa = j) / P(pa = j),
    uniform where P(pa = j) = 0

    :param dag: structure
    :type dag: graph.Dag
    :param joint: probability array with one axis per variable
    :type joint: numpy array
    :rtype: BayesNet
    """
    joint = np.asarray(joint, dtype=float)
    n = dag.n_vars
    if joint.ndim != n:
        raise AnbSAKValueError("Joint has %d axes, the structure %d variables" % (joint.ndim, n))
    cpts = []
    for i in range(n):
        family = dag.parents[i].add(i)
        drop = tuple(v for v in range(n) if v not in family)
        marginal = joint.sum(axis=drop) if drop else joint
        counts = jft_to_cft(Jft.from_dense(family, marginal), i).counts
        totals = counts.sum(axis=1, keepdims=True)
        with np.errstate(divide='ignore', invalid='ignore'):
            theta = np.where(totals > 0, counts / totals, 1.0 / counts.shape[1])
        cpts.append(Cpt(i, dag.parents[i], theta))
    return BayesNet(dag, cpts, names, states)


def joint_prob(net, assignment):
    """
    Probability of a complete assignment, the product of one CPT entry per variable

    :param net: network
    :type net: BayesNet
    :param assignment: one state per variable
    :type assignment: sequence of int
    :rtype: float
    """
    data = net._rows(np.asarray(assignment, dtype=np.int64).reshape(1, -1))
    return float(np.exp(sum(net._log_factor(data, i)[0] for i in range(net.n_vars))))


def _with_class_slot(net, features):
    features = np.asarray(features, dtype=np.int64)
    if features.ndim != 1 or features.size != net.n_vars - 1:
        raise AnbSAKValueError("Expected %d feature states, got %s" % (net.n_vars - 1, features.tolist()))
    return np.concatenate(([0], features))


def class_posterior(net, features):
    """
    Posterior distribution of the class given complete feature evidence, computed from the
    factors of the class and its children only

    :param net: network
    :type net: BayesNet
    :param features: one state per feature X1..Xn
    :type features: sequence of int
    :return: posterior over the class states
    :rtype: numpy array
    """
    return net.posterior_batch(_with_class_slot(net, features))[0]


def class_posterior_full(net, features):
    """Class posterior by normalizing the full joint over the class states"""
    log_joint = net.log_joint_by_class(_with_class_slot(net, features))[0]
    return np.exp(log_joint - logsumexp(log_joint))


def predict(net, features):
    """
    Most probable class, ties to the lowest class index

    :rtype: int
    """
    return int(np.argmax(class_posterior(net, features)))
