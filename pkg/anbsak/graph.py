"""
DAG algebra: acyclic parent-set assignments, d-separation, Markov equivalence, Markov blankets,
structural Hamming distance and the transform that roots a DAG at the class variable while
preserving its class posterior.
"""

import itertools
import json

import numpy as np

from anbsak.errors import *
from anbsak.varset import VarSet
from anbsak import constants


def _as_varset(p):
    if isinstance(p, (int, np.integer)):
        return VarSet(int(p))
    return VarSet.from_iterable(p)


class Dag:
    """
    Immutable directed acyclic graph stored as one parent VarSet per variable.  Parent sets may be
    given as VarSets/int masks or as iterables of variable indices.  Acyclicity is checked on
    construction.
    """

    def __init__(self, parents):
        self.parents = tuple(_as_varset(p) for p in parents)  #: parent set of every variable
        n = len(self.parents)
        full = (1 << n) - 1
        for i, p in enumerate(self.parents):
            if int(p) & ~full:
                raise AnbSAKValueError("X%d has a parent outside the %d variables" % (i, n))
            if i in p:
                raise AnbSAKValueError("X%d cannot be its own parent" % i)
        self._order = self._topological_order()
        if self._order is None:
            raise AnbSAKValueError("Parent sets contain a directed cycle")
        children = [0] * n
        for i, p in enumerate(self.parents):
            for q in p:
                children[q] |= 1 << i
        self.children = tuple(VarSet(c) for c in children)  #: child set of every variable

    @classmethod
    def empty(cls, n_vars):
        return cls([VarSet()] * n_vars)

    @classmethod
    def from_edges(cls, n_vars, edges):
        """
        Builds a DAG from (parent, child) pairs
        """
        parents = [0] * n_vars
        for a, b in edges:
            parents[b] |= 1 << a
        return cls(parents)

    def _topological_order(self):
        # Kahn's algorithm, always releasing the lowest available index
        n = len(self.parents)
        remaining = [int(p) for p in self.parents]
        placed = 0
        order = []
        while len(order) < n:
            ready = [i for i in range(n) if not (placed >> i) & 1 and remaining[i] & ~placed == 0]
            if not ready:
                return None
            order.append(ready[0])
            placed |= 1 << ready[0]
        return tuple(order)

    @property
    def n_vars(self):
        return len(self.parents)

    def topological_order(self):
        return list(self._order)

    def edges(self):
        """Set of (parent, child) pairs"""
        return {(p, i) for i, ps in enumerate(self.parents) for p in ps}

    def num_edges(self):
        return sum(len(p) for p in self.parents)

    def skeleton(self):
        """Set of undirected edges as frozensets"""
        return {frozenset(e) for e in self.edges()}

    def adjacent(self, a, b):
        return a in self.parents[b] or b in self.parents[a]

    def vstructures(self):
        """
        Convergence connections a -> c <- b with a, b non-adjacent, as (min(a, b), c, max(a, b))
        """
        ret = set()
        for c, ps in enumerate(self.parents):
            for a, b in itertools.combinations(ps.to_list(), 2):
                if not self.adjacent(a, b):
                    ret.add((a, c, b))
        return ret

    def ancestors(self, variables):
        """
        Ancestors of a variable set, excluding the set itself unless reachable
        """
        result = 0
        frontier = [p for v in VarSet(variables) for p in self.parents[v]]
        while frontier:
            v = frontier.pop()
            if (result >> v) & 1:
                continue
            result |= 1 << v
            frontier.extend(self.parents[v])
        return VarSet(result)

    def is_anb(self):
        """
        ANB constraint: the class has no parents and is a parent of every feature
        """
        c = constants.CLASS_INDEX
        if self.parents[c]:
            return False
        return all(c in self.parents[i] for i in range(self.n_vars) if i != c)

    def with_parents(self, child, parents):
        ps = list(self.parents)
        ps[child] = _as_varset(parents)
        return Dag(ps)

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.parents == other.parents

    def __hash__(self):
        return hash(self.parents)

    def __repr__(self):
        edges = ', '.join('%d->%d' % e for e in sorted(self.edges()))
        return "Dag(%d vars: %s)" % (self.n_vars, edges)

    def to_json(self, names=None):
        """
        JSON-ready description with variable names and sorted parent lists
        """
        names = names or ['X%d' % i for i in range(self.n_vars)]
        return {
            'schema': constants.DAG_SCHEMA,
            'variables': [{'name': names[i], 'parents': [names[p] for p in ps]}
                          for i, ps in enumerate(self.parents)],
        }

    @classmethod
    def from_json(cls, obj):
        if obj.get('schema') != constants.DAG_SCHEMA:
            raise AnbSAKValueError("Unsupported DAG schema %r" % obj.get('schema'))
        names = [v['name'] for v in obj['variables']]
        try:
            return cls([[names.index(p) for p in v['parents']] for v in obj['variables']])
        except ValueError:
            raise AnbSAKValueError("DAG refers to an unknown parent")

    def dumps(self, names=None):
        return json.dumps(self.to_json(names), indent=2)

    def to_dot(self, names=None, name='G'):
        """
        GraphViz dot source; the class variable is drawn as a double circle
        """
        names = names or ['X%d' % i for i in range(self.n_vars)]
        lines = ['digraph %s {' % name]
        for i, nm in enumerate(names):
            shape = 'doublecircle' if i == constants.CLASS_INDEX else 'ellipse'
            lines.append('  "%s" [shape=%s];' % (nm, shape))
        for a, b in sorted(self.edges()):
            lines.append('  "%s" -> "%s";' % (names[a], names[b]))
        lines.append('}')
        return '\n'.join(lines) + '\n'


def is_acyclic(parents):
    try:
        Dag(parents)
    except AnbSAKValueError:
        return False
    return True


def d_separated(dag, x, y, z=VarSet()):
    """
    True if every path between x and y is blocked by z.  Reachability over active trails
    (Bayes ball): a trail passes a non-collider outside z, and a collider that is in z or has a
    descendant in z.

    :param dag: graph
    :type dag: Dag
    :param x: variable
    :type x: int
    :param y: variable
    :type y: int
    :param z: conditioning set excluding x and y
    :type z: VarSet
    :rtype: bool
    """
    z = VarSet(z) if isinstance(z, int) else VarSet.from_iterable(z)
    if x == y:
        raise AnbSAKValueError("d-separation needs two distinct variables")
    if x in z or y in z:
        raise AnbSAKValueError("Conditioning set must exclude X%d and X%d" % (x, y))
    # colliders that open when conditioned: z and its ancestors
    opened = int(z) | int(dag.ancestors(z))
    from_child, from_parent = 0, 1
    schedule = [(x, from_child)]
    visited = set()
    while schedule:
        node, direction = schedule.pop()
        if node == y:
            return False
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        in_z = node in z
        if direction == from_child and not in_z:
            schedule.extend((p, from_child) for p in dag.parents[node])
            schedule.extend((c, from_parent) for c in dag.children[node])
        elif direction == from_parent:
            if (opened >> node) & 1:
                schedule.extend((p, from_child) for p in dag.parents[node])
            if not in_z:
                schedule.extend((c, from_parent) for c in dag.children[node])
    return True


def markov_equivalent(g1, g2):
    """
    Markov equivalence: identical skeletons and identical convergence connections

    :rtype: bool
    """
    if g1.n_vars != g2.n_vars:
        raise AnbSAKValueError("Graphs have different variable counts")
    return g1.skeleton() == g2.skeleton() and g1.vstructures() == g2.vstructures()


def markov_blanket(dag, v):
    """
    Parents, children and the children's other parents of v

    :rtype: VarSet
    """
    mb = dag.parents[v] | dag.children[v]
    for c in dag.children[v]:
        mb = mb | dag.parents[c]
    return mb.discard(v)


def anb_transform(dag, prune=True):
    """
    Makes the class variable a root without changing the class posterior:

    1. every pair of class parents is made adjacent, oriented along the input's topological
       order;
    2. every edge from a class parent into the class is reversed.

    With prune=True, arcs entering a class parent from outside the class parents are dropped
    first.  Only the pruned form keeps the refitted class posterior equal to the input's.

    :param dag: input structure
    :type dag: Dag
    :param prune: drop arcs entering class parents from outside
    :type prune: bool
    :rtype: Dag
    """
    c = constants.CLASS_INDEX
    pa0 = dag.parents[c]
    if not pa0:
        return dag
    position = {v: k for k, v in enumerate(dag.topological_order())}
    parents = [int(p) for p in dag.parents]
    if prune:
        for p in pa0:
            parents[p] &= int(pa0)
    members = sorted(pa0, key=lambda v: position[v])
    for a, b in itertools.combinations(members, 2):
        if not ((parents[b] >> a) & 1 or (parents[a] >> b) & 1):
            parents[b] |= 1 << a
    for p in pa0:
        parents[p] |= 1 << c
    parents[c] = 0
    return Dag(parents)


def shd(g1, g2):
    """
    Structural Hamming distance at the DAG level: one per edge present in exactly one graph,
    one per shared edge with opposite orientation

    :rtype: int
    """
    if g1.n_vars != g2.n_vars:
        raise AnbSAKValueError("Graphs have different variable counts")
    e1, e2 = g1.edges(), g2.edges()
    distance = 0
    for a, b in itertools.combinations(range(g1.n_vars), 2):
        in1 = {(a, b), (b, a)} & e1
        in2 = {(a, b), (b, a)} & e2
        if bool(in1) != bool(in2):
            distance += 1
        elif in1 and in1 != in2:
            distance += 1
    return distance


def num_parameters(dag, arities):
    """
    Free parameters of a discrete network: sum_i (r_i - 1) q_i
    """
    return sum((arities[i] - 1) * int(np.prod([arities[p] for p in ps], dtype=np.int64))
               for i, ps in enumerate(dag.parents))


def random_dag(n_vars, rng, edge_prob=0.5):
    """
    Random DAG: a random variable order with each forward edge present with edge_prob

    :param rng: random generator
    :type rng: numpy.random.Generator
    :rtype: Dag
    """
    order = rng.permutation(n_vars)
    parents = [0] * n_vars
    for i in range(n_vars):
        for j in range(i + 1, n_vars):
            if rng.random() < edge_prob:
                parents[order[j]] |= 1 << int(order[i])
    return Dag(parents)
