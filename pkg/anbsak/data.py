"""
Discrete datasets, preprocessing and frequency tables.

Configuration indices are mixed-radix over a set's variables sorted ascending by index, with the
lowest index as the most significant digit.  Frequency tables are numpy arrays whose axes follow
the same order, so ``counts.reshape(-1)`` is indexed by that configuration index.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from anbsak.base import AnbSAKIO
from anbsak.errors import *
from anbsak.varset import VarSet
from anbsak import constants

logger = logging.getLogger(__name__)


class Dataset:
    """
    A complete discrete dataset.  Column 0 is the class variable.
    """

    def __init__(self, data, arities, names=None, states=None, cutoffs=None):
        data = np.array(data, dtype=np.int64)
        if data.ndim == 1 and data.size == 0:
            data = data.reshape(0, len(arities))
        if data.ndim != 2 or data.shape[1] != len(arities):
            raise AnbSAKValueError("Data matrix shape %s does not match %d arities"
                                   % (data.shape, len(arities)))
        self.arities = tuple(int(r) for r in arities)  #: number of states r_i per variable
        if any(r < 2 for r in self.arities):
            raise AnbSAKValueError("Every variable needs at least 2 states, got arities %s" % (self.arities,))
        if data.size > 0:
            if data.min() < 0 or np.any(data.max(axis=0) >= np.array(self.arities)):
                raise AnbSAKValueError("Data contains states outside the variable arities")
        self.data = data
        self.data.setflags(write=False)
        n = len(self.arities)
        self.names = list(names) if names is not None else ['X%d' % i for i in range(n)]  #: variable labels
        if len(self.names) != n:
            raise AnbSAKValueError("Expected %d names, got %d" % (n, len(self.names)))
        if states is None:
            states = [[str(k) for k in range(r)] for r in self.arities]
        self.states = [list(s) for s in states]  #: state labels per variable
        self.cutoffs = dict(cutoffs) if cutoffs else {}  #: median cut-offs of discretized columns, by name

    @property
    def n_vars(self):
        return len(self.arities)

    @property
    def n_rows(self):
        return self.data.shape[0]

    def __len__(self):
        return self.n_rows

    @property
    def rows(self):
        return self.data

    @property
    def class_column(self):
        return self.data[:, constants.CLASS_INDEX]

    def all_vars(self):
        return VarSet.full(self.n_vars)

    def take(self, row_indices):
        """
        Returns a dataset with the given rows (used for cross-validation folds)
        """
        return Dataset(self.data[np.asarray(row_indices, dtype=np.int64)], self.arities,
                       self.names, self.states, self.cutoffs)

    def select(self, variables):
        """
        Returns a dataset restricted to the given variables, in the given order.  The first
        variable becomes the class.

        :param variables: variable indices
        :type variables: sequence of int
        :rtype: Dataset
        """
        variables = list(variables)
        return Dataset(self.data[:, variables], [self.arities[v] for v in variables],
                       [self.names[v] for v in variables], [self.states[v] for v in variables],
                       {self.names[v]: self.cutoffs[self.names[v]] for v in variables
                        if self.names[v] in self.cutoffs})

    def select_names(self, names):
        missing = [nm for nm in names if nm not in self.names]
        if missing:
            raise AnbSAKSchemaError("Dataset lacks variables: %s" % ', '.join(missing))
        return self.select([self.names.index(nm) for nm in names])

    def class_counts(self):
        return np.bincount(self.class_column, minlength=self.arities[constants.CLASS_INDEX])

    def schema(self):
        """
        Column metadata shared with model files

        :return: list of dicts with name, states and optional cutoff
        :rtype: list
        """
        ret = []
        for nm, st in zip(self.names, self.states):
            col = {'name': nm, 'states': list(st)}
            if nm in self.cutoffs:
                col['cutoff'] = self.cutoffs[nm]
            ret.append(col)
        return ret

    def to_json(self):
        return {
            'schema': constants.DATASET_SCHEMA,
            'columns': self.schema(),
            'arities': list(self.arities),
            'rows': self.data.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        if obj.get('schema') != constants.DATASET_SCHEMA:
            raise AnbSAKValueError("Unsupported dataset schema %r" % obj.get('schema'))
        cols = obj['columns']
        cutoffs = {c['name']: c['cutoff'] for c in cols if 'cutoff' in c}
        rows = obj['rows'] if obj['rows'] else np.zeros((0, len(cols)), dtype=np.int64)
        return cls(rows, obj['arities'], [c['name'] for c in cols], [c['states'] for c in cols], cutoffs)

    def save(self, filename):
        try:
            with open(filename, 'w') as f:
                json.dump(self.to_json(), f)
        except OSError as e:
            raise AnbSAKIOError('Unable to write "%s": %s' % (filename, e))

    @classmethod
    def load(cls, filename):
        try:
            with open(filename, 'r') as f:
                return cls.from_json(json.load(f))
        except OSError as e:
            raise AnbSAKIOError('Unable to read "%s": %s' % (filename, e))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.arities == other.arities and self.names == other.names
                and np.array_equal(self.data, other.data))

    def __repr__(self):
        return "Dataset(%d rows, %d variables)" % (self.n_rows, self.n_vars)


def group_rows(keys):
    """
    Distinct rows of an integer matrix in lexicographic order, and the group index of every row

    :param keys: matrix of states, one row per observation
    :type keys: numpy int array of shape (m, k)
    :return: distinct rows, group index of each input row
    :rtype: (numpy int array, numpy int array)
    """
    m, k = keys.shape
    if m == 0:
        return keys, np.zeros(0, dtype=np.int64)
    if k == 0:
        return keys[:1], np.zeros(m, dtype=np.int64)
    order = np.lexsort(keys.T[::-1])
    ordered = keys[order]
    starts = np.ones(m, dtype=bool)
    starts[1:] = np.any(ordered[1:] != ordered[:-1], axis=1)
    inverse = np.empty(m, dtype=np.int64)
    inverse[order] = np.cumsum(starts) - 1
    return ordered[starts], inverse


def _dense_size(arities):
    cells = math.prod(arities)
    if cells > constants.MAX_DENSE_CELLS:
        raise AnbSAKLimitError("A dense view of %d cells exceeds the limit of %d" % (cells, constants.MAX_DENSE_CELLS))
    return cells


@dataclass(frozen=True)
class Jft:
    """
    Joint frequency table over a variable set, stored sparsely: ``keys`` holds the distinct
    observed configurations (one column per variable, ascending variable order, rows in
    lexicographic order) and ``weights`` their counts or probabilities.  Unobserved
    configurations are implicit zeros, so the table never holds more rows than the data.
    """
    vars: VarSet
    arities: tuple
    keys: np.ndarray = field(repr=False, compare=False)
    weights: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_dense(cls, variables, table):
        """
        Sparse table from a dense array with one axis per variable; only positive cells are kept
        """
        table = np.asarray(table)
        keys = np.argwhere(table > 0).astype(np.int64)
        return cls(VarSet(variables), tuple(int(r) for r in table.shape), keys, table[table > 0])

    @property
    def nnz(self):
        """Number of configurations with positive weight"""
        return self.keys.shape[0]

    @property
    def total(self):
        return self.weights.sum().item()

    @property
    def q(self):
        """Size of the configuration index space"""
        return math.prod(self.arities)

    @property
    def counts(self):
        """Dense array with one axis per variable (small tables only)"""
        _dense_size(self.arities)
        dense = np.zeros(self.arities, dtype=self.weights.dtype)
        if self.nnz:
            dense[tuple(self.keys.T)] = self.weights
        return dense

    def flat(self):
        """Counts indexed by the mixed-radix configuration index j"""
        return self.counts.reshape(-1)

    def axis_of(self, v):
        if v not in self.vars:
            raise AnbSAKValueError("Variable %d not in %r" % (v, self.vars))
        return self.vars.to_list().index(v)


@dataclass(frozen=True)
class Cft:
    """
    Conditional frequency table in sparse form.  Every observed cell (parent configuration,
    child state) is one entry: ``cell_parent`` indexes the distinct parent configurations in
    ``parent_keys``, ``cell_state`` is the child state and ``cell_counts`` is N_ijk.  The dense
    view ``counts[j, k]`` uses the mixed-radix parent index j.
    """
    child: int
    parents: VarSet
    parent_arities: tuple
    r: int
    parent_keys: np.ndarray = field(repr=False, compare=False)
    cell_parent: np.ndarray = field(repr=False, compare=False)
    cell_state: np.ndarray = field(repr=False, compare=False)
    cell_counts: np.ndarray = field(repr=False, compare=False)

    @property
    def q(self):
        return math.prod(self.parent_arities)

    def observed_totals(self):
        """N_j for every observed parent configuration, in parent_keys order"""
        return np.bincount(self.cell_parent, weights=self.cell_counts, minlength=self.parent_keys.shape[0])

    @property
    def counts(self):
        _dense_size(self.parent_arities + (self.r,))
        dense = np.zeros((self.q, self.r), dtype=self.cell_counts.dtype)
        if self.cell_counts.size:
            if self.parent_arities:
                j = np.ravel_multi_index(tuple(self.parent_keys.T), self.parent_arities)
            else:
                j = np.zeros(self.parent_keys.shape[0], dtype=np.int64)
            dense[j[self.cell_parent], self.cell_state] = self.cell_counts
        return dense

    def parent_totals(self):
        """N_j for every parent configuration"""
        return self.counts.sum(axis=1)


def jft(dataset, variables):
    """
    Tallies the joint frequencies of a variable set

    :param dataset: data
    :type dataset: Dataset
    :param variables: non-empty variable set
    :type variables: VarSet
    :return: joint frequency table
    :rtype: Jft
    """
    variables = VarSet(variables)
    if not variables:
        raise AnbSAKValueError("Frequency tables need at least one variable")
    cols = variables.to_list()
    if cols[-1] >= dataset.n_vars:
        raise AnbSAKValueError("Variable %d out of range for %d variables" % (cols[-1], dataset.n_vars))
    keys, inverse = group_rows(dataset.data[:, cols])
    counts = np.bincount(inverse, minlength=keys.shape[0]).astype(np.int64)
    return Jft(variables, tuple(dataset.arities[v] for v in cols), keys, counts)


def jft_marginalize(table, drop, mode='anb'):
    """
    Sums a variable out of a joint frequency table

    :param table: joint frequency table
    :type table: Jft
    :param drop: variable to marginalize
    :type drop: int
    :param mode: 'anb' forbids dropping the class variable
    :type mode: str
    :rtype: Jft
    """
    if drop == constants.CLASS_INDEX and mode == 'anb':
        raise AnbSAKValueError("The class variable is never marginalized in ANB mode")
    axis = table.axis_of(drop)
    keys, inverse = group_rows(np.delete(table.keys, axis, axis=1))
    weights = np.bincount(inverse, weights=table.weights, minlength=keys.shape[0]).astype(table.weights.dtype)
    arities = table.arities[:axis] + table.arities[axis + 1:]
    return Jft(table.vars.remove(drop), arities, keys, weights)


def jft_to_cft(table, child):
    """
    Conditions a joint frequency table on all of its variables except the child

    :param table: joint frequency table
    :type table: Jft
    :param child: child variable
    :type child: int
    :rtype: Cft
    """
    axis = table.axis_of(child)
    parent_keys, cell_parent = group_rows(np.delete(table.keys, axis, axis=1))
    return Cft(child, table.vars.remove(child), table.arities[:axis] + table.arities[axis + 1:],
               table.arities[axis], parent_keys, cell_parent, table.keys[:, axis], table.weights)


def cft(dataset, child, parents):
    """
    Conditional frequency table tallied directly from the data
    """
    return jft_to_cft(jft(dataset, VarSet(parents).add(child)), child)


# --------------------------------------------------------------------------------------
#
#  Preprocessing
#
# --------------------------------------------------------------------------------------


def median_cutoff(raw):
    """
    Cut-off for two-bin median discretization.  Values <= cut-off go to state 0.  When no value
    lies above the median the cut-off falls to the next lower distinct value, so both bins are
    non-empty whenever the column has two distinct values.

    :param raw: numeric column
    :type raw: sequence of float
    :return: cut-off
    :rtype: float
    """
    values = np.asarray(raw, dtype=float)
    distinct = np.unique(values)
    if distinct.size < 2:
        raise AnbSAKValueError("Cannot discretize a column with fewer than 2 distinct values")
    cut = float(np.median(values))
    if not np.any(values > cut):
        cut = float(distinct[distinct < cut].max())
    return cut


def discretize_median(raw, cutoff=None):
    """
    Two-bin discretization at the median: value <= median -> 0, value > median -> 1

    :param raw: numeric column
    :type raw: sequence of float
    :param cutoff: cut-off to apply; computed from the column when None
    :type cutoff: float
    :return: discrete column
    :rtype: numpy int array
    """
    values = np.asarray(raw, dtype=float)
    if cutoff is None:
        cutoff = median_cutoff(values)
    return (values > cutoff).astype(np.int64)


def _as_float(token):
    try:
        return float(token)
    except ValueError:
        return None


def _is_numeric(tokens):
    return all(_as_float(t) is not None for t in tokens)


class CsvIO(AnbSAKIO):
    """
    CSV import/export for discrete datasets.  Options (all keywords):

    * class_column: name of the class column (default: first column)
    * missing_marker: token marking a missing value; rows containing it are dropped (default '?')
    * discretize: 'auto', 'none', or a list of column names to median-discretize
    * max_states: in 'auto' mode, numeric columns with more distinct values are discretized
    * ignore_columns: column names to drop (e.g. row ids)
    * delimiter: field delimiter (default ',')
    """

    @classmethod
    def cts_type(cls):
        return 'CSV'

    def __init__(self):
        AnbSAKIO.__init__(self)
        self.set_options(missing_marker=constants.DEFAULT_MISSING_MARKER,
                         discretize='auto',
                         max_states=constants.DEFAULT_MAX_STATES,
                         ignore_columns=(),
                         delimiter=',')

    def read_table(self, filename):
        """
        Reads header and rows, dropping rows that contain the missing marker

        :return: header, rows
        :rtype: (list of str, list of list of str)
        """
        marker = self.get_option('missing_marker')
        try:
            with open(filename, 'r', newline='') as f:
                reader = csv.reader(f, delimiter=self.get_option('delimiter'))
                table = [[c.strip() for c in row] for row in reader if len(row) > 0]
        except OSError as e:
            raise AnbSAKIOError('Unable to read "%s": %s' % (filename, e))
        except csv.Error as e:
            raise AnbSAKIOError('Malformed CSV "%s": %s' % (filename, e))
        if len(table) == 0:
            raise AnbSAKValueError('"%s" has no header row' % filename)
        header, body = table[0], table[1:]
        for i, row in enumerate(body):
            if len(row) != len(header):
                raise AnbSAKValueError('"%s" row %d has %d fields, header has %d'
                                       % (filename, i + 2, len(row), len(header)))
        kept = [row for row in body if marker not in row]
        if len(kept) < len(body):
            logger.info('Removed %d of %d rows containing "%s"', len(body) - len(kept), len(body), marker)
        return header, kept

    def to_dataset(self, filename, **kwargs):
        """
        Imports a CSV file.  The class column is moved to index 0, categorical values are coded in
        first-appearance order and numeric columns are median-discretized per the options.

        :param filename: CSV file with a header row
        :type filename: str
        :rtype: Dataset
        """
        self.set_options(**kwargs)
        header, rows = self.read_table(filename)
        class_column = self.get_option('class_column') or header[0]
        if class_column not in header:
            raise AnbSAKValueError('Class column "%s" not found in "%s"' % (class_column, filename))
        ignore = set(self.get_option('ignore_columns') or ())
        order = [header.index(class_column)] + [i for i, h in enumerate(header)
                                                 if h != class_column and h not in ignore]
        discretize = self.get_option('discretize')
        max_states = self.get_option('max_states')

        names, arities, states, cutoffs, columns = [], [], [], {}, []
        for pos, i in enumerate(order):
            name = header[i]
            tokens = [row[i] for row in rows]
            if pos > 0 and self._should_discretize(name, tokens, discretize, max_states):
                try:
                    cut = median_cutoff([float(t) for t in tokens])
                except AnbSAKValueError:
                    raise AnbSAKValueError('Column "%s" has fewer than 2 distinct values' % name)
                column = discretize_median([float(t) for t in tokens], cut)
                labels = ['<=%g' % cut, '>%g' % cut]
                cutoffs[name] = cut
                logger.warning('Discretized column "%s" at median %g', name, cut)
            else:
                labels = list(dict.fromkeys(tokens))
                index = {lab: k for k, lab in enumerate(labels)}
                column = np.array([index[t] for t in tokens], dtype=np.int64)
            if len(labels) < 2:
                raise AnbSAKValueError('Column "%s" has fewer than 2 distinct values' % name)
            names.append(name)
            arities.append(len(labels))
            states.append(labels)
            columns.append(column)
        data = np.stack(columns, axis=1) if rows else np.zeros((0, len(order)), dtype=np.int64)
        ds = Dataset(data, arities, names, states, cutoffs)
        logger.debug('Read %r from "%s"', ds, filename)
        return ds

    @staticmethod
    def _should_discretize(name, tokens, discretize, max_states):
        if discretize == 'none' or not tokens:
            return False
        if discretize == 'auto':
            return _is_numeric(tokens) and len(set(float(t) for t in tokens)) > max_states
        return name in discretize

    def to_dataset_with_schema(self, filename, schema, **kwargs):
        """
        Imports a CSV file using a stored schema (names, state labels, cut-offs) so that states
        are coded exactly as in training.  The class column may be absent.

        :param filename: CSV file with a header row
        :type filename: str
        :param schema: column metadata as produced by Dataset.schema(); entry 0 is the class
        :type schema: list of dict
        :return: dataset and whether class labels were present
        :rtype: (Dataset, bool)
        """
        self.set_options(**kwargs)
        header, rows = self.read_table(filename)
        missing = [c['name'] for c in schema[1:] if c['name'] not in header]
        if missing:
            raise AnbSAKSchemaError('"%s" lacks model variables: %s' % (filename, ', '.join(missing)))
        has_class = schema[0]['name'] in header
        columns, bad = [], []
        for pos, col in enumerate(schema):
            if pos == 0 and not has_class:
                columns.append(np.zeros(len(rows), dtype=np.int64))
                continue
            i = header.index(col['name'])
            tokens = [row[i] for row in rows]
            if 'cutoff' in col:
                values = [_as_float(t) for t in tokens]
                if any(v is None for v in values):
                    bad.append(col['name'])
                    continue
                columns.append(discretize_median(values, col['cutoff']))
            else:
                index = {lab: k for k, lab in enumerate(col['states'])}
                unknown = sorted(set(t for t in tokens if t not in index))
                if unknown:
                    bad.append('%s (unknown states %s)' % (col['name'], ', '.join(unknown)))
                    continue
                columns.append(np.array([index[t] for t in tokens], dtype=np.int64))
        if bad:
            raise AnbSAKSchemaError('"%s" does not match the model: %s' % (filename, '; '.join(bad)))
        data = np.stack(columns, axis=1) if rows else np.zeros((0, len(schema)), dtype=np.int64)
        ds = Dataset(data, [len(c['states']) for c in schema], [c['name'] for c in schema],
                     [c['states'] for c in schema], {c['name']: c['cutoff'] for c in schema if 'cutoff' in c})
        return ds, has_class

    def to_file(self, dataset, filename, **kwargs):
        """
        Writes a dataset as CSV using its state labels
        """
        self.set_options(**kwargs)
        try:
            with open(filename, 'w', newline='') as f:
                writer = csv.writer(f, delimiter=self.get_option('delimiter'))
                writer.writerow(dataset.names)
                for row in dataset.data:
                    writer.writerow(dataset.states[v][s] for v, s in enumerate(row))
        except OSError as e:
            raise AnbSAKIOError('Unable to write "%s": %s' % (filename, e))
        return True


def ingest_csv(path, class_column, missing_marker=constants.DEFAULT_MISSING_MARKER, **kwargs):
    """
    Reads a CSV file into a Dataset with the class column first

    :param path: CSV file with header
    :type path: str
    :param class_column: class column name
    :type class_column: str
    :param missing_marker: token marking missing values
    :type missing_marker: str
    :rtype: Dataset
    """
    return CsvIO().to_dataset(path, class_column=class_column, missing_marker=missing_marker, **kwargs)


def fold_assignment(class_column, folds, seed, stratified=True):
    """
    Seeded fold labels for cross-validation.  Rows are shuffled, grouped by class and dealt to
    the folds round-robin with one counter across classes, so fold sizes differ by at most one
    and every class is spread evenly.  When a class has fewer rows than there are folds the
    split falls back to an unstratified deal, with a warning.

    :param class_column: class state of every row
    :type class_column: numpy int array
    :param folds: number of folds, at least 2
    :type folds: int
    :param seed: shuffle seed
    :type seed: int
    :param stratified: deal class by class
    :type stratified: bool
    :return: fold label of every row and whether the deal was stratified
    :rtype: (numpy int array, bool)
    """
    class_column = np.asarray(class_column, dtype=np.int64)
    n = class_column.size
    if folds < 2:
        raise AnbSAKValueError("Cross-validation needs at least 2 folds, got %d" % folds)
    if n < folds:
        raise AnbSAKValueError("%d rows cannot fill %d folds" % (n, folds))
    order = np.random.default_rng(seed).permutation(n)
    if stratified:
        present = np.bincount(class_column)
        present = present[present > 0]
        if present.min() < folds:
            logger.warning('Smallest class has %d rows, fewer than %d folds; using an unstratified split',
                           present.min(), folds)
            stratified = False
    if stratified:
        order = order[np.argsort(class_column[order], kind='stable')]
    labels = np.empty(n, dtype=np.int64)
    labels[order] = np.arange(n) % folds
    return labels, stratified
