import math
from anbsak.errors import *
from anbsak import constants


class AnbSAKBase:
    @classmethod
    def cts_type(cls):
        return 'AnbSAKBase'

    def __init__(self):
        self._options = {}

    def get_option(self, arg, default=None):
        """
        Get an option

        :param arg: option name
        :type arg: str
        :param default: default value
        :type default: type of option
        :return: value of option
        :rtype: option type
        """
        if arg in self._options:
            return self._options[arg]
        return default

    def get_options(self):
        """
        Get a dictionary of all current options

        :return: options
        :rtype: dict
        """
        return self._options

    def set_options(self, **kwargs):
        """
        Set options.  All option keywords are converted to lowercase.

        :param kwargs: options
        :type kwargs: keyword options
        """
        for op, val in kwargs.items():
            self._options[op.lower()] = val


class AnbSAKIO(AnbSAKBase):
    @classmethod
    def cts_type(cls):
        return 'IO'

    def __init__(self):
        AnbSAKBase.__init__(self)

    def to_dataset(self, filename, **kwargs):
        """
        Imports a file into a Dataset

        :param filename: filename to import
        :type filename: str
        :param kwargs: Keyword options for the particular I/O class
        :return: dataset
        :rtype: data.Dataset
        """
        raise AnbSAKNotImplemented("Not implemented")

    def to_file(self, dataset, filename, **kwargs):
        """
        Writes a dataset to a file

        :param dataset: dataset to export
        :type dataset: data.Dataset
        :param filename: Name of output file
        :type filename: str
        :param kwargs: Keyword options for the particular I/O class
        :return: True on success
        :rtype: bool
        """
        raise AnbSAKNotImplemented("Not implemented")


class AnbSAKLearner(AnbSAKBase):
    @classmethod
    def cts_type(cls):
        return 'Learner'

    def __init__(self):
        AnbSAKBase.__init__(self)
        self.last_metadata = {}  #: Metadata (score, counters, removed variables) of the last fit

    def fit(self, dataset, **kwargs):
        """
        Learns a classifier from a dataset

        :param dataset: training data; variable 0 is the class
        :type dataset: data.Dataset
        :param kwargs: Keyword options for the particular learner
        :return: fitted network
        :rtype: model.BayesNet
        """
        raise AnbSAKNotImplemented("Learning not implemented")


# --------------------------------------------------------------------------------------
#
#  Utility functions
#
# --------------------------------------------------------------------------------------


def scores_tied(a, b, rel_tol=constants.SCORE_TIE_TOLERANCE):
    """
    Two log scores are tied when they agree within a relative tolerance.  Ties are then
    resolved by the deterministic tie rules of the caller.

    :param a: log score
    :type a: float
    :param b: log score
    :type b: float
    :return: True if tied
    :rtype: bool
    """
    return math.isclose(a, b, rel_tol=rel_tol, abs_tol=rel_tol)


def is_better(candidate, incumbent):
    """
    True if candidate beats incumbent by more than the tie tolerance

    :param candidate: log score
    :type candidate: float
    :param incumbent: log score
    :type incumbent: float
    :rtype: bool
    """
    return candidate > incumbent and not scores_tied(candidate, incumbent)


def parse_number_list(text, kind=float):
    """
    Parses a comma-separated list such as '100,1000,10000'

    :param text: list text
    :type text: str
    :param kind: element constructor
    :type kind: type
    :return: values
    :rtype: list
    """
    try:
        return [kind(t) for t in text.split(',') if t.strip() != '']
    except ValueError:
        raise AnbSAKValueError('Illegal number list "%s"' % text)
