from .data import Dataset, CsvIO
from .graph import Dag
from .scoring import BdeuConfig, LocalScoreTable
from .search import ExactLearner, NaiveBayesLearner, learn_exact
from .model import BayesNet
from .fsel import FsAnbLearner, FselConfig
