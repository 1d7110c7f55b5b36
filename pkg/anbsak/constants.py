# Constants for anbsak
#

import os
from pathlib import Path


# Version information.  Update BUILD_VERSION with every significant bugfix;
# update MINOR_VERSION with every feature addition
MAJOR_VERSION = 0
MINOR_VERSION = 2
BUILD_VERSION = 0

ANBSAK_VERSION = f"{MAJOR_VERSION}.{MINOR_VERSION}.{BUILD_VERSION}"
ANBSAK_RELEASE = f"{MAJOR_VERSION}.{MINOR_VERSION}"

# Schema tags written into every JSON artifact
MODEL_SCHEMA = 'anbsak-model/1'
DAG_SCHEMA = 'anbsak-dag/1'
DATASET_SCHEMA = 'anbsak-dataset/1'
REPORT_SCHEMA = 'anbsak-report/1'
SELECTION_SCHEMA = 'anbsak-selection/1'

CLASS_INDEX = 0

# BDeu equivalent sample size used for structure learning and EAP estimation
DEFAULT_ESS = 1.0

# Hyperparameter grids for Bayes-factor feature selection
DEFAULT_ESS_GRID = (1.0, 2.0, 5.0)
DEFAULT_DELTA_GRID = (3.0, 20.0, 150.0)

# Exact search tables hold O(n 2^n) entries
MAX_VARS = 26
# Largest dense view (Jft.counts, Cft.counts) of a sparse frequency table
MAX_DENSE_CELLS = 1 << 24

# Exhaustive-enumeration oracles
MAX_ENUMERATE_GBN = 5
MAX_ENUMERATE_ANB = 6
MAX_KLD_VARS = 12
MAX_REFERENCE_VARS = 8

DEFAULT_MISSING_MARKER = '?'
DEFAULT_MAX_STATES = 10  # numeric columns with more distinct values are median-discretized

DEFAULT_FOLDS = 10
DEFAULT_SEED = 0
DEFAULT_SELECTION_FOLDS = 2

# Two scores closer than this (relative) count as tied
SCORE_TIE_TOLERANCE = 1e-13
# Reconstructed-score consistency check in best_net
RECONSTRUCTION_TOLERANCE = 1e-6
# Conditional-independence and factorization checks against exact joints
INDEPENDENCE_TOLERANCE = 1e-9

# Effective sample size of the large-sample score used to find reference ANBs
LARGE_SAMPLE_SIZE = 1e8

TABLE3_SIZES = (100, 500, 1000, 5000, 10000, 50000, 100000)
TABLE3_NETWORKS = {
    'cancer': 'cancer.json',
    'asia': 'asia.json',
}

FIXTURE_DIR_ENV = 'ANBSAK_FIXTURE_DIR'


def project_to_absolute_path(file_path):
    """Returns project root folder"""
    return os.path.normpath(os.path.join(Path(__file__).parent.parent.absolute(), file_path))


def fixture_dir():
    """
    Directory holding the fixture networks.  The ANBSAK_FIXTURE_DIR environment variable overrides
    the bundled res/networks folder.

    :return: directory path
    :rtype: str
    """
    override = os.environ.get(FIXTURE_DIR_ENV)
    if override:
        return os.path.normpath(override)
    return project_to_absolute_path('res/networks')
