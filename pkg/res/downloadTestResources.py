# Download UCI datasets used by the cross-validation spot checks in tests/acceptanceTest.py.
# They don't belong in the github code base; the library itself never downloads anything.
#
# Each file is fetched once, converted to CSV with a header row and written to tests/data/uci/.

import argparse
import csv
import os
import time
from dataclasses import dataclass
from random import uniform

import requests

from anbsak.constants import project_to_absolute_path
from anbsak.errors import AnbSAKIOError

UCI_BASE = 'https://archive.ics.uci.edu/ml/machine-learning-databases'
DOWNLOAD_DIR = 'tests/data/uci'
USER_AGENT = 'anbsak-test-resources (+https://archive.ics.uci.edu)'


def monks_row(line):
    # " 1 1 1 1 3 1 1 data_5": class, a1..a6, id
    tokens = line.split()
    return tokens[:7] if len(tokens) >= 7 else None


def balance_row(line):
    # "B,1,1,1,1": class, left weight, left distance, right weight, right distance
    tokens = [t.strip() for t in line.split(',')]
    return tokens if len(tokens) == 5 else None


@dataclass(frozen=True)
class UciResource:
    url: str
    csv_name: str
    header: tuple
    convert: object  # raw line -> CSV row, or None to skip the line

    def target(self, directory=DOWNLOAD_DIR):
        return os.path.join(project_to_absolute_path(directory), self.csv_name)


RESOURCES = (
    # MONK's problem 1; the test file holds all 432 attribute combinations
    UciResource(UCI_BASE + '/monks-problems/monks-1.test', 'monks.csv',
                ('class', 'a1', 'a2', 'a3', 'a4', 'a5', 'a6'), monks_row),
    UciResource(UCI_BASE + '/balance-scale/balance-scale.data', 'balance.csv',
                ('class', 'left_weight', 'left_distance', 'right_weight', 'right_distance'), balance_row),
)


def fetch_text(url):
    try:
        response = requests.get(url, headers={'User-Agent': USER_AGENT}, timeout=60)
        response.raise_for_status()
    except requests.exceptions.RequestException as e:
        raise AnbSAKIOError('Unable to download "%s": %s' % (url, e))
    text = response.content.decode('ascii', errors='replace')
    if '<html' in text[:200].lower():
        raise AnbSAKIOError('"%s" returned an HTML page instead of data' % url)
    return text


def write_csv(resource, text, path):
    rows = [resource.convert(line) for line in text.splitlines() if line.strip()]
    rows = [r for r in rows if r is not None]
    if not rows:
        raise AnbSAKIOError('No data rows recognized in "%s"' % resource.url)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, 'w', newline='') as out_file:
        writer = csv.writer(out_file)
        writer.writerow(resource.header)
        writer.writerows(rows)
    return len(rows)


def fetch_all(resources=RESOURCES, overwrite=False):
    """
    Downloads and converts every resource.  Returns the number of failures.
    """
    failures = 0
    for k, resource in enumerate(resources):
        path = resource.target()
        if os.path.isfile(path) and not overwrite:
            print('"%s" exists, skipping' % path)
            continue
        if k > 0:
            time.sleep(uniform(1.5, 2.8))  # one request every couple of seconds
        print('%s -> %s' % (resource.url, path))
        try:
            n = write_csv(resource, fetch_text(resource.url), path)
        except (AnbSAKIOError, OSError) as e:
            print('Warning: %s' % e)
            failures += 1
            continue
        print('  %d rows' % n)
    return failures


def main():
    parser = argparse.ArgumentParser(description="Fetch the UCI files used by the acceptance tests.")
    parser.add_argument('--overwrite', action='store_true', help='download again even if the CSV exists')
    args = parser.parse_args()
    return 1 if fetch_all(overwrite=args.overwrite) else 0


if __name__ == "__main__":
    raise SystemExit(main())
