# Dump the local score table of a CSV file, one 'child<TAB>parent bitmask<TAB>score' line per entry

import argparse
import sys

from anbsak.data import ingest_csv
from anbsak.errors import AnbSAKException
from anbsak.scoring import BdeuConfig, build_score_table


def main():
    parser = argparse.ArgumentParser(description="Dump BDeu local scores for debugging.")
    parser.add_argument('data', help='CSV file with a header row')
    parser.add_argument('--class-column', required=True, help='name of the class column')
    parser.add_argument('-m', '--mode', choices=('anb', 'gbn'), default='anb', help='parent-set space')
    parser.add_argument('--ess', type=float, default=1.0, help="equivalent sample size N'")
    args = parser.parse_args()

    try:
        dataset = ingest_csv(args.data, args.class_column)
        table = build_score_table(dataset, args.mode, BdeuConfig(args.ess))
    except AnbSAKException as e:
        print('Error: %s' % e, file=sys.stderr)
        sys.exit(2)

    print('# %s: %s, %s mode, %d local scores' % (args.data, ', '.join(dataset.names), args.mode,
                                                  table.eval_counter))
    table.dump(sys.stdout)


if __name__ == '__main__':
    main()
