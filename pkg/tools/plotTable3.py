# Plot median SHD and class-posterior KLD against sample size from a bench --suite table3 JSON report

import argparse
import json
import sys

import matplotlib.pyplot as plt


def plot_report(report, out_file=None):
    medians = report['medians']
    sizes = [m['size'] for m in medians]
    fig = plt.figure(figsize=(10, 4))
    fig.patch.set_alpha(0.0)

    ax = fig.add_subplot(121)
    ax.grid(True, which='both', axis='both', zorder=0)
    ax.tick_params(axis='both', direction='in')
    ax.plot(sizes, [m['shd'] for m in medians], color='r', marker='o', label='median SHD')
    ax.set_xscale('log')
    ax.set_xlabel('sample size')
    ax.set_ylabel('SHD to reference ANB')
    ax.set_ylim(bottom=0)
    ax.legend()

    ax = fig.add_subplot(122)
    ax.grid(True, which='both', axis='both', zorder=0)
    ax.tick_params(axis='both', direction='in')
    # zero divergences would vanish on the log axis
    floor = 1e-12
    ax.plot(sizes, [max(m['kld'], floor) for m in medians], color='b', marker='o', label='KLD (refit truth)')
    ax.plot(sizes, [max(m['kld_true'], floor) for m in medians], color='g', marker='s', label='KLD (true CPTs)')
    ax.set_xscale('log')
    ax.set_yscale('log')
    ax.set_xlabel('sample size')
    ax.set_ylabel('class posterior KLD')
    ax.legend()

    fig.suptitle("%s, N'=%g, %d seeds" % (report['network'], report['ess'], len(report['seeds'])))
    if out_file:
        fig.savefig(out_file)
    else:
        plt.show()


def main():
    parser = argparse.ArgumentParser(description="Plot a sample-size experiment report.")
    parser.add_argument('report', help='JSON report written by anbsak bench --suite table3 --json')
    parser.add_argument('-o', '--output', help='image file to write instead of showing the plot')
    args = parser.parse_args()

    try:
        with open(args.report) as f:
            report = json.load(f)
    except (IOError, json.JSONDecodeError) as e:
        print('Error: Can\'t read "%s": %s' % (args.report, e))
        sys.exit(1)
    if report.get('kind') != 'table3':
        print('Error: "%s" is not a sample-size report' % args.report)
        sys.exit(2)

    plot_report(report, args.output)


if __name__ == '__main__':
    main()
