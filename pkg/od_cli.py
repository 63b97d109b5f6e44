#! python
"""
Command line entry point:

    od_cli.py simulate   --config sim.ini --out data/ --seed 3
    od_cli.py estimate   --config est.ini --dataset data/ --out est/
    od_cli.py experiment --config grid.ini --out grid/ --threads 4
    od_cli.py summarize  --dataset est/ [--prob 0.9]

Exit codes: 0 success, 2 bad usage or input, 3 numerical failure.
"""
import argparse
import logging
import sys

from od_dlm import JOBS, __version__, setup_logging
from od_errors import ConfigError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser():
    parser = argparse.ArgumentParser(prog="od_cli.py",
                                     description="Day-to-day OD demand estimation from link counts")
    parser.add_argument("command", choices=list(JOBS))
    parser.add_argument("--config", help="control file (ConfigObj format)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="overrides SEED")
    parser.add_argument("--threads", type=int, help="worker processes for experiment cells")
    parser.add_argument("--dataset", help="dataset directory (estimate) or result directory (summarize)")
    parser.add_argument("--prob", type=float, help="HPD probability, overrides HPD_PROB")
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    return parser


def main(argv=None):
    # argparse exits with status 2 on usage errors
    args = build_parser().parse_args(argv)
    setup_logging()
    logger = logging.getLogger("od_dlm")

    options = dict(out=args.out, seed=args.seed, threads=args.threads, dataset=args.dataset, prob=args.prob)
    try:
        job = JOBS[args.command](args.config, options)
        job.run()
    except (ConfigError, ValueError, KeyError, OSError) as e:
        logger.error("%s: %s", args.command, e)
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error("%s: numerical failure: %s", args.command, e)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
