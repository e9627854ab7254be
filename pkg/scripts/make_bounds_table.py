#!/usr/bin/env python3
"""Precision-bound and optimal-weight tables over the transmission range.

Produces one CSV with the optimal, N00N and SIL precision curves together with
the optimal weights and the preparation success probability (the data behind
the weight and precision figures).
"""

import argparse
import sys

from lossyphase.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="bounds.csv")
    parser.add_argument("--steps", type=int, default=96)
    args = parser.parse_args()
    return cli_main(
        [
            "bounds",
            "--eta-min",
            "0.05",
            "--eta-max",
            "1.0",
            "--steps",
            str(args.steps),
            "--out",
            args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
