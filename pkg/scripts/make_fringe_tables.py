#!/usr/bin/env python3
"""Coincidence-fringe tables for the optimal and N00N probes at one loss level.

Writes one CSV per probe kind with per-setting label probabilities over a full
phase scan (the calibration-scan view of the apparatus).
"""

import argparse
import sys

from lossyphase.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--eta", type=float, default=0.361)
    parser.add_argument("--phi-steps", type=int, default=201)
    parser.add_argument("--out-prefix", default="fringes")
    args = parser.parse_args()
    for probe in ("optimal", "noon"):
        rc = cli_main(
            [
                "fringes",
                "--eta",
                str(args.eta),
                "--probe",
                probe,
                "--phi-steps",
                str(args.phi_steps),
                "--out",
                f"{args.out_prefix}_{probe}.csv",
            ]
        )
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
