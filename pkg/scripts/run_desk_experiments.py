#!/usr/bin/env python3
"""Desk-scale benchmark pass: the two comparison figures plus diagnostics.

Runs, at the default 30x300 size (seconds of runtime):
  * compare-md with the conservative adaptive schedule,
  * compare-md with stepsizes scaled up 30x,
  * the initialization sweep,
  * flow-check and constants on a tiny 3x8 instance.

Outputs land under results/desk/.
"""

import sys

from dlnlp.bench_cli import main

RUNS = [
    ["compare-md", "--out", "results/desk/compare_conservative"],
    ["compare-md", "--stepsize", "scaled:30", "--out", "results/desk/compare_scaled30"],
    ["sweep-init", "--out", "results/desk/sweep"],
    ["flow-check", "--gen", "3,8,0", "--out", "results/desk/flow"],
    ["constants", "--gen", "3,8,0", "--iters", "2000", "--out", "results/desk/constants"],
]


if __name__ == "__main__":
    for argv in RUNS:
        print("+ dlnlp " + " ".join(argv), flush=True)
        code = main(argv)
        if code != 0:
            sys.exit(code)
