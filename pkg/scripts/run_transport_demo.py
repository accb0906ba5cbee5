#!/usr/bin/env python3
"""Transport and sparse-recovery demos on seeded instances.

Writes a 5x5 transport instance, solves it three ways (squared-variable GD,
Sinkhorn, entropy dual oracle), then runs the planted basis-pursuit demo.
Outputs land under results/demos/.
"""

import os
import sys

from dlnlp.bench_cli import gen_ot_instance, main
from dlnlp.reductions import write_ot

OT_FILE = "results/demos/ot_5x5.txt"


if __name__ == "__main__":
    os.makedirs(os.path.dirname(OT_FILE), exist_ok=True)
    write_ot(gen_ot_instance(5, 5, 7), OT_FILE)
    for argv in [
        ["ot", "--instance", OT_FILE, "--lambda", "0.5", "--iters", "20000",
         "--out", "results/demos/ot"],
        ["bp", "--gen", "4,8,3", "--iters", "4000", "--out", "results/demos/bp"],
    ]:
        print("+ dlnlp " + " ".join(argv), flush=True)
        code = main(argv)
        if code != 0:
            sys.exit(code)
