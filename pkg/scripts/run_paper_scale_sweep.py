#!/usr/bin/env python3
"""Full-size initialization sweep (300x3000) — expect minutes of runtime.

The sweep defaults to the scaled:10 stepsize rule at this size (the
conservative schedule stalls within the 5000-iteration budget; the manifest
records the substitution).  Pass extra CLI flags through, e.g.

    python scripts/run_paper_scale_sweep.py --stepsize adaptive
"""

import sys

from dlnlp.bench_cli import main

if __name__ == "__main__":
    argv = ["sweep-init", "--paper-scale", "--out", "results/paper_scale/sweep"]
    argv += sys.argv[1:]
    print("+ dlnlp " + " ".join(argv), flush=True)
    sys.exit(main(argv))
