"""Throughput of the three engine configurations on scenario A.

baseline = sequential AoS, opt1 = row-parallel SoA, opt2 = opt1 + pipeline.
Renders scenario A under --data if missing, then runs ``rgbd-gmm bench``.

    python scripts/bench.py --frames 300 --out results/bench.json
"""

import argparse
import sys
from pathlib import Path

from rgbd_gmm.cli import main as cli
from rgbd_gmm.scenarios import builtin_scenario
from rgbd_gmm.synthetic import generate_synthetic


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", type=Path, default=Path("data"))
    ap.add_argument("--frames", type=int)
    ap.add_argument("--workers", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/bench.json"))
    args = ap.parse_args()
    seq = args.data / "A"
    if not (seq / "manifest.json").is_file():
        generate_synthetic(builtin_scenario("A"), seq)
    argv = ["bench", str(seq), "--workers", str(args.workers), "-o", str(args.out)]
    if args.frames:
        argv += ["--frames", str(args.frames)]
    sys.exit(cli(argv))


if __name__ == "__main__":
    main()
