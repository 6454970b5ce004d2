#!/usr/bin/env python3
"""Generate the nine shipped train/test splits for a workload directory.

Three seeds per sampling method (leave-one-out, random, base-query), written
as diff-stable JSON files named <workload>_<method>_<seed>.json so every
evaluated optimizer trains and tests on identical query sets.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from qobench.splitter import DEFAULT_RATIO, DEFAULT_SEEDS, SplitMethod, sample_split, save_split
from qobench.workload import load_workload


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("workload_dir")
    parser.add_argument("--name", default=None, help="workload name; defaults to the directory name")
    parser.add_argument("--convention", choices=("job", "template_dir"), default="job")
    parser.add_argument("--ratio", type=float, default=DEFAULT_RATIO)
    parser.add_argument("--out-dir", default="splits")
    args = parser.parse_args()

    name = args.name or Path(args.workload_dir).name
    workload = load_workload(args.workload_dir, name=name, convention=args.convention)
    print(f"{name}: {len(workload)} queries in {len(workload.families())} families")

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for method_name, seeds in DEFAULT_SEEDS.items():
        for seed in seeds:
            split = sample_split(workload, SplitMethod(method_name, args.ratio), seed)
            path = out / f"{name}_{method_name}_{seed}.json"
            save_split(split, path)
            print(f"  {method_name:<14} seed {seed}: {len(split.train):>4} train / {len(split.test):>3} test -> {path}")


if __name__ == "__main__":
    main()
