"""Spin-1/2 C(t) and Cdot(t) with the modular evolver against the exact oracle."""
import argparse
import sys

from lindrate.harness import ExperimentConfig, rows_to_csv, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=25)
    ap.add_argument("--t-end", type=float, default=2.0)
    ap.add_argument("--t-count", type=int, default=21)
    ap.add_argument("--picture", default="heisenberg")
    ap.add_argument("--shots", type=int)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = ExperimentConfig(evolver="modular", steps=args.steps, t_end=args.t_end, t_count=args.t_count,
                           picture=args.picture, shots=args.shots, seed=args.seed)
    sys.stdout.write(rows_to_csv(run_experiment(cfg), cfg))


if __name__ == "__main__":
    main()
