"""Relative error of the modular scheme against the exact oracle as N grows."""
import argparse

from lindrate.harness import ExperimentConfig, build_config, convergence_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=["spin_half", "cl_desk"], default="spin_half")
    ap.add_argument("--t", type=float, default=None)
    ap.add_argument("--n", type=int, nargs="+", default=None)
    args = ap.parse_args()
    if args.model == "spin_half":
        cfg, ns, t = ExperimentConfig(), args.n or [3, 10, 20, 40, 80, 160, 200], args.t or 1.0
    else:
        cfg, ns, t = build_config("cl_desk"), args.n or [500, 1000, 2000, 4000, 8000], args.t or 3.0
    table = convergence_study(cfg, ns, t)
    print(f"{'N':>6} {'rel_err_C':>14} {'rel_err_Cdot':>14}")
    for n, ec, er in table.rows:
        print(f"{n:6d} {ec:14.6e} {er:14.6e}")
    print(f"log-log slope: C {table.slope_C:.3f}, Cdot {table.slope_Cdot:.3f}")


if __name__ == "__main__":
    main()
