"""Per-row Schrodinger-picture terms for the I and reflection halves of the controlled-theta_A gate."""
import argparse

import numpy as np

from lindrate.estimators import SCHRODINGER_TERMS, reflection, schrodinger_gate_terms
from lindrate.models import SpinHalfParams, spin_half_model


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0])
    args = ap.parse_args()
    model, setup = spin_half_model(SpinHalfParams())
    print(f"{'t':>5} {'gate':>5} " + " ".join(f"{k:>11}" for k in SCHRODINGER_TERMS))
    for t in args.t:
        for label, g in (("I", np.eye(2)), ("U", reflection(setup.theta_A))):
            row = schrodinger_gate_terms(model, setup, g, t)
            print(f"{t:5.2f} {label:>5} " + " ".join(f"{row[k]:11.6f}" for k in SCHRODINGER_TERMS))


if __name__ == "__main__":
    main()
