"""Plot a Babenko spectrum table (``stokesffh babenko --out``) against steepness.

    python scripts/plot_spectrum.py spectrum.tsv [--out spectrum.png]
"""
import argparse

import matplotlib.pyplot as plt
import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("table")
    ap.add_argument("--out")
    args = ap.parse_args()
    t = np.genfromtxt(args.table, delimiter="\t", names=True, dtype=None, encoding=None,
                      comments="#")
    fig, ax = plt.subplots(figsize=(6, 4))
    for par, mark in (("even", "o"), ("odd", "s"), ("none", "x")):
        sel = t["parity"] == par
        if sel.any():
            ax.plot(t["s"][sel], t["xi"][sel], mark, ms=3, label=par)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("s")
    ax.set_ylabel("xi")
    ax.legend()
    fig.tight_layout()
    plt.savefig(args.out) if args.out else plt.show()


if __name__ == "__main__":
    main()
