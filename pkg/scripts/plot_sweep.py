"""Plot a stability sweep (``stokesffh stability --out``).

Left: the spectral plane, Re lambda against Im lambda. Right: the largest
growth rate at each Floquet parameter.

    python scripts/plot_sweep.py sweep.tsv [--out sweep.png]
"""
import argparse

import matplotlib.pyplot as plt
import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("table")
    ap.add_argument("--out")
    args = ap.parse_args()
    with open(args.table) as fh:
        header = sum(1 for line in fh if line.startswith("#"))
    t = np.genfromtxt(args.table, delimiter="\t", names=True, skip_header=header)
    t = t[t["converged"] == 1]
    fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
    a.scatter(t["im_lambda"], t["re_lambda"], c=t["mu"], s=4, cmap="viridis")
    a.set_xlabel("Im lambda")
    a.set_ylabel("Re lambda")
    mus = np.unique(t["mu"])
    gam = [max(t["re_lambda"][t["mu"] == m].max(), 0.0) for m in mus]
    b.plot(mus, gam, ".-")
    b.set_xlabel("mu")
    b.set_ylabel("max Re lambda")
    fig.tight_layout()
    plt.savefig(args.out) if args.out else plt.show()


if __name__ == "__main__":
    main()
