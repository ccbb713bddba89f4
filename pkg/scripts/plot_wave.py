"""Plot a wave file: the surface profile and its cosine spectrum.

    python scripts/plot_wave.py wave.txt [--out wave.png]
"""
import argparse

import matplotlib.pyplot as plt
import numpy as np

from stokesffh.stokes import read_wave, surface_from_wave


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wave")
    ap.add_argument("--out")
    args = ap.parse_args()
    w = read_wave(args.wave)
    x, y = surface_from_wave(w)
    fig, (a, b) = plt.subplots(1, 2, figsize=(10, 3.5))
    a.plot(x, y)
    a.set_xlabel("x")
    a.set_ylabel("y")
    a.set_title(f"s = {w.s:.8f}, c = {w.c:.10f}")
    a_k = np.abs(w.y_hat)
    k = np.nonzero(a_k)[0]
    b.semilogy(k, a_k[k])
    b.set_xlabel("k")
    b.set_ylabel("|y_k|")
    fig.tight_layout()
    plt.savefig(args.out) if args.out else plt.show()


if __name__ == "__main__":
    main()
