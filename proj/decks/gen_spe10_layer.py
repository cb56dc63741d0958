#!/usr/bin/env python3
"""Writes a synthetic 60x220x1 layer in the spirit of the SPE10 top layer.

Log-permeability is a smoothed Gaussian field, elongated along y, mapped onto
the range 6.65e-4 mD .. 2.0e4 mD. Porosity follows log-permeability.
Deterministic for a given seed.
"""
import argparse
import numpy as np

NX, NY = 60, 220
KMIN, KMAX = 6.65e-4, 2.0e4  # mD


def field(seed):
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((NY, NX))
    ky = np.fft.fftfreq(NY)[:, None]
    kx = np.fft.fftfreq(NX)[None, :]
    lx, ly = 4.0, 14.0
    filt = np.exp(-0.5 * ((2 * np.pi * kx * lx) ** 2 + (2 * np.pi * ky * ly) ** 2))
    z = np.real(np.fft.ifft2(np.fft.fft2(noise) * filt))
    z = (z - z.mean()) / z.std()
    # Monotone map: the normal scores hit both ends of the range exactly.
    lo, hi = np.log10(KMIN), np.log10(KMAX)
    u = (z - z.min()) / (z.max() - z.min())
    logk = lo + (hi - lo) * u ** 0.55
    return logk


def write_array(path, name, values, per_line=10):
    with open(path, "w") as f:
        f.write(f"-- synthetic layer, {len(values)} values\n{name}\n")
        for i in range(0, len(values), per_line):
            f.write(" ".join(f"{v:.6g}" for v in values[i:i + per_line]) + "\n")
        f.write("/\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=10)
    ap.add_argument("--prefix", default="spe10_layer")
    a = ap.parse_args()
    logk = field(a.seed)
    k = 10.0 ** logk
    # Natural ordering: i fastest, so flatten rows of (j, i).
    kx = k.ravel()
    kx[np.argmin(kx)] = KMIN
    kx[np.argmax(kx)] = KMAX
    poro = np.clip(0.05 + 0.03 * (logk.ravel() - np.log10(KMIN)), 0.05, 0.30)
    write_array(f"{a.prefix}_permx.inc", "PERMX", kx)
    write_array(f"{a.prefix}_permy.inc", "PERMY", kx)
    write_array(f"{a.prefix}_permz.inc", "PERMZ", 0.1 * kx)
    write_array(f"{a.prefix}_poro.inc", "PORO", poro)
    print(f"perm {kx.min():.4g} .. {kx.max():.4g} mD, median {np.median(kx):.4g}; poro {poro.min():.3f} .. {poro.max():.3f}")


if __name__ == "__main__":
    main()
