#!/usr/bin/env python3
"""Quasienergy spectrum and spectral weights versus DC flux bias.

Solves the driven circuit on a flux grid for one or more drive amplitudes
and writes a long-form CSV (one row per flux point, level, and sideband
with non-negligible weight).  With --plot the folded quasienergies are
drawn colored by sideband weight, which reproduces the familiar
fan-of-sidebands picture.

Usage:
    python3 quasienergy_spectrum.py --xi 0.0 0.05 0.1 --omega 0.4 -o spectra.csv
    python3 quasienergy_spectrum.py --xi 0.08 --plot
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from floqlux import (
    CircuitParams,
    DriveParams,
    FluxBias,
    SambeConfig,
    diagonalize_static,
    solve_floquet,
)


def compute_rows(params, config, phis, xis, omega, n_levels, weight_floor):
    rows = []
    for phi in phis:
        spec = diagonalize_static(params, FluxBias(phi))
        for xi in xis:
            sol = solve_floquet(params, DriveParams(FluxBias(phi), xi, omega),
                                config, spectrum=spec)
            cutoff = config.sideband_cutoff
            for alpha in range(min(n_levels, config.n_levels)):
                weights = sol.sideband_weights(alpha)
                for n in range(-cutoff, cutoff + 1):
                    w = weights[n + cutoff]
                    if w < weight_floor:
                        continue
                    rows.append((phi, xi, alpha, n,
                                 sol.quasienergies[alpha] + n * omega, w))
    return np.asarray(rows)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--phi-min", type=float, default=0.40)
    ap.add_argument("--phi-max", type=float, default=0.60)
    ap.add_argument("--phi-num", type=int, default=81)
    ap.add_argument("--xi", type=float, nargs="+", default=[0.0, 0.05, 0.1])
    ap.add_argument("--omega", type=float, default=0.4,
                    help="drive frequency in GHz")
    ap.add_argument("--levels", type=int, default=3,
                    help="Floquet branches to keep")
    ap.add_argument("--weight-floor", type=float, default=1e-4,
                    help="drop sidebands lighter than this")
    ap.add_argument("--cutoff", type=int, default=20)
    ap.add_argument("-o", "--output", default="quasienergy_spectrum.csv")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args(argv)

    params = CircuitParams()
    config = SambeConfig(sideband_cutoff=args.cutoff)
    phis = np.linspace(args.phi_min, args.phi_max, args.phi_num)
    rows = compute_rows(params, config, phis, args.xi, args.omega,
                        args.levels, args.weight_floor)

    header = "phi_dc,xi,level,sideband,energy_ghz,weight"
    np.savetxt(args.output, rows, delimiter=",", header=header, comments="",
               fmt=["%.6f", "%.6f", "%d", "%d", "%.12g", "%.6g"])
    print(f"wrote {args.output} ({rows.shape[0]} rows)")

    if args.plot:
        try:
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib not installed; skipping plot", file=sys.stderr)
            return 0
        fig, axes = plt.subplots(1, len(args.xi), figsize=(4 * len(args.xi), 4),
                                 sharey=True, squeeze=False)
        for ax, xi in zip(axes[0], args.xi):
            sel = rows[:, 1] == xi
            sc = ax.scatter(rows[sel, 0], rows[sel, 4], c=rows[sel, 5],
                            s=4, cmap="viridis", vmin=0, vmax=1)
            ax.set_title(f"xi = {xi:g}")
            ax.set_xlabel("phi_dc (Phi0)")
        axes[0][0].set_ylabel("quasienergy + n*Omega (GHz)")
        fig.colorbar(sc, ax=axes[0][-1], label="sideband weight")
        fig.tight_layout()
        out = args.output.rsplit(".", 1)[0] + ".png"
        fig.savefig(out, dpi=160)
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
