#!/usr/bin/env python3
"""Steady-state two-tone spectroscopy map over (flux bias, probe frequency).

Thin wrapper around the spectroscopy task of the sweep runner, so the
output lands in the same cached, deterministic format as `ff spectroscopy`.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from floqlux import GridSpec, ProbeSpec, RunConfig, export, run_sweep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--phi-min", type=float, default=0.45)
    ap.add_argument("--phi-max", type=float, default=0.55)
    ap.add_argument("--phi-num", type=int, default=21)
    ap.add_argument("--xi", type=float, default=0.0)
    ap.add_argument("--omega", type=float, default=0.4)
    ap.add_argument("--probe-min", type=float, default=0.05)
    ap.add_argument("--probe-max", type=float, default=2.0)
    ap.add_argument("--probe-num", type=int, default=128)
    ap.add_argument("--out", default="spectro_out")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args(argv)

    config = RunConfig(
        task="spectroscopy",
        grid=GridSpec(
            phi_dc=tuple(np.linspace(args.phi_min, args.phi_max, args.phi_num)),
            xi=(args.xi,),
            omega=(args.omega,),
        ),
        probe=ProbeSpec(
            omega_p=tuple(np.linspace(args.probe_min, args.probe_max,
                                      args.probe_num)),
            sweep="phi_dc",
        ),
        output=args.out,
        workers=args.workers,
        overwrite=True,
    )
    result = run_sweep(config)
    paths = export(result, args.out, "csv", overwrite=True)
    print(f"wrote {paths[0]}")
    if result.mask.any():
        n = int(result.mask.sum())
        print(f"warning: {n} masked cells", file=sys.stderr)

    if args.plot:
        try:
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib not installed; skipping plot", file=sys.stderr)
            return 0
        phis = np.asarray(result.axes["phi_dc"])
        freqs = np.asarray(result.axes["omega_p"])
        p1 = result.column("p1").reshape(len(phis), len(freqs))
        fig, ax = plt.subplots(figsize=(6, 4))
        pm = ax.pcolormesh(phis, freqs, p1.T, shading="nearest",
                           cmap="inferno")
        ax.set_xlabel("phi_dc (Phi0)")
        ax.set_ylabel("probe frequency (GHz)")
        ax.set_title(f"steady-state P1, xi={args.xi:g}, omega={args.omega:g}")
        fig.colorbar(pm, label="excited population")
        fig.tight_layout()
        fig.savefig(f"{args.out}/spectroscopy_map.png", dpi=160)
        print(f"wrote {args.out}/spectroscopy_map.png")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
