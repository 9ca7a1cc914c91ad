#!/usr/bin/env python3
"""Driven coherence landscape over the (xi, Omega) drive plane.

Computes depolarization and dephasing times on a grid at fixed DC bias,
reports the best T2R cell, and optionally refines it into an exact double
sweet spot.  Expensive cells are cached by the sweep runner, so repeated
invocations with tweaked plotting options are cheap.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from floqlux import (
    CircuitParams,
    GridSpec,
    NoiseModel,
    RunConfig,
    export,
    find_sweet_spots,
    run_sweep,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--phi", type=float, default=0.451)
    ap.add_argument("--xi-min", type=float, default=0.0)
    ap.add_argument("--xi-max", type=float, default=0.12)
    ap.add_argument("--xi-num", type=int, default=13)
    ap.add_argument("--omega-min", type=float, default=0.55)
    ap.add_argument("--omega-max", type=float, default=0.95)
    ap.add_argument("--omega-num", type=int, default=9)
    ap.add_argument("--out", default="coherence_out")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--refine", action="store_true",
                    help="root-find the double sweet spot near the best cell")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args(argv)

    config = RunConfig(
        task="coherence",
        grid=GridSpec(
            phi_dc=(args.phi,),
            xi=tuple(np.linspace(args.xi_min, args.xi_max, args.xi_num)),
            omega=tuple(np.linspace(args.omega_min, args.omega_max,
                                    args.omega_num)),
        ),
        output=args.out,
        workers=args.workers,
        overwrite=True,
    )
    result = run_sweep(config)
    paths = export(result, args.out, "csv", overwrite=True)
    print(f"wrote {paths[0]}")

    t2r = result.column("t2r")
    ok = ~result.mask & np.isfinite(t2r)
    if not ok.any():
        print("no finite cells", file=sys.stderr)
        return 1
    best = int(np.nanargmax(np.where(ok, t2r, -np.inf)))
    bx, bo = result.rows[best, 1], result.rows[best, 2]
    print(f"best cell: xi={bx:.4f} omega={bo:.4f} "
          f"t2r={t2r[best] * 1e6:.1f} us "
          f"(t1={result.column('t1')[best] * 1e6:.1f} us, "
          f"tphi={result.column('tphi')[best] * 1e6:.1f} us)")

    if args.refine:
        # bracket the best cell with its neighbours and let the scanner
        # do the two-dimensional root refinement
        xs = np.asarray(result.axes["xi"])
        os_ = np.asarray(result.axes["omega"])
        ix = int(np.searchsorted(xs, bx))
        io = int(np.searchsorted(os_, bo))
        sub = GridSpec(
            phi_dc=(args.phi,),
            xi=tuple(xs[max(ix - 1, 0):ix + 2]),
            omega=tuple(os_[max(io - 1, 0):io + 2]),
        )
        scan = find_sweet_spots(CircuitParams(), NoiseModel(), sub)
        for s in scan.spots:
            line = (f"{s.kind} spot: phi={s.phi_dc:.6f} xi={s.xi:.6f} "
                    f"omega={s.omega:.6f}")
            if s.rates is not None:
                line += f" t2r={s.rates.t2r * 1e6:.1f} us"
            print(line)
        if not scan.spots:
            print("no sweet spot bracketed near the best cell")

    if args.plot:
        try:
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib not installed; skipping plot", file=sys.stderr)
            return 0
        xs = np.asarray(result.axes["xi"])
        os_ = np.asarray(result.axes["omega"])
        grid = t2r.reshape(1, len(xs), len(os_))[0] * 1e6
        fig, ax = plt.subplots(figsize=(6, 4))
        pm = ax.pcolormesh(xs, os_, grid.T, shading="nearest", cmap="magma")
        ax.plot(bx, bo, "w*", markersize=12)
        ax.set_xlabel("xi (Phi0)")
        ax.set_ylabel("Omega (GHz)")
        ax.set_title(f"T2R (us) at phi_dc={args.phi:g}")
        fig.colorbar(pm)
        fig.tight_layout()
        fig.savefig(f"{args.out}/coherence_map.png", dpi=160)
        print(f"wrote {args.out}/coherence_map.png")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
