#!/usr/bin/env python3
"""Dump exact, cut-off, and smooth wave profiles side by side to CSV.

Usage: python scripts/plot_wave.py [--nu 0.05] [--delta 0.1] [--t 2.0] [--out waves.csv]
The columns are plot-ready; rendering is left to external tools.
"""

import argparse

import numpy as np

from rarefan.gas import GasParams, PrimState
from rarefan.waves import WaveSpec, sample_exact, sample_cutoff, smooth_profile


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nu", type=float, default=0.05)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--t", type=float, default=2.0)
    ap.add_argument("--n", type=int, default=2001)
    ap.add_argument("--gamma", type=float, default=5.0 / 3.0)
    ap.add_argument("--out", default="waves.csv")
    args = ap.parse_args()

    g = GasParams.normalized(args.gamma, 0.5)
    spec = WaveSpec(PrimState(1.0, 0.0, 1.0), g, nu=args.nu, delta=args.delta)
    t = args.t
    lo = spec.w_minus * t - 20 * args.delta - 1.0
    hi = spec.w_plus * t + 20 * args.delta + 1.0
    x1 = np.linspace(lo, hi, args.n)
    ex = sample_exact(spec, x1 / t)
    cu = sample_cutoff(spec, x1 / t)
    pr = smooth_profile(spec, t, x1, shift=False)
    data = np.column_stack([x1, ex.rho, ex.u1, ex.theta,
                            cu.rho, cu.u1, cu.theta,
                            pr.rho, pr.u1, pr.theta])
    np.savetxt(args.out, data, delimiter=",", comments="",
               header="x1,rho_exact,u1_exact,theta_exact,"
                      "rho_cutoff,u1_cutoff,theta_cutoff,"
                      "rho_smooth,u1_smooth,theta_smooth")
    print(f"wrote {args.out} ({args.n} rows, t={t}, nu={args.nu}, delta={args.delta})")


if __name__ == "__main__":
    main()
