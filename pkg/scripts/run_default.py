#!/usr/bin/env python3
"""Run the default experiment (eps=0.2, n=64, T=5) and print a summary.

Equivalent to `hallmhd run --out out/default`; kept as a script for quick
editing during experiments. Takes ~10 minutes on two cores.
"""

import argparse

from hallmhd import RunConfig, emit, run_single


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--epsilon", type=float, default=0.2)
    ap.add_argument("--tend", type=float, default=5.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--out", default="out/default")
    args = ap.parse_args()

    cfg = RunConfig(epsilon=args.epsilon, t_end=args.tend, dt=args.dt, n_per_axis=args.n)
    rep = run_single(cfg)
    csv_path, json_path = emit(rep, args.out)

    print(f"wrote {csv_path} and {json_path} ({rep.runtime_seconds:.0f}s)")
    print(f"initial norms: |U0_hat|_L1 = {rep.initial_norms['fourier_l1_U0']:.4g}, "
          f"|U0|_L2 = {rep.initial_norms['l2_U0']:.4g}")
    print(f"size functional (C=1): {rep.smallness:.4g}")
    print(f"heat decay rate {rep.decay['heat_rate']:.4f} "
          f"in [{rep.decay['bracket_low']:.3f}, {rep.decay['bracket_high']:.3f}]")
    print(f"perturbation sup {rep.bootstrap_sup:.4g} at t = {rep.bootstrap_sup_time:g}")
    for name, v in rep.verdicts.items():
        print(f"  {name:24s} {'ok' if v['ok'] else 'FAIL'}  "
              f"(value {v['value']:.3e}, threshold {v['threshold']:.3e})")


if __name__ == "__main__":
    main()
