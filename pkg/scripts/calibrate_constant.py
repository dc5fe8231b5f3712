#!/usr/bin/env python3
"""Smallest constant C for which m = ceil(C * Phi * log(2n/eps)) reaches the target success rate.

Uses the Legendre subspace with Christoffel sampling (Phi = n) and success
{delta_U <= delta}.  The Chernoff bound corresponds to C = 3 / delta^2.
"""
import argparse
from math import ceil, log

import numpy as np

from varsamp.bases import legendre_subspace
from varsamp.diagnostics import delta_U, wilson_interval
from varsamp.hilbert import InnerProductSpace
from varsamp.sampling import SamplingFamily, rng_for
from varsamp.variation import christoffel_density, christoffel_subspace


def success_rate(V, density, m, delta, trials, seed):
    fam = SamplingFamily.repeat(density, m)
    M = fam.expected_gram()
    ok = sum(delta_U(fam.draw(rng_for(seed, m, t)), M, V) <= delta for t in range(trials))
    return ok, trials


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--nodes", type=int, default=513)
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--eps", type=float, default=0.05)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    space = InnerProductSpace.uniform_grid(args.nodes)
    V = legendre_subspace(args.n, space)
    K = christoffel_subspace(V)
    dens = christoffel_density(K)
    base = K.integral * log(2 * args.n / args.eps)
    print(f"{'C':>6} {'m':>6} {'freq':>7} {'wilson low':>10}")
    for C in np.round(np.arange(0.5, 3.0 / args.delta ** 2 + 1e-9, 0.5), 2):
        m = int(ceil(C * base))
        k, T = success_rate(V, dens, m, args.delta, args.trials, args.seed)
        lo, _ = wilson_interval(k, T)
        print(f"{C:>6} {m:>6} {k / T:>7.3f} {lo:>10.3f}")
        if k / T >= 1 - args.eps:
            print(f"calibrated C = {C}")
            break


if __name__ == "__main__":
    main()
