#!/usr/bin/env python3
"""Regenerate the Chebyshev tables used by cnoma_eh.specfun for K0 and K1.

For x >= 2 the package evaluates sqrt(x) * exp(x) * K_n(x) as a Chebyshev
series in v = 4/x - 1 (so x in [2, inf) maps to v in (-1, 1]).  This script
interpolates that function at Chebyshev nodes using mpmath at 40 digits,
truncates the series where coefficients drop below 1e-19, and prints the
tables as Python source ready to paste into specfun.py.

Requires mpmath (a test-only dependency of the package).

Usage: python scripts/fit_k_bessel_coeffs.py [--nodes 40] [--check 500]
"""

import argparse
import math

import mpmath as mp

mp.mp.dps = 40


def scaled_k(order, v):
    """sqrt(x) e^x K_order(x) at x = 4/(v+1); the v -> -1 limit is sqrt(pi/2)."""
    s = (v + 1) / 2
    if s == 0:
        return mp.sqrt(mp.pi / 2)
    x = 2 / s
    return mp.sqrt(x) * mp.exp(x) * mp.besselk(order, x)


def cheb_coeffs(f, n_nodes):
    nodes = [mp.cos(mp.pi * (j + mp.mpf(1) / 2) / n_nodes) for j in range(n_nodes)]
    values = [f(v) for v in nodes]
    coeffs = []
    for k in range(n_nodes):
        acc = mp.mpf(0)
        for j in range(n_nodes):
            acc += values[j] * mp.cos(mp.pi * k * (j + mp.mpf(1) / 2) / n_nodes)
        coeffs.append(2 * acc / n_nodes)
    return coeffs


def clenshaw(coeffs, v):
    b1 = b2 = 0.0
    for c in reversed(coeffs[1:]):
        b1, b2 = 2.0 * v * b1 - b2 + c, b1
    return v * b1 - b2 + coeffs[0] / 2.0


def truncate(coeffs, cutoff=mp.mpf("1e-19")):
    keep = 1
    for k, c in enumerate(coeffs):
        if abs(c) > cutoff:
            keep = k + 1
    return [float(c) for c in coeffs[:keep]]


def validate(order, coeffs, n_check):
    worst = 0.0
    for i in range(n_check):
        x = 2.0 * 10 ** (6 * i / (n_check - 1))
        v = 4.0 / x - 1.0
        got = clenshaw(coeffs, v)
        ref = float(mp.besselk(order, x) * mp.exp(x) * mp.sqrt(x))
        worst = max(worst, abs(got - ref) / ref)
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=40)
    ap.add_argument("--check", type=int, default=500)
    args = ap.parse_args()

    for order, name in ((0, "_K0_LARGE_CHEB"), (1, "_K1_LARGE_CHEB")):
        coeffs = truncate(cheb_coeffs(lambda v: scaled_k(order, v), args.nodes))
        err = validate(order, coeffs, args.check)
        print(f"# max relative error {err:.3e} on x in [2, 2e6] ({len(coeffs)} terms)")
        print(f"{name} = (")
        for c in coeffs:
            print(f"    {c!r},")
        print(")")
        print()


if __name__ == "__main__":
    main()
