"""Invert analytic Laplace transforms with the Fourier-series ILT.

Samples F(s) on the fixed Bromwich query points s_k = sigma0 + i k pi / h
and reconstructs the time-domain signal, for three transform pairs with
known inverses.  Prints the worst relative error over t in [0.05, 0.95].
"""

import numpy as np

from gbm_laplace import IltConfig, ilt_grid, query_points


def main():
    t = np.linspace(0.05, 0.95, 19)
    pairs = [
        ("1/s       <-> 1", lambda s: 1 / s, np.ones_like(t), 2.0),
        ("1/s^2     <-> t", lambda s: 1 / s**2, t, 3.0),
        ("1/(s - 4) <-> e^(4t)", lambda s: 1 / (s - 4), np.exp(4 * t), 6.0),
    ]

    print("Fourier-series ILT with K = 1024 terms, horizon h = 2\n")
    for name, f, truth, sigma0 in pairs:
        config = IltConfig(sigma0=sigma0, n_terms=1024, horizon=2.0)
        rec = ilt_grid(f(query_points(config)), t, config)
        rel = np.abs(rec - truth) / np.abs(truth)
        print(f"  {name}   (sigma0 = {sigma0:g})")
        print(f"    max relative error {rel.max():.2e}, "
              f"mean {rel.mean():.2e}")
        mid = len(t) // 2
        print(f"    at t = {t[mid]:.2f}: truth {truth[mid]:.6f}, "
              f"reconstructed {rec[mid]:.6f}\n")

    print("sigma0 trades truncation error (better small) against aliasing")
    print("error ~ e^(-2 sigma0 h) amplified by the signal's growth rate, so")
    print("faster-growing signals need a contour further to the right.")


if __name__ == "__main__":
    main()
