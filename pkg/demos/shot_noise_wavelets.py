"""Infinite-source Poisson input with Pareto durations and its wavelet estimate.

With tail index alpha the memory parameter is 1 - alpha/2.  The Haar
coefficients are exact integrals of the piecewise-constant path.
Run: python demos/shot_noise_wavelets.py
"""

import numpy as np

from longmem.estimators import wavelet_coefficients, wavelet_estimator
from longmem.rand import Constant, Pareto, RngStream
from longmem.shotnoise import simulate_infinite_source_poisson

T = 2**16
for alpha in (1.3, 1.5, 1.8):
    est = []
    for r in range(20):
        path = simulate_infinite_source_poisson(1.0, Pareto(alpha), Constant(1.0), T, T,
                                                RngStream(3, r))
        est.append(wavelet_estimator(wavelet_coefficients(path, range(4, 13))).aux["regression"])
    print(f"alpha={alpha}: d = {1 - alpha / 2:.3f}, wavelet regression {np.mean(est):.3f}")
