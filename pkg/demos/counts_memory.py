"""Counts from i.i.d. heavy-tailed durations versus counts from LMSD durations.

Both count series look long-memory to GPH, but only the LMSD counts keep the
same memory parameter at every bandwidth.  Run: python demos/counts_memory.py
"""

import numpy as np

from longmem import harness
from longmem.estimators import bandwidth, gph
from longmem.rand import RngStream
from longmem.spectral import periodogram

n, dt, reps = 10_000, 300.0, 20

for model, d0 in (("stable", 0.25), ("lmsd", 0.3545)):
    params = harness.STABLE_PARAMS if model == "stable" else harness.LMSD_PARAMS
    gen = harness.stable_counts if model == "stable" else harness.lmsd_counts
    est = {0.5: [], 0.8: []}
    for r in range(reps):
        counts = gen(RngStream(1, r), dt, n, params).counts
        pg = periodogram(counts)
        for e in est:
            est[e].append(gph(pg, bandwidth(n, e)).d_hat)
    print(f"{model:6s} d0={d0:.4f}  "
          + "  ".join(f"m=n^{e}: {np.mean(v):.3f}" for e, v in est.items()))
