"""Why an unbalanced beam splitter caps the purity a path measurement can report.

A balanced superposition sent through a lossless splitter with r != t never
interferes perfectly. The mixed state that shows the same visibility on an
ideal splitter has purity 1/2 + V^2/2, so that number is a ceiling on what the
apparatus can claim.
"""

import numpy as np

from settomo.visibility import (
    BeamSplitter, bs_table, check_purity_consistency, purity_bound,
    sweep_visibility_2q, table_bounds, visibility_1q, visibility_2q,
)

# %% One photon, one splitter: V = 2rt.
for r2 in (0.5, 0.42, 0.2, 0.0):
    bs = BeamSplitter.from_intensities(r2, 1 - r2)
    print(f"r^2 = {r2:.2f}: V = {visibility_1q(bs):.5f}")

# %% Two photons, one splitter each, measured table values per polarization.
table = bs_table()
for pol in ("H", "V"):
    b1, b2 = table[("lambda1", pol)], table[("lambda2", pol)]
    v = visibility_2q(b1, b2)
    print(f"{pol}: V = {v:.6f} (phase sweep {sweep_visibility_2q(b1, b2):.6f}), "
          f"purity ceiling {purity_bound(v):.5f}")

# %% Compare measured path purities against the ceilings.
bounds = table_bounds()
for label, measured, sigma, pol in (("QST", 0.909, 0.003, "H"), ("SET", 0.886, 0.001, "V")):
    rep = check_purity_consistency(measured, bounds[pol]["purity_bound"], sigma)
    print(f"{label} {measured}+-{sigma} vs {pol} ceiling: compatible={rep['compatible']}, "
          f"margin {rep['margin']:.4f}")

# %% The ceiling falls quickly as the splitter becomes unbalanced.
for r2 in np.linspace(0.5, 0.3, 5):
    bs = BeamSplitter.from_intensities(r2, 1 - r2)
    print(f"r^2 = {r2:.2f} on both arms: ceiling {purity_bound(visibility_2q(bs, bs)):.4f}")
