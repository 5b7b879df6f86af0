"""Analyze an image into stacked hybrid coefficients and invert through
conjugate gradients on the frame operator.

Run:  python demos/transform_roundtrip_demo.py
"""

import numpy as np

from bshear.cartoon import disk_spec, rasterize_cartoon
from bshear.experiments import (SystemParams, frame_operator_handle,
                                hybrid_for)
from bshear.geometry import build_domain
from bshear.linalg import cg_solve

params = SystemParams(n=64, scales=3, directions=(1, 1, 2), family="db2")
bss = hybrid_for(params, 5.0)
f = rasterize_cartoon(disk_spec(0.22), build_domain(64))

coeffs = bss.analysis(f)
print(f"analysis: {coeffs.size} coefficients, "
      f"norm ratio ||c||/||f|| = {coeffs.norm() / np.sqrt((f**2).sum() / 64**2):.3f}")

g = bss.synthesis(coeffs)
x = cg_solve(frame_operator_handle(bss), g.ravel(), tol=1e-9, max_iter=3000)
rel = np.linalg.norm(x - f.ravel()) / np.linalg.norm(f)
print(f"round trip through S^-1: relative error {rel:.2e}")

w = 2.0 ** bss.scale_of  # order-1 weights
print(f"weighted coefficient norm (s=1): {coeffs.weighted_norm(1.0):.3f}")
