"""Frame bounds of the hybrid system as the selection offset varies.

The offset t controls how far the near-boundary wavelet tube reaches: large
offsets keep the whole wavelet basis (stable bounds), small offsets leave
near-boundary content uncovered and the lower frame bound collapses.

Run:  python demos/frame_bounds_demo.py
"""

import numpy as np

from bshear.experiments import SystemParams, frame_bound_sweep

params = SystemParams(n=128, scales=4, directions=(1, 1, 2, 2), family="db2")
offsets = [7.31, 5.72, 3.18, 0.35, -3.0, -6.0]

print(f"grid {params.n}x{params.n}, {params.scales} scales, "
      f"ladder {params.ladder()}, tau = {params.tau:.3f}")
print("sweeping offsets", offsets, "- a couple of minutes...")
report = frame_bound_sweep(params, offsets, eig_tol=3e-3)

print(f"\n{'t':>7} {'kept wavelets':>14} {'lambda_min':>11} {'lambda_max':>11} {'B/A':>9}")
for row in report.rows:
    q = row["quotient"]
    q_str = f"{q:9.1f}" if np.isfinite(q) else "      inf"
    print(f"{row['t']:7.2f} {row['n_wavelet']:14d} {row['lambda_min']:11.4f} "
          f"{row['lambda_max']:11.2f} {q_str}")

plateau = report.rows[0]["quotient"]
worst = report.rows[-1]["quotient"]
print(f"\nquotient stays near {plateau:.0f} while the tube covers every scale, "
      f"then grows to {worst:.0f} once the selection thins out.")
