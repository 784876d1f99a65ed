# %% [markdown]
# Adapting only the measurement basis
#
# Alice measures in (P_k U x I)|Phi+> and Bob corrects with U P_k U^dagger.
# Only the three Euler angles of U move; the shared pair stays |Phi+> and
# there is no post-processing.

# %%
import numpy as np

from mlteleport import FidelityGrid, NoiseConfig, OptimizerConfig, ProtocolParams, Variant, average_fidelity, hill_climb
from mlteleport.protocol import BELL_CHANNEL, IDENTITY_POST

grid = FidelityGrid.midpoint(24)

# %%
# without noise the derived corrections are exact only for U = +-I
for angles in [(0, 0, 0), (1.0, 0, -1.0), (0, np.pi, 0), (0.3, 0, 0)]:
    params = ProtocolParams(BELL_CHANNEL, angles, IDENTITY_POST, Variant.ROTATED)
    print(f"U angles {np.round(angles, 3)}  noiseless F_avg = {average_fidelity(params, NoiseConfig('bitflip', 0), grid):.4f}")

# %%
# under strong bit-flip on Alice, rotating the basis still beats the fixed protocol
cfg = OptimizerConfig(iterations=1500, seed=1)
for p in (0.6, 0.8, 1.0):
    noise = NoiseConfig("bitflip", p, "alice")
    objective = lambda q: average_fidelity(q, noise, grid)
    start = ProtocolParams.baseline(Variant.ROTATED)
    best, trace = hill_climb(objective, start, cfg)
    print(f"p={p:.1f}  Bell {objective(start):.4f}  rotated {objective(best):.4f}  "
          f"angles {np.round(best.meas, 3)}  accepted {trace.accepted.mean():.1%}")
