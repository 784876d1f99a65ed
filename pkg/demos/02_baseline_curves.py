# %% [markdown]
# Standard Bell teleportation under noise
#
# Average fidelity of the unmodified protocol, averaged uniformly over the
# Bloch sphere. For bit-flip or depolarizing noise on Alice's qubit the
# answer is 1 - 2p/3; the classical limit is 2/3.

# %%
import numpy as np

from mlteleport import FidelityGrid, baseline_curve
from mlteleport.runner import PRESETS

grid = FidelityGrid.midpoint(64)
ps = np.linspace(0, 1, 11)

# %%
curves = {name: np.array(baseline_curve(m, pl, ps, grid))[:, 1] for name, (m, pl) in PRESETS.items()}
print("p     " + "".join(f"{n:>20s}" for n in curves))
for i, p in enumerate(ps):
    print(f"{p:4.1f}  " + "".join(f"{c[i]:20.4f}" for c in curves.values()))

# %%
err = np.max(np.abs(curves["bitflip-alice"] - (1 - 2 * ps / 3)))
print(f"\nbit-flip on Alice vs 1 - 2p/3: max deviation {err:.1e}")

# where does each scenario drop below the classical 2/3?
for name, c in curves.items():
    below = ps[c < 2 / 3]
    print(f"{name:20s} below 2/3 from p = {below[0]:.1f}" if below.size else f"{name:20s} stays above 2/3")
