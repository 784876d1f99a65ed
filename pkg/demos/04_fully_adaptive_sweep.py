# %% [markdown]
# Fully adaptive sweep
#
# Channel amplitudes, measurement angles and a post-processing channel are
# all tuned by hill climbing at each noise strength, warm-started from the
# previous optimum. Reduced settings keep this under a minute; the CLI
# `mlteleport sweep` runs the full 50 x 3000 version.

# %%
import numpy as np

from mlteleport import OptimizerConfig, run_sweep
from mlteleport.runner import preset_config, uniform_p_grid

settings = dict(p_grid=uniform_p_grid(11), reward_grid=16, eval_grid=48,
                optimizer=OptimizerConfig(iterations=800, seed=0))

# %%
for name in ("bitflip-alice", "ad-alice", "depolarizing-alice"):
    result = run_sweep(preset_config(name, **settings))
    gain = result.optimized - result.baseline
    print(f"\n{name}: best gain {gain.max():+.4f} at p = {result.ps[np.argmax(gain)]:.1f}")
    for r in result.records[::2]:
        print(f"  p={r.p:.1f}  baseline {r.f_baseline:.4f}  adaptive {r.f_optimized:.4f}"
              + ("  (anchored)" if r.anchored else ""))

# %%
# the last sweep's optimum at p=1: pair amplitudes after adaptation
last = result.records[-1]
print("\npair amplitudes a..d at p=1:", np.round(last.params[3:11].view(complex), 3))
