# %% [markdown]
# Noise channels on a Bell pair
#
# Each of the four noise models acts on Alice's half of |Phi+>. We look at
# how much of the pair survives, measured as overlap with |Phi+>.

# %%
import numpy as np

from mlteleport.noise import NoiseConfig, NoiseModel, apply_noise, kraus_for
from mlteleport.qcore import completeness_defect, ket_to_dm

phi_plus = np.array([1, 0, 0, 1]) / np.sqrt(2)
bell = ket_to_dm(phi_plus)

# %%
# every Kraus set is trace preserving to machine precision
for model in NoiseModel:
    worst = max(completeness_defect(kraus_for(model, p)) for p in np.linspace(0, 1, 101))
    print(f"{model.value:13s} max completeness defect {worst:.1e}")

# %%
ps = np.linspace(0, 1, 6)
print("\noverlap <Phi+| rho |Phi+> after noise on Alice's qubit")
print("p      " + "".join(f"{m.value:>14s}" for m in NoiseModel))
for p in ps:
    row = [np.real(phi_plus @ apply_noise(bell, NoiseConfig(m, p, "alice")) @ phi_plus) for m in NoiseModel]
    print(f"{p:4.2f}  " + "".join(f"{v:14.4f}" for v in row))

# %%
# noise on both halves: bit-flip at p=1 flips both qubits and leaves |Phi+> alone
both = apply_noise(bell, NoiseConfig("bitflip", 1.0, "both"))
print("\nbit-flip p=1 on both qubits returns |Phi+>:", np.allclose(both, bell))

# amplitude damping at p=1 on Alice sends the pair to a product state
ad = apply_noise(bell, NoiseConfig("ad", 1.0, "alice"))
print("amplitude damping p=1 on Alice:\n", np.round(ad.real, 3))
