"""Kraus sets for the standard single-qubit noise models and their lifts."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .qcore import I2, X, Y, Z, DimensionError, KrausSet, apply_channel, tensor_product


class NoiseModel(str, enum.Enum):
    BIT_FLIP = "bitflip"
    PHASE_FLIP = "phaseflip"
    DEPOLARIZING = "depolarizing"
    AMPLITUDE_DAMPING = "ad"

    @classmethod
    def parse(cls, value: "str | NoiseModel") -> "NoiseModel":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        try:
            return _MODEL_ALIASES[key]
        except KeyError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown noise model {value!r} (expected one of {choices})") from None


_MODEL_ALIASES = {
    "bitflip": NoiseModel.BIT_FLIP,
    "bf": NoiseModel.BIT_FLIP,
    "phaseflip": NoiseModel.PHASE_FLIP,
    "pf": NoiseModel.PHASE_FLIP,
    "depolarizing": NoiseModel.DEPOLARIZING,
    "depolarising": NoiseModel.DEPOLARIZING,
    "depol": NoiseModel.DEPOLARIZING,
    "dp": NoiseModel.DEPOLARIZING,
    "ad": NoiseModel.AMPLITUDE_DAMPING,
    "amplitudedamping": NoiseModel.AMPLITUDE_DAMPING,
}


class NoisePlacement(str, enum.Enum):
    """Which subsystem the noise acts on."""

    INPUT = "input"
    ALICE = "alice"
    BOTH = "both"

    @classmethod
    def parse(cls, value: "str | NoisePlacement") -> "NoisePlacement":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"input": cls.INPUT, "inputqubit": cls.INPUT, "alice": cls.ALICE,
                   "alicechannelqubit": cls.ALICE, "both": cls.BOTH,
                   "bothchannelqubits": cls.BOTH}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown noise placement {value!r} (expected input, alice or both)") from None


@dataclass(frozen=True)
class NoiseConfig:
    model: NoiseModel
    p: float
    placement: NoisePlacement = NoisePlacement.ALICE

    def __post_init__(self):
        object.__setattr__(self, "model", NoiseModel.parse(self.model))
        object.__setattr__(self, "placement", NoisePlacement.parse(self.placement))
        p = float(self.p)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"noise strength p={p} outside [0, 1]")
        object.__setattr__(self, "p", p)


def kraus_for(model: NoiseModel | str, p: float) -> list[np.ndarray]:
    """
    Single-qubit Kraus operators for ``model`` at strength ``p``.

    Depolarizing noise uses the Pauli form
    ``{sqrt(1-p) I, sqrt(p/3) X, sqrt(p/3) Y, sqrt(p/3) Z}``, which realizes the
    mixture ``(1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)``.
    """
    model = NoiseModel.parse(model)
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise strength p={p} outside [0, 1]")
    if model is NoiseModel.BIT_FLIP:
        return [np.sqrt(1 - p) * I2, np.sqrt(p) * X]
    if model is NoiseModel.PHASE_FLIP:
        return [np.sqrt(1 - p) * I2, np.sqrt(p) * Z]
    if model is NoiseModel.DEPOLARIZING:
        w = np.sqrt(p / 3)
        return [np.sqrt(1 - p) * I2, w * X, w * Y, w * Z]
    e0 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
    e1 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    return [e0, e1]


def lift_single(kraus: KrausSet, target: int, qubit_count: int) -> list[np.ndarray]:
    """Embed single-qubit Kraus operators at ``target`` of a ``qubit_count`` register."""
    if not 0 <= target < qubit_count:
        raise DimensionError(f"target qubit {target} out of range for {qubit_count} qubits")
    lifted = []
    for e in kraus:
        if e.shape != (2, 2):
            raise DimensionError("lift_single expects single-qubit operators")
        factors = [I2] * qubit_count
        factors[target] = e
        lifted.append(factors[0] if qubit_count == 1 else tensor_product(*factors))
    return lifted


def product_kraus(ka: KrausSet, kb: KrausSet) -> list[np.ndarray]:
    """All pairwise products ``E_k (x) E_l`` for independent noise on two qubits."""
    return [tensor_product(a, b) for a in ka for b in kb]


@lru_cache(maxsize=4096)
def _channel_ops(model: NoiseModel, p: float, placement: NoisePlacement) -> np.ndarray:
    single = kraus_for(model, p)
    if placement is NoisePlacement.INPUT:
        ops = single
    elif placement is NoisePlacement.ALICE:
        # Alice's half of the pair is its first tensor factor.
        ops = lift_single(single, 0, 2)
    else:
        ops = product_kraus(single, single)
    arr = np.array(ops)
    arr.setflags(write=False)
    return arr


def noise_operators(config: NoiseConfig) -> np.ndarray:
    """
    Stacked Kraus operators realizing ``config`` on its target subsystem.

    Shape ``(k, 2, 2)`` for input-qubit noise and ``(k, 4, 4)`` for noise on
    the entangled pair. The returned array is cached and read-only.
    """
    return _channel_ops(config.model, config.p, config.placement)


def apply_noise(rho: np.ndarray, config: NoiseConfig) -> np.ndarray:
    """
    Apply ``config`` to ``rho``.

    ``rho`` is the single input qubit (2x2) for ``INPUT`` placement and the
    shared pair (4x4) otherwise.
    """
    expected = 2 if config.placement is NoisePlacement.INPUT else 4
    if rho.shape != (expected, expected):
        raise DimensionError(
            f"placement {config.placement.value} needs a {expected}x{expected} state, got {rho.shape}"
        )
    return apply_channel(rho, noise_operators(config))
