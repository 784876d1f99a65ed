"""
Adaptive single-qubit teleportation and its Bloch-averaged fidelity.

Register layout is ``(input, alice, bob)``: qubit 0 carries the state to be
sent, qubits 1 and 2 hold the shared pair. Alice measures qubits (0, 1) in a
rotated Bell basis ``(P_k U (x) I)|Phi+>`` with ``P_k`` in ``(I, Z, X, ZX)``,
Bob applies ``U P_k U^dagger`` and then a two-operator post-processing
channel ``{J0, J1}``.

Two evaluation paths exist. :func:`teleport` runs the literal pipeline on
8x8 density matrices for one input state. :func:`average_fidelity` instead
builds the linear input-to-output map of the whole protocol once and
contracts it against precomputed fourth moments of the grid states, which
is what makes thousands of optimizer iterations affordable.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .noise import NoiseConfig, NoisePlacement, apply_noise, noise_operators
from .qcore import (
    I2,
    X,
    Z,
    apply_channel,
    completeness_defect,
    dagger,
    is_unitary,
    ket_to_dm,
    partial_trace,
    pure_fidelity,
    tensor_product,
)

SQRT_HALF = np.sqrt(0.5)
ZX = Z @ X
PAULIS = np.array([I2, Z, X, ZX])
PHI_PLUS = np.array([SQRT_HALF, 0, 0, SQRT_HALF], dtype=complex)
BELL_CHANNEL = PHI_PLUS.copy()
IDENTITY_POST = np.array([I2, np.zeros((2, 2), dtype=complex)])

# Outcomes with probability at or below this are conditioned to I/2.
ZERO_PROBABILITY = 1e-12


class Variant(str, enum.Enum):
    """Which protocol components are free to adapt."""

    BELL = "bell"
    ROTATED = "rotated"
    FULL = "full"

    @classmethod
    def parse(cls, value: "str | Variant") -> "Variant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {"bell": cls.BELL, "bellbaseline": cls.BELL, "baseline": cls.BELL,
                   "rotated": cls.ROTATED, "rotatedbasis": cls.ROTATED,
                   "full": cls.FULL, "fullyadaptive": cls.FULL, "adaptive": cls.FULL}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown protocol variant {value!r} (expected bell, rotated or full)") from None


@dataclass(frozen=True, eq=False)
class ProtocolParams:
    """
    Full adaptive parameter set.

    Attributes
    ----------
    channel : np.ndarray
        Complex amplitudes ``(a, b, c, d)`` of the shared pair.
    meas : np.ndarray
        Measurement-basis angles ``(phi, theta, lambda)`` in radians.
    post : np.ndarray
        Post-processing Kraus pair, shape ``(2, 2, 2)``.
    variant : Variant
        Which components the variant lets adapt.
    corrections : np.ndarray or None
        Optional per-outcome correction angles, shape ``(4, 3)``. When None
        (the default) Bob's corrections are derived as ``U P_k U^dagger``.
    """

    channel: np.ndarray
    meas: np.ndarray
    post: np.ndarray
    variant: Variant = Variant.FULL
    corrections: np.ndarray | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "channel", np.ascontiguousarray(np.asarray(self.channel, dtype=complex).reshape(4)))
        object.__setattr__(self, "meas", np.asarray(self.meas, dtype=float).reshape(3))
        object.__setattr__(self, "post", np.ascontiguousarray(np.asarray(self.post, dtype=complex).reshape(2, 2, 2)))
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.corrections is not None:
            object.__setattr__(self, "corrections", np.asarray(self.corrections, dtype=float).reshape(4, 3))

    @classmethod
    def baseline(cls, variant: Variant | str = Variant.BELL) -> "ProtocolParams":
        """Standard Bell teleportation expressed in ``variant``'s parameter space."""
        return cls(BELL_CHANNEL.copy(), np.zeros(3), IDENTITY_POST.copy(), variant)

    def violations(self, atol: float = 1e-9) -> list[str]:
        problems = []
        if not (np.all(np.isfinite(self.channel)) and np.all(np.isfinite(self.meas))
                and np.all(np.isfinite(self.post))):
            problems.append("non-finite parameter")
            return problems
        norm_err = abs(np.vdot(self.channel, self.channel).real - 1.0)
        if norm_err > 1e-10:
            problems.append(f"channel norm off by {norm_err:.3e}")
        defect = completeness_defect(self.post)
        if defect > atol:
            problems.append(f"post-processing completeness defect {defect:.3e}")
        if self.variant is not Variant.FULL:
            if not (np.array_equal(self.channel, BELL_CHANNEL) and np.array_equal(self.post, IDENTITY_POST)):
                problems.append(f"{self.variant.value} variant must keep the Bell channel and identity post-processing")
        if self.variant is Variant.BELL and np.any(self.meas != 0):
            problems.append("bell variant must use zero measurement angles")
        return problems

    def validate(self) -> "ProtocolParams":
        problems = self.violations()
        if problems:
            raise ValueError("invalid protocol parameters: " + "; ".join(problems))
        return self


@dataclass(frozen=True)
class TeleportOutcome:
    probabilities: np.ndarray
    fidelities: np.ndarray
    total: float


def input_state(alpha: float, beta: float) -> np.ndarray:
    """``cos(alpha)|0> + exp(i beta) sin(alpha)|1>``."""
    return np.array([np.cos(alpha), np.exp(1j * beta) * np.sin(alpha)], dtype=complex)


def channel_state(coeffs) -> np.ndarray:
    """The pair state ``a|00> + b|01> + c|10> + d|11>``; coefficients must be normalized."""
    v = np.asarray(coeffs, dtype=complex).reshape(4)
    norm2 = np.vdot(v, v).real
    if abs(norm2 - 1.0) > 1e-10:
        raise ValueError(f"channel coefficients have squared norm {norm2}, expected 1")
    return v


def su2(phi: float, theta: float, lam: float) -> np.ndarray:
    """``Rz(phi) Ry(theta) Rz(lam)``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    plus = cmath.exp(0.5j * (phi + lam))
    minus = cmath.exp(0.5j * (phi - lam))
    return np.array([[c / plus, -s / minus], [s * minus, c * plus]])


def rotated_bell_basis(u: np.ndarray) -> np.ndarray:
    """
    Rows are the four states ``(P_k U (x) I)|Phi+>`` in Pauli order (I, Z, X, ZX).
    """
    if not is_unitary(u):
        raise ValueError("measurement rotation is not unitary")
    return np.array([tensor_product(p @ u, I2) @ PHI_PLUS for p in PAULIS])


def measurement_operators(basis: np.ndarray) -> np.ndarray:
    """Projectors ``|B_i><B_i| (x) I`` on the 3-qubit register, shape ``(4, 8, 8)``."""
    basis = np.asarray(basis, dtype=complex)
    if not np.allclose(basis.conj() @ basis.T, np.eye(4), atol=1e-9):
        raise ValueError("measurement basis is not orthonormal")
    return np.array([tensor_product(ket_to_dm(b), I2) for b in basis])


def correction_unitaries(u: np.ndarray) -> np.ndarray:
    """Bob's corrections ``U P_k U^dagger``, same order as the basis."""
    return u @ PAULIS @ dagger(u)


def outcome_corrections(params: ProtocolParams) -> np.ndarray:
    if params.corrections is None:
        return correction_unitaries(su2(*params.meas))
    return np.array([su2(*angles) for angles in params.corrections])


def post_process(rho: np.ndarray, post) -> np.ndarray:
    post = np.asarray(post, dtype=complex)
    defect = completeness_defect(post)
    if defect > 1e-9:
        raise ValueError(f"post-processing Kraus pair is not trace preserving (defect {defect:.3e})")
    return apply_channel(rho, post)


def teleport(alpha: float, beta: float, params: ProtocolParams, noise: NoiseConfig) -> TeleportOutcome:
    """
    Run the protocol for the input ``cos(alpha)|0> + exp(i beta) sin(alpha)|1>``.

    Fidelity is always measured against the noiseless input, even when the
    noise acts on the input qubit itself.
    """
    psi = input_state(alpha, beta)
    rho_in = ket_to_dm(psi)
    if noise.placement is NoisePlacement.INPUT:
        rho_in = apply_noise(rho_in, noise)
    rho_ent = ket_to_dm(channel_state(params.channel))
    if noise.placement is not NoisePlacement.INPUT:
        rho_ent = apply_noise(rho_ent, noise)
    rho_total = tensor_product(rho_in, rho_ent)

    ops = measurement_operators(rotated_bell_basis(su2(*params.meas)))
    corrections = outcome_corrections(params)

    probs = np.empty(4)
    fids = np.empty(4)
    for i, m in enumerate(ops):
        projected = m @ rho_total @ m
        p_i = float(np.trace(projected).real)
        if p_i > ZERO_PROBABILITY:
            rho_i = partial_trace(projected, 3, [2]) / p_i
        else:
            rho_i = I2 / 2
        rho_i = corrections[i] @ rho_i @ dagger(corrections[i])
        rho_i = post_process(rho_i, params.post)
        probs[i] = p_i
        fids[i] = pure_fidelity(rho_i, psi)
    return TeleportOutcome(probs, fids, float(probs @ fids))


def _superop(ops: np.ndarray) -> np.ndarray:
    """Row-major vectorized action ``vec(K rho K^dagger) = (K (x) conj(K)) vec(rho)``, per operator."""
    n = ops.shape[-1]
    lead = ops.shape[:-2]
    out = ops[..., :, None, :, None] * ops.conj()[..., None, :, None, :]
    return out.reshape(lead + (n * n, n * n))


def transfer_matrix(params: ProtocolParams, noise: NoiseConfig) -> np.ndarray:
    """
    Linear map from Alice's input state to Bob's outcome-averaged output.

    Returns a 4x4 matrix ``T`` acting on row-major vectorized 2x2 states:
    ``vec(rho_out) = T @ vec(rho_in)`` with ``rho_out = sum_i p_i rho_i``
    after corrections and post-processing. Zero-probability outcomes
    contribute nothing, matching :func:`teleport` up to terms of order
    ``ZERO_PROBABILITY``.
    """
    rho_ent = np.outer(params.channel, params.channel.conj())
    if noise.placement is not NoisePlacement.INPUT:
        ops = noise_operators(noise)
        rho_ent = (ops @ rho_ent @ dagger(ops)).sum(axis=0)
    # Reorder the pair state to r[(b, b'), (c, c')]: Alice indices, then Bob's.
    r = rho_ent.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)

    u = su2(*params.meas)
    # As a 2x2 matrix over (input, alice), (A (x) I)|Phi+> is A / sqrt(2).
    basis = PAULIS @ u * SQRT_HALF
    if params.corrections is None:
        corrections = u @ PAULIS @ dagger(u)
    else:
        corrections = outcome_corrections(params)
    sup = _superop(np.concatenate([basis.conj(), corrections, params.post]))
    w, corr, post = sup[:4], sup[4:8], sup[8] + sup[9]

    # Bob's unnormalized state for outcome i is linear in rho_in:
    # vec(sigma_i) = s[i] @ vec(rho_in), s[i] = (w[i] @ r)^T.
    s = np.swapaxes(w @ r, 1, 2)
    t = post @ (corr @ s).sum(axis=0)

    if noise.placement is NoisePlacement.INPUT:
        t = t @ _superop(noise_operators(noise)).sum(axis=0)
    return t


def transfer_tensor(params: ProtocolParams, noise: NoiseConfig) -> np.ndarray:
    """:func:`transfer_matrix` as ``T[c, c', a, a']`` with ``rho_out[c, c'] = sum T rho_in[a, a']``."""
    return transfer_matrix(params, noise).reshape(2, 2, 2, 2)


@dataclass(frozen=True, eq=False)
class FidelityGrid:
    """
    Quadrature nodes on the Bloch sphere.

    ``polar`` is the Bloch polar angle in ``[0, pi]`` and ``azimuth`` the
    relative phase in ``[0, 2 pi)``; node weights are ``sin(polar)``. The
    input state at a node is ``cos(polar/2)|0> + exp(i azimuth) sin(polar/2)|1>``,
    i.e. ``input_state(polar / 2, azimuth)``, so the weighted sum is a
    quadrature for the uniform average over pure states.
    """

    polar: np.ndarray
    azimuth: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for name in ("polar", "azimuth", "weights"):
            arr = np.asarray(getattr(self, name), dtype=float).ravel()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.polar.size == self.azimuth.size == self.weights.size) or self.polar.size == 0:
            raise ValueError("grid arrays must be non-empty and of equal length")
        if self.weights.sum() <= 0:
            raise ValueError("grid weights must have positive sum")
        if np.any((self.polar < 0) | (self.polar > np.pi)):
            raise ValueError("polar angles must lie in [0, pi]")
        if np.any((self.azimuth < 0) | (self.azimuth >= 2 * np.pi)):
            raise ValueError("azimuth angles must lie in [0, 2 pi)")

    @classmethod
    def midpoint(cls, n_polar: int = 24, n_azimuth: int | None = None) -> "FidelityGrid":
        """Tensor midpoint rule with ``n_polar x n_azimuth`` nodes."""
        n_azimuth = n_polar if n_azimuth is None else n_azimuth
        if n_polar < 1 or n_azimuth < 1:
            raise ValueError("grid needs at least one node per axis")
        theta = (np.arange(n_polar) + 0.5) * np.pi / n_polar
        beta = (np.arange(n_azimuth) + 0.5) * 2 * np.pi / n_azimuth
        tt, bb = np.meshgrid(theta, beta, indexing="ij")
        return cls(tt.ravel(), bb.ravel(), np.sin(tt).ravel())

    def __len__(self) -> int:
        return self.polar.size

    @property
    def input_angles(self) -> tuple[np.ndarray, np.ndarray]:
        """``(alpha, beta)`` arguments for :func:`input_state` at each node."""
        return self.polar / 2, self.azimuth

    @cached_property
    def states(self) -> np.ndarray:
        alpha, beta = self.input_angles
        return np.stack([np.cos(alpha), np.exp(1j * beta) * np.sin(alpha)], axis=1)

    @cached_property
    def moments(self) -> np.ndarray:
        """Weighted mean of ``conj(psi_c) psi_c' psi_a conj(psi_a')`` over nodes."""
        psi = self.states
        w = self.weights / self.weights.sum()
        g = np.einsum("n,nc,nC,na,nA->cCaA", w, psi.conj(), psi, psi, psi.conj())
        g.setflags(write=False)
        return g

    @cached_property
    def moment_matrix(self) -> np.ndarray:
        return self.moments.reshape(4, 4)


def state_fidelities(params: ProtocolParams, noise: NoiseConfig, states: np.ndarray) -> np.ndarray:
    """Total fidelity ``sum_i p_i F_i`` for each row of ``states`` (shape ``(n, 2)``)."""
    t = transfer_tensor(params, noise)
    psi = np.asarray(states, dtype=complex).reshape(-1, 2)
    return np.einsum("cCaA,nc,nC,na,nA->n", t, psi.conj(), psi, psi, psi.conj()).real


def average_fidelity(params: ProtocolParams, noise: NoiseConfig, grid: FidelityGrid) -> float:
    """``sum_n sin(theta_n) F_n / sum_n sin(theta_n)`` over the grid nodes."""
    return float(np.real(np.sum(transfer_matrix(params, noise) * grid.moment_matrix)))


def average_fidelity_direct(params: ProtocolParams, noise: NoiseConfig, grid: FidelityGrid) -> float:
    """Same quantity as :func:`average_fidelity`, node by node through :func:`teleport`."""
    alphas, betas = grid.input_angles
    totals = np.array([teleport(a, b, params, noise).total for a, b in zip(alphas, betas)])
    return float(totals @ grid.weights / grid.weights.sum())
