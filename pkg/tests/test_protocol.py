import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from mlteleport import qcore
from mlteleport.noise import NoiseConfig, NoiseModel, NoisePlacement, kraus_for
from mlteleport.optimizer import N_PARAMS, project_feasible
from mlteleport.protocol import (
    BELL_CHANNEL,
    FidelityGrid,
    ProtocolParams,
    Variant,
    average_fidelity,
    average_fidelity_direct,
    channel_state,
    correction_unitaries,
    input_state,
    measurement_operators,
    post_process,
    rotated_bell_basis,
    state_fidelities,
    su2,
    teleport,
    transfer_matrix,
)
from mlteleport.qcore import I2, X, Z

SQ = np.sqrt(0.5)
BELL = ProtocolParams.baseline()
GRID64 = FidelityGrid.midpoint(64)

seeds = st.integers(0, 2**32 - 1)
models = st.sampled_from(list(NoiseModel))
placements = st.sampled_from(list(NoisePlacement))
alphas = st.floats(0, np.pi)
betas = st.floats(0, 2 * np.pi, exclude_max=True)


def random_params(rng):
    return project_feasible(rng.normal(size=N_PARAMS))


def test_input_state_examples():
    assert np.allclose(input_state(0, 1.3), [1, 0])
    assert np.allclose(input_state(np.pi / 2, 0), [0, 1])
    assert np.allclose(input_state(np.pi / 4, np.pi / 2), [SQ, 1j * SQ])


def test_channel_state_examples():
    assert np.allclose(channel_state([SQ, 0, 0, SQ]), [SQ, 0, 0, SQ])
    assert np.allclose(channel_state([1, 0, 0, 0]), [1, 0, 0, 0])
    assert np.allclose(channel_state([0, SQ, SQ, 0]), [0, SQ, SQ, 0])
    with pytest.raises(ValueError):
        channel_state([1, 1, 0, 0])


def test_su2_examples():
    assert np.allclose(su2(0, 0, 0), I2)
    assert np.allclose(su2(0, np.pi, 0), [[0, -1], [1, 0]])
    assert np.allclose(su2(np.pi, 0, 0), np.diag([-1j, 1j]))


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_su2_is_rz_ry_rz(phi, theta, lam):
    rz = lambda a: np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
    ry = np.array([[np.cos(theta / 2), -np.sin(theta / 2)], [np.sin(theta / 2), np.cos(theta / 2)]])
    u = su2(phi, theta, lam)
    assert np.max(np.abs(u - rz(phi) @ ry @ rz(lam))) <= 1e-12
    assert np.max(np.abs(u.conj().T @ u - I2)) <= 1e-12


def test_bell_basis_examples():
    b = rotated_bell_basis(I2)
    assert np.allclose(b[0], [SQ, 0, 0, SQ])
    assert np.allclose(b[1], [SQ, 0, 0, -SQ])
    assert np.allclose(b[2], [0, SQ, SQ, 0])
    assert np.allclose(b[3], [0, SQ, -SQ, 0])  # (ZX (x) I)|Phi+>
    assert np.allclose(rotated_bell_basis(X)[0], [0, SQ, SQ, 0])
    with pytest.raises(ValueError):
        rotated_bell_basis(2 * I2)


@given(st.floats(-7, 7), st.floats(-7, 7), st.floats(-7, 7))
def test_bell_basis_orthonormal(phi, theta, lam):
    b = rotated_bell_basis(su2(phi, theta, lam))
    assert np.max(np.abs(b.conj() @ b.T - np.eye(4))) <= 1e-12


def test_measurement_operator_examples():
    ops = measurement_operators(rotated_bell_basis(su2(0.3, 1.1, -0.4)))
    assert np.max(np.abs(ops.sum(axis=0) - np.eye(8))) <= 1e-12
    for m in ops:
        assert np.allclose(m @ m, m)
        assert np.allclose(m, m.conj().T)
        assert np.trace(m).real == pytest.approx(2)
    with pytest.raises(ValueError):
        measurement_operators(np.eye(4)[[0, 0, 1, 2]])


def test_correction_examples():
    assert np.allclose(correction_unitaries(I2), [I2, Z, X, Z @ X])
    u = su2(0.7, -1.2, 2.5)
    for c in correction_unitaries(u):
        assert qcore.is_unitary(c, atol=1e-12)
    h = su2(0, np.pi / 2, np.pi)
    ev = np.sort(np.linalg.eigvals(correction_unitaries(h)[1]).real)
    assert np.allclose(ev, [-1, 1])


def test_post_process_examples():
    rng = np.random.default_rng(0)
    rho = qcore.random_density_matrix(2, rng)
    assert np.allclose(post_process(rho, [I2, 0 * I2]), rho)
    assert np.allclose(post_process(rho, kraus_for("bitflip", 1.0)), X @ rho @ X)
    assert np.allclose(post_process(rho, kraus_for("ad", 1.0)), np.diag([1, 0]))
    with pytest.raises(ValueError):
        post_process(rho, [I2, I2])


def test_params_validation():
    assert BELL.violations() == []
    assert ProtocolParams.baseline(Variant.ROTATED).violations() == []
    bad = ProtocolParams(np.array([1, 1, 0, 0]), np.zeros(3), np.array([I2, 0 * I2]))
    assert bad.violations()
    with pytest.raises(ValueError):
        bad.validate()
    rotated = ProtocolParams(BELL_CHANNEL, [0.1, 0, 0], [I2, 0 * I2], Variant.BELL)
    assert rotated.violations()
    assert Variant.parse("FullyAdaptive") is Variant.FULL


# teleport


@settings(max_examples=50)
@given(alphas, betas)
def test_noiseless_bell_is_exact(alpha, beta):
    for model in NoiseModel:
        out = teleport(alpha, beta, BELL, NoiseConfig(model, 0.0))
        assert out.total == pytest.approx(1, abs=1e-9)
        assert np.allclose(out.probabilities, 0.25, atol=1e-9)


def test_bitflip_full_flip_sends_one():
    out = teleport(0, 0, BELL, NoiseConfig("bitflip", 1.0, "alice"))
    assert out.total == pytest.approx(0, abs=1e-12)


@given(alphas, betas, st.floats(0, 1))
def test_bitflip_mixture_formula(alpha, beta, p):
    psi = input_state(alpha, beta)
    expected = (1 - p) + p * abs(np.vdot(psi, X @ psi)) ** 2
    out = teleport(alpha, beta, BELL, NoiseConfig("bitflip", p, "alice"))
    assert out.total == pytest.approx(expected, abs=1e-12)


@settings(max_examples=60)
@given(seeds, models, placements, st.floats(0, 1), alphas, betas)
def test_outcome_invariants(seed, model, placement, p, alpha, beta):
    params = random_params(np.random.default_rng(seed))
    out = teleport(alpha, beta, params, NoiseConfig(model, p, placement))
    assert abs(out.probabilities.sum() - 1) <= 1e-9
    assert np.all(out.probabilities >= -1e-10)
    assert np.all((out.fidelities >= -1e-9) & (out.fidelities <= 1 + 1e-9))
    assert out.total == pytest.approx(out.probabilities @ out.fidelities)


@settings(max_examples=40, deadline=None)
@given(seeds, models, placements, st.floats(0, 1), alphas, betas)
def test_teleport_matches_oracle(seed, model, placement, p, alpha, beta):
    params = random_params(np.random.default_rng(seed))
    ours = teleport(alpha, beta, params, NoiseConfig(model, p, placement)).total
    ref = oracle.teleport_fidelity(alpha, beta, params.channel, params.meas,
                                   [j.tolist() for j in params.post], model.value, p, placement.value)
    assert abs(ours - ref) <= 1e-9


def test_input_noise_uses_noiseless_target():
    # bit-flip p=1 on the input turns |0> into |1>, which arrives perfectly but is wrong
    out = teleport(0, 0, BELL, NoiseConfig("bitflip", 1.0, "input"))
    assert out.total == pytest.approx(0, abs=1e-12)


def test_zero_probability_outcomes():
    # product channel |00> with zero input: outcomes 2 and 3 never occur
    params = ProtocolParams([1, 0, 0, 0], np.zeros(3), [I2, 0 * I2])
    out = teleport(0, 0, params, NoiseConfig("bitflip", 0.0))
    assert np.allclose(out.probabilities, [0.5, 0.5, 0, 0])
    assert np.isfinite(out.total)


def test_explicit_corrections_extension():
    derived = teleport(0.4, 1.0, BELL, NoiseConfig("ad", 0.3))
    pauli_angles = [[0, 0, 0], [np.pi, 0, 0], [0, np.pi, np.pi], [0, np.pi, 0]]
    # su2 angles reproducing I, Z, X, ZX up to global phase
    for angles, target in zip(pauli_angles, [I2, Z, X, Z @ X]):
        u = su2(*angles)
        assert abs(abs(np.trace(u.conj().T @ target)) - 2) < 1e-12
    explicit = ProtocolParams(BELL_CHANNEL, np.zeros(3), [I2, 0 * I2], corrections=pauli_angles)
    out = teleport(0.4, 1.0, explicit, NoiseConfig("ad", 0.3))
    assert out.total == pytest.approx(derived.total, abs=1e-12)
    none = ProtocolParams(BELL_CHANNEL, np.zeros(3), [I2, 0 * I2], corrections=np.zeros((4, 3)))
    assert teleport(0.4, 1.0, none, NoiseConfig("ad", 0.3)).total < derived.total
    assert average_fidelity(explicit, NoiseConfig("ad", 0.3), FidelityGrid.midpoint(6)) == pytest.approx(
        average_fidelity_direct(explicit, NoiseConfig("ad", 0.3), FidelityGrid.midpoint(6)), abs=1e-12)


# Measurement-basis covariance. On the ideal channel, outcome k leaves Bob
# with U^dagger P_k^dagger psi, so the derived correction U P_k U^dagger
# restores psi for every k only when U is proportional to the identity.


@pytest.mark.parametrize("angles", [(0, 0, 0), (2 * np.pi, 0, 0), (0, 2 * np.pi, 0), (1.0, 0, -1.0),
                                    (0.7, 0, 2 * np.pi - 0.7)])
def test_rotated_basis_exact_for_scalar_u(angles):
    params = ProtocolParams(BELL_CHANNEL, angles, [I2, 0 * I2], Variant.ROTATED)
    for alpha, beta in [(0.3, 0.2), (1.2, 4.0), (np.pi / 2, 1.0)]:
        assert teleport(alpha, beta, params, NoiseConfig("bitflip", 0)).total == pytest.approx(1, abs=1e-9)


@settings(max_examples=50)
@given(st.floats(-7, 7), st.floats(-7, 7), st.floats(-7, 7), alphas, betas)
def test_rotated_basis_outcome_fidelities(phi, theta, lam, alpha, beta):
    u = su2(phi, theta, lam)
    psi = input_state(alpha, beta)
    params = ProtocolParams(BELL_CHANNEL, (phi, theta, lam), [I2, 0 * I2], Variant.ROTATED)
    out = teleport(alpha, beta, params, NoiseConfig("bitflip", 0))
    assert np.allclose(out.probabilities, 0.25, atol=1e-9)
    for k, (p_k, c_k) in enumerate(zip([I2, Z, X, Z @ X], correction_unitaries(u))):
        bob = c_k @ u.conj().T @ p_k.conj().T @ psi
        assert out.fidelities[k] == pytest.approx(abs(np.vdot(psi, bob)) ** 2, abs=1e-9)


@pytest.mark.parametrize("angles", [(0, np.pi, 0), (0, np.pi / 2, np.pi), (np.pi, 0, 0), (0.4, 0.9, 0.2)])
def test_rotated_basis_not_exact_for_generic_u(angles):
    params = ProtocolParams(BELL_CHANNEL, angles, [I2, 0 * I2], Variant.ROTATED)
    assert average_fidelity(params, NoiseConfig("bitflip", 0), GRID64) < 0.99


# averages


@pytest.mark.parametrize("placement", list(NoisePlacement))
def test_fast_average_matches_direct(placement):
    rng = np.random.default_rng(7)
    grid = FidelityGrid.midpoint(8, 5)
    for model in NoiseModel:
        params = random_params(rng)
        noise = NoiseConfig(model, float(rng.uniform()), placement)
        assert average_fidelity(params, noise, grid) == pytest.approx(
            average_fidelity_direct(params, noise, grid), abs=1e-12)


@settings(max_examples=30)
@given(seeds, models, placements, st.floats(0, 1))
def test_state_fidelities_match_teleport(seed, model, placement, p):
    rng = np.random.default_rng(seed)
    params = random_params(rng)
    noise = NoiseConfig(model, p, placement)
    a, b = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
    fast = state_fidelities(params, noise, input_state(a, b))[0]
    assert fast == pytest.approx(teleport(a, b, params, noise).total, abs=1e-12)


@given(seeds, st.floats(0, 2 * np.pi))
def test_global_phase_invariance(seed, gamma):
    rng = np.random.default_rng(seed)
    params = random_params(rng)
    noise = NoiseConfig("ad", float(rng.uniform()), "both")
    states = oracle.bloch_samples(20, rng)
    f0 = state_fidelities(params, noise, states)
    f1 = state_fidelities(params, noise, np.exp(1j * gamma) * states)
    assert np.max(np.abs(f0 - f1)) <= 1e-12


def test_transfer_matrix_is_trace_preserving():
    rng = np.random.default_rng(8)
    for _ in range(20):
        t = transfer_matrix(random_params(rng), NoiseConfig("depolarizing", float(rng.uniform()), "both"))
        # Tr(rho_out) = Tr(rho_in): rows 0 and 3 of T sum to vec(I)
        assert np.allclose(t[0] + t[3], [1, 0, 0, 1], atol=1e-12)


@pytest.mark.parametrize("model", list(NoiseModel))
@pytest.mark.parametrize("placement", list(NoisePlacement))
def test_noiseless_average_is_one(model, placement):
    assert average_fidelity(BELL, NoiseConfig(model, 0.0, placement), GRID64) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("model", ["bitflip", "depolarizing"])
def test_alice_baseline_analytic(model):
    for p in np.linspace(0, 1, 11):
        f = average_fidelity(BELL, NoiseConfig(model, p, "alice"), GRID64)
        assert abs(f - (1 - 2 * p / 3)) <= 1e-3


@pytest.mark.parametrize("model", ["bitflip", "depolarizing", "ad"])
def test_monte_carlo_agrees_with_grid(model):
    rng = np.random.default_rng(11)
    states = oracle.bloch_samples(100_000, rng)
    for p in (0.3, 0.8):
        noise = NoiseConfig(model, p, "alice")
        f = state_fidelities(BELL, noise, states)
        stderr = f.std() / np.sqrt(f.size)
        assert abs(f.mean() - average_fidelity(BELL, noise, GRID64)) <= max(5 * stderr, 1e-3)


@pytest.mark.parametrize("model", list(NoiseModel))
@pytest.mark.parametrize("placement", ["alice", "both"])
def test_grid_refinement(model, placement):
    for p in (0.25, 0.6, 1.0):
        noise = NoiseConfig(model, p, placement)
        coarse = average_fidelity(BELL, noise, FidelityGrid.midpoint(32))
        assert abs(coarse - average_fidelity(BELL, noise, GRID64)) <= 1e-3


def test_grid_validation():
    g = FidelityGrid.midpoint(4, 3)
    assert len(g) == 12
    assert g.states.shape == (12, 2)
    with pytest.raises(ValueError):
        FidelityGrid([0.1], [0.0], [0.0])
    with pytest.raises(ValueError):
        FidelityGrid([4.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        FidelityGrid.midpoint(0)
