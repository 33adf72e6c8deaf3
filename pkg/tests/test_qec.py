import logging

import numpy as np
import pytest

from disentangle.codes import PAULI_MATRICES, ErrorOperator, QuantumCode
from disentangle.linalg import (
    StateVector,
    conjugate_density,
    fidelity,
    partial_trace,
    schmidt_deficit,
    tensor_product,
    unitarity_deviation,
)
from disentangle.qec import (
    BystanderState,
    EnvironmentCoupling,
    MixedErrorChannel,
    ancilla_zero,
    apply_environment_coupling,
    apply_error,
    apply_mixed_error,
    apply_pauli,
    apply_superposed_error,
    attach_environment,
    build_encoder,
    build_error_basis,
    check_orthogonality_conditions,
    decode,
    decode_and_verify,
    encode,
    encode_with_bystanders,
    environment_expansion,
    join_on_qubit,
    measure_syndrome_and_correct,
    random_coefficients,
    refresh_ancilla,
    split_on_qubit,
)


def test_error_basis_is_orthonormal(five_qubit):
    basis = build_error_basis(five_qubit)
    assert len(basis) == 32
    stacked = np.column_stack([v.amplitudes for v in basis])
    assert np.abs(stacked.conj().T @ stacked - np.eye(32)).max() < 1e-10
    # index = z * 16 + a
    assert np.array_equal(basis[16].amplitudes, five_qubit.codeword_one.amplitudes)


def test_encoder_columns(five_qubit):
    encoder = build_encoder(five_qubit)
    assert unitarity_deviation(encoder.matrix) < 1e-10
    assert encoder.is_real(tol=1e-12)
    expected = five_qubit.operators[7].matrix @ five_qubit.codeword_one.amplitudes
    assert np.abs(encoder.matrix[:, 16 + 7] - expected).max() < 1e-12


def test_bit_flip_encoder_exists(bit_flip):
    encoder = build_encoder(bit_flip)
    assert encoder.dim == 8
    assert unitarity_deviation(encoder.matrix) < 1e-12


def test_encode_places_logical_amplitudes(five_qubit, rng):
    logical = StateVector.random((2,), rng)
    encoded = encode(logical, five_qubit)
    alpha, beta = logical.amplitudes
    zero, one = five_qubit.codeword_zero.amplitudes, five_qubit.codeword_one.amplitudes
    expected = alpha * zero + beta * one
    assert np.abs(encoded.amplitudes - expected).max() < 1e-12
    with pytest.raises(ValueError):
        encode(StateVector.from_bits("00"), five_qubit)


def test_decode_inverts_encode(five_qubit, rng):
    logical = StateVector.random((2,), rng)
    decoded = decode(encode(logical, five_qubit), five_qubit)
    expected = tensor_product(logical, ancilla_zero(five_qubit))
    assert np.abs(decoded.amplitudes - expected.amplitudes).max() < 1e-12


@pytest.mark.parametrize("syndrome", range(16))
def test_every_single_error_factors_out(five_qubit, syndrome):
    logical = StateVector.random((2,), seed=100 + syndrome)
    corrupted = apply_error(encode(logical, five_qubit), five_qubit, syndrome)
    report = decode_and_verify(corrupted, five_qubit, logical)
    assert report.product
    assert report.recovered()
    assert report.fidelity > 1 - 1e-10
    assert report.logical_purity > 1 - 1e-10
    assert report.syndrome.support(tol=1e-10) == [syndrome]
    ancilla = StateVector.basis((2,) * 4, syndrome)
    assert abs(abs(np.vdot(report.residual.amplitudes, ancilla.amplitudes)) - 1) < 1e-10


def test_decoded_state_equals_logical_times_syndrome(five_qubit, plus):
    corrupted = apply_error(encode(plus, five_qubit), five_qubit, five_qubit.syndrome_of("ZX3"))
    decoded = decode(corrupted, five_qubit)
    expected = tensor_product(plus, StateVector.basis((2,) * 4, 13))
    assert np.abs(decoded.amplitudes - expected.amplitudes).max() < 1e-12


def test_apply_error_rejects_bad_syndrome(five_qubit, plus):
    with pytest.raises(ValueError):
        apply_error(encode(plus, five_qubit), five_qubit, 16)


def test_superposed_error(five_qubit, rng):
    logical = StateVector.random((2,), rng)
    coefficients = random_coefficients(five_qubit, rng)
    corrupted = apply_superposed_error(encode(logical, five_qubit), five_qubit, coefficients)
    report = decode_and_verify(corrupted, five_qubit, logical)
    assert report.recovered()
    assert np.abs(report.syndrome.probabilities - np.abs(coefficients) ** 2).max() < 1e-10
    overlap = np.vdot(report.residual.amplitudes, coefficients)
    assert abs(abs(overlap) - 1) < 1e-10


def test_superposed_errors_over_many_seeds(five_qubit):
    for seed in range(100):
        logical = StateVector.random((2,), seed=seed)
        coefficients = random_coefficients(five_qubit, seed=1000 + seed)
        corrupted = apply_superposed_error(encode(logical, five_qubit), five_qubit, coefficients)
        report = decode_and_verify(corrupted, five_qubit, logical)
        assert report.recovered(), seed
        overlap = np.vdot(report.residual.amplitudes, coefficients)
        assert abs(abs(overlap) - 1) < 1e-10, seed


def test_superposed_error_validation(five_qubit, plus):
    encoded = encode(plus, five_qubit)
    with pytest.raises(ValueError):
        apply_superposed_error(encoded, five_qubit, np.ones(15) / np.sqrt(15))
    with pytest.raises(ValueError):
        apply_superposed_error(encoded, five_qubit, np.ones(16))


def test_depolarizing_mixture(five_qubit, rng):
    logical = StateVector.random((2,), rng)
    rho = encode(logical, five_qubit).density()
    corrupted = apply_mixed_error(rho, MixedErrorChannel.depolarizing(2), five_qubit)
    assert abs(np.trace(corrupted.matrix) - 1) < 1e-12
    report = decode_and_verify(corrupted, five_qubit, logical)
    assert report.product
    assert report.fidelity > 1 - 1e-10
    labels = ("I", "X3", "Z3", "ZX3")
    for label in labels:
        assert abs(report.syndrome.probability(five_qubit.syndrome_of(label)) - 0.25) < 1e-10


def test_random_unitary_mixture(five_qubit, rng):
    logical = StateVector.random((2,), rng)
    channel = MixedErrorChannel.random(five_qubit, n_terms=4, seed=rng)
    assert abs(sum(term.weight for term in channel.terms) - 1) < 1e-12
    corrupted = apply_mixed_error(encode(logical, five_qubit).density(), channel, five_qubit)
    report = decode_and_verify(corrupted, five_qubit, logical)
    assert report.recovered()


def test_mixed_channel_validation():
    with pytest.raises(ValueError):
        MixedErrorChannel.from_errors([0.5, 0.4], [None, ErrorOperator("X", 0)])
    with pytest.raises(ValueError):
        MixedErrorChannel.from_errors([1.0], [None, None])
    with pytest.raises(ValueError):
        MixedErrorChannel(())
    channel = MixedErrorChannel.from_errors([0.9, 0.1], [None, ErrorOperator("Z", 4)])
    assert [term.qubits for term in channel.terms] == [(0,), (4,)]


def test_mixed_pauli_channel_matches_pure_branches(five_qubit, plus):
    encoded = encode(plus, five_qubit)
    channel = MixedErrorChannel.from_errors([0.7, 0.3], [None, ErrorOperator("X", 1)])
    mixed = apply_mixed_error(encoded.density(), channel)
    flipped = apply_error(encoded, five_qubit, five_qubit.syndrome_of("X2"))
    expected = 0.7 * encoded.density().matrix + 0.3 * flipped.density().matrix
    assert np.abs(mixed.matrix - expected).max() < 1e-12


@pytest.mark.parametrize("qubit", range(5))
def test_environment_coupling_factors_out(five_qubit, qubit):
    logical = StateVector.random((2,), seed=7 + qubit)
    coupling = EnvironmentCoupling.haar_random(env_dim=4, seed=31 + qubit)
    coupled = apply_environment_coupling(
        attach_environment(encode(logical, five_qubit), coupling), coupling, qubit
    )
    assert coupled.dims == (2,) * 5 + (4,)
    report = decode_and_verify(coupled, five_qubit, logical)
    assert report.recovered()
    assert report.residual.dims == (2,) * 4 + (4,)
    # the syndrome is only supported on errors touching the coupled qubit
    allowed = {0} | {five_qubit.syndrome_of(f"{p}{qubit + 1}") for p in ("X", "Z", "ZX")}
    assert set(report.syndrome.support(tol=1e-10)) <= allowed


def test_environment_remainder_is_independent_of_logical_input(five_qubit):
    inputs = [
        StateVector.basis((2,), 0),
        StateVector.basis((2,), 1),
        StateVector.qubit(1 / np.sqrt(2), 1j / np.sqrt(2)),
    ]
    encoded = [encode(logical, five_qubit) for logical in inputs]
    for seed in range(100):
        coupling = EnvironmentCoupling.haar_random(env_dim=4, seed=seed)
        for qubit in range(5):
            residuals = []
            for logical, state in zip(inputs, encoded):
                coupled = apply_environment_coupling(
                    attach_environment(state, coupling), coupling, qubit
                )
                report = decode_and_verify(coupled, five_qubit, logical)
                assert report.recovered(), (seed, qubit)
                residuals.append(report.residual)
            assert fidelity(residuals[0], residuals[1]) >= 1 - 1e-10, (seed, qubit)
            assert fidelity(residuals[0], residuals[2]) >= 1 - 1e-10, (seed, qubit)


def test_environment_expansion_matches_direct_coupling(five_qubit, rng):
    coupling = EnvironmentCoupling.haar_random(env_dim=3, seed=rng)
    logical = StateVector.random((2,), rng)
    encoded = encode(logical, five_qubit)
    for qubit in range(5):
        direct = apply_environment_coupling(attach_environment(encoded, coupling), coupling, qubit)
        expanded = environment_expansion(encoded, coupling, qubit)
        assert np.abs(direct.amplitudes - expanded.amplitudes).max() < 1e-12


def test_coupling_branches_are_consistent(rng):
    coupling = EnvironmentCoupling.haar_random(env_dim=4, seed=rng)
    b = coupling.branches()
    assert abs(np.vdot(b["mu"], b["mu"]) + np.vdot(b["nu"], b["nu"]) - 1) < 1e-12
    assert abs(np.vdot(b["sigma"], b["sigma"]) + np.vdot(b["tau"], b["tau"]) - 1) < 1e-12
    assert abs(np.vdot(b["mu"], b["sigma"]) + np.vdot(b["nu"], b["tau"])) < 1e-12


def test_spectator_environment_reduces_to_pauli(five_qubit, plus):
    coupling = EnvironmentCoupling.from_qubit_operator(PAULI_MATRICES["X"], env_dim=2)
    coupled = apply_environment_coupling(
        attach_environment(encode(plus, five_qubit), coupling), coupling, 1
    )
    report = decode_and_verify(coupled, five_qubit, plus)
    assert report.recovered()
    assert report.syndrome.support(tol=1e-10) == [five_qubit.syndrome_of("X2")]


def test_environment_validation(five_qubit, plus):
    with pytest.raises(ValueError):
        EnvironmentCoupling.haar_random(env_dim=1, seed=0)
    coupling = EnvironmentCoupling.haar_random(env_dim=2, seed=0)
    attached = attach_environment(encode(plus, five_qubit), coupling)
    with pytest.raises(ValueError):
        apply_environment_coupling(attached, coupling, 5)
    wider = EnvironmentCoupling.haar_random(env_dim=3, seed=0)
    with pytest.raises(ValueError):
        apply_environment_coupling(attached, wider, 0)


def test_split_and_join_on_qubit(rng):
    s = StateVector.random((2,) * 4, rng)
    for qubit in range(4):
        x0, x1 = split_on_qubit(s.amplitudes, 4, qubit)
        assert x0.size == x1.size == 8
        assert np.array_equal(join_on_qubit(x0, x1, 4, qubit), s.amplitudes)
    x0, _ = split_on_qubit(StateVector.from_bits("0110").amplitudes, 4, 0)
    assert np.flatnonzero(x0).tolist() == [0b110]


@pytest.mark.parametrize("qubit", range(5))
def test_five_qubit_orthogonality_conditions(five_qubit, qubit):
    report = check_orthogonality_conditions(five_qubit, qubit)
    assert len(report.scalar_products) == 10
    assert report.passed()
    assert abs(report.scalar_products["00,00"] - 0.5) < 1e-12
    assert report.to_dict()["pass"] is True


def test_bit_flip_orthogonality_fails(bit_flip):
    report = check_orthogonality_conditions(bit_flip, 0)
    assert not report.passed()
    assert abs(report.deviations["00,00"] - 0.5) < 1e-12
    with pytest.raises(ValueError):
        check_orthogonality_conditions(bit_flip, 3)


@pytest.mark.parametrize("label", ["X1", "X2", "X3"])
def test_bit_flip_corrects_bit_flips(bit_flip, plus, label):
    corrupted = apply_error(encode(plus, bit_flip), bit_flip, bit_flip.syndrome_of(label))
    assert decode_and_verify(corrupted, bit_flip, plus).recovered()


def test_bit_flip_phase_error_is_not_recovered(bit_flip, plus):
    corrupted = apply_pauli(encode(plus, bit_flip), ErrorOperator("Z", 0))
    report = decode_and_verify(corrupted, bit_flip, plus)
    # still a product, but the logical qubit carries the phase flip
    assert report.product
    assert report.fidelity < 1e-12
    assert not report.recovered()


def test_bit_flip_partial_phase_error(bit_flip):
    theta = 0.3
    logical = StateVector.qubit(np.cos(theta), np.sin(theta))
    corrupted = apply_pauli(encode(logical, bit_flip), ErrorOperator("Z", 0))
    report = decode_and_verify(corrupted, bit_flip, logical)
    assert abs(report.fidelity - np.cos(2 * theta) ** 2) < 1e-12


def test_incomplete_code_flagged_complete_is_rejected(caplog):
    zero, one = StateVector.from_bits("000"), StateVector.from_bits("111")
    errors = (ErrorOperator("X", 0), ErrorOperator("Z", 0), ErrorOperator("X", 1))
    with pytest.raises(ValueError):
        build_error_basis(QuantumCode("claims-complete", 3, zero, one, errors, complete=True))
    partial = QuantumCode("partial", 3, zero, one, errors, complete=False)
    with caplog.at_level(logging.WARNING):
        assert len(build_error_basis(partial)) == 8
    assert "not orthonormal" in caplog.text
    with pytest.raises(ValueError):
        build_encoder(partial)


def test_bystanders_keep_their_entanglement(five_qubit, bell):
    computer = BystanderState(bell)
    assert computer.n_bystanders == 1
    encoded = encode_with_bystanders(computer, five_qubit)
    assert encoded.dims == (2,) * 6
    corrupted = apply_error(encoded, five_qubit, five_qubit.syndrome_of("Z4"), n_bystanders=1)
    report = decode_and_verify(corrupted, five_qubit, bell, n_bystanders=1)
    assert report.recovered()
    # the bystander alone is still maximally mixed
    bystander = partial_trace(report.logical, [0])
    assert np.abs(bystander.matrix - np.eye(2) / 2).max() < 1e-12
    assert schmidt_deficit(report.decoded, [0]) > 0.4


def test_bystander_validation(five_qubit):
    with pytest.raises(ValueError):
        BystanderState(StateVector.random((2, 3), seed=1))
    with pytest.raises(ValueError):
        encoded = encode(StateVector.from_bits("0"), five_qubit)
        decode_and_verify(encoded, five_qubit, StateVector.from_bits("00"))


def test_bystanders_with_environment(five_qubit, bell):
    encoded = encode_with_bystanders(BystanderState(bell), five_qubit)
    coupling = EnvironmentCoupling.haar_random(env_dim=2, seed=5)
    coupled = apply_environment_coupling(
        attach_environment(encoded, coupling), coupling, 2, n_bystanders=1
    )
    assert decode_and_verify(coupled, five_qubit, bell, n_bystanders=1).recovered()


def test_refresh_ancilla(five_qubit, rng):
    logical = StateVector.random((2,), rng)
    corrupted = apply_error(encode(logical, five_qubit), five_qubit, 11)
    report = decode_and_verify(corrupted, five_qubit, logical)
    refreshed = refresh_ancilla(report.decoded, five_qubit)
    assert refreshed.dims == (2,) * 5
    fresh = tensor_product(logical, ancilla_zero(five_qubit)).density()
    assert np.abs(refreshed.matrix - fresh.matrix).max() < 1e-10
    # a refreshed block can be re-encoded and survives a second error
    reencoded = conjugate_density(build_encoder(five_qubit), refreshed, range(5))
    channel = MixedErrorChannel.from_errors([1.0], [ErrorOperator("ZX", 4)])
    again = apply_mixed_error(reencoded, channel, five_qubit)
    second = decode_and_verify(again, five_qubit, logical)
    assert second.recovered()
    assert abs(second.syndrome.probability(five_qubit.syndrome_of("ZX5")) - 1) < 1e-10


def test_measured_syndrome_correction(five_qubit, rng):
    logical = StateVector.random((2,), rng)
    coefficients = random_coefficients(five_qubit, rng)
    corrupted = apply_superposed_error(encode(logical, five_qubit), five_qubit, coefficients)
    outcome = measure_syndrome_and_correct(corrupted, five_qubit, logical, seed=3)
    assert 0 <= outcome.syndrome < 16
    assert outcome.label == five_qubit.syndrome_labels[outcome.syndrome]
    assert abs(outcome.probability - abs(coefficients[outcome.syndrome]) ** 2) < 1e-10
    assert outcome.report.recovered()
    assert outcome.report.syndrome.support(tol=1e-10) == [0]
