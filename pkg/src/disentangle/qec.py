"""Encoding, corruption and measurement-free decoding.

The physical block of a code sits after any bystander qubits; an environment,
when present, is always the last subsystem. Decoding applies E^dagger to the
physical block and checks that (bystanders + logical qubit) factor out from
(ancilla + environment) without ever reading the ancilla.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Sequence

import numpy as np

from disentangle.codes import PAULI_MATRICES, ErrorOperator, QuantumCode
from disentangle.config import (
    DEFAULT_ENV_DIM,
    FACTORIZATION_TOL,
    FIDELITY_TOL,
    NORM_TOL,
    ORTHOGONALITY_TOL,
    TRACE_TOL,
    UNITARY_TOL,
)
from disentangle.linalg import (
    DensityMatrix,
    SeedLike,
    StateVector,
    UnitaryMatrix,
    apply_matrix,
    apply_unitary,
    conjugate_density,
    dominant_schmidt_factors,
    factorization_deviation,
    fidelity,
    haar_random_unitary,
    make_rng,
    partial_trace,
    reduced_density,
    schmidt_deficit,
    tensor_density,
    tensor_product,
)
from disentangle.registers import OutcomeDistribution

logger = logging.getLogger(__name__)


def _gram_deviation(vectors: Sequence[np.ndarray]) -> float:
    stacked = np.column_stack(vectors)
    gram = stacked.conj().T @ stacked
    return float(np.max(np.abs(gram - np.eye(len(vectors)))))


def physical_targets(code: QuantumCode, n_bystanders: int = 0) -> list[int]:
    return list(range(n_bystanders, n_bystanders + code.n_physical))


def ancilla_zero(code: QuantumCode) -> StateVector:
    return StateVector.basis((2,) * code.n_ancilla, 0)


def _check_physical_block(dims: Sequence[int], code: QuantumCode, n_bystanders: int) -> None:
    if n_bystanders < 0:
        raise ValueError(f"n_bystanders must be >= 0, got {n_bystanders}")
    end = n_bystanders + code.n_physical
    if len(dims) < end:
        raise ValueError(
            f"state has {len(dims)} subsystems, need {n_bystanders} bystanders "
            f"+ {code.n_physical} physical qubits"
        )
    if any(dims[i] != 2 for i in range(n_bystanders, end)):
        raise ValueError(f"physical block of {code.name} must be qubits, got dims {tuple(dims)}")


# ----------------------------------------------------------------------
# Error basis and encoder
# ----------------------------------------------------------------------


@lru_cache(maxsize=8)
def build_error_basis(code: QuantumCode) -> tuple[StateVector, ...]:
    """|Z_a> = E_a |Z_0>, ordered z-major so index = z * 2**n_ancilla + a."""
    targets = list(range(code.n_physical))
    basis = tuple(
        apply_unitary(op, code.codeword(z), targets) for z in (0, 1) for op in code.operators
    )
    deviation = _gram_deviation([v.amplitudes for v in basis])
    if deviation > UNITARY_TOL:
        if code.complete:
            raise ValueError(
                f"{code.name} is flagged complete but its error basis is not orthonormal "
                f"(Gram deviation {deviation!r})"
            )
        logger.warning(
            "Error basis of %s is not orthonormal (deviation %.3g)", code.name, deviation
        )
    return basis


@lru_cache(maxsize=8)
def build_encoder(code: QuantumCode) -> UnitaryMatrix:
    """E with columns |Z_a>: maps |z>|a> to the corrupted codeword E_a|Z_0>."""
    vectors = [v.amplitudes for v in build_error_basis(code)]
    deviation = _gram_deviation(vectors)
    if deviation > UNITARY_TOL:
        raise ValueError(f"{code.name} has an incomplete error basis (deviation {deviation!r})")
    encoder = UnitaryMatrix(np.column_stack(vectors))
    logger.debug(
        "Built %dx%d encoder for %s (real=%s)",
        encoder.dim,
        encoder.dim,
        code.name,
        encoder.is_real(),
    )
    return encoder


def encode(logical: StateVector, code: QuantumCode) -> StateVector:
    if logical.dims != (2,):
        raise ValueError(f"logical state must be one qubit, got dims {logical.dims}")
    padded = tensor_product(logical, ancilla_zero(code))
    return apply_unitary(build_encoder(code), padded, list(range(code.n_physical)))


def decode(s: StateVector, code: QuantumCode, n_bystanders: int = 0) -> StateVector:
    _check_physical_block(s.dims, code, n_bystanders)
    return apply_unitary(build_encoder(code).dagger(), s, physical_targets(code, n_bystanders))


@dataclass(frozen=True, eq=False)
class BystanderState:
    """A computer state whose last qubit is the one to be encoded."""

    state: StateVector

    def __post_init__(self) -> None:
        if self.state.dims[-1] != 2:
            raise ValueError(f"last subsystem must be a qubit, got dims {self.state.dims}")

    @property
    def n_bystanders(self) -> int:
        return len(self.state.dims) - 1


def encode_with_bystanders(computer: BystanderState, code: QuantumCode) -> StateVector:
    """Encode the last qubit in place; bystanders and their entanglement are untouched."""
    s = computer.state
    padded = tensor_product(s, ancilla_zero(code))
    start = computer.n_bystanders
    return apply_unitary(build_encoder(code), padded, list(range(start, start + code.n_physical)))


# ----------------------------------------------------------------------
# Error channels
# ----------------------------------------------------------------------


def apply_error(
    s: StateVector, code: QuantumCode, syndrome: int, n_bystanders: int = 0
) -> StateVector:
    """Apply the single correctable error E_a (a = 0 is the identity)."""
    _check_physical_block(s.dims, code, n_bystanders)
    if not 0 <= syndrome < len(code.operators):
        raise ValueError(f"syndrome {syndrome} out of range for {code.name}")
    return apply_unitary(code.operators[syndrome], s, physical_targets(code, n_bystanders))


def apply_pauli(
    s: StateVector, error: ErrorOperator, n_bystanders: int = 0
) -> StateVector:
    """Apply one Pauli-type error that need not belong to the code's correctable set."""
    return apply_unitary(
        UnitaryMatrix(PAULI_MATRICES[error.pauli]), s, [n_bystanders + error.qubit]
    )


def apply_superposed_error(
    s: StateVector,
    code: QuantumCode,
    coefficients: Sequence[complex] | np.ndarray,
    n_bystanders: int = 0,
) -> StateVector:
    """sum_a c_a E_a s; the branches of an encoded state are orthogonal so the norm survives."""
    _check_physical_block(s.dims, code, n_bystanders)
    c = np.asarray(coefficients, dtype=np.complex128).reshape(-1)
    if c.size != len(code.operators):
        raise ValueError(f"expected {len(code.operators)} coefficients, got {c.size}")
    weight = float(np.sum(np.abs(c) ** 2))
    if abs(weight - 1.0) > NORM_TOL:
        raise ValueError(f"coefficients are not normalized (sum |c_a|^2 = {weight!r})")
    targets = physical_targets(code, n_bystanders)
    total = np.zeros(s.dimension, dtype=np.complex128)
    for amplitude, op in zip(c, code.operators):
        if amplitude != 0:
            total += amplitude * apply_matrix(op.matrix, s.amplitudes, s.dims, targets)
    return StateVector(s.dims, total)


def random_coefficients(code: QuantumCode, seed: SeedLike = None) -> np.ndarray:
    rng = make_rng(seed)
    size = len(code.operators)
    raw = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return raw / np.linalg.norm(raw)


@dataclass(frozen=True, eq=False)
class ChannelTerm:
    weight: float
    operator: UnitaryMatrix
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.weight > 0:
            raise ValueError(f"channel weights must be positive, got {self.weight}")
        qubits = tuple(int(q) for q in self.qubits)
        if self.operator.dim != 2 ** len(qubits):
            raise ValueError(
                f"operator dimension {self.operator.dim} does not fit {len(qubits)} qubits"
            )
        object.__setattr__(self, "qubits", qubits)


@dataclass(frozen=True, eq=False)
class MixedErrorChannel:
    """Incoherent mixture sum_j p_j U_j rho U_j^dagger over the physical block."""

    terms: tuple[ChannelTerm, ...]

    def __post_init__(self) -> None:
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("a channel needs at least one term")
        total = sum(term.weight for term in terms)
        if abs(total - 1.0) > TRACE_TOL:
            raise ValueError(f"channel weights sum to {total!r}, expected 1")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_errors(
        cls, weights: Sequence[float], errors: Sequence[ErrorOperator | None]
    ) -> MixedErrorChannel:
        """Mixture of single-qubit Paulis; ``None`` stands for the identity."""
        if len(weights) != len(errors):
            raise ValueError("weights and errors differ in length")
        terms = []
        for weight, error in zip(weights, errors):
            if error is None:
                terms.append(ChannelTerm(weight, UnitaryMatrix.identity(2), (0,)))
            else:
                terms.append(
                    ChannelTerm(weight, UnitaryMatrix(PAULI_MATRICES[error.pauli]), (error.qubit,))
                )
        return cls(tuple(terms))

    @classmethod
    def depolarizing(cls, qubit: int) -> MixedErrorChannel:
        """Weight 1/4 on each of I, X, Z, ZX acting on one physical qubit."""
        return cls(
            tuple(
                ChannelTerm(0.25, UnitaryMatrix(PAULI_MATRICES[name]), (qubit,))
                for name in ("I", "X", "Z", "ZX")
            )
        )

    @classmethod
    def random(
        cls, code: QuantumCode, n_terms: int = 4, seed: SeedLike = None
    ) -> MixedErrorChannel:
        """Dirichlet weights over Haar-random single-qubit unitaries on random qubits."""
        if n_terms < 1:
            raise ValueError(f"n_terms must be >= 1, got {n_terms}")
        rng = make_rng(seed)
        weights = rng.dirichlet(np.ones(n_terms))
        weights = weights / weights.sum()
        terms = tuple(
            ChannelTerm(
                float(w),
                haar_random_unitary(2, rng),
                (int(rng.integers(code.n_physical)),),
            )
            for w in weights
        )
        return cls(terms)


def apply_mixed_error(
    rho: DensityMatrix,
    channel: MixedErrorChannel,
    code: QuantumCode | None = None,
    n_bystanders: int = 0,
) -> DensityMatrix:
    if code is not None:
        _check_physical_block(rho.dims, code, n_bystanders)
    total = np.zeros_like(rho.matrix)
    for term in channel.terms:
        targets = [n_bystanders + q for q in term.qubits]
        total += term.weight * conjugate_density(term.operator, rho, targets).matrix
    return DensityMatrix(rho.dims, total)


# ----------------------------------------------------------------------
# Environment coupling
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EnvironmentCoupling:
    """Unitary on (one physical qubit (x) environment) with initial environment eta."""

    env_dim: int
    coupling: UnitaryMatrix
    eta: StateVector

    def __post_init__(self) -> None:
        if self.env_dim < 2:
            raise ValueError(f"environment dimension must be >= 2, got {self.env_dim}")
        if self.coupling.dim != 2 * self.env_dim:
            raise ValueError(
                f"coupling dimension {self.coupling.dim} != 2 * env_dim ({2 * self.env_dim})"
            )
        if self.eta.dims != (self.env_dim,):
            raise ValueError(f"eta dims {self.eta.dims} do not match env_dim {self.env_dim}")

    @classmethod
    def haar_random(
        cls, env_dim: int = DEFAULT_ENV_DIM, seed: SeedLike = None
    ) -> EnvironmentCoupling:
        return cls(
            env_dim=env_dim,
            coupling=haar_random_unitary(2 * env_dim, seed),
            eta=StateVector.basis((env_dim,), 0),
        )

    @classmethod
    def from_qubit_operator(
        cls, op: np.ndarray, env_dim: int = DEFAULT_ENV_DIM
    ) -> EnvironmentCoupling:
        """op (x) identity: the environment is a spectator."""
        coupling = UnitaryMatrix(np.kron(np.asarray(op, dtype=np.complex128), np.eye(env_dim)))
        return cls(env_dim=env_dim, coupling=coupling, eta=StateVector.basis((env_dim,), 0))

    def branches(self) -> dict[str, np.ndarray]:
        """|0>|eta> -> |0>|mu> + |1>|nu>,  |1>|eta> -> |0>|sigma> + |1>|tau>."""
        d = self.env_dim
        from_zero = self.coupling.matrix @ np.kron([1.0, 0.0], self.eta.amplitudes)
        from_one = self.coupling.matrix @ np.kron([0.0, 1.0], self.eta.amplitudes)
        return {
            "mu": from_zero[:d],
            "nu": from_zero[d:],
            "sigma": from_one[:d],
            "tau": from_one[d:],
        }


def attach_environment(s: StateVector, coupling: EnvironmentCoupling) -> StateVector:
    return tensor_product(s, coupling.eta)


def apply_environment_coupling(
    s_with_env: StateVector,
    coupling: EnvironmentCoupling,
    physical_qubit_index: int,
    n_bystanders: int = 0,
) -> StateVector:
    dims = s_with_env.dims
    env_index = len(dims) - 1
    if dims[env_index] != coupling.env_dim:
        raise ValueError(
            f"last subsystem has dimension {dims[env_index]}, coupling expects {coupling.env_dim}"
        )
    qubit = n_bystanders + physical_qubit_index
    if not 0 <= qubit < env_index or physical_qubit_index < 0:
        raise ValueError(f"qubit index {physical_qubit_index} out of range")
    if dims[qubit] != 2:
        raise ValueError(f"subsystem {qubit} is not a qubit (dimension {dims[qubit]})")
    return apply_unitary(coupling.coupling, s_with_env, [qubit, env_index])


def split_on_qubit(
    amplitudes: np.ndarray, n_qubits: int, qubit: int
) -> tuple[np.ndarray, np.ndarray]:
    """(X_0, X_1) with state = X_0 (x) |0> + X_1 (x) |1> on the singled-out qubit."""
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit index {qubit} out of range for {n_qubits} qubits")
    tensor = np.asarray(amplitudes, dtype=np.complex128).reshape((2,) * n_qubits)
    return (
        np.take(tensor, 0, axis=qubit).reshape(-1),
        np.take(tensor, 1, axis=qubit).reshape(-1),
    )


def join_on_qubit(x0: np.ndarray, x1: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    rest = (2,) * (n_qubits - 1)
    stacked = np.stack([x0.reshape(rest), x1.reshape(rest)], axis=qubit)
    return stacked.reshape(-1)


def _four_vectors(x0: np.ndarray, x1: np.ndarray, n: int, qubit: int) -> list[np.ndarray]:
    """Z_0, Z_r, Z_s, Z_t built from one codeword's halves."""
    return [
        join_on_qubit(x0, x1, n, qubit),
        join_on_qubit(x0, -x1, n, qubit),
        join_on_qubit(x1, x0, n, qubit),
        join_on_qubit(-x1, x0, n, qubit),
    ]


def environment_expansion(
    physical: StateVector, coupling: EnvironmentCoupling, qubit: int
) -> StateVector:
    """Rebuild the coupled state from bit, phase and combined-error terms.

    Z_0 (mu+tau)/2 + Z_r (mu-tau)/2 + Z_s (nu+sigma)/2 + Z_t (nu-sigma)/2.
    """
    n = len(physical.dims)
    if physical.dims != (2,) * n:
        raise ValueError(f"expected a qubit-only physical state, got dims {physical.dims}")
    x0, x1 = split_on_qubit(physical.amplitudes, n, qubit)
    z0, zr, zs, zt = _four_vectors(x0, x1, n, qubit)
    b = coupling.branches()
    total = (
        np.kron(z0, (b["mu"] + b["tau"]) / 2)
        + np.kron(zr, (b["mu"] - b["tau"]) / 2)
        + np.kron(zs, (b["nu"] + b["sigma"]) / 2)
        + np.kron(zt, (b["nu"] - b["sigma"]) / 2)
    )
    return StateVector(physical.dims + (coupling.env_dim,), total)


# ----------------------------------------------------------------------
# Orthogonality conditions
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class OrthogonalityReport:
    code_name: str
    qubit_index: int
    scalar_products: dict[str, complex]
    deviations: dict[str, float]
    max_deviation: float
    eight_vector_deviation: float

    def passed(self, tol: float = ORTHOGONALITY_TOL) -> bool:
        return self.max_deviation <= tol and self.eight_vector_deviation <= tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "code": self.code_name,
            "qubit": self.qubit_index,
            "scalar_products": self.scalar_products,
            "deviations": self.deviations,
            "max_deviation": self.max_deviation,
            "eight_vector_deviation": self.eight_vector_deviation,
            "pass": self.passed(),
        }


def check_orthogonality_conditions(
    code: QuantumCode, physical_qubit_index: int
) -> OrthogonalityReport:
    """The 10 products <X_Zy, X_Z'y'> against delta_ZZ' delta_yy' / 2, plus the eight vectors."""
    n = code.n_physical
    if not 0 <= physical_qubit_index < n:
        raise ValueError(f"qubit index {physical_qubit_index} out of range for {code.name}")
    halves: dict[tuple[int, int], np.ndarray] = {}
    eight: list[np.ndarray] = []
    for z in (0, 1):
        x0, x1 = split_on_qubit(code.codeword(z).amplitudes, n, physical_qubit_index)
        halves[(z, 0)], halves[(z, 1)] = x0, x1
        eight.extend(_four_vectors(x0, x1, n, physical_qubit_index))

    keys = sorted(halves)
    products: dict[str, complex] = {}
    deviations: dict[str, float] = {}
    for i, left in enumerate(keys):
        for right in keys[i:]:
            name = f"{left[0]}{left[1]},{right[0]}{right[1]}"
            value = complex(np.vdot(halves[left], halves[right]))
            expected = 0.5 if left == right else 0.0
            products[name] = value
            deviations[name] = abs(value - expected)

    report = OrthogonalityReport(
        code_name=code.name,
        qubit_index=physical_qubit_index,
        scalar_products=products,
        deviations=deviations,
        max_deviation=max(deviations.values()),
        eight_vector_deviation=_gram_deviation(eight),
    )
    logger.debug(
        "%s qubit %d: max deviation %.3g", code.name, physical_qubit_index, report.max_deviation
    )
    return report


# ----------------------------------------------------------------------
# Decoding
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DecodeReport:
    product: bool
    factorization_deviation: float
    fidelity: float
    logical_purity: float
    syndrome: OutcomeDistribution
    logical: DensityMatrix
    residual: StateVector | DensityMatrix
    decoded: StateVector | DensityMatrix = field(repr=False)

    def recovered(self, tol: float = FIDELITY_TOL) -> bool:
        return self.product and self.fidelity >= 1.0 - tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "product": self.product,
            "fidelity": self.fidelity,
            "factorization_deviation": self.factorization_deviation,
            "logical_purity": self.logical_purity,
            "syndrome": self.syndrome.probabilities.tolist(),
        }


def decode_and_verify(
    corrupted: StateVector | DensityMatrix,
    code: QuantumCode,
    expected_logical: StateVector,
    tol: float = FACTORIZATION_TOL,
    n_bystanders: int = 0,
) -> DecodeReport:
    """Apply E^dagger and test that the logical side factors out; the syndrome is only reported."""
    dims = corrupted.dims
    _check_physical_block(dims, code, n_bystanders)
    keep = list(range(n_bystanders + 1))
    ancilla = list(range(n_bystanders + 1, n_bystanders + code.n_physical))
    rest = list(range(n_bystanders + 1, len(dims)))
    logical_dimension = int(np.prod([dims[i] for i in keep]))
    if expected_logical.dimension != logical_dimension:
        raise ValueError(
            f"expected state has dimension {expected_logical.dimension}, "
            f"logical side has {logical_dimension}"
        )

    decoder = build_encoder(code).dagger()
    targets = physical_targets(code, n_bystanders)
    if isinstance(corrupted, StateVector):
        decoded: StateVector | DensityMatrix = apply_unitary(decoder, corrupted, targets)
        deviation = schmidt_deficit(decoded, keep)
        logical = reduced_density(decoded, keep)
        _, _, residual = dominant_schmidt_factors(decoded, keep)
        syndrome = reduced_density(decoded, ancilla).diagonal()
    else:
        decoded = conjugate_density(decoder, corrupted, targets)
        deviation = factorization_deviation(decoded, keep)
        logical = partial_trace(decoded, keep)
        residual = partial_trace(decoded, rest)
        syndrome = partial_trace(decoded, ancilla).diagonal()

    report = DecodeReport(
        product=deviation <= tol,
        factorization_deviation=deviation,
        fidelity=fidelity(expected_logical, logical),
        logical_purity=logical.purity(),
        syndrome=OutcomeDistribution("syndrome", syndrome),
        logical=logical,
        residual=residual,
        decoded=decoded,
    )
    logger.debug(
        "Decoded %s: product=%s deviation=%.3g fidelity=%.17g",
        code.name,
        report.product,
        deviation,
        report.fidelity,
    )
    return report


def refresh_ancilla(
    decoded: StateVector | DensityMatrix, code: QuantumCode, n_bystanders: int = 0
) -> DensityMatrix:
    """Trace out everything after the logical qubit and adjoin a fresh |0...0> ancilla."""
    keep = list(range(n_bystanders + 1))
    if isinstance(decoded, StateVector):
        logical = reduced_density(decoded, keep)
    else:
        logical = partial_trace(decoded, keep)
    return tensor_density(logical, ancilla_zero(code).density())


@dataclass(frozen=True, eq=False)
class MeasuredCorrection:
    syndrome: int
    label: str
    probability: float
    report: DecodeReport


def measure_syndrome_and_correct(
    corrupted: StateVector,
    code: QuantumCode,
    expected_logical: StateVector,
    seed: SeedLike = None,
    n_bystanders: int = 0,
) -> MeasuredCorrection:
    """Conventional correction: project onto one syndrome space, then undo the identified error."""
    _check_physical_block(corrupted.dims, code, n_bystanders)
    basis = build_error_basis(code)
    targets = physical_targets(code, n_bystanders)
    size = len(code.operators)

    projected: list[np.ndarray] = []
    weights = np.zeros(size, dtype=np.float64)
    for a in range(size):
        zero, one = basis[a].amplitudes, basis[size + a].amplitudes
        projector = np.outer(zero, zero.conj()) + np.outer(one, one.conj())
        branch = apply_matrix(projector, corrupted.amplitudes, corrupted.dims, targets)
        projected.append(branch)
        weights[a] = float(np.vdot(branch, branch).real)

    outcomes = OutcomeDistribution("syndrome", weights)
    a = int(outcomes.sample(seed))
    collapsed = StateVector.from_amplitudes(projected[a], corrupted.dims, normalize=True)
    corrected = apply_unitary(code.operators[a].dagger(), collapsed, targets)
    logger.info("Measured syndrome %s (p=%.6f)", code.syndrome_labels[a], outcomes.probability(a))
    return MeasuredCorrection(
        syndrome=a,
        label=code.syndrome_labels[a],
        probability=outcomes.probability(a),
        report=decode_and_verify(
            corrected, code, expected_logical, n_bystanders=n_bystanders
        ),
    )
