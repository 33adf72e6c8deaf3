"""Dense complex linear algebra for small composite quantum systems.

Composite indices are big-endian: the first listed subsystem is the most
significant digit, so ``|01001>`` on five qubits is basis index 9.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from disentangle.config import (
    EIGENVALUE_FLOOR,
    FACTORIZATION_TOL,
    HERMITIAN_TOL,
    MAX_DENSITY_DIMENSION,
    MAX_STATE_DIMENSION,
    NORM_TOL,
    TRACE_TOL,
    UNITARY_TOL,
)

logger = logging.getLogger(__name__)

SeedLike = int | np.random.Generator | np.random.SeedSequence | None


class InvariantError(RuntimeError):
    """A numerical object violated its defining invariant."""


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Return a numpy Generator for an int seed, a SeedSequence or an existing Generator."""
    return np.random.default_rng(seed)


def _product(dims: Sequence[int]) -> int:
    total = 1
    for d in dims:
        total *= int(d)
    return total


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _check_dims(dims: Sequence[int], cap: int, what: str) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ValueError(f"{what} needs at least one subsystem")
    if any(d < 2 for d in dims):
        raise ValueError(f"subsystem dimensions must be >= 2, got {dims}")
    total = _product(dims)
    if total > cap:
        raise ValueError(f"{what} dimension {total} exceeds the cap of {cap}")
    return dims


def _check_subsystems(
    dims: Sequence[int], indices: Sequence[int], *, what: str = "target"
) -> tuple[int, ...]:
    indices = tuple(int(i) for i in indices)
    if not indices:
        raise ValueError(f"{what} index list is empty")
    if len(set(indices)) != len(indices):
        raise ValueError(f"duplicate {what} indices: {indices}")
    for i in indices:
        if i < 0 or i >= len(dims):
            raise ValueError(f"{what} index {i} out of range for {len(dims)} subsystems")
    return indices


# ----------------------------------------------------------------------
# Value types
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm pure state over a labelled composite basis."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        dims = _check_dims(self.dims, MAX_STATE_DIMENSION, "state")
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.size != _product(dims):
            raise InvariantError(
                f"amplitude length {amplitudes.size} does not match dims {dims}"
            )
        norm_sq = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise InvariantError(f"state is not normalized (|psi|^2 = {norm_sq!r})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))

    @classmethod
    def from_amplitudes(
        cls,
        amplitudes: Sequence[complex] | np.ndarray,
        dims: Sequence[int] | None = None,
        *,
        normalize: bool = False,
    ) -> StateVector:
        """Build a state; without ``dims`` the length must be a power of two (qubits)."""
        amplitudes = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        if dims is None:
            n = amplitudes.size.bit_length() - 1
            if amplitudes.size < 2 or 2**n != amplitudes.size:
                raise ValueError(
                    f"cannot infer qubit dims for {amplitudes.size} amplitudes"
                )
            dims = (2,) * n
        if normalize:
            norm = float(np.linalg.norm(amplitudes))
            if norm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            amplitudes = amplitudes / norm
        return cls(tuple(dims), amplitudes)

    @classmethod
    def basis(cls, dims: Sequence[int], index: int) -> StateVector:
        total = _product(dims)
        if not 0 <= index < total:
            raise ValueError(f"basis index {index} out of range for dimension {total}")
        amplitudes = np.zeros(total, dtype=np.complex128)
        amplitudes[index] = 1.0
        return cls(tuple(dims), amplitudes)

    @classmethod
    def from_bits(cls, bits: str) -> StateVector:
        """Computational basis state of len(bits) qubits, e.g. ``"01001"``."""
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bit string: {bits!r}")
        return cls.basis((2,) * len(bits), int(bits, 2))

    @classmethod
    def qubit(cls, alpha: complex, beta: complex) -> StateVector:
        return cls((2,), np.array([alpha, beta], dtype=np.complex128))

    @classmethod
    def random(cls, dims: Sequence[int], seed: SeedLike = None) -> StateVector:
        """Haar-random pure state (normalized complex Gaussian vector)."""
        rng = make_rng(seed)
        total = _product(dims)
        raw = rng.standard_normal(total) + 1j * rng.standard_normal(total)
        return cls.from_amplitudes(raw, dims, normalize=True)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem."""
        return self.amplitudes.reshape(self.dims)

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        dims = _check_dims(self.dims, MAX_DENSITY_DIMENSION, "density matrix")
        total = _product(dims)
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.shape != (total, total):
            raise InvariantError(f"matrix shape {matrix.shape} does not match dims {dims}")
        asymmetry = float(np.max(np.abs(matrix - matrix.conj().T)))
        if asymmetry > HERMITIAN_TOL:
            raise InvariantError(f"density matrix is not Hermitian (deviation {asymmetry!r})")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvariantError(f"density matrix trace is {trace!r}, expected 1")
        lowest = float(np.linalg.eigvalsh(matrix)[0])
        if lowest < EIGENVALUE_FLOOR:
            raise InvariantError(f"density matrix has negative eigenvalue {lowest!r}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", _frozen(matrix))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> DensityMatrix:
        total = _product(dims)
        return cls(tuple(dims), np.eye(total, dtype=np.complex128) / total)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def diagonal(self) -> np.ndarray:
        return np.real(np.diagonal(self.matrix)).copy()

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    """Square matrix with U^dagger U = 1."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
            raise InvariantError(f"unitary must be a non-empty square matrix, got {matrix.shape}")
        if matrix.shape[0] > MAX_DENSITY_DIMENSION:
            raise ValueError(
                f"operator side {matrix.shape[0]} exceeds the cap of {MAX_DENSITY_DIMENSION}"
            )
        deviation = unitarity_deviation(matrix)
        if deviation > UNITARY_TOL:
            raise InvariantError(f"matrix is not unitary (deviation {deviation!r})")
        object.__setattr__(self, "matrix", _frozen(matrix))

    @classmethod
    def _trusted(cls, matrix: np.ndarray) -> UnitaryMatrix:
        # Results of dagger/kron on validated unitaries skip the O(d^3) check.
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", _frozen(np.array(matrix, dtype=np.complex128)))
        return obj

    @classmethod
    def identity(cls, dim: int) -> UnitaryMatrix:
        return cls._trusted(np.eye(dim, dtype=np.complex128))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> UnitaryMatrix:
        return UnitaryMatrix._trusted(self.matrix.conj().T)

    def kron(self, other: UnitaryMatrix) -> UnitaryMatrix:
        return UnitaryMatrix._trusted(np.kron(self.matrix, other.matrix))

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.matrix.imag)) <= tol)


def unitarity_deviation(matrix: np.ndarray) -> float:
    """Max elementwise deviation of M^dagger M from the identity."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    gram = matrix.conj().T @ matrix
    return float(np.max(np.abs(gram - np.eye(matrix.shape[0]))))


# ----------------------------------------------------------------------
# Products and embeddings
# ----------------------------------------------------------------------


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))


def tensor_all(*states: StateVector) -> StateVector:
    if not states:
        raise ValueError("tensor_all needs at least one state")
    return reduce(tensor_product, states)


def tensor_density(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(a.dims + b.dims, np.kron(a.matrix, b.matrix))


def _apply_on_axes(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    front = list(range(len(axes)))
    moved = np.moveaxis(tensor, list(axes), front)
    block = _product(moved.shape[: len(axes)])
    out = (matrix @ moved.reshape(block, -1)).reshape(moved.shape)
    return np.moveaxis(out, front, list(axes))


def apply_matrix(
    matrix: np.ndarray,
    amplitudes: np.ndarray,
    dims: Sequence[int],
    targets: Sequence[int],
) -> np.ndarray:
    """Apply ``matrix`` on ``targets`` (identity elsewhere) to a raw amplitude vector.

    Target order defines the big-endian index order inside ``matrix``. No norm
    is checked, so this also serves non-unitary operators.
    """
    dims = tuple(dims)
    targets = _check_subsystems(dims, targets)
    matrix = np.asarray(matrix, dtype=np.complex128)
    block = _product(dims[t] for t in targets)
    if matrix.shape != (block, block):
        raise ValueError(
            f"operator of shape {matrix.shape} does not match target dimension {block}"
        )
    tensor = np.asarray(amplitudes, dtype=np.complex128).reshape(dims)
    return _apply_on_axes(tensor, matrix, targets).reshape(-1)


def apply_unitary(u: UnitaryMatrix, s: StateVector, targets: Sequence[int]) -> StateVector:
    return StateVector(s.dims, apply_matrix(u.matrix, s.amplitudes, s.dims, targets))


def conjugate_density(
    u: UnitaryMatrix, rho: DensityMatrix, targets: Sequence[int]
) -> DensityMatrix:
    """Return (U on targets) rho (U on targets)^dagger."""
    dims = rho.dims
    targets = _check_subsystems(dims, targets)
    block = _product(dims[t] for t in targets)
    if u.dim != block:
        raise ValueError(f"operator dimension {u.dim} does not match target dimension {block}")
    n = len(dims)
    tensor = rho.matrix.reshape(dims + dims)
    tensor = _apply_on_axes(tensor, u.matrix, targets)
    tensor = _apply_on_axes(tensor, u.matrix.conj(), [t + n for t in targets])
    total = _product(dims)
    return DensityMatrix(dims, tensor.reshape(total, total))


def permute_density(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    order = _check_subsystems(rho.dims, order, what="permutation")
    if len(order) != len(rho.dims):
        raise ValueError(f"permutation {order} does not cover all {len(rho.dims)} subsystems")
    n = len(order)
    tensor = rho.matrix.reshape(rho.dims + rho.dims)
    tensor = np.transpose(tensor, list(order) + [i + n for i in order])
    dims = tuple(rho.dims[i] for i in order)
    total = _product(dims)
    return DensityMatrix(dims, tensor.reshape(total, total))


# ----------------------------------------------------------------------
# Reduced states
# ----------------------------------------------------------------------


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Trace out every subsystem not in ``keep``; kept subsystems stay in ``keep`` order."""
    dims = list(rho.dims)
    keep = list(_check_subsystems(dims, keep, what="keep"))
    n = len(dims)
    other = [i for i in range(n) if i not in keep]
    tensor = rho.matrix.reshape(dims + dims)
    perm = keep + other + [i + n for i in keep] + [i + n for i in other]
    dk = _product(dims[i] for i in keep)
    do = _product(dims[i] for i in other)
    reshaped = np.transpose(tensor, perm).reshape(dk, do, dk, do)
    return DensityMatrix(tuple(dims[i] for i in keep), np.trace(reshaped, axis1=1, axis2=3))


def _bipartition(s: StateVector, cut: Sequence[int]) -> np.ndarray:
    cut = list(_check_subsystems(s.dims, cut, what="cut"))
    if len(cut) == len(s.dims):
        raise ValueError("cut must be a proper subset of the subsystems")
    moved = np.moveaxis(s.tensor(), cut, list(range(len(cut))))
    return moved.reshape(_product(s.dims[i] for i in cut), -1)


def reduced_density(s: StateVector, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state of a pure state without forming the full projector."""
    keep = list(_check_subsystems(s.dims, keep, what="keep"))
    if len(keep) == len(s.dims):
        moved = np.moveaxis(s.tensor(), keep, list(range(len(keep)))).reshape(-1)
        return DensityMatrix(tuple(s.dims[i] for i in keep), np.outer(moved, moved.conj()))
    block = _bipartition(s, keep)
    return DensityMatrix(tuple(s.dims[i] for i in keep), block @ block.conj().T)


def schmidt_coefficients(s: StateVector, cut: Sequence[int]) -> np.ndarray:
    """Singular values of the (cut | rest) bipartition, descending."""
    return np.linalg.svd(_bipartition(s, cut), compute_uv=False)


def schmidt_deficit(s: StateVector, cut: Sequence[int]) -> float:
    """1 - lambda_max^2: zero exactly for product states."""
    coefficients = schmidt_coefficients(s, cut)
    return max(0.0, 1.0 - float(coefficients[0]) ** 2)


def is_product_across(
    s: StateVector, cut: Sequence[int], tol: float = FACTORIZATION_TOL
) -> bool:
    return schmidt_deficit(s, cut) <= tol


def dominant_schmidt_factors(
    s: StateVector, cut: Sequence[int]
) -> tuple[float, StateVector, StateVector]:
    """Weight and normalized factors of the leading Schmidt term (cut side, rest side)."""
    cut = list(cut)
    block = _bipartition(s, cut)
    u, values, vh = np.linalg.svd(block, full_matrices=False)
    rest = [i for i in range(len(s.dims)) if i not in cut]
    left = StateVector(tuple(s.dims[i] for i in cut), u[:, 0])
    right = StateVector(tuple(s.dims[i] for i in rest), vh[0, :])
    return float(values[0]) ** 2, left, right


def factorization_deviation(rho: DensityMatrix, cut: Sequence[int]) -> float:
    """Max elementwise distance between rho and rho_cut (x) rho_rest."""
    cut = list(_check_subsystems(rho.dims, cut, what="cut"))
    if len(cut) == len(rho.dims):
        raise ValueError("cut must be a proper subset of the subsystems")
    rest = [i for i in range(len(rho.dims)) if i not in cut]
    ordered = permute_density(rho, cut + rest)
    product = np.kron(partial_trace(rho, cut).matrix, partial_trace(rho, rest).matrix)
    return float(np.max(np.abs(ordered.matrix - product)))


# ----------------------------------------------------------------------
# Sampling and comparison
# ----------------------------------------------------------------------


def haar_random_unitary(dim: int, seed: SeedLike = None) -> UnitaryMatrix:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with phase-fixed diagonal."""
    if dim < 1:
        raise ValueError(f"unitary dimension must be >= 1, got {dim}")
    rng = make_rng(seed)
    shape = (dim, dim)
    ginibre = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(ginibre)
    diagonal = np.diagonal(r)
    phases = diagonal / np.abs(diagonal)
    return UnitaryMatrix(q * phases[np.newaxis, :])


def fidelity(a: StateVector | DensityMatrix, b: StateVector | DensityMatrix) -> float:
    """|<a|b>|^2 for two pure states, <a|rho|a> for pure against mixed."""
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        raise ValueError("fidelity between two mixed states is not supported")
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        value = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    else:
        pure, mixed = (a, b) if isinstance(a, StateVector) else (b, a)
        value = np.vdot(pure.amplitudes, mixed.matrix @ pure.amplitudes).real
    return float(min(1.0, max(0.0, value)))
