"""Quantum code definitions: codewords plus the ordered correctable-error list.

Syndrome labels follow the error list: a = 0 is the identity, then for the
five-qubit code a = 1..5 are X1..X5, 6..10 are Z1..Z5 and 11..15 are
ZX1..ZX5. Labels count qubits from 1; API indices count from 0.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Callable

import numpy as np

from disentangle.config import ORTHOGONALITY_TOL
from disentangle.linalg import StateVector, UnitaryMatrix

logger = logging.getLogger(__name__)

PAULI_MATRICES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
# Bit flip first, then phase flip: real, unlike the Hermitian Y.
PAULI_MATRICES["ZX"] = PAULI_MATRICES["Z"] @ PAULI_MATRICES["X"]

_LABEL_PATTERN = re.compile(r"^(ZX|X|Z)([1-9][0-9]*)$")


def pauli_string_matrix(word: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis, e.g. ``"XZZXI"`` (first letter = qubit 1)."""
    matrix = np.ones((1, 1), dtype=np.complex128)
    for letter in word:
        if letter not in ("I", "X", "Z"):
            raise ValueError(f"unsupported Pauli letter {letter!r} in {word!r}")
        matrix = np.kron(matrix, PAULI_MATRICES[letter])
    return matrix


def embed_single_qubit(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
    left = np.eye(2**qubit, dtype=np.complex128)
    right = np.eye(2 ** (n_qubits - qubit - 1), dtype=np.complex128)
    return np.kron(np.kron(left, op), right)


@dataclass(frozen=True)
class ErrorOperator:
    """A single-qubit error: ``pauli`` in {X, Z, ZX} acting on 0-based ``qubit``."""

    pauli: str
    qubit: int

    def __post_init__(self) -> None:
        if self.pauli not in ("X", "Z", "ZX"):
            raise ValueError(f"unsupported error type {self.pauli!r}")
        if self.qubit < 0:
            raise ValueError(f"qubit index must be >= 0, got {self.qubit}")

    @classmethod
    def parse(cls, label: str) -> ErrorOperator:
        match = _LABEL_PATTERN.match(label.strip().upper())
        if match is None:
            raise ValueError(f"cannot parse error label {label!r} (expected e.g. X3, Z1, ZX2)")
        return cls(pauli=match.group(1), qubit=int(match.group(2)) - 1)

    @property
    def label(self) -> str:
        return f"{self.pauli}{self.qubit + 1}"

    def matrix(self, n_qubits: int) -> np.ndarray:
        return embed_single_qubit(PAULI_MATRICES[self.pauli], self.qubit, n_qubits)


@dataclass(frozen=True, eq=False)
class QuantumCode:
    """One logical qubit in ``n_physical`` qubits with 2**n_ancilla - 1 correctable errors.

    ``complete`` declares that the code corrects every single-qubit error; the
    orthonormality of its error basis is then enforced when the basis is built.
    """

    name: str
    n_physical: int
    codeword_zero: StateVector
    codeword_one: StateVector
    error_ops: tuple[ErrorOperator, ...]
    complete: bool

    def __post_init__(self) -> None:
        if self.n_physical < 2:
            raise ValueError(f"a code needs at least 2 physical qubits, got {self.n_physical}")
        expected_dims = (2,) * self.n_physical
        for word in (self.codeword_zero, self.codeword_one):
            if word.dims != expected_dims:
                raise ValueError(f"codeword dims {word.dims} do not match {expected_dims}")
        overlap = abs(np.vdot(self.codeword_zero.amplitudes, self.codeword_one.amplitudes))
        if overlap > ORTHOGONALITY_TOL:
            raise ValueError(f"codewords are not orthogonal (overlap {overlap!r})")
        error_ops = tuple(self.error_ops)
        if len(error_ops) != 2**self.n_ancilla - 1:
            raise ValueError(
                f"{self.n_ancilla} syndrome bits need {2**self.n_ancilla - 1} errors, "
                f"got {len(error_ops)}"
            )
        if any(op.qubit >= self.n_physical for op in error_ops):
            raise ValueError("error operator acts outside the physical block")
        labels = [op.label for op in error_ops]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate error labels in {labels}")
        object.__setattr__(self, "error_ops", error_ops)

    @property
    def n_ancilla(self) -> int:
        return self.n_physical - 1

    @property
    def syndrome_labels(self) -> list[str]:
        return ["I"] + [op.label for op in self.error_ops]

    @cached_property
    def operators(self) -> tuple[UnitaryMatrix, ...]:
        """Error unitaries on the physical block, indexed by syndrome a (a = 0 is identity)."""
        identity = UnitaryMatrix.identity(2**self.n_physical)
        return (identity,) + tuple(
            UnitaryMatrix(op.matrix(self.n_physical)) for op in self.error_ops
        )

    def codeword(self, z: int) -> StateVector:
        if z == 0:
            return self.codeword_zero
        if z == 1:
            return self.codeword_one
        raise ValueError(f"logical value must be 0 or 1, got {z}")

    def syndrome_of(self, label: str) -> int:
        label = label.strip().upper()
        if label == "I":
            return 0
        target = ErrorOperator.parse(label).label
        try:
            return self.syndrome_labels.index(target)
        except ValueError:
            raise ValueError(f"{label} is not a correctable error of {self.name}") from None

    def to_dict(self) -> dict[str, Any]:
        def pairs(word: StateVector) -> list[list[float]]:
            return [[float(a.real), float(a.imag)] for a in word.amplitudes]

        return {
            "name": self.name,
            "n_physical": self.n_physical,
            "n_ancilla": self.n_ancilla,
            "complete": self.complete,
            "codewords": {"zero": pairs(self.codeword_zero), "one": pairs(self.codeword_one)},
            "error_ops": [
                {"label": op.label, "pauli": op.pauli, "qubit": op.qubit} for op in self.error_ops
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> QuantumCode:
        n = int(payload["n_physical"])

        def word(pairs: list[list[float]]) -> StateVector:
            amplitudes = np.array([complex(re_, im_) for re_, im_ in pairs], dtype=np.complex128)
            return StateVector((2,) * n, amplitudes)

        return cls(
            name=str(payload["name"]),
            n_physical=n,
            codeword_zero=word(payload["codewords"]["zero"]),
            codeword_one=word(payload["codewords"]["one"]),
            error_ops=tuple(
                ErrorOperator(pauli=item["pauli"], qubit=int(item["qubit"]))
                for item in payload["error_ops"]
            ),
            complete=bool(payload["complete"]),
        )


# ----------------------------------------------------------------------
# Shipped codes
# ----------------------------------------------------------------------

FIVE_QUBIT_STABILIZERS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")


def bit_flip_code() -> QuantumCode:
    """|000>, |111> with errors X1, X2, X3; corrects bit flips only."""
    return QuantumCode(
        name="bit-flip",
        n_physical=3,
        codeword_zero=StateVector.from_bits("000"),
        codeword_one=StateVector.from_bits("111"),
        error_ops=tuple(ErrorOperator("X", q) for q in range(3)),
        complete=False,
    )


def five_qubit_code() -> QuantumCode:
    """The perfect [[5,1,3]] code: 16 syndromes for identity plus 15 single-qubit errors."""
    n = 5
    dimension = 2**n
    projector = np.eye(dimension, dtype=np.complex128)
    for generator in FIVE_QUBIT_STABILIZERS:
        projector = projector @ (np.eye(dimension) + pauli_string_matrix(generator)) / 2
    zero = StateVector.from_amplitudes(projector[:, 0], (2,) * n, normalize=True)
    one = StateVector((2,) * n, pauli_string_matrix("X" * n) @ zero.amplitudes)
    error_ops = tuple(
        ErrorOperator(pauli, q) for pauli in ("X", "Z", "ZX") for q in range(n)
    )
    return QuantumCode(
        name="five-qubit",
        n_physical=n,
        codeword_zero=zero,
        codeword_one=one,
        error_ops=error_ops,
        complete=True,
    )


CODE_FACTORIES: dict[str, Callable[[], QuantumCode]] = {
    "bit-flip": bit_flip_code,
    "five-qubit": five_qubit_code,
}


@lru_cache(maxsize=None)
def get_code(name: str) -> QuantumCode:
    factory = CODE_FACTORIES.get(name)
    if factory is None:
        raise ValueError(f"unknown code {name!r}; expected one of {sorted(CODE_FACTORIES)}")
    return factory()
