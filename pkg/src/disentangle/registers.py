"""Two-register bookkeeping: composite indices, exact readout statistics, collapse."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from disentangle.config import DISTRIBUTION_SUM_TOL, PROBABILITY_CLAMP
from disentangle.linalg import InvariantError, SeedLike, StateVector, make_rng

logger = logging.getLogger(__name__)

RegisterId = int | str


@dataclass(frozen=True)
class RegisterLayout:
    """Register 1 holds x on k qubits, register 2 holds f(x) on m qubits."""

    k: int
    m: int

    def __post_init__(self) -> None:
        if self.k < 1 or self.m < 1:
            raise ValueError(f"register sizes must be >= 1 qubit, got k={self.k}, m={self.m}")

    @classmethod
    def for_modulus(cls, k: int, modulus: int) -> RegisterLayout:
        """Smallest register 2 that holds every value below ``modulus``."""
        if modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {modulus}")
        return cls(k=k, m=max(1, (modulus - 1).bit_length()))

    @property
    def K(self) -> int:
        return 2**self.k

    @property
    def M(self) -> int:
        return 2**self.m

    @property
    def dims(self) -> tuple[int, int]:
        return (self.K, self.M)

    @property
    def dimension(self) -> int:
        return self.K * self.M


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Exact probabilities over the outcomes of one register."""

    register: RegisterId
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        probabilities = np.array(self.probabilities, dtype=np.float64).reshape(-1)
        if probabilities.size == 0:
            raise InvariantError("distribution has no outcomes")
        lowest = float(probabilities.min())
        if lowest < -PROBABILITY_CLAMP:
            raise InvariantError(f"negative probability {lowest!r} in register {self.register}")
        probabilities = np.clip(probabilities, 0.0, None)
        total = float(probabilities.sum())
        if abs(total - 1.0) > DISTRIBUTION_SUM_TOL:
            raise InvariantError(f"probabilities sum to {total!r}, expected 1")
        probabilities.setflags(write=False)
        object.__setattr__(self, "probabilities", probabilities)

    def __len__(self) -> int:
        return self.probabilities.size

    def probability(self, outcome: int) -> float:
        return float(self.probabilities[outcome])

    def support(self, tol: float = PROBABILITY_CLAMP) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.probabilities > tol)]

    def max_deviation(self, other: OutcomeDistribution) -> float:
        if len(self) != len(other):
            raise ValueError(f"outcome count mismatch: {len(self)} vs {len(other)}")
        return float(np.max(np.abs(self.probabilities - other.probabilities)))

    def sample(self, rng: SeedLike, size: int | None = None) -> int | np.ndarray:
        generator = make_rng(rng)
        weights = self.probabilities / self.probabilities.sum()
        drawn = generator.choice(len(self), size=size, p=weights)
        return int(drawn) if size is None else drawn.astype(np.int64)

    def to_series(self) -> pd.Series:
        series = pd.Series(self.probabilities, name=str(self.register))
        series.index.name = "outcome"
        return series


def composite_index(layout: RegisterLayout, x: int, y: int) -> int:
    if not 0 <= x < layout.K:
        raise ValueError(f"register 1 value {x} out of range [0, {layout.K})")
    if not 0 <= y < layout.M:
        raise ValueError(f"register 2 value {y} out of range [0, {layout.M})")
    return x * layout.M + y


def _grid(s: StateVector, layout: RegisterLayout) -> np.ndarray:
    if s.dimension != layout.dimension:
        raise ValueError(
            f"state dimension {s.dimension} does not match layout {layout.K}x{layout.M}"
        )
    return s.amplitudes.reshape(layout.K, layout.M)


def measurement_distribution(
    s: StateVector, layout: RegisterLayout, register: int
) -> OutcomeDistribution:
    """Marginal readout statistics of one register, summing |amplitude|^2 over the other."""
    weights = np.abs(_grid(s, layout)) ** 2
    if register == 1:
        return OutcomeDistribution(1, weights.sum(axis=1))
    if register == 2:
        return OutcomeDistribution(2, weights.sum(axis=0))
    raise ValueError(f"register must be 1 or 2, got {register}")


def collapse(
    s: StateVector,
    layout: RegisterLayout,
    register: int,
    outcome: int | None = None,
    rng: SeedLike = None,
) -> tuple[int, StateVector]:
    """Projective readout of a whole register; forced when ``outcome`` is given, else sampled."""
    distribution = measurement_distribution(s, layout, register)
    if outcome is None:
        if rng is None:
            raise ValueError("collapse needs either a forced outcome or a random generator")
        outcome = int(distribution.sample(rng))
    elif not 0 <= outcome < len(distribution):
        raise ValueError(f"outcome {outcome} out of range for register {register}")
    elif distribution.probability(outcome) <= PROBABILITY_CLAMP:
        raise ValueError(f"outcome {outcome} of register {register} has zero probability")

    grid = _grid(s, layout).copy()
    if register == 1:
        kept = grid[outcome, :].copy()
        grid[:, :] = 0.0
        grid[outcome, :] = kept
    else:
        kept = grid[:, outcome].copy()
        grid[:, :] = 0.0
        grid[:, outcome] = kept
    grid /= np.linalg.norm(grid)
    logger.debug("Register %d collapsed to outcome %d", register, outcome)
    return outcome, StateVector(s.dims, grid.reshape(-1))
