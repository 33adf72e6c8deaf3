"""Period finding with a discrete Fourier transform, with and without reading register 2.

Three readout paths are provided and must agree:

* ``measure``: read register 2 (picking a residue c), transform register 1;
* ``reduced-rho``: ignore register 2, transform its reduced density matrix;
* ``full-psi``: transform register 1 of the entangled state and marginalize.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Literal, Sequence

import numpy as np

from disentangle.config import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    SINGULAR_SIN_THRESHOLD,
    SPOT_CHECK_POINTS,
)
from disentangle.linalg import (
    DensityMatrix,
    SeedLike,
    StateVector,
    UnitaryMatrix,
    apply_unitary,
    conjugate_density,
    make_rng,
)
from disentangle.registers import (
    OutcomeDistribution,
    RegisterLayout,
    collapse,
    measurement_distribution,
)

logger = logging.getLogger(__name__)

ReadoutPath = Literal["reduced-rho", "full-psi"]
READOUT_PATHS: tuple[str, ...] = ("reduced-rho", "full-psi")
MEASURED_PATH = "measure"


def choose_register_size(modulus: int) -> int:
    """Smallest k with 2**k >= 2 * N**2."""
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    return (2 * modulus * modulus - 1).bit_length()


def multiplicative_order(base: int, modulus: int) -> int:
    """Smallest p > 0 with base**p = 1 mod N (base coprime to N)."""
    if math.gcd(base, modulus) != 1:
        raise ValueError(f"b={base} is not coprime to N={modulus}")
    value = base % modulus
    order = 1
    while value != 1 % modulus:
        value = (value * base) % modulus
        order += 1
    return order


@dataclass(frozen=True)
class PeriodicFunctionSpec:
    """A promised-periodic f on register 1: either b**x mod N or an explicit table."""

    modulus: int
    k: int
    generator: int | None = None
    table: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus}")
        if (self.generator is None) == (self.table is None):
            raise ValueError("give exactly one of generator or table")
        if self.generator is not None:
            if self.generator < 1:
                raise ValueError(f"generator must be positive, got {self.generator}")
            if math.gcd(self.generator, self.modulus) != 1:
                raise ValueError(f"b={self.generator} is not coprime to N={self.modulus}")
        else:
            table = tuple(int(v) for v in self.table)
            if not table:
                raise ValueError("value table is empty")
            if any(v < 0 or v >= self.modulus for v in table):
                raise ValueError(f"table values must lie in [0, {self.modulus})")
            if len(set(table)) != len(table):
                raise ValueError("table must be injective on one period")
            object.__setattr__(self, "table", table)
        if 2**self.k < 2 * self.modulus**2:
            raise ValueError(
                f"register 1 too small: K=2**{self.k} < 2N^2={2 * self.modulus**2}"
            )

    @classmethod
    def modular_exponentiation(
        cls, modulus: int, generator: int, k: int | None = None
    ) -> PeriodicFunctionSpec:
        k = choose_register_size(modulus) if k is None else k
        return cls(modulus=modulus, k=k, generator=generator)

    @classmethod
    def from_table(
        cls, values: Sequence[int], modulus: int, k: int | None = None
    ) -> PeriodicFunctionSpec:
        k = choose_register_size(modulus) if k is None else k
        return cls(modulus=modulus, k=k, table=tuple(values))

    @property
    def K(self) -> int:
        return 2**self.k

    @property
    def layout(self) -> RegisterLayout:
        return RegisterLayout.for_modulus(self.k, self.modulus)

    @cached_property
    def period(self) -> int:
        if self.table is not None:
            return len(self.table)
        return multiplicative_order(self.generator, self.modulus)

    def value(self, x: int) -> int:
        if self.table is not None:
            return self.table[x % len(self.table)]
        return pow(self.generator, x, self.modulus)

    def values(self) -> np.ndarray:
        p = self.period
        one_period = np.array([self.value(c) for c in range(p)], dtype=np.int64)
        return one_period[np.arange(self.K) % p]

    def residue_of(self, y: int) -> int:
        """The residue c in [0, p) with f(c) = y."""
        for c in range(self.period):
            if self.value(c) == y:
                return c
        raise ValueError(f"{y} is not a value of f")

    def describe(self) -> dict:
        return {
            "N": self.modulus,
            "k": self.k,
            "K": self.K,
            "m": self.layout.m,
            "b": self.generator,
            "table": list(self.table) if self.table is not None else None,
        }


@dataclass(frozen=True)
class GeometricSumInputs:
    p: int
    r: int
    K: int
    L: int

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.L < 0 or self.p < 0 or self.r < 0:
            raise ValueError("p, r and L must be non-negative")


def branch_length(spec: PeriodicFunctionSpec, residue: int) -> int:
    """L(c): the largest L with c + L*p < K."""
    if not 0 <= residue < spec.period:
        raise ValueError(f"residue {residue} out of range [0, {spec.period})")
    return (spec.K - 1 - residue) // spec.period


def residue_weights(spec: PeriodicFunctionSpec) -> np.ndarray:
    """Probability (L(c) + 1) / K of selecting each residue by reading register 2."""
    return np.array(
        [(branch_length(spec, c) + 1) / spec.K for c in range(spec.period)], dtype=np.float64
    )


def prepare_entangled_state(spec: PeriodicFunctionSpec) -> StateVector:
    """K**-1/2 sum_x |x>|f(x)>."""
    layout = spec.layout
    amplitudes = np.zeros(layout.dimension, dtype=np.complex128)
    xs = np.arange(spec.K, dtype=np.int64)
    amplitudes[xs * layout.M + spec.values()] = 1.0 / np.sqrt(spec.K)
    return StateVector(layout.dims, amplitudes)


@lru_cache(maxsize=16)
def dft_unitary(K: int) -> UnitaryMatrix:
    """Entry (r, x) = exp(2 pi i x r / K) / sqrt(K)."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    index = np.arange(K, dtype=np.int64)
    phases = np.outer(index, index) % K
    return UnitaryMatrix(np.exp(2j * np.pi * phases / K) / np.sqrt(K))


def geometric_sum_closed_form(inputs: GeometricSumInputs) -> complex:
    """sum_{n=0}^{L} exp(2 pi i p r n / K) in closed form."""
    p, r, K, L = inputs.p, inputs.r, inputs.K, inputs.L
    # sin(pi a / K) and exp(i pi a / K) only depend on a mod 2K.
    step = (p * r) % (2 * K)
    denominator = math.sin(math.pi * step / K)
    if abs(denominator) < SINGULAR_SIN_THRESHOLD:
        return complex(L + 1)
    phase = np.exp(1j * math.pi * ((p * r * L) % (2 * K)) / K)
    numerator = math.sin(math.pi * ((p * r * (L + 1)) % (2 * K)) / K)
    return complex(phase * numerator / denominator)


def run_with_measurement(
    spec: PeriodicFunctionSpec,
    seed: SeedLike = None,
    *,
    residue: int | None = None,
) -> tuple[int, OutcomeDistribution]:
    """Read register 2 (forced residue or seeded draw), then DFT register 1 and read it out."""
    if residue is None and seed is None:
        raise ValueError("give a seed or a forced residue")
    layout = spec.layout
    forced = None
    if residue is not None:
        if not 0 <= residue < spec.period:
            raise ValueError(f"residue {residue} out of range [0, {spec.period})")
        forced = spec.value(residue)
    psi = prepare_entangled_state(spec)
    observed, collapsed = collapse(psi, layout, 2, outcome=forced, rng=seed)
    transformed = apply_unitary(dft_unitary(spec.K), collapsed, [0])
    return spec.residue_of(observed), measurement_distribution(transformed, layout, 1)


def measurement_mixture(spec: PeriodicFunctionSpec) -> OutcomeDistribution:
    """Measured-path distributions over r averaged with residue weights (L(c)+1)/K."""
    weights = residue_weights(spec)
    total = np.zeros(spec.K, dtype=np.float64)
    for c, weight in enumerate(weights):
        _, distribution = run_with_measurement(spec, residue=c)
        total += weight * distribution.probabilities
    return OutcomeDistribution(1, total)


def reduced_register_density(spec: PeriodicFunctionSpec) -> DensityMatrix:
    """rho = (1/K) sum_c sum_{n,m} |c+np><c+mp|, the state of register 1 alone."""
    K, p = spec.K, spec.period
    membership = np.zeros((K, p), dtype=np.float64)
    membership[np.arange(K), np.arange(K) % p] = 1.0
    return DensityMatrix((K,), (membership @ membership.T) / K)


def run_without_measurement(
    spec: PeriodicFunctionSpec, path: ReadoutPath = "full-psi"
) -> OutcomeDistribution:
    u = dft_unitary(spec.K)
    if path == "reduced-rho":
        rho = conjugate_density(u, reduced_register_density(spec), [0])
        return OutcomeDistribution(1, rho.diagonal())
    if path == "full-psi":
        transformed = apply_unitary(u, prepare_entangled_state(spec), [0])
        return measurement_distribution(transformed, spec.layout, 1)
    raise ValueError(f"unknown readout path {path!r}; expected one of {READOUT_PATHS}")


def all_path_distributions(spec: PeriodicFunctionSpec) -> dict[str, OutcomeDistribution]:
    distributions = {MEASURED_PATH: measurement_mixture(spec)}
    for path in READOUT_PATHS:
        distributions[path] = run_without_measurement(spec, path)
    return distributions


def pairwise_deviations(distributions: dict[str, OutcomeDistribution]) -> dict[str, float]:
    names = list(distributions)
    return {
        f"{a}|{b}": distributions[a].max_deviation(distributions[b])
        for i, a in enumerate(names)
        for b in names[i + 1 :]
    }


def sample_outcomes(
    spec: PeriodicFunctionSpec,
    samples: int = DEFAULT_SAMPLES,
    seed: SeedLike = DEFAULT_SEED,
) -> list[int]:
    """Repeat the measured protocol ``samples`` times and return the observed r values."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    rng = make_rng(seed)
    layout = spec.layout
    psi = prepare_entangled_state(spec)
    u = dft_unitary(spec.K)
    branches: dict[int, OutcomeDistribution] = {}
    observed: list[int] = []
    for _ in range(samples):
        y, collapsed = collapse(psi, layout, 2, rng=rng)
        if y not in branches:
            transformed = apply_unitary(u, collapsed, [0])
            branches[y] = measurement_distribution(transformed, layout, 1)
        observed.append(int(branches[y].sample(rng)))
    logger.debug("Drew %d samples over %d residues", samples, len(branches))
    return observed


# ----------------------------------------------------------------------
# Classical post-processing
# ----------------------------------------------------------------------


def continued_fraction(numerator: int, denominator: int) -> list[int]:
    terms: list[int] = []
    while denominator:
        terms.append(numerator // denominator)
        numerator, denominator = denominator, numerator % denominator
    return terms


def convergents(numerator: int, denominator: int) -> list[tuple[int, int]]:
    """(h, q) pairs of successive convergents of numerator/denominator."""
    result: list[tuple[int, int]] = []
    h_prev, h = 0, 1
    q_prev, q = 1, 0
    for a in continued_fraction(numerator, denominator):
        h_prev, h = h, a * h + h_prev
        q_prev, q = q, a * q + q_prev
        result.append((h, q))
    return result


def _denominator_candidate(r: int, K: int, N: int) -> int:
    best = 1
    for _, q in convergents(r, K):
        if q > N:
            break
        best = q
    return best


def _is_period(f: Callable[[int], int], candidate: int) -> bool:
    return all(f(x + candidate) == f(x) for x in range(SPOT_CHECK_POINTS))


def infer_period(
    samples: Iterable[int],
    K: int,
    N: int,
    f: Callable[[int], int] | None = None,
) -> int | None:
    """Recover p from readouts r via continued fractions of r/K; None when inconclusive."""
    samples = [int(r) for r in samples]
    if not samples:
        raise ValueError("no samples given")
    if any(r < 0 or r >= K for r in samples):
        raise ValueError(f"samples must lie in [0, {K})")

    denominators = [_denominator_candidate(r, K, N) for r in samples if r != 0]
    counts = Counter(q for q in denominators if q > 1)
    if not counts:
        return None

    candidate = 1
    for q, _ in sorted(counts.items(), key=lambda item: (-item[1], item[0])):
        merged = math.lcm(candidate, q)
        if merged <= N:
            candidate = merged
        else:
            logger.debug("Skipping denominator %d (lcm %d exceeds N=%d)", q, merged, N)

    if f is None:
        return candidate
    if _is_period(f, candidate):
        return _smallest_period_divisor(f, candidate)
    logger.info("Candidate period %d failed the spot check", candidate)

    # off-peak readouts can poison the merge; try every lcm of a subset of denominators
    for fallback in _subset_lcms(counts, N):
        if fallback != candidate and _is_period(f, fallback):
            logger.info("Recovered period %d without some denominators", fallback)
            return _smallest_period_divisor(f, fallback)
    return None


def _smallest_period_divisor(f: Callable[[int], int], candidate: int) -> int:
    for divisor in range(1, candidate + 1):
        if candidate % divisor == 0 and _is_period(f, divisor):
            return divisor
    return candidate


def _subset_lcms(counts: Counter[int], N: int) -> list[int]:
    """Every lcm <= N of a subset of denominators, most samples explained first."""
    reachable = {1}
    for q in counts:
        reachable |= {m for s in reachable if (m := math.lcm(s, q)) <= N}
    reachable.discard(1)
    support = {m: sum(c for q, c in counts.items() if m % q == 0) for m in reachable}
    return sorted(reachable, key=lambda m: (-support[m], m))
