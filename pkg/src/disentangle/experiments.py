"""Seeded batch experiments behind the command-line surface.

Every report is a plain dict ``{config, seed, version, results, checks}`` with
no timestamps, so the same config and seed always serialise to the same bytes.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Any, Callable

import numpy as np

from disentangle._version import __version__
from disentangle.codes import CODE_FACTORIES, ErrorOperator, QuantumCode, get_code
from disentangle.config import (
    DEFAULT_ENV_DIM,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    FIDELITY_TOL,
    ORTHOGONALITY_TOL,
    PATH_AGREEMENT_TOL,
)
from disentangle.linalg import StateVector
from disentangle.period import (
    PeriodicFunctionSpec,
    all_path_distributions,
    infer_period,
    pairwise_deviations,
    sample_outcomes,
)
from disentangle.qec import (
    DecodeReport,
    EnvironmentCoupling,
    MixedErrorChannel,
    apply_environment_coupling,
    apply_error,
    apply_mixed_error,
    apply_pauli,
    apply_superposed_error,
    attach_environment,
    check_orthogonality_conditions,
    decode_and_verify,
    encode,
    random_coefficients,
)

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_INCONCLUSIVE = 1
EXIT_INVALID_CONFIG = 2
EXIT_INVARIANT_VIOLATION = 3

MAX_SEED = 2**64
CHANNELS = ("superposed", "mixed", "environment", "all-paulis", "phase-error")
PAULI_CHANNEL_PREFIX = "pauli:"
MIXED_CHANNEL_TERMS = 4


def _check_seed(seed: int) -> None:
    if not 0 <= seed < MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")


@dataclass(frozen=True)
class PeriodExperimentConfig:
    N: int
    b: int
    k: int | None = None
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    format: str = "json"

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"format must be json or csv, got {self.format!r}")
        _check_seed(self.seed)

    def to_dict(self) -> dict[str, Any]:
        return {"command": "period", **asdict(self)}


@dataclass(frozen=True)
class QecExperimentConfig:
    code: str
    channel: str
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    env_dim: int = DEFAULT_ENV_DIM

    def __post_init__(self) -> None:
        if self.code not in CODE_FACTORIES:
            raise ValueError(
                f"unknown code {self.code!r}; expected one of {sorted(CODE_FACTORIES)}"
            )
        if self.channel.startswith(PAULI_CHANNEL_PREFIX):
            ErrorOperator.parse(self.channel[len(PAULI_CHANNEL_PREFIX) :])
        elif self.channel not in CHANNELS:
            raise ValueError(
                f"unknown channel {self.channel!r}; expected pauli:<op><idx> or one of {CHANNELS}"
            )
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.env_dim < 2:
            raise ValueError(f"env_dim must be >= 2, got {self.env_dim}")
        _check_seed(self.seed)

    def to_dict(self) -> dict[str, Any]:
        return {"command": "qec", **asdict(self)}


def _report(config: dict[str, Any], seed: int | None, results: dict, checks: list[dict]) -> dict:
    return {
        "config": config,
        "seed": seed,
        "version": __version__,
        "results": results,
        "checks": checks,
    }


def _check(name: str, passed: bool, deviation: float | None) -> dict[str, Any]:
    return {"name": name, "pass": bool(passed), "deviation": deviation}


# ----------------------------------------------------------------------
# Period finding
# ----------------------------------------------------------------------


def run_period_experiment(config: PeriodExperimentConfig) -> dict[str, Any]:
    spec = PeriodicFunctionSpec.modular_exponentiation(config.N, config.b, config.k)
    logger.info(
        "Period experiment: N=%d b=%d K=%d (true period %d)",
        spec.modulus,
        spec.generator,
        spec.K,
        spec.period,
    )
    distributions = all_path_distributions(spec)
    deviations = pairwise_deviations(distributions)
    samples = sample_outcomes(spec, config.samples, config.seed)
    inferred = infer_period(samples, spec.K, spec.modulus, spec.value)
    if inferred is None:
        logger.warning("Period inference inconclusive after %d samples", len(samples))
    else:
        logger.info("Inferred period %d", inferred)

    checks = [
        _check(f"paths:{pair}", value <= PATH_AGREEMENT_TOL, value)
        for pair, value in deviations.items()
    ]
    checks.append(_check("period", inferred == spec.period, None))
    results = {
        "function": spec.describe(),
        "true_period": spec.period,
        "distributions": {name: dist.probabilities for name, dist in distributions.items()},
        "deviations": deviations,
        "peaks": distributions["full-psi"].support(tol=1e-12),
        "samples": samples,
        "inferred_period": inferred,
    }
    return _report(config.to_dict(), config.seed, results, checks)


# ----------------------------------------------------------------------
# Error correction
# ----------------------------------------------------------------------


def _trial_record(
    index: int,
    error: str,
    qubit: int | None,
    decoded: DecodeReport,
    expected_syndrome: int | None = None,
) -> dict[str, Any]:
    record = {
        "trial": index,
        "error": error,
        "qubit": qubit,
        **decoded.to_dict(),
        "recovered": decoded.recovered(),
    }
    if expected_syndrome is not None:
        record["expected_syndrome"] = expected_syndrome
        record["syndrome_mass"] = decoded.syndrome.probability(expected_syndrome)
    return record


def _pauli_trial(
    code: QuantumCode, error: ErrorOperator, index: int, rng: np.random.Generator
) -> dict[str, Any]:
    if error.qubit >= code.n_physical:
        raise ValueError(
            f"{error.label} acts outside the {code.n_physical}-qubit block of {code.name}"
        )
    logical = StateVector.random((2,), rng)
    corrupted = apply_pauli(encode(logical, code), error)
    try:
        expected = code.syndrome_of(error.label)
    except ValueError:
        expected = None
    return _trial_record(
        index, error.label, error.qubit, decode_and_verify(corrupted, code, logical), expected
    )


def _superposed_trial(code: QuantumCode, index: int, rng: np.random.Generator) -> dict[str, Any]:
    logical = StateVector.random((2,), rng)
    coefficients = random_coefficients(code, rng)
    corrupted = apply_superposed_error(encode(logical, code), code, coefficients)
    return _trial_record(index, "superposed", None, decode_and_verify(corrupted, code, logical))


def _mixed_trial(code: QuantumCode, index: int, rng: np.random.Generator) -> dict[str, Any]:
    logical = StateVector.random((2,), rng)
    channel = MixedErrorChannel.random(code, MIXED_CHANNEL_TERMS, rng)
    corrupted = apply_mixed_error(encode(logical, code).density(), channel, code)
    return _trial_record(index, "mixed", None, decode_and_verify(corrupted, code, logical))


def _environment_trial(
    code: QuantumCode, index: int, rng: np.random.Generator, env_dim: int
) -> dict[str, Any]:
    qubit = index % code.n_physical
    logical = StateVector.random((2,), rng)
    coupling = EnvironmentCoupling.haar_random(env_dim, rng)
    coupled = apply_environment_coupling(
        attach_environment(encode(logical, code), coupling), coupling, qubit
    )
    return _trial_record(index, "environment", qubit, decode_and_verify(coupled, code, logical))


def _all_paulis_trial(code: QuantumCode, index: int, rng: np.random.Generator) -> dict[str, Any]:
    syndrome = index + 1
    error = code.error_ops[index]
    logical = StateVector.random((2,), rng)
    corrupted = apply_error(encode(logical, code), code, syndrome)
    return _trial_record(
        index, error.label, error.qubit, decode_and_verify(corrupted, code, logical), syndrome
    )


def _trial_runner(
    config: QecExperimentConfig, code: QuantumCode
) -> Callable[[int, np.random.Generator], dict[str, Any]]:
    channel = config.channel
    if channel.startswith(PAULI_CHANNEL_PREFIX):
        error = ErrorOperator.parse(channel[len(PAULI_CHANNEL_PREFIX) :])
        return lambda i, rng: _pauli_trial(code, error, i, rng)
    if channel == "phase-error":
        return lambda i, rng: _pauli_trial(code, ErrorOperator("Z", 0), i, rng)
    if channel == "superposed":
        return lambda i, rng: _superposed_trial(code, i, rng)
    if channel == "mixed":
        return lambda i, rng: _mixed_trial(code, i, rng)
    if channel == "environment":
        return lambda i, rng: _environment_trial(code, i, rng, config.env_dim)
    if channel == "all-paulis":
        return lambda i, rng: _all_paulis_trial(code, i, rng)
    raise ValueError(f"unknown channel {channel!r}")


def run_qec_experiment(config: QecExperimentConfig) -> dict[str, Any]:
    """Decode every trial without consulting the syndrome; syndromes are reported only."""
    code = get_code(config.code)
    n_trials = len(code.error_ops) if config.channel == "all-paulis" else config.trials
    if config.channel == "all-paulis" and config.trials != n_trials:
        logger.info("all-paulis runs one trial per error operator (%d)", n_trials)
    logger.info(
        "QEC experiment: code=%s channel=%s trials=%d seed=%d",
        code.name,
        config.channel,
        n_trials,
        config.seed,
    )

    run_trial = _trial_runner(config, code)
    children = np.random.SeedSequence(config.seed).spawn(n_trials)
    trials = []
    for index, child in enumerate(children):
        record = run_trial(index, np.random.default_rng(child))
        logger.debug(
            "Trial %d (%s): product=%s fidelity=%.17g",
            index,
            record["error"],
            record["product"],
            record["fidelity"],
        )
        trials.append(record)

    recovered = sum(1 for trial in trials if trial["recovered"])
    min_fidelity = min(trial["fidelity"] for trial in trials)
    summary = {
        "trials": len(trials),
        "recovered": recovered,
        "product": sum(1 for trial in trials if trial["product"]),
        "min_fidelity": min_fidelity,
        "max_factorization_deviation": max(trial["factorization_deviation"] for trial in trials),
    }

    if config.channel == "phase-error" and not code.complete:
        checks = [_check("expected-failure", min_fidelity < 1.0 - FIDELITY_TOL, 1.0 - min_fidelity)]
    else:
        checks = [_check("recovery", recovered == len(trials), 1.0 - min_fidelity)]
    marked = [trial for trial in trials if "expected_syndrome" in trial]
    if marked:
        worst = min(trial["syndrome_mass"] for trial in marked)
        checks.append(_check("syndrome-point-mass", worst >= 1.0 - FIDELITY_TOL, 1.0 - worst))

    logger.info("Recovered %d/%d trials (min fidelity %.17g)", recovered, len(trials), min_fidelity)
    results = {
        "code": code.name,
        "channel": config.channel,
        "syndrome_labels": code.syndrome_labels,
        "summary": summary,
        "trials": trials,
    }
    return _report(config.to_dict(), config.seed, results, checks)


# ----------------------------------------------------------------------
# Orthogonality verification
# ----------------------------------------------------------------------


def run_verification(code_name: str) -> dict[str, Any]:
    code = get_code(code_name)
    reports = [check_orthogonality_conditions(code, q) for q in range(code.n_physical)]
    checks = [
        _check(
            f"qubit{r.qubit_index + 1}",
            r.passed(ORTHOGONALITY_TOL),
            max(r.max_deviation, r.eight_vector_deviation),
        )
        for r in reports
    ]
    compliant = all(check["pass"] for check in checks)
    logger.info("%s orthogonality conditions: %s", code.name, "hold" if compliant else "FAIL")
    results = {
        "code": code.name,
        "complete": code.complete,
        "compliant": compliant,
        "qubits": [r.to_dict() for r in reports],
        "definition": code.to_dict(),
    }
    return _report({"command": "verify", "code": code_name}, None, results, checks)
