from __future__ import annotations

import shutil
from typing import Any, Mapping, Sequence

import numpy as np
import pandas as pd


def to_float(value: Any) -> float | None:
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


def fmt_num(value: float | None, digits: int = 3) -> str:
    return f"{value:,.{digits}f}" if value is not None else "n/a"


def fmt_sci(value: float | None, digits: int = 2) -> str:
    return f"{value:.{digits}e}" if value is not None else "n/a"


def fmt_pct(value: float | None, digits: int = 2, *, scale_100: bool = False) -> str:
    if value is None:
        return "n/a"
    pct = value * 100 if scale_100 else value
    return f"{pct:,.{digits}f}%"


def bucket_max(values: Sequence[float], width: int) -> list[float]:
    """Shrink ``values`` to at most ``width`` buckets, keeping each bucket's peak."""
    if len(values) <= width:
        return list(values)
    edges = np.linspace(0, len(values), width + 1).astype(int)
    array = np.asarray(values, dtype=np.float64)
    return [float(array[lo:hi].max()) for lo, hi in zip(edges[:-1], edges[1:])]


def sparkline(values: list[float], width: int = 60) -> str:
    if not values:
        return "n/a"
    subset = bucket_max(values, width)
    lo = min(subset)
    hi = max(subset)
    ramp = " .:-=+*#%@"
    if hi == lo:
        return ramp[len(ramp) // 2] * len(subset)
    chars: list[str] = []
    for value in subset:
        idx = int((value - lo) / (hi - lo) * (len(ramp) - 1))
        chars.append(ramp[idx])
    return "".join(chars)


def _rule() -> str:
    columns = shutil.get_terminal_size((100, 40)).columns
    return "=" * min(columns, 100)


def _check_lines(checks: Sequence[Mapping[str, Any]]) -> list[str]:
    passed = sum(1 for check in checks if check.get("pass"))
    lines = [f"checks: {passed}/{len(checks)} passed"]
    for check in checks:
        if not check.get("pass"):
            lines.append(
                f"  FAIL {check.get('name')} deviation={fmt_sci(to_float(check.get('deviation')))}"
            )
    return lines


def render_period_summary(report: Mapping[str, Any]) -> str:
    results = report["results"]
    function = results["function"]
    line = _rule()
    rows = [
        line,
        f"PERIOD FINDING | N={function['N']} b={function['b']} K={function['K']} "
        f"| seed {report['seed']}",
        line,
    ]
    for name, probabilities in results["distributions"].items():
        rows.append(f"{name:>12}: {sparkline(list(probabilities), width=64)}")
    rows.append(
        "deviations: "
        + "  ".join(f"{pair}={fmt_sci(value)}" for pair, value in results["deviations"].items())
    )
    rows.append(f"peaks: {results['peaks']}")
    rows.append(
        f"samples={len(results['samples'])}  inferred_period={results['inferred_period']}  "
        f"true_period={results['true_period']}"
    )
    rows.extend(_check_lines(report["checks"]))
    rows.append(line)
    return "\n".join(rows)


def render_qec_summary(report: Mapping[str, Any]) -> str:
    results = report["results"]
    summary = results["summary"]
    line = _rule()
    fidelities = [trial["fidelity"] for trial in results["trials"]]
    rows = [
        line,
        f"ERROR CORRECTION | code={results['code']} channel={results['channel']} "
        f"| seed {report['seed']}",
        line,
        (
            f"trials={summary['trials']}  recovered={summary['recovered']}  "
            f"product={summary['product']}  "
            f"recovery_rate={fmt_pct(summary['recovered'] / summary['trials'], 1, scale_100=True)}"
        ),
        (
            f"min_fidelity={fmt_num(summary['min_fidelity'], 12)}  "
            f"max_factorization_deviation={fmt_sci(summary['max_factorization_deviation'])}"
        ),
        f"fidelity_trace: {sparkline(fidelities, width=64)}",
    ]
    rows.extend(_check_lines(report["checks"]))
    rows.append(line)
    return "\n".join(rows)


def verification_table(report: Mapping[str, Any]) -> pd.DataFrame:
    records = [
        {
            "qubit": entry["qubit"] + 1,
            "max_deviation": entry["max_deviation"],
            "eight_vector_deviation": entry["eight_vector_deviation"],
            "pass": entry["pass"],
        }
        for entry in report["results"]["qubits"]
    ]
    return pd.DataFrame.from_records(records).set_index("qubit")


def render_verification(report: Mapping[str, Any]) -> str:
    results = report["results"]
    line = _rule()
    rows = [
        line,
        f"ORTHOGONALITY CONDITIONS | code={results['code']} complete={results['complete']}",
        line,
    ]
    for entry in results["qubits"]:
        rows.append(f"qubit {entry['qubit'] + 1}:")
        for name, value in entry["scalar_products"].items():
            rows.append(
                f"  <X_{name.split(',')[0]}, X_{name.split(',')[1]}> = "
                f"{value.real:+.3e}{value.imag:+.3e}j  "
                f"deviation={fmt_sci(entry['deviations'][name])}"
            )
    rows.append(line)
    rows.append(
        verification_table(report).to_string(
            float_format=lambda v: f"{v:.3e}",
        )
    )
    rows.extend(_check_lines(report["checks"]))
    rows.append(line)
    return "\n".join(rows)


HISTORY_COLUMNS = [
    "id",
    "created_at",
    "command",
    "seed",
    "exit_code",
    "passed_checks",
    "total_checks",
]


def render_history(runs: Sequence[Mapping[str, Any]]) -> str:
    if not runs:
        return "no recorded runs"
    frame = pd.DataFrame.from_records(
        runs,
        columns=HISTORY_COLUMNS,
    )
    return frame.to_string(index=False)
