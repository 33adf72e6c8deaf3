"""Report serialisation: JSON with 17-significant-digit floats, CSV distribution dumps."""

from __future__ import annotations

import json
import logging
import math
import re
import sys
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import pandas as pd

from disentangle.registers import OutcomeDistribution

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"
_FLOAT_TAG = "@@float:"
_TAGGED_FLOAT = re.compile(r'"' + re.escape(_FLOAT_TAG) + r'([^"]*)"')


def format_float(value: float) -> str | None:
    """17 significant digits, always with a decimal point or exponent; None for NaN/inf."""
    if not math.isfinite(value):
        return None
    text = format(value, FLOAT_FORMAT)
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def sanitize(obj: Any) -> Any:
    """Recursively convert numpy values, complex numbers and floats into JSON-ready values.

    Floats come back as tagged strings so ``dumps`` can emit them unquoted at full
    precision; NaN and infinities become None.
    """
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, np.generic):
        return sanitize(obj.item())
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        text = format_float(obj)
        return None if text is None else _FLOAT_TAG + text
    if isinstance(obj, complex):
        return [sanitize(obj.real), sanitize(obj.imag)]
    if isinstance(obj, OutcomeDistribution):
        return sanitize(obj.probabilities)
    if isinstance(obj, Mapping):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(report: Mapping[str, Any]) -> str:
    text = json.dumps(sanitize(report), indent=2, ensure_ascii=False)
    return _TAGGED_FLOAT.sub(r"\1", text) + "\n"


def _write_text(text: str, out: str | Path | None) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("Report written to %s", path)


def write_json(report: Mapping[str, Any], out: str | Path | None) -> None:
    _write_text(dumps(report), out)


DistributionMap = Mapping[str, OutcomeDistribution | np.ndarray]


def distribution_frame(distributions: DistributionMap) -> pd.DataFrame:
    """One row per outcome r, one probability column per readout path."""
    frame = pd.DataFrame(
        {
            name: np.asarray(getattr(dist, "probabilities", dist), dtype=np.float64)
            for name, dist in distributions.items()
        }
    )
    frame.insert(0, "r", np.arange(len(frame), dtype=np.int64))
    return frame


def write_csv(distributions: DistributionMap, out: str | Path | None) -> None:
    text = distribution_frame(distributions).to_csv(
        index=False, float_format="%.17g", lineterminator="\n"
    )
    _write_text(text, out)
