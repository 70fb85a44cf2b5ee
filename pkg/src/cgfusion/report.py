"""Structured pass/fail reports and a canonical JSON writer.

Reports are the uniform result type for every verification in the library:
named residuals measured against named tolerances, plus certified constants
and a provenance note saying whether the check was exact or sampled.  The
JSON form is canonical (sorted keys, fixed float format), so identical runs
serialize to identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


def format_float(x: float) -> str:
    """Decimal form with 17 significant digits; round-trips any double."""
    v = float(x)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value cannot be serialized: {x!r}")
    return format(v, ".17g")


def _write_json(value, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(value)
        for i, key in enumerate(keys):
            if not isinstance(key, str):
                raise TypeError(f"JSON keys must be strings, got {key!r}")
            out.append(pad_in + json.dumps(key) + ": ")
            _write_json(value[key], out, indent, level + 1)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        seq = list(value)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(seq):
            out.append(pad_in)
            _write_json(item, out, indent, level + 1)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif value is None:
        out.append("null")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps_canonical(document, indent: int = 2) -> str:
    """Serialize nested dict/list data to deterministic JSON text.

    Keys are emitted sorted and every float goes through
    :func:`format_float`, so equal documents produce byte-equal text.
    """
    out: list[str] = []
    _write_json(document, out, indent, 0)
    out.append("\n")
    return "".join(out)


EXACT = "exact spectral"
SAMPLED = "sampled"


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one named check.

    ``passed`` may only be True when every residual is within its
    tolerance (looked up by matching key, falling back to "tol").
    A report may be forced to fail regardless of residuals, e.g. when a
    hypothesis cannot be evaluated at all.
    """

    name: str
    passed: bool
    residuals: dict[str, float] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    constants: dict[str, float] = field(default_factory=dict)
    provenance: str = EXACT
    notes: tuple[str, ...] = ()
    wall_time_s: float | None = None

    def __post_init__(self):
        for group in (self.residuals, self.tolerances, self.constants):
            for key, value in group.items():
                if not math.isfinite(value):
                    raise ValueError(f"report {self.name}: field {key} is not finite")
        if self.passed and not self.residuals_ok():
            raise ValueError(f"report {self.name}: passed despite residuals over tolerance")

    def tolerance_for(self, key: str) -> float:
        if key in self.tolerances:
            return self.tolerances[key]
        if "tol" in self.tolerances:
            return self.tolerances["tol"]
        raise KeyError(f"report {self.name}: no tolerance recorded for residual {key}")

    def residuals_ok(self) -> bool:
        return all(value <= self.tolerance_for(key) for key, value in self.residuals.items())

    def to_dict(self, include_timing: bool = False) -> dict:
        doc = {
            "name": self.name,
            "passed": self.passed,
            "residuals": dict(self.residuals),
            "tolerances": dict(self.tolerances),
            "constants": dict(self.constants),
            "provenance": self.provenance,
            "notes": list(self.notes),
        }
        if include_timing and self.wall_time_s is not None:
            doc["wall_time_s"] = self.wall_time_s
        return doc


def build_report(
    name: str,
    residuals: dict[str, float],
    tolerances: dict[str, float],
    constants: dict[str, float] | None = None,
    provenance: str = EXACT,
    notes: tuple[str, ...] = (),
    force_fail: bool = False,
    wall_time_s: float | None = None,
) -> VerificationReport:
    """Assemble a report, deciding pass/fail from the residuals."""
    probe = VerificationReport(
        name=name,
        passed=False,
        residuals=dict(residuals),
        tolerances=dict(tolerances),
        constants=dict(constants or {}),
        provenance=provenance,
        notes=tuple(notes),
        wall_time_s=wall_time_s,
    )
    passed = probe.residuals_ok() and not force_fail
    return VerificationReport(
        name=name,
        passed=passed,
        residuals=dict(residuals),
        tolerances=dict(tolerances),
        constants=dict(constants or {}),
        provenance=provenance,
        notes=tuple(notes),
        wall_time_s=wall_time_s,
    )
