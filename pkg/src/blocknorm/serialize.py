"""JSON encodings for matrices, instances, certificates and reports.

Complex entries are ``[re, im]`` pairs. Floats go through ``json`` unchanged,
which writes the shortest decimal that round-trips, so reading a file back
reproduces every matrix bit for bit.
"""

from __future__ import annotations

import json
import math
from typing import Any, Optional

import numpy as np

from .blockineq import ProblemInstance, ViolationCertificate, make_instance
from .errors import BlockNormError
from .matcore import DEFAULT_TOL, ToleranceConfig

SCHEMA_VERSION = "1.0"
REPORT_KEYS = {"schema_version", "command", "results", "pass"}
MATRIX_KEYS = {"rows", "cols", "data"}
INSTANCE_KEYS = {"A", "X", "B"}
CERTIFICATE_KEYS = {"instance", "block_norm", "sum_norm", "gap", "margin"}


class MalformedInput(BlockNormError):
    """Input file does not match its schema; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def matrix_to_json(m: np.ndarray) -> dict:
    arr = np.asarray(m, dtype=np.complex128)
    return {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in arr.ravel()],
    }


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _exact_keys(obj: Any, expected: set, field: str, optional: frozenset = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise MalformedInput(field, "expected a JSON object")
    unknown = set(obj) - expected - optional
    if unknown:
        raise MalformedInput(f"{field}.{sorted(unknown)[0]}", "unknown field")
    missing = expected - set(obj)
    if missing:
        raise MalformedInput(f"{field}.{sorted(missing)[0]}", "missing field")
    return obj


def matrix_from_json(obj: Any, field: str = "matrix") -> np.ndarray:
    obj = _exact_keys(obj, MATRIX_KEYS, field)
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    for name, v in (("rows", rows), ("cols", cols)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise MalformedInput(f"{field}.{name}", f"must be a positive integer, got {v!r}")
    if not isinstance(data, list):
        raise MalformedInput(f"{field}.data", "must be a list of [re, im] pairs")
    if len(data) != rows * cols:
        raise MalformedInput(f"{field}.data", f"has {len(data)} entries, expected rows*cols = {rows * cols}")
    out = np.empty(rows * cols, dtype=np.complex128)
    for i, pair in enumerate(data):
        if not (isinstance(pair, list) and len(pair) == 2 and all(_is_number(v) for v in pair)):
            raise MalformedInput(f"{field}.data[{i}]", "must be a [re, im] pair of numbers")
        if not (math.isfinite(pair[0]) and math.isfinite(pair[1])):
            raise MalformedInput(f"{field}.data[{i}]", "must be finite")
        out[i] = complex(pair[0], pair[1])
    return out.reshape(rows, cols)


def instance_to_json(inst: ProblemInstance) -> dict:
    return {"A": matrix_to_json(inst.a), "X": matrix_to_json(inst.x), "B": matrix_to_json(inst.b)}


def instance_matrices(obj: Any, field: str = "instance") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    obj = _exact_keys(obj, INSTANCE_KEYS, field)
    mats = {k: matrix_from_json(obj[k], f"{field}.{k}") for k in ("A", "X", "B")}
    n = mats["A"].shape[0]
    for k, m in mats.items():
        if m.shape != (n, n):
            raise MalformedInput(f"{field}.{k}", f"must be {n}x{n} to match A, got {m.shape[0]}x{m.shape[1]}")
    return mats["A"], mats["X"], mats["B"]


def instance_from_json(obj: Any, field: str = "instance", tol: ToleranceConfig = DEFAULT_TOL) -> ProblemInstance:
    a, x, b = instance_matrices(obj, field)
    return make_instance(a, x, b, tol)


def certificate_to_json(cert: ViolationCertificate) -> dict:
    return {
        "instance": instance_to_json(cert.instance),
        "block_norm": cert.block_norm,
        "sum_norm": cert.sum_norm,
        "gap": cert.gap,
        "margin": cert.margin,
    }


def certificate_instance(obj: Any, field: str = "certificate") -> Any:
    """The embedded instance object of a certificate, after schema checks."""
    obj = _exact_keys(obj, CERTIFICATE_KEYS, field)
    for k in ("block_norm", "sum_norm", "gap", "margin"):
        if not _is_number(obj[k]):
            raise MalformedInput(f"{field}.{k}", "must be a number")
    return obj["instance"]


def make_report(command: dict, results: dict, passed: bool) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "results": results, "pass": bool(passed)}


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def read_report(obj: Any) -> dict:
    obj = _exact_keys(obj, REPORT_KEYS, "report")
    if obj["schema_version"] != SCHEMA_VERSION:
        raise MalformedInput("report.schema_version", f"unsupported version {obj['schema_version']!r}")
    if not isinstance(obj["command"], dict) or not isinstance(obj["results"], dict):
        raise MalformedInput("report", "command and results must be objects")
    if not isinstance(obj["pass"], bool):
        raise MalformedInput("report.pass", "must be a boolean")
    return obj


def search_results(report) -> dict:
    return {
        "best_gap": _finite_or_none(report.best_gap),
        "best_instance": None if report.best_instance is None else instance_to_json(report.best_instance),
        "trichotomy_counts": dict(report.trichotomy_counts),
        "alpha_greater_violations": report.alpha_greater_violations,
        "violations": [certificate_to_json(c) for c in report.violations],
    }


SEARCH_RESULT_KEYS = {"best_gap", "best_instance", "trichotomy_counts", "alpha_greater_violations", "violations"}
FALSIFY_RESULT_KEYS = {"outcome", "stage", "k", "commutator_defect", "margin_shortfall", "reason", "certificate"}


def embedded_certificates(report: dict) -> list:
    """Certificate objects carried by a search or falsify report."""
    cmd = report["command"].get("name")
    results = report["results"]
    if cmd == "search":
        _exact_keys(results, SEARCH_RESULT_KEYS, "results")
        if not isinstance(results["violations"], list):
            raise MalformedInput("results.violations", "must be a list")
        return results["violations"]
    if cmd == "falsify":
        _exact_keys(results, FALSIFY_RESULT_KEYS, "results")
        c = results["certificate"]
        return [] if c is None else [c]
    raise MalformedInput("report.command.name", f"no certificates in a {cmd!r} report")
