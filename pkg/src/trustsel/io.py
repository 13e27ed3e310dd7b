"""CSV matrices, JSON plans/reports, and config files.

Matrix CSV: header ``model_id,t1,...,tT`` then one row per model, UTF-8,
LF line endings, ``.`` as decimal separator. Floats are written with 17
significant digits so a save/load round trip is bit-exact.

Plans, reports and fractional solutions are JSON objects carrying a
``schema_version`` and a ``kind`` field (``plan``, ``report``, ``lp-bound``,
``bench``).
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import BinaryTrustMatrix, BudgetConfig, ModelOutputs, SelectionPlan
from .errors import ConfigError, InputError, ParseError

SCHEMA_VERSION = 1


def format_number(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_matrix_csv(dest, values: np.ndarray, model_ids) -> None:
    """Write to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_rows(dest, np.asarray(values), model_ids)
        return
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        _write_rows(fh, np.asarray(values), model_ids)


def _write_rows(fh, values: np.ndarray, model_ids) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["model_id"] + [f"t{j + 1}" for j in range(values.shape[1])])
    integral = np.issubdtype(values.dtype, np.integer)
    for mid, row in zip(model_ids, values):
        w.writerow([mid] + [str(int(v)) if integral else format_number(v) for v in row])


def read_matrix_csv(path) -> tuple[tuple[str, ...], np.ndarray]:
    path = str(path)
    ids: list[str] = []
    rows: list[list[float]] = []
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "model_id" or len(header) < 2:
            raise ParseError("header must be 'model_id,t1,...,tT'", 1, path)
        width = len(header)
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != width:
                raise ParseError(f"expected {width} fields, found {len(rec)}", lineno, path)
            row = []
            for col, cell in enumerate(rec[1:], start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"non-numeric cell {header[col]}={cell!r}", lineno, path) from None
                if not math.isfinite(v):
                    raise ParseError(f"non-finite cell {header[col]}={cell!r}", lineno, path)
                row.append(v)
            ids.append(rec[0].strip())
            rows.append(row)
    if not rows:
        raise ParseError("no model rows", None, path)
    return tuple(ids), np.array(rows, dtype=float)


def load_outputs(path) -> ModelOutputs:
    ids, values = read_matrix_csv(path)
    return ModelOutputs(values, ids)


def load_binary(path) -> tuple[tuple[str, ...], BinaryTrustMatrix]:
    ids, values = read_matrix_csv(path)
    bad = np.argwhere((values != 0) & (values != 1))
    if len(bad):
        i, j = bad[0]
        raise ParseError(f"cell t{j + 1}={values[i, j]!r} is not 0 or 1", int(i) + 2, str(path))
    return ids, BinaryTrustMatrix(values.astype(np.int8))


def save_outputs(path, outputs: ModelOutputs) -> None:
    write_matrix_csv(path, outputs.values, outputs.model_ids)


def save_binary(path, A: BinaryTrustMatrix, model_ids) -> None:
    write_matrix_csv(path, A.values.astype(np.int64), model_ids)


def plan_to_dict(plan: SelectionPlan, model_ids, solver: str, **extra) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "plan",
        "solver": solver,
        "T": len(plan),
        "assignment": [int(x) for x in plan.assignment],
        "models": [model_ids[int(x)] for x in plan.assignment],
        "switch_count": plan.switch_count,
        "trust_score": plan.trust_score,
        "failsafe_slots": sorted(plan.failsafe_slots),
        **extra,
    }


def save_json(path, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc), exc.lineno, str(path)) from None


def save_plan(path, plan: SelectionPlan, model_ids, solver: str, **extra) -> None:
    save_json(path, plan_to_dict(plan, model_ids, solver, **extra))


def load_plan(path, A: BinaryTrustMatrix) -> SelectionPlan:
    data = load_json(path)
    if data.get("kind") != "plan":
        raise InputError(f"{path} is not a plan file")
    return SelectionPlan.from_assignment(data["assignment"], A)


_CONFIG_KEYS = {
    "budget": "B",
    "B": "B",
    "rate": "R",
    "R": "R",
    "p_max": "p_max",
    "lambda": "lam",
    "lam": "lam",
    "h0": "H0",
    "H0": "H0",
    "eps": "eps",
}


def load_config(path) -> dict:
    """Read a JSON config file into ``BudgetConfig`` keyword arguments.

    Accepted keys: ``budget``/``B``, ``rate``/``R``, ``p_max``,
    ``lambda``, ``h0``/``H0``, ``eps``; anything else is passed through
    under its own name for the CLI (e.g. ``solver``, ``seed``).
    """
    data = load_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return {_CONFIG_KEYS.get(k, k): v for k, v in data.items()}


def config_to_dict(config: BudgetConfig) -> dict:
    return {"B": config.B, "R": config.R, "p_max": config.p_max, "lambda": config.lam, "H0": config.H0, "eps": config.eps}


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
