"""JSON problem specs, mechanism tables and deterministic report output."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    DatabasePrior,
    DecisionProblem,
    StatePrior,
    ValidationError,
    as_budget,
)
from .mechanisms import ObliviousMechanism

SCHEMA_VERSION = 1


class SpecError(ValidationError):
    """Input file problem, with the file and line it was found on."""

    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line else str(path)
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line


def _key_line(text: str, key: str, nth: int = 0) -> int | None:
    hits = [m.start() for m in re.finditer(r'"%s"\s*:' % re.escape(key), text)]
    if len(hits) <= nth:
        return None
    return text.count("\n", 0, hits[nth]) + 1


def _row_line(text: str, key: str, row: int) -> int | None:
    """Line of the ``row``-th inner list under ``key``; falls back to the key's line."""
    start = _key_line(text, key)
    if start is None:
        return None
    offset = sum(len(l) + 1 for l in text.split("\n")[: start - 1])
    pos = text.index(":", offset) + 1
    depth, seen = 0, -1
    for i in range(pos, len(text)):
        c = text[i]
        if c == "[":
            depth += 1
            if depth == 2:
                seen += 1
                if seen == row:
                    return text.count("\n", 0, i) + 1
        elif c == "]":
            depth -= 1
            if depth == 0:
                break
    return start


def _read_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(path, None, f"cannot read file ({exc.strerror})") from None
    try:
        return text, json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None


def _number_list(values, path, text, key, ndim=1):
    if ndim == 2 and isinstance(values, list) and values and all(isinstance(r, list) for r in values):
        lengths = [len(r) for r in values]
        bad = next((i for i, n in enumerate(lengths) if n != lengths[0]), None)
        if bad is not None:
            raise SpecError(path, _row_line(text, key, bad),
                            f"row {bad} of '{key}' has {lengths[bad]} entries, row 0 has {lengths[0]}")
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise SpecError(path, _key_line(text, key), f"'{key}' must contain only numbers") from None
    if arr.ndim != ndim:
        raise SpecError(path, _key_line(text, key), f"'{key}' must be a {ndim}-d array")
    if not np.all(np.isfinite(arr)):
        raise SpecError(path, _key_line(text, key), f"'{key}' contains a non-finite value")
    return arr


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    epsilon: float
    problem: DecisionProblem
    state_prior: StatePrior | None = None
    database_prior: DatabasePrior | None = None
    options: dict = field(default_factory=dict)
    source: str = ""

    @property
    def mu0(self) -> StatePrior:
        if self.state_prior is not None:
            return self.state_prior
        return self.database_prior.state_prior()

    @property
    def n(self) -> int:
        return self.mu0.n


def load_problem(path) -> ProblemSpec:
    text, data = _read_json(path)
    if not isinstance(data, dict):
        raise SpecError(path, 1, "spec must be a JSON object")
    if data.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise SpecError(path, _key_line(text, "schema"), f"unsupported schema {data.get('schema')!r}")
    has_state, has_db = "state_prior" in data, "database_prior" in data
    if has_state == has_db:
        raise SpecError(path, 1, "give exactly one of 'state_prior' or 'database_prior'")
    for key in ("epsilon", "payoffs"):
        if key not in data:
            raise SpecError(path, 1, f"missing required key '{key}'")

    try:
        eps = as_budget(float(data["epsilon"])).epsilon
    except (TypeError, ValueError) as exc:
        raise SpecError(path, _key_line(text, "epsilon"), str(exc)) from None

    state_prior = database_prior = None
    try:
        if has_state:
            state_prior = StatePrior(_number_list(data["state_prior"], path, text, "state_prior"))
        else:
            db = data["database_prior"]
            if not isinstance(db, dict) or "n" not in db or "probs" not in db:
                raise SpecError(path, _key_line(text, "database_prior"), "'database_prior' needs 'n' and 'probs'")
            database_prior = DatabasePrior(int(db["n"]), _number_list(db["probs"], path, text, "probs"))
    except SpecError:
        raise
    except ValidationError as exc:
        key = "state_prior" if has_state else "database_prior"
        raise SpecError(path, _key_line(text, key), str(exc)) from None

    payoffs = _number_list(data["payoffs"], path, text, "payoffs", ndim=2)
    n = state_prior.n if state_prior is not None else database_prior.n_respondents
    for i, row in enumerate(payoffs):
        if row.size != n + 1:
            raise SpecError(path, _row_line(text, "payoffs", i), f"payoff row {i} has {row.size} entries, expected {n + 1}")
    actions = data.get("actions")
    try:
        if actions is not None:
            actions = _number_list(actions, path, text, "actions")
        problem = DecisionProblem.from_rows(payoffs, actions)
    except SpecError:
        raise
    except ValidationError as exc:
        raise SpecError(path, _key_line(text, "actions") or _key_line(text, "payoffs"), str(exc)) from None

    options = data.get("options", {})
    if not isinstance(options, dict):
        raise SpecError(path, _key_line(text, "options"), "'options' must be an object")
    return ProblemSpec(eps, problem, state_prior, database_prior, dict(options), str(path))


def load_mechanism(path) -> tuple[ObliviousMechanism, float | None]:
    """Read a mechanism table; also returns an epsilon if the file records one.

    Accepts a bare matrix, ``{"probs": [[...]], "outputs": [...], "label": ...}``
    or a solve report (its ``signal`` entry is used).
    """
    text, data = _read_json(path)
    eps = None
    key = "probs"
    if isinstance(data, list):
        probs, outputs, label = data, None, Path(path).stem
        key = None
    elif isinstance(data, dict):
        eps = data.get("epsilon")
        if "signal" in data:
            data = data["signal"]
        if not isinstance(data, dict) or "probs" not in data:
            raise SpecError(path, 1, "mechanism file needs a 'probs' table")
        probs, outputs, label = data["probs"], data.get("outputs"), data.get("label", Path(path).stem)
    else:
        raise SpecError(path, 1, "mechanism file must be a matrix or an object")

    if key is None:
        try:
            arr = np.asarray(probs, dtype=float)
        except (TypeError, ValueError):
            raise SpecError(path, 1, "mechanism table must contain only numbers") from None
        if arr.ndim != 2:
            raise SpecError(path, 1, "mechanism table must be a matrix")
    else:
        arr = _number_list(probs, path, text, key, ndim=2)

    def row_line(i):
        if key is None:
            lines = [n + 1 for n, l in enumerate(text.split("\n")) if "[" in l]
            return lines[i + 1] if len(lines) > i + 1 else 1
        return _row_line(text, key, i)

    if np.any(arr < 0):
        i = int(np.argwhere(arr < 0)[0][0])
        raise SpecError(path, row_line(i), f"row {i} has a negative probability")
    sums = arr.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-9)
    if bad.size:
        i = int(bad[0])
        raise SpecError(path, row_line(i), f"row {i} sums to {float(sums[i])!r}, not 1")
    try:
        mech = ObliviousMechanism.from_array(arr, str(label), outputs)
    except ValidationError as exc:
        raise SpecError(path, 1, str(exc)) from None
    return mech, None if eps is None else float(eps)


# ---------------------------------------------------------------------------
# output


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"refusing to write non-finite number {x!r}")
    if x == 0:
        return "0"
    return "%.17g" % x


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits.

    Flat numeric lists stay on one line so matrices read row by row.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating, str)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        inner = (",\n").join(pad + dumps(v, indent, _level + 1) for v in obj)
        return "[\n" + inner + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = (",\n").join(f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items())
        return "{\n" + inner + "\n" + end + "}"
    raise TypeError(f"cannot serialise {type(obj).__name__}")
