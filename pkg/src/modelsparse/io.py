"""File formats. All indices are 0-based.

Model JSON
----------
::

    {"p": 8, "kind": "plain_k", "k": 3}
    {"p": 6, "kind": "disjoint_groups", "groups": [[0, 1], [2, 3], [4, 5]], "g": 2}
    {"p": 4, "kind": "explicit", "supports": [[0, 1], [2, 3]]}

``explicit`` may carry an optional ``"k"`` that every support must respect;
subsumed supports are dropped on load.

Dataset CSV
-----------
Header ``y,x0,...,x{p-1}``, one sample per row.

Vector CSV
----------
One value per line, no header.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .glm import Dataset
from .model import DisjointGroups, ExplicitFamily, PlainK, canonicalize_family


class FormatError(ValueError):
    """Malformed input file."""


def model_from_dict(d):
    try:
        p = int(d["p"])
        kind = d["kind"]
        if kind == "plain_k":
            return PlainK(p, int(d["k"]))
        if kind == "disjoint_groups":
            return DisjointGroups(p, tuple(tuple(c) for c in d["groups"]), int(d["g"]))
        if kind == "explicit":
            sups = d["supports"]
            if "k" in d and any(len(set(s)) > int(d["k"]) for s in sups):
                raise FormatError(f"an explicit support exceeds k={d['k']}")
            return canonicalize_family(sups, p)
    except KeyError as exc:
        raise FormatError(f"model JSON is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"invalid model: {exc}") from None
    raise FormatError(f"unknown model kind {kind!r}")


def model_to_dict(model):
    if isinstance(model, PlainK):
        return {"p": model.p, "kind": "plain_k", "k": model.k}
    if isinstance(model, DisjointGroups):
        return {"p": model.p, "kind": "disjoint_groups",
                "groups": [list(c) for c in model.cells], "g": model.g}
    if isinstance(model, ExplicitFamily):
        return {"p": model.p, "kind": "explicit", "supports": [list(s) for s in model.supports]}
    raise TypeError(f"unsupported model type {type(model).__name__}")


def load_model(path):
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(d)


def format_float(v) -> str:
    # shortest round-tripping representation
    return repr(float(v))


def dataset_to_csv(dataset) -> str:
    lines = [",".join(["y"] + [f"x{j}" for j in range(dataset.p)])]
    for yi, xi in zip(dataset.y, dataset.x):
        lines.append(",".join([format_float(yi)] + [format_float(v) for v in xi]))
    return "\n".join(lines) + "\n"


def load_dataset(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty dataset file")
    header = [h.strip() for h in rows[0]]
    p = len(header) - 1
    if p < 1 or header != ["y"] + [f"x{j}" for j in range(p)]:
        raise FormatError(f"{path}: header must be y,x0,...,x{{p-1}}")
    body = [r for r in rows[1:] if r]
    try:
        arr = np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry ({exc})") from None
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] != p + 1:
        raise FormatError(f"{path}: every row needs {p + 1} values")
    try:
        return Dataset(arr[:, 1:], arr[:, 0])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def vector_to_csv(v) -> str:
    return "".join(format_float(x) + "\n" for x in np.asarray(v, dtype=np.float64))


def load_vector(path):
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not values:
        raise FormatError(f"{path}: empty vector file")
    return np.array(values)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def file_digest(path) -> str:
    return sha256_hex(Path(path).read_bytes())


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return sha256_hex(blob)


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
