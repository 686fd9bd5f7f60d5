"""JSON encoding/decoding helpers shared by the library and the command line.

Conventions (format version 1):

* every top-level document carries ``"format": 1``;
* complex scalars are encoded as two-element arrays ``[re, im]``;
* matrices are nested lists of ``[re, im]`` pairs (row major);
* floats are written exactly (shortest round-trip representation, at most
  17 significant digits), so identical inputs produce identical bytes.
"""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .errors import InputError

FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------

def encode_complex(z: complex) -> list[float]:
    """Encode one complex scalar as ``[re, im]``."""
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_vector(v) -> list[list[float]]:
    """Encode a 1-d array of complex numbers."""
    return [encode_complex(z) for z in np.asarray(v).ravel()]


def encode_matrix(m) -> list[list[list[float]]]:
    """Encode a 2-d array of complex numbers (row major)."""
    a = np.asarray(m)
    if a.ndim != 2:
        raise InputError(f"expected a matrix, got array of shape {a.shape}")
    return [[encode_complex(z) for z in row] for row in a]


def dumps(payload: dict[str, Any]) -> str:
    """Serialize ``payload`` with the format tag, deterministically."""
    doc = {"format": FORMAT_VERSION}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def dump(path: str, payload: dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(payload))


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------

def decode_complex(obj) -> complex:
    """Decode ``[re, im]`` (or a bare real number) into a complex scalar."""
    if isinstance(obj, (int, float)):
        return complex(obj)
    if (
        isinstance(obj, (list, tuple))
        and len(obj) == 2
        and all(isinstance(x, (int, float)) for x in obj)
    ):
        return complex(obj[0], obj[1])
    raise InputError(f"expected [re, im], got {obj!r}")


def decode_vector(obj) -> np.ndarray:
    if not isinstance(obj, list):
        raise InputError(f"expected a list of [re, im] pairs, got {obj!r}")
    return np.array([decode_complex(x) for x in obj], dtype=complex)


def decode_matrix(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise InputError(f"expected a nested list encoding a matrix, got {obj!r}")
    rows = [[decode_complex(x) for x in row] for row in obj]
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise InputError("matrix rows have inconsistent lengths")
    return np.array(rows, dtype=complex)


def loads(text: str) -> dict[str, Any]:
    """Parse a format-1 document, checking the version tag."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("top-level JSON value must be an object")
    version = doc.get("format")
    if version != FORMAT_VERSION:
        raise InputError(f"unsupported format version {version!r}")
    return doc


def load(path: str) -> dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def require(doc: dict[str, Any], key: str):
    if key not in doc:
        raise InputError(f"missing required key {key!r}")
    return doc[key]
