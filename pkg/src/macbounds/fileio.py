"""JSON channel files, CSV emission and atomic output.

Channel file layout::

    {"kind": "classical", "n1": 2, "n2": 2, "m": 3, "w": [[[...m], ...n2], ...n1]}
    {"kind": "quantum", "n1": 2, "n2": 2, "dim": 2,
     "states": [[ d x d matrix of [re, im] pairs ], ...]}

Malformed entries raise :class:`~macbounds.errors.ParseError` naming their
coordinates; well-formed but invalid models raise the model's own error.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile

import numpy as np

from .errors import ParseError
from .model import ClassicalMAC
from .quantum import CqMAC


def _num(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: expected a number, got {v!r}")
    return float(v)


def real_array(v, shape, where: str) -> np.ndarray:
    """Nested lists of numbers with the exact ``shape``."""
    out = np.empty(shape, dtype=float)

    def fill(node, idx):
        depth = len(idx)
        loc = where + "".join(f"[{i}]" for i in idx)
        if depth == len(shape):
            out[tuple(idx)] = _num(node, loc)
            return
        if not isinstance(node, list) or len(node) != shape[depth]:
            got = len(node) if isinstance(node, list) else type(node).__name__
            raise ParseError(f"{loc}: expected a list of length {shape[depth]}, got {got}")
        for i, child in enumerate(node):
            fill(child, idx + [i])

    fill(v, [])
    return out


def complex_array(v, shape, where: str) -> np.ndarray:
    """Nested lists whose leaves are ``[re, im]`` pairs."""
    pairs = real_array(v, tuple(shape) + (2,), where)
    return pairs[..., 0] + 1j * pairs[..., 1]


def complex_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _int_field(doc: dict, key: str) -> int:
    v = doc.get(key)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ParseError(f"{key}: expected a positive integer, got {v!r}")
    return v


def channel_from_dict(doc) -> ClassicalMAC | CqMAC:
    if not isinstance(doc, dict):
        raise ParseError("channel file must be a JSON object")
    kind = doc.get("kind")
    if kind == "classical":
        n1, n2, m = (_int_field(doc, k) for k in ("n1", "n2", "m"))
        return ClassicalMAC(real_array(doc.get("w"), (n1, n2, m), "w"))
    if kind == "quantum":
        n1, n2, d = (_int_field(doc, k) for k in ("n1", "n2", "dim"))
        return CqMAC(complex_array(doc.get("states"), (n1, n2, d, d), "states"))
    raise ParseError(f"kind: expected 'classical' or 'quantum', got {kind!r}")


def channel_to_dict(ch) -> dict:
    if isinstance(ch, ClassicalMAC):
        return {"kind": "classical", "n1": ch.n1, "n2": ch.n2, "m": ch.m, "w": ch.w.tolist()}
    if isinstance(ch, CqMAC):
        return {"kind": "quantum", "n1": ch.n1, "n2": ch.n2, "dim": ch.dim, "states": complex_to_json(ch.states)}
    raise TypeError(f"not a channel: {type(ch).__name__}")


def load_json(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(raw.decode("utf-8")), hashlib.sha256(raw).hexdigest()
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


def load_channel(path: str):
    doc, digest = load_json(path)
    return channel_from_dict(doc), digest


def fmt(x) -> str:
    """17 significant digits; empty for a missing value."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def write_atomic(path: str, text: str):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".macbounds-")
    try:
        with os.fdopen(fd, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
