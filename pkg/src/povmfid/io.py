"""POVM JSON documents (schema ``povm/1``) and deterministic CSV output."""
from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidPovm
from .povm import Povm, check_povm

__all__ = [
    "SCHEMA_VERSION",
    "povm_to_document",
    "povm_from_document",
    "load_povm",
    "dump_povm",
    "format_real",
    "write_csv",
    "read_csv",
]

SCHEMA_VERSION = "povm/1"


def format_real(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return f"{float(x):.17g}"


def povm_to_document(p: Povm) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": p.dim,
        "elements": [[[[float(z.real), float(z.imag)] for z in row] for row in E] for E in p.elements],
        "labels": list(p.labels),
    }


def _fail(where: str, msg: str):
    raise InvalidPovm(f"{where}: {msg}")


def _parse_entry(v, where: str) -> complex:
    if not (isinstance(v, list) and len(v) == 2):
        _fail(where, "expected a [re, im] pair")
    re, im = v
    for part, name in ((re, "re"), (im, "im")):
        if isinstance(part, bool) or not isinstance(part, (int, float)):
            _fail(where, f"{name} part is not a number")
        if not math.isfinite(part):
            _fail(where, f"{name} part is not finite")
    return complex(re, im)


def povm_from_document(doc, *, validate: bool = True) -> Povm:
    """Parse a ``povm/1`` document, with a field path in every error message."""
    if not isinstance(doc, dict):
        _fail("$", "document must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        _fail("$.schema_version", f"expected {SCHEMA_VERSION!r}, got {doc.get('schema_version')!r}")
    d = doc.get("dim")
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        _fail("$.dim", "must be a positive integer")
    elements = doc.get("elements")
    if not isinstance(elements, list) or not elements:
        _fail("$.elements", "must be a non-empty list")
    mats = []
    for n, E in enumerate(elements):
        where = f"$.elements[{n}]"
        if not isinstance(E, list) or len(E) != d:
            _fail(where, f"expected {d} rows")
        M = np.empty((d, d), dtype=complex)
        for r, row in enumerate(E):
            if not isinstance(row, list) or len(row) != d:
                _fail(f"{where}[{r}]", f"expected {d} entries")
            for c, v in enumerate(row):
                M[r, c] = _parse_entry(v, f"{where}[{r}][{c}]")
        mats.append(M)
    labels = doc.get("labels")
    if labels is not None:
        if not (isinstance(labels, list) and len(labels) == len(mats) and all(isinstance(s, str) for s in labels)):
            _fail("$.labels", "must be a list of strings, one per element")
    p = Povm(mats, labels, drop_zero=False)
    if validate:
        check_povm(p)
    return p


def _reject_constant(name: str):
    raise InvalidPovm(f"non-finite number {name} is not permitted")


def load_povm(path, *, validate: bool = True) -> Povm:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidPovm(f"{path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InvalidPovm(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except InvalidPovm as exc:
        raise InvalidPovm(f"{path}: {exc}") from exc
    try:
        return povm_from_document(doc, validate=validate)
    except InvalidPovm as exc:
        raise InvalidPovm(f"{path}: {exc}") from exc


def dump_povm(p: Povm, path=None) -> str:
    text = json.dumps(povm_to_document(p), allow_nan=False, indent=1) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def write_csv(header: Sequence[str], rows: Iterable[Sequence[float]], path=None) -> str:
    """Comma-separated, header row, LF endings, 17 significant digits."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else format_real(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in row] for row in r]
    return header, np.array(data, dtype=float).reshape(-1, len(header))
