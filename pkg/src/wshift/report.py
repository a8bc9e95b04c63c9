"""Deterministic rendering of report values to JSON and CSV."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any, Iterable, List, Mapping, Sequence

import numpy as np

from .magnitude import log2_fraction

SCHEMA_VERSION = "1.0"
DECIMAL_DIGITS = 20


# rationals whose numerator or denominator exceed this many bits are reported by digest
EXACT_BITS_LIMIT = 12000


def frac_str(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def is_large(q: Fraction) -> bool:
    return max(abs(q.numerator).bit_length(), q.denominator.bit_length()) > EXACT_BITS_LIMIT


def exact_digest(q: Fraction) -> str:
    """Deterministic fingerprint of an exact rational of any size."""
    q = Fraction(q)
    text = f"{q.numerator:x}/{q.denominator:x}"
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


def decimal_str(q: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    """Round ``q`` to ``digits`` significant decimal digits (correctly rounded, any size)."""
    q = Fraction(q)
    if q == 0:
        return "0"
    if not is_large(q):
        with localcontext() as ctx:
            ctx.prec = digits
            return str(Decimal(q.numerator) / Decimal(q.denominator))
    # pick k so that |q| * 10^k has `digits` integer digits, then round exactly
    k = digits - 1 - math.floor(log2_fraction(abs(q)) * math.log10(2))
    for _ in range(3):
        scaled = q * (Fraction(10) ** k)
        m = round(scaled)
        if abs(m) >= 10 ** digits:
            k -= 1
        elif abs(m) < 10 ** (digits - 1):
            k += 1
        else:
            break
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(m).scaleb(-k))


def num(x: Any) -> Any:
    """Report encoding for a number.

    Exact values become ``{"exact": "p/q", "decimal": ..., "precision": "20sig"}``;
    floats become ``{"decimal": ..., "precision": "binary64"}``. Plain ints pass
    through unchanged.
    """
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        if is_large(x):
            return {"exact_digest": exact_digest(x), "decimal": decimal_str(x), "precision": f"{DECIMAL_DIGITS}sig"}
        return {"exact": frac_str(x), "decimal": decimal_str(x), "precision": f"{DECIMAL_DIGITS}sig"}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x) or math.isnan(x):
            return {"decimal": str(x), "precision": "binary64"}
        return {"decimal": repr(x), "precision": "binary64"}
    raise TypeError(f"not a report number: {x!r}")


def decode_num(x: Any) -> Any:
    """Inverse of :func:`num` for exactly representable encodings."""
    if not isinstance(x, Mapping):
        return x
    if "exact" in x:
        return Fraction(x["exact"])
    if x.get("precision") == "binary64":
        return float(x["decimal"])
    raise ValueError(f"encoding {x!r} does not carry an exact value")


def plain(obj: Any) -> Any:
    """Recursively convert numbers and containers into JSON-compatible data."""
    if isinstance(obj, Mapping):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (Fraction, float, np.floating, np.integer)):
        return num(obj)
    if hasattr(obj, "to_dict"):
        return plain(obj.to_dict())
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(plain(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def cell(x: Any) -> str:
    """A single CSV cell, using the same strings as the JSON encoding."""
    enc = num(x) if isinstance(x, (Fraction, float, np.floating, np.integer, int)) and not isinstance(x, bool) else x
    if isinstance(enc, dict):
        return enc.get("exact", enc["decimal"])
    return "" if enc is None else str(enc)


def csv_table(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([cell(v) for v in row])
    return buf.getvalue()


def flatten(obj: Any, prefix: str = "") -> List[tuple]:
    """``(path, value)`` pairs of a plain report, for CSV rendering of any report."""
    out: List[tuple] = []
    if isinstance(obj, Mapping):
        if set(obj) <= {"exact", "exact_digest", "decimal", "precision"} and "decimal" in obj:
            out.append((prefix, obj.get("exact", obj["decimal"])))
            return out
        for k in sorted(obj):
            out.extend(flatten(obj[k], f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            out.extend(flatten(v, f"{prefix}[{i}]"))
    else:
        out.append((prefix, obj))
    return out
