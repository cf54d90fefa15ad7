"""JSON / CSV / DIMACS emission for CLI artifacts.

Primary outputs are deterministic: no timestamps, floats rendered with the
shortest repr that round-trips the double, exact rationals mirrored as
"p/q" strings. Run metadata (timestamp, argv) goes to `<out>.meta.json`.
"""
from __future__ import annotations
import csv
import io
import json
import math
import sys
from datetime import datetime
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pytz

from ..config import SCHEMA


def exact(x: Fraction) -> Dict[str, Any]:
    return {"value": float(x), "exact": "%d/%d" % (x.numerator, x.denominator)}


def jsonable(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return exact(obj)
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return [jsonable(v) for v in sorted(obj)]
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise TypeError("cannot serialize %r" % type(obj).__name__)


def dumps(payload: Dict[str, Any]) -> str:
    body = {"schema": SCHEMA}
    body.update(jsonable(payload))
    return json.dumps(body, indent=2, allow_nan=False) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_text(path: Optional[str], text: str, *, meta: Optional[Dict[str, Any]] = None) -> None:
    if not path or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    if meta is not None:
        side = dict(meta)
        side["generated_at"] = datetime.now(pytz.UTC).isoformat()
        with open(path + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(jsonable(side), fh, indent=2)
            fh.write("\n")


def write_json(path: Optional[str], payload: Dict[str, Any], *, meta: Optional[Dict[str, Any]] = None) -> None:
    write_text(path, dumps(payload), meta=meta)


def write_csv(path: Optional[str], header: Sequence[str], rows: List[Sequence[Any]], *,
              meta: Optional[Dict[str, Any]] = None) -> None:
    write_text(path, csv_text(header, rows), meta=meta)
