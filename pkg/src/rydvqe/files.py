"""Atomic file output and JSON readers for registers, pulses, plans and configs."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence


def atomic_write_text(path, text: str) -> Path:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _default(o):
    import numpy as np

    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_default) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write_text(path, dumps(obj))


def write_jsonl(path, records: Iterable[dict]) -> Path:
    lines = [json.dumps(r, default=_default) for r in records]
    return atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return atomic_write_text(path, buf.getvalue())


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def read_register(path):
    from .register import Register

    return Register.from_dict(read_json(path))


def read_pulse(path, min_segment: float | None = None):
    from .dynamics import MIN_SEGMENT, PulseSequence

    return PulseSequence.from_dict(read_json(path), min_segment or MIN_SEGMENT)


def read_plan(path):
    from .measurement import DerandomizedPlan

    return DerandomizedPlan.from_dict(read_json(path))
