"""On-disk formats: run archives (JSON), curve tables (CSV), verification reports.

Floats are written with Python's shortest round-trip repr, so every value
reloads bit for bit.  All writes go through a temporary file in the target
directory followed by an atomic rename.
"""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cascade import CascadeRun, ModelParams, SplinterRecord
from .hypgeo import Isometry

__all__ = [
    "FORMAT_VERSION", "ArchiveVersionError", "RunArchive", "write_atomic",
    "created_stamp", "run_to_dict", "run_from_dict", "archive_to_json",
    "archive_from_json", "save_archive", "load_archive", "curve_csv",
    "write_curve_csv", "read_curve_csv", "write_json",
]

FORMAT_VERSION = 1


class ArchiveVersionError(ValueError):
    """Archive written by an incompatible format version."""


@dataclass(frozen=True)
class RunArchive:
    params: ModelParams
    runs: tuple[CascadeRun, ...]
    created: str
    format_version: int = FORMAT_VERSION


def write_atomic(path, text: str) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        # mkstemp creates 0600; give the file the usual umask-derived mode
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def created_stamp(mode: str = "fixed") -> str:
    """UTC timestamp for archives.

    ``"fixed"`` reads SOURCE_DATE_EPOCH (default 0) so repeated runs are
    byte-identical; ``"now"`` uses the wall clock.
    """
    if mode == "now":
        when = _dt.datetime.now(_dt.timezone.utc)
    elif mode == "fixed":
        when = _dt.datetime.fromtimestamp(int(os.environ.get("SOURCE_DATE_EPOCH", "0")), _dt.timezone.utc)
    else:
        raise ValueError("timestamp mode must be 'fixed' or 'now'")
    return when.replace(microsecond=0).isoformat().replace("+00:00", "Z")


def _frame(f):
    return None if f is None else [f.a, f.b, f.c, f.d]


def _unframe(v):
    return None if v is None else Isometry(*v)


def _num(v: float):
    # JSON has no infinity; overflowed cosh values are stored as null
    return v if math.isfinite(v) else None


def _unnum(v) -> float:
    return math.inf if v is None else float(v)


def run_to_dict(run: CascadeRun, index: int) -> dict:
    return {
        "replication": index,
        "events": list(run.events),
        "cosh_eta_cm": _num(run.cosh_eta_cm),
        "log_cosh_eta_cm": run.log_cosh_eta_cm,
        "turn_frames": [_frame(f) for f in run.turn_frames],
        "splinters": [
            {"k": s.k, "mass": s.mass, "birth_time": s.birth_time, "cosh_eta": _num(s.cosh_eta),
             "log_cosh_eta": s.log_cosh_eta, "frame": _frame(s.frame)}
            for s in run.splinters
        ],
    }


def run_from_dict(d: dict, params: ModelParams) -> CascadeRun:
    splinters = tuple(
        SplinterRecord(k=int(s["k"]), mass=float(s["mass"]), birth_time=float(s["birth_time"]),
                       cosh_eta=_unnum(s["cosh_eta"]), log_cosh_eta=float(s["log_cosh_eta"]),
                       frame=_unframe(s["frame"]))
        for s in d["splinters"]
    )
    return CascadeRun(
        params=params, events=tuple(float(v) for v in d["events"]), splinters=splinters,
        cosh_eta_cm=_unnum(d["cosh_eta_cm"]), log_cosh_eta_cm=float(d["log_cosh_eta_cm"]),
        turn_frames=tuple(Isometry(*f) for f in d.get("turn_frames", [])),
    )


def archive_to_json(archive: RunArchive, start: int = 0) -> str:
    doc = {
        "format_version": archive.format_version,
        "created": archive.created,
        "params": archive.params.to_dict(),
        "runs": [run_to_dict(r, start + i) for i, r in enumerate(archive.runs)],
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def archive_from_json(text: str) -> RunArchive:
    doc = json.loads(text)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ArchiveVersionError(f"archive format_version {version!r}, expected {FORMAT_VERSION}")
    params = ModelParams.from_dict(doc["params"])
    runs = tuple(run_from_dict(r, params) for r in doc["runs"])
    return RunArchive(params, runs, doc["created"], version)


def save_archive(path, archive: RunArchive) -> None:
    write_atomic(path, archive_to_json(archive))


def load_archive(path) -> RunArchive:
    return archive_from_json(Path(path).read_text(encoding="utf-8"))


def curve_csv(columns, rows, comments=()) -> str:
    """CSV text: ``# key: value`` comment lines, a header row, then repr floats."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_curve_csv(path, columns, rows, comments=()) -> None:
    write_atomic(path, curve_csv(columns, rows, comments))


def read_curve_csv(path) -> tuple[list[str], list[str], np.ndarray]:
    """Return ``(comments, columns, data)``."""
    comments, body = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            comments.append(line[1:].strip())
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    return comments, rows[0], data.reshape(-1, len(rows[0]))


def write_json(path, doc: dict) -> None:
    write_atomic(path, json.dumps(doc, indent=1) + "\n")
