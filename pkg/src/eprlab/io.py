"""Readers and writers for the on-disk formats.

Event streams and coincidence lists are tab-separated with one ``#`` header
line naming the columns. Times are integer nanoseconds and angles integer
millidegrees so files are bit-exact across platforms. Curves are CSV, summaries
JSON.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .bell import CorrelationCurve, from_mdeg, to_mdeg
from .coincidence import CoincidenceSet
from .errors import InvalidInputError
from .montecarlo import DetectionStream

EVENT_COLUMNS = ("station_id", "timestamp_ns", "setting_mdeg", "outcome", "pair_id")
COINCIDENCE_COLUMNS = ("t1_ns", "t2_ns", "setting1_mdeg", "setting2_mdeg", "outcome1", "outcome2",
                       "true_pair_flag")
CURVE_COLUMNS = ("delta_mdeg", "value", "error")


def _ns(t: np.ndarray) -> np.ndarray:
    return np.rint(np.asarray(t, dtype=float) * 1e9).astype(np.int64)


def _mdeg(a: np.ndarray) -> np.ndarray:
    return np.mod(np.rint(np.degrees(np.asarray(a, dtype=float)) * 1000.0).astype(np.int64), 180000)


def _read_header(fh, expected: tuple[str, ...], path) -> list[str]:
    line = fh.readline()
    if not line.startswith("#"):
        raise InvalidInputError(f"{path}: missing '#' header line")
    cols = line[1:].strip().split("\t")
    if tuple(cols) != expected[:len(cols)] or len(cols) < len(expected) - 1:
        raise InvalidInputError(f"{path}: unexpected columns {cols}; expected {list(expected)}")
    return cols


def write_events(path, stream: DetectionStream) -> Path:
    """Write one station stream. The ``pair_id`` column is present only for tagged streams."""
    path = Path(path)
    cols = EVENT_COLUMNS if stream.tagged else EVENT_COLUMNS[:-1]
    ns, md, out = _ns(stream.timestamp), _mdeg(stream.setting), stream.outcome
    with open(path, "w", newline="\n") as fh:
        fh.write("#" + "\t".join(cols) + "\n")
        sid = str(stream.station_id)
        if stream.tagged:
            for t, m, o, p in zip(ns.tolist(), md.tolist(), out.tolist(), stream.pair_id.tolist()):
                fh.write(f"{sid}\t{t}\t{m}\t{o}\t{p}\n")
        else:
            for t, m, o in zip(ns.tolist(), md.tolist(), out.tolist()):
                fh.write(f"{sid}\t{t}\t{m}\t{o}\n")
    return path


def read_events(path) -> DetectionStream:
    path = Path(path)
    with open(path) as fh:
        cols = _read_header(fh, EVENT_COLUMNS, path)
        rows = [line.rstrip("\n").split("\t") for line in fh if line.strip()]
    tagged = len(cols) == len(EVENT_COLUMNS)
    try:
        data = np.array(rows, dtype=np.int64).reshape(-1, len(cols))
    except ValueError as exc:
        raise InvalidInputError(f"{path}: malformed event row ({exc})") from None
    sids = set(data[:, 0].tolist())
    if len(sids) > 1:
        raise InvalidInputError(f"{path}: mixed station ids {sorted(sids)}")
    if not set(data[:, 3].tolist()) <= {1, -1}:
        raise InvalidInputError(f"{path}: outcomes must be +1 or -1")
    sid = sids.pop() if sids else 1
    return DetectionStream(int(sid), data[:, 1] * 1e-9,
                           np.radians(data[:, 2] / 1000.0),
                           data[:, 3].astype(np.int8),
                           data[:, 4].copy() if tagged else None)


def write_coincidences(path, pairs: CoincidenceSet) -> Path:
    path = Path(path)
    if pairs.is_true_pair is None:
        flag = np.full(len(pairs), -1, dtype=np.int64)
    else:
        flag = pairs.is_true_pair.astype(np.int64)
    cols = (_ns(pairs.t1), _ns(pairs.t2), _mdeg(pairs.setting1), _mdeg(pairs.setting2),
            pairs.outcome1.astype(np.int64), pairs.outcome2.astype(np.int64), flag)
    with open(path, "w", newline="\n") as fh:
        fh.write("#" + "\t".join(COINCIDENCE_COLUMNS) + "\n")
        for row in zip(*(c.tolist() for c in cols)):
            fh.write("\t".join(map(str, row)) + "\n")
    return path


def read_coincidences(path) -> CoincidenceSet:
    path = Path(path)
    with open(path) as fh:
        _read_header(fh, COINCIDENCE_COLUMNS, path)
        rows = [line.rstrip("\n").split("\t") for line in fh if line.strip()]
    try:
        d = np.array(rows, dtype=np.int64).reshape(-1, len(COINCIDENCE_COLUMNS))
    except ValueError as exc:
        raise InvalidInputError(f"{path}: malformed coincidence row ({exc})") from None
    flags = d[:, 6]
    if len(flags) and np.any(flags == -1):
        if not np.all(flags == -1):
            raise InvalidInputError(f"{path}: true_pair_flag mixes known and unknown values")
        truth = None
    else:
        truth = flags.astype(bool)
    return CoincidenceSet(d[:, 0] * 1e-9, d[:, 1] * 1e-9, np.radians(d[:, 2] / 1000.0),
                          np.radians(d[:, 3] / 1000.0), d[:, 4].astype(np.int8), d[:, 5].astype(np.int8),
                          truth)


def write_curve(path, curve: CorrelationCurve) -> Path:
    """CSV with integer ``delta_mdeg``; a delta of exactly 180 degrees is kept as 180000."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for d, v, e in zip(curve.delta.tolist(), curve.value.tolist(), curve.error.tolist()):
            w.writerow([int(round(math.degrees(d) * 1000.0)), repr(float(v)), repr(float(e))])
    return path


def read_curve(path, label: str | None = None) -> CorrelationCurve:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CURVE_COLUMNS:
        raise InvalidInputError(f"{path}: expected header {','.join(CURVE_COLUMNS)}")
    body = rows[1:]
    return CorrelationCurve(label or path.stem,
                            np.array([math.radians(int(r[0]) / 1000.0) for r in body]),
                            np.array([float(r[1]) for r in body]),
                            np.array([float(r[2]) for r in body]))


def write_json(path, payload) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


__all__ = ["write_events", "read_events", "write_coincidences", "read_coincidences",
           "write_curve", "read_curve", "write_json", "read_json", "to_mdeg", "from_mdeg"]
