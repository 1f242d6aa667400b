"""Trip records to daily graph snapshots.

Input rows: origin station, destination station, start timestamp (ISO 8601),
duration in seconds.  For every calendar day that has trips, trips are
counted per unordered station pair (both directions summed).  A pair is
linked on that day when

* its shortest trip that day lasted at least ``min_duration`` seconds, and
* its trip count is strictly above the ``level`` nearest-rank quantile of
  the counts of all pairs with at least one trip that day.

The node set is the union of every station seen, fixed across days.
Round trips (origin equals destination) are dropped.
"""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import ValidationError
from .graph_core import DynamicNetwork, empirical_quantile

log = logging.getLogger(__name__)

_HEADER_NAMES = {
    "origin": ("origin", "start station id", "startstation id", "from", "source"),
    "destination": ("destination", "end station id", "endstation id", "to", "target"),
    "start": ("start", "start date", "start_time", "starttime", "timestamp"),
    "duration": ("duration", "duration_s", "duration seconds", "seconds"),
}


@dataclass(frozen=True)
class IngestionSpec:
    path: str
    min_duration: float = 180.0
    level: float = 0.9975

    def __post_init__(self):
        if not 0 < self.level < 1:
            raise ValidationError(f"quantile level must lie in (0, 1), got {self.level}")
        if self.min_duration < 0:
            raise ValidationError("min_duration must be non-negative")


def _station_key(label: str):
    return (0, int(label), label) if label.lstrip("-").isdigit() else (1, 0, label)


def _column_map(header):
    lowered = [h.strip().lower() for h in header]
    cols = {}
    for key, names in _HEADER_NAMES.items():
        for i, h in enumerate(lowered):
            if h in names:
                cols[key] = i
                break
    return cols if len(cols) == 4 else None


def _read_trips(path):
    trips = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        cols = {"origin": 0, "destination": 1, "start": 2, "duration": 3}
        for lineno, row in enumerate(reader, 1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1:
                header_cols = _column_map(row)
                if header_cols is not None:
                    cols = header_cols
                    continue
            try:
                origin = row[cols["origin"]].strip()
                dest = row[cols["destination"]].strip()
                day = datetime.fromisoformat(row[cols["start"]].strip()).date()
                duration = float(row[cols["duration"]])
                if not origin or not dest or not duration >= 0:
                    raise ValueError("empty station or negative duration")
            except (IndexError, ValueError) as exc:
                log.warning("%s:%d: skipping malformed row (%s)", path, lineno, exc)
                continue
            trips.append((origin, dest, day, duration))
    return trips


def ingest_edge_list(spec: IngestionSpec) -> DynamicNetwork:
    trips = _read_trips(spec.path)
    if not trips:
        raise ValidationError(f"{spec.path}: no usable trips")

    stations = sorted({t[0] for t in trips} | {t[1] for t in trips}, key=_station_key)
    index = {s: i for i, s in enumerate(stations)}
    counts = defaultdict(lambda: defaultdict(int))
    shortest = defaultdict(dict)
    for origin, dest, day, duration in trips:
        if origin == dest:
            continue
        i, j = sorted((index[origin], index[dest]))
        counts[day][(i, j)] += 1
        prev = shortest[day].get((i, j))
        shortest[day][(i, j)] = duration if prev is None else min(prev, duration)

    days = sorted(counts)
    if not days:
        raise ValidationError(f"{spec.path}: no day with trips between distinct stations")
    n = len(stations)
    data = np.zeros((len(days), n, n), dtype=np.uint8)
    for k, day in enumerate(days):
        pair_counts = counts[day]
        cutoff = empirical_quantile(list(pair_counts.values()), spec.level)
        for (i, j), c in pair_counts.items():
            if c > cutoff and shortest[day][(i, j)] >= spec.min_duration:
                data[k, i, j] = data[k, j, i] = 1
    return DynamicNetwork(data, labels=stations, times=[d.isoformat() for d in days])
