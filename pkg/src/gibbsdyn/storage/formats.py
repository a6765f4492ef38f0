"""Plain-text artifact formats.

Snapshot files hold records separated by blank lines; each record is a
header `d L N seed sweepIndex` followed by N coordinate lines. Event logs
hold one `t kind xIndex yCoords...` line per event. Series are JSON lines
`{"t": ..., "name": ..., "value": ...}`. Lines starting with `#` are
provenance comments and are skipped when reading.
"""
import json
from typing import Iterable, Iterator, List, Optional, TextIO, Tuple

import numpy as np
import pandas as pd

from ..geometry import TorusBox
from ..models import Event, Snapshot
from .models import Provenance
from .writer import BatchWriter


def _num(value: float) -> str:
    return repr(float(value))


def format_snapshot(snapshot: Snapshot, box: TorusBox) -> str:
    points = np.asarray(snapshot.points, dtype=float).reshape(-1, box.dim)
    lines = [f"{box.dim} {_num(box.side)} {len(points)} {snapshot.seed} {snapshot.sweep}"]
    lines += [" ".join(_num(c) for c in p) for p in points]
    return "\n".join(lines) + "\n\n"


def write_snapshots(stream: TextIO, snapshots: Iterable[Snapshot], box: TorusBox,
                    provenance: Optional[Provenance] = None, batch_size: int = 100) -> int:
    """Write snapshot records; returns the number written."""
    if provenance is not None:
        stream.write(provenance.header() + "\n")
    with BatchWriter(stream, batch_size, lambda snap: format_snapshot(snap, box)) as writer:
        for snap in snapshots:
            writer.add(snap)
    return writer.written


def _records(stream: TextIO) -> Iterator[List[str]]:
    block: List[str] = []
    for raw in stream:
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            if block:
                yield block
                block = []
            continue
        block.append(line)
    if block:
        yield block


def read_snapshots(stream: TextIO) -> Tuple[Optional[TorusBox], List[Snapshot]]:
    """Parse every record; the box comes from the first header.

    Raises:
        ValueError: malformed header, wrong coordinate count or mixed boxes
    """
    box = None
    snapshots = []
    for block in _records(stream):
        head = block[0].split()
        if len(head) != 5:
            raise ValueError(f"bad snapshot header {block[0]!r}")
        dim, side, n, seed, sweep = int(head[0]), float(head[1]), int(head[2]), int(head[3]), int(head[4])
        if box is None:
            box = TorusBox(dim, side)
        elif (box.dim, box.side) != (dim, side):
            raise ValueError("snapshot file mixes boxes")
        if len(block) - 1 != n:
            raise ValueError(f"header announces {n} points, found {len(block) - 1}")
        points = np.array([[float(c) for c in line.split()] for line in block[1:]], dtype=float)
        snapshots.append(Snapshot(points.reshape(n, dim), sweep=sweep, seed=seed))
    return box, snapshots


def format_event(event: Event) -> str:
    index = "-" if event.index is None else str(event.index)
    coords = [] if event.location is None else [_num(c) for c in np.atleast_1d(event.location)]
    return " ".join([_num(event.time), event.kind, index] + coords) + "\n"


def parse_event(line: str) -> Event:
    parts = line.split()
    index = None if parts[2] == "-" else int(parts[2])
    location = np.array([float(c) for c in parts[3:]]) if len(parts) > 3 else None
    return Event(float(parts[0]), parts[1], index, location)


def read_events(stream: TextIO) -> List[Event]:
    return [parse_event(line) for line in stream if line.strip() and not line.startswith("#")]


def event_writer(stream: TextIO, provenance: Optional[Provenance] = None,
                 batch_size: int = 1000) -> BatchWriter:
    """BatchWriter usable as an engine event sink."""
    if provenance is not None:
        stream.write(provenance.header() + "\n")
    return BatchWriter(stream, batch_size, format_event)


def series_records(frame: pd.DataFrame) -> List[dict]:
    """Long-format records {t, name, value} from an engine run table."""
    names = [c for c in frame.columns if c != "t"]
    return [
        {"t": float(t), "name": name, "value": float(row[name])}
        for t, (_, row) in zip(frame["t"], frame.iterrows())
        for name in names
    ]


def write_series(stream: TextIO, frame: pd.DataFrame, provenance: Optional[Provenance] = None) -> int:
    """JSON-lines series; the first line carries the provenance object when given."""
    if provenance is not None:
        stream.write(json.dumps({"provenance": provenance.to_dict()}, sort_keys=True) + "\n")
    with BatchWriter(stream, 1000, lambda rec: json.dumps(rec, sort_keys=True) + "\n") as writer:
        for record in series_records(frame):
            writer.add(record)
    return writer.written


def read_series(stream: TextIO) -> pd.DataFrame:
    rows = [json.loads(line) for line in stream if line.strip()]
    return pd.DataFrame([r for r in rows if "provenance" not in r], columns=["t", "name", "value"])


def write_csv(stream: TextIO, frame: pd.DataFrame, provenance: Optional[Provenance] = None):
    if provenance is not None:
        stream.write(provenance.header() + "\n")
    frame.to_csv(stream, index=False)


def read_csv(stream: TextIO) -> pd.DataFrame:
    return pd.read_csv(stream, comment="#")
