"""Append-only journal of readings, commands, alarms, and uplinks.

On disk the journal is NDJSON: one record per line, keys sorted, compact
separators, so identical runs produce byte-identical files.  Each record
carries the simulated time three ways: integer microseconds from run
start (`t_us`), a canonical ISO-8601 timestamp (`iso`), and the
DD-MM-YYYY / HH:MM display pair the gateway console uses.

CSV export flattens each record to one row per scalar value:

    timestamp,node,kind,field,value

rows ordered by (time, node, kind, field, record id), RFC-4180 quoting.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Iterable


class TelemetryError(Exception):
    pass


class InvertedRange(TelemetryError):
    pass


Scalar = int | str | bool


@dataclass(frozen=True)
class TelemetryRecord:
    record_id: int
    t_us: int
    iso: str
    date: str
    clock: str
    node: str
    kind: str
    values: dict[str, Scalar]
    source: str = "sampled"

    def as_dict(self) -> dict[str, Any]:
        return {
            "id": self.record_id,
            "t_us": self.t_us,
            "iso": self.iso,
            "date": self.date,
            "clock": self.clock,
            "node": self.node,
            "kind": self.kind,
            "values": self.values,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "TelemetryRecord":
        return cls(
            record_id=raw["id"],
            t_us=raw["t_us"],
            iso=raw["iso"],
            date=raw["date"],
            clock=raw["clock"],
            node=raw["node"],
            kind=raw["kind"],
            values=raw["values"],
            source=raw.get("source", "sampled"),
        )


def _encode_line(record: TelemetryRecord) -> str:
    return json.dumps(record.as_dict(), sort_keys=True, separators=(",", ":")) + "\n"


class TelemetryStore:
    """Single-writer journal with range queries and CSV export.

    `origin` is the wall-clock datetime corresponding to t_us = 0.  When a
    journal is reopened the origin is recovered from the first record, so
    the file is self-contained.
    """

    def __init__(self, origin: datetime, path: Path | str | None = None):
        self.origin = origin
        self.path = Path(path) if path is not None else None
        self._records: list[TelemetryRecord] = []
        self._next_id = 1
        self._last_t_per_node: dict[str, int] = {}
        self._fh: io.TextIOBase | None = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "a", encoding="utf-8")

    @classmethod
    def open(cls, path: Path | str) -> "TelemetryStore":
        """Reopen an existing journal, preserving ids and ordering."""
        path = Path(path)
        records = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(TelemetryRecord.from_dict(json.loads(line)))
        if records:
            first = records[0]
            origin = datetime.fromisoformat(first.iso) - timedelta(microseconds=first.t_us)
        else:
            origin = datetime(1970, 1, 1)
        store = cls(origin, path)
        store._records = records
        store._next_id = records[-1].record_id + 1 if records else 1
        for rec in records:
            prev = store._last_t_per_node.get(rec.node, 0)
            store._last_t_per_node[rec.node] = max(prev, rec.t_us)
        return store

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "TelemetryStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def wall_time(self, t_us: int) -> datetime:
        return self.origin + timedelta(microseconds=t_us)

    def to_t_us(self, moment: datetime) -> int:
        delta = moment - self.origin
        return round(delta.total_seconds() * 1_000_000)

    def append(
        self,
        t_us: int,
        node: str,
        kind: str,
        values: dict[str, Scalar],
        source: str = "sampled",
    ) -> TelemetryRecord:
        """Durably append one record; ids are strictly increasing."""
        last = self._last_t_per_node.get(node)
        if last is not None and t_us < last:
            raise TelemetryError(
                f"records for {node} must be time-ordered: {t_us} < {last}"
            )
        wall = self.wall_time(t_us)
        record = TelemetryRecord(
            record_id=self._next_id,
            t_us=t_us,
            iso=wall.isoformat(),
            date=wall.strftime("%d-%m-%Y"),
            clock=wall.strftime("%H:%M"),
            node=node,
            kind=kind,
            values=dict(values),
            source=source,
        )
        if self._fh is not None:
            self._fh.write(_encode_line(record))
            self._fh.flush()
        self._records.append(record)
        self._last_t_per_node[node] = t_us
        self._next_id += 1
        return record

    def records(self) -> list[TelemetryRecord]:
        return list(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def query_range(
        self,
        node: str | None = None,
        from_us: int | None = None,
        to_us: int | None = None,
        kind: str | None = None,
    ) -> list[TelemetryRecord]:
        """Records with from <= t <= to, ascending in time (stable by id)."""
        if from_us is not None and to_us is not None and from_us > to_us:
            raise InvertedRange(f"range is inverted: {from_us} > {to_us}")
        out = [
            r
            for r in self._records
            if (node is None or r.node == node)
            and (kind is None or r.kind == kind)
            and (from_us is None or r.t_us >= from_us)
            and (to_us is None or r.t_us <= to_us)
        ]
        out.sort(key=lambda r: (r.t_us, r.record_id))
        return out

    def export_csv(
        self,
        nodes: Iterable[str] | None = None,
        from_us: int | None = None,
        to_us: int | None = None,
    ) -> str:
        """Flatten records to CSV text; same contents in, same bytes out."""
        node_set = set(nodes) if nodes is not None else None
        rows: list[tuple[int, str, str, str, int, Scalar]] = []
        for record in self.query_range(from_us=from_us, to_us=to_us):
            if node_set is not None and record.node not in node_set:
                continue
            for field_name, value in record.values.items():
                rows.append(
                    (
                        record.t_us,
                        record.node,
                        record.kind,
                        field_name,
                        record.record_id,
                        value,
                    )
                )
        rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4]))

        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["timestamp", "node", "kind", "field", "value"])
        for t_us, node, kind, field_name, _rec_id, value in rows:
            writer.writerow(
                [self.wall_time(t_us).isoformat(), node, kind, field_name, _csv_value(value)]
            )
        return buf.getvalue()


def _csv_value(value: Scalar) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)
