"""Local ThingSpeak-compatible channel: update ingestion and feed storage.

The public channel-update convention is a plain GET with api_key and
field1..field8 query parameters; the response body is the new entry id as
text, or "0" when the update is rejected.  This emulator reproduces that
contract so the gateway uplink can run against it unchanged, locally or
over real HTTP.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from urllib.parse import parse_qsl, urlsplit

import httpx

from .gateway import TransportError

FIELD_NAMES = tuple(f"field{i}" for i in range(1, 9))


@dataclass
class IngestEntry:
    entry_id: int
    created_at: str
    fields: dict[str, str]

    def as_dict(self) -> dict:
        return {"entry_id": self.entry_id, "created_at": self.created_at, **self.fields}


@dataclass
class IngestStore:
    """Entry ids increase strictly and never repeat within a run."""

    api_key: str
    entries: list[IngestEntry] = field(default_factory=list)
    rejected: int = 0
    _next_id: int = 1

    def ingest(self, api_key: str, params: dict[str, str], created_at: str) -> int:
        """Store one update; returns the entry id, or 0 on a bad key."""
        if not self.api_key or api_key != self.api_key:
            self.rejected += 1
            return 0
        fields = {k: v for k, v in params.items() if k in FIELD_NAMES}
        entry = IngestEntry(entry_id=self._next_id, created_at=created_at, fields=fields)
        self.entries.append(entry)
        self._next_id += 1
        return entry.entry_id

    def feeds(self) -> list[dict]:
        return [e.as_dict() for e in self.entries]


class LoopbackTransport:
    """Uplink transport that feeds the in-process ingest store directly.

    Used in fast runs and whenever no upstream URL is configured, so a
    complete simulation never needs a network.
    """

    def __init__(self, store: IngestStore, clock_iso):
        self._store = store
        self._clock_iso = clock_iso

    def send(self, url: str) -> tuple[int, str]:
        query = dict(parse_qsl(urlsplit(url).query))
        api_key = query.pop("api_key", "")
        entry_id = self._store.ingest(api_key, query, self._clock_iso())
        return 200, str(entry_id)


class HttpTransport:
    """Uplink transport for a real endpoint (the service's own /update or
    an actual cloud channel)."""

    def __init__(self, timeout_s: float = 5.0):
        self._timeout_s = timeout_s

    def send(self, url: str) -> tuple[int, str]:
        try:
            response = httpx.get(url, timeout=self._timeout_s)
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        return response.status_code, response.text
