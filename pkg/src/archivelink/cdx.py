"""Capture records, CDX lines and Memento link-format TimeMaps."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from email.utils import parsedate_to_datetime
from typing import Iterable, Optional

from .errors import LinkFormatError, MalformedCDXLineError

CDX_FIELDS = 7
_TIMESTAMP = re.compile(r"[0-9]{14}")
_TOKEN = re.compile(r"[^;,\s]*")


def timestamp_datetime(ts: str) -> datetime:
    """Parse a 14-digit CDX timestamp as a UTC datetime; ValueError if invalid."""
    if not isinstance(ts, str) or not _TIMESTAMP.fullmatch(ts):
        raise ValueError(f"timestamp must be 14 ASCII digits, got {ts!r}")
    return datetime.strptime(ts, "%Y%m%d%H%M%S").replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class Capture:
    """One archived snapshot of a URL."""

    timestamp: str
    digest: str
    urlkey: str
    original: str = ""
    mimetype: str = "-"
    statuscode: Optional[int] = None
    length: Optional[int] = None

    def __post_init__(self):
        timestamp_datetime(self.timestamp)
        if not self.digest:
            raise ValueError("capture digest must be nonempty")

    def sort_key(self) -> tuple:
        """Canonical TimeMap order: timestamp, then digest, then the rest."""
        absent = (-1, -1)
        return (self.timestamp, self.digest, self.urlkey, self.original, self.mimetype,
                absent if self.statuscode is None else (0, self.statuscode),
                absent if self.length is None else (0, self.length))

    @property
    def year(self) -> int:
        return int(self.timestamp[:4])

    def to_cdx_line(self) -> str:
        status = "-" if self.statuscode is None else str(self.statuscode)
        length = "-" if self.length is None else str(self.length)
        return " ".join([self.urlkey, self.timestamp, self.original, self.mimetype,
                         status, self.digest, length])

    def brief(self) -> dict:
        return {"timestamp": self.timestamp, "digest": self.digest,
                "urlkey": self.urlkey, "original": self.original}

    @classmethod
    def from_brief(cls, d: dict) -> "Capture":
        return cls(timestamp=d["timestamp"], digest=d["digest"],
                   urlkey=d.get("urlkey", ""), original=d.get("original", ""))


def _optional_int(value: str, what: str, line: str) -> Optional[int]:
    if value == "-":
        return None
    try:
        return int(value)
    except ValueError:
        raise MalformedCDXLineError(f"bad {what} {value!r} in line {line!r}") from None


def parse_cdx_line(line: str) -> Capture:
    """Map ``urlkey timestamp original mimetype statuscode digest length``.

    Extra trailing fields (as in 9- or 11-column CDX) are ignored; ``-``
    marks an absent status code or length.
    """
    parts = line.split()
    if len(parts) < CDX_FIELDS:
        raise MalformedCDXLineError(f"expected {CDX_FIELDS} fields, got {len(parts)}: {line!r}")
    urlkey, ts, original, mimetype, status, digest, length = parts[:CDX_FIELDS]
    try:
        timestamp_datetime(ts)
    except ValueError as exc:
        raise MalformedCDXLineError(f"{exc} in line {line!r}") from None
    if digest == "-":
        raise MalformedCDXLineError(f"missing digest in line {line!r}")
    return Capture(
        timestamp=ts,
        digest=digest,
        urlkey=urlkey,
        original=original,
        mimetype=mimetype,
        statuscode=_optional_int(status, "statuscode", line),
        length=_optional_int(length, "length", line),
    )


def parse_cdx_text(text: str) -> list[Capture]:
    return [parse_cdx_line(line) for line in text.splitlines() if line.strip()]


@dataclass(frozen=True)
class TimeMap:
    """Captures for a set of urlkeys, sorted ascending by timestamp then digest."""

    urlkeys: frozenset[str] = frozenset()
    captures: tuple[Capture, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "urlkeys", frozenset(self.urlkeys))
        object.__setattr__(self, "captures", tuple(sorted(self.captures, key=Capture.sort_key)))
        stray = {c.urlkey for c in self.captures} - self.urlkeys
        if stray:
            raise ValueError(f"captures with urlkeys outside the TimeMap: {sorted(stray)}")

    def __len__(self):
        return len(self.captures)

    def __iter__(self):
        return iter(self.captures)

    def filter_years(self, from_year: Optional[int] = None,
                     to_year: Optional[int] = None) -> "TimeMap":
        keep = [c for c in self.captures
                if (from_year is None or c.year >= from_year)
                and (to_year is None or c.year <= to_year)]
        return TimeMap(self.urlkeys, keep)


def merge_timemaps(timemaps: Iterable[TimeMap]) -> TimeMap:
    """Union of several TimeMaps; identical captures collapse to one."""
    keys: set[str] = set()
    caps: set[Capture] = set()
    for tm in timemaps:
        keys |= tm.urlkeys
        caps.update(tm.captures)
    return TimeMap(frozenset(keys), caps)


# --- Memento link-format (application/link-format) -----------------------

def _split_entries(body: str) -> list[tuple[str, dict[str, str]]]:
    """Tokenize a link-format document into (uri, params) pairs."""
    entries = []
    i, n = 0, len(body)
    while i < n:
        while i < n and (body[i].isspace() or body[i] == ","):
            i += 1
        if i >= n:
            break
        if body[i] != "<":
            raise LinkFormatError(f"expected '<' at offset {i}")
        close = body.find(">", i + 1)
        if close < 0:
            raise LinkFormatError(f"unterminated URI starting at offset {i}")
        uri = body[i + 1:close]
        if "<" in uri:
            raise LinkFormatError(f"unterminated URI starting at offset {i}")
        i = close + 1
        params: dict[str, str] = {}
        while True:
            while i < n and body[i].isspace():
                i += 1
            if i >= n or body[i] == ",":
                break
            if body[i] != ";":
                raise LinkFormatError(f"expected ';' or ',' at offset {i}")
            i += 1
            eq = body.find("=", i)
            if eq < 0:
                raise LinkFormatError(f"parameter without value at offset {i}")
            name = body[i:eq].strip().lower()
            i = eq + 1
            while i < n and body[i].isspace():
                i += 1
            if i < n and body[i] == '"':
                end = body.find('"', i + 1)
                if end < 0:
                    raise LinkFormatError(f"unterminated quoted value at offset {i}")
                value = body[i + 1:end]
                i = end + 1
            else:
                m = _TOKEN.match(body, i)
                value = m.group(0)
                i = m.end()
            params[name] = value
        entries.append((uri, params))
    return entries


def _datetime_to_timestamp(value: str) -> str:
    try:
        dt = parsedate_to_datetime(value)
    except (TypeError, ValueError):
        raise LinkFormatError(f"bad memento datetime {value!r}") from None
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y%m%d%H%M%S")


def parse_timemap_linkformat(body: str, urlkey: str) -> TimeMap:
    """Convert the ``rel="memento"`` entries of a Memento TimeMap to Captures.

    Link-format carries no content digest, so each capture gets the
    synthetic digest ``"TM-" + timestamp``.
    """
    entries = _split_entries(body)
    original = ""
    for uri, params in entries:
        if "original" in params.get("rel", "").split():
            original = uri
            break
    caps = []
    for uri, params in entries:
        if "memento" not in params.get("rel", "").split():
            continue
        if "datetime" not in params:
            raise LinkFormatError(f"memento {uri!r} lacks a datetime")
        ts = _datetime_to_timestamp(params["datetime"])
        caps.append(Capture(timestamp=ts, digest="TM-" + ts, urlkey=urlkey,
                            original=original or uri, mimetype="-"))
    return TimeMap(frozenset({urlkey}), caps)
