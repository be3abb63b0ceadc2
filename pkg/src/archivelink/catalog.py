"""Software/publication catalog: JSON-lines loading, validation and indexing.

Two files drive the pipeline. The software file holds one object per line::

    {"id": "sw-001", "name": "SolverX", "aliases": [], "urls": ["http://..."], "publication_ids": ["p-001"]}

and the publications file::

    {"id": "p-001", "title": "...", "abstract": "...", "references": ["..."], "year": 2013, "citations": 42}

Records are validated on load; the resulting :class:`CatalogIndex` is treated
as immutable and keeps input order for deterministic iteration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping
from urllib.parse import urlsplit

from .errors import CatalogParseError, CatalogValidationError, EmptyPublicationsError

MIN_YEAR = 1900
MAX_YEAR = 2100


@dataclass(frozen=True)
class SoftwareRecord:
    id: str
    name: str
    aliases: tuple[str, ...] = ()
    urls: tuple[str, ...] = ()
    publication_ids: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "aliases": list(self.aliases),
            "urls": list(self.urls),
            "publication_ids": list(self.publication_ids),
        }


@dataclass(frozen=True)
class PublicationRecord:
    id: str
    title: str
    abstract: str = ""
    references: tuple[str, ...] = ()
    year: int = 2000
    citations: int = 0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "abstract": self.abstract,
            "references": list(self.references),
            "year": self.year,
            "citations": self.citations,
        }


@dataclass(frozen=True)
class CatalogIndex:
    """Softwares and publications keyed by id, in input order."""

    softwares: Mapping[str, SoftwareRecord] = field(default_factory=dict)
    publications: Mapping[str, PublicationRecord] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "softwares", MappingProxyType(dict(self.softwares)))
        object.__setattr__(self, "publications", MappingProxyType(dict(self.publications)))

    def __eq__(self, other):
        if not isinstance(other, CatalogIndex):
            return NotImplemented
        return (list(self.softwares.items()) == list(other.softwares.items())
                and list(self.publications.items()) == list(other.publications.items()))

    def publications_of(self, sw: SoftwareRecord) -> list[PublicationRecord]:
        return [self.publications[pid] for pid in sw.publication_ids]


def is_http_url(url: str) -> bool:
    if not isinstance(url, str):
        return False
    try:
        parts = urlsplit(url)
        parts.port  # raises on a malformed port
    except ValueError:
        return False
    return parts.scheme.lower() in ("http", "https") and bool(parts.hostname)


def _expect(obj: dict, key: str, kind, path, lineno):
    if key not in obj:
        raise CatalogParseError(path, lineno, f"missing field {key!r}")
    value = obj[key]
    # bool is an int subclass; reject it for integer fields
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise CatalogParseError(path, lineno, f"field {key!r} has wrong type")
    return value


def _str_list(obj, key, path, lineno) -> tuple[str, ...]:
    values = _expect(obj, key, list, path, lineno)
    if not all(isinstance(v, str) for v in values):
        raise CatalogParseError(path, lineno, f"field {key!r} must be a list of strings")
    return tuple(values)


def _iter_json_lines(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CatalogParseError(path, lineno, f"malformed JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CatalogParseError(path, lineno, "expected a JSON object")
            yield lineno, obj


def _read_publications(path: Path) -> Iterator[PublicationRecord]:
    for lineno, obj in _iter_json_lines(path):
        pub = PublicationRecord(
            id=_expect(obj, "id", str, path, lineno),
            title=_expect(obj, "title", str, path, lineno),
            abstract=_expect(obj, "abstract", str, path, lineno),
            references=_str_list(obj, "references", path, lineno),
            year=_expect(obj, "year", int, path, lineno),
            citations=_expect(obj, "citations", int, path, lineno),
        )
        yield pub


def _read_softwares(path: Path) -> Iterator[SoftwareRecord]:
    for lineno, obj in _iter_json_lines(path):
        yield SoftwareRecord(
            id=_expect(obj, "id", str, path, lineno),
            name=_expect(obj, "name", str, path, lineno),
            aliases=_str_list(obj, "aliases", path, lineno),
            urls=_str_list(obj, "urls", path, lineno),
            publication_ids=_str_list(obj, "publication_ids", path, lineno),
        )


def build_index(softwares: Iterable[SoftwareRecord],
                publications: Iterable[PublicationRecord]) -> CatalogIndex:
    """Validate records and assemble an index. Raises CatalogValidationError."""
    pubs: dict[str, PublicationRecord] = {}
    for pub in publications:
        if not pub.id:
            raise CatalogValidationError(pub.id, "empty publication id")
        if pub.id in pubs:
            raise CatalogValidationError(pub.id, "duplicate publication id")
        if not MIN_YEAR <= pub.year <= MAX_YEAR:
            raise CatalogValidationError(pub.id, f"year {pub.year} outside {MIN_YEAR}..{MAX_YEAR}")
        if pub.citations < 0:
            raise CatalogValidationError(pub.id, f"negative citation count {pub.citations}")
        pubs[pub.id] = pub

    sws: dict[str, SoftwareRecord] = {}
    for sw in softwares:
        if not sw.id:
            raise CatalogValidationError(sw.id, "empty software id")
        if sw.id in sws:
            raise CatalogValidationError(sw.id, "duplicate software id")
        for url in sw.urls:
            if not is_http_url(url):
                raise CatalogValidationError(sw.id, f"bad URL {url!r}")
        for pid in sw.publication_ids:
            if pid not in pubs:
                raise CatalogValidationError(sw.id, f"dangling publication id {pid!r}")
        sws[sw.id] = sw
    return CatalogIndex(softwares=sws, publications=pubs)


def load_catalog(software_path, publications_path) -> CatalogIndex:
    """Load and validate the two JSON-lines catalog files.

    Raises FileNotFoundError for missing files, CatalogParseError (with the
    line number) for malformed lines and CatalogValidationError naming the
    offending record for invariant violations.
    """
    pubs = list(_read_publications(Path(publications_path)))
    sws = list(_read_softwares(Path(software_path)))
    return build_index(sws, pubs)


def dump_catalog(index: CatalogIndex, software_path, publications_path) -> None:
    """Write an index back out in the same JSON-lines format load_catalog reads."""
    with open(software_path, "w", encoding="utf-8") as fh:
        for sw in index.softwares.values():
            fh.write(json.dumps(sw.to_dict(), ensure_ascii=False) + "\n")
    with open(publications_path, "w", encoding="utf-8") as fh:
        for pub in index.publications.values():
            fh.write(json.dumps(pub.to_dict(), ensure_ascii=False) + "\n")


def top_publication(sw: SoftwareRecord, index: CatalogIndex) -> PublicationRecord:
    """Highest-cited publication of ``sw``.

    Ties go to the earliest year, then to the lexicographically smallest id.
    """
    if not sw.publication_ids:
        raise EmptyPublicationsError(f"software {sw.id!r} has no publications")
    pubs = index.publications_of(sw)
    return min(pubs, key=lambda p: (-p.citations, p.year, p.id))
