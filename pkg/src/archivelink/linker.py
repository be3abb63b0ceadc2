"""Archival status of each software relative to its top publication year.

A software is *archived* when any of its URLs has a usable capture and
*past archived* when one of those captures falls in the calendar year (UTC)
of its highest-cited publication. A past-archived site has *changed* when a
strictly later capture carries a different content digest than the last
capture of that year.
"""

from __future__ import annotations

import enum
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

from .archive import ArchiveBackend
from .catalog import CatalogIndex, SoftwareRecord, top_publication
from .cdx import Capture, TimeMap, merge_timemaps
from .errors import ArchiveLinkError, PreconditionError

logger = logging.getLogger(__name__)

OK_STATUSES = frozenset({200})


class LinkStatus(str, enum.Enum):
    NOT_ARCHIVED = "not_archived"
    ARCHIVED = "archived"
    PAST_ARCHIVED = "past_archived"

    @property
    def rank(self) -> int:
        return _RANK[self]


_RANK = {LinkStatus.NOT_ARCHIVED: 0, LinkStatus.ARCHIVED: 1, LinkStatus.PAST_ARCHIVED: 2}


@dataclass(frozen=True)
class LinkResult:
    software_id: str
    top_publication_id: str
    top_year: int
    status: LinkStatus
    changed: bool = False
    witness_in_year: Optional[Capture] = None
    witness_later: Optional[Capture] = None
    total_captures: int = 0
    # newest usable capture; lets the classifier pick a page for archived-only sites
    latest_capture: Optional[Capture] = None

    def to_dict(self) -> dict:
        def brief(c):
            return None if c is None else c.brief()
        return {
            "software_id": self.software_id,
            "top_publication_id": self.top_publication_id,
            "top_year": self.top_year,
            "status": self.status.value,
            "changed": self.changed,
            "witness_in_year": brief(self.witness_in_year),
            "witness_later": brief(self.witness_later),
            "total_captures": self.total_captures,
            "latest_capture": brief(self.latest_capture),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinkResult":
        def cap(v):
            return None if v is None else Capture.from_brief(v)
        return cls(
            software_id=d["software_id"],
            top_publication_id=d["top_publication_id"],
            top_year=int(d["top_year"]),
            status=LinkStatus(d["status"]),
            changed=bool(d["changed"]),
            witness_in_year=cap(d.get("witness_in_year")),
            witness_later=cap(d.get("witness_later")),
            total_captures=int(d["total_captures"]),
            latest_capture=cap(d.get("latest_capture")),
        )


def ok_captures(tm: TimeMap) -> TimeMap:
    """Keep captures with status 200 or no recorded status (e.g. revisits)."""
    keep = [c for c in tm.captures if c.statuscode is None or c.statuscode in OK_STATUSES]
    return TimeMap(tm.urlkeys, keep)


def classify_archival(tm_merged: TimeMap, top_year: int) -> LinkStatus:
    if any(c.year == top_year for c in tm_merged.captures):
        return LinkStatus.PAST_ARCHIVED
    if tm_merged.captures:
        return LinkStatus.ARCHIVED
    return LinkStatus.NOT_ARCHIVED


def detect_change(tm_merged: TimeMap, top_year: int) -> tuple[bool, Capture, Optional[Capture]]:
    """Compare the last in-year capture with every strictly later capture.

    Returns ``(changed, witness_in_year, witness_later)`` where
    ``witness_later`` is the earliest later capture whose digest differs.
    """
    in_year = [c for c in tm_merged.captures if c.year == top_year]
    if not in_year:
        raise PreconditionError(f"no capture in {top_year}")
    witness = in_year[-1]
    for c in tm_merged.captures:
        if c.timestamp > witness.timestamp and c.digest != witness.digest:
            return True, witness, c
    return False, witness, None


def link_software(sw: SoftwareRecord, index: CatalogIndex, backend: ArchiveBackend,
                  keep_all_statuses: bool = False) -> LinkResult:
    """Top publication, merged captures over all URLs, status and change verdict."""
    try:
        top = top_publication(sw, index)
        timemaps = [backend.query_captures(url) for url in dict.fromkeys(sw.urls)]
    except ArchiveLinkError as exc:
        exc.software_id = sw.id
        raise
    merged = merge_timemaps(timemaps)
    if not keep_all_statuses:
        merged = ok_captures(merged)

    status = classify_archival(merged, top.year)
    changed, in_year, later = False, None, None
    if status is LinkStatus.PAST_ARCHIVED:
        changed, in_year, later = detect_change(merged, top.year)
    return LinkResult(
        software_id=sw.id,
        top_publication_id=top.id,
        top_year=top.year,
        status=status,
        changed=changed,
        witness_in_year=in_year,
        witness_later=later,
        total_captures=len(merged),
        latest_capture=merged.captures[-1] if merged.captures else None,
    )


def link_all(index: CatalogIndex, backend: ArchiveBackend, workers: int = 4,
             keep_all_statuses: bool = False) -> tuple[list[LinkResult], list[tuple[str, Exception]]]:
    """Link every software concurrently; results come back in catalog order.

    Failures are logged and collected per software instead of aborting.
    """
    softwares = list(index.softwares.values())

    def one(sw):
        try:
            return link_software(sw, index, backend, keep_all_statuses), None
        except ArchiveLinkError as exc:
            logger.warning("linking %s failed: %s", sw.id, exc)
            return None, exc

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(one, softwares))

    results, failures = [], []
    for sw, (res, exc) in zip(softwares, outcomes):
        if res is not None:
            results.append(res)
        else:
            failures.append((sw.id, exc))
    return results, failures


def write_link_results(results: Iterable[LinkResult], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")


def read_link_results(path) -> list[LinkResult]:
    with open(path, encoding="utf-8") as fh:
        return [LinkResult.from_dict(json.loads(line)) for line in fh if line.strip()]
