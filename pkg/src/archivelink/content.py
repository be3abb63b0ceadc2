"""Heuristic profile of what a software landing page offers.

Five independent flags (documentation, publications, downloads, open
source, updates/news) are set from keyword matches on link text and
headings and from pattern matches on link targets. Rules are data: the
default set ships as ``data/rules.json`` and can be replaced per run.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from html.parser import HTMLParser
from importlib import resources
from typing import Iterable, Optional
from urllib.parse import urljoin, urlsplit

from .archive import ArchiveBackend
from .errors import ArchiveLinkError
from .linker import LinkResult, LinkStatus

logger = logging.getLogger(__name__)

CATEGORIES = ("documentation", "publications", "downloads", "open_source", "updates_news")
HEADINGS = frozenset({"h1", "h2", "h3", "h4", "h5", "h6"})


@dataclass(frozen=True)
class ContentProfile:
    documentation: bool = False
    publications: bool = False
    downloads: bool = False
    open_source: bool = False
    updates_news: bool = False

    def to_dict(self, software_id: Optional[str] = None) -> dict:
        d = asdict(self)
        return d if software_id is None else {"software_id": software_id, **d}


@dataclass(frozen=True)
class CategoryRule:
    """Patterns for one category.

    ``keyword_patterns`` are substrings looked for in link text and heading
    text. ``href_patterns`` are looked for in link targets; a pattern that
    starts with ``.`` is a file suffix and must end the target's path.
    """

    category: str
    keyword_patterns: tuple[str, ...] = ()
    href_patterns: tuple[str, ...] = ()

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        if not (self.keyword_patterns or self.href_patterns):
            raise ValueError(f"category {self.category!r} has no patterns")
        object.__setattr__(self, "keyword_patterns", tuple(p.lower() for p in self.keyword_patterns))
        object.__setattr__(self, "href_patterns", tuple(p.lower() for p in self.href_patterns))

    def matches_text(self, text: str) -> bool:
        return any(p in text for p in self.keyword_patterns)

    def matches_href(self, href: str) -> bool:
        path = urlsplit(href).path
        for p in self.href_patterns:
            if p.startswith("."):
                if path.endswith(p):
                    return True
            elif p in href:
                return True
        return False


def load_rules(path=None) -> list[CategoryRule]:
    """Parse a ruleset file ``{category: {"keywords": [...], "hrefs": [...]}}``."""
    if path is None:
        ref = resources.files("archivelink") / "data" / "rules.json"
        data = json.loads(ref.read_text(encoding="utf-8"))
    else:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    rules = [CategoryRule(cat, tuple(entry.get("keywords", ())), tuple(entry.get("hrefs", ())))
             for cat, entry in data.items()]
    missing = set(CATEGORIES) - {r.category for r in rules}
    if missing:
        raise ValueError(f"ruleset lacks categories: {sorted(missing)}")
    return rules


def _norm_ws(text: str) -> str:
    return " ".join(text.split())


class _PageParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.links: list[tuple[str, str]] = []
        self.headings: list[str] = []
        self._anchor: Optional[tuple[str, list[str]]] = None
        self._heading: Optional[list[str]] = None

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            self._close_anchor()
            href = dict(attrs).get("href")
            if href is not None:
                self._anchor = (href, [])
        elif tag in HEADINGS:
            self._close_heading()
            self._heading = []

    def handle_endtag(self, tag):
        if tag == "a":
            self._close_anchor()
        elif tag in HEADINGS:
            self._close_heading()

    def handle_data(self, data):
        if self._anchor is not None:
            self._anchor[1].append(data)
        if self._heading is not None:
            self._heading.append(data)

    def _close_anchor(self):
        if self._anchor is not None:
            href, parts = self._anchor
            self.links.append((href, _norm_ws("".join(parts))))
            self._anchor = None

    def _close_heading(self):
        if self._heading is not None:
            text = _norm_ws("".join(self._heading))
            if text:
                self.headings.append(text)
            self._heading = None

    def finish(self):
        self.close()
        self._close_anchor()
        self._close_heading()


def _parse(html: bytes) -> _PageParser:
    parser = _PageParser()
    try:
        parser.feed(html.decode("utf-8", errors="replace"))
        parser.finish()
    except Exception:  # html.parser is lenient, but never let markup abort a batch
        logger.debug("HTML parse aborted; keeping partial results", exc_info=True)
    return parser


def _resolve(href: str, base_url: str) -> Optional[str]:
    try:
        return urljoin(base_url, href.strip())
    except ValueError:
        return None


def extract_links(html: bytes, base_url: str) -> list[tuple[str, str]]:
    """Anchors as (absolute href, whitespace-normalized text), in document order."""
    out = []
    for href, text in _parse(html).links:
        absolute = _resolve(href, base_url)
        if absolute is not None:
            out.append((absolute, text))
    return out


def classify(html: bytes, base_url: str, rules: Iterable[CategoryRule]) -> ContentProfile:
    page = _parse(html)
    links = []
    for href, text in page.links:
        absolute = _resolve(href, base_url)
        if absolute is not None:
            links.append((absolute.lower(), text.lower()))
    headings = [h.lower() for h in page.headings]

    flags = dict.fromkeys(CATEGORIES, False)
    for rule in rules:
        if flags[rule.category]:
            continue
        flags[rule.category] = (
            any(rule.matches_text(text) or rule.matches_href(href) for href, text in links)
            or any(rule.matches_text(h) for h in headings)
        )
    return ContentProfile(**flags)


def profile_software(lr: LinkResult, backend: ArchiveBackend,
                     rules: Iterable[CategoryRule]) -> Optional[ContentProfile]:
    """Classify the page of the in-year witness, else of the latest usable capture.

    Returns None for unarchived software or when the body cannot be fetched;
    the latter is logged, never raised.
    """
    if lr.status is LinkStatus.NOT_ARCHIVED:
        return None
    capture = lr.witness_in_year or lr.latest_capture
    if capture is None:
        return None
    try:
        body = backend.fetch_capture_body(capture)
    except ArchiveLinkError as exc:
        logger.warning("body unavailable for %s (%s @ %s): %s",
                       lr.software_id, capture.urlkey, capture.timestamp, exc)
        return None
    return classify(body, capture.original, rules)


def write_profiles(profiles: Iterable[tuple[str, ContentProfile]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sid, prof in profiles:
            fh.write(json.dumps(prof.to_dict(sid)) + "\n")


def read_profiles(path) -> list[tuple[str, ContentProfile]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                d = json.loads(line)
                sid = d.pop("software_id")
                out.append((sid, ContentProfile(**d)))
    return out
