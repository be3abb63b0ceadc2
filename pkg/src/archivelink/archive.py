"""Read-only access to a web archive's CDX index and raw capture bodies.

Two backends share one interface:

* :class:`RemoteBackend` speaks the Wayback CDX query protocol
  (``{endpoint}/cdx/search/cdx?url=...&output=text``) and fetches raw bodies
  through the replay ``id_`` convention (``{replay}/web/{timestamp}id_/{url}``).
* :class:`FixtureBackend` reads a directory holding ``captures.cdx`` and
  ``bodies/{urlkey with "/" -> "_"}/{timestamp}.html``.

Both go through an optional on-disk cache, so a warm cache allows fully
offline reruns (``RemoteBackend(offline=True)``).
"""

from __future__ import annotations

import hashlib
import logging
import os
import tempfile
import threading
import time
from pathlib import Path
from typing import Optional
from urllib.parse import quote, urlsplit

import requests

from .cdx import Capture, TimeMap, parse_cdx_text
from .errors import BackendError, CaptureNotFoundError, NetworkError
from .surt import canonicalize_url

logger = logging.getLogger(__name__)

DEFAULT_RATE_LIMIT = 1.0
DEFAULT_RETRIES = 3
DEFAULT_BACKOFF = 1.0
DEFAULT_TIMEOUT = 30.0
USER_AGENT = "archivelink/0.1 (research; read-only CDX client)"


class RateLimiter:
    """Spaces calls at least ``1 / rate`` seconds apart, across threads."""

    def __init__(self, rate: float):
        if rate <= 0:
            raise ValueError(f"rate limit must be > 0, got {rate}")
        self.interval = 1.0 / rate
        self._lock = threading.Lock()
        self._next = 0.0

    def wait(self) -> None:
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next)
            self._next = slot + self.interval
        delay = slot - now
        if delay > 0:
            time.sleep(delay)


_limiters: dict[str, RateLimiter] = {}
_limiters_lock = threading.Lock()


def limiter_for(host: str, rate: float) -> RateLimiter:
    """One shared limiter per (host, rate), so parallel backends stay polite."""
    key = f"{host}|{rate}"
    with _limiters_lock:
        if key not in _limiters:
            _limiters[key] = RateLimiter(rate)
        return _limiters[key]


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class DiskCache:
    """``queries/{sha256(query)}.cdx`` and ``bodies/{sha256(urlkey+timestamp+digest)}.bin``."""

    def __init__(self, root):
        self.root = Path(root)

    def query_path(self, query: str) -> Path:
        return self.root / "queries" / f"{_sha256(query)}.cdx"

    def body_path(self, capture: Capture) -> Path:
        key = capture.urlkey + capture.timestamp + capture.digest
        return self.root / "bodies" / f"{_sha256(key)}.bin"

    def get_query(self, query: str) -> Optional[str]:
        path = self.query_path(query)
        return path.read_text(encoding="utf-8") if path.exists() else None

    def put_query(self, query: str, text: str) -> None:
        _atomic_write(self.query_path(query), text.encode("utf-8"))

    def get_body(self, capture: Capture) -> Optional[bytes]:
        path = self.body_path(capture)
        return path.read_bytes() if path.exists() else None

    def put_body(self, capture: Capture, data: bytes) -> None:
        _atomic_write(self.body_path(capture), data)


class ArchiveBackend:
    """Common query/fetch logic; subclasses supply the raw transport."""

    rate_limit: float = DEFAULT_RATE_LIMIT

    def __init__(self, cache_dir=None, rate_limit: float = DEFAULT_RATE_LIMIT):
        if rate_limit <= 0:
            raise ValueError(f"rate limit must be > 0, got {rate_limit}")
        self.rate_limit = rate_limit
        self.cache = DiskCache(cache_dir) if cache_dir is not None else None

    def query_string(self, url: str, from_year=None, to_year=None) -> str:
        raise NotImplementedError

    def _raw_query(self, url: str, from_year, to_year) -> str:
        raise NotImplementedError

    def _raw_body(self, capture: Capture) -> bytes:
        raise NotImplementedError

    def _select(self, urlkey: str, captures: list[Capture]) -> list[Capture]:
        return [c for c in captures if c.urlkey == urlkey]

    def query_captures(self, url: str, from_year: Optional[int] = None,
                       to_year: Optional[int] = None) -> TimeMap:
        urlkey = canonicalize_url(url)
        query = self.query_string(url, from_year, to_year)
        text = self.cache.get_query(query) if self.cache else None
        if text is None:
            text = self._raw_query(url, from_year, to_year)
            if self.cache:
                self.cache.put_query(query, text)
        caps = [c for c in self._select(urlkey, parse_cdx_text(text))
                if (from_year is None or c.year >= from_year)
                and (to_year is None or c.year <= to_year)]
        return TimeMap(frozenset({urlkey} | {c.urlkey for c in caps}), caps)

    def fetch_capture_body(self, capture: Capture) -> bytes:
        if self.cache:
            cached = self.cache.get_body(capture)
            if cached is not None:
                return cached
        data = self._raw_body(capture)
        if self.cache:
            self.cache.put_body(capture, data)
        return data


class FixtureBackend(ArchiveBackend):
    """Archive backed by a plain directory (CDX text plus body files)."""

    def __init__(self, directory, cache_dir=None, rate_limit: float = DEFAULT_RATE_LIMIT):
        super().__init__(cache_dir=cache_dir, rate_limit=rate_limit)
        self.directory = Path(directory)
        self._lines: Optional[list[str]] = None
        self._lock = threading.Lock()

    def _check(self) -> None:
        if not (self.directory / "captures.cdx").is_file():
            raise BackendError(f"fixture archive missing: {self.directory / 'captures.cdx'}")

    def _all_lines(self) -> list[str]:
        with self._lock:
            if self._lines is None:
                self._check()
                text = (self.directory / "captures.cdx").read_text(encoding="utf-8")
                self._lines = [ln for ln in text.splitlines() if ln.strip()]
            return self._lines

    def query_string(self, url, from_year=None, to_year=None) -> str:
        q = f"fixture:{self.directory.resolve()}?url={quote(url, safe='')}"
        if from_year is not None:
            q += f"&from={from_year}"
        if to_year is not None:
            q += f"&to={to_year}"
        return q

    def _raw_query(self, url, from_year, to_year) -> str:
        urlkey = canonicalize_url(url)
        # the urlkey is the first field; match on it before parsing
        hits = [ln for ln in self._all_lines() if ln.split(" ", 1)[0] == urlkey]
        return "".join(ln + "\n" for ln in hits)

    def body_path(self, capture: Capture) -> Path:
        return self.directory / "bodies" / capture.urlkey.replace("/", "_") / f"{capture.timestamp}.html"

    def _raw_body(self, capture: Capture) -> bytes:
        self._check()
        path = self.body_path(capture)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise CaptureNotFoundError(f"no body stored for {capture.urlkey} @ {capture.timestamp}") from None


class RemoteBackend(ArchiveBackend):
    """Wayback-style CDX server plus replay service, accessed over HTTP.

    With ``offline=True`` nothing goes over the network; cache misses raise
    :class:`NetworkError`.
    """

    def __init__(self, endpoint: str = "https://web.archive.org",
                 replay: Optional[str] = None, cache_dir=None,
                 rate_limit: float = DEFAULT_RATE_LIMIT, retries: int = DEFAULT_RETRIES,
                 backoff: float = DEFAULT_BACKOFF, timeout: float = DEFAULT_TIMEOUT,
                 offline: bool = False, session: Optional[requests.Session] = None):
        super().__init__(cache_dir=cache_dir, rate_limit=rate_limit)
        self.endpoint = endpoint.rstrip("/")
        self.replay = (replay or endpoint).rstrip("/")
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.offline = offline
        self._local = threading.local()
        self._session = session

    @property
    def session(self) -> requests.Session:
        if self._session is not None:
            return self._session
        # requests.Session is not guaranteed thread-safe; one per worker thread
        sess = getattr(self._local, "session", None)
        if sess is None:
            sess = requests.Session()
            sess.headers["User-Agent"] = USER_AGENT
            self._local.session = sess
        return sess

    def query_string(self, url, from_year=None, to_year=None) -> str:
        q = f"{self.endpoint}/cdx/search/cdx?url={quote(url, safe='')}&output=text"
        if from_year is not None:
            q += f"&from={from_year:04d}"
        if to_year is not None:
            q += f"&to={to_year:04d}"
        return q

    def replay_url(self, capture: Capture) -> str:
        return f"{self.replay}/web/{capture.timestamp}id_/{capture.original}"

    def _select(self, urlkey, captures):
        # the CDX server already matched the URL; its urlkeys may differ from ours
        return captures

    def _get(self, url: str) -> requests.Response:
        if self.offline:
            raise NetworkError(f"offline and not cached: {url}")
        host = urlsplit(url).netloc
        limiter = limiter_for(host, self.rate_limit)
        last_exc: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            limiter.wait()
            try:
                resp = self.session.get(url, timeout=self.timeout)
            except requests.RequestException as exc:
                last_exc = exc
                logger.warning("GET %s failed (attempt %d): %s", url, attempt + 1, exc)
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_exc = NetworkError(f"HTTP {resp.status_code} from {url}")
                logger.warning("GET %s returned %d (attempt %d)", url, resp.status_code, attempt + 1)
                continue
            return resp
        raise NetworkError(f"giving up on {url} after {self.retries + 1} attempts: {last_exc}")

    def _raw_query(self, url, from_year, to_year) -> str:
        query = self.query_string(url, from_year, to_year)
        resp = self._get(query)
        if resp.status_code != 200:
            raise BackendError(f"CDX query {query} returned HTTP {resp.status_code}")
        return resp.text

    def _raw_body(self, capture: Capture) -> bytes:
        url = self.replay_url(capture)
        resp = self._get(url)
        if resp.status_code == 404:
            raise CaptureNotFoundError(f"replay has no body for {url}")
        if resp.status_code != 200:
            raise BackendError(f"replay {url} returned HTTP {resp.status_code}")
        return resp.content


def query_captures(backend: ArchiveBackend, url: str, from_year: Optional[int] = None,
                   to_year: Optional[int] = None) -> TimeMap:
    """Captures of ``url`` (optionally bounded by calendar year, inclusive)."""
    return backend.query_captures(url, from_year, to_year)


def fetch_capture_body(backend: ArchiveBackend, capture: Capture) -> bytes:
    """Raw archived bytes of ``capture``; cached by (urlkey, timestamp, digest)."""
    return backend.fetch_capture_body(capture)
