"""SURT-style URL canonicalization used as the CDX ``urlkey``.

    >>> canonicalize_url("HTTP://WWW.SolverX.example.org:80/index.html?b=2&a=1")
    'org,example,solverx)/index.html?a=1&b=2'
"""

from __future__ import annotations

import re
from urllib.parse import urlsplit

from .errors import InvalidURLError

DEFAULT_PORTS = {"http": 80, "https": 443}

_PCT = re.compile(r"%[0-9a-fA-F]{2}")


def _upper_pct(s: str) -> str:
    return _PCT.sub(lambda m: m.group(0).upper(), s)


def _surt_host(host: str) -> str:
    if host.startswith("["):
        return host
    host = host.rstrip(".")
    while host.startswith("www.") and len(host) > 4:
        host = host[4:]
    return ",".join(reversed(host.split(".")))


def canonicalize_url(url: str) -> str:
    """Canonical SURT key for an absolute http(s) URL.

    Scheme, userinfo, default ports and fragments are dropped, the host is
    lowercased with leading ``www.`` labels removed and its labels reversed,
    query parameters are sorted bytewise and percent-escapes uppercased.
    Path case is preserved; a trailing slash survives only at the root.
    """
    if not isinstance(url, str):
        raise InvalidURLError(f"not a string: {url!r}")
    try:
        parts = urlsplit(url.strip())
        port = parts.port
    except ValueError as exc:
        raise InvalidURLError(f"{url!r}: {exc}") from None
    scheme = parts.scheme.lower()
    if scheme not in DEFAULT_PORTS:
        raise InvalidURLError(f"{url!r}: scheme must be http or https")
    host = parts.hostname
    if not host:
        raise InvalidURLError(f"{url!r}: missing host")

    key = _surt_host(host.lower())
    if port is not None and port != DEFAULT_PORTS[scheme]:
        key += f":{port}"

    path = _upper_pct(parts.path).rstrip("/") or "/"
    key += ")" + path

    params = [p for p in _upper_pct(parts.query).split("&") if p]
    if params:
        params.sort(key=lambda p: p.encode("utf-8"))
        key += "?" + "&".join(params)
    return key
