import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlsplit

import pytest

import oracle

FIXTURE = Path(__file__).resolve().parents[1] / "src" / "archivelink" / "data" / "fixture"
SOFTWARE = FIXTURE / "software.jsonl"
PUBLICATIONS = FIXTURE / "publications.jsonl"
ARCHIVE = FIXTURE / "archive"


def pytest_addoption(parser):
    parser.addoption("--run-live", action="store_true", default=False,
                     help="run tests that query the real Internet Archive")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion this test belongs to")
    config._criteria = {}


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-live"):
        return
    skip = pytest.mark.skip(reason="live archive test; pass --run-live")
    for item in items:
        if "live" in item.keywords:
            item.add_marker(skip)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    results = item.config._criteria.setdefault(name, [])
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        results.append("skip" if rep.skipped else ("pass" if rep.passed else "fail"))


def pytest_terminal_summary(terminalreporter, config):
    if not config._criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, results in config._criteria.items():
        if "fail" in results:
            verdict = "FAIL"
        elif results and all(r == "skip" for r in results):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"{verdict}  {name}  ({len(results)} checks)")


class _FakeWayback(BaseHTTPRequestHandler):
    """CDX + id_ replay endpoints served from a fixture directory."""

    archive = ARCHIVE
    requests_seen: list = []

    def log_message(self, *args):
        pass

    def _send(self, code, body: bytes, ctype="text/plain"):
        self.send_response(code)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        type(self).requests_seen.append(self.path)
        parts = urlsplit(self.path)
        if parts.path == "/cdx/search/cdx":
            q = parse_qs(parts.query)
            key = oracle.surt(q["url"][0])
            lo, hi = q.get("from", ["0000"])[0], q.get("to", ["9999"])[0]
            rows = [ln for ln in (self.archive / "captures.cdx").read_text().splitlines()
                    if ln.split()[0] == key and lo <= ln.split()[1][:4] <= hi]
            self._send(200, "".join(r + "\n" for r in rows).encode())
        elif parts.path.startswith("/web/"):
            rest = self.path[len("/web/"):]
            ts, original = rest.split("id_/", 1)
            key = oracle.surt(unquote(original))
            path = self.archive / "bodies" / key.replace("/", "_") / f"{ts}.html"
            if path.exists():
                self._send(200, path.read_bytes(), "text/html")
            else:
                self._send(404, b"not in archive")
        else:
            self._send(404, b"")


@pytest.fixture
def wayback():
    """Local Wayback-protocol server over the bundled fixture; yields its base URL."""
    handler = type("Handler", (_FakeWayback,), {"requests_seen": []})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        yield base, handler.requests_seen
    finally:
        server.shutdown()
        server.server_close()
