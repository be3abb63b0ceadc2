"""Acceptance criteria, one ``criterion`` marker per headline requirement.

A per-criterion PASS/FAIL line is printed in the terminal summary.
"""

import csv
import json
import time
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from archivelink import cli
from archivelink.archive import RemoteBackend
from archivelink.cdx import Capture, TimeMap, parse_cdx_line
from archivelink.linker import LinkStatus, classify_archival, detect_change
from archivelink.surt import canonicalize_url

import oracle
from conftest import ARCHIVE, PUBLICATIONS, SOFTWARE

STAGES = ("mine", "link", "classify", "report")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in cli.KNOWN_KEYS:
        monkeypatch.delenv(cli.ENV_PREFIX + key.upper(), raising=False)


def run_pipeline(root: Path, **extra) -> Path:
    values = {"software": SOFTWARE, "publications": PUBLICATIONS, "out": "out", "workers": 4, **extra}
    values.setdefault("fixture", ARCHIVE)
    root.mkdir(parents=True, exist_ok=True)
    config = root / "run.ini"
    config.write_text("".join(f"{k} = {v}\n" for k, v in values.items() if v is not None))
    for stage in STAGES:
        assert cli.main([stage, "--config", str(config)]) == 0, stage
    return root / "out"


def tree(out: Path) -> dict:
    return {str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("golden")
    start = time.perf_counter()
    out = run_pipeline(root)
    return out, time.perf_counter() - start


@pytest.fixture(scope="module")
def oracle_links():
    return oracle.link_results(SOFTWARE, PUBLICATIONS, ARCHIVE)


# --- fixture-golden end-to-end ----------------------------------------------

GOLDEN = "fixture-golden end-to-end"

EXPECTED_FRACTIONS = {
    "documentation": "0.6000",
    "publications": "0.4800",
    "downloads": "0.4200",
    "open_source": "0.3000",
    "updates_news": "0.1000",
}


@pytest.mark.criterion(GOLDEN)
def test_golden_runtime(pipeline):
    _, elapsed = pipeline
    assert elapsed < 10.0


@pytest.mark.criterion(GOLDEN)
@pytest.mark.parametrize("category", list(EXPECTED_FRACTIONS))
def test_golden_category_fraction(pipeline, category):
    out, _ = pipeline
    row = next(r for r in read_csv(out / "categories.csv") if r["category"] == category)
    assert row["fraction_profiled"] == EXPECTED_FRACTIONS[category], (
        f"{category}: {row['count']}/{row['denom_profiled']} = {row['fraction_profiled']}")


@pytest.mark.criterion(GOLDEN)
def test_golden_archived_fraction(pipeline):
    out, _ = pipeline
    rows = read_csv(out / "yearly.csv")
    total = sum(int(r["total"]) for r in rows)
    archived = sum(int(r["archived"]) for r in rows)
    assert (total, archived) == (50, 20)
    assert oracle._dec(archived, total) == "0.4000"


# --- oracle equivalence -----------------------------------------------------

ORACLE = "oracle equivalence"


@pytest.mark.criterion(ORACLE)
def test_oracle_link_results(pipeline, oracle_links):
    out, _ = pipeline
    got = [json.loads(ln) for ln in (out / "links.jsonl").read_text().splitlines()]
    assert got == oracle_links


@pytest.mark.criterion(ORACLE)
def test_oracle_profiles(pipeline, oracle_links):
    out, _ = pipeline
    got = [json.loads(ln) for ln in (out / "profiles.jsonl").read_text().splitlines()]
    assert got == oracle.profiles(oracle_links, ARCHIVE)


@pytest.mark.criterion(ORACLE)
def test_oracle_report_cells(pipeline, oracle_links):
    out, _ = pipeline
    profs = oracle.profiles(oracle_links, ARCHIVE)
    assert (out / "yearly.csv").read_text() == oracle.yearly_csv(oracle_links)
    assert (out / "plotdata.csv").read_text() == oracle.plotdata_csv(oracle_links)
    assert (out / "categories.csv").read_text() == oracle.categories_csv(oracle_links, profs)


# --- status lattice ---------------------------------------------------------

LATTICE = "status-lattice property suite"
RANK = {LinkStatus.NOT_ARCHIVED: 0, LinkStatus.ARCHIVED: 1, LinkStatus.PAST_ARCHIVED: 2}

stamps = st.builds(
    lambda y, m, d, s: f"{y:04d}{m:02d}{d:02d}{s // 3600:02d}{s // 60 % 60:02d}{s % 60:02d}",
    st.integers(2008, 2018), st.integers(1, 12), st.integers(1, 28), st.integers(0, 86399))
boundary = st.sampled_from(["20131231235959", "20140101000000", "20130101000000", "20121231235959"])
captures = st.builds(
    lambda ts, dg, status: Capture(timestamp=ts, digest=dg, urlkey="k", statuscode=status),
    st.one_of(stamps, boundary), st.sampled_from("ABC"), st.sampled_from([200, 200, None, 404, 301]))
timemaps = st.lists(captures, max_size=12).map(lambda cs: TimeMap({"k"}, cs))
years = st.integers(2008, 2018)


def evaluate(tm, year):
    status = classify_archival(tm, year)
    changed = detect_change(tm, year)[0] if status is LinkStatus.PAST_ARCHIVED else False
    return status, changed


@pytest.mark.criterion(LATTICE)
@settings(max_examples=1000, suppress_health_check=[HealthCheck.too_slow])
@given(timemaps, years)
def test_lattice_nesting(tm, year):
    status, changed = evaluate(tm, year)
    past_changed = changed
    past_archived = status is LinkStatus.PAST_ARCHIVED
    archived = status is not LinkStatus.NOT_ARCHIVED
    assert (not past_changed or past_archived) and (not past_archived or archived)


@pytest.mark.criterion(LATTICE)
@settings(max_examples=1000, suppress_health_check=[HealthCheck.too_slow])
@given(timemaps, captures, years)
def test_lattice_monotone_under_capture_addition(tm, extra, year):
    before, _ = evaluate(tm, year)
    after, _ = evaluate(TimeMap({"k"}, tm.captures + (extra,)), year)
    assert RANK[after] >= RANK[before]


@pytest.mark.criterion(LATTICE)
@pytest.mark.parametrize("stamp, year, status", [
    ("20131231235959", 2013, LinkStatus.PAST_ARCHIVED),
    ("20140101000000", 2013, LinkStatus.ARCHIVED),
    ("20140101000000", 2014, LinkStatus.PAST_ARCHIVED),
    ("20131231235959", 2014, LinkStatus.ARCHIVED),
])
def test_lattice_year_boundaries(stamp, year, status):
    tm = TimeMap({"k"}, [Capture(timestamp=stamp, digest="A", urlkey="k", statuscode=200)])
    assert classify_archival(tm, year) is status


@pytest.mark.criterion(LATTICE)
def test_lattice_boundary_change_pair():
    tm = TimeMap({"k"}, [Capture(timestamp="20131231235959", digest="A", urlkey="k", statuscode=200),
                         Capture(timestamp="20140101000000", digest="B", urlkey="k", statuscode=200)])
    changed, w_in, w_later = detect_change(tm, 2013)
    assert changed and w_in.timestamp == "20131231235959" and w_later.timestamp == "20140101000000"


# --- canonicalization -------------------------------------------------------

CANON = "canonicalization suite"

HAND_DERIVED = [
    ("http://example.org/", "org,example)/"),
    ("http://example.org", "org,example)/"),
    ("https://example.org/", "org,example)/"),
    ("HTTP://EXAMPLE.ORG/", "org,example)/"),
    ("http://www.example.org/", "org,example)/"),
    ("http://www.www.example.org/", "org,example)/"),
    ("http://wwwx.example.org/", "org,example,wwwx)/"),
    ("http://example.org:80/", "org,example)/"),
    ("https://example.org:443/a", "org,example)/a"),
    ("http://example.org:8080/a", "org,example:8080)/a"),
    ("https://example.org:80/", "org,example:80)/"),
    ("http://example.org/a/b/", "org,example)/a/b"),
    ("http://example.org/a//", "org,example)/a"),
    ("http://example.org/Path/File.HTML", "org,example)/Path/File.HTML"),
    ("http://example.org/?b=2&a=1", "org,example)/?a=1&b=2"),
    ("http://example.org/x?a=2&a=1", "org,example)/x?a=1&a=2"),
    ("http://example.org/x?B=1&a=1", "org,example)/x?B=1&a=1"),
    ("http://example.org/x?&a=1&&", "org,example)/x?a=1"),
    ("http://example.org/x?", "org,example)/x"),
    ("http://example.org/x#frag", "org,example)/x"),
    ("http://example.org/x?a=1#f?b=2", "org,example)/x?a=1"),
    ("http://example.org/a%2fb%7E", "org,example)/a%2Fb%7E"),
    ("http://example.org/?q=%c3%a9", "org,example)/?q=%C3%A9"),
    ("http://user:pw@example.org/", "org,example)/"),
    ("http://example.org./", "org,example)/"),
    ("http://solverx.example.org/index.html", "org,example,solverx)/index.html"),
    ("http://www.example.net/~polyra/", "net,example)/~polyra"),
]


@pytest.mark.criterion(CANON)
@pytest.mark.parametrize("url, key", HAND_DERIVED)
def test_canonical_hand_derived(url, key):
    assert canonicalize_url(url) == key
    assert oracle.surt(url) == key


def key_to_url(key: str) -> str:
    host, rest = key.split(")", 1)
    port = None
    if ":" in host:
        host, port = host.split(":")
    netloc = ".".join(reversed(host.split(",")))
    scheme = "https" if port == "80" else "http"
    if port:
        netloc += ":" + port
    return f"{scheme}://{netloc}{rest}"


label = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789-", min_size=1, max_size=8)
hosts = st.builds(lambda pre, labels, tld: ".".join(pre + labels + [tld]),
                  st.lists(st.sampled_from(["www", "WWW", "w3"]), max_size=2),
                  st.lists(label, min_size=1, max_size=3), st.sampled_from(["org", "NET", "de"]))
segment = st.text(alphabet="aBc~_.-09", max_size=6) | st.sampled_from(["%2f", "%7E", "%C3%a9", ""])
paths = st.lists(segment, max_size=4).map(lambda segs: "/" + "/".join(segs))
params = st.lists(st.sampled_from(["a=1", "b=2", "A=3", "a=", "", "z=%2f"]), max_size=4)
random_urls = st.builds(
    lambda scheme, user, host, port, path, qs, frag: (
        f"{scheme}://{user}{host}{port}{path}" + (("?" + "&".join(qs)) if qs else "") + frag),
    st.sampled_from(["http", "https", "HTTP"]), st.sampled_from(["", "u@", "u:p@"]), hosts,
    st.sampled_from(["", ":80", ":443", ":8080"]), paths, params, st.sampled_from(["", "#top", "#"]))


@pytest.mark.criterion(CANON)
@settings(max_examples=1000, suppress_health_check=[HealthCheck.too_slow])
@given(random_urls)
def test_canonical_idempotent(url):
    key = canonicalize_url(url)
    assert canonicalize_url(key_to_url(key)) == key
    assert key == oracle.surt(url)


# --- protocol conformance ---------------------------------------------------

PROTOCOL = "protocol conformance"


@pytest.mark.criterion(PROTOCOL)
def test_cdx_lines_round_trip():
    lines = (ARCHIVE / "captures.cdx").read_text().splitlines()
    assert len(lines) > 40
    for line in lines:
        assert parse_cdx_line(line).to_cdx_line() == line


@pytest.mark.criterion(PROTOCOL)
@pytest.mark.parametrize("url, lo, hi, expected", [
    ("http://solverx.example.org/", None, None,
     "https://web.archive.org/cdx/search/cdx?url=http%3A%2F%2Fsolverx.example.org%2F&output=text"),
    ("http://solverx.example.org/", 2013, None,
     "https://web.archive.org/cdx/search/cdx?url=http%3A%2F%2Fsolverx.example.org%2F&output=text&from=2013"),
    ("http://solverx.example.org/", 2013, 2013,
     "https://web.archive.org/cdx/search/cdx?url=http%3A%2F%2Fsolverx.example.org%2F"
     "&output=text&from=2013&to=2013"),
    ("https://www.example.net/~polyra/?a=1&b=2", None, 2016,
     "https://web.archive.org/cdx/search/cdx?url=https%3A%2F%2Fwww.example.net%2F~polyra%2F%3Fa%3D1%26b%3D2"
     "&output=text&to=2016"),
])
def test_recorded_query_strings(url, lo, hi, expected):
    assert RemoteBackend().query_string(url, lo, hi) == expected


@pytest.mark.criterion(PROTOCOL)
def test_recorded_replay_url():
    c = Capture(timestamp="20130214120000", digest="D", urlkey="org,example,solverx)/",
                original="http://www.solverx.example.org/")
    assert RemoteBackend().replay_url(c) == (
        "https://web.archive.org/web/20130214120000id_/http://www.solverx.example.org/")


# --- determinism ------------------------------------------------------------

DETERMINISM = "determinism"


@pytest.mark.criterion(DETERMINISM)
def test_two_runs_byte_identical(pipeline, tmp_path):
    first, _ = pipeline
    second = run_pipeline(tmp_path / "again")
    assert tree(first) and tree(second) == tree(first)


@pytest.mark.criterion(DETERMINISM)
def test_offline_warm_cache_run_matches(pipeline, wayback, tmp_path):
    first, _ = pipeline
    base, seen = wayback
    remote = dict(fixture=None, endpoint=base, cache_dir=tmp_path / "cache", rate_limit=1000)
    online = run_pipeline(tmp_path / "online", **remote)
    assert tree(online) == tree(first)
    warm = len(seen)
    assert warm > 0
    offline = run_pipeline(tmp_path / "offline", offline="true", **remote)
    assert tree(offline) == tree(first)
    assert len(seen) == warm


# --- change claim -----------------------------------------------------------

CHANGE = "change-claim property"


@pytest.mark.criterion(CHANGE)
def test_change_claim(pipeline):
    out, _ = pipeline
    rows = read_csv(out / "yearly.csv")
    past = sum(int(r["past_archived"]) for r in rows)
    changed = sum(int(r["past_changed"]) for r in rows)
    assert past >= 10 and changed >= 9
    assert changed / past >= 0.9


# --- live smoke (opt-in) ----------------------------------------------------

@pytest.mark.live
@pytest.mark.criterion("live smoke test (optional)")
def test_live_cdx_smoke(tmp_path):
    rb = RemoteBackend(cache_dir=tmp_path, rate_limit=0.5, timeout=60)
    tm = rb.query_captures("http://www.python.org/", 2005, 2005)
    assert len(tm) >= 1
    assert all(c.year == 2005 for c in tm)
