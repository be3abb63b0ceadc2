import json

import pytest

from archivelink.archive import FixtureBackend
from archivelink.catalog import PublicationRecord, SoftwareRecord, build_index, load_catalog
from archivelink.cdx import Capture, TimeMap
from archivelink.errors import NetworkError, PreconditionError
from archivelink.linker import (
    LinkResult,
    LinkStatus,
    classify_archival,
    detect_change,
    link_all,
    link_software,
    ok_captures,
    read_link_results,
    write_link_results,
)

import oracle
from conftest import ARCHIVE, PUBLICATIONS, SOFTWARE


def cap(ts, digest="D", status=200, key="k"):
    return Capture(timestamp=ts, digest=digest, urlkey=key, statuscode=status)


def tm(*caps):
    return TimeMap({"k"}, caps)


def test_ok_captures_filters_statuses():
    t = tm(cap("20100101000000", "A", 200), cap("20110101000000", "B", 404), cap("20120101000000", "C", None))
    assert [c.digest for c in ok_captures(t)] == ["A", "C"]
    assert len(ok_captures(tm(cap("20100101000000", status=404)))) == 0
    assert len(ok_captures(tm())) == 0


@pytest.mark.parametrize("stamps, year, expected", [
    (["20130214000000", "20150601000000"], 2013, LinkStatus.PAST_ARCHIVED),
    (["20160101000000"], 2013, LinkStatus.ARCHIVED),
    ([], 2013, LinkStatus.NOT_ARCHIVED),
    (["20131231235959"], 2013, LinkStatus.PAST_ARCHIVED),
    (["20140101000000"], 2013, LinkStatus.ARCHIVED),
    (["20121231235959"], 2013, LinkStatus.ARCHIVED),
])
def test_classify_archival(stamps, year, expected):
    assert classify_archival(tm(*(cap(s) for s in stamps)), year) is expected


def test_detect_change_differing_digest():
    later = cap("20150101000000", "BBB")
    changed, w_in, w_later = detect_change(tm(cap("20130101000000", "AAA"), later), 2013)
    assert changed and w_in.digest == "AAA" and w_later == later


def test_detect_change_same_digest():
    changed, w_in, w_later = detect_change(tm(cap("20130101000000", "AAA"), cap("20140101000000", "AAA")), 2013)
    assert not changed and w_later is None


def test_detect_change_single_capture():
    changed, w_in, w_later = detect_change(tm(cap("20130101000000", "AAA")), 2013)
    assert (changed, w_in.timestamp, w_later) == (False, "20130101000000", None)


def test_detect_change_uses_last_in_year_capture():
    t = tm(cap("20130101000000", "A"), cap("20130601000000", "B"), cap("20140101000000", "B"),
           cap("20150101000000", "C"))
    changed, w_in, w_later = detect_change(t, 2013)
    assert w_in.timestamp == "20130601000000"
    assert w_later.timestamp == "20150101000000"


def test_detect_change_ignores_same_timestamp():
    t = TimeMap({"k", "j"}, [cap("20130101000000", "A", key="k"), cap("20130101000000", "B", key="j")])
    changed, w_in, _ = detect_change(t, 2013)
    assert w_in.digest == "B" and not changed


def test_detect_change_precondition():
    with pytest.raises(PreconditionError):
        detect_change(tm(cap("20140101000000")), 2013)


@pytest.fixture(scope="module")
def index():
    return load_catalog(SOFTWARE, PUBLICATIONS)


@pytest.fixture(scope="module")
def expected():
    return {r["software_id"]: r for r in oracle.link_results(SOFTWARE, PUBLICATIONS, ARCHIVE)}


def by_name(index, name):
    return next(s for s in index.softwares.values() if s.name == name)


def test_solverx(index, expected):
    sw = by_name(index, "SolverX")
    res = link_software(sw, index, FixtureBackend(ARCHIVE))
    assert (res.top_year, index.publications[res.top_publication_id].citations) == (2013, 42)
    assert res.status is LinkStatus.PAST_ARCHIVED and res.changed
    assert res.to_dict() == expected[sw.id]


def test_never_captured(index, expected):
    sw = by_name(index, "Kestrel")
    res = link_software(sw, index, FixtureBackend(ARCHIVE))
    assert (res.status, res.changed, res.total_captures) == (LinkStatus.NOT_ARCHIVED, False, 0)
    assert res.witness_in_year is None and res.witness_later is None
    assert res.to_dict() == expected[sw.id]


def test_multi_url_merge(index, expected):
    sw = by_name(index, "Polyra")
    assert len(sw.urls) == 2
    res = link_software(sw, index, FixtureBackend(ARCHIVE))
    assert res.status is LinkStatus.PAST_ARCHIVED
    assert res.witness_in_year.urlkey == "net,example)/~polyra"  # the older URL
    assert res.to_dict() == expected[sw.id]
    only_new = SoftwareRecord(sw.id, sw.name, urls=sw.urls[:1], publication_ids=sw.publication_ids)
    assert link_software(only_new, index, FixtureBackend(ARCHIVE)).status is LinkStatus.ARCHIVED


def test_404_only_and_keep_all(index):
    sw = by_name(index, "Karmark")
    b = FixtureBackend(ARCHIVE)
    assert link_software(sw, index, b).status is LinkStatus.NOT_ARCHIVED
    kept = link_software(sw, index, b, keep_all_statuses=True)
    assert kept.status is LinkStatus.ARCHIVED and kept.total_captures == 2


def test_citation_tie_uses_earlier_year(index):
    sw = by_name(index, "Kummer")
    pubs = index.publications_of(sw)
    assert pubs[0].citations == pubs[1].citations and pubs[0].year != pubs[1].year
    res = link_software(sw, index, FixtureBackend(ARCHIVE))
    assert res.top_year == min(p.year for p in pubs)
    assert res.status is LinkStatus.PAST_ARCHIVED


def test_every_fixture_software_matches_oracle(index, expected):
    results, failures = link_all(index, FixtureBackend(ARCHIVE), workers=4)
    assert failures == []
    assert [r.software_id for r in results] == list(index.softwares)
    assert [r.to_dict() for r in results] == [expected[s] for s in index.softwares]


def test_json_round_trip(index, tmp_path):
    results, _ = link_all(index, FixtureBackend(ARCHIVE))
    write_link_results(results, tmp_path / "l.jsonl")
    again = read_link_results(tmp_path / "l.jsonl")
    assert [r.to_dict() for r in again] == [r.to_dict() for r in results]
    first = json.loads((tmp_path / "l.jsonl").read_text().splitlines()[0])
    assert set(first) >= {"software_id", "top_publication_id", "top_year", "status", "changed",
                          "witness_in_year", "witness_later", "total_captures"}
    assert set(first["witness_in_year"]) >= {"timestamp", "digest"}


class _Down:
    def query_captures(self, url, from_year=None, to_year=None):
        raise NetworkError("down")


def test_backend_errors_are_annotated():
    pubs = [PublicationRecord("p", "t", year=2000, citations=1)]
    sw = SoftwareRecord("s1", "S", urls=("http://x.org/",), publication_ids=("p",))
    idx = build_index([sw], pubs)
    with pytest.raises(NetworkError) as err:
        link_software(sw, idx, _Down())
    assert err.value.software_id == "s1"
    results, failures = link_all(idx, _Down())
    assert results == [] and failures[0][0] == "s1"


def test_link_result_from_dict_defaults():
    r = LinkResult.from_dict({"software_id": "s", "top_publication_id": "p", "top_year": 2000,
                              "status": "not_archived", "changed": False, "witness_in_year": None,
                              "witness_later": None, "total_captures": 0})
    assert r.latest_capture is None and r.status is LinkStatus.NOT_ARCHIVED
