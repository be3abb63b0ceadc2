"""Regenerate the bundled fixture under src/archivelink/data/fixture/.

The fixture is a synthetic catalog of 50 softwares / 120 publications plus a
small CDX archive with landing-page bodies. It is built from explicit tables
(no randomness) so that:

* 20 of 50 softwares have usable captures (archived), 11 of those in the
  year of their top publication (past archived), 10 of which changed later;
* the 20 profiled landing pages carry documentation / publications /
  downloads / open source / news links on 12 / 9 / 9 / 6 / 2 pages;
* edge cases are present: multi-URL merge, a capture at 20131231235959, a
  capture at 20140101000000 for a 2013 top publication, a tie in citation
  counts, redirect and 404 captures, revisit records, a query-string URL.

Run from the repository root:  python3 tools/build_fixture.py
"""

import base64
import hashlib
import json
import shutil
from pathlib import Path

import sys

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from archivelink.surt import canonicalize_url  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src" / "archivelink" / "data" / "fixture"

NAMES = [
    "SolverX", "Kestrel", "Polyra", "Quandle", "Fermatix", "Lattica", "Hypatia", "Corvid",
    "Mersenix", "Tessera", "Zariski", "Nablox", "Ostrakon", "Primula", "Veblen", "Cayleyx",
    "Sylvan", "Borel3", "Hodgeon", "Wronsk", "Galoisy", "Noether++", "Frobenix", "Jacobiq",
    "Riccatix", "Kummer", "Henselo", "Padex", "Chebfunk", "Lanczio", "Krylo", "Simplexa",
    "Dantzix", "Karmark", "Gomory", "Bendersy", "Lagrix", "Newtonia", "Rungek", "Adamsbash",
    "Stiffy", "Multigrix", "Mortarix", "Splinea", "Nurbsy", "Voronix", "Delaunix", "Tetrix",
    "Meshula", "Quadrix",
]

# keyword fragments of the default ruleset; names and filler text must avoid them
RULE_WORDS = ["documentation", "manual", "user guide", "tutorial", "docs", "faq", "handbook",
              "reference", "publications", "papers", "bibliography", "cite", "references",
              "download", "install", "release", "source code", "git", "license", "news",
              "changelog", "change log", "release notes", "what's new", "history"]

TOPICS = ["polynomial computations", "sparse linear systems", "integer programming",
          "finite element meshes", "computational group theory", "stiff differential equations",
          "lattice reduction", "eigenvalue problems", "convex optimization", "number fields",
          "spline approximation", "Gröbner bases", "mesh generation", "quadrature rules"]

ARCHIVED_SLOTS = [i for i in range(50) if i % 5 in (0, 2)]

# (top_year, [(url_index, timestamp, status, variant)])
# status None means a revisit record ("-"); variant "v1" etc. picks the page body
ARCHIVED = [
    (2013, [(0, "20130214120000", 200, "v1"), (0, "20150601000000", 200, "v2")]),
    (2009, [(1, "20090312081500", 200, "v1"), (1, "20110704000000", 200, "v2"),
            (0, "20140220101010", 200, "v3")]),
    (2013, [(0, "20130301000000", 200, "v1"), (0, "20131231235959", 200, "v2"),
            (0, "20160101000000", 200, "v3")]),
    (2012, [(0, "20120510000000", 200, "v1"), (0, "20140510000000", None, "v1"),
            (0, "20150510000000", 200, "v1")]),
    (2010, [(0, "20100115000000", 200, "v1"), (0, "20100620000000", 200, "v2"),
            (0, "20110101000000", 200, "v2"), (0, "20120101000000", 200, "v3")]),
    (2011, [(0, "20110303000000", 301, "v0"), (0, "20110909000000", 200, "v1"),
            (0, "20130101000000", 200, "v2")]),
    (2014, [(0, "20140404040404", 200, "v1"), (0, "20150808080808", 200, "v2")]),
    (2015, [(0, "20150115000000", 200, "v1"), (0, "20160315000000", 200, "v2")]),
    (2007, [(0, "20060606000000", 200, "v0"), (0, "20070707000000", 200, "v1"),
            (0, "20101010000000", 200, "v2")]),
    (2016, [(0, "20160202000000", 200, "v1"), (0, "20170303000000", 200, "v2")]),
    (2008, [(0, "20080808000000", 200, "v1"), (0, "20120808000000", 200, "v2")]),
    # archived, not in top year
    (2013, [(0, "20140101000000", 200, "v1")]),
    (2010, [(0, "20030303000000", 200, "v1"), (0, "20050505000000", 200, "v2")]),
    (2012, [(0, "20120612000000", 404, "v0"), (0, "20150612000000", 200, "v1")]),
    (2004, [(0, "20090909000000", 200, "v1")]),
    (2001, [(0, "20060101000000", 200, "v1"), (0, "20110101000000", 200, "v2")]),
    (1999, [(0, "20080229120000", 200, "v1")]),
    (2005, [(0, "20120303000000", 200, "v1"), (0, "20130303000000", None, "v1")]),
    (2002, [(0, "20140414000000", 200, "v1")]),
    (2015, [(0, "20161111000000", 200, "v1")]),
]

# category flags per archived entry (documentation, publications, downloads, open_source, updates_news)
DOC = set(range(12))
PUB = {0, 2, 4, 6, 8, 10, 12, 14, 16}
DL = {1, 3, 5, 7, 9, 11, 13, 15, 17}
OS = {1, 5, 9, 13, 17, 19}
NEWS = {3, 15}

NOT_ARCHIVED_YEARS = [1996, 1997, 1998, 1999, 2000, 2001, 2002, 2003, 2004, 2005, 2006, 2007,
                      2008, 2009, 2010, 2011, 2012, 2013, 2014, 2015, 1998, 2000, 2002, 2004,
                      2006, 2008, 2010, 2012, 2013, 2016]


def slug(name):
    return "".join(ch for ch in name.lower() if ch.isalnum())


def urls_for(i, name):
    s = slug(name)
    if i == ARCHIVED_SLOTS[0]:
        return ["http://www.solverx.example.org/"]
    if i == ARCHIVED_SLOTS[1]:
        return [f"https://{s}-math.example.com/", f"http://www.example.net/~{s}/"]
    if i == ARCHIVED_SLOTS[14]:
        return [f"http://www.example.net/software.php?name={s}&id=7"]
    styles = [
        f"http://www.{s}.example.org/",
        f"HTTP://WWW.{name.replace('+', 'p')}.example.com:80/",
        f"https://{s}.example.net/index.html",
        f"http://math.example.org/~{s}/",
        f"https://www.example.com/software/{s}/#top",
    ]
    return [styles[i % len(styles)]]


def digest(data: bytes) -> str:
    return base64.b32encode(hashlib.sha1(data).digest()).decode("ascii")


def page(name, k, variant):
    """Landing page for archived entry k; only links/headings carry category signals."""
    links = [("index.html", "Home")]
    heads = [f"{name}", "About"]
    if k in DOC:
        style = k % 4
        if style == 0:
            links.append(("doc/index.html", "Documentation"))
        elif style == 1:
            links.append(("manual.pdf", "User Manual"))
        elif style == 2:
            heads.append("Documentation")
        else:
            links.append(("learn/first-steps.html", "Tutorial"))
    if k in PUB:
        if k % 4 == 0:
            links.append(("pubs.html", "Publications"))
        else:
            links.append((f"https://doi.org/10.1000/{slug(name)}.{k}", "Journal article (2010)"))
    if k in DL:
        if k % 4 == 1:
            links.append(("../dl/v2.zip", "Get version 2"))
        elif k % 4 == 3:
            links.append(("get.html", "Download"))
        else:
            links.append((f"files/{slug(name)}-1.0.tar.gz", "Sources, version 1.0"))
    if k in OS:
        if k in DL and k % 2:
            links.append((f"https://github.com/example/{slug(name)}", "Repository"))
        else:
            links.append(("COPYING.txt", "License (GPL)"))
    if k in NEWS:
        links.append(("CHANGES.txt", "Changelog"))
    links.append(("mailto:team@example.org", "Contact"))
    body = [
        "<!DOCTYPE html>",
        f"<html><head><title>{name} homepage</title></head><body>",
        f"<h1>{heads[0]}</h1>",
        f"<p>{name} is software for {TOPICS[k % len(TOPICS)]}. Current build: {variant}.</p>",
    ]
    for h in heads[1:]:
        body.append(f"<h2>{h}</h2>")
        body.append("<p>Maintained by a small research group.</p>")
    body.append("<ul>")
    for href, text in links:
        body.append(f'  <li><a href="{href}">{text}</a></li>')
    body.append("</ul>")
    body.append("</body></html>")
    return ("\n".join(body) + "\n").encode("utf-8")


def publications_for(i, name, top_year, n):
    """n publications; the first listed is the top-cited one."""
    topic = TOPICS[i % len(TOPICS)]
    titles = [
        f"The {name} software for {topic}",
        f"Experiments on {topic}",
        f"{name}: a solver for {topic} revisited",
    ]
    abstracts = [
        f"We present {name}, a package implementing new algorithms for {topic}.",
        f"Numerical experiments for {topic} were carried out with the {name} system and compared.",
        "",
    ]
    refs = [
        [f"A. Author, {name} user notes, 2003.", f"B. Writer, On {topic}, J. Math. 12 (2001)."],
        [f"C. Coder, The {name} library, version 2, 2006."],
        [],
    ]
    base = 10 + (i * 7) % 40
    pubs = []
    for j in range(n):
        if j == 0:
            year, cites = top_year, base
        else:
            year = top_year + (2 if j == 1 else -3)
            year = min(year, 2016)
            cites = base - 3 * j
        pubs.append({"title": titles[j], "abstract": abstracts[j], "references": refs[j],
                     "year": year, "citations": cites})
    return pubs


def check_words(text):
    low = text.lower()
    for w in RULE_WORDS:
        assert w not in low, (w, text)


def main():
    for name in NAMES:
        check_words(name)
    assert len(NAMES) == 50 and len(set(NAMES)) == 50

    if OUT.exists():
        shutil.rmtree(OUT)
    (OUT / "archive" / "bodies").mkdir(parents=True)

    softwares, pubs, cdx = [], [], []
    pid = 0
    archived_k = {slot: k for k, slot in enumerate(ARCHIVED_SLOTS)}
    na = iter(NOT_ARCHIVED_YEARS)
    for i, name in enumerate(NAMES):
        urls = urls_for(i, name)
        k = archived_k.get(i)
        top_year = ARCHIVED[k][0] if k is not None else next(na)
        n = 3 if i < 20 else 2
        plist = publications_for(i, name, top_year, n)
        if i == 0:
            plist[0]["citations"] = 42
        if k == 10:
            # citation tie: the earlier year must win
            plist[1]["citations"] = plist[0]["citations"]
            plist[1]["year"] = top_year + 2
        ids = []
        for p in plist:
            pid += 1
            p = {"id": f"p-{pid:03d}", **p}
            pubs.append(p)
            ids.append(p["id"])
        # list the top publication last so ordering alone cannot pick it
        ids = ids[1:] + ids[:1]
        softwares.append({"id": f"sw-{i + 1:03d}", "name": name,
                          "aliases": [slug(name)] if slug(name) != name.lower() else [],
                          "urls": urls, "publication_ids": ids})

        if k is None:
            continue
        for url_index, ts, status, variant in ARCHIVED[k][1]:
            url = urls[url_index]
            key = canonicalize_url(url)
            original = url.split("#")[0]
            if status in (200, None):
                body = page(name, k, variant)
                d = digest(body)
                if status == 200:
                    cdx.append(f"{key} {ts} {original} text/html 200 {d} {len(body)}")
                else:
                    cdx.append(f"{key} {ts} {original} warc/revisit - {d} -")
                bdir = OUT / "archive" / "bodies" / key.replace("/", "_")
                bdir.mkdir(parents=True, exist_ok=True)
                (bdir / f"{ts}.html").write_bytes(body)
            else:
                err = f"HTTP {status} for {original}".encode()
                cdx.append(f"{key} {ts} {original} text/html {status} {digest(err)} {len(err)}")

    # a software whose only captures are 404s, and captures of URLs nobody lists
    na_404 = NAMES.index("Karmark")
    key = canonicalize_url(urls_for(na_404, NAMES[na_404])[0])
    for ts in ("20120101000000", "20130101000000"):
        err = f"HTTP 404 {ts}".encode()
        cdx.append(f"{key} {ts} {urls_for(na_404, NAMES[na_404])[0]} text/html 404 {digest(err)} {len(err)}")
    for ts, path in (("20050505050505", "old/"), ("20100101010101", "archive/2009.html")):
        body = f"unrelated {path}".encode()
        cdx.append(f"org,example,gomory)/{path.rstrip('/')} {ts} http://gomory.example.org/{path} "
                   f"text/html 200 {digest(body)} {len(body)}")

    cdx.sort(key=lambda ln: (ln.split(" ")[0], ln.split(" ")[1]))
    (OUT / "archive" / "captures.cdx").write_text("\n".join(cdx) + "\n", encoding="utf-8")
    with open(OUT / "software.jsonl", "w", encoding="utf-8") as fh:
        for sw in softwares:
            fh.write(json.dumps(sw, ensure_ascii=False) + "\n")
    with open(OUT / "publications.jsonl", "w", encoding="utf-8") as fh:
        for p in pubs:
            fh.write(json.dumps(p, ensure_ascii=False) + "\n")
    print(f"{len(softwares)} softwares, {len(pubs)} publications, {len(cdx)} CDX lines -> {OUT}")


if __name__ == "__main__":
    main()
