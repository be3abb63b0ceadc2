"""Trigger-term co-occurrence heuristic for spotting software mentions.

A token that equals a known software name (or alias) counts as a mention
when a trigger word such as "solver" or "package" appears within a small
token window on either side. Matching is exact-token and case-insensitive.
Every candidate is emitted; the heuristic has no notion of confidence and
produces false positives ("the Maple package of the tree library" style
coincidences) that a curator is expected to review.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .catalog import CatalogIndex, PublicationRecord

FIELDS = ("title", "abstract", "references")

DEFAULT_TERMS = frozenset({
    "solver", "program", "software", "package", "library", "tool", "system", "code",
})
DEFAULT_WINDOW = 5

_KEEP_AT_EDGES = {"+"}


@dataclass(frozen=True)
class TriggerLexicon:
    terms: frozenset[str] = DEFAULT_TERMS
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        terms = frozenset(t.lower() for t in self.terms)
        if not terms:
            raise ValueError("trigger lexicon must not be empty")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_file(cls, path) -> "TriggerLexicon":
        """Read ``{"terms": [...], "window": n}``; window defaults to 5."""
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(terms=frozenset(data["terms"]), window=int(data.get("window", DEFAULT_WINDOW)))

    @classmethod
    def default(cls) -> "TriggerLexicon":
        ref = resources.files("archivelink") / "data" / "triggers.json"
        with resources.as_file(ref) as path:
            return cls.from_file(path)


@dataclass(frozen=True)
class Mention:
    publication_id: str
    software_name: str
    matched_alias: str
    field: str
    trigger: str
    token_offset: int

    def to_dict(self) -> dict:
        return asdict(self)


def _is_strippable(ch: str) -> bool:
    if ch in _KEEP_AT_EDGES:
        return False
    return unicodedata.category(ch)[0] in ("P", "S")


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization with edge punctuation stripped.

    >>> tokenize("C++ library (v2.0)")
    ['C++', 'library', 'v2.0']
    """
    tokens = []
    for raw in text.split():
        start, end = 0, len(raw)
        while start < end and _is_strippable(raw[start]):
            start += 1
        while end > start and _is_strippable(raw[end - 1]):
            end -= 1
        if start < end:
            tokens.append(raw[start:end])
    return tokens


def _scan(tokens: list[str], offset_base: int, pub_id: str, field_name: str,
          names: Mapping[str, str], lex: TriggerLexicon) -> list[Mention]:
    lowered = [t.lower() for t in tokens]
    found = []
    for i, tok in enumerate(lowered):
        if tok not in names:
            continue
        trigger = None
        # nearest trigger wins; on equal distance the left one does
        for dist in range(1, lex.window + 1):
            for j in (i - dist, i + dist):
                if 0 <= j < len(lowered) and lowered[j] in lex.terms:
                    trigger = lowered[j]
                    break
            if trigger:
                break
        if trigger:
            found.append(Mention(
                publication_id=pub_id,
                software_name=names[tok],
                matched_alias=tokens[i],
                field=field_name,
                trigger=trigger,
                token_offset=offset_base + i,
            ))
    return found


def find_mentions(pub: PublicationRecord, names: Mapping[str, str],
                  lex: TriggerLexicon) -> list[Mention]:
    """Candidate mentions in title, abstract and references, in reading order.

    Reference lines are scanned one at a time (the window never spans two
    references) but token offsets run continuously across the whole field.
    """
    mentions = _scan(tokenize(pub.title), 0, pub.id, "title", names, lex)
    mentions += _scan(tokenize(pub.abstract), 0, pub.id, "abstract", names, lex)
    offset = 0
    for line in pub.references:
        toks = tokenize(line)
        mentions += _scan(toks, offset, pub.id, "references", names, lex)
        offset += len(toks)
    return mentions


def name_table(index: CatalogIndex) -> dict[str, str]:
    """Map lowercase name/alias to software name; first software listed wins a clash."""
    table: dict[str, str] = {}
    for sw in index.softwares.values():
        for alias in (sw.name, *sw.aliases):
            table.setdefault(alias.lower(), sw.name)
    return table


def mine_catalog(index: CatalogIndex, lex: TriggerLexicon) -> list[Mention]:
    names = name_table(index)
    out: list[Mention] = []
    for pub in index.publications.values():
        out.extend(find_mentions(pub, names, lex))
    return out


def write_mentions(mentions: Iterable[Mention], path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        for m in mentions:
            fh.write(json.dumps(m.to_dict(), ensure_ascii=False) + "\n")
