"""Per-year status counts and per-category page statistics.

All serialized fractions are rounded half-to-even to four decimals from the
exact rational value, so output files are byte-stable across platforms.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .content import CATEGORIES, ContentProfile
from .linker import LinkResult, LinkStatus

YEARLY_HEADER = ("year", "total", "archived", "past_archived", "past_changed")
CATEGORY_HEADER = ("category", "count", "denom_all", "denom_profiled", "fraction_all", "fraction_profiled")
PLOTDATA_HEADER = ("year", "frac_archived", "frac_past_archived", "frac_past_changed")


def ratio(num: int, denom: int) -> Fraction:
    return Fraction(num, denom) if denom else Fraction(0)


def fmt4(value: Fraction) -> str:
    """'0.6667' for 2/3; Python's round on a Fraction is exact half-to-even."""
    q = round(Fraction(value), 4)
    scaled = q.numerator * (10000 // q.denominator)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10000)
    return f"{sign}{whole}.{frac:04d}"


@dataclass(frozen=True)
class YearlyStats:
    year: int
    total: int
    archived: int
    past_archived: int
    past_changed: int

    def __post_init__(self):
        if not 0 <= self.past_changed <= self.past_archived <= self.archived <= self.total:
            raise ValueError(f"inconsistent counts: {self}")

    def row(self) -> list[str]:
        return [str(self.year), str(self.total), str(self.archived),
                str(self.past_archived), str(self.past_changed)]

    def plot_row(self) -> list[str]:
        return [str(self.year),
                fmt4(ratio(self.archived, self.total)),
                fmt4(ratio(self.past_archived, self.total)),
                fmt4(ratio(self.past_changed, self.total))]


@dataclass(frozen=True)
class CategoryStats:
    category: str
    count: int
    denom_all: int
    denom_profiled: int

    @property
    def fraction_all(self) -> float:
        return float(ratio(self.count, self.denom_all))

    @property
    def fraction_profiled(self) -> float:
        return float(ratio(self.count, self.denom_profiled))

    def row(self) -> list[str]:
        return [self.category, str(self.count), str(self.denom_all), str(self.denom_profiled),
                fmt4(ratio(self.count, self.denom_all)),
                fmt4(ratio(self.count, self.denom_profiled))]


def aggregate_yearly(results: Iterable[LinkResult]) -> list[YearlyStats]:
    counts: dict[int, Counter] = {}
    for r in results:
        c = counts.setdefault(r.top_year, Counter())
        c["total"] += 1
        if r.status is not LinkStatus.NOT_ARCHIVED:
            c["archived"] += 1
        if r.status is LinkStatus.PAST_ARCHIVED:
            c["past_archived"] += 1
            if r.changed:
                c["past_changed"] += 1
    return [YearlyStats(year, c["total"], c["archived"], c["past_archived"], c["past_changed"])
            for year, c in sorted(counts.items())]


def aggregate_categories(profiles: Iterable[ContentProfile | tuple[str, ContentProfile]],
                         results: Sequence[LinkResult]) -> list[CategoryStats]:
    """Five rows; ``denom_all`` counts every linked software, ``denom_profiled`` only profiled ones."""
    profs = [p[1] if isinstance(p, tuple) else p for p in profiles]
    n_all, n_prof = len(results), len(profs)
    return [CategoryStats(cat, sum(getattr(p, cat) for p in profs), n_all, n_prof)
            for cat in CATEGORIES]


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def render(stats: Sequence[YearlyStats] | Sequence[CategoryStats], fmt: str) -> str:
    """Serialize stats as ``csv``, ``json`` or (yearly only) ``plotdata``."""
    yearly = all(isinstance(s, YearlyStats) for s in stats)
    if fmt == "csv":
        return _csv_text(YEARLY_HEADER if yearly else CATEGORY_HEADER, (s.row() for s in stats))
    if fmt == "plotdata":
        if not yearly:
            raise ValueError("plotdata is only defined for yearly stats")
        return _csv_text(PLOTDATA_HEADER, (s.plot_row() for s in stats))
    if fmt == "json":
        header = YEARLY_HEADER if yearly else CATEGORY_HEADER
        records = []
        for s in stats:
            rec = dict(zip(header, s.row()))
            for key in header:
                if key != "category":
                    # exact decimal text, parsed back as a JSON number
                    rec[key] = json.loads(rec[key])
            records.append(rec)
        return json.dumps(records, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit(stats, fmt: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render(stats, fmt))


def read_yearly_csv(path) -> list[YearlyStats]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [YearlyStats(*(int(row[k]) for k in YEARLY_HEADER)) for row in csv.DictReader(fh)]


def read_categories_csv(path) -> list[CategoryStats]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [CategoryStats(row["category"], int(row["count"]), int(row["denom_all"]),
                              int(row["denom_profiled"]))
                for row in csv.DictReader(fh)]
