"""``archivelink mine|link|classify|report`` command-line front end.

Each stage reads the files written by the previous one from the output
directory, so stages can be rerun independently::

    archivelink mine     --config run.ini
    archivelink link     --config run.ini --fixture path/to/archive
    archivelink classify --config run.ini
    archivelink report   --config run.ini

The config file is a flat ``key = value`` document (an optional
``[archivelink]`` section header is accepted). Every key can be overridden
by an ``ARCHIVELINK_<KEY>`` environment variable, and flags override both.
Relative paths in the config file are resolved against its directory.

Exit codes: 0 ok, 2 input/validation error, 3 I/O error, 4 archive unreachable.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import content, linker, mentions, report
from .archive import DEFAULT_RATE_LIMIT, DEFAULT_RETRIES, ArchiveBackend, FixtureBackend, RemoteBackend
from .catalog import load_catalog
from .errors import BackendError, CatalogParseError, CatalogValidationError

logger = logging.getLogger("archivelink")

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_BACKEND = 0, 2, 3, 4
ENV_PREFIX = "ARCHIVELINK_"
SECTION = "archivelink"

PATH_KEYS = ("software", "publications", "fixture", "cache_dir", "lexicon", "rules", "out")
KNOWN_KEYS = PATH_KEYS + ("endpoint", "replay", "rate_limit", "workers", "retries",
                          "keep_all_statuses", "offline")

MENTIONS_FILE = "mentions.jsonl"
LINKS_FILE = "links.jsonl"
PROFILES_FILE = "profiles.jsonl"


class UsageError(Exception):
    """Bad configuration or missing stage input (exit 2)."""


@dataclass
class PipelineConfig:
    software: Optional[Path] = None
    publications: Optional[Path] = None
    fixture: Optional[Path] = None
    endpoint: Optional[str] = None
    replay: Optional[str] = None
    cache_dir: Optional[Path] = None
    rate_limit: float = DEFAULT_RATE_LIMIT
    workers: int = 4
    retries: int = DEFAULT_RETRIES
    lexicon: Optional[Path] = None
    rules: Optional[Path] = None
    out: Path = Path("out")
    keep_all_statuses: bool = False
    offline: bool = False

    def backend(self) -> ArchiveBackend:
        if self.fixture and self.endpoint:
            raise UsageError("configure either a fixture directory or a remote endpoint, not both")
        if self.fixture:
            return FixtureBackend(self.fixture, cache_dir=self.cache_dir, rate_limit=self.rate_limit)
        if self.endpoint:
            return RemoteBackend(self.endpoint, self.replay, cache_dir=self.cache_dir,
                                 rate_limit=self.rate_limit, retries=self.retries,
                                 offline=self.offline)
        raise UsageError("no archive backend configured (set 'fixture' or 'endpoint')")

    def require_catalog(self) -> tuple[Path, Path]:
        if not self.software or not self.publications:
            raise UsageError("catalog paths 'software' and 'publications' must be configured")
        return self.software, self.publications


def _parse_bool(value: str) -> bool:
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off", ""):
        return False
    raise UsageError(f"not a boolean: {value!r}")


def read_config_file(path) -> dict[str, str]:
    text = Path(path).read_text(encoding="utf-8")
    if not text.lstrip().startswith("["):
        text = f"[{SECTION}]\n" + text
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise UsageError(f"bad config file {path}: {exc}") from None
    values = dict(parser[SECTION]) if parser.has_section(SECTION) else {}
    unknown = set(values) - set(KNOWN_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys in {path}: {sorted(unknown)}")
    base = Path(path).parent
    for key in PATH_KEYS:
        if values.get(key):
            values[key] = str(base / values[key])
    return values


def build_config(args: argparse.Namespace, environ=os.environ) -> PipelineConfig:
    values: dict[str, str] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in KNOWN_KEYS:
        env = environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            values[key] = env
    flags = {"fixture": args.fixture, "out": args.out, "rate_limit": args.rate_limit,
             "workers": args.workers, "cache_dir": args.cache_dir}
    values.update({k: str(v) for k, v in flags.items() if v is not None})
    if args.keep_all_statuses:
        values["keep_all_statuses"] = "true"
    if args.offline:
        values["offline"] = "true"

    cfg = PipelineConfig()
    try:
        for key in PATH_KEYS:
            if values.get(key):
                setattr(cfg, key, Path(values[key]))
        cfg.endpoint = values.get("endpoint") or None
        cfg.replay = values.get("replay") or None
        if "rate_limit" in values:
            cfg.rate_limit = float(values["rate_limit"])
        if "workers" in values:
            cfg.workers = int(values["workers"])
        if "retries" in values:
            cfg.retries = int(values["retries"])
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}") from None
    cfg.keep_all_statuses = _parse_bool(values.get("keep_all_statuses", "false"))
    cfg.offline = _parse_bool(values.get("offline", "false"))
    if cfg.rate_limit <= 0:
        raise UsageError("rate_limit must be > 0")
    if cfg.retries < 0:
        raise UsageError("retries must be >= 0")
    if cfg.workers < 1:
        raise UsageError("workers must be >= 1")
    return cfg


def _require_file(path: Path, stage: str) -> Path:
    if not path.is_file():
        raise UsageError(f"{path} not found; run '{stage}' first")
    return path


def cmd_mine(cfg: PipelineConfig) -> int:
    index = load_catalog(*cfg.require_catalog())
    lex = mentions.TriggerLexicon.from_file(cfg.lexicon) if cfg.lexicon else mentions.TriggerLexicon.default()
    found = mentions.mine_catalog(index, lex)
    cfg.out.mkdir(parents=True, exist_ok=True)
    mentions.write_mentions(found, cfg.out / MENTIONS_FILE)
    logger.info("wrote %d mentions", len(found))
    return EXIT_OK


def cmd_link(cfg: PipelineConfig) -> int:
    index = load_catalog(*cfg.require_catalog())
    backend = cfg.backend()
    results, failures = linker.link_all(index, backend, workers=cfg.workers,
                                        keep_all_statuses=cfg.keep_all_statuses)
    if failures and not results and all(isinstance(e, BackendError) for _, e in failures):
        logger.error("archive unreachable: %s", failures[0][1])
        return EXIT_BACKEND
    cfg.out.mkdir(parents=True, exist_ok=True)
    linker.write_link_results(results, cfg.out / LINKS_FILE)
    logger.info("linked %d softwares (%d failed)", len(results), len(failures))
    return EXIT_OK


def cmd_classify(cfg: PipelineConfig) -> int:
    results = linker.read_link_results(_require_file(cfg.out / LINKS_FILE, "link"))
    backend = cfg.backend()
    if isinstance(backend, FixtureBackend):
        try:
            backend._check()
        except BackendError as exc:
            logger.error("%s", exc)
            return EXIT_BACKEND
    rules = content.load_rules(cfg.rules)
    profiles = []
    for lr in results:
        prof = content.profile_software(lr, backend, rules)
        if prof is not None:
            profiles.append((lr.software_id, prof))
    content.write_profiles(profiles, cfg.out / PROFILES_FILE)
    logger.info("profiled %d of %d softwares", len(profiles), len(results))
    return EXIT_OK


def cmd_report(cfg: PipelineConfig) -> int:
    results = linker.read_link_results(_require_file(cfg.out / LINKS_FILE, "link"))
    profiles = content.read_profiles(_require_file(cfg.out / PROFILES_FILE, "classify"))
    yearly = report.aggregate_yearly(results)
    cats = report.aggregate_categories(profiles, results)
    report.emit(yearly, "csv", cfg.out / "yearly.csv")
    report.emit(yearly, "json", cfg.out / "yearly.json")
    report.emit(yearly, "plotdata", cfg.out / "plotdata.csv")
    report.emit(cats, "csv", cfg.out / "categories.csv")
    report.emit(cats, "json", cfg.out / "categories.json")
    return EXIT_OK


COMMANDS = {"mine": cmd_mine, "link": cmd_link, "classify": cmd_classify, "report": cmd_report}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="archivelink",
                                     description="Link software records to web archive captures.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--fixture", help="read captures from a fixture archive directory")
    parser.add_argument("--out", help="output directory (default: out)")
    parser.add_argument("--cache-dir", help="on-disk cache for CDX queries and bodies")
    parser.add_argument("--rate-limit", type=float, help="max archive requests per second")
    parser.add_argument("--workers", type=int, help="concurrent linking workers")
    parser.add_argument("--keep-all-statuses", action="store_true",
                        help="count captures of any HTTP status, not only 200")
    parser.add_argument("--offline", action="store_true",
                        help="never touch the network; serve remote queries from cache only")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, CatalogParseError, CatalogValidationError, ValueError) as exc:
        print(f"archivelink: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BackendError as exc:
        print(f"archivelink: archive unreachable: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except OSError as exc:
        print(f"archivelink: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
