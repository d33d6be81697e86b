"""Command line entry point: ``reviewnet mine | report | maintainers-help``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from reviewnet import __version__
from reviewnet.attributes import MAINTAINERS_HOWTO, AffiliationMap
from reviewnet.errors import EmptyGrid, InputError, InvariantViolation
from reviewnet.identity import DEFAULT_THRESHOLD, read_overrides
from reviewnet.ingest import parse_commit_stream
from reviewnet.parallel import worker_count
from reviewnet.pipeline import MineConfig, mine
from reviewnet.report import (
    FORMATS,
    Bundle,
    emit_tables,
    load_bundle,
    write_graphml_files,
    write_manifest,
)

log = logging.getLogger("reviewnet")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2


def _subsystems(text: str) -> list[str] | None:
    if text.strip().lower() == "all":
        return None
    subs = [s.strip() for s in text.split(",") if s.strip()]
    if not subs:
        raise argparse.ArgumentTypeError("empty subsystem list")
    return subs


def _threshold(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError("threshold must lie in (0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reviewnet",
        description="Peer-review networks and homophily metrics from commit trailers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("mine", help="build networks and metrics from a canonical commit log")
    m.add_argument("--input", required=True, help="canonical log file, or - for stdin")
    m.add_argument("--from", dest="first", type=int, required=True, help="first year (inclusive)")
    m.add_argument("--to", dest="last", type=int, required=True, help="last year (inclusive)")
    m.add_argument("--window", choices=["yearly"], default="yearly")
    m.add_argument("--subsystems", type=_subsystems, default=None,
                   help="comma-separated top-level directories, or 'all' (default)")
    m.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD,
                   help="name similarity must exceed this to merge (default 0.85)")
    m.add_argument("--affiliations", help="domain<TAB>organization map (default: built-in starter map)")
    m.add_argument("--identity-overrides", help="merge/split override file")
    m.add_argument("--maintainers-dir", help="directory of <window>.snapshot / <window>.added files")
    m.add_argument("--subsystem-attribution", choices=["all", "first"], default="all")
    m.add_argument("--orgs", help="comma-separated organizations for box-plot charts (default: top 3)")
    m.add_argument("--out", required=True, help="output directory")

    r = sub.add_parser("report", help="re-emit output files from an existing report.json")
    r.add_argument("--in", dest="indir", required=True)
    r.add_argument("--format", choices=[*FORMATS, "all"], default="all")
    r.add_argument("--out", help="output directory (default: the input directory)")
    r.add_argument("--orgs", help="comma-separated organizations for box-plot charts")

    h = sub.add_parser("maintainers-help", help="print how to export MAINTAINERS history from git")
    h.add_argument("--from", dest="first", type=int, default=2006)
    h.add_argument("--to", dest="last", type=int, default=2014)
    return parser


def _clear_previous(out: Path) -> None:
    """Remove files listed by an earlier run's manifest (and nothing else)."""
    manifest = out / "manifest.json"
    if not manifest.is_file():
        return
    try:
        listed = json.loads(manifest.read_text(encoding="utf-8")).get("files", [])
    except (json.JSONDecodeError, AttributeError):
        return
    root = out.resolve()
    for entry in listed:
        path = (out / entry["path"]).resolve()
        if root in path.parents and path.is_file():
            path.unlink()
    manifest.unlink()


def write_outputs(bundle: Bundle, out: Path, formats: set[str], orgs=None, workers: int = 1) -> None:
    out.mkdir(parents=True, exist_ok=True)
    emit_tables(bundle, out, csv_files="csv" in formats, json_file="json" in formats)
    if "graphml" in formats:
        write_graphml_files(bundle, out, workers)
    if "svg" in formats:
        from reviewnet.plotting import emit_svg_charts

        emit_svg_charts(bundle.report, out, orgs)
    write_manifest(out)


def _orgs(text: str | None) -> list[str] | None:
    return None if text is None else [o.strip() for o in text.split(",") if o.strip()]


def cmd_mine(args) -> int:
    workers = worker_count()
    amap = AffiliationMap.from_tsv(args.affiliations) if args.affiliations else AffiliationMap.builtin()
    overrides = read_overrides(args.identity_overrides) if args.identity_overrides else []
    config = MineConfig(
        first_year=args.first,
        last_year=args.last,
        subsystems=args.subsystems,
        threshold=args.threshold,
        attribution=args.subsystem_attribution,
        workers=workers,
    )
    issues = []
    if args.input == "-":
        records = list(parse_commit_stream(sys.stdin.buffer, issues))
    else:
        try:
            with open(args.input, "rb") as fh:
                records = list(parse_commit_stream(fh, issues))
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc.strerror}") from None

    result = mine(records, config, amap, overrides, args.maintainers_dir, issues=issues)
    parameters = {
        "from": args.first,
        "to": args.last,
        "window": args.window,
        "subsystems": args.subsystems or "all",
        "threshold": args.threshold,
        "subsystem_attribution": args.subsystem_attribution,
        "commits": result.commit_count,
        "qualified_trailers": result.trailer_count,
        "persons": len(result.identities),
    }
    bundle = Bundle.from_result(result, parameters)
    out = Path(args.out)
    _clear_previous(out)
    write_outputs(bundle, out, set(FORMATS), _orgs(args.orgs), workers)

    counts = Counter(d.code for d in issues)
    for code, n in sorted(counts.items()):
        log.warning("%s: %d", code, n)
    log.info("wrote %d networks to %s", len(result.networks), out)
    return EXIT_OK


def cmd_report(args) -> int:
    bundle = load_bundle(args.indir)
    formats = set(FORMATS) if args.format == "all" else {args.format}
    out = Path(args.out) if args.out else Path(args.indir)
    write_outputs(bundle, out, formats, _orgs(args.orgs), worker_count())
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="reviewnet: %(levelname)s: %(message)s",
    )
    try:
        if args.command == "mine":
            return cmd_mine(args)
        if args.command == "report":
            return cmd_report(args)
        print(MAINTAINERS_HOWTO.format(first=args.first, last=args.last))
        return EXIT_OK
    except (InputError, EmptyGrid, OSError) as exc:
        print(f"reviewnet: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantViolation, AssertionError) as exc:
        print(f"reviewnet: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
