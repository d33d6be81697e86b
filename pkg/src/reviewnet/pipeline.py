"""End-to-end mining: commit records in, networks and homophily report out."""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import timezone
from pathlib import Path
from typing import Iterable, Sequence

from reviewnet.attributes import (
    AffiliationMap,
    MaintainerSet,
    PersonAttributes,
    assign_person_affiliation,
    load_maintainers_dir,
)
from reviewnet.errors import Diagnostic, InvariantViolation
from reviewnet.graph import ReviewNetwork, build_network
from reviewnet.identity import (
    DEFAULT_THRESHOLD,
    IdentityTable,
    Override,
    collect_aliases,
    resolve_identities,
)
from reviewnet.ingest import CommitRecord, Window, attributed_subsystems, filter_commits, yearly_windows
from reviewnet.metrics import HomophilyReport, trend_series
from reviewnet.parallel import ordered_map, worker_count
from reviewnet.trailers import Trailer, extract_trailers

log = logging.getLogger(__name__)


@dataclass
class MineConfig:
    first_year: int
    last_year: int
    subsystems: list[str] | None = None  # None: every subsystem seen
    threshold: float = DEFAULT_THRESHOLD
    attribution: str = "all"
    workers: int | None = None

    def windows(self) -> list[Window]:
        return yearly_windows(self.first_year, self.last_year)


@dataclass
class MineResult:
    config: MineConfig
    identities: IdentityTable
    networks: list[ReviewNetwork]
    maintainers: dict[str, MaintainerSet]
    attributes: dict[str, dict[int, PersonAttributes]]
    report: HomophilyReport
    issues: list[Diagnostic] = field(default_factory=list)
    commit_count: int = 0
    trailer_count: int = 0


def window_label(record: CommitRecord) -> str:
    return str(record.commit_date.astimezone(timezone.utc).year)


def mine(
    records: Iterable[CommitRecord],
    config: MineConfig,
    affiliations: AffiliationMap | None = None,
    overrides: Sequence[Override] = (),
    maintainers_dir: str | Path | None = None,
    maintainer_sets: dict[str, MaintainerSet] | None = None,
    issues: list[Diagnostic] | None = None,
) -> MineResult:
    """Run the whole measurement over a stream of parsed commits.

    Maintainer evidence comes either from ``maintainers_dir`` or from
    ready-made ``maintainer_sets``; with neither, nobody is a maintainer.
    """
    issues = [] if issues is None else issues
    workers = config.workers if config.workers is not None else worker_count()
    windows = config.windows()
    labels = [w.label for w in windows]
    span = Window("span", windows[0].start, windows[-1].end)
    wanted = set(config.subsystems) if config.subsystems else None

    commits: list[tuple[CommitRecord, list[Trailer]]] = [
        (rec, extract_trailers(rec.body)) for rec in filter_commits(records, span)
    ]
    log.info("%d commits in %s..%s", len(commits), labels[0], labels[-1])

    aliases = collect_aliases(
        pair
        for rec, trailers in commits
        for pair in [(rec.author_name, rec.author_email)]
        + [(t.raw_name, t.raw_email) for t in trailers]
    )
    identities = resolve_identities(
        aliases, config.threshold, overrides, workers=workers, issues=issues
    )
    log.info("%d aliases resolved to %d persons", len(aliases), len(identities))

    slices: dict[tuple[str, str], list[tuple[CommitRecord, list[Trailer]]]] = defaultdict(list)
    emails: dict[str, dict[int, Counter]] = {label: defaultdict(Counter) for label in labels}
    for rec, trailers in commits:
        label = window_label(rec)
        seen = emails[label]
        seen[identities.person_of(rec.author_name)][rec.author_email] += 1
        for t in trailers:
            seen[identities.person_of(t.raw_name)][t.raw_email] += 1
        for sub in attributed_subsystems(rec, config.attribution):
            if wanted is None or sub in wanted:
                slices[(sub, label)].append((rec, trailers))

    keys = sorted(slices, key=lambda k: (k[1], k[0]))
    networks = ordered_map(
        lambda k: build_network(slices[k], identities, k[0], k[1]), keys, workers
    )
    for net, key in zip(networks, keys):
        expected = sum(len(t) for _, t in slices[key])
        if net.total_weight + net.unresolved != expected:
            raise InvariantViolation(
                f"{key}: matrix weight {net.total_weight} + {net.unresolved} unresolved "
                f"!= {expected} qualified trailers"
            )

    if maintainer_sets is None:
        if maintainers_dir is not None:
            maintainer_sets = load_maintainers_dir(maintainers_dir, labels, identities, issues)
        else:
            issues.append(Diagnostic("NO_MAINTAINERS", "no maintainers directory given"))
            maintainer_sets = {}
    maintainer_sets = {
        label: maintainer_sets.get(label, MaintainerSet(label, frozenset())) for label in labels
    }

    amap = affiliations if affiliations is not None else AffiliationMap()
    attributes: dict[str, dict[int, PersonAttributes]] = {}
    for label in labels:
        members = maintainer_sets[label]
        attributes[label] = {
            pid: PersonAttributes(pid, label, pid in members, assign_person_affiliation(seen, amap))
            for pid, seen in sorted(emails[label].items())
        }

    subsystems = sorted(wanted) if wanted is not None else sorted({k[0] for k in slices})
    report = trend_series(networks, maintainer_sets, attributes, subsystems=subsystems, windows=labels)
    return MineResult(
        config=config,
        identities=identities,
        networks=networks,
        maintainers=maintainer_sets,
        attributes=attributes,
        report=report,
        issues=issues,
        commit_count=len(commits),
        trailer_count=sum(len(t) for _, t in commits),
    )
