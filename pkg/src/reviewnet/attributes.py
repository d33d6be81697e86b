"""Node attributes: maintainership per window and organizational affiliation."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from reviewnet.errors import Diagnostic, InputError
from reviewnet.identity import IdentityTable

log = logging.getLogger(__name__)

UNAFFILIATED = "UNAFFILIATED"


def _report(issues: list[Diagnostic] | None, diag: Diagnostic) -> None:
    log.warning("%s", diag)
    if issues is not None:
        issues.append(diag)


@dataclass(frozen=True)
class MaintainerSet:
    window: str
    members: frozenset[int]

    def __contains__(self, person_id: int) -> bool:
        return person_id in self.members


@dataclass(frozen=True)
class PersonAttributes:
    person_id: int
    window: str
    is_maintainer: bool
    affiliation: str


class AffiliationMap:
    """Lookup from e-mail domain to organization name."""

    def __init__(self, domain_to_org: Mapping[str, str] | None = None):
        self.domain_to_org: dict[str, str] = {}
        for domain, org in (domain_to_org or {}).items():
            domain = domain.strip().lower()
            org = org.strip()
            if not domain or not org:
                raise InputError(f"empty domain or organization in mapping {domain!r} -> {org!r}")
            if org == UNAFFILIATED:
                raise InputError(f"{UNAFFILIATED} is reserved and cannot be an organization name")
            self.domain_to_org[domain] = org

    def __len__(self) -> int:
        return len(self.domain_to_org)

    def get(self, domain: str) -> str | None:
        return self.domain_to_org.get(domain)

    @classmethod
    def from_tsv(cls, path: str | Path) -> "AffiliationMap":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh, source=str(path))

    @classmethod
    def parse(cls, lines: Iterable[str], source: str = "<map>") -> "AffiliationMap":
        mapping = {}
        for lineno, line in enumerate(lines, 1):
            text = line.rstrip("\r\n")
            if not text.strip() or text.lstrip().startswith("#"):
                continue
            parts = text.split("\t")
            if len(parts) != 2:
                raise InputError(f"{source}:{lineno}: expected 'domain<TAB>organization', got {text!r}")
            mapping[parts[0]] = parts[1]
        return cls(mapping)

    @classmethod
    def builtin(cls) -> "AffiliationMap":
        """The starter map of well-known kernel contributor domains."""
        text = resources.files("reviewnet").joinpath("data/domains.tsv").read_text(encoding="utf-8")
        return cls.parse(text.splitlines(), source="domains.tsv")


def email_domain(email: str) -> str | None:
    _, at, domain = email.strip().rpartition("@")
    if not at:
        return None
    # the trailer grammar accepts a comma where the dot belongs
    return domain.strip().strip(">").replace(",", ".").rstrip(".").lower()


def extract_affiliation(
    email: str, amap: AffiliationMap, issues: list[Diagnostic] | None = None
) -> str:
    """Organization for an e-mail address, or ``UNAFFILIATED``.

    The last two domain labels are looked up first (``linux.intel.com`` ->
    ``intel.com``), then the full domain.
    """
    domain = email_domain(email)
    if domain is None:
        _report(issues, Diagnostic("NO_AT_SIGN", f"no '@' in e-mail {email!r}"))
        return UNAFFILIATED
    labels = domain.split(".")
    for candidate in (".".join(labels[-2:]), domain):
        org = amap.get(candidate)
        if org is not None:
            return org
    return UNAFFILIATED


def assign_person_affiliation(window_emails: Iterable[str] | Counter, amap: AffiliationMap) -> str:
    """Majority organization over a person's e-mails in one window.

    Unmapped addresses only win when no address maps to an organization;
    ties go to the alphabetically first organization.
    """
    emails = window_emails if isinstance(window_emails, Counter) else Counter(window_emails)
    votes: Counter = Counter()
    for email, n in emails.items():
        org = extract_affiliation(email, amap)
        if org != UNAFFILIATED:
            votes[org] += n
    if not votes:
        return UNAFFILIATED
    return min(votes, key=lambda org: (-votes[org], org))


def extract_maintainers(
    first_snapshot: str,
    added_lines: Iterable[str],
    identities: IdentityTable,
    window: str,
    issues: list[Diagnostic] | None = None,
) -> MaintainerSet:
    """Persons whose name (any alias) occurs in the MAINTAINERS evidence of a window.

    Matching is a case-insensitive substring search over the file as it
    stood at the window's first revision plus every line added to it during
    the window.
    """
    if not first_snapshot.strip():
        _report(issues, Diagnostic("EMPTY_SNAPSHOT", "MAINTAINERS snapshot is empty", window))
    haystacks = [first_snapshot.casefold()]
    haystacks.extend(line.casefold() for line in added_lines)
    text = "\n".join(haystacks)

    members = set()
    for pid, names in enumerate(identities.members):
        for name in names:
            needle = name.strip().casefold()
            if needle and needle in text:
                members.add(pid)
                break
    return MaintainerSet(window, frozenset(members))


def load_maintainers_dir(
    directory: str | Path,
    windows: Iterable[str],
    identities: IdentityTable,
    issues: list[Diagnostic] | None = None,
) -> dict[str, MaintainerSet]:
    """Read ``<window>.snapshot`` / ``<window>.added`` pairs for each window."""
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"maintainers directory {directory} does not exist")
    out = {}
    for label in windows:
        snap = directory / f"{label}.snapshot"
        added = directory / f"{label}.added"
        snapshot = snap.read_text(encoding="utf-8", errors="replace") if snap.exists() else ""
        lines = added.read_text(encoding="utf-8", errors="replace").splitlines() if added.exists() else []
        if not snap.exists() and not added.exists():
            _report(issues, Diagnostic("MISSING_MAINTAINERS", f"no {snap.name} or {added.name}", str(directory)))
        out[label] = extract_maintainers(snapshot, lines, identities, label, issues)
    return out


MAINTAINERS_HOWTO = """\
Producing the maintainers history directory from a git checkout
==============================================================

For each window (calendar year YEAR) two files are needed:

  YEAR.snapshot  MAINTAINERS as of the first commit of the year
  YEAR.added     every line added to MAINTAINERS during the year

  DIR=maintainers; mkdir -p "$DIR"
  for YEAR in $(seq {first} {last}); do
    FIRST=$(git rev-list --reverse --since="$YEAR-01-01T00:00:00Z" \\
            --until="$((YEAR+1))-01-01T00:00:00Z" HEAD | head -n1)
    git show "$FIRST:MAINTAINERS" > "$DIR/$YEAR.snapshot"
    git log --reverse --format= -p --since="$YEAR-01-01T00:00:00Z" \\
            --until="$((YEAR+1))-01-01T00:00:00Z" -- MAINTAINERS \\
      | grep '^+' | grep -v '^+++' | cut -c2- > "$DIR/$YEAR.added"
  done

git's --since/--until filter on the commit date, matching how reviewnet
buckets commits into windows.
"""
