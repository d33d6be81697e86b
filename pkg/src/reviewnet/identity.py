"""Clustering contributor name spellings into persons.

Two names are linked when their normalized Levenshtein similarity is
strictly above a threshold (0.85 by default).  Clusters are the transitive
closure of those links, adjusted by a manual override file.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from reviewnet.errors import ConflictingOverride, Diagnostic, InputError
from reviewnet.parallel import worker_count

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.85
# below this many aliases a process pool costs more than it saves
_PARALLEL_MIN_ALIASES = 3000
_BLOCK = 256


def levenshtein(s1: str, s2: str) -> int:
    """Unit-cost insert/delete/substitute edit distance."""
    if s1 == s2:
        return 0
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    if not s2:
        return len(s1)
    prev = list(range(len(s2) + 1))
    for i, c1 in enumerate(s1, 1):
        cur = [i]
        for j, c2 in enumerate(s2, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (c1 != c2)))
        prev = cur
    return prev[-1]


def bounded_levenshtein(s1: str, s2: str, k: int) -> int:
    """Edit distance if it is at most ``k``, otherwise ``k + 1``.

    Only the diagonal band of width ``2k + 1`` is evaluated.
    """
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    n, m = len(s1), len(s2)
    over = k + 1
    if n - m > k:
        return over
    prev = [j if j <= k else over for j in range(m + 1)]
    for i in range(1, n + 1):
        cur = [over] * (m + 1)
        if i <= k:
            cur[0] = i
        best = cur[0]
        c1 = s1[i - 1]
        for j in range(max(1, i - k), min(m, i + k) + 1):
            v = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (c1 != s2[j - 1]))
            if v > over:
                v = over
            cur[j] = v
            if v < best:
                best = v
        if best > k:
            return over
        prev = cur
    return min(prev[m], over)


def similarity(s1: str, s2: str) -> float:
    """``1 - L(s1, s2) / max(|s1|, |s2|)``; two empty strings count as identical."""
    longest = max(len(s1), len(s2))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(s1, s2) / longest


def normalize_name(name: str) -> str:
    return " ".join(name.casefold().split())


def similarity_from_distance(dist: int, longest: int) -> float:
    return 1.0 if longest == 0 else 1.0 - dist / longest


def _linked(a: str, b: str, threshold: float) -> bool:
    """Same decision as ``similarity(a, b) > threshold``, with an early exit."""
    if a == b:
        return True
    longest = max(len(a), len(b))
    # similarity > threshold  <=>  distance < (1 - threshold) * longest;
    # the +1 keeps float rounding on the safe side, the exact test follows
    limit = int((1.0 - threshold) * longest) + 1
    dist = bounded_levenshtein(a, b, limit)
    return dist <= limit and similarity_from_distance(dist, longest) > threshold


@dataclass
class Alias:
    raw_name: str
    occurrence_count: int = 0
    emails_seen: set[str] = field(default_factory=set)


@dataclass(frozen=True)
class Override:
    action: str  # "merge" or "split"
    names: tuple[str, ...]
    line: str = ""


class UnionFind:
    def __init__(self, items: Iterable[str]):
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller key becomes root so the structure does not depend on call order
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def groups(self) -> list[list[str]]:
        out: dict[str, list[str]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return [sorted(g) for g in out.values()]


class IdentityTable:
    """Partition of raw name aliases into persons with dense, stable ids."""

    def __init__(self, aliases: Mapping[str, Alias], clusters: Iterable[Iterable[str]]):
        self.aliases = dict(aliases)
        canon = []
        for members in clusters:
            members = sorted(members)
            best = min(members, key=lambda n: (-self.aliases[n].occurrence_count, n))
            canon.append((best, members))
        canon.sort()
        self.canonical_names: list[str] = [c for c, _ in canon]
        self.members: list[list[str]] = [m for _, m in canon]
        self._person_of = {n: pid for pid, ms in enumerate(self.members) for n in ms}
        if len(self._person_of) != len(self.aliases):
            raise ValueError("clusters do not partition the alias set")

    def __len__(self) -> int:
        return len(self.canonical_names)

    def __contains__(self, raw_name: str) -> bool:
        return raw_name in self._person_of

    def person_of(self, raw_name: str) -> int | None:
        return self._person_of.get(raw_name)

    def clusters(self) -> list[frozenset[str]]:
        return [frozenset(m) for m in self.members]

    def emails_of(self, person_id: int) -> set[str]:
        out: set[str] = set()
        for name in self.members[person_id]:
            out |= self.aliases[name].emails_seen
        return out


def collect_aliases(names_with_emails: Iterable[tuple[str, str]]) -> dict[str, Alias]:
    aliases: dict[str, Alias] = {}
    for name, email in names_with_emails:
        alias = aliases.get(name)
        if alias is None:
            alias = aliases[name] = Alias(name)
        alias.occurrence_count += 1
        if email:
            alias.emails_seen.add(email)
    return aliases


def _links_for_block(args: tuple[list[str], int, float]) -> list[tuple[int, int]]:
    keys, start, threshold = args
    links = []
    n = len(keys)
    for i in range(start, min(start + _BLOCK, n)):
        a = keys[i]
        for j in range(i + 1, n):
            b = keys[j]
            # keys are sorted by length; longer partners only get less similar
            if len(b) - len(a) > (1.0 - threshold) * len(b) + 1e-9:
                break
            if _linked(a, b, threshold):
                links.append((i, j))
    return links



def _auto_links(normalized: list[str], threshold: float, workers: int) -> list[tuple[str, str]]:
    keys = sorted(set(normalized), key=lambda s: (len(s), s))
    tasks = [(keys, start, threshold) for start in range(0, len(keys), _BLOCK)]
    if workers > 1 and len(keys) >= _PARALLEL_MIN_ALIASES:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_links_for_block, tasks))
    else:
        results = [_links_for_block(t) for t in tasks]
    return [(keys[i], keys[j]) for block in results for i, j in block]


def resolve_identities(
    aliases: Mapping[str, Alias],
    threshold: float = DEFAULT_THRESHOLD,
    overrides: Iterable[Override] = (),
    workers: int | None = None,
    issues: list[Diagnostic] | None = None,
) -> IdentityTable:
    """Cluster aliases whose normalized names are more than ``threshold`` similar.

    Names are case-folded and whitespace-collapsed first, so spellings that
    normalize identically always end up together.  Overrides are applied
    after the automatic linking.
    """
    if not 0.0 < threshold <= 1.0:
        raise InputError(f"threshold must lie in (0, 1], got {threshold}")
    overrides = list(overrides)
    check_overrides(overrides)

    by_norm: dict[str, list[str]] = {}
    for raw in aliases:
        by_norm.setdefault(normalize_name(raw), []).append(raw)

    uf = UnionFind(aliases)
    for raws in by_norm.values():
        for other in raws[1:]:
            uf.union(raws[0], other)
    for a, b in _auto_links(list(by_norm), threshold, workers or worker_count()):
        uf.union(by_norm[a][0], by_norm[b][0])

    table = IdentityTable(aliases, uf.groups())
    return apply_overrides(table, overrides, issues=issues)


def check_overrides(overrides: list[Override]) -> None:
    split = {o.names[0]: o for o in overrides if o.action == "split"}
    bad = []
    for o in overrides:
        if o.action == "merge":
            for name in o.names:
                if name in split:
                    bad.extend([o.line or f"merge {o.names}", split[name].line or f"split {name}"])
    if bad:
        raise ConflictingOverride(bad)


def apply_overrides(
    table: IdentityTable,
    overrides: Iterable[Override],
    issues: list[Diagnostic] | None = None,
) -> IdentityTable:
    """Force merges and splits onto an existing table; returns a new table.

    Merges are applied first, then every split alias is moved to a cluster
    of its own.  Directives naming unknown aliases are skipped with a warning.
    """
    overrides = list(overrides)
    if not overrides:
        return table
    check_overrides(overrides)

    uf = UnionFind(table.aliases)
    for members in table.members:
        for other in members[1:]:
            uf.union(members[0], other)

    def known(o: Override) -> bool:
        missing = [n for n in o.names if n not in table]
        if missing:
            diag = Diagnostic("UNKNOWN_ALIAS", f"override names unseen alias(es) {missing}", o.line)
            log.warning("%s", diag)
            if issues is not None:
                issues.append(diag)
            return False
        return True

    for o in overrides:
        if o.action == "merge" and known(o):
            uf.union(o.names[0], o.names[1])

    groups = uf.groups()
    pinned = {o.names[0] for o in overrides if o.action == "split" and known(o)}
    clusters = []
    for g in groups:
        rest = [n for n in g if n not in pinned]
        if rest:
            clusters.append(rest)
        clusters.extend([n] for n in g if n in pinned)
    return IdentityTable(table.aliases, clusters)


def read_overrides(path: str | Path) -> list[Override]:
    """Read a tab-separated override file (``merge a b`` / ``split a`` lines)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.rstrip("\r\n")
            if not text.strip() or text.lstrip().startswith("#"):
                continue
            parts = text.split("\t")
            where = f"{path}:{lineno}: {text}"
            if parts[0] == "merge" and len(parts) == 3:
                out.append(Override("merge", (parts[1], parts[2]), where))
            elif parts[0] == "split" and len(parts) == 2:
                out.append(Override("split", (parts[1],), where))
            else:
                raise InputError(f"bad override directive at {where!r}")
    return out
