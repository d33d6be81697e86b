"""Weighted directed review networks.

Entry ``(x, y)`` of a network counts how many times node ``x`` appeared as a
signer, acker or reviewer on commits authored by node ``y``: rows are
reviewers, columns are authors.  An author's own sign-off lands on the
diagonal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

from reviewnet.errors import Diagnostic, UnknownNode
from reviewnet.identity import IdentityTable
from reviewnet.ingest import CommitRecord
from reviewnet.trailers import Trailer, TrailerKind

log = logging.getLogger(__name__)

KINDS = (TrailerKind.SIGNED, TrailerKind.ACKED, TrailerKind.REVIEWED)
_KIND_SLOT = {k: i for i, k in enumerate(KINDS)}

Edge = tuple[int, int]


@dataclass
class ReviewNetwork:
    window: str
    subsystem: str
    nodes: list[int]
    # (reviewer_index, author_index) -> count; absent means zero
    weights: dict[Edge, int] = field(default_factory=dict)
    # per edge: counts of (signed, acked, reviewed)
    kind_breakdown: dict[Edge, tuple[int, int, int]] = field(default_factory=dict)
    unresolved: int = 0

    def __post_init__(self):
        self._index = {pid: i for i, pid in enumerate(self.nodes)}

    def __len__(self) -> int:
        return len(self.nodes)

    def index_of(self, person_id: int) -> int:
        try:
            return self._index[person_id]
        except KeyError:
            raise UnknownNode(person_id) from None

    def weight(self, reviewer: int, author: int) -> int:
        """Weight between two person ids (zero when absent)."""
        return self.weights.get((self.index_of(reviewer), self.index_of(author)), 0)

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """``(reviewer_id, author_id, weight)`` in row-major node order."""
        for (r, a), w in sorted(self.weights.items()):
            yield self.nodes[r], self.nodes[a], w

    def kinds(self, reviewer: int, author: int) -> tuple[int, int, int]:
        key = (self.index_of(reviewer), self.index_of(author))
        return self.kind_breakdown.get(key, (0, 0, 0))

    @property
    def total_weight(self) -> int:
        return sum(self.weights.values())

    def to_dense(self) -> list[list[int]]:
        n = len(self.nodes)
        rows = [[0] * n for _ in range(n)]
        for (r, a), w in self.weights.items():
            rows[r][a] = w
        return rows

    def scaled(self, k: int) -> "ReviewNetwork":
        """Copy with every weight (and kind count) multiplied by ``k``."""
        return replace(
            self,
            nodes=list(self.nodes),
            weights={e: w * k for e, w in self.weights.items()},
            kind_breakdown={e: tuple(c * k for c in ks) for e, ks in self.kind_breakdown.items()},
        )


def build_network(
    commits: Iterable[tuple[CommitRecord, Sequence[Trailer]]],
    identities: IdentityTable,
    subsystem: str,
    window: str,
    issues: list[Diagnostic] | None = None,
) -> ReviewNetwork:
    """Count reviewer -> author trailer occurrences for one (subsystem, window) slice.

    Every qualified trailer adds one to its cell, including repeated
    trailers by the same person and the author's own sign-off.  Trailers
    whose name is missing from ``identities`` are dropped and counted.
    """
    counts: dict[tuple[int, int], list[int]] = {}
    people: set[int] = set()
    unresolved = 0

    for record, trailers in commits:
        author = identities.person_of(record.author_name)
        if author is None:
            unresolved += 1
            _unresolved(issues, record.author_name, record.hash, "author")
            continue
        people.add(author)
        for t in trailers:
            reviewer = identities.person_of(t.raw_name)
            if reviewer is None:
                unresolved += 1
                _unresolved(issues, t.raw_name, record.hash, t.kind.value)
                continue
            people.add(reviewer)
            slot = counts.setdefault((reviewer, author), [0, 0, 0])
            slot[_KIND_SLOT[t.kind]] += 1

    nodes = sorted(people)
    index = {pid: i for i, pid in enumerate(nodes)}
    weights = {}
    breakdown = {}
    for (reviewer, author), ks in counts.items():
        key = (index[reviewer], index[author])
        weights[key] = sum(ks)
        breakdown[key] = tuple(ks)
    return ReviewNetwork(window, subsystem, nodes, weights, breakdown, unresolved)


def _unresolved(issues, name, commit, role) -> None:
    diag = Diagnostic("UNRESOLVED_NAME", f"{role} name {name!r} has no identity", commit[:12])
    log.debug("%s", diag)
    if issues is not None:
        issues.append(diag)


def diagonal(net: ReviewNetwork) -> list[int]:
    """Self-entries per node, in node order (the node's own sign-offs)."""
    return [net.weights.get((i, i), 0) for i in range(len(net.nodes))]


def strip_diagonal(net: ReviewNetwork) -> ReviewNetwork:
    """Analysis view without self-review entries; ``net`` is left untouched."""
    return replace(
        net,
        nodes=list(net.nodes),
        weights={e: w for e, w in net.weights.items() if e[0] != e[1]},
        kind_breakdown={e: ks for e, ks in net.kind_breakdown.items() if e[0] != e[1]},
    )


def out_strength(net: ReviewNetwork, person_id: int) -> int:
    """Row sum for ``person_id``: total reviews this node performed.

    Pass a diagonal-stripped network to exclude self sign-offs.
    """
    row = net.index_of(person_id)
    return sum(w for (r, _), w in net.weights.items() if r == row)


def in_strength(net: ReviewNetwork, person_id: int) -> int:
    col = net.index_of(person_id)
    return sum(w for (_, a), w in net.weights.items() if a == col)


def strengths(net: ReviewNetwork) -> tuple[list[int], list[int]]:
    """Out- and in-strength of every node in one pass, in node order."""
    out = [0] * len(net.nodes)
    inn = [0] * len(net.nodes)
    for (r, a), w in net.weights.items():
        out[r] += w
        inn[a] += w
    return out, inn
