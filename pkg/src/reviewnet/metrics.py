"""Homophily indices and descriptive statistics over review networks."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from reviewnet.attributes import UNAFFILIATED, MaintainerSet, PersonAttributes
from reviewnet.errors import EmptyGrid, InvariantViolation
from reviewnet.graph import ReviewNetwork, diagonal, strengths, strip_diagonal


@dataclass(frozen=True)
class ReviewRatio:
    """Share of a node's reviews that target a group.

    ``value`` is None when the node does not carry the attribute the index
    is defined for.  A qualifying node without any reviews gets 0.
    """

    person_id: int
    value: float | None
    basis: int
    defined: bool


class GroupStats(NamedTuple):
    mean: float
    sd: float
    n: int

    @property
    def empty(self) -> bool:
        return self.n == 0

    @property
    def degenerate(self) -> bool:
        return self.n < 2


def group_stats(values: Iterable[float], scale: float = 100.0) -> GroupStats:
    """Mean and sample (n - 1) standard deviation, multiplied by ``scale``.

    Empty input gives ``(0, 0, 0)``; a single value has sd 0.
    """
    vals = [float(v) for v in values]
    if not vals:
        return GroupStats(0.0, 0.0, 0)
    mean = math.fsum(vals) / len(vals)
    sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return GroupStats(mean * scale, sd * scale, len(vals))


def _row_split(net: ReviewNetwork, row: int, in_group) -> tuple[int, int]:
    hit = total = 0
    for (r, a), w in net.weights.items():
        if r == row and a != row:
            total += w
            if in_group(net.nodes[a]):
                hit += w
    return hit, total


def _ratio(pid: int, hit: int, total: int, defined: bool) -> ReviewRatio:
    if not defined:
        return ReviewRatio(pid, None, total, False)
    return ReviewRatio(pid, hit / total if total else 0.0, total, True)


def maintainer_review_ratio(net: ReviewNetwork, maintainers: MaintainerSet, v: int) -> ReviewRatio:
    """Fraction of ``v``'s reviews whose author is a maintainer (defined for maintainers only)."""
    hit, total = _row_split(net, net.index_of(v), maintainers.__contains__)
    return _ratio(v, hit, total, v in maintainers)


def affiliation_review_ratio(
    net: ReviewNetwork, attrs: Mapping[int, PersonAttributes], v: int
) -> ReviewRatio:
    """Fraction of ``v``'s reviews whose author shares ``v``'s organization."""
    own = attrs[v].affiliation
    hit, total = _row_split(
        net, net.index_of(v), lambda u: attrs[u].affiliation == own
    )
    return _ratio(v, hit, total, own != UNAFFILIATED)


def _all_ratios(net: ReviewNetwork, same_group, defined) -> dict[int, ReviewRatio]:
    """Ratios for every node in one pass over the edges (diagonal ignored)."""
    hit = [0] * len(net.nodes)
    total = [0] * len(net.nodes)
    for (r, a), w in net.weights.items():
        if r == a:
            continue
        total[r] += w
        if same_group(net.nodes[r], net.nodes[a]):
            hit[r] += w
    return {
        pid: _ratio(pid, hit[i], total[i], defined(pid))
        for i, pid in enumerate(net.nodes)
    }


def maintainer_ratios(net: ReviewNetwork, maintainers: MaintainerSet) -> dict[int, ReviewRatio]:
    members = maintainers.members
    return _all_ratios(net, lambda _, a: a in members, lambda p: p in members)


def affiliation_ratios(
    net: ReviewNetwork, attrs: Mapping[int, PersonAttributes]
) -> dict[int, ReviewRatio]:
    return _all_ratios(
        net,
        lambda r, a: attrs[r].affiliation == attrs[a].affiliation,
        lambda p: attrs[p].affiliation != UNAFFILIATED,
    )


@dataclass
class CellStats:
    subsystem: str
    window: str
    present: bool = False
    node_count: int = 0
    maintainer_count: int = 0
    maintainer_share_pct: float | None = None
    mean_maintainer_ratio_pct: float | None = None
    sd_maintainer_ratio_pct: float | None = None
    maintainer_ratio_n: int = 0
    out_strength_maintainers: GroupStats = GroupStats(0.0, 0.0, 0)
    out_strength_others: GroupStats = GroupStats(0.0, 0.0, 0)
    affiliation: dict[str, GroupStats] = field(default_factory=dict)
    review_weight: int = 0
    self_signoffs: int = 0
    unresolved: int = 0
    above_table_mean: bool | None = None
    above_column_mean: bool | None = None


@dataclass
class HomophilyReport:
    subsystems: list[str]
    windows: list[str]
    cells: dict[tuple[str, str], CellStats]

    def cell(self, subsystem: str, window: str) -> CellStats:
        return self.cells[(subsystem, window)]

    def rows(self) -> list[CellStats]:
        """Cells ordered by window, then subsystem (the layout of a year x subsystem table)."""
        return [self.cells[(s, w)] for w in self.windows for s in self.subsystems]

    def series(self, subsystem: str, metric: str) -> list[float | None]:
        return [getattr(self.cells[(subsystem, w)], metric) for w in self.windows]

    def organizations(self) -> list[str]:
        orgs = set()
        for c in self.cells.values():
            orgs.update(c.affiliation)
        return sorted(orgs)

    def pivot(self, metric: str = "mean_maintainer_ratio_pct") -> str:
        """Plain-text window x subsystem table with two-decimal values."""
        head = ["window"] + self.subsystems
        lines = ["\t".join(head)]
        for w in self.windows:
            vals = [getattr(self.cells[(s, w)], metric) for s in self.subsystems]
            lines.append("\t".join([w] + ["" if v is None else f"{v:.2f}" for v in vals]))
        return "\n".join(lines)


def cell_stats(
    net: ReviewNetwork,
    maintainers: MaintainerSet,
    attrs: Mapping[int, PersonAttributes],
) -> CellStats:
    missing = [p for p in net.nodes if p not in attrs]
    if missing:
        raise InvariantViolation(
            f"{net.subsystem}/{net.window}: no attributes for persons {missing[:5]}"
        )
    view = strip_diagonal(net)
    out, _ = strengths(view)
    m_ratios = maintainer_ratios(view, maintainers)
    a_ratios = affiliation_ratios(view, attrs)

    is_m = [p in maintainers for p in net.nodes]
    n = len(net.nodes)
    n_m = sum(is_m)
    defined = [r.value for r in m_ratios.values() if r.defined]
    m_stats = group_stats(defined)

    by_org: dict[str, list[float]] = {}
    for pid, r in a_ratios.items():
        if r.defined:
            by_org.setdefault(attrs[pid].affiliation, []).append(r.value)

    return CellStats(
        subsystem=net.subsystem,
        window=net.window,
        present=True,
        node_count=n,
        maintainer_count=n_m,
        maintainer_share_pct=100.0 * n_m / n if n else None,
        mean_maintainer_ratio_pct=None if m_stats.empty else m_stats.mean,
        sd_maintainer_ratio_pct=None if m_stats.empty else m_stats.sd,
        maintainer_ratio_n=m_stats.n,
        out_strength_maintainers=group_stats((o for o, m in zip(out, is_m) if m), scale=1.0),
        out_strength_others=group_stats((o for o, m in zip(out, is_m) if not m), scale=1.0),
        affiliation={org: group_stats(v) for org, v in sorted(by_org.items())},
        review_weight=view.total_weight,
        self_signoffs=sum(diagonal(net)),
        unresolved=net.unresolved,
    )


def _mark_shading(report: HomophilyReport) -> None:
    """Flag cells at or above the mean maintainer ratio, table-wide and per subsystem."""
    values = [c.mean_maintainer_ratio_pct for c in report.cells.values()
              if c.mean_maintainer_ratio_pct is not None]
    if not values:
        return
    table_mean = math.fsum(values) / len(values)
    for s in report.subsystems:
        col = [report.cells[(s, w)] for w in report.windows]
        col_vals = [c.mean_maintainer_ratio_pct for c in col if c.mean_maintainer_ratio_pct is not None]
        col_mean = math.fsum(col_vals) / len(col_vals) if col_vals else None
        for c in col:
            v = c.mean_maintainer_ratio_pct
            if v is None:
                continue
            c.above_table_mean = v >= table_mean
            c.above_column_mean = v >= col_mean


def trend_series(
    networks: Sequence[ReviewNetwork],
    maintainer_sets: Mapping[str, MaintainerSet],
    attrs: Mapping[str, Mapping[int, PersonAttributes]],
    subsystems: Sequence[str] | None = None,
    windows: Sequence[str] | None = None,
) -> HomophilyReport:
    """Per (subsystem, window) statistics over a grid of networks.

    Grid cells without a network are kept with ``present=False``.
    """
    subsystems = list(subsystems) if subsystems is not None else sorted({n.subsystem for n in networks})
    windows = list(windows) if windows is not None else sorted({n.window for n in networks})
    if not subsystems or not windows:
        raise EmptyGrid("no (subsystem, window) cells to report")

    cells = {(s, w): CellStats(s, w) for w in windows for s in subsystems}
    for net in networks:
        key = (net.subsystem, net.window)
        if key not in cells:
            raise InvariantViolation(f"network {key} lies outside the report grid")
        maint = maintainer_sets.get(net.window, MaintainerSet(net.window, frozenset()))
        cells[key] = cell_stats(net, maint, attrs.get(net.window, {}))

    report = HomophilyReport(subsystems, windows, cells)
    _mark_shading(report)
    return report
