"""SVG charts of a homophily report.

Two chart families: trend lines over windows (one line per subsystem) and
per-organization box plots of the affiliation review ratios.  Figures are
built on bare :class:`~matplotlib.figure.Figure` objects so no global pyplot
state is touched, and the SVG output is byte-stable for a given report.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Sequence

import matplotlib
from matplotlib import cbook
from matplotlib.figure import Figure

from reviewnet.metrics import HomophilyReport
from reviewnet.report import safe_filename

TREND_METRICS = {
    "node_count": "Developers in network",
    "maintainer_share_pct": "Maintainers among developers (%)",
    "mean_maintainer_ratio_pct": "Mean maintainer review ratio (%)",
}

WHISKER_IQR = 1.5

RC = {
    "svg.hashsalt": "reviewnet",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
}


def _figure(width=6.4, height=None, ncols=1) -> tuple[Figure, list]:
    golden = (math.sqrt(5) - 1.0) / 2.0
    height = height or width * golden
    fig = Figure(figsize=(width, height))
    axes = fig.subplots(1, ncols, squeeze=False)[0]
    return fig, list(axes)


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    return path


def trend_chart(report: HomophilyReport, metric: str, path: Path) -> Path:
    fig, (ax,) = _figure()
    x = list(range(len(report.windows)))
    for sub in report.subsystems:
        ys = [math.nan if v is None else v for v in report.series(sub, metric)]
        ax.plot(x, ys, marker="o", label=sub)
    ax.set_xticks(x, report.windows)
    ax.set_xlabel("window")
    ax.set_ylabel(TREND_METRICS.get(metric, metric))
    ax.set_title(TREND_METRICS.get(metric, metric))
    if len(report.subsystems) > 1:
        ax.legend(frameon=False, ncols=min(5, len(report.subsystems)))
    fig.tight_layout()
    return _save(fig, path)


def org_series(report: HomophilyReport, org: str, stat: str) -> dict[str, list[float]]:
    """Per subsystem, the cell-level ``mean`` or ``sd`` of ``org``'s ratios across windows."""
    out = {}
    for sub in report.subsystems:
        vals = []
        for w in report.windows:
            st = report.cell(sub, w).affiliation.get(org)
            if st is not None and st.n > 0:
                vals.append(getattr(st, stat))
        out[sub] = vals
    return out


def top_organizations(report: HomophilyReport, k: int = 3) -> list[str]:
    """Organizations with the most ratio-carrying node appearances."""
    weight: dict[str, int] = {}
    for c in report.cells.values():
        for org, st in c.affiliation.items():
            weight[org] = weight.get(org, 0) + st.n
    return sorted(weight, key=lambda o: (-weight[o], o))[:k]


def boxplot_rows(report: HomophilyReport, orgs: Sequence[str]) -> list[list]:
    rows = []
    for org in orgs:
        for stat in ("mean", "sd"):
            for sub, vals in org_series(report, org, stat).items():
                if not vals:
                    continue
                (bs,) = cbook.boxplot_stats(vals, whis=WHISKER_IQR)
                fliers = " ".join(f"{v:.2f}" for v in sorted(bs["fliers"]))
                rows.append([org, stat, sub, len(vals), bs["med"], bs["q1"], bs["q3"],
                             bs["whislo"], bs["whishi"], fliers])
    return rows


def org_boxplot(report: HomophilyReport, org: str, path: Path) -> Path:
    fig, axes = _figure(width=8.0, height=3.2, ncols=2)
    for ax, stat, label in zip(axes, ("mean", "sd"), ("average review ratio (%)", "sd of review ratios (%)")):
        series = org_series(report, org, stat)
        subs = [s for s in report.subsystems if series[s]]
        if subs:
            ax.boxplot([series[s] for s in subs], whis=WHISKER_IQR, showfliers=True)
            ax.set_xticks(range(1, len(subs) + 1), subs)
        ax.set_ylabel(label)
        ax.set_title(f"{org}: {label}")
    fig.tight_layout()
    return _save(fig, path)


def emit_svg_charts(report: HomophilyReport, out_dir: str | Path, orgs: Sequence[str] | None = None) -> list[Path]:
    """Render all charts into ``out_dir/charts``; returns the written paths.

    ``orgs`` defaults to the three organizations with the most reviewers.
    """
    charts = Path(out_dir) / "charts"
    orgs = list(orgs) if orgs is not None else top_organizations(report)
    written = []
    with matplotlib.rc_context(RC):
        for metric in TREND_METRICS:
            written.append(trend_chart(report, metric, charts / f"trend_{metric}.svg"))
        for org in orgs:
            written.append(org_boxplot(report, org, charts / f"box_{safe_filename(org)}.svg"))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["organization", "statistic", "subsystem", "n", "median", "q1", "q3",
                     "whisker_low", "whisker_high", "outliers"])
    for row in boxplot_rows(report, orgs):
        writer.writerow([f"{v:.2f}" if isinstance(v, float) else v for v in row])
    target = charts / "boxplots.csv"
    charts.mkdir(parents=True, exist_ok=True)
    target.write_text(buf.getvalue(), encoding="utf-8", newline="\n")
    written.append(target)
    return written
