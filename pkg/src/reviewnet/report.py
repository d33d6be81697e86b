"""Writing and reading the output bundle.

Layout of an output directory::

    report.json          everything, full float precision (machine surface)
    nodes.csv            one row per (window, subsystem, person)
    edges.csv            one row per non-zero matrix entry, diagonal included
    cells.csv            one row per (subsystem, window) cell
    affiliations.csv     per-organization review ratio stats per cell
    graphml/*.graphml    one diagonal-free network per (window, subsystem)
    charts/*.svg         trend and box-plot charts
    manifest.json        file list with sha256, written last
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Mapping

from reviewnet.attributes import PersonAttributes
from reviewnet.errors import InputError
from reviewnet.graph import KINDS, ReviewNetwork, diagonal, strengths, strip_diagonal
from reviewnet.metrics import CellStats, GroupStats, HomophilyReport

SCHEMA_VERSION = 1
FORMATS = ("csv", "json", "graphml", "svg")

NODE_COLUMNS = [
    "window", "subsystem", "person_id", "canonical_name", "is_maintainer",
    "affiliation", "signed_commits", "out_strength", "in_strength",
]
EDGE_COLUMNS = [
    "window", "subsystem", "reviewer_id", "author_id", "weight", "signed", "acked", "reviewed",
]
CELL_COLUMNS = [
    "window", "subsystem", "present", "node_count", "maintainer_count",
    "maintainer_share_pct", "mean_maintainer_ratio_pct", "sd_maintainer_ratio_pct",
    "maintainer_ratio_n",
    "out_strength_maintainers_mean", "out_strength_maintainers_sd", "out_strength_maintainers_n",
    "out_strength_others_mean", "out_strength_others_sd", "out_strength_others_n",
    "review_weight", "self_signoffs", "unresolved", "above_table_mean", "above_column_mean",
]
AFFILIATION_COLUMNS = ["window", "subsystem", "organization", "mean_ratio_pct", "sd_ratio_pct", "n"]

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


@dataclass
class Bundle:
    """Everything the emitters need, independent of how it was produced."""

    networks: list[ReviewNetwork]
    attributes: dict[str, dict[int, PersonAttributes]]
    names: dict[int, str]
    report: HomophilyReport
    parameters: dict = field(default_factory=dict)
    diagnostics: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_result(cls, result, parameters: Mapping | None = None) -> "Bundle":
        diag: dict[str, int] = {}
        for d in result.issues:
            diag[d.code] = diag.get(d.code, 0) + 1
        ids = result.identities
        return cls(
            networks=list(result.networks),
            attributes=result.attributes,
            names={pid: name for pid, name in enumerate(ids.canonical_names)},
            report=result.report,
            parameters=dict(parameters or {}),
            diagnostics=dict(sorted(diag.items())),
        )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def _csv(rows: Iterable[Iterable], header: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def node_rows(bundle: Bundle):
    for net in bundle.networks:
        attrs = bundle.attributes[net.window]
        diag = diagonal(net)
        out, inn = strengths(strip_diagonal(net))
        for i, pid in enumerate(net.nodes):
            a = attrs[pid]
            yield [net.window, net.subsystem, pid, bundle.names[pid], a.is_maintainer,
                   a.affiliation, diag[i], out[i], inn[i]]


def edge_rows(bundle: Bundle):
    for net in bundle.networks:
        for (r, a), w in sorted(net.weights.items()):
            ks = net.kind_breakdown.get((r, a), (0, 0, 0))
            yield [net.window, net.subsystem, net.nodes[r], net.nodes[a], w, *ks]


def _cell_values(c: CellStats) -> list:
    return [
        c.window, c.subsystem, c.present, c.node_count, c.maintainer_count,
        c.maintainer_share_pct, c.mean_maintainer_ratio_pct, c.sd_maintainer_ratio_pct,
        c.maintainer_ratio_n,
        *c.out_strength_maintainers, *c.out_strength_others,
        c.review_weight, c.self_signoffs, c.unresolved, c.above_table_mean, c.above_column_mean,
    ]


def cell_rows(report: HomophilyReport):
    return [_cell_values(c) for c in report.rows()]


def affiliation_rows(report: HomophilyReport):
    for c in report.rows():
        for org, st in c.affiliation.items():
            yield [c.window, c.subsystem, org, st.mean, st.sd, st.n]


def _cell_json(c: CellStats) -> dict:
    out = {}
    for f in fields(c):
        v = getattr(c, f.name)
        if isinstance(v, GroupStats):
            v = v._asdict()
        elif f.name == "affiliation":
            v = {org: st._asdict() for org, st in v.items()}
        out[f.name] = v
    return out


def bundle_to_json(bundle: Bundle) -> dict:
    networks = []
    node_total = edge_total = weight_total = 0
    for net in bundle.networks:
        attrs = bundle.attributes[net.window]
        diag = diagonal(net)
        out, inn = strengths(strip_diagonal(net))
        nodes = [
            {
                "person_id": pid,
                "canonical_name": bundle.names[pid],
                "is_maintainer": attrs[pid].is_maintainer,
                "affiliation": attrs[pid].affiliation,
                "signed_commits": diag[i],
                "out_strength": out[i],
                "in_strength": inn[i],
            }
            for i, pid in enumerate(net.nodes)
        ]
        edges = [
            {"reviewer_id": r, "author_id": a, "weight": w,
             **dict(zip((k.value for k in KINDS), net.kinds(r, a)))}
            for r, a, w in net.edges()
        ]
        networks.append({
            "window": net.window,
            "subsystem": net.subsystem,
            "total_weight": net.total_weight,
            "self_signoffs": sum(diag),
            "unresolved": net.unresolved,
            "nodes": nodes,
            "edges": edges,
        })
        node_total += len(nodes)
        edge_total += len(edges)
        weight_total += net.total_weight

    persons = sorted({pid for net in bundle.networks for pid in net.nodes})
    return {
        "schema_version": SCHEMA_VERSION,
        "parameters": bundle.parameters,
        "windows": bundle.report.windows,
        "subsystems": bundle.report.subsystems,
        "persons": [{"person_id": p, "canonical_name": bundle.names[p]} for p in persons],
        "networks": networks,
        "cells": [_cell_json(c) for c in bundle.report.rows()],
        "totals": {
            "networks": len(networks),
            "node_rows": node_total,
            "edge_rows": edge_total,
            "weight": weight_total,
        },
        "diagnostics": bundle.diagnostics,
    }


def _stats(d: dict) -> GroupStats:
    return GroupStats(d["mean"], d["sd"], d["n"])


def bundle_from_json(doc: dict) -> Bundle:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"unsupported report schema_version {doc.get('schema_version')!r}")
    networks = []
    attributes: dict[str, dict[int, PersonAttributes]] = {}
    names = {p["person_id"]: p["canonical_name"] for p in doc["persons"]}
    for nd in doc["networks"]:
        window = nd["window"]
        nodes = [n["person_id"] for n in nd["nodes"]]
        index = {pid: i for i, pid in enumerate(nodes)}
        weights = {}
        breakdown = {}
        for e in nd["edges"]:
            key = (index[e["reviewer_id"]], index[e["author_id"]])
            weights[key] = e["weight"]
            breakdown[key] = tuple(e[k.value] for k in KINDS)
        networks.append(
            ReviewNetwork(window, nd["subsystem"], nodes, weights, breakdown, nd["unresolved"])
        )
        per_window = attributes.setdefault(window, {})
        for n in nd["nodes"]:
            per_window[n["person_id"]] = PersonAttributes(
                n["person_id"], window, n["is_maintainer"], n["affiliation"]
            )

    cells = {}
    for cd in doc["cells"]:
        cd = dict(cd)
        cd["out_strength_maintainers"] = _stats(cd["out_strength_maintainers"])
        cd["out_strength_others"] = _stats(cd["out_strength_others"])
        cd["affiliation"] = {org: _stats(v) for org, v in cd["affiliation"].items()}
        cell = CellStats(**cd)
        cells[(cell.subsystem, cell.window)] = cell
    report = HomophilyReport(list(doc["subsystems"]), list(doc["windows"]), cells)
    return Bundle(networks, attributes, names, report, doc.get("parameters", {}),
                  doc.get("diagnostics", {}))


def load_bundle(directory: str | Path) -> Bundle:
    path = Path(directory) / "report.json"
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"{path} not found; run 'reviewnet mine' first") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return bundle_from_json(doc)


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_tables(bundle: Bundle, out_dir: str | Path, csv_files: bool = True, json_file: bool = True) -> list[Path]:
    """Write the CSV tables and/or report.json; returns the written paths."""
    out = Path(out_dir)
    written = []
    if csv_files:
        for name, text in [
            ("nodes.csv", _csv(node_rows(bundle), NODE_COLUMNS)),
            ("edges.csv", _csv(edge_rows(bundle), EDGE_COLUMNS)),
            ("cells.csv", _csv(cell_rows(bundle.report), CELL_COLUMNS)),
            ("affiliations.csv", _csv(affiliation_rows(bundle.report), AFFILIATION_COLUMNS)),
        ]:
            _write(out / name, text)
            written.append(out / name)
    if json_file:
        doc = bundle_to_json(bundle)
        _write(out / "report.json", json.dumps(doc, indent=1, ensure_ascii=False) + "\n")
        written.append(out / "report.json")
    return written


def emit_graphml(
    net: ReviewNetwork, attrs: Mapping[int, PersonAttributes], names: Mapping[int, str]
) -> str:
    """GraphML document for the diagonal-free view of ``net``.

    Self sign-offs are kept as the ``signed_commits`` node attribute.
    """
    ET.register_namespace("", GRAPHML_NS)
    root = ET.Element(f"{{{GRAPHML_NS}}}graphml")
    keys = [
        ("canonical_name", "node", "string"),
        ("is_maintainer", "node", "boolean"),
        ("affiliation", "node", "string"),
        ("signed_commits", "node", "int"),
        ("weight", "edge", "int"),
        ("signed", "edge", "int"),
        ("acked", "edge", "int"),
        ("reviewed", "edge", "int"),
    ]
    for name, scope, kind in keys:
        ET.SubElement(root, f"{{{GRAPHML_NS}}}key",
                      {"id": name, "for": scope, "attr.name": name, "attr.type": kind})
    graph = ET.SubElement(root, f"{{{GRAPHML_NS}}}graph",
                          {"id": f"{net.window}/{net.subsystem}", "edgedefault": "directed"})

    def data(parent, key, value):
        ET.SubElement(parent, f"{{{GRAPHML_NS}}}data", {"key": key}).text = value

    diag = diagonal(net)
    for i, pid in sorted(enumerate(net.nodes), key=lambda t: t[1]):
        node = ET.SubElement(graph, f"{{{GRAPHML_NS}}}node", {"id": f"p{pid}"})
        a = attrs.get(pid)
        data(node, "canonical_name", names.get(pid, ""))
        data(node, "is_maintainer", "true" if a and a.is_maintainer else "false")
        data(node, "affiliation", a.affiliation if a else "")
        data(node, "signed_commits", str(diag[i]))
    view = strip_diagonal(net)
    for r, a, w in sorted(view.edges()):
        edge = ET.SubElement(graph, f"{{{GRAPHML_NS}}}edge", {"source": f"p{r}", "target": f"p{a}"})
        data(edge, "weight", str(w))
        for kind, n in zip(KINDS, view.kinds(r, a)):
            data(edge, kind.value, str(n))
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def safe_filename(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text) or "_"


def graphml_path(out_dir: str | Path, net: ReviewNetwork) -> Path:
    return Path(out_dir) / "graphml" / f"{safe_filename(net.window)}_{safe_filename(net.subsystem)}.graphml"


def write_graphml_files(bundle: Bundle, out_dir: str | Path, workers: int = 1) -> list[Path]:
    from reviewnet.parallel import ordered_map

    def one(net: ReviewNetwork) -> Path:
        path = graphml_path(out_dir, net)
        _write(path, emit_graphml(net, bundle.attributes[net.window], bundle.names))
        return path

    return ordered_map(one, bundle.networks, workers)


def write_manifest(out_dir: str | Path) -> Path:
    """List every file under ``out_dir`` with its size and sha256; written last."""
    out = Path(out_dir)
    entries = []
    for path in sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json"):
        blob = path.read_bytes()
        entries.append({
            "path": path.relative_to(out).as_posix(),
            "bytes": len(blob),
            "sha256": hashlib.sha256(blob).hexdigest(),
        })
    target = out / "manifest.json"
    _write(target, json.dumps({"schema_version": SCHEMA_VERSION, "files": entries}, indent=1) + "\n")
    return target
