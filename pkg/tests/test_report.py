from __future__ import annotations

import csv
import io
import json
import xml.etree.ElementTree as ET

import networkx as nx
import pytest

from conftest import A, B, C, D
from reviewnet.attributes import MaintainerSet, PersonAttributes
from reviewnet.errors import InputError
from reviewnet.graph import ReviewNetwork
from reviewnet.metrics import trend_series
from reviewnet.plotting import boxplot_rows, emit_svg_charts, top_organizations
from reviewnet.report import (
    CELL_COLUMNS,
    EDGE_COLUMNS,
    NODE_COLUMNS,
    Bundle,
    bundle_from_json,
    bundle_to_json,
    emit_graphml,
    emit_tables,
    graphml_path,
    load_bundle,
    write_graphml_files,
    write_manifest,
)


@pytest.fixture
def worked_bundle(worked_example, worked_maintainers, worked_attrs, worked_names):
    report = trend_series([worked_example], {"2013": worked_maintainers}, {"2013": worked_attrs})
    return Bundle([worked_example], {"2013": worked_attrs}, worked_names, report, {"threshold": 0.85})


@pytest.fixture
def mined_bundle(mined):
    return Bundle.from_result(mined.result, {"threshold": 0.85})


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def test_cells_csv_worked_row(worked_bundle, tmp_path):
    emit_tables(worked_bundle, tmp_path)
    header = (tmp_path / "cells.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",") == CELL_COLUMNS
    (row,) = read_csv(tmp_path / "cells.csv")
    assert row["mean_maintainer_ratio_pct"] == "40.00"
    assert row["maintainer_share_pct"] == "50.00"
    assert row["node_count"] == "4"
    assert row["present"] == "true"


def test_nodes_and_edges_csv(worked_bundle, tmp_path):
    emit_tables(worked_bundle, tmp_path)
    nodes = read_csv(tmp_path / "nodes.csv")
    assert list(nodes[0]) == NODE_COLUMNS
    by_id = {int(r["person_id"]): r for r in nodes}
    assert by_id[A]["out_strength"] == "5"
    assert by_id[B]["signed_commits"] == "4"
    assert by_id[B]["in_strength"] == "4"
    assert by_id[D]["affiliation"] == "UNAFFILIATED"
    assert by_id[A]["is_maintainer"] == "true"
    edges = read_csv(tmp_path / "edges.csv")
    assert list(edges[0]) == EDGE_COLUMNS
    off = [(int(e["reviewer_id"]), int(e["author_id"]), int(e["weight"]))
           for e in edges if e["reviewer_id"] != e["author_id"]]
    assert off == [(A, B, 4), (A, C, 1)]
    ab = next(e for e in edges if (e["reviewer_id"], e["author_id"]) == (str(A), str(B)))
    assert (ab["signed"], ab["acked"], ab["reviewed"]) == ("0", "4", "0")


def test_minimal_network_has_one_review_edge(tmp_path):
    net = ReviewNetwork("2013", "arch", [0, 1], {(0, 0): 1, (1, 0): 1},
                        {(0, 0): (1, 0, 0), (1, 0): (0, 1, 0)})
    attrs = {p: PersonAttributes(p, "2013", False, "UNAFFILIATED") for p in (0, 1)}
    report = trend_series([net], {}, {"2013": attrs})
    emit_tables(Bundle([net], {"2013": attrs}, {0: "u", 1: "v"}, report), tmp_path)
    edges = read_csv(tmp_path / "edges.csv")
    assert [(e["reviewer_id"], e["author_id"]) for e in edges if e["reviewer_id"] != e["author_id"]] == [("1", "0")]


def test_json_round_trip(mined_bundle, tmp_path):
    emit_tables(mined_bundle, tmp_path)
    back = load_bundle(tmp_path)
    assert [(n.window, n.subsystem, n.nodes, n.weights, n.kind_breakdown) for n in back.networks] == [
        (n.window, n.subsystem, n.nodes, n.weights, n.kind_breakdown) for n in mined_bundle.networks
    ]
    assert back.report.cells == mined_bundle.report.cells
    assert bundle_to_json(back) == bundle_to_json(mined_bundle)


def test_json_totals_match_csv(mined_bundle, tmp_path):
    emit_tables(mined_bundle, tmp_path)
    doc = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    edges = read_csv(tmp_path / "edges.csv")
    nodes = read_csv(tmp_path / "nodes.csv")
    assert doc["schema_version"] == 1
    assert doc["totals"]["edge_rows"] == len(edges)
    assert doc["totals"]["node_rows"] == len(nodes)
    assert doc["totals"]["weight"] == sum(int(e["weight"]) for e in edges)
    assert doc["totals"]["networks"] == len(read_csv(tmp_path / "cells.csv")) - sum(
        1 for c in doc["cells"] if not c["present"]
    )
    # every network in the document has its rows in the tables
    keys = {(n["window"], n["subsystem"]) for n in doc["networks"]}
    assert keys == {(r["window"], r["subsystem"]) for r in nodes}


def test_csv_is_the_rounded_json(mined_bundle, tmp_path):
    emit_tables(mined_bundle, tmp_path)
    doc = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    rows = read_csv(tmp_path / "cells.csv")
    for row, cell in zip(rows, doc["cells"]):
        v = cell["mean_maintainer_ratio_pct"]
        assert row["mean_maintainer_ratio_pct"] == ("" if v is None else f"{v:.2f}")


def test_schema_version_checked():
    with pytest.raises(InputError):
        bundle_from_json({"schema_version": 99})


def test_load_missing_report(tmp_path):
    with pytest.raises(InputError):
        load_bundle(tmp_path)
    (tmp_path / "report.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(InputError):
        load_bundle(tmp_path)


def parse_graphml(text, tmp_path):
    path = tmp_path / "g.graphml"
    path.write_text(text, encoding="utf-8")
    return nx.read_graphml(path)


def test_graphml_worked_example(worked_example, worked_attrs, worked_names, tmp_path):
    text = emit_graphml(worked_example, worked_attrs, worked_names)
    g = parse_graphml(text, tmp_path)
    assert g.is_directed()
    assert list(g.nodes) == [f"p{p}" for p in (A, B, C, D)]
    assert sum(d["weight"] for *_, d in g.edges(data=True)) == 5
    assert not any(u == v for u, v in g.edges)
    assert g.nodes[f"p{A}"]["is_maintainer"] is True
    assert g.nodes[f"p{C}"]["affiliation"] == "Red Hat"
    assert g.nodes[f"p{B}"]["signed_commits"] == 4
    assert g.edges[f"p{A}", f"p{B}"]["acked"] == 4


def test_graphml_empty_network(tmp_path):
    text = emit_graphml(ReviewNetwork("2013", "arch", []), {}, {})
    root = ET.fromstring(text)
    graph = root.find("{http://graphml.graphdrawing.org/xmlns}graph")
    assert graph is not None and len(graph) == 0
    assert parse_graphml(text, tmp_path).number_of_nodes() == 0


def test_graphml_files_for_every_network(mined_bundle, tmp_path):
    paths = write_graphml_files(mined_bundle, tmp_path, workers=2)
    assert len(paths) == len(set(paths)) == len(mined_bundle.networks)
    for net, path in zip(mined_bundle.networks, paths):
        assert path == graphml_path(tmp_path, net)
        g = nx.read_graphml(path)
        assert g.number_of_nodes() == len(net)
        stripped = sum(w for (r, a), w in net.weights.items() if r != a)
        assert sum(d["weight"] for *_, d in g.edges(data=True)) == stripped


def test_charts(mined_bundle, tmp_path):
    written = emit_svg_charts(mined_bundle.report, tmp_path)
    names = sorted(p.name for p in written)
    assert "trend_node_count.svg" in names
    assert "trend_mean_maintainer_ratio_pct.svg" in names
    assert "boxplots.csv" in names
    orgs = top_organizations(mined_bundle.report)
    assert len(orgs) == 3
    for p in written:
        if p.suffix == ".svg":
            root = ET.parse(p).getroot()
            assert root.tag.endswith("svg")
    rows = list(csv.DictReader(io.StringIO((tmp_path / "charts" / "boxplots.csv").read_text())))
    assert {r["organization"] for r in rows} <= set(orgs)
    for r in rows:
        assert float(r["q1"]) <= float(r["median"]) <= float(r["q3"])


def test_charts_are_byte_stable(mined_bundle, tmp_path):
    first = emit_svg_charts(mined_bundle.report, tmp_path / "a")
    second = emit_svg_charts(mined_bundle.report, tmp_path / "b")
    for p, q in zip(first, second):
        assert p.read_bytes() == q.read_bytes()


def test_single_cell_charts(worked_bundle, tmp_path):
    written = emit_svg_charts(worked_bundle.report, tmp_path, orgs=["Intel", "Nobody"])
    assert (tmp_path / "charts" / "box_Intel.svg") in written
    assert (tmp_path / "charts" / "box_Nobody.svg").exists()


def test_boxplot_rows_quartiles():
    # person 0 (org X) sends 0, 1 or 2 of its two reviews to person 1 (also X, no reviews),
    # so X's cell means over {ratio(0), 0} are 0, 25 and 50
    nets, attrs, maint = [], {}, {}
    for w, weights in (("2010", {(0, 2): 2}), ("2011", {(0, 1): 1, (0, 2): 1}), ("2012", {(0, 1): 2})):
        nets.append(ReviewNetwork(w, "fs", [0, 1, 2], weights))
        attrs[w] = {p: PersonAttributes(p, w, False, org) for p, org in enumerate("XXY")}
        maint[w] = MaintainerSet(w, frozenset())
    report = trend_series(nets, maint, attrs)
    (row,) = [r for r in boxplot_rows(report, ["X"]) if r[1] == "mean"]
    assert row[:4] == ["X", "mean", "fs", 3]
    assert row[4:9] == [25.0, 12.5, 37.5, 0.0, 50.0]


def test_manifest_lists_files(worked_bundle, tmp_path):
    emit_tables(worked_bundle, tmp_path)
    target = write_manifest(tmp_path)
    doc = json.loads(target.read_text())
    assert [f["path"] for f in doc["files"]] == sorted(
        ["affiliations.csv", "cells.csv", "edges.csv", "nodes.csv", "report.json"]
    )
    assert all(len(f["sha256"]) == 64 for f in doc["files"])
