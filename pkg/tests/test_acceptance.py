"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with its runtime, so
``pytest tests/test_acceptance.py`` doubles as a readable acceptance report.
"""

from __future__ import annotations

import os
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

import synth
from conftest import A, B, C, D, mine_corpus, worked_example_network
from oracles import brute_levenshtein, naive_recount, subsystem
from reviewnet.attributes import MaintainerSet, PersonAttributes
from reviewnet.graph import diagonal, strengths, strip_diagonal
from reviewnet.identity import Alias, levenshtein, resolve_identities, similarity
from reviewnet.ingest import parse_commit_stream
from reviewnet.metrics import affiliation_ratios, maintainer_ratios, maintainer_review_ratio
from reviewnet.trailers import TrailerKind, extract_trailers


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(name: str, budget: float | None = None):
        start = time.perf_counter()
        status, detail = "FAIL", ""
        try:
            yield
            elapsed = time.perf_counter() - start
            if budget is not None and elapsed >= budget:
                detail = f"over budget {budget:g} s"
                raise AssertionError(f"{name}: took {elapsed:.2f} s, budget {budget:g} s")
            status = "PASS"
        except BaseException as exc:
            detail = detail or type(exc).__name__
            raise
        finally:
            elapsed = time.perf_counter() - start
            limit = f" / {budget:g} s" if budget is not None else ""
            with capsys.disabled():
                print(f"\nACCEPTANCE {status}: {name} ({elapsed:.2f} s{limit}){' - ' + detail if detail else ''}")

    return run


def test_worked_example(criterion):
    with criterion("worked example maintainer review ratios", budget=1.0):
        net = strip_diagonal(worked_example_network())
        maint = MaintainerSet("2013", frozenset({A, B}))
        assert maintainer_review_ratio(net, maint, A).value == 0.8
        assert maintainer_review_ratio(net, maint, B).value == 0
        for v in (C, D):
            r = maintainer_review_ratio(net, maint, v)
            assert not r.defined and r.value is None


def test_sample_commit_extraction(criterion):
    raw = (Path(__file__).parent / "data" / "sample_commit.log").read_bytes()
    with criterion("sample commit trailer extraction", budget=1.0):
        (rec,) = parse_commit_stream(raw)
        got = [(t.kind, t.raw_name) for t in extract_trailers(rec.body)]
        assert got == [
            (TrailerKind.SIGNED, "Dave Young"),
            (TrailerKind.ACKED, "Borislav Petkov"),
            (TrailerKind.SIGNED, "Matt Fleming"),
        ]
        assert not any("Toshi Kani" in name for _, name in got)


def compare_with_oracle(mined):
    expected = naive_recount(mined.truth)
    lab = mined.label
    res = mined.result
    got = {(n.subsystem, n.window): n for n in res.networks}
    assert set(got) == set(expected)
    for key, exp in expected.items():
        net = got[key]
        view = strip_diagonal(net)
        assert {(lab[r], lab[a]): w for r, a, w in net.edges()} == exp["A"]
        assert {lab[p]: d for p, d in zip(net.nodes, diagonal(net))} == exp["diagonal"]
        outs, _ = strengths(view)
        assert {lab[p]: s for p, s in zip(net.nodes, outs)} == exp["out_strength"]
        m = maintainer_ratios(view, res.maintainers[net.window])
        a = affiliation_ratios(view, res.attributes[net.window])
        assert {lab[p]: r.value for p, r in m.items() if r.defined} == exp["maintainer_ratio"]
        assert {lab[p]: r.value for p, r in a.items() if r.defined} == exp["affiliation_ratio"]


@pytest.mark.parametrize("seed", [7, 2024])
def test_oracle_equivalence(criterion, seed, tmp_path):
    truth = synth.generate(seed=seed, n_commits=200)
    with criterion(f"200-commit corpus equals naive recount (seed {seed})", budget=5.0):
        compare_with_oracle(mine_corpus(truth, tmp_path))


def test_levenshtein_suite(criterion):
    rng = random.Random(20141)
    alphabet = "abcdé "

    def word():
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))

    with criterion("Levenshtein vs brute force on 10,000 pairs, axioms, threshold", budget=10.0):
        for _ in range(10_000):
            x, y, z = word(), word(), word()
            d = levenshtein(x, y)
            assert d == brute_levenshtein(x, y)
            assert d == levenshtein(y, x)
            assert (d == 0) == (x == y)
            assert levenshtein(x, z) <= d + levenshtein(y, z)
        assert similarity("dave young", "dave yuong") == pytest.approx(0.80)
        assert similarity("matt fleming", "mat fleming") == pytest.approx(0.9167, abs=1e-4)
        apart = resolve_identities({n: Alias(n, 1) for n in ("Dave Young", "Dave Yuong")}, 0.85)
        together = resolve_identities({"Matt Fleming": Alias("Matt Fleming", 5), "Mat Fleming": Alias("Mat Fleming", 1)}, 0.85)
        assert len(apart) == 2
        assert len(together) == 1 and together.canonical_names == ["Matt Fleming"]


def run_mine(inputs, out, threads):
    log, amap, maint = inputs
    env = dict(os.environ, REVIEWNET_THREADS=str(threads))
    subprocess.run(
        [sys.executable, "-m", "reviewnet.cli", "mine", "--input", str(log), "--from", "2008",
         "--to", "2010", "--affiliations", str(amap), "--maintainers-dir", str(maint), "--out", str(out)],
        env=env, check=True, capture_output=True,
    )
    return {p.relative_to(out).as_posix(): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}


def test_determinism(criterion, tmp_path):
    truth = synth.generate(seed=7, n_commits=200)
    log = tmp_path / "log.bin"
    log.write_bytes(truth.to_bytes())
    amap = tmp_path / "domains.tsv"
    amap.write_text(truth.domain_tsv(), encoding="utf-8")
    maint = tmp_path / "maintainers"
    maint.mkdir()
    truth.write_maintainers(maint)
    with criterion("mine output byte-identical with 1 and 4 threads"):
        single = run_mine((log, amap, maint), tmp_path / "t1", 1)
        multi = run_mine((log, amap, maint), tmp_path / "t4", 4)
        assert sorted(single) == sorted(multi)
        assert len(single) > 10
        for name in single:
            assert single[name] == multi[name], name


def fixture_networks(tmp_path):
    """(network, expected attributed trailer count) for every fixture."""
    out = [(worked_example_network(), 11)]
    raw = (Path(__file__).parent / "data" / "sample_commit.log").read_bytes()
    (rec,) = parse_commit_stream(raw)
    trailers = extract_trailers(rec.body)
    from reviewnet.graph import build_network
    from reviewnet.identity import collect_aliases

    table = resolve_identities(collect_aliases(
        [(rec.author_name, rec.author_email)] + [(t.raw_name, t.raw_email) for t in trailers]
    ))
    out.append((build_network([(rec, trailers)], table, "arch", "2013"), 3))

    truth = synth.generate(seed=7, n_commits=200)
    mined = mine_corpus(truth, tmp_path)
    per_cell = {}
    for c in truth.commits:
        if c.is_merge or c.window not in truth.windows:
            continue
        for s in {subsystem(p) for p in c.paths}:
            per_cell[(s, c.window)] = per_cell.get((s, c.window), 0) + len(c.qualified)
    for net in mined.result.networks:
        out.append((net, per_cell[(net.subsystem, net.window)]))
    return out, mined


def test_conservation(criterion, tmp_path):
    nets, _ = fixture_networks(tmp_path)
    with criterion(f"weight conservation on {len(nets)} fixture networks"):
        for net, trailers in nets:
            stripped = strip_diagonal(net)
            assert stripped.total_weight == net.total_weight - sum(diagonal(net))
            assert net.total_weight == trailers


def test_scale_invariance(criterion, tmp_path):
    nets, mined = fixture_networks(tmp_path)
    worked_attrs = {p: PersonAttributes(p, "2013", p in (A, B), o)
                    for p, o in zip((A, B, C, D), ("Intel", "Intel", "Red Hat", "UNAFFILIATED"))}
    cases = [(worked_example_network(), MaintainerSet("2013", frozenset({A, B})), worked_attrs)]
    for net in mined.result.networks:
        cases.append((net, mined.result.maintainers[net.window], mined.result.attributes[net.window]))
    with criterion(f"ratios unchanged under k in {{2, 7}} on {len(cases)} networks"):
        for net, maint, attrs in cases:
            base_m = maintainer_ratios(net, maint)
            base_a = affiliation_ratios(net, attrs)
            for k in (2, 7):
                scaled = net.scaled(k)
                assert {p: r.value for p, r in maintainer_ratios(scaled, maint).items()} == {
                    p: r.value for p, r in base_m.items()}
                assert {p: r.value for p, r in affiliation_ratios(scaled, attrs).items()} == {
                    p: r.value for p, r in base_a.items()}


@pytest.mark.skip(reason="extended replication needs a full kernel history export; not CI-gating")
def test_extended_replication():
    pass
