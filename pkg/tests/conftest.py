from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import synth  # noqa: E402

from reviewnet.attributes import MaintainerSet, PersonAttributes  # noqa: E402
from reviewnet.graph import ReviewNetwork  # noqa: E402

DATA = Path(__file__).parent / "data"

# worked example: A, B maintainers; A reviews B four times and C once.
A, B, C, D = 0, 1, 2, 3


def worked_example_network() -> ReviewNetwork:
    """The 4-node example plus the self sign-offs its authors would carry."""
    weights = {(A, B): 4, (A, C): 1, (B, B): 4, (C, C): 1, (D, D): 1}
    kinds = {
        (A, B): (0, 4, 0),
        (A, C): (0, 0, 1),
        (B, B): (4, 0, 0),
        (C, C): (1, 0, 0),
        (D, D): (1, 0, 0),
    }
    return ReviewNetwork("2013", "arch", [A, B, C, D], weights, kinds)


@pytest.fixture
def worked_example():
    return worked_example_network()


@pytest.fixture
def worked_maintainers():
    return MaintainerSet("2013", frozenset({A, B}))


@pytest.fixture
def worked_attrs():
    orgs = {A: "Intel", B: "Intel", C: "Red Hat", D: "UNAFFILIATED"}
    return {p: PersonAttributes(p, "2013", p in (A, B), orgs[p]) for p in (A, B, C, D)}


@pytest.fixture
def worked_names():
    return {A: "A", B: "B", C: "C", D: "D"}


@pytest.fixture
def sample_commit_bytes() -> bytes:
    return (DATA / "sample_commit.log").read_bytes()


@pytest.fixture(scope="session")
def corpus() -> synth.Corpus:
    return synth.generate(seed=7, n_commits=200)


class Mined:
    """Pipeline output on the synthetic corpus, with ids translated to ground-truth labels."""

    def __init__(self, truth: synth.Corpus, result):
        self.truth = truth
        self.result = result
        owner = truth.alias_owner()
        self.label = {}
        for pid, members in enumerate(result.identities.members):
            labels = {owner[m] for m in members}
            assert len(labels) == 1, f"cluster {members} mixes persons {labels}"
            self.label[pid] = labels.pop()

    def network(self, subsystem, window):
        for net in self.result.networks:
            if (net.subsystem, net.window) == (subsystem, window):
                return net
        return None


def mine_corpus(truth: synth.Corpus, directory: Path, workers: int = 1) -> Mined:
    from reviewnet.attributes import AffiliationMap
    from reviewnet.ingest import parse_commit_stream
    from reviewnet.pipeline import MineConfig, mine

    truth.write_maintainers(directory)
    years = [int(w) for w in truth.windows]
    config = MineConfig(first_year=years[0], last_year=years[-1], workers=workers)
    amap = AffiliationMap.parse(truth.domain_tsv().splitlines())
    records = list(parse_commit_stream(truth.to_bytes()))
    return Mined(truth, mine(records, config, amap, maintainers_dir=directory))


@pytest.fixture(scope="session")
def mined(corpus, tmp_path_factory) -> Mined:
    return mine_corpus(corpus, tmp_path_factory.mktemp("maintainers"))
