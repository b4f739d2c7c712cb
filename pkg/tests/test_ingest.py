"""
取り込みのテスト
"""
import json

import pytest

from pkgnet.config import ReleaseInput
from pkgnet.ingest import ingest, load_graph, load_releases
from pkgnet.models import ResolutionPolicy


class TestLoadGraph:
    def test_edges(self, data_dir, half_install_graph):
        assert load_graph(data_dir / "half_install.edges") == half_install_graph

    def test_packages(self, data_dir):
        graph = load_graph(data_dir / "Packages.sample", "packages")
        assert "docs" in graph.nodes
        assert ("base-files", "libc6") in graph.dep_edges
        assert graph.versions["exim"] == "3.36"

    def test_pre_depends_policy(self, data_dir):
        policy = ResolutionPolicy(include_pre_depends=False)
        graph = load_graph(data_dir / "Packages.sample", "packages", policy)
        assert ("base-files", "libc6") not in graph.dep_edges

    def test_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_graph(tmp_path / "nope.edges")

    def test_unknown_format(self, data_dir):
        with pytest.raises(ValueError):
            load_graph(data_dir / "half_install.edges", "xml")


def test_load_releases(data_dir):
    inputs = [
        ReleaseInput(path=str(data_dir / "releases" / f"r{k}.edges"), label=f"r{k}", format="edges")
        for k in (1, 2, 3)
    ]
    releases = load_releases(inputs)
    assert [r.ordinal for r in releases] == [1, 2, 3]
    assert [r.label for r in releases] == ["r1", "r2", "r3"]
    assert "doc1" in releases[0].graph.nodes


def test_ingest_round_trip(data_dir, tmp_path):
    out = tmp_path / "nested" / "sample.edges"
    summary = ingest(data_dir / "Packages.sample", out, sweep=True)
    assert out.exists()
    written = json.loads((tmp_path / "nested" / "sample.summary.json").read_text(encoding="utf-8"))
    assert written == summary
    assert summary["policy"] == ResolutionPolicy().to_dict()
    assert load_graph(out) == load_graph(data_dir / "Packages.sample", "packages")
    assert len(summary["policy_sweep"]) > 1


def test_ingest_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        ingest(tmp_path / "Packages", tmp_path / "out.edges")
