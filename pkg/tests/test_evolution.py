"""
進化解析のテスト
"""
import math

import numpy as np
import pytest

from conftest import make_graph
from pkgnet.config import RunConfig
from pkgnet.evolution import Release, evolution_report, regress, release_diff, release_table, trend_table
from pkgnet.exceptions import DomainError, InsufficientDataError, PkgnetError
from pkgnet.graph_core import DependencyGraph


def cyclic_release(n, conflicts=True):
    """n パッケージの循環格子（pkg_i → pkg_{i+1}, pkg_{i+2}）と相互競合1組"""
    names = [f"pkg{i:03d}" for i in range(n)]
    dep = [(names[i], names[(i + d) % n]) for i in range(n) for d in (1, 2)]
    con = [(names[0], names[n // 2]), (names[n // 2], names[0])] if conflicts else []
    return make_graph(dep=dep, con=con)


def tiny_config(**overrides):
    values = dict(
        modularity_randomizations=2,
        install_networks=2,
        install_replicates=5,
        louvain_restarts=2,
        swaps_per_edge=2,
    )
    values.update(overrides)
    return RunConfig(**values)


def find_row(report, metric, variant="all", model=None):
    for row in report["trends"]:
        if row["metric"] == metric and row["variant"] == variant and (model is None or row["model"] == model):
            return row
    raise AssertionError(f"row not found: {metric}/{variant}")


@pytest.fixture(scope="module")
def growing_report():
    """パッケージ数が約1.5倍ずつ増えるリリース系列"""
    sizes = [8, 12, 18, 27, 40]
    releases = [
        Release(label=f"r{k + 1}", ordinal=k + 1, graph=cyclic_release(n))
        for k, n in enumerate(sizes)
    ]
    return evolution_report(releases, tiny_config(), seed=2005)


class TestReleaseDiff:
    def test_partition(self):
        prev = make_graph(dep=[("a", "b")], nodes=["c"])
        nxt = make_graph(dep=[("b", "c")], nodes=["d", "e"])
        diff = release_diff(prev, nxt)
        assert diff.deprecated == {"a"}
        assert diff.kept == {"b", "c"}
        assert diff.new == {"d", "e"}
        assert diff.kept_version_changed is None

    def test_empty_previous(self):
        diff = release_diff(DependencyGraph([]), make_graph(dep=[("a", "b")]))
        assert diff.new == {"a", "b"}
        assert not diff.kept and not diff.deprecated

    def test_version_changes(self):
        prev = DependencyGraph(["a", "b", "c"], versions={"a": "1.0", "b": "2.0", "c": "1"})
        nxt = DependencyGraph(["a", "b", "d"], versions={"a": "1.1", "b": "2.0", "d": "1"})
        diff = release_diff(prev, nxt)
        assert diff.kept_version_changed == 1
        assert diff.to_dict() == {"deprecated": 1, "kept": 2, "new": 1, "kept_version_changed": 1}


class TestRegress:
    def test_linear(self):
        series = [(x, 3 * x + 1) for x in range(6)]
        fit = regress(series, "linear")
        assert fit.slope == pytest.approx(3.0)
        assert fit.intercept == pytest.approx(1.0)
        assert fit.r_squared == pytest.approx(1.0)

    def test_exponential(self):
        series = [(x, 2 * math.exp(0.7 * x)) for x in range(1, 7)]
        fit = regress(series, "exponential")
        assert fit.slope == pytest.approx(0.7)
        assert fit.intercept == pytest.approx(math.log(2))
        assert fit.df == (1, 4)

    def test_noisy_growth_is_significant(self):
        rng = np.random.default_rng(0)
        series = [(x, 100 * math.exp(0.3 * x) * math.exp(rng.normal(scale=0.02))) for x in range(8)]
        fit = regress(series, "exponential")
        assert fit.slope == pytest.approx(0.3, abs=0.02)
        assert fit.p_value < 1e-6

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError):
            regress([(1, 1.0), (2, 2.0)])

    def test_exponential_needs_positive(self):
        with pytest.raises(DomainError):
            regress([(1, 1.0), (2, 0.0), (3, 2.0)], "exponential")

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            regress([(1, 1.0), (2, 2.0), (3, 3.0)], "quadratic")


class TestEvolutionReport:
    def test_release_entries(self, growing_report):
        labels = [r["label"] for r in growing_report["releases"]]
        assert labels == ["r1", "r2", "r3", "r4", "r5"]
        assert growing_report["releases"][0]["diff"] is None
        assert growing_report["releases"][1]["diff"] == {
            "deprecated": 0, "kept": 8, "new": 4, "kept_version_changed": None,
        }
        metrics = growing_report["releases"][-1]["metrics"]
        assert metrics["packages"] == 40
        assert metrics["dep_edges"] == 80
        assert metrics["con_edges"] == 2
        assert 0.0 <= metrics["installed_fraction_mean"] <= 1.0

    def test_package_growth_is_exponential(self, growing_report):
        row = find_row(growing_report, "packages", model="exponential")
        assert row["n"] == 5
        assert row["slope"] == pytest.approx(math.log(1.5), abs=0.02)
        assert row["p_value"] < 0.001
        assert row["skipped"] is None

    def test_deprecated_all_zero_is_skipped(self, growing_report):
        row = find_row(growing_report, "deprecated")
        assert row["skipped"]
        assert row["p_value"] is None

    def test_variants(self, growing_report):
        new_all = find_row(growing_report, "new")
        new_dropped = find_row(growing_report, "new", variant="drop_last_new_point")
        assert new_all["n"] == 4
        assert new_dropped["n"] == 3
        assert find_row(growing_report, "packages", variant="drop_last_release")["n"] == 4

    def test_modularity_z_both_models(self, growing_report):
        models = {row["model"] for row in growing_report["trends"]
                  if row["metric"] == "modularity_z" and row["variant"] == "all"}
        assert models == {"linear", "exponential"}

    def test_cross_trend_axis(self, growing_report):
        row = find_row(growing_report, "n_modules")
        assert row["x"] == "nodes_with_dependencies"

    def test_two_identical_releases(self):
        graph = cyclic_release(10)
        releases = [Release("a", 1, graph), Release("b", 2, graph)]
        report = evolution_report(releases, tiny_config(), seed=1)
        assert report["releases"][1]["diff"]["new"] == 0
        assert all(row["skipped"] == "n<3" for row in report["trends"])

    def test_deterministic(self):
        releases = [Release(f"r{k}", k, cyclic_release(n)) for k, n in enumerate((8, 10, 12), start=1)]
        first = evolution_report(releases, tiny_config(), seed=42)
        second = evolution_report(releases, tiny_config(), seed=42)
        assert first == second

    def test_failed_cells_recorded(self):
        releases = [
            Release("r1", 1, cyclic_release(8, conflicts=False)),
            Release("r2", 2, cyclic_release(10)),
        ]
        report = evolution_report(releases, tiny_config(), seed=3)
        assert report["releases"][0]["metrics"]["fit_con_in"] is None
        assert "fit_con_in" in report["errors"]["r1"]
        # 他の指標は計算される
        assert report["releases"][0]["metrics"]["modularity_q"] is not None

    def test_date_axis(self):
        releases = [
            Release("r1", 1, cyclic_release(8), date="2005-06-06"),
            Release("r2", 2, cyclic_release(12), date="2007-04-08"),
            Release("r3", 3, cyclic_release(16), date="2009-02-14"),
        ]
        report = evolution_report(releases, tiny_config(x_axis="date", drop_last_release=False), seed=7)
        row = find_row(report, "packages")
        assert row["x"] == "date"
        assert row["n"] == 3
        assert not any(r["variant"] == "drop_last_release" for r in report["trends"])

    def test_date_axis_requires_dates(self):
        releases = [Release(f"r{k}", k, cyclic_release(8)) for k in (1, 2, 3)]
        with pytest.raises(PkgnetError):
            evolution_report(releases, tiny_config(x_axis="date"), seed=0)

    def test_needs_two_releases(self):
        with pytest.raises(InsufficientDataError):
            evolution_report([Release("r1", 1, cyclic_release(8))], tiny_config(), seed=0)

    def test_ordinals_strictly_increasing(self):
        releases = [Release("r1", 2, cyclic_release(8)), Release("r2", 2, cyclic_release(8))]
        with pytest.raises(PkgnetError):
            evolution_report(releases, tiny_config(), seed=0)


class TestTables:
    def test_release_table(self, growing_report):
        table = release_table(growing_report)
        assert list(table.columns) == ["release", "ordinal", "metric", "value"]
        first = table[table["release"] == "r1"]
        assert "new" not in set(first["metric"])
        second = table[table["release"] == "r2"]
        assert int(second[second["metric"] == "new"]["value"].iloc[0]) == 4

    def test_trend_table(self, growing_report):
        table = trend_table(growing_report)
        assert len(table) == len(growing_report["trends"])
        assert {"metric", "model", "variant", "p_value", "skipped"} <= set(table.columns)
