"""
コミュニティ検出のテスト
"""
import networkx as nx
import numpy as np
import pytest

from conftest import make_graph
from pkgnet.community import (
    dependency_partition,
    louvain,
    major_module_count,
    modularity,
    module_summary,
    partition_table,
    within_module_fraction,
)
from pkgnet.exceptions import CoverageError, EmptyGraphError
from pkgnet.graph_core import symmetrized_dependency_view
from pkgnet.models import Partition


def set_partitions(items):
    """全ての集合分割を列挙（制限成長列）"""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        for i in range(len(partition)):
            yield partition[:i] + [[first] + partition[i]] + partition[i + 1:]
        yield [[first]] + partition


def weighted_graph(nodes, edges=()):
    g = nx.Graph()
    g.add_nodes_from(nodes)
    g.add_weighted_edges_from(edges)
    return g


def exhaustive_optimum(ugraph):
    return max(nx.community.modularity(ugraph, p, weight="weight") for p in set_partitions(sorted(ugraph.nodes)))


def bridged_cliques(size):
    """2つのクリークを1本のエッジでつないだグラフ"""
    dep = []
    for prefix in ("x", "y"):
        for i in range(size):
            for j in range(i + 1, size):
                dep.append((f"{prefix}{i}", f"{prefix}{j}"))
    dep.append(("x0", "y0"))
    return make_graph(dep=dep)


class TestModularity:
    def test_single_module(self, two_triangles):
        view = symmetrized_dependency_view(two_triangles)
        assert modularity(view, {n: 0 for n in view.nodes}) == pytest.approx(0.0, abs=1e-12)

    def test_two_cliques(self, two_triangles):
        view = symmetrized_dependency_view(two_triangles)
        assignment = {n: 0 if n in "abc" else 1 for n in view.nodes}
        assert modularity(view, assignment) == pytest.approx(0.5, abs=1e-12)

    def test_matches_formula(self, concentrated_conflict_graph):
        view = symmetrized_dependency_view(concentrated_conflict_graph)
        m = len(concentrated_conflict_graph.dep_edges)
        rng = np.random.default_rng(3)
        for _ in range(5):
            assignment = {n: int(rng.integers(4)) for n in view.nodes}
            expected = 0.0
            for k in range(4):
                internal = sum(1 for i, j in concentrated_conflict_graph.dep_edges
                               if assignment[i] == assignment[j] == k)
                strength = sum(view.degree(n, weight="weight") for n, c in assignment.items() if c == k)
                expected += internal / m - (strength / (2 * m)) ** 2
            assert modularity(view, assignment) == pytest.approx(expected, abs=1e-9)

    def test_reciprocal_weights(self):
        view = symmetrized_dependency_view(make_graph(dep=[("a", "b"), ("b", "a"), ("b", "c"), ("c", "d")]))
        assignment = {"a": 0, "b": 0, "c": 1, "d": 1}
        # m=4: {a,b} 内部2・次数和5、{c,d} 内部1・次数和3
        expected = (2 / 4 - (5 / 8) ** 2) + (1 / 4 - (3 / 8) ** 2)
        assert modularity(view, assignment) == pytest.approx(expected, abs=1e-12)

    def test_relabel_invariant(self, two_triangles):
        view = symmetrized_dependency_view(two_triangles)
        first = {n: 0 if n in "abc" else 1 for n in view.nodes}
        second = {n: 7 if n in "abc" else 3 for n in view.nodes}
        assert modularity(view, first) == modularity(view, second)

    def test_bounds(self, clique_ring):
        view = symmetrized_dependency_view(clique_ring)
        rng = np.random.default_rng(5)
        for _ in range(10):
            q = modularity(view, {n: int(rng.integers(6)) for n in view.nodes})
            assert -1.0 <= q <= 1.0

    def test_missing_node(self, two_triangles):
        view = symmetrized_dependency_view(two_triangles)
        with pytest.raises(CoverageError):
            modularity(view, {"a": 0, "b": 0})

    def test_isolated_node_may_be_missing(self):
        view = weighted_graph(["a", "b", "lonely"], [("a", "b", 1)])
        assert modularity(view, {"a": 0, "b": 0}) == pytest.approx(0.0)

    def test_no_edges(self):
        with pytest.raises(EmptyGraphError):
            modularity(weighted_graph(["a"]), {"a": 0})


class TestLouvain:
    def test_two_triangles(self, two_triangles):
        partition = louvain(symmetrized_dependency_view(two_triangles), restarts=10, seed=1)
        assert partition.q == pytest.approx(0.5, abs=1e-9)
        assert len(set(partition.assignment.values())) == 2
        assert partition.assignment["a"] == partition.assignment["b"] == partition.assignment["c"]

    def test_clique_ring_recovered(self, clique_ring):
        partition = louvain(symmetrized_dependency_view(clique_ring), restarts=10, seed=2)
        modules = {frozenset(nodes) for nodes in partition.modules().values()}
        expected = {frozenset(f"c{c}_{i}" for i in range(8)) for c in range(4)}
        assert modules == expected
        assert partition.q == pytest.approx(modularity(symmetrized_dependency_view(clique_ring), partition.assignment))

    def test_complete_graph(self):
        nodes = [f"n{i}" for i in range(6)]
        graph = make_graph(dep=[(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]])
        partition = louvain(symmetrized_dependency_view(graph), restarts=5, seed=3)
        assert partition.q >= -1e-12

    @pytest.mark.parametrize("size", [3, 4])
    def test_matches_exhaustive_optimum(self, size):
        view = symmetrized_dependency_view(bridged_cliques(size))
        partition = louvain(view, restarts=10, seed=4)
        assert partition.q == pytest.approx(exhaustive_optimum(view), abs=1e-9)

    def test_two_triangles_exhaustive(self, two_triangles):
        view = symmetrized_dependency_view(two_triangles)
        assert exhaustive_optimum(view) == pytest.approx(0.5, abs=1e-9)

    def test_levels_non_decreasing(self, clique_ring):
        partition = louvain(symmetrized_dependency_view(clique_ring), restarts=3, seed=5)
        assert partition.level_q
        assert all(b >= a - 1e-12 for a, b in zip(partition.level_q, partition.level_q[1:]))
        assert partition.level_q[-1] == pytest.approx(partition.q)

    def test_seed_reproducible(self, concentrated_conflict_graph):
        view = symmetrized_dependency_view(concentrated_conflict_graph)
        first = louvain(view, restarts=4, seed=99)
        second = louvain(view, restarts=4, seed=99)
        assert first.assignment == second.assignment
        assert first.q == second.q

    def test_ties_follow_shuffled_order(self):
        # 6ノードの環は回転対称なので、同値の分割のどれが選ばれるかはシードで変わる
        ring = make_graph(dep=[(f"r{i}", f"r{(i + 1) % 6}") for i in range(6)])
        view = symmetrized_dependency_view(ring)
        found = {
            frozenset(frozenset(m) for m in louvain(view, restarts=1, seed=s).modules().values())
            for s in range(20)
        }
        assert len(found) > 1

    def test_no_edges_singletons(self):
        partition = louvain(weighted_graph(["a", "b"]), restarts=2, seed=0)
        assert partition.q == 0.0
        assert len(set(partition.assignment.values())) == 2

    def test_empty_graph(self):
        with pytest.raises(EmptyGraphError):
            louvain(weighted_graph([]), restarts=1, seed=0)

    def test_invalid_restarts(self, two_triangles):
        with pytest.raises(ValueError):
            louvain(symmetrized_dependency_view(two_triangles), restarts=0, seed=0)


class TestModuleStatistics:
    def test_dependency_partition_excludes_isolated(self, two_triangles):
        graph = make_graph(dep=list(two_triangles.dep_edges), nodes=["lonely"])
        partition = dependency_partition(graph, restarts=3, seed=0)
        assert "lonely" not in partition.assignment
        assert partition.q == pytest.approx(0.5, abs=1e-9)

    def test_dependency_partition_includes_conflict_only_nodes(self, two_triangles):
        graph = make_graph(dep=list(two_triangles.dep_edges), con=[("a", "solo")])
        partition = dependency_partition(graph, restarts=3, seed=0)
        assert "solo" in partition.assignment

    def test_major_modules_equal(self):
        partition = Partition(assignment={f"n{i}": i % 2 for i in range(10)}, q=0.0)
        assert major_module_count(partition, 0.05) == 2

    def test_major_modules_with_singletons(self):
        assignment = {f"big{i}": 0 for i in range(96)}
        assignment.update({f"single{i}": i + 1 for i in range(4)})
        assert major_module_count(Partition(assignment=assignment, q=0.0), 0.05) == 1

    def test_major_modules_invalid_threshold(self):
        with pytest.raises(ValueError):
            major_module_count(Partition(assignment={"a": 0}, q=0.0), 1.5)

    def test_within_module_fraction(self):
        graph = make_graph(dep=[("a", "b"), ("c", "d"), ("a", "c")], con=[("a", "b"), ("b", "a")])
        partition = Partition(assignment={"a": 0, "b": 0, "c": 1, "d": 1}, q=0.0)
        assert within_module_fraction(graph, partition, "dep") == pytest.approx(2 / 3)
        assert within_module_fraction(graph, partition, "con") == pytest.approx(1.0)

    def test_conflicts_between_modules(self):
        graph = make_graph(dep=[("a", "b"), ("c", "d")], con=[("a", "c")])
        partition = Partition(assignment={"a": 0, "b": 0, "c": 1, "d": 1}, q=0.0)
        assert within_module_fraction(graph, partition, "con") == 0.0

    def test_no_edges_of_kind(self, two_triangles):
        partition = Partition(assignment={n: 0 for n in two_triangles.nodes}, q=0.0)
        assert within_module_fraction(two_triangles, partition, "con") is None

    def test_coverage_error(self):
        graph = make_graph(dep=[("a", "b")])
        with pytest.raises(CoverageError):
            within_module_fraction(graph, Partition(assignment={"a": 0}, q=0.0), "dep")

    def test_summary_and_table(self, two_triangles):
        partition = dependency_partition(two_triangles, restarts=3, seed=0)
        summary = module_summary(two_triangles, partition)
        assert summary["n_modules"] == 2
        assert summary["major_modules"] == 2
        assert summary["within_module_dep_fraction"] == pytest.approx(1.0)
        assert summary["within_module_con_fraction"] is None
        table = partition_table(partition)
        assert list(table.columns) == ["package", "module"]
        assert list(table["package"]) == sorted(two_triangles.nodes)
