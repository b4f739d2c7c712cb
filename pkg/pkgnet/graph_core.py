"""
依存グラフモデル
依存・競合の2種類の有向エッジを持つグラフと基本クエリ
"""
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Optional, Set, Tuple

import networkx as nx

from pkgnet.exceptions import GraphLookupError, ParseError, SelfLoopError
from pkgnet.models import DIRECTIONS, EDGE_KINDS
from pkgnet.utils import get_logger

# ロガー設定
logger = get_logger(__name__)

Edge = Tuple[str, str]


class DependencyGraph:
    """依存エッジ（i→j: iはjを必要とする）と競合エッジ（i→j: jがあるとiは入らない）のグラフ"""

    def __init__(
        self,
        nodes: Iterable[str],
        dep_edges: Iterable[Edge] = (),
        con_edges: Iterable[Edge] = (),
        versions: Optional[Mapping[str, str]] = None,
        warnings: Iterable[str] = (),
    ):
        self._nodes: FrozenSet[str] = frozenset(nodes)
        self._dep: FrozenSet[Edge] = frozenset(dep_edges)
        self._con: FrozenSet[Edge] = frozenset(con_edges)
        self.versions: Dict[str, str] = dict(versions or {})
        self.warnings: Tuple[str, ...] = tuple(warnings)

        self._graphs: Dict[str, nx.DiGraph] = {}
        for kind, edges in (("dep", self._dep), ("con", self._con)):
            for i, j in edges:
                if i == j:
                    raise SelfLoopError(f"自己ループは許可されません: {kind} {i}")
                if i not in self._nodes or j not in self._nodes:
                    raise GraphLookupError(f"エッジの端点がノード集合にありません: {kind} {i}->{j}")
            g = nx.DiGraph()
            g.add_nodes_from(sorted(self._nodes))
            g.add_edges_from(sorted(edges))
            self._graphs[kind] = g

        # ソート済み隣接タプル（乱数消費順を固定するため）
        self._out: Dict[str, Dict[str, Tuple[str, ...]]] = {
            kind: {n: tuple(sorted(g.successors(n))) for n in g if g.out_degree(n)}
            for kind, g in self._graphs.items()
        }
        self._in: Dict[str, Dict[str, Tuple[str, ...]]] = {
            kind: {n: tuple(sorted(g.predecessors(n))) for n in g if g.in_degree(n)}
            for kind, g in self._graphs.items()
        }
        self._closure_cache: Dict[str, FrozenSet[str]] = {}

    @property
    def nodes(self) -> FrozenSet[str]:
        return self._nodes

    @property
    def dep_edges(self) -> FrozenSet[Edge]:
        return self._dep

    @property
    def con_edges(self) -> FrozenSet[Edge]:
        return self._con

    def edges(self, kind: str) -> FrozenSet[Edge]:
        _check_kind(kind)
        return self._dep if kind == "dep" else self._con

    def digraph(self, kind: str = "dep") -> nx.DiGraph:
        """種別ごとの有向グラフ（読み取り専用ビュー）"""
        _check_kind(kind)
        return self._graphs[kind].copy(as_view=True)

    def __contains__(self, node: str) -> bool:
        return node in self._nodes

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, DependencyGraph):
            return NotImplemented
        return (self._nodes, self._dep, self._con) == (other._nodes, other._dep, other._con)

    def __hash__(self) -> int:
        return hash((self._nodes, self._dep, self._con))

    def __repr__(self) -> str:
        return f"DependencyGraph(nodes={len(self._nodes)}, dep={len(self._dep)}, con={len(self._con)})"

    def require(self, node: str) -> None:
        """ノード存在確認"""
        if node not in self._nodes:
            raise GraphLookupError(f"ノードが存在しません: {node}")

    def successors(self, node: str, kind: str = "dep") -> Tuple[str, ...]:
        _check_kind(kind)
        return self._out[kind].get(node, ())

    def predecessors(self, node: str, kind: str = "dep") -> Tuple[str, ...]:
        _check_kind(kind)
        return self._in[kind].get(node, ())

    def interacting_nodes(self) -> FrozenSet[str]:
        """依存・競合のいずれかを持つノード"""
        dep, con = self._graphs["dep"], self._graphs["con"]
        return frozenset(n for n in self._nodes if dep.degree(n) or con.degree(n))

    def with_dep_edges(self, dep_edges: Iterable[Edge]) -> "DependencyGraph":
        """依存エッジだけを差し替えた新しいグラフ（競合エッジは同一）"""
        return DependencyGraph(self._nodes, dep_edges, self._con, self.versions)

    def restricted_to(self, nodes: Iterable[str]) -> "DependencyGraph":
        """ノード部分集合に制限したグラフ"""
        keep = frozenset(nodes) & self._nodes
        return DependencyGraph(
            keep,
            self._graphs["dep"].subgraph(keep).edges(),
            self._graphs["con"].subgraph(keep).edges(),
            {k: v for k, v in self.versions.items() if k in keep},
        )


def _check_kind(kind: str) -> None:
    if kind not in EDGE_KINDS:
        raise ValueError(f"エッジ種別が不正です: {kind}")


def degree(graph: DependencyGraph, node: str, kind: str = "dep", direction: str = "out") -> int:
    """
    指定ノードの次数

    Args:
        kind: "dep"（依存）または "con"（競合）
        direction: "out"（iが必要とする数）または "in"（iを必要とする数）
    """
    graph.require(node)
    if direction not in DIRECTIONS:
        raise ValueError(f"向きが不正です: {direction}")
    g = graph.digraph(kind)
    return g.out_degree(node) if direction == "out" else g.in_degree(node)


def degree_sequence(graph: DependencyGraph, kind: str = "dep", direction: str = "out") -> Dict[str, int]:
    """全ノードの次数"""
    if direction not in DIRECTIONS:
        raise ValueError(f"向きが不正です: {direction}")
    g = graph.digraph(kind)
    view = g.out_degree if direction == "out" else g.in_degree
    return {node: int(d) for node, d in sorted(view)}


def dependency_closure(graph: DependencyGraph, node: str) -> FrozenSet[str]:
    """直接・間接に依存するノード集合（自身は含まない）"""
    graph.require(node)
    cached = graph._closure_cache.get(node)
    if cached is None:
        cached = frozenset(nx.descendants(graph.digraph("dep"), node))
        graph._closure_cache[node] = cached
    return cached


def symmetrized_dependency_view(graph: DependencyGraph, collapse_reciprocal: bool = False) -> nx.Graph:
    """
    依存エッジの無向射影（競合エッジは除外）

    重み（"weight" 属性）は同一ペア間の有向依存エッジ数（1または2）。
    collapse_reciprocal=True の場合は常に1。
    """
    view = nx.Graph()
    view.add_nodes_from(sorted(graph.nodes))
    for i, j in sorted(graph.dep_edges):
        if view.has_edge(i, j) and not collapse_reciprocal:
            view[i][j]["weight"] += 1
        else:
            view.add_edge(i, j, weight=1)
    return view


def read_edge_list(text: str) -> DependencyGraph:
    """
    エッジリスト形式の読み込み

    行形式: "DEP <from> <to>" / "CON <from> <to>" / "NODE <name>"、"#" 以降はコメント
    """
    nodes: Set[str] = set()
    dep: Set[Edge] = set()
    con: Set[Edge] = set()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0].upper()
        if tag == "NODE" and len(parts) == 2:
            nodes.add(parts[1])
            continue
        if tag not in ("DEP", "CON") or len(parts) != 3:
            raise ParseError(f"エッジ行の形式が不正です: {raw.strip()!r}", line_no=line_no)
        _, source, target = parts
        if source == target:
            raise SelfLoopError(f"自己ループは許可されません: {raw.strip()!r}", line_no=line_no)
        nodes.add(source)
        nodes.add(target)
        (dep if tag == "DEP" else con).add((source, target))

    graph = DependencyGraph(nodes, dep, con)
    logger.info(f"エッジリスト読み込み完了: ノード数={len(nodes)}, 依存={len(dep)}, 競合={len(con)}")
    return graph


def write_edge_list(graph: DependencyGraph) -> str:
    """エッジリスト形式への書き出し（孤立ノードはNODE行）"""
    lines = [f"# nodes={len(graph.nodes)} dep={len(graph.dep_edges)} con={len(graph.con_edges)}"]
    interacting = graph.interacting_nodes()
    lines.extend(f"NODE {n}" for n in sorted(graph.nodes - interacting))
    lines.extend(f"DEP {i} {j}" for i, j in sorted(graph.dep_edges))
    lines.extend(f"CON {i} {j}" for i, j in sorted(graph.con_edges))
    return "\n".join(lines) + "\n"


def graph_summary(graph: DependencyGraph) -> Dict[str, Any]:
    """グラフ概要（ノード数、種別ごとのエッジ数など）"""
    n_nodes = len(graph.nodes)
    n_dep = len(graph.dep_edges)
    n_con = len(graph.con_edges)
    interacting = len(graph.interacting_nodes())
    dep = graph.digraph("dep")
    with_dependencies = sum(1 for n in dep if dep.degree(n))
    return {
        "nodes": n_nodes,
        "dep_edges": n_dep,
        "con_edges": n_con,
        "interacting_nodes": interacting,
        "nodes_with_dependencies": with_dependencies,
        "non_interacting_fraction": (n_nodes - interacting) / n_nodes if n_nodes else None,
        "dep_con_ratio": n_dep / n_con if n_con else None,
    }
