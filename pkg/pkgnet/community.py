"""
コミュニティ検出モジュール
依存ネットワークの無向射影に対するLouvain法とモジュール単位の統計
"""
from typing import Any, Dict, List, Optional, Set, Union

import networkx as nx
import numpy as np
import pandas as pd

from pkgnet.exceptions import CoverageError, EmptyGraphError
from pkgnet.graph_core import DependencyGraph, symmetrized_dependency_view
from pkgnet.models import Partition
from pkgnet.utils import derive_seeds, get_logger, make_rng

# ロガー設定
logger = get_logger(__name__)

# 改善とみなす最小のモジュール性増分
GAIN_EPS = 1e-12
# 階層を進める最小のモジュール性増分
LEVEL_THRESHOLD = 1e-7


def modularity(ugraph: nx.Graph, assignment: Dict[str, int]) -> float:
    """
    重み付きNewman-Girvanモジュール性

    Q = Σ_c [ e_cc / m - (a_c / 2m)^2 ]
    孤立ノードは assignment に含まれていなくてもよい。
    """
    if ugraph.size(weight="weight") == 0:
        raise EmptyGraphError("エッジのないグラフのモジュール性は定義されません")

    communities: Dict[int, Set[str]] = {}
    singletons: List[Set[str]] = []
    for node in ugraph.nodes:
        if node in assignment:
            communities.setdefault(assignment[node], set()).add(node)
        elif ugraph.degree(node) == 0:
            singletons.append({node})
        else:
            raise CoverageError(f"パーティションにノードがありません: {node}")
    return float(nx.community.modularity(ugraph, list(communities.values()) + singletons, weight="weight"))


def _relabel(communities: List[Set[str]]) -> Dict[str, int]:
    """モジュールIDをノード名順の初出順に振り直す"""
    owner = {node: k for k, members in enumerate(communities) for node in members}
    mapping: Dict[int, int] = {}
    relabeled = {}
    for node in sorted(owner):
        module = owner[node]
        if module not in mapping:
            mapping[module] = len(mapping)
        relabeled[node] = mapping[module]
    return relabeled


def _shuffled_copy(ugraph: nx.Graph, rng: np.random.Generator) -> nx.Graph:
    """ノードとエッジの挿入順をシャッフルしたコピー（訪問順と候補モジュールの走査順が決まる）"""
    shuffled = nx.Graph()
    nodes = sorted(ugraph.nodes)
    shuffled.add_nodes_from(nodes[i] for i in rng.permutation(len(nodes)))
    edges = sorted(ugraph.edges(data="weight"))
    shuffled.add_weighted_edges_from(edges[i] for i in rng.permutation(len(edges)))
    return shuffled


def _louvain_once(ugraph: nx.Graph, rng: np.random.Generator) -> Partition:
    """Louvain法1回分（局所移動と集約の各階層を記録）"""
    shuffled = _shuffled_copy(ugraph, rng)
    levels: List[Dict[str, int]] = []
    level_q: List[float] = []
    for communities in nx.community.louvain_partitions(
        shuffled,
        weight="weight",
        resolution=1,
        threshold=LEVEL_THRESHOLD,
        seed=int(rng.integers(2 ** 31)),
    ):
        assignment = _relabel(communities)
        levels.append(assignment)
        level_q.append(modularity(ugraph, assignment))
    return Partition(assignment=levels[-1], q=level_q[-1], levels=levels, level_q=level_q)


def louvain(
    ugraph: nx.Graph,
    restarts: int = 10,
    seed: Union[None, int, np.random.SeedSequence] = None,
) -> Partition:
    """
    Louvain法によるモジュール性最適化

    各リスタートは派生シードでノード訪問順と候補の走査順をシャッフルし、
    Qが最大のパーティションを返す（同値なら先に見つかったもの）。
    """
    if len(ugraph) == 0:
        raise EmptyGraphError("ノードのないグラフにはLouvain法を適用できません")
    if restarts < 1:
        raise ValueError(f"restarts は1以上で指定してください: {restarts}")

    if ugraph.size(weight="weight") == 0:
        # エッジがなければ全ノードが単独モジュール
        assignment = {node: i for i, node in enumerate(sorted(ugraph.nodes))}
        return Partition(assignment=assignment, q=0.0)

    best: Optional[Partition] = None
    for child in derive_seeds(seed if seed is not None else np.random.SeedSequence(), restarts):
        partition = _louvain_once(ugraph, make_rng(child))
        if best is None or partition.q > best.q + GAIN_EPS:
            best = partition

    # 単一モジュール（Q=0）を下回る結果は返さない
    if best.q < 0.0:
        single = {node: 0 for node in ugraph.nodes}
        best = Partition(assignment=single, q=modularity(ugraph, single), levels=[single], level_q=[0.0])

    logger.info(f"Louvain完了: ノード数={len(ugraph)}, モジュール数={len(set(best.assignment.values()))}, Q={best.q:.4f}")
    return best


def dependency_partition(
    graph: DependencyGraph,
    restarts: int = 10,
    seed: Union[None, int, np.random.SeedSequence] = None,
    collapse_reciprocal: bool = False,
) -> Partition:
    """相互作用を持つパッケージのみで依存ネットワークをコミュニティ分割"""
    interacting = graph.interacting_nodes()
    if not interacting:
        raise EmptyGraphError("相互作用を持つパッケージがありません")
    view = symmetrized_dependency_view(graph.restricted_to(interacting), collapse_reciprocal)
    return louvain(view, restarts, seed)


def major_module_count(partition: Partition, threshold: float = 0.05) -> int:
    """パッケージ総数の threshold 以上を含むモジュール数"""
    if not 0 < threshold < 1:
        raise ValueError(f"threshold は(0,1)の範囲で指定してください: {threshold}")
    total = len(partition.assignment)
    return sum(1 for size in partition.module_sizes().values() if size >= threshold * total)


def within_module_fraction(graph: DependencyGraph, partition: Partition, kind: str = "dep") -> Optional[float]:
    """
    両端が同じモジュールにあるエッジの割合

    該当種別のエッジがない場合は None。
    """
    edges = graph.edges(kind)
    if not edges:
        return None

    assignment = partition.assignment
    inside = 0
    for i, j in edges:
        if i not in assignment or j not in assignment:
            missing = i if i not in assignment else j
            raise CoverageError(f"パーティションにノードがありません: {missing}")
        if assignment[i] == assignment[j]:
            inside += 1
    return inside / len(edges)


def partition_table(partition: Partition) -> pd.DataFrame:
    """CSV出力用の表（列: package, module）"""
    rows = sorted(partition.assignment.items())
    return pd.DataFrame(rows, columns=["package", "module"])


def module_summary(graph: DependencyGraph, partition: Partition, threshold: float = 0.05) -> Dict[str, Any]:
    """モジュール概要（サイズ、Q、モジュール内エッジ割合）"""
    summary = partition.to_dict()
    summary.update({
        "major_module_threshold": threshold,
        "major_modules": major_module_count(partition, threshold),
        "within_module_dep_fraction": within_module_fraction(graph, partition, "dep"),
        "within_module_con_fraction": within_module_fraction(graph, partition, "con"),
    })
    return summary
