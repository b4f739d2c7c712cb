"""
ローカルインストール過程シミュレーション
パッケージをランダムに選び、依存閉包と競合に従ってインストール/破棄を決める
"""
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from pkgnet.exceptions import EmptyGraphError, InstallStateError
from pkgnet.graph_core import DependencyGraph, dependency_closure
from pkgnet.models import EnsembleStats, InstallDecision, InstallOutcome, InstallState, ReplicateStats
from pkgnet.null_model import DEFAULT_SWAPS_PER_EDGE, ensemble
from pkgnet.utils import derive_seeds, get_logger, make_rng

# ロガー設定
logger = get_logger(__name__)

Seed = Union[None, int, np.random.SeedSequence, np.random.Generator]

# 競合の扱い
CONFLICT_MODES = ("as_declared", "symmetric")

# ヒストグラムのビン数
HISTOGRAM_BINS = 20


def _conflict_targets(graph: DependencyGraph, node: str, conflict_mode: str) -> Tuple[str, ...]:
    """node がインストールを妨げられる相手"""
    if conflict_mode == "symmetric":
        return graph.successors(node, "con") + graph.predecessors(node, "con")
    return graph.successors(node, "con")


def _blocked(graph: DependencyGraph, node: str, installed: Set[str], conflict_mode: str) -> bool:
    return any(t in installed for t in _conflict_targets(graph, node, conflict_mode))


def _reciprocal(graph: DependencyGraph, u: str, v: str, conflict_mode: str) -> bool:
    """u と v が互いに競合するか"""
    if conflict_mode == "symmetric":
        return v in graph.successors(u, "con") or u in graph.successors(v, "con")
    return v in graph.successors(u, "con") and u in graph.successors(v, "con")


def _reachable(graph: DependencyGraph, root: str, excluded: Set[str]) -> Set[str]:
    """excluded を通らずに root から依存エッジで到達できるノード（root を含む）"""
    view = nx.restricted_view(graph.digraph("dep"), excluded, [])
    return nx.descendants(view, root) | {root}


def _first_reciprocal_pair(graph: DependencyGraph, members: Set[str], conflict_mode: str) -> Optional[Tuple[str, str]]:
    for u in sorted(members):
        for v in _conflict_targets(graph, u, conflict_mode):
            if v in members and u < v and _reciprocal(graph, u, v, conflict_mode):
                return u, v
    return None


def evaluate_candidate(
    graph: DependencyGraph,
    state: InstallState,
    pkg: str,
    rng: Seed = None,
    conflict_mode: str = "as_declared",
) -> InstallDecision:
    """
    候補パッケージの判定

    1. インストール済みパッケージと競合 → 破棄
    2. 依存閉包（未インストール分）に破棄済み、またはインストール済みと競合するものがある → 破棄
    3. 閉包内に相互競合のペアがあれば一方をランダムに残し他方を除外。
       除外された側が残った側を必要とする場合は破棄
    4. 残ったメンバー間に一方向の競合がある → 破棄
    5. 除外されたパッケージを、残った側を直接依存に持たないメンバーが必要とする場合は破棄
    6. それ以外は候補と閉包をまとめてインストール
    """
    if pkg not in state.remaining:
        raise InstallStateError(f"未処理のパッケージではありません: {pkg}")
    if conflict_mode not in CONFLICT_MODES:
        raise ValueError(f"conflict_mode が不正です: {conflict_mode}")

    installed = state.installed
    if _blocked(graph, pkg, installed, conflict_mode):
        return InstallDecision(install=False, reason="conflict")

    pending = {c for c in dependency_closure(graph, pkg) if c not in installed}
    for member in sorted(pending):
        if member in state.discarded:
            return InstallDecision(install=False, reason="dependency_discarded")
        if _blocked(graph, member, installed, conflict_mode):
            return InstallDecision(install=False, reason="dependency_conflict")

    members = pending | {pkg}
    winners: Dict[str, str] = {}
    pair = _first_reciprocal_pair(graph, members, conflict_mode)
    while pair is not None:
        rng = make_rng(rng)
        keep = int(rng.integers(2))
        winner, loser = pair[keep], pair[1 - keep]
        if loser == pkg:
            return InstallDecision(install=False, reason="reciprocal_conflict")
        winners[loser] = winner
        members = _reachable(graph, pkg, set(winners)) - installed
        pair = _first_reciprocal_pair(graph, members, conflict_mode)

    for loser in sorted(winners):
        if winners[loser] in dependency_closure(graph, loser):
            return InstallDecision(install=False, reason="requires_excluded")

    for member in sorted(members):
        if any(t in members for t in _conflict_targets(graph, member, conflict_mode)):
            return InstallDecision(install=False, reason="dependency_conflict")

    # 除外側への依存は、残った側も直接依存に持つ場合のみ許容
    for member in sorted(members):
        successors = graph.successors(member, "dep")
        for dependency in successors:
            if dependency in winners and winners[dependency] not in successors:
                return InstallDecision(install=False, reason="requires_excluded")

    return InstallDecision(
        install=True,
        packages=frozenset(members),
        excluded=frozenset(winners),
    )


def apply_decision(state: InstallState, pkg: str, decision: InstallDecision) -> None:
    """判定結果を状態に反映"""
    if decision.install:
        state.installed |= decision.packages
        state.remaining -= decision.packages
        state.discarded |= decision.excluded
        state.remaining -= decision.excluded
    else:
        state.discarded.add(pkg)
        state.remaining.discard(pkg)


def run_replicate(
    graph: DependencyGraph,
    seed: Seed = None,
    conflict_mode: str = "as_declared",
    initial_installed: Optional[Iterable[str]] = None,
) -> InstallOutcome:
    """
    ローカルインストール過程1回分

    相互作用を持つパッケージのみを対象に、未処理のものから一様ランダムに選んで判定を繰り返す。
    initial_installed を指定すると、それらがインストール済みの状態から開始する。
    """
    nodes = graph.interacting_nodes()
    if not nodes:
        raise EmptyGraphError("相互作用を持つパッケージがありません")

    installed: Set[str] = set()
    for node in initial_installed or ():
        graph.require(node)
        installed.add(node)
    state = InstallState(installed=installed, discarded=set(), remaining=set(nodes) - installed)

    rng = make_rng(seed)
    # 一様抽出用の配列（削除はスワップで行う）
    pool: List[str] = sorted(state.remaining)
    position = {node: i for i, node in enumerate(pool)}

    def remove(node: str) -> None:
        i = position.pop(node)
        last = pool.pop()
        if i < len(pool):
            pool[i] = last
            position[last] = i

    while pool:
        pkg = pool[int(rng.integers(len(pool)))]
        decision = evaluate_candidate(graph, state, pkg, rng, conflict_mode)
        apply_decision(state, pkg, decision)
        if decision.install:
            for node in sorted(decision.packages | decision.excluded):
                if node in position:
                    remove(node)
        else:
            remove(pkg)

    return InstallOutcome(installed=frozenset(state.installed), discarded=frozenset(state.discarded))


def _run_chunk(
    graph: DependencyGraph,
    seeds: List[np.random.SeedSequence],
    conflict_mode: str,
    initial_installed: Optional[FrozenSet[str]],
) -> List[Tuple[float, int]]:
    results = []
    for child in seeds:
        outcome = run_replicate(graph, child, conflict_mode, initial_installed)
        results.append((outcome.fraction, len(outcome.installed)))
    return results


def run_replicates(
    graph: DependencyGraph,
    n: int,
    seed: Union[int, np.random.SeedSequence],
    conflict_mode: str = "as_declared",
    initial_installed: Optional[Iterable[str]] = None,
    trace: bool = False,
    jobs: int = 1,
) -> ReplicateStats:
    """
    n回のレプリケートと集計

    各レプリケートのシードはマスターシードから派生するため、並列数に結果は依存しない。
    trace=True の場合は各時点までの分散の推移も返す。
    """
    if n < 1:
        raise ValueError(f"レプリケート数は1以上で指定してください: {n}")

    seeds = derive_seeds(seed, n)
    initial = frozenset(initial_installed) if initial_installed is not None else None
    if jobs > 1:
        chunks = [seeds[i::jobs] for i in range(jobs)]
        parts = Parallel(n_jobs=jobs)(
            delayed(_run_chunk)(graph, chunk, conflict_mode, initial) for chunk in chunks
        )
        # 元のレプリケート順に並べ直す
        results: List[Tuple[float, int]] = [None] * n
        for offset, part in enumerate(parts):
            for j, item in enumerate(part):
                results[offset + j * jobs] = item
    else:
        results = _run_chunk(graph, seeds, conflict_mode, initial)

    fractions = np.array([f for f, _ in results], dtype=float)
    counts, edges = np.histogram(fractions, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
    histogram = {
        f"{edges[i]:.2f}-{edges[i + 1]:.2f}": int(c) for i, c in enumerate(counts)
    }

    variance_trace = None
    if trace:
        index = np.arange(1, n + 1)
        running_mean = np.cumsum(fractions) / index
        variance_trace = [float(v) for v in np.cumsum(fractions ** 2) / index - running_mean ** 2]

    stats = ReplicateStats(
        n=n,
        mean=float(fractions.mean()),
        std=float(fractions.std()),
        min=float(fractions.min()),
        max=float(fractions.max()),
        histogram=histogram,
        fractions=[float(f) for f in fractions],
        installed_counts=[c for _, c in results],
        variance_trace=variance_trace,
    )
    logger.info(f"インストール過程完了: レプリケート={n}, 平均割合={stats.mean:.4f}, 標準偏差={stats.std:.4f}")
    return stats


def modularity_effect(
    graph: DependencyGraph,
    n_networks: int = 100,
    n_replicates: int = 1000,
    seed: Union[int, np.random.SeedSequence] = 0,
    swaps_per_edge: int = DEFAULT_SWAPS_PER_EDGE,
    jobs: int = 1,
    conflict_mode: str = "as_declared",
) -> EnsembleStats:
    """
    モジュール構造がインストール割合に与える効果

    観測値は実グラフでの平均インストール割合、ヌルは依存エッジをリワイヤリングした
    グラフ（競合エッジは同一）での平均。p値は観測値以上となったヌルネットワークの割合。
    """
    return ensemble(
        graph,
        n_networks,
        "mean_installed_fraction",
        seed,
        swaps_per_edge=swaps_per_edge,
        jobs=jobs,
        tail="upper",
        replicates=n_replicates,
        conflict_mode=conflict_mode,
    )


def replicates_table(stats: ReplicateStats) -> pd.DataFrame:
    """レプリケートごとのCSV出力用の表（列: replicate, fraction, installed）"""
    return pd.DataFrame({
        "replicate": range(stats.n),
        "fraction": stats.fractions,
        "installed": stats.installed_counts,
    })
