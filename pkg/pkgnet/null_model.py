"""
ヌルモデルモジュール
次数保存の局所リワイヤリング、ヌルアンサンブル、zスコアと経験的p値
"""
from typing import Any, Callable, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from pkgnet.exceptions import EnsembleError, InsufficientDataError, PkgnetError, RewireError
from pkgnet.graph_core import DependencyGraph
from pkgnet.models import EnsembleStats
from pkgnet.utils import derive_seeds, get_logger, make_rng

# ロガー設定
logger = get_logger(__name__)

Seed = Union[None, int, np.random.SeedSequence, np.random.Generator]

# 1エッジあたりの成功スワップ数の既定値
DEFAULT_SWAPS_PER_EDGE = 10
# 目標スワップ数に対する試行回数の上限倍率
MAX_ATTEMPTS_FACTOR = 100
# 乱数を一括生成する単位
_BATCH = 4096


def double_edge_swap(
    graph: DependencyGraph,
    n_swaps: int,
    seed: Seed = None,
    max_attempts: Optional[int] = None,
) -> DependencyGraph:
    """
    有向ダブルエッジスワップを n_swaps 回成功するまで繰り返す

    (a→b), (c→d) を (a→d), (c→b) に置き換える。自己ループ・重複エッジを生むスワップは棄却。
    各ノードの依存入次数・出次数と競合エッジ集合は変わらない。
    """
    edges = sorted(graph.dep_edges)
    m = len(edges)
    if m < 2:
        raise RewireError(f"依存エッジが2本未満のためリワイヤリングできません: {m}")

    if max_attempts is None:
        max_attempts = MAX_ATTEMPTS_FACTOR * max(n_swaps, 1)

    rng = make_rng(seed)
    edge_set = set(edges)
    done = 0
    attempts = 0
    while done < n_swaps and attempts < max_attempts:
        for e1, e2 in rng.integers(0, m, size=(_BATCH, 2)):
            attempts += 1
            if e1 != e2:
                a, b = edges[e1]
                c, d = edges[e2]
                if a != d and c != b and (a, d) not in edge_set and (c, b) not in edge_set:
                    edge_set.discard((a, b))
                    edge_set.discard((c, d))
                    edge_set.add((a, d))
                    edge_set.add((c, b))
                    edges[e1] = (a, d)
                    edges[e2] = (c, b)
                    done += 1
            if done >= n_swaps or attempts >= max_attempts:
                break

    if done < n_swaps:
        logger.warning(f"リワイヤリングの目標スワップ数に未達: 成功={done}/{n_swaps}, 試行={attempts}")
    return graph.with_dep_edges(edges)


def rewire(
    graph: DependencyGraph,
    swaps_per_edge: int = DEFAULT_SWAPS_PER_EDGE,
    seed: Seed = None,
) -> DependencyGraph:
    """依存エッジ数 × swaps_per_edge 回のスワップによる次数保存ランダム化"""
    if swaps_per_edge < 1:
        raise ValueError(f"swaps_per_edge は1以上で指定してください: {swaps_per_edge}")
    return double_edge_swap(graph, swaps_per_edge * len(graph.dep_edges), seed)


def empirical_pvalue(observed: float, samples: Sequence[float], tail: str = "upper") -> float:
    """
    経験的p値

    upper: 観測値以上のサンプルの割合、lower: 観測値以下のサンプルの割合
    """
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise InsufficientDataError("p値の計算にはサンプルが必要です")
    if tail == "upper":
        return float(np.count_nonzero(values >= observed)) / values.size
    if tail == "lower":
        return float(np.count_nonzero(values <= observed)) / values.size
    raise ValueError(f"tail が不正です: {tail}")


def summarize(observed: float, samples: Sequence[float], tail: str = "upper", statistic: str = "") -> EnsembleStats:
    """観測値とヌルサンプルからEnsembleStatsを作成（標準偏差は不偏, ddof=1）"""
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise InsufficientDataError("ヌルサンプルがありません")
    null_mean = float(values.mean())
    null_std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    z = (observed - null_mean) / null_std if null_std > 0 else None
    return EnsembleStats(
        observed=float(observed),
        null_mean=null_mean,
        null_std=null_std,
        z=z,
        p=empirical_pvalue(observed, values, tail),
        n_samples=int(values.size),
        statistic=statistic,
        samples=tuple(float(v) for v in values),
    )


def _louvain_q(graph: DependencyGraph, seed: np.random.SeedSequence, restarts: int = 10,
               collapse_reciprocal: bool = False, **_: Any) -> float:
    """統計量: 依存ネットワークのLouvainモジュール性"""
    from pkgnet.community import dependency_partition

    return dependency_partition(graph, restarts, seed, collapse_reciprocal).q


def _mean_installed_fraction(graph: DependencyGraph, seed: np.random.SeedSequence, replicates: int = 1000,
                             conflict_mode: str = "as_declared", **_: Any) -> float:
    """統計量: ランダムインストール過程の平均インストール割合"""
    from pkgnet.install_sim import run_replicates

    return run_replicates(graph, replicates, seed, conflict_mode=conflict_mode).mean


# 名前付き統計量
STATISTICS: Dict[str, Callable[..., float]] = {
    "louvain_q": _louvain_q,
    "mean_installed_fraction": _mean_installed_fraction,
}


def register_statistic(name: str, func: Callable[..., float]) -> None:
    """統計量の登録（func(graph, seed, **params) -> float）"""
    STATISTICS[name] = func


def _null_sample(
    graph: DependencyGraph,
    index: int,
    child: np.random.SeedSequence,
    func: Callable[..., float],
    swaps_per_edge: int,
    params: Dict[str, Any],
) -> float:
    """ヌルネットワーク1本分: リワイヤリング後に統計量を計算"""
    rewire_seed, stat_seed = child.spawn(2)
    try:
        null_graph = rewire(graph, swaps_per_edge, rewire_seed)
        return float(func(null_graph, stat_seed, **params))
    except PkgnetError as e:
        raise EnsembleError(str(e), index) from e


def ensemble(
    graph: DependencyGraph,
    n_networks: int,
    statistic: str,
    seed: Union[int, np.random.SeedSequence],
    swaps_per_edge: int = DEFAULT_SWAPS_PER_EDGE,
    jobs: int = 1,
    tail: str = "upper",
    **params: Any,
) -> EnsembleStats:
    """
    観測グラフと n_networks 本のリワイヤリンググラフで統計量を比較

    各ネットワークのシードはマスターシードから決定的に派生するため、並列数に結果は依存しない。
    """
    if n_networks < 2:
        raise ValueError(f"n_networks は2以上で指定してください: {n_networks}")
    if statistic not in STATISTICS:
        raise ValueError(f"未知の統計量です: {statistic}")
    func = STATISTICS[statistic]

    children = derive_seeds(seed, n_networks + 1)
    try:
        observed = float(func(graph, children[0], **params))
    except PkgnetError as e:
        logger.error(f"観測グラフでの統計量計算エラー: {e}")
        raise

    samples = Parallel(n_jobs=jobs)(
        delayed(_null_sample)(graph, i, child, func, swaps_per_edge, params)
        for i, child in enumerate(children[1:])
    )

    stats = summarize(observed, samples, tail, statistic)
    logger.info(
        f"ヌルアンサンブル完了: 統計量={statistic}, n={n_networks}, 観測値={observed:.4f}, "
        f"平均={stats.null_mean:.4f}, z={stats.z}, p={stats.p}"
    )
    return stats


def samples_table(stats: EnsembleStats) -> pd.DataFrame:
    """ヌルサンプルのCSV出力用の表（列: network, value）"""
    return pd.DataFrame({"network": range(len(stats.samples)), "value": list(stats.samples)})
