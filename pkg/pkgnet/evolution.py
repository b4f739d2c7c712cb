"""
リリース間の進化解析モジュール
パッケージの入れ替わり、成長回帰、リリースごとの指標と傾向検定
"""
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from pkgnet.community import dependency_partition, major_module_count, within_module_fraction
from pkgnet.config import RunConfig
from pkgnet.degree_stats import distribution_fits, least_squares
from pkgnet.exceptions import DomainError, InsufficientDataError, PkgnetError
from pkgnet.graph_core import DependencyGraph, graph_summary
from pkgnet.install_sim import modularity_effect, run_replicates
from pkgnet.models import FitResult, ReleaseDiff
from pkgnet.null_model import ensemble
from pkgnet.utils import derive_seeds, finite_or_none, get_logger

# ロガー設定
logger = get_logger(__name__)

# 傾向検定の定義: (指標, モデル)
COUNT_TRENDS = ("packages", "dep_edges", "con_edges", "deprecated", "kept", "new")
LINEAR_TRENDS = (
    "dep_con_ratio",
    "non_interacting_fraction",
    "modularity_q",
    "major_modules",
    "within_module_dep_fraction",
    "within_module_con_fraction",
    "installed_fraction_mean",
    "install_z",
)
# 指標間の回帰: (目的変数, 説明変数)
CROSS_TRENDS = (
    ("n_modules", "nodes_with_dependencies"),
    ("installed_fraction_mean", "modularity_z"),
)
DEGREE_SERIES = (("dep", "in"), ("dep", "out"), ("con", "in"), ("con", "out"))


@dataclass
class Release:
    """1リリース分の入力"""
    label: str
    ordinal: int
    graph: DependencyGraph
    date: Optional[str] = None


def release_diff(prev: DependencyGraph, next: DependencyGraph) -> ReleaseDiff:
    """
    連続リリース間の差分

    deprecated = 前のみ, kept = 両方, new = 次のみ。
    両方にバージョン情報がある場合は、kept のうちバージョンが変わった数も返す。
    """
    prev_nodes, next_nodes = prev.nodes, next.nodes
    kept = prev_nodes & next_nodes
    changed = None
    if prev.versions and next.versions:
        changed = sum(1 for name in kept if prev.versions.get(name) != next.versions.get(name))
    return ReleaseDiff(
        deprecated=frozenset(prev_nodes - next_nodes),
        kept=frozenset(kept),
        new=frozenset(next_nodes - prev_nodes),
        kept_version_changed=changed,
    )


def regress(series: Sequence[Tuple[float, float]], model: str = "linear") -> FitResult:
    """
    時系列の回帰

    linear: y を x に回帰、exponential: ln y を x に回帰
    """
    if len(series) < 3:
        raise InsufficientDataError(f"回帰には3点以上が必要です: n={len(series)}")
    x = np.array([p[0] for p in series], dtype=float)
    y = np.array([p[1] for p in series], dtype=float)
    if model == "exponential":
        if np.any(y <= 0):
            raise DomainError("指数回帰には正の値が必要です")
        return least_squares(x, np.log(y), model)
    if model == "linear":
        return least_squares(x, y, model)
    raise ValueError(f"モデルが不正です: {model}")


def _x_values(releases: Sequence[Release], x_axis: str) -> Dict[str, float]:
    """回帰の横軸（リリース序数またはリリース日からの経過日数）"""
    if x_axis == "date":
        missing = [r.label for r in releases if not r.date]
        if missing:
            raise PkgnetError(f"リリース日が指定されていません: {', '.join(missing)}")
        dates = pd.to_datetime([r.date for r in releases])
        origin = dates.min()
        return {r.label: float((d - origin).days) for r, d in zip(releases, dates)}
    return {r.label: float(r.ordinal) for r in releases}


def _cell(errors: Dict[str, str], metric: str, func: Callable[[], Any]) -> Any:
    """指標1セルの計算（失敗時はNoneとエラー記録）"""
    try:
        return func()
    except PkgnetError as e:
        errors[metric] = str(e)
        logger.warning(f"指標の計算に失敗: {metric}: {e}")
        return None


def release_metrics(graph: DependencyGraph, config: RunConfig, seed: np.random.SeedSequence) -> Tuple[Dict[str, Any], Dict[str, str]]:
    """1リリース分の指標"""
    errors: Dict[str, str] = {}
    metrics: Dict[str, Any] = {}
    partition_seed, modularity_seed, install_seed, effect_seed = seed.spawn(4)

    summary = graph_summary(graph)
    metrics.update({
        "packages": summary["nodes"],
        "dep_edges": summary["dep_edges"],
        "con_edges": summary["con_edges"],
        "interacting": summary["interacting_nodes"],
        "nodes_with_dependencies": summary["nodes_with_dependencies"],
        "dep_con_ratio": summary["dep_con_ratio"],
        "non_interacting_fraction": summary["non_interacting_fraction"],
    })

    # 次数分布の最良モデル
    for kind, direction in DEGREE_SERIES:
        key = f"fit_{kind}_{direction}"
        result = _cell(errors, key, lambda: distribution_fits(graph, kind, direction, config.binned, config.bin_base))
        if result is not None and result["fits"]:
            best = result["fits"][result["best"]]
            metrics[key] = result["best"]
            metrics[f"{key}_f"] = finite_or_none(best.f_stat)
            metrics[f"{key}_df2"] = best.df[1]
        else:
            metrics[key] = None
            if result is not None and result["error"]:
                errors[key] = result["error"]

    # モジュール構造
    partition = _cell(errors, "partition", lambda: dependency_partition(
        graph, config.louvain_restarts, partition_seed, config.collapse_reciprocal))
    if partition is not None:
        metrics["modularity_q"] = partition.q
        metrics["n_modules"] = len(set(partition.assignment.values()))
        metrics["major_modules"] = major_module_count(partition, config.major_module_threshold)
        metrics["within_module_dep_fraction"] = _cell(errors, "within_module_dep_fraction",
                                                      lambda: within_module_fraction(graph, partition, "dep"))
        metrics["within_module_con_fraction"] = _cell(errors, "within_module_con_fraction",
                                                      lambda: within_module_fraction(graph, partition, "con"))

    modularity_stats = _cell(errors, "modularity_z", lambda: ensemble(
        graph,
        config.modularity_randomizations,
        "louvain_q",
        modularity_seed,
        swaps_per_edge=config.swaps_per_edge,
        jobs=config.jobs,
        restarts=config.louvain_restarts,
        collapse_reciprocal=config.collapse_reciprocal,
    ))
    if modularity_stats is not None:
        metrics["modularity_z"] = modularity_stats.z
        metrics["modularity_p"] = modularity_stats.p

    # インストール過程
    replicates = _cell(errors, "installed_fraction_mean", lambda: run_replicates(
        graph, config.install_replicates, install_seed, config.conflict_mode, jobs=config.jobs))
    if replicates is not None:
        metrics["installed_fraction_mean"] = replicates.mean
        metrics["installed_fraction_std"] = replicates.std

    effect = _cell(errors, "install_z", lambda: modularity_effect(
        graph,
        config.install_networks,
        config.install_replicates,
        effect_seed,
        swaps_per_edge=config.swaps_per_edge,
        jobs=config.jobs,
        conflict_mode=config.conflict_mode,
    ))
    if effect is not None:
        metrics["install_z"] = effect.z
        metrics["install_p"] = effect.p

    return metrics, errors


def _trend_row(metric: str, model: str, variant: str, x_name: str,
               points: List[Tuple[float, float]]) -> Dict[str, Any]:
    """傾向検定1行（実行できない場合は skipped に理由）"""
    row: Dict[str, Any] = {
        "metric": metric,
        "model": model,
        "variant": variant,
        "x": x_name,
        "n": len(points),
        "slope": None,
        "intercept": None,
        "r_squared": None,
        "f_stat": None,
        "df1": None,
        "df2": None,
        "p_value": None,
        "skipped": None,
    }
    if len(points) < 3:
        row["skipped"] = "n<3"
        return row
    try:
        fit = regress(points, model)
    except PkgnetError as e:
        row["skipped"] = str(e)
        return row
    row.update({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "f_stat": fit.f_stat if np.isfinite(fit.f_stat) else None,
        "df1": fit.df[0],
        "df2": fit.df[1],
        "p_value": fit.p_value,
    })
    return row


def trend_tests(
    releases: Sequence[Release],
    per_release: Dict[str, Dict[str, Any]],
    diffs: Dict[str, Dict[str, Any]],
    config: RunConfig,
    variant: str = "all",
) -> List[Dict[str, Any]]:
    """リリース系列に対する傾向検定一式"""
    x = _x_values(releases, config.x_axis)
    labels = [r.label for r in releases]
    x_name = config.x_axis

    def series(metric: str) -> List[Tuple[float, float]]:
        points = []
        for label in labels:
            source = diffs.get(label, {}) if metric in ("deprecated", "kept", "new") else per_release.get(label, {})
            value = source.get(metric)
            if value is not None and np.isfinite(value):
                points.append((x[label], float(value)))
        return points

    rows = []
    for metric in COUNT_TRENDS:
        points = series(metric)
        rows.append(_trend_row(metric, "exponential", variant, x_name, points))
        if metric == "new" and config.drop_last_new_point and variant == "all":
            rows.append(_trend_row(metric, "exponential", "drop_last_new_point", x_name, points[:-1]))
    for metric in LINEAR_TRENDS:
        rows.append(_trend_row(metric, "linear", variant, x_name, series(metric)))
    # モジュール性zスコアは線形・指数の両方
    rows.append(_trend_row("modularity_z", "linear", variant, x_name, series("modularity_z")))
    rows.append(_trend_row("modularity_z", "exponential", variant, x_name, series("modularity_z")))

    for y_metric, x_metric in CROSS_TRENDS:
        points = []
        for label in labels:
            xv = per_release.get(label, {}).get(x_metric)
            yv = per_release.get(label, {}).get(y_metric)
            if xv is not None and yv is not None and np.isfinite(xv) and np.isfinite(yv):
                points.append((float(xv), float(yv)))
        rows.append(_trend_row(y_metric, "linear", variant, x_metric, points))
    return rows


def evolution_report(
    releases: Sequence[Release],
    config: RunConfig,
    seed: Union[int, np.random.SeedSequence],
) -> Dict[str, Any]:
    """
    リリース系列の進化レポート

    リリースごとの指標（パッケージ数、依存/競合数、モジュール性とzスコア、
    インストール割合とzスコアなど）と、各系列の傾向検定を返す。
    失敗した指標は None とし errors に記録する。
    """
    if len(releases) < 2:
        raise InsufficientDataError(f"進化解析には2リリース以上が必要です: {len(releases)}")
    ordinals = [r.ordinal for r in releases]
    if any(b <= a for a, b in zip(ordinals, ordinals[1:])):
        raise PkgnetError("リリースの序数は狭義単調増加である必要があります")

    per_release: Dict[str, Dict[str, Any]] = {}
    errors: Dict[str, Dict[str, str]] = {}
    for release, child in zip(releases, derive_seeds(seed, len(releases))):
        logger.info(f"リリース解析開始: {release.label}")
        metrics, cell_errors = release_metrics(release.graph, config, child)
        per_release[release.label] = metrics
        if cell_errors:
            errors[release.label] = cell_errors

    # 連続リリース間の差分（後のリリースに紐づける）
    diffs: Dict[str, Dict[str, Any]] = {}
    for prev, nxt in zip(releases, releases[1:]):
        diffs[nxt.label] = release_diff(prev.graph, nxt.graph).to_dict()

    trends = trend_tests(releases, per_release, diffs, config, "all")
    if config.drop_last_release and len(releases) > 1:
        kept_releases = list(releases[:-1])
        trends.extend(trend_tests(kept_releases, per_release, diffs, config, "drop_last_release"))

    logger.info(f"進化レポート完了: リリース数={len(releases)}, 傾向検定={len(trends)}件")
    return {
        "releases": [
            {"label": r.label, "ordinal": r.ordinal, "date": r.date, "metrics": per_release[r.label],
             "diff": diffs.get(r.label)}
            for r in releases
        ],
        "trends": trends,
        "errors": errors,
    }


def release_table(report: Dict[str, Any]) -> pd.DataFrame:
    """1行 = 1リリース × 1指標 の表"""
    rows = []
    for release in report["releases"]:
        values = dict(release["metrics"])
        for key, value in (release["diff"] or {}).items():
            values[key] = value
        for metric, value in values.items():
            rows.append({
                "release": release["label"],
                "ordinal": release["ordinal"],
                "metric": metric,
                "value": value,
            })
    return pd.DataFrame(rows, columns=["release", "ordinal", "metric", "value"])


def trend_table(report: Dict[str, Any]) -> pd.DataFrame:
    """1行 = 1傾向検定 の表"""
    return pd.DataFrame(report["trends"])
