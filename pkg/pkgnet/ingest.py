"""
取り込みモジュール
Packagesインデックス/エッジリストを読み込み、依存グラフとして保存
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pkgnet.config import ReleaseInput
from pkgnet.control_parser import build_graph, policy_sweep, read_packages_file
from pkgnet.evolution import Release
from pkgnet.graph_core import DependencyGraph, graph_summary, read_edge_list, write_edge_list
from pkgnet.models import ResolutionPolicy
from pkgnet.utils import get_logger, write_json, write_text

# ロガー設定
logger = get_logger(__name__)


def load_graph(
    path: Union[str, Path],
    input_format: str = "edges",
    policy: Optional[ResolutionPolicy] = None,
) -> DependencyGraph:
    """
    入力ファイルから依存グラフを読み込み

    Args:
        path: 入力ファイルパス
        input_format: "packages"（Packagesインデックス）または "edges"（エッジリスト）
        policy: Packagesインデックスの解決ポリシー

    Returns:
        DependencyGraph
    """
    path = Path(path)
    if not path.exists():
        error_msg = f"入力ファイルが見つかりません: {path}"
        logger.error(error_msg)
        raise FileNotFoundError(error_msg)

    if input_format == "edges":
        return read_edge_list(path.read_text(encoding="utf-8"))
    if input_format == "packages":
        return build_graph(read_packages_file(path), policy)
    raise ValueError(f"入力形式が不正です: {input_format}")


def load_releases(inputs: Sequence[ReleaseInput], policy: Optional[ResolutionPolicy] = None) -> List[Release]:
    """リリース入力の一括読み込み（序数は指定順に1から）"""
    releases = []
    for ordinal, entry in enumerate(inputs, start=1):
        graph = load_graph(entry.path, entry.format, policy)
        releases.append(Release(label=entry.label, ordinal=ordinal, graph=graph, date=entry.date))
        logger.info(f"リリース読み込み完了: {entry.label}, ノード数={len(graph.nodes)}")
    return releases


def ingest(
    packages_path: Union[str, Path],
    out_path: Union[str, Path],
    policy: Optional[ResolutionPolicy] = None,
    sweep: bool = False,
) -> Dict[str, Any]:
    """
    PackagesインデックスをエッジリストとJSONサマリーに変換

    Args:
        packages_path: Packagesファイルパス
        out_path: 出力エッジリストのパス（サマリーは同じ場所に <stem>.summary.json）
        policy: 解決ポリシー
        sweep: Trueの場合は全ポリシーでのエッジ数もサマリーに含める

    Returns:
        サマリー辞書
    """
    policy = policy or ResolutionPolicy()
    packages_path = Path(packages_path)
    out_path = Path(out_path)

    if not packages_path.exists():
        error_msg = f"Packagesファイルが見つかりません: {packages_path}"
        logger.error(error_msg)
        raise FileNotFoundError(error_msg)

    parse_warnings: List[str] = []
    records = read_packages_file(packages_path, parse_warnings)
    graph = build_graph(records, policy)

    summary = graph_summary(graph)
    summary.update({
        "source": packages_path.name,
        "policy": policy.to_dict(),
        "warnings": parse_warnings + list(graph.warnings),
    })
    if sweep:
        summary["policy_sweep"] = policy_sweep(records)

    write_text(out_path, write_edge_list(graph))
    summary_path = out_path.with_name(f"{out_path.stem}.summary.json")
    write_json(summary_path, summary)

    logger.info(f"取り込み完了。ファイル: {packages_path.name}, パッケージ数: {summary['nodes']}")
    return summary
