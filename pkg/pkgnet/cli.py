"""
コマンドラインインターフェース
ingest / stats / community / nullmodel / simulate / evolve の各サブコマンド
"""
import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pkgnet import __version__
from pkgnet.community import dependency_partition, module_summary, partition_table
from pkgnet.config import (
    EXIT_CODES,
    INPUT_FORMATS,
    OUTPUT_FILES,
    ReleaseInput,
    RunConfig,
    load_run_config,
)
from pkgnet.degree_stats import distribution_fits, distribution_table, fits_to_dict
from pkgnet.evolution import evolution_report, release_table, trend_table
from pkgnet.exceptions import ConfigError, EmptyDistributionError, PkgnetError
from pkgnet.graph_core import DependencyGraph, graph_summary
from pkgnet.ingest import ingest, load_graph, load_releases
from pkgnet.install_sim import CONFLICT_MODES, modularity_effect, replicates_table, run_replicates
from pkgnet.models import ALTERNATIVES_MODES, CONFLICT_DIRECTIONS, DIRECTIONS, EDGE_KINDS, VIRTUALS_MODES
from pkgnet.null_model import STATISTICS, ensemble, samples_table
from pkgnet.utils import derive_seeds, format_number, format_percent, get_logger, run_meta, write_csv, write_json

# ロガー設定
logger = get_logger(__name__)

# 設定キーとして扱う引数
_CONFIG_KEYS = (
    "alternatives",
    "virtuals",
    "include_pre_depends",
    "conflict_direction",
    "modularity_randomizations",
    "install_networks",
    "install_replicates",
    "louvain_restarts",
    "swaps_per_edge",
    "bin_base",
    "binned",
    "major_module_threshold",
    "collapse_reciprocal",
    "conflict_mode",
    "x_axis",
    "drop_last_release",
    "drop_last_new_point",
    "seed",
    "output_dir",
    "jobs",
)


class _ArgumentParser(argparse.ArgumentParser):
    """使用方法のエラーは終了コード1"""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_CODES["usage"], f"❌ 引数エラー: {message}\n")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML設定ファイル")
    parser.add_argument("--seed", type=int, default=None, help="マスターシード")
    parser.add_argument("--jobs", type=int, default=None, help="並列数（結果には影響しない）")
    parser.add_argument("--out", dest="output_dir", default=None, help="出力ディレクトリ")


def _add_input(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--graph", help="エッジリストファイル")
    group.add_argument("--packages", help="Packagesインデックスファイル")


def _add_policy(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alternatives", choices=ALTERNATIVES_MODES, default=None)
    parser.add_argument("--virtuals", choices=VIRTUALS_MODES, default=None)
    parser.add_argument("--no-pre-depends", dest="include_pre_depends", action="store_false", default=None)
    parser.add_argument("--conflict-direction", dest="conflict_direction", choices=CONFLICT_DIRECTIONS, default=None)


def build_parser() -> argparse.ArgumentParser:
    """引数パーサー生成"""
    parser = _ArgumentParser(prog="pkgnet", description="Debianパッケージネットワーク解析")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="Packagesインデックスをエッジリストに変換")
    p.add_argument("--packages", required=True, help="Packagesインデックスファイル")
    p.add_argument("--out", dest="out_path", required=True, help="出力エッジリスト")
    p.add_argument("--sweep", action="store_true", help="全解決ポリシーでのエッジ数を併記")
    p.add_argument("--config", help="TOML設定ファイル")
    _add_policy(p)

    p = sub.add_parser("stats", help="累積次数分布と回帰")
    _add_common(p)
    _add_input(p)
    _add_policy(p)
    p.add_argument("--kind", choices=EDGE_KINDS + ("all",), default="all")
    p.add_argument("--direction", choices=DIRECTIONS + ("all",), default="all")
    p.add_argument("--raw", dest="binned", action="store_false", default=None, help="ビニングせずに回帰")
    p.add_argument("--bin-base", dest="bin_base", type=float, default=None)

    p = sub.add_parser("community", help="Louvain法によるモジュール分割")
    _add_common(p)
    _add_input(p)
    _add_policy(p)
    p.add_argument("--restarts", dest="louvain_restarts", type=int, default=None)
    p.add_argument("--collapse-reciprocal", dest="collapse_reciprocal", action="store_true", default=None)
    p.add_argument("--threshold", dest="major_module_threshold", type=float, default=None)

    p = sub.add_parser("nullmodel", help="次数保存ヌルモデルとの比較")
    _add_common(p)
    _add_input(p)
    _add_policy(p)
    p.add_argument("--statistic", choices=sorted(STATISTICS), default="louvain_q")
    p.add_argument("--networks", type=int, default=None, help="ヌルネットワーク数")
    p.add_argument("--swaps-per-edge", dest="swaps_per_edge", type=int, default=None)
    p.add_argument("--restarts", dest="louvain_restarts", type=int, default=None)
    p.add_argument("--replicates", dest="install_replicates", type=int, default=None)
    p.add_argument("--conflict-mode", dest="conflict_mode", choices=CONFLICT_MODES, default=None)
    p.add_argument("--collapse-reciprocal", dest="collapse_reciprocal", action="store_true", default=None)
    p.add_argument("--samples-csv", action="store_true", help="ヌルサンプルをCSVにも出力")

    p = sub.add_parser("simulate", help="ローカルインストール過程のシミュレーション")
    _add_common(p)
    _add_input(p)
    _add_policy(p)
    p.add_argument("--replicates", dest="install_replicates", type=int, default=None)
    p.add_argument("--conflict-mode", dest="conflict_mode", choices=CONFLICT_MODES, default=None)
    p.add_argument("--initial", action="append", default=None, help="インストール済みで開始するパッケージ（複数指定可）")
    p.add_argument("--trace", action="store_true", help="分散の推移を出力")
    p.add_argument("--replicates-csv", action="store_true", help="レプリケートごとの結果をCSVにも出力")
    p.add_argument("--effect", action="store_true", help="モジュール構造の効果（ヌルモデル比較）も計算")
    p.add_argument("--networks", dest="install_networks", type=int, default=None)
    p.add_argument("--swaps-per-edge", dest="swaps_per_edge", type=int, default=None)

    p = sub.add_parser("evolve", help="リリース系列の進化解析")
    _add_common(p)
    _add_policy(p)
    p.add_argument("--release", action="append", default=None, help="リリースの入力ファイル（指定順）")
    p.add_argument("--format", choices=INPUT_FORMATS, default="packages", help="--release の入力形式")
    p.add_argument("--x-axis", dest="x_axis", choices=("ordinal", "date"), default=None)
    p.add_argument("--keep-last-release", dest="drop_last_release", action="store_false", default=None,
                   help="最終リリースを除いた再検定を行わない")

    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    """設定ファイル＋引数から実行設定を作成"""
    overrides: Dict[str, Any] = {key: getattr(args, key) for key in _CONFIG_KEYS if hasattr(args, key)}
    if getattr(args, "release", None):
        overrides["inputs"] = [ReleaseInput(path=path, format=args.format) for path in args.release]
    return load_run_config(getattr(args, "config", None), overrides)


def _input_graph(args: argparse.Namespace, config: RunConfig) -> DependencyGraph:
    if args.graph:
        return load_graph(args.graph, "edges")
    return load_graph(args.packages, "packages", config.policy())


def _meta(args: argparse.Namespace, config: RunConfig) -> Dict[str, Any]:
    meta = run_meta(args.command, config.seed, config.digest())
    source = getattr(args, "graph", None) or getattr(args, "packages", None)
    if source:
        meta["input"] = Path(source).name
    return meta


def cmd_ingest(args: argparse.Namespace) -> str:
    config = _load_config(args)
    summary = ingest(args.packages, args.out_path, config.policy(), sweep=args.sweep)
    return (
        f"取り込み完了: {args.out_path} (パッケージ={format_number(summary['nodes'])}, "
        f"依存={format_number(summary['dep_edges'])}, 競合={format_number(summary['con_edges'])})"
    )


def cmd_stats(args: argparse.Namespace) -> str:
    config = _load_config(args)
    graph = _input_graph(args, config)
    out_dir = Path(config.output_dir)
    meta = _meta(args, config)

    kinds = EDGE_KINDS if args.kind == "all" else (args.kind,)
    directions = DIRECTIONS if args.direction == "all" else (args.direction,)
    series: List[Dict[str, Any]] = []
    for kind in kinds:
        for direction in directions:
            try:
                result = distribution_fits(graph, kind, direction, config.binned, config.bin_base)
            except EmptyDistributionError as e:
                series.append({"kind": kind, "direction": direction, "best": None, "fits": None, "error": str(e)})
                continue
            name = OUTPUT_FILES["degree_csv"].format(kind=kind, direction=direction)
            write_csv(out_dir / name, distribution_table(result["raw"], result["bins"]), meta)
            series.append(fits_to_dict(result))

    write_json(out_dir / OUTPUT_FILES["fits"], {"summary": graph_summary(graph), "series": series}, meta)
    best = ", ".join(f"{s['kind']}-{s['direction']}={s['best']}" for s in series)
    return f"次数統計完了: {out_dir} ({best})"


def cmd_community(args: argparse.Namespace) -> str:
    config = _load_config(args)
    seed = config.require_seed(args.command)
    graph = _input_graph(args, config)
    out_dir = Path(config.output_dir)
    meta = _meta(args, config)

    partition = dependency_partition(graph, config.louvain_restarts, seed, config.collapse_reciprocal)
    summary = module_summary(graph, partition, config.major_module_threshold)
    write_csv(out_dir / OUTPUT_FILES["partition"], partition_table(partition), meta)
    write_json(out_dir / OUTPUT_FILES["modules"], summary, meta)
    return f"モジュール分割完了: Q={partition.q:.4f}, モジュール数={summary['n_modules']}, 主要モジュール数={summary['major_modules']}"


def cmd_nullmodel(args: argparse.Namespace) -> str:
    config = _load_config(args)
    seed = config.require_seed(args.command)
    graph = _input_graph(args, config)
    out_dir = Path(config.output_dir)
    meta = _meta(args, config)

    if args.statistic == "louvain_q":
        n_networks = args.networks or config.modularity_randomizations
        params = {"restarts": config.louvain_restarts, "collapse_reciprocal": config.collapse_reciprocal}
    else:
        n_networks = args.networks or config.install_networks
        params = {"replicates": config.install_replicates, "conflict_mode": config.conflict_mode}

    stats = ensemble(
        graph,
        n_networks,
        args.statistic,
        seed,
        swaps_per_edge=config.swaps_per_edge,
        jobs=config.jobs,
        tail="upper",
        **params,
    )
    write_json(out_dir / OUTPUT_FILES["nullmodel"], {"result": stats.to_dict(), "params": params}, meta)
    if args.samples_csv:
        write_csv(out_dir / OUTPUT_FILES["null_samples"], samples_table(stats), meta)
    z = "n/a" if stats.z is None else f"{stats.z:.3f}"
    return f"ヌルモデル比較完了: {args.statistic} 観測値={stats.observed:.4f}, z={z}, p={stats.p:.4g}"


def cmd_simulate(args: argparse.Namespace) -> str:
    config = _load_config(args)
    seed = config.require_seed(args.command)
    graph = _input_graph(args, config)
    out_dir = Path(config.output_dir)
    meta = _meta(args, config)
    replicate_seed, effect_seed = derive_seeds(seed, 2)

    stats = run_replicates(
        graph,
        config.install_replicates,
        replicate_seed,
        config.conflict_mode,
        initial_installed=args.initial,
        trace=args.trace,
        jobs=config.jobs,
    )
    result: Dict[str, Any] = {"replicates": stats.to_dict(), "initial_installed": sorted(args.initial or [])}
    if args.effect:
        effect = modularity_effect(
            graph,
            config.install_networks,
            config.install_replicates,
            effect_seed,
            swaps_per_edge=config.swaps_per_edge,
            jobs=config.jobs,
            conflict_mode=config.conflict_mode,
        )
        result["modularity_effect"] = effect.to_dict()

    write_json(out_dir / OUTPUT_FILES["simulate"], result, meta)
    if args.replicates_csv:
        write_csv(out_dir / OUTPUT_FILES["replicates_csv"], replicates_table(stats), meta)
    return (
        f"インストール過程完了: 平均={format_percent(stats.mean)}, "
        f"標準偏差={format_percent(stats.std)}, レプリケート={format_number(stats.n)}"
    )


def cmd_evolve(args: argparse.Namespace) -> str:
    config = _load_config(args)
    seed = config.require_seed(args.command)
    if not config.inputs:
        raise ConfigError("リリースの入力がありません（[[release]] または --release）")
    out_dir = Path(config.output_dir)
    meta = run_meta(args.command, seed, config.digest())

    releases = load_releases(config.inputs, config.policy())
    report = evolution_report(releases, config, seed)
    write_json(out_dir / OUTPUT_FILES["evolve"], {"config": config.to_dict(), **report}, meta)
    write_csv(out_dir / OUTPUT_FILES["release_table"], release_table(report), meta)
    write_csv(out_dir / OUTPUT_FILES["trend_table"], trend_table(report), meta)

    failed = sum(len(cells) for cells in report["errors"].values())
    return f"進化解析完了: リリース数={len(releases)}, 傾向検定={len(report['trends'])}件, 計算失敗={failed}件"


COMMANDS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "community": cmd_community,
    "nullmodel": cmd_nullmodel,
    "simulate": cmd_simulate,
    "evolve": cmd_evolve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """エントリポイント（終了コードを返す）"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        message = COMMANDS[args.command](args)
    except PkgnetError as e:
        logger.error(f"{args.command} エラー: {e}")
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, UnicodeDecodeError) as e:
        logger.error(f"{args.command} 入力エラー: {e}")
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CODES["input"]
    except ValueError as e:
        logger.error(f"{args.command} 引数エラー: {e}")
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CODES["usage"]

    print(f"✅ {message}")
    return EXIT_CODES["success"]


if __name__ == "__main__":
    sys.exit(main())
