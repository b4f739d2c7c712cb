"""
Packagesインデックス解析モジュール
Debian形式のスタンザと関係フィールドを解析し、パッケージ単位の依存/競合グラフを構築

スタンザと関係の分解は python-debian（debian.deb822）に任せ、
ここでは行番号付きのエラー報告に必要な検査だけを行う。
"""
import bz2
import gzip
import itertools
import lzma
import warnings as py_warnings
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Set, Tuple, Union

from debian.deb822 import Packages, PkgRelation

from pkgnet.exceptions import ParseError
from pkgnet.graph_core import DependencyGraph
from pkgnet.models import (
    ALTERNATIVES_MODES,
    CONFLICT_DIRECTIONS,
    VIRTUALS_MODES,
    PackageRecord,
    Relation,
    RelationList,
    ResolutionPolicy,
)
from pkgnet.utils import get_logger

# ロガー設定
logger = get_logger(__name__)

# 解析対象のフィールド。Breaks/Replaces/Recommends/Suggests等は読み飛ばす
_RELATION_FIELDS = {
    "Depends": "depends",
    "Pre-Depends": "pre_depends",
    "Conflicts": "conflicts",
}

# 圧縮形式
_OPENERS = {
    ".gz": gzip.open,
    ".bz2": bz2.open,
    ".xz": lzma.open,
}


def parse_relation_field(text: str) -> RelationList:
    """
    関係フィールド（Depends等）の解析

    "a (>= 1.0) | b, c [i386]" → [[a(>=1.0), b], [c]]
    グループと代替の順序は保持し、アーキテクチャ修飾・ビルドプロファイル・
    マルチアーキ修飾 (foo:any) は除去する。
    """
    text = (text or "").strip()
    if not text:
        return RelationList()

    groups: List[Tuple[Relation, ...]] = []
    for raw_group in text.split(","):
        raw_group = raw_group.strip()
        # 末尾カンマなどによる空グループは無視
        if not raw_group:
            continue
        _check_parentheses(raw_group)
        if any(not alt.strip() for alt in raw_group.split("|")):
            raise ParseError(f"空の代替があります: {raw_group!r}", group=raw_group)

        # 解釈できない関係は警告付きでそのまま返されるため、警告をエラーに変換する
        with py_warnings.catch_warnings(record=True) as caught:
            py_warnings.simplefilter("always")
            parsed = PkgRelation.parse_relations(raw_group)
        if caught or len(parsed) != 1 or any(_raw_fallback(rel) for rel in parsed[0]):
            raise ParseError(f"関係の形式が不正です: {raw_group!r}", group=raw_group)

        alternatives = []
        for rel in parsed[0]:
            constraint = None
            if rel.get("version"):
                relop, version = rel["version"]
                constraint = f"{relop} {version}"
            alternatives.append(Relation(rel["name"], constraint))
        groups.append(tuple(alternatives))

    return RelationList(tuple(groups))


def _raw_fallback(rel: Dict[str, object]) -> bool:
    """解釈できずに原文のまま返された関係か"""
    name = rel.get("name") or ""
    return not name or any(c in name for c in " \t()[]<>|")


def _check_parentheses(group: str) -> None:
    """括弧の対応確認"""
    depth = 0
    for char in group:
        if char == "(":
            depth += 1
            if depth > 1:
                raise ParseError(f"括弧が入れ子になっています: {group!r}", group=group)
        elif char == ")":
            depth -= 1
            if depth < 0:
                raise ParseError(f"括弧の対応が取れていません: {group!r}", group=group)
    if depth != 0:
        raise ParseError(f"括弧の対応が取れていません: {group!r}", group=group)


def serialize_relation_field(relations: RelationList) -> str:
    """関係リストを関係フィールド形式に直列化"""
    return relations.to_text()


def _decode_lines(data: bytes) -> List[str]:
    """UTF-8として1行ずつ復号（不正なバイト列は行番号付きのエラー）"""
    lines = []
    for line_no, raw in enumerate(data.splitlines(), start=1):
        try:
            lines.append(raw.decode("utf-8"))
        except UnicodeDecodeError as e:
            raise ParseError(f"UTF-8として復号できません（{e.start}バイト目）", line_no=line_no) from e
    return lines


def _scan_stanzas(lines: List[str]) -> Iterator[Tuple[int, Dict[str, int]]]:
    """
    スタンザ構造の検査

    deb822の分割規則（空白のみの行で区切り、"#" 行は読み飛ばす）に合わせて
    スタンザごとに (開始行, {フィールド名(小文字): 行番号}) を返す。
    deb822が黙って捨てる不正行はここで行番号付きのエラーにする。
    """
    fields: Dict[str, int] = {}
    start = 0
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            if fields:
                yield start, fields
            fields = {}
            continue
        if line.startswith("#"):
            continue
        if line[0] in " \t":
            if not fields:
                raise ParseError("フィールドのない継続行です", line_no=line_no)
            continue
        if ":" not in line:
            raise ParseError(f"コロンのないフィールド行です: {line!r}", line_no=line_no)
        key = line.split(":", 1)[0].strip()
        if not key or any(c.isspace() for c in key):
            raise ParseError(f"フィールド名が不正です: {line!r}", line_no=line_no)
        if not fields:
            start = line_no
        fields[key.lower()] = line_no
    if fields:
        yield start, fields


def parse_packages_index(
    text: Union[str, bytes],
    warnings: Optional[List[str]] = None,
) -> List[PackageRecord]:
    """
    Packagesインデックスの解析

    Args:
        text: インデックス本文（バイト列の場合はUTF-8として厳密に復号）
        warnings: 警告メッセージの追記先（重複パッケージなど）

    Returns:
        Packageフィールドを持つスタンザごとのPackageRecord
    """
    lines = _decode_lines(text) if isinstance(text, bytes) else text.splitlines()
    if warnings is None:
        warnings = []

    stanzas = list(_scan_stanzas(lines))
    paragraphs = list(Packages.iter_paragraphs(lines, use_apt_pkg=False))
    if len(stanzas) != len(paragraphs):
        raise ParseError(f"スタンザ数が一致しません: 検査={len(stanzas)}, deb822={len(paragraphs)}")

    records: Dict[str, PackageRecord] = {}
    for (start, field_lines), paragraph in zip(stanzas, paragraphs):
        name = paragraph.get("Package", "").strip()
        if not name:
            continue

        kwargs = {}
        for field_name, attr in _RELATION_FIELDS.items():
            if field_name in paragraph:
                kwargs[attr] = _parse_field(paragraph, field_name, name, field_lines)

        provides: Tuple[str, ...] = ()
        if "Provides" in paragraph:
            provided = _parse_field(paragraph, "Provides", name, field_lines)
            provides = tuple(alt.target_name for group in provided for alt in group)

        try:
            record = PackageRecord(
                name=name,
                version=paragraph.get("Version", "").strip(),
                provides=provides,
                **kwargs,
            )
        except ValueError as e:
            raise ParseError(str(e), line_no=field_lines.get("package", start)) from e

        if name in records:
            message = f"パッケージ名が重複しています（後のスタンザを採用）: {name} ({start}行目)"
            warnings.append(message)
            logger.warning(message)
        records[name] = record

    logger.info(f"Packagesインデックス解析完了: {len(records)}件, 警告: {len(warnings)}件")
    return list(records.values())


def _parse_field(paragraph: Packages, field_name: str, package: str, field_lines: Dict[str, int]) -> RelationList:
    """スタンザの関係フィールドを解析（エラーにはフィールドの行番号を付ける）"""
    try:
        return parse_relation_field(paragraph[field_name].replace("\n", " "))
    except ParseError as e:
        raise ParseError(
            f"{package} の {field_name} フィールド: {e}",
            line_no=field_lines.get(field_name.lower()),
            group=e.group,
        ) from e


def read_packages_file(path: Union[str, Path], warnings: Optional[List[str]] = None) -> List[PackageRecord]:
    """Packagesファイル（.gz/.bz2/.xz 圧縮にも対応）の読み込み"""
    path = Path(path)
    if not path.exists():
        error_msg = f"Packagesファイルが見つかりません: {path}"
        logger.error(error_msg)
        raise FileNotFoundError(error_msg)

    opener = _OPENERS.get(path.suffix, open)
    with opener(path, "rb") as f:
        data = f.read()
    return parse_packages_index(data, warnings)


def build_graph(
    records: List[PackageRecord],
    policy: Optional[ResolutionPolicy] = None,
) -> DependencyGraph:
    """
    パッケージレコードから依存/競合グラフを構築

    - 依存エッジ i→j: iはjを先にインストールする必要がある
    - 競合エッジ i→j: jがインストール済みならiはインストールできない
    - 実在パッケージにもProvidesにも該当しない対象は警告付きで除外
    - 自己ループと重複エッジは除去
    """
    if policy is None:
        policy = ResolutionPolicy()

    names = {r.name for r in records}
    providers: Dict[str, List[str]] = {}
    for record in records:
        for token in record.provides:
            providers.setdefault(token, []).append(record.name)
    providers = {token: sorted(set(owners)) for token, owners in providers.items()}

    warnings: List[str] = []
    unresolved: Set[Tuple[str, str]] = set()

    def resolve(source: str, target: str) -> List[str]:
        # 実パッケージ名を仮想名より優先
        if target in names:
            return [target]
        if target in providers:
            if policy.virtuals == "first_provider":
                return providers[target][:1]
            if policy.virtuals == "all_providers":
                return list(providers[target])
            return []
        if (source, target) not in unresolved:
            unresolved.add((source, target))
            warnings.append(f"解決できない関係を除外: {source} -> {target}")
        return []

    dep_edges: Set[Tuple[str, str]] = set()
    con_edges: Set[Tuple[str, str]] = set()

    for record in sorted(records, key=lambda r: r.name):
        dep_groups = list(record.depends)
        if policy.include_pre_depends:
            dep_groups.extend(record.pre_depends)

        for group in dep_groups:
            if policy.alternatives == "first_listed":
                # 解決できる最初の代替のみ
                for alternative in group:
                    targets = resolve(record.name, alternative.target_name)
                    if targets:
                        break
            else:
                targets = list(itertools.chain.from_iterable(resolve(record.name, a.target_name) for a in group))
            dep_edges.update((record.name, t) for t in targets if t != record.name)

        for group in record.conflicts:
            for alternative in group:
                targets = resolve(record.name, alternative.target_name)
                con_edges.update((record.name, t) for t in targets if t != record.name)

    if policy.conflict_direction == "symmetrized":
        con_edges |= {(j, i) for i, j in con_edges}

    graph = DependencyGraph(
        names,
        dep_edges,
        con_edges,
        versions={r.name: r.version for r in records},
        warnings=warnings,
    )
    if warnings:
        logger.warning(f"解決できない関係を{len(warnings)}件除外しました")
    logger.info(
        f"依存グラフ構築完了: ノード数={len(graph.nodes)}, 依存={len(dep_edges)}, 競合={len(con_edges)}, "
        f"ポリシー={policy.to_dict()}"
    )
    return graph


def policy_sweep(records: List[PackageRecord]) -> List[Dict[str, object]]:
    """全ポリシーの組み合わせでのエッジ数（コンパイル方針の校正用）"""
    rows = []
    for alternatives, virtuals, pre_depends, direction in itertools.product(
        ALTERNATIVES_MODES, VIRTUALS_MODES, (True, False), CONFLICT_DIRECTIONS
    ):
        policy = ResolutionPolicy(alternatives, virtuals, pre_depends, direction)
        graph = build_graph(records, policy)
        rows.append({
            **policy.to_dict(),
            "nodes": len(graph.nodes),
            "dep_edges": len(graph.dep_edges),
            "con_edges": len(graph.con_edges),
        })
    return rows
