"""
データモデル定義
パッケージレコード、解決ポリシー、各解析結果のモデル
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from pkgnet.utils import finite_or_none

# 解決ポリシーの列挙値
ALTERNATIVES_MODES = ("first_listed", "all_alternatives")
VIRTUALS_MODES = ("first_provider", "all_providers", "drop")
CONFLICT_DIRECTIONS = ("as_declared", "symmetrized")

# エッジ種別と向き
EDGE_KINDS = ("dep", "con")
DIRECTIONS = ("in", "out")

# 回帰モデル
FIT_MODELS = ("exponential", "power_law", "linear")


@dataclass(frozen=True)
class Relation:
    """関係フィールドの1要素（パッケージ名＋任意のバージョン制約）"""
    target_name: str
    version_constraint: Optional[str] = None

    def to_text(self) -> str:
        if self.version_constraint:
            return f"{self.target_name} ({self.version_constraint})"
        return self.target_name


@dataclass(frozen=True)
class RelationList:
    """カンマ区切りグループ × "|" 区切り代替のリスト"""
    groups: Tuple[Tuple[Relation, ...], ...] = ()

    def __post_init__(self) -> None:
        for group in self.groups:
            if not group:
                raise ValueError("空の代替グループは許可されません")
            for relation in group:
                if not relation.target_name:
                    raise ValueError("空のパッケージ名は許可されません")

    def __len__(self) -> int:
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    def to_text(self) -> str:
        """Debian関係フィールド形式に直列化"""
        return ", ".join(" | ".join(r.to_text() for r in group) for group in self.groups)

    def to_dict(self) -> List[List[Dict[str, Any]]]:
        return [
            [{"target": r.target_name, "constraint": r.version_constraint} for r in group]
            for group in self.groups
        ]


@dataclass(frozen=True)
class PackageRecord:
    """Packagesインデックスの1スタンザ"""
    name: str
    version: str = ""
    depends: RelationList = field(default_factory=RelationList)
    pre_depends: RelationList = field(default_factory=RelationList)
    conflicts: RelationList = field(default_factory=RelationList)
    provides: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.name or any(c.isspace() for c in self.name):
            raise ValueError(f"パッケージ名が不正です: {self.name!r}")

    def to_dict(self) -> Dict[str, Any]:
        """モデルを辞書に変換"""
        return {
            "name": self.name,
            "version": self.version,
            "depends": self.depends.to_text(),
            "pre_depends": self.pre_depends.to_text(),
            "conflicts": self.conflicts.to_text(),
            "provides": list(self.provides),
        }


@dataclass(frozen=True)
class ResolutionPolicy:
    """関係フィールドからパッケージ単位のエッジへの解決方針"""
    alternatives: str = "first_listed"
    virtuals: str = "first_provider"
    include_pre_depends: bool = True
    conflict_direction: str = "as_declared"

    def __post_init__(self) -> None:
        if self.alternatives not in ALTERNATIVES_MODES:
            raise ValueError(f"alternatives が不正です: {self.alternatives}")
        if self.virtuals not in VIRTUALS_MODES:
            raise ValueError(f"virtuals が不正です: {self.virtuals}")
        if self.conflict_direction not in CONFLICT_DIRECTIONS:
            raise ValueError(f"conflict_direction が不正です: {self.conflict_direction}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alternatives": self.alternatives,
            "virtuals": self.virtuals,
            "include_pre_depends": self.include_pre_depends,
            "conflict_direction": self.conflict_direction,
        }


@dataclass(frozen=True)
class CumulativePoint:
    """累積次数分布の1点 P(K >= k)"""
    k: float
    p: float
    bin: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"k": self.k, "p": self.p, "bin": self.bin}


@dataclass(frozen=True)
class FitResult:
    """単回帰の結果とF検定"""
    model: str
    slope: float
    intercept: float
    r_squared: float
    f_stat: float
    df: Tuple[int, int]
    p_value: float
    n: int

    def to_dict(self) -> Dict[str, Any]:
        """モデルを辞書に変換"""
        return {
            "model": self.model,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "f_stat": finite_or_none(self.f_stat),
            "perfect_fit": math.isinf(self.f_stat),
            "df": list(self.df),
            "p_value": self.p_value,
            "n": self.n,
        }


@dataclass
class Partition:
    """ノード→モジュールの割り当てとモジュール性Q"""
    assignment: Dict[str, int]
    q: float
    levels: List[Dict[str, int]] = field(default_factory=list)
    level_q: List[float] = field(default_factory=list)

    def modules(self) -> Dict[int, List[str]]:
        """モジュールID→所属ノード"""
        members: Dict[int, List[str]] = {}
        for node in sorted(self.assignment):
            members.setdefault(self.assignment[node], []).append(node)
        return members

    def module_sizes(self) -> Dict[int, int]:
        return {module: len(nodes) for module, nodes in self.modules().items()}

    def to_dict(self) -> Dict[str, Any]:
        sizes = self.module_sizes()
        return {
            "q": self.q,
            "n_modules": len(sizes),
            "module_sizes": {str(k): v for k, v in sorted(sizes.items())},
            "level_q": list(self.level_q),
        }


@dataclass(frozen=True)
class EnsembleStats:
    """観測値とヌルアンサンブルの比較"""
    observed: float
    null_mean: float
    null_std: float
    z: Optional[float]
    p: float
    n_samples: int
    statistic: str = ""
    samples: Tuple[float, ...] = field(default=(), repr=False, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        """モデルを辞書に変換"""
        return {
            "statistic": self.statistic,
            "observed": self.observed,
            "null_mean": self.null_mean,
            "null_std": self.null_std,
            "z": finite_or_none(self.z),
            "p": self.p,
            "n_samples": self.n_samples,
        }


@dataclass
class InstallState:
    """ローカルインストール過程の状態"""
    installed: set
    discarded: set
    remaining: set

    @classmethod
    def empty(cls, nodes) -> "InstallState":
        return cls(installed=set(), discarded=set(), remaining=set(nodes))


@dataclass(frozen=True)
class InstallDecision:
    """候補パッケージの判定結果"""
    install: bool
    packages: FrozenSet[str] = frozenset()
    excluded: FrozenSet[str] = frozenset()
    reason: str = ""


@dataclass(frozen=True)
class InstallOutcome:
    """1レプリケートの結果"""
    installed: FrozenSet[str]
    discarded: FrozenSet[str]

    @property
    def fraction(self) -> float:
        total = len(self.installed) + len(self.discarded)
        return len(self.installed) / total if total else 0.0


@dataclass
class ReplicateStats:
    """レプリケート集計"""
    n: int
    mean: float
    std: float
    min: float
    max: float
    histogram: Dict[str, int]
    fractions: List[float] = field(default_factory=list)
    installed_counts: List[int] = field(default_factory=list)
    variance_trace: Optional[List[float]] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "n": self.n,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "histogram": self.histogram,
        }
        if self.variance_trace is not None:
            data["variance_trace"] = self.variance_trace
        return data


@dataclass(frozen=True)
class ReleaseDiff:
    """連続リリース間のパッケージ入れ替わり"""
    deprecated: FrozenSet[str]
    kept: FrozenSet[str]
    new: FrozenSet[str]
    kept_version_changed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "deprecated": len(self.deprecated),
            "kept": len(self.kept),
            "new": len(self.new),
            "kept_version_changed": self.kept_version_changed,
        }
