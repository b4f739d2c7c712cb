"""
設定モジュール
解析パイプラインの既定値と実行設定（TOMLファイル＋CLI引数）
"""
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from pkgnet.exceptions import ConfigError
from pkgnet.models import ResolutionPolicy

# プロジェクトルートディレクトリ取得
ROOT_DIR = Path(__file__).resolve().parent.parent

# ログ設定
LOG_DIR = Path(os.environ.get("PKGNET_LOG_DIR", "log"))

# 並列数の既定値（環境変数）
DEFAULT_JOBS = int(os.environ.get("PKGNET_JOBS", "1"))

# アンサンブル規模の既定値
ENSEMBLE_DEFAULTS = {
    "modularity_randomizations": 1000,
    "install_networks": 100,
    "install_replicates": 1000,
    "louvain_restarts": 10,
    "swaps_per_edge": 10,
}

# 統計処理の既定値
STATS_DEFAULTS = {
    "bin_base": 2.0,
    "binned": True,
    "major_module_threshold": 0.05,
}

# 出力ファイル名
OUTPUT_FILES = {
    "edges": "{stem}.edges",
    "summary": "{stem}.summary.json",
    "degree_csv": "degree_{kind}_{direction}.csv",
    "fits": "fits.json",
    "partition": "partition.csv",
    "modules": "modules.json",
    "nullmodel": "nullmodel.json",
    "null_samples": "null_samples.csv",
    "simulate": "simulate.json",
    "replicates_csv": "replicates.csv",
    "evolve": "evolution.json",
    "release_table": "releases.csv",
    "trend_table": "trends.csv",
}

# 終了コード
EXIT_CODES = {
    "success": 0,
    "usage": 1,
    "input": 2,
    "computation": 3,
}

# 入力形式
INPUT_FORMATS = ("packages", "edges")

# シード指定が必須のコマンド
STOCHASTIC_COMMANDS = ("community", "nullmodel", "simulate", "evolve")


@dataclass
class ReleaseInput:
    """リリース単位の入力ファイル"""
    path: str
    label: Optional[str] = None
    format: str = "packages"
    date: Optional[str] = None

    def __post_init__(self) -> None:
        if self.format not in INPUT_FORMATS:
            raise ConfigError(f"入力形式が不正です: {self.format}")
        if self.label is None:
            self.label = Path(self.path).name

    def to_dict(self) -> Dict[str, Any]:
        """置き場所に依存しない表現（パスの代わりに内容のSHA-256）"""
        path = Path(self.path)
        content_hash = hashlib.sha256(path.read_bytes()).hexdigest() if path.is_file() else None
        return {"label": self.label, "format": self.format, "date": self.date, "sha256": content_hash}


@dataclass
class RunConfig:
    """実行設定"""
    inputs: List[ReleaseInput] = field(default_factory=list)
    # 解決ポリシー
    alternatives: str = "first_listed"
    virtuals: str = "first_provider"
    include_pre_depends: bool = True
    conflict_direction: str = "as_declared"
    # アンサンブル規模
    modularity_randomizations: int = ENSEMBLE_DEFAULTS["modularity_randomizations"]
    install_networks: int = ENSEMBLE_DEFAULTS["install_networks"]
    install_replicates: int = ENSEMBLE_DEFAULTS["install_replicates"]
    louvain_restarts: int = ENSEMBLE_DEFAULTS["louvain_restarts"]
    swaps_per_edge: int = ENSEMBLE_DEFAULTS["swaps_per_edge"]
    # 統計処理
    bin_base: float = STATS_DEFAULTS["bin_base"]
    binned: bool = STATS_DEFAULTS["binned"]
    major_module_threshold: float = STATS_DEFAULTS["major_module_threshold"]
    collapse_reciprocal: bool = False
    conflict_mode: str = "as_declared"
    # 時系列解析
    x_axis: str = "ordinal"
    drop_last_release: bool = True
    drop_last_new_point: bool = True
    seed: Optional[int] = None
    output_dir: str = "out"
    jobs: int = DEFAULT_JOBS

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """値の範囲確認"""
        for name in ENSEMBLE_DEFAULTS:
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} は1以上の整数で指定してください: {value}")
        if self.jobs < 1:
            raise ConfigError(f"jobs は1以上で指定してください: {self.jobs}")
        if self.bin_base <= 1:
            raise ConfigError(f"bin_base は1より大きい値で指定してください: {self.bin_base}")
        if not 0 < self.major_module_threshold < 1:
            raise ConfigError(f"major_module_threshold は(0,1)の範囲で指定してください: {self.major_module_threshold}")
        if self.conflict_mode not in ("as_declared", "symmetric"):
            raise ConfigError(f"conflict_mode が不正です: {self.conflict_mode}")
        if self.x_axis not in ("ordinal", "date"):
            raise ConfigError(f"x_axis が不正です: {self.x_axis}")
        # ポリシーの列挙値はResolutionPolicy側で検証
        self.policy()

    def policy(self) -> ResolutionPolicy:
        """解決ポリシー生成"""
        try:
            return ResolutionPolicy(
                alternatives=self.alternatives,
                virtuals=self.virtuals,
                include_pre_depends=self.include_pre_depends,
                conflict_direction=self.conflict_direction,
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def require_seed(self, command: str) -> int:
        """確率的コマンドではシード必須"""
        if command in STOCHASTIC_COMMANDS and self.seed is None:
            raise ConfigError(f"{command} には --seed の指定が必要です")
        return self.seed

    def to_dict(self) -> Dict[str, Any]:
        """辞書に変換（jobs と出力先は結果に影響しないため除外、入力は内容で識別）"""
        data = asdict(self)
        data.pop("jobs")
        data.pop("output_dir")
        data["inputs"] = [entry.to_dict() for entry in self.inputs]
        return data

    def digest(self) -> str:
        """設定ダイジェスト（SHA-256）"""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


_RUN_KEYS = {f.name for f in fields(RunConfig)} - {"inputs"}


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    TOML設定ファイルを読み込み、CLI引数で上書き

    Args:
        path: 設定ファイルパス。Noneの場合は既定値から開始
        overrides: 上書き値（Noneの値は無視）

    Returns:
        検証済みのRunConfig
    """
    values: Dict[str, Any] = {}
    inputs: List[ReleaseInput] = []

    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"設定ファイルが見つかりません: {path}")
        try:
            with open(path, "rb") as f:
                document = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"設定ファイルの構文エラー: {e}") from e

        unknown_tables = set(document) - {"run", "release"}
        if unknown_tables:
            raise ConfigError(f"未知のテーブル: {', '.join(sorted(unknown_tables))}")

        run_table = document.get("run", {})
        unknown = set(run_table) - _RUN_KEYS
        if unknown:
            raise ConfigError(f"未知の設定キー: {', '.join(sorted(unknown))}")
        values.update(run_table)

        # 相対パスは設定ファイルの位置を基準に解決
        for entry in document.get("release", []):
            entry = dict(entry)
            if "path" not in entry:
                raise ConfigError("[[release]] には path が必要です")
            release_path = Path(entry["path"])
            if not release_path.is_absolute():
                entry["path"] = str(path.parent / release_path)
            try:
                inputs.append(ReleaseInput(**entry))
            except TypeError as e:
                raise ConfigError(f"[[release]] の指定が不正です: {e}") from e

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "inputs":
            inputs = list(value)
        elif key in _RUN_KEYS:
            values[key] = value
        else:
            raise ConfigError(f"未知の設定キー: {key}")

    try:
        return RunConfig(inputs=inputs, **values)
    except TypeError as e:
        raise ConfigError(f"設定値が不正です: {e}") from e
