"""
例外定義
モジュール単位のエラーとCLI終了コードの対応
"""
from typing import Optional


class PkgnetError(Exception):
    """pkgnet共通の基底例外"""
    exit_code = 3


class ConfigError(PkgnetError):
    """設定ファイル・引数の不備"""
    exit_code = 1


class ParseError(PkgnetError):
    """入力ファイルの構文エラー"""
    exit_code = 2

    def __init__(self, message: str, line_no: Optional[int] = None, group: Optional[str] = None):
        self.line_no = line_no
        self.group = group
        if line_no is not None:
            message = f"{line_no}行目: {message}"
        super().__init__(message)


class SelfLoopError(ParseError):
    """自己ループを含むエッジ行"""


class GraphLookupError(PkgnetError, KeyError):
    """グラフに存在しないノード"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class EmptyGraphError(PkgnetError):
    """対象ノード・エッジが存在しない"""


class EmptyDistributionError(PkgnetError):
    """次数1以上のノードが存在しない"""


class InsufficientDataError(PkgnetError):
    """回帰に必要な点数が不足"""


class DegenerateDataError(PkgnetError):
    """説明変数の分散がゼロ"""


class DomainError(PkgnetError):
    """対数変換できない値"""


class CoverageError(PkgnetError):
    """パーティションが必要なノードを含まない"""


class RewireError(PkgnetError):
    """リワイヤリング不可能なグラフ"""


class InstallStateError(PkgnetError):
    """インストール状態に対する不正な操作"""


class EnsembleError(PkgnetError):
    """アンサンブル中の個別ネットワークでの失敗"""

    def __init__(self, message: str, index: int):
        self.message = message
        self.index = index
        super().__init__(f"ネットワーク#{index}: {message}")

    def __reduce__(self):
        # 並列ワーカーからの受け渡し用
        return (type(self), (self.message, self.index))
