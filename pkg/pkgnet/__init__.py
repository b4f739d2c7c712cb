"""
pkgnet - Debianパッケージネットワーク解析
Packagesインデックス取り込み、依存/競合グラフ、モジュール性、インストール過程シミュレーション
"""

__version__ = "1.0.0"
