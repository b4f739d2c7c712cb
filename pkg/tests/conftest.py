"""
テスト共通フィクスチャ
"""
import os
import tempfile
from pathlib import Path

import pytest

# ログはテスト用の一時ディレクトリへ
os.environ.setdefault("PKGNET_LOG_DIR", str(Path(tempfile.gettempdir()) / "pkgnet-test-log"))

from pkgnet.graph_core import DependencyGraph  # noqa: E402

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def make_graph(dep=(), con=(), nodes=()):
    """エッジ列からグラフを作成（ノードは端点から補完）"""
    all_nodes = set(nodes)
    for i, j in list(dep) + list(con):
        all_nodes.update((i, j))
    return DependencyGraph(all_nodes, dep, con)


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def half_install_graph():
    """10パッケージの例（p1-p4 インストール済みなら半分しか入らない）"""
    return make_graph(
        dep=[
            ("p1", "p3"),
            ("p2", "p4"),
            ("p5", "p1"),
            ("p7", "p6"),
            ("p8", "p7"),
            ("p9", "p6"),
            ("p10", "p9"),
        ],
        con=[("p6", "p2")],
    )


@pytest.fixture
def two_triangles():
    """互いに連結していない2つの三角形"""
    return make_graph(dep=[("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f")])


@pytest.fixture
def clique_ring():
    """8ノードのクリーク4つを1本ずつのエッジでリング状につないだグラフ"""
    dep = []
    for c in range(4):
        members = [f"c{c}_{i}" for i in range(8)]
        for x in range(8):
            for y in range(x + 1, 8):
                dep.append((members[x], members[y]))
    for c in range(4):
        dep.append((f"c{c}_0", f"c{(c + 1) % 4}_7"))
    return make_graph(dep=dep)


@pytest.fixture
def concentrated_conflict_graph():
    """
    2モジュールの依存構造で、競合が一方のモジュール内に集中したグラフ

    モジュールA: 相互に競合するハブ2つと、それぞれに依存する葉5つずつ
    モジュールB: 20ノードの循環格子（b_i → b_{i+1}, b_{i+2}）、競合なし
    """
    dep = []
    for hub in ("ha1", "ha2"):
        for i in range(5):
            dep.append((f"{hub}_leaf{i}", hub))
    for i in range(20):
        dep.append((f"b{i:02d}", f"b{(i + 1) % 20:02d}"))
        dep.append((f"b{i:02d}", f"b{(i + 2) % 20:02d}"))
    return make_graph(dep=dep, con=[("ha1", "ha2"), ("ha2", "ha1")])
