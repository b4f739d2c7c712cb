"""
次数統計モジュール
累積次数分布、乗算的ビニング、指数関数/べき乗則の回帰とF検定
"""
import math
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from pkgnet.exceptions import (
    DegenerateDataError,
    DomainError,
    EmptyDistributionError,
    InsufficientDataError,
    PkgnetError,
)
from pkgnet.graph_core import DependencyGraph, degree_sequence
from pkgnet.models import FIT_MODELS, CumulativePoint, FitResult
from pkgnet.utils import get_logger

# ロガー設定
logger = get_logger(__name__)

# 乗算的ビンの既定の底
DEFAULT_BIN_BASE = 2.0

# 最良モデルの候補
CANDIDATE_MODELS = ("exponential", "power_law")


def cumulative_degree_distribution(graph: DependencyGraph, kind: str = "dep", direction: str = "in") -> List[CumulativePoint]:
    """
    累積次数分布 P(K >= k)

    分母は指定種別・向きで次数1以上のノード数。
    """
    degrees = np.array([d for d in degree_sequence(graph, kind, direction).values() if d >= 1], dtype=int)
    if degrees.size == 0:
        raise EmptyDistributionError(f"次数1以上のノードがありません: kind={kind}, direction={direction}")

    values, counts = np.unique(degrees, return_counts=True)
    # 大きい次数側からの累積
    tail = np.cumsum(counts[::-1])[::-1]
    return [CumulativePoint(k=float(k), p=float(t) / degrees.size) for k, t in zip(values, tail)]


def _bin_index(k: float, base: float) -> int:
    """k が属するビン b（base^b <= k < base^(b+1)）"""
    b = int(math.floor(math.log(k) / math.log(base)))
    # 浮動小数点誤差の補正
    while base ** (b + 1) <= k:
        b += 1
    while base ** b > k:
        b -= 1
    return b


def multiplicative_bin(points: Sequence[CumulativePoint], base: float = DEFAULT_BIN_BASE) -> List[CumulativePoint]:
    """
    乗算的ビニング

    ビン b は [base^b, base^(b+1)) を覆い、代表値はビン境界の幾何平均、
    p はビン内の点の平均。空のビンは出力しない。
    """
    if base <= 1:
        raise ValueError(f"ビンの底は1より大きい必要があります: {base}")
    if not points:
        raise EmptyDistributionError("ビニング対象の点がありません")

    members: Dict[int, List[float]] = {}
    for point in points:
        if point.k <= 0:
            raise DomainError(f"次数は正である必要があります: {point.k}")
        members.setdefault(_bin_index(point.k, base), []).append(point.p)

    binned = []
    for b in sorted(members):
        representative = math.sqrt(base ** b * base ** (b + 1))
        binned.append(CumulativePoint(k=representative, p=float(np.mean(members[b])), bin=b))
    return binned


def f_statistic(r_squared: float, n: int) -> float:
    """単回帰のF値 F = r^2 (n-2) / (1 - r^2)"""
    if r_squared >= 1.0:
        return math.inf
    return r_squared * (n - 2) / (1.0 - r_squared)


def least_squares(x: Sequence[float], y: Sequence[float], model: str) -> FitResult:
    """
    単回帰（scipy.stats.linregress）とF検定

    x, y は変換済みの値。df は (1, n-2)。
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = int(x.size)
    if n < 3:
        raise InsufficientDataError(f"回帰には3点以上が必要です: n={n}")
    if np.ptp(x) == 0.0:
        raise DegenerateDataError("説明変数の分散がゼロです")

    # 点は (x, y) の昇順に並べてから回帰
    order = np.lexsort((y, x))
    x, y = x[order], y[order]
    regression = stats.linregress(x, y)
    r_squared = min(1.0, float(regression.rvalue) ** 2)
    f_stat = f_statistic(r_squared, n)
    p_value = float(stats.f.sf(f_stat, 1, n - 2)) if math.isfinite(f_stat) else 0.0

    return FitResult(
        model=model,
        slope=float(regression.slope),
        intercept=float(regression.intercept),
        r_squared=r_squared,
        f_stat=f_stat,
        df=(1, n - 2),
        p_value=p_value,
        n=n,
    )


def fit_model(points: Sequence[CumulativePoint], model: str) -> FitResult:
    """
    累積分布への回帰

    - exponential: ln p を k に回帰
    - power_law: ln p を ln k に回帰
    - linear: p を k に回帰
    """
    if model not in FIT_MODELS:
        raise ValueError(f"モデルが不正です: {model}")
    if len(points) < 3:
        raise InsufficientDataError(f"回帰には3点以上が必要です: n={len(points)}")

    # 入力順に依存しないよう整列
    ordered = sorted(points, key=lambda pt: (pt.k, pt.p))
    k = np.array([pt.k for pt in ordered], dtype=float)
    p = np.array([pt.p for pt in ordered], dtype=float)
    if model != "linear" and np.any(p <= 0):
        raise DomainError("対数変換のため p は正である必要があります")

    if model == "exponential":
        return least_squares(k, np.log(p), model)
    if model == "power_law":
        if np.any(k <= 0):
            raise DomainError("べき乗則の回帰には k > 0 が必要です")
        return least_squares(np.log(k), np.log(p), model)
    return least_squares(k, p, model)


def fit_report(points: Sequence[CumulativePoint]) -> Dict[str, Any]:
    """指数関数とべき乗則の両方を当てはめ、F値が大きい方を最良とする"""
    candidates = {model: fit_model(points, model) for model in CANDIDATE_MODELS}
    # 同値の場合は指数関数を優先
    best = max(CANDIDATE_MODELS, key=lambda m: (candidates[m].f_stat, m == "exponential"))
    return {"best": best, "candidates": candidates}


def best_fit(points: Sequence[CumulativePoint]) -> FitResult:
    """F値が最大のモデル"""
    report = fit_report(points)
    return report["candidates"][report["best"]]


def distribution_fits(
    graph: DependencyGraph,
    kind: str = "dep",
    direction: str = "in",
    binned: bool = True,
    base: float = DEFAULT_BIN_BASE,
) -> Dict[str, Any]:
    """
    1種別・1方向の分布と回帰結果

    binned=False の場合は生の累積点に回帰する。点数不足などの場合は fits を None とし error を記録。
    """
    raw = cumulative_degree_distribution(graph, kind, direction)
    bins = multiplicative_bin(raw, base)
    target = bins if binned else raw

    result: Dict[str, Any] = {
        "kind": kind,
        "direction": direction,
        "binned": binned,
        "base": base,
        "raw": raw,
        "bins": bins,
        "best": None,
        "fits": None,
        "error": None,
    }
    try:
        report = fit_report(target)
        result["best"] = report["best"]
        result["fits"] = report["candidates"]
    except PkgnetError as e:
        result["error"] = str(e)
        logger.warning(f"次数分布の回帰をスキップ: kind={kind}, direction={direction}: {e}")
    return result


def distribution_table(raw: Sequence[CumulativePoint], bins: Sequence[CumulativePoint]) -> pd.DataFrame:
    """CSV出力用の表（列: k, p, bin。生の点は bin が空）"""
    rows = [{"k": pt.k, "p": pt.p, "bin": None} for pt in raw]
    rows.extend({"k": pt.k, "p": pt.p, "bin": pt.bin} for pt in bins)
    df = pd.DataFrame(rows, columns=["k", "p", "bin"])
    df["bin"] = df["bin"].astype("Int64")
    return df


def fits_to_dict(result: Dict[str, Any]) -> Dict[str, Any]:
    """distribution_fits の結果をJSON用に変換"""
    fits = result["fits"]
    return {
        "kind": result["kind"],
        "direction": result["direction"],
        "binned": result["binned"],
        "base": result["base"],
        "n_points": len(result["bins"] if result["binned"] else result["raw"]),
        "best": result["best"],
        "fits": {m: f.to_dict() for m, f in fits.items()} if fits else None,
        "error": result["error"],
    }
