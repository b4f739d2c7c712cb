"""
ユーティリティ関数
ログ設定、シード派生、出力ファイルのアトミック書き込み
"""
import json
import logging
import math
import os
import sys
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd


def get_logger(name: str = __name__) -> logging.Logger:
    """アプリケーションログ設定"""
    from pkgnet.config import LOG_DIR

    # ロガー設定
    logger = logging.getLogger(name)

    # 既存のハンドラがある場合はスキップ
    if logger.hasHandlers():
        return logger

    logger.setLevel(logging.INFO)
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # ファイルハンドラ設定（ログディレクトリが作れない環境ではコンソールのみ）
    try:
        os.makedirs(LOG_DIR, exist_ok=True)
        today = datetime.now().strftime("%Y-%m-%d")
        file_handler = logging.FileHandler(Path(LOG_DIR) / f"{today}.log")
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    except OSError:
        pass

    # コンソールハンドラ設定（標準出力はコマンドのサマリー専用）
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.WARNING)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    return logger


def derive_seeds(seed: Union[int, np.random.SeedSequence], n: int) -> List[np.random.SeedSequence]:
    """マスターシードからn個の独立した子シードを派生"""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return seed.spawn(n)


def make_rng(seed: Union[None, int, np.random.SeedSequence, np.random.Generator]) -> np.random.Generator:
    """シード指定から乱数生成器を作成"""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def finite_or_none(value: Optional[float]) -> Optional[float]:
    """JSON出力用: 非有限値はNone"""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def format_number(value: Union[int, float], precision: int = 0) -> str:
    """数値を3桁区切りでフォーマット"""
    if isinstance(value, (int, float)):
        if precision > 0:
            return f"{value:,.{precision}f}"
        return f"{value:,}"
    return str(value)


def format_percent(value: Union[int, float, None], precision: int = 1) -> str:
    """パーセント値のフォーマット"""
    if isinstance(value, (int, float)):
        return f"{value * 100:.{precision}f}%"
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    """一時ファイルに書き込んでからリネーム"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def write_text(path: Union[str, Path], text: str) -> Path:
    """テキスト出力"""
    path = Path(path)
    _atomic_write(path, text)
    return path


def write_json(path: Union[str, Path], data: Dict[str, Any], meta: Optional[Dict[str, Any]] = None) -> Path:
    """JSON出力（metaは先頭キーとして埋め込む）"""
    payload: Dict[str, Any] = {}
    if meta is not None:
        payload["meta"] = meta
    payload.update(data)
    text = json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=False, allow_nan=False)
    return write_text(path, text + "\n")


def write_csv(path: Union[str, Path], df: pd.DataFrame, meta: Optional[Dict[str, Any]] = None) -> Path:
    """CSV出力（metaはコメント行のヘッダーとして埋め込む）"""
    header = ""
    if meta is not None:
        header = "# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n"
    body = df.to_csv(index=False, lineterminator="\n", float_format="%.10g")
    return write_text(path, header + body)


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """メタ情報コメント付きCSVの読み込み"""
    return pd.read_csv(path, comment="#")


def run_meta(command: str, seed: Optional[int], digest: str) -> Dict[str, Any]:
    """確率的成果物のヘッダー情報"""
    from pkgnet import __version__

    return {
        "command": command,
        "seed": seed,
        "config_digest": digest,
        "version": __version__,
    }
