import os
from dotenv import load_dotenv
from loguru import logger

from py_module.exceptions import MalformedInput

TOOL_VERSION = "1.0.0"
REPORT_SCHEMA = 1

# --- 預設上限 (函式的 keyword 預設值直接引用這些常數) ---
DEFAULT_CLOSURE_CAP = 10 ** 7
DEFAULT_ENUM_BUDGET = 10 ** 6
DEFAULT_SAMPLE_TRIALS = 10 ** 4
DEFAULT_SEED = 0
DEFAULT_PURITY_TOL = 1e-9
DEFAULT_MPMATH_DPS = 50
MAX_FIELD_ORDER = 2 ** 20


class Configuration:
    def __init__(self):
        """
        初始化 saturate 工具的全域設定
        所有值都可由 .env 或環境變數覆寫；CLI 會把這些值明確傳進各模組
        """
        # 1. 載入環境變數
        load_dotenv()

        # --- 列舉與閉包上限 ---
        self.CLOSURE_CAP = self._read_int("SATURATE_CAP", DEFAULT_CLOSURE_CAP)
        self.ENUM_BUDGET = self._read_int("SATURATE_ENUM_BUDGET", DEFAULT_ENUM_BUDGET)
        self.SAMPLE_TRIALS = self._read_int("SATURATE_SAMPLE_TRIALS", DEFAULT_SAMPLE_TRIALS)
        self.RANDOM_SEED = self._read_int("SATURATE_SEED", DEFAULT_SEED)
        self.MAX_FIELD_ORDER = MAX_FIELD_ORDER

        # --- 數值根求解 (frobenius) ---
        self.PURITY_TOL = self._read_float("SATURATE_PURITY_TOL", DEFAULT_PURITY_TOL)
        self.MPMATH_DPS = self._read_int("SATURATE_MPMATH_DPS", DEFAULT_MPMATH_DPS)

        # --- 日誌 ---
        self.LOG_LEVEL = os.getenv("SATURATE_LOG_LEVEL", "INFO").upper()

        if self.CLOSURE_CAP < 1:
            raise MalformedInput("❌ SATURATE_CAP 必須為正整數", variable="SATURATE_CAP", value=self.CLOSURE_CAP)
        if not 0 < self.PURITY_TOL < 1:
            raise MalformedInput("❌ SATURATE_PURITY_TOL 必須介於 0 與 1 之間", variable="SATURATE_PURITY_TOL", value=self.PURITY_TOL)

    @staticmethod
    def _read_int(name, default):
        raw = os.getenv(name)
        if raw is None or raw.strip() == "":
            return default
        try:
            # 允許 1e7 這種寫法
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        except ValueError:
            raise MalformedInput(f"❌ 環境變數 {name} 不是整數: {raw!r}", variable=name, value=raw)

    @staticmethod
    def _read_float(name, default):
        raw = os.getenv(name)
        if raw is None or raw.strip() == "":
            return default
        try:
            return float(raw)
        except ValueError:
            raise MalformedInput(f"❌ 環境變數 {name} 不是數值: {raw!r}", variable=name, value=raw)

    def as_dict(self):
        """報告用：目前生效的設定值"""
        summary = {
            "closure_cap": self.CLOSURE_CAP,
            "enum_budget": self.ENUM_BUDGET,
            "sample_trials": self.SAMPLE_TRIALS,
            "seed": self.RANDOM_SEED,
            "purity_tol": self.PURITY_TOL,
            "mpmath_dps": self.MPMATH_DPS,
        }
        logger.debug(f"[CONFIG] 生效設定: {summary}")
        return summary
