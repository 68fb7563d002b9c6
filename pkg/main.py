import sys
import logging
from loguru import logger

from py_module.config import Configuration
from py_module.cli import dispatch
from py_module.codec import dumps_report
from py_module.exceptions import SaturateError

# ==========================================
# 🛡️ 日誌系統 (stdout 保留給 JSON 報告，日誌一律走 stderr)
# ==========================================
class InterceptHandler(logging.Handler):
    def emit(self, record):
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno
        frame, depth = logging.currentframe(), 2
        while frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1
        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())

def setup_logging(level="INFO"):
    logger.remove()
    fmt = "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
    logger.add(sys.stderr, format=fmt, level=level)

    # galois 會經由 numba 編譯 ufunc，sympy / mpmath 偶爾也會發 warning
    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
    for name in ("numba", "galois", "sympy", "mpmath"):
        logging.getLogger(name).handlers = [InterceptHandler()]
        logging.getLogger(name).propagate = False
    logging.getLogger("numba").setLevel(logging.WARNING)

# ==========================================
# 🚀 入口
# ==========================================
def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = Configuration()
    except SaturateError as e:
        setup_logging()
        logger.error(f"💥 設定載入失敗: {e.message}")
        print(dumps_report({"schema": 1, "command": list(argv), "error": e.to_dict()}))
        return e.exit_code

    setup_logging(config.LOG_LEVEL)
    code, report = dispatch(argv, config)
    print(dumps_report(report))

    if code == 0:
        logger.success(f"✅ [{argv[0] if argv else '?'}] 執行完畢")
    else:
        logger.info(f"任務 [{argv[0] if argv else '?'}] 結束，exit code = {code}")
    return code

if __name__ == "__main__":
    sys.exit(main())
