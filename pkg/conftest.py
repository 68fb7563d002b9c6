import sys
from pathlib import Path

# py_module 沒有 __init__.py，直接從 repo 根目錄匯入
sys.path.insert(0, str(Path(__file__).resolve().parent))
