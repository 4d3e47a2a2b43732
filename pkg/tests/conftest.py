"""Make the src layout importable when the package is not installed."""
import pathlib
import sys

try:
    import qubitctl  # noqa: F401
except ImportError:
    sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))
