"""Key answer extraction and matching for LLM evaluation."""

import os
from pathlib import Path

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __version__  # noqa: F401
except ImportError:  # build-tree layout: _core.so next to the package dir
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401


def data_dir() -> Path:
    """Directory holding prompt templates, rules, and suite configs."""
    env = os.environ.get("KEYFIND_DATA_DIR")
    if env:
        return Path(env)
    packaged = Path(__file__).resolve().parent / "data"
    if packaged.is_dir():
        return packaged
    return Path(__file__).resolve().parents[2] / "data"


def template_dir() -> Path:
    return data_dir() / "templates"
