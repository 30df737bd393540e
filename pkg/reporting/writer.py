"""Atomic report writes: temp file in the target directory, then rename."""
from __future__ import annotations

import logging
import os
import re
import tempfile
from pathlib import Path

_log = logging.getLogger(__name__)


def slugify(name: str) -> str:
    """Filesystem-safe stem for a tree, spec or scenario id."""
    slug = re.sub(r"[^\w\s.-]", "", name.strip())
    slug = re.sub(r"\s+", "_", slug)
    return slug[:64] or "unknown"


def write_atomic(path: str | Path, text: str) -> Path:
    """Write *text* to *path* so readers never observe a partial file."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    _log.debug("Wrote %s (%d bytes)", target, len(text.encode("utf-8")))
    return target


def write_outputs(out_dir: str | Path, files: dict[str, str]) -> list[Path]:
    """Write several reports into *out_dir*, in name order."""
    return [write_atomic(Path(out_dir) / name, files[name]) for name in sorted(files)]
