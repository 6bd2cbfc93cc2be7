"""Reproducible artifact writing: fixed-precision CSV/JSON, run manifests, atomic files."""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__

__all__ = ["RunManifest", "fmt", "atomic_write", "write_csv", "write_json", "hash_inputs",
           "MANIFEST_PREFIX", "DIGITS"]

DIGITS = 9
MANIFEST_PREFIX = "# mewpt-manifest "


@dataclass(frozen=True)
class RunManifest:
    """Provenance stamped into every artifact.

    ``input_hash`` is the SHA-256 of the input files' bytes followed by the
    canonical JSON of the effective options, so identical runs carry
    identical manifests.
    """

    command: str
    inputs: list = field(default_factory=list)
    out_dir: str = "."
    overrides: dict = field(default_factory=dict)
    version: str = __version__
    input_hash: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def hash_inputs(paths, options: dict) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
        h.update(b"\0")
    h.update(json.dumps(_plain(options), sort_keys=True).encode())
    return h.hexdigest()


def fmt(x, digits: int = DIGITS) -> str:
    """Render one CSV field; floats get ``digits`` significant digits."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{digits}g}"
    return str(x)


def _plain(obj, digits: int | None = None):
    """JSON-ready copy; floats rounded to ``digits`` significant digits, non-finite to null."""
    if isinstance(obj, dict):
        return {str(k): _plain(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v, digits) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(f"{obj:.{digits}g}") if digits else obj
    if hasattr(obj, "item"):  # numpy scalar
        return _plain(obj.item(), digits)
    return str(obj)


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows, manifest: RunManifest | None = None, digits: int = DIGITS) -> Path:
    """CSV with an optional leading ``# mewpt-manifest {json}`` comment line."""
    lines = []
    if manifest is not None:
        lines.append(MANIFEST_PREFIX + json.dumps(manifest.to_dict(), sort_keys=True))
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v, digits) for v in row))
    return atomic_write(path, "\n".join(lines) + "\n")


def write_json(path, obj: dict, manifest: RunManifest | None = None, digits: int = DIGITS) -> Path:
    body = dict(obj)
    if manifest is not None:
        body["manifest"] = manifest.to_dict()
    return atomic_write(path, json.dumps(_plain(body, digits), indent=2, sort_keys=True) + "\n")
