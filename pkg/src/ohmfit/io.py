"""CSV and manifest serialization.

Numbers are written with up to 17 significant digits so every float
round-trips exactly; output files use LF line endings and UTF-8, which keeps
digests stable across platforms.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def format_number(x) -> str:
    """Render a value for CSV: integers plainly, floats with 17 significant digits."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    xf = float(x)
    if xf != xf:
        return "nan"
    if xf == float("inf"):
        return "inf"
    if xf == float("-inf"):
        return "-inf"
    return f"{xf:.17g}"


def write_csv(path, names, rows) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(format_number(v) for v in row) + "\n")


def write_table(path, table) -> None:
    write_csv(path, table.names, table.rows())


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command: str, config: dict, version: str,
                   started_utc: str, finished_utc: str, files) -> Path:
    """Record everything needed to re-run and verify an experiment."""
    out_dir = Path(out_dir)
    manifest = {
        "tool": "ohmfit",
        "version": version,
        "command": command,
        "config": config,
        "rng_name": "numpy-pcg64",
        "seed": config.get("seed"),
        "started_utc": started_utc,
        "finished_utc": finished_utc,
        "files": {name: f"sha256:{sha256_file(out_dir / name)}" for name in files},
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
