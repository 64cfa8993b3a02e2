"""Output files: '#'-headed CSV, JSON reports and the run manifest."""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def provenance(config: dict, reproducible: bool = False) -> list[str]:
    lines = [f"trapwave {__version__}", f"config_hash {config_hash(config)}",
             "config " + json.dumps(config, sort_keys=True, default=str)]
    if not reproducible:
        lines.append("date " + _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    return lines


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (complex, np.complexfloating)):
        raise TypeError("split complex values into columns before writing")
    return str(v)


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, columns, rows, config: dict, reproducible: bool = False) -> Path:
    """CSV with a provenance header and 17 significant digits."""
    out = ["# " + line for line in provenance(config, reproducible)]
    out.append(",".join(columns))
    out.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(Path(path), "\n".join(out) + "\n")
    return Path(path)


def read_csv(path):
    """(columns, float array) of a file written by :func:`write_csv`."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    cols = lines[0].strip().split(",")
    data = np.array([[float(x) for x in ln.strip().split(",")] for ln in lines[1:] if ln.strip()])
    return cols, data


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_json(path, payload: dict, config: dict, reproducible: bool = False) -> Path:
    doc = {"provenance": provenance(config, reproducible), **_jsonable(payload)}
    _atomic_write(Path(path), json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return Path(path)


def write_manifest(outdir, config: dict, files, results: dict, wall: float,
                   reproducible: bool = False) -> Path:
    doc = {
        "tool": "trapwave", "version": __version__, "config": config,
        "config_hash": config_hash(config),
        "wall_time": None if reproducible else round(wall, 3),
        "files": sorted(str(Path(f).name) for f in files),
        "results": _jsonable(results),
    }
    path = Path(outdir) / "manifest.json"
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for num, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{num}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out
