"""Table and metadata writers for reproducible run artifacts."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .units import watt_to_dbm

CONVENTIONS = {
    "frequency": "columns ending _hz are cyclic frequencies f = omega / 2 pi",
    "power": "columns ending _w are watts; _dbm = 10 log10(P / 1 mW)",
    "gain_db": "power gains in dB are 10 log10(G)",
    "squeezing_db": "quadrature variances in dB are 10 log10(2 V), vacuum V = 1/2 at 0 dB",
    "decimals": "dB and dBm columns are rounded to 4 decimals in CSV",
}


def _with_dbm(columns: Sequence[str]) -> list[str]:
    out = []
    for c in columns:
        out.append(c)
        if c.endswith("_w"):
            out.append(c[:-2] + "_dbm")
    return out


def _dbm(value) -> float:
    if value is None or not isinstance(value, (int, float)) or not value > 0:
        return float("nan")
    return float(watt_to_dbm(value)) if math.isfinite(value) else float("inf")


def _cell(key: str, value) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
        if key.endswith("_db") or key.endswith("_dbm"):
            return f"{value:.4f}"
        return repr(value)
    return str(value)


def emit_table(
    rows: Iterable[dict[str, Any]],
    fmt: str,
    path: str | Path,
    columns: Sequence[str] | None = None,
) -> Path:
    """Write homogeneous rows as RFC 4180 CSV or as a JSON array of objects.

    CSV gets a header row and a ``<name>_dbm`` column next to every
    ``<name>_w`` column. ``columns`` fixes the header when ``rows`` is empty.
    """
    rows = list(rows)
    if rows:
        keys = list(rows[0].keys())
        for r in rows[1:]:
            if list(r.keys()) != keys:
                raise ValueError("rows are not homogeneous")
        if columns is not None and list(columns) != keys:
            raise ValueError("columns do not match row keys")
    else:
        keys = list(columns or [])
    path = Path(path)
    if fmt == "json":
        text = json.dumps(rows, indent=2, sort_keys=False) + "\n"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return path
    if fmt != "csv":
        raise ValueError(f"unknown table format {fmt!r}")
    header = _with_dbm(keys)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for r in rows:
            cells = []
            for k in keys:
                cells.append(_cell(k, r[k]))
                if k.endswith("_w"):
                    cells.append(_cell(k[:-2] + "_dbm", _dbm(r[k])))
            writer.writerow(cells)
    return path


def read_json_table(path: str | Path) -> list[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def config_digest(resolved_config: dict) -> str:
    canonical = json.dumps(resolved_config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def sidecar_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".meta.json")


def write_metadata(
    path: str | Path,
    *,
    subcommand: str,
    version: str,
    seed: int,
    resolved_config: dict,
    results: dict | None = None,
    artifacts: Sequence[str] = (),
) -> Path:
    """Deterministic sidecar ``<artifact>.meta.json`` (no timestamps or host data)."""
    meta = {
        "subcommand": subcommand,
        "version": version,
        "seed": seed,
        "config_sha256": config_digest(resolved_config),
        "config": resolved_config,
        "conventions": CONVENTIONS,
        "artifacts": list(artifacts),
        "results": results or {},
    }
    out = sidecar_path(path)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return out
