"""
Result files. Every artifact carries the config hash and the package version.
"""
import json
import logging
from pathlib import Path
from typing import Iterable

import pandas as pd

from src.zeros.continuation import ZeroTrace

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def header_line(config_hash: str, version: str, command: str) -> str:
    return f"# config_hash={config_hash} version={version} command={command}\n"


def write_csv(frame: pd.DataFrame, path, config_hash: str, version: str, command: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(header_line(config_hash, version, command))
        frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT)
    logger.info("wrote %d rows to %s", len(frame), path)
    return path


def read_header(path) -> dict:
    with open(path) as fh:
        first = fh.readline().strip()
    if not first.startswith("#"):
        return {}
    return dict(item.split("=", 1) for item in first[1:].split())


def read_csv(path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def write_traces(traces: Iterable[ZeroTrace], path, config_hash: str, version: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "config_hash": config_hash,
        "version": version,
        "traces": [trace.to_records() for trace in traces],
    }
    path.write_text(json.dumps(payload))
    return path


def read_traces(path) -> tuple[dict, list[ZeroTrace]]:
    payload = json.loads(Path(path).read_text())
    traces = [ZeroTrace.from_records(records) for records in payload["traces"] if records]
    return {"config_hash": payload["config_hash"], "version": payload["version"]}, traces
