"""
Experiment records - one per command run, the unit the ledger stores.
"""
import hashlib
import json
from dataclasses import dataclass, field, asdict
from datetime import datetime
from typing import Optional

import pandas as pd


def _clean(value):
    """JSON-ready value: numpy types unwrapped, complex as [re, im], keys as strings."""
    if isinstance(value, dict):
        return {str(_clean(k)): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


@dataclass
class ExperimentRecord:
    """Results of a single command under a single configuration."""
    config_hash: str
    command: str
    version: str
    started_at: datetime
    finished_at: Optional[datetime] = None
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    passed: bool = True

    # Generated
    id: str = field(default="", init=False)

    def __post_init__(self):
        key = f"{self.config_hash}|{self.command}|{self.version}|{self.started_at.isoformat()}"
        self.id = hashlib.md5(key.encode()).hexdigest()[:16]

    def add_row(self, **values):
        self.rows.append({k: _clean(v) for k, v in values.items()})

    def finish(self, passed: Optional[bool] = None) -> "ExperimentRecord":
        self.finished_at = datetime.now()
        if passed is not None:
            self.passed = passed
        return self

    @property
    def elapsed_s(self) -> Optional[float]:
        if self.finished_at is None:
            return None
        return (self.finished_at - self.started_at).total_seconds()

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["started_at"] = self.started_at.isoformat()
        data["finished_at"] = self.finished_at.isoformat() if self.finished_at else None
        data["summary"] = {k: _clean(v) for k, v in self.summary.items()}
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentRecord":
        data = dict(data)
        data.pop("id", None)
        data["started_at"] = datetime.fromisoformat(data["started_at"])
        if data.get("finished_at"):
            data["finished_at"] = datetime.fromisoformat(data["finished_at"])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)
