"""
Analytics over experiment results: power-law decay fits of the Favard length
and summaries of the stacking and degenerate sweeps.
"""
import logging
import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
import pandas as pd

from src.errors import DomainError
from src.etl.database import ExperimentDatabase
from src.experiments.records import ExperimentRecord

logger = logging.getLogger(__name__)


@dataclass
class DecayFit:
    """Fav(n) ~ C / n^p fitted on n >= 2, plus the floor c in Fav(n) >= c log n / n."""
    n: list
    favard: list
    exponent: float
    intercept: float
    residual_norm: float
    log_constant: float

    @property
    def prefactor(self) -> float:
        return math.exp(self.intercept)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["prefactor"] = self.prefactor
        return data


def _pairs(source) -> pd.DataFrame:
    if isinstance(source, ExperimentRecord):
        source = source.to_frame()
    if isinstance(source, pd.DataFrame):
        frame = source[["n", "favard"]]
    else:
        frame = pd.DataFrame(list(source), columns=["n", "favard"])
    return frame.sort_values("n").reset_index(drop=True)


def fit_decay(source) -> DecayFit:
    """
    Least squares on (log n, log Fav) for n >= 2.
    `source` is a favard-sweep record, a DataFrame with n and favard columns, or (n, Fav) pairs.
    """
    frame = _pairs(source)
    frame = frame[frame["n"] >= 2]
    if len(frame) < 2:
        raise DomainError("need at least two generations n >= 2 to fit a decay")
    if (frame["favard"] <= 0).any():
        raise DomainError("Favard lengths must be positive")

    n = frame["n"].to_numpy(dtype=float)
    fav = frame["favard"].to_numpy(dtype=float)
    x, y = np.log(n), np.log(fav)
    (slope, intercept), residuals, *_ = np.polyfit(x, y, 1, full=True)
    residual_norm = float(np.sqrt(residuals[0])) if len(residuals) else 0.0
    log_constant = float(np.min(fav * n / np.log(n)))

    return DecayFit(
        n=frame["n"].astype(int).tolist(),
        favard=fav.tolist(),
        exponent=float(-slope),
        intercept=float(intercept),
        residual_norm=residual_norm,
        log_constant=log_constant,
    )


def stacking_summary(frame: pd.DataFrame) -> pd.DataFrame:
    """Per (N, K): how many directions were tested, how many were vacuous, and the worst ratio."""
    if frame.empty:
        return pd.DataFrame(columns=["N", "K", "directions", "vacuous", "max_ratio"])
    frame = frame.assign(ratio=pd.to_numeric(frame["ratio"]))
    grouped = frame.groupby(["N", "K"])
    return pd.DataFrame({
        "directions": grouped.size(),
        "vacuous": grouped["ratio"].apply(lambda s: int(s.isna().sum())),
        "max_ratio": grouped["ratio"].max(),
    }).reset_index()


def c_hat_spread(frame: pd.DataFrame) -> tuple[pd.Series, Optional[float]]:
    """
    Empirical stacking constant per generation and its relative spread.

    Args:
        frame: stacking rows with N and ratio columns (vacuous rows carry NaN)

    Returns:
        (C-hat per N, max/min - 1 across N). The spread is None when some N has
        no finite ratio or a zero constant.
    """
    ratios = pd.to_numeric(frame["ratio"])
    per_n = ratios.groupby(frame["N"]).max()
    if per_n.empty or per_n.isna().any() or per_n.min() <= 0:
        return per_n, None
    return per_n, float(per_n.max() / per_n.min() - 1)


def degenerate_summary(frame: pd.DataFrame) -> pd.DataFrame:
    """Fav against delta, one row per n."""
    table = frame.pivot_table(index="n", columns="delta", values="favard", aggfunc="first")
    table.columns = [f"delta={d:g}" for d in table.columns]
    return table.reset_index()


class ExperimentAnalyzer:
    """
    Reads stored records back out of the ledger for analysis.
    """

    def __init__(self, database: Optional[ExperimentDatabase] = None):
        self.db = database or ExperimentDatabase()

    def get_frame(self, command: str, config_hash: Optional[str] = None) -> pd.DataFrame:
        record = self.db.latest(command, config_hash)
        return record.to_frame() if record else pd.DataFrame()

    def decay_fit(self, config_hash: Optional[str] = None) -> Optional[DecayFit]:
        frame = self.get_frame("favard-sweep", config_hash)
        if frame.empty:
            logger.info("no favard-sweep record to fit")
            return None
        return fit_decay(frame)

    def generate_report(self, config_hash: Optional[str] = None) -> dict:
        report = {"ledger": self.db.get_stats()}
        fit = self.decay_fit(config_hash)
        if fit:
            report["decay"] = fit.to_dict()
        stacking = self.get_frame("stacking-audit", config_hash)
        if not stacking.empty:
            report["stacking"] = stacking_summary(stacking).to_dict(orient="records")
        return report


if __name__ == "__main__":
    print("🚀 Decay fit on a synthetic table\n")
    ns = np.arange(2, 12)
    fit = fit_decay(pd.DataFrame({"n": ns, "favard": np.log(ns) / ns}))
    print(f"📈 exponent p = {fit.exponent:.4f}")
    print(f"📉 log-floor c = {fit.log_constant:.4f}")
    print(f"   residual   = {fit.residual_norm:.3e}")
