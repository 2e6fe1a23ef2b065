"""
Tests for decay fits, summaries and the exponent ledger.
"""
import math
from datetime import datetime

import numpy as np
import pandas as pd
import pytest

from src.analytics.analyzer import (
    ExperimentAnalyzer,
    c_hat_spread,
    degenerate_summary,
    fit_decay,
    stacking_summary,
)
from src.analytics.ledger import exponent_ledger, zero_count_bound
from src.errors import DomainError
from src.etl.database import ExperimentDatabase
from src.experiments.records import ExperimentRecord


# -- decay fits --------------------------------------------------------------

def test_exact_power_law():
    ns = np.arange(2, 12)
    fit = fit_decay(pd.DataFrame({"n": ns, "favard": 2.0 / ns}))
    assert fit.exponent == pytest.approx(1.0)
    assert fit.prefactor == pytest.approx(2.0)
    assert fit.residual_norm < 1e-10


def test_log_floor_constant():
    ns = np.arange(2, 12)
    fit = fit_decay(pd.DataFrame({"n": ns, "favard": np.log(ns) / ns}))
    assert fit.log_constant == pytest.approx(1.0)
    assert 0 < fit.exponent < 1


def test_generations_below_two_are_ignored():
    pairs = [(0, 2.0), (1, 1.9), (2, 0.5), (4, 0.25)]
    fit = fit_decay(pairs)
    assert fit.n == [2, 4]
    assert fit.exponent == pytest.approx(1.0)


def test_fit_from_record():
    record = ExperimentRecord("h", "favard-sweep", "1", datetime(2024, 1, 1))
    for n in range(6):
        record.add_row(n=n, favard=3.0 / (n + 1))
    fit = fit_decay(record)
    assert fit.n == [2, 3, 4, 5]
    assert fit.exponent > 0


def test_fit_needs_two_positive_points():
    with pytest.raises(DomainError):
        fit_decay([(2, 1.0)])
    with pytest.raises(DomainError):
        fit_decay([(2, 1.0), (3, 0.0)])


# -- summaries ---------------------------------------------------------------

def test_stacking_summary_counts_vacuous_rows():
    frame = pd.DataFrame({
        "N": [6, 6, 6, 7],
        "K": [2.0, 2.0, 3.0, 2.0],
        "ratio": [0.5, np.nan, np.nan, 0.7],
    })
    summary = stacking_summary(frame).set_index(["N", "K"])
    assert summary.loc[(6, 2.0), "directions"] == 2
    assert summary.loc[(6, 2.0), "vacuous"] == 1
    assert summary.loc[(6, 2.0), "max_ratio"] == pytest.approx(0.5)
    assert math.isnan(summary.loc[(6, 3.0), "max_ratio"])
    assert stacking_summary(pd.DataFrame()).empty


def test_c_hat_spread_across_generations():
    frame = pd.DataFrame({
        "N": [6, 6, 7, 7, 8],
        "ratio": [0.4, 1.0, 1.05, None, 0.95],
    })
    per_n, spread = c_hat_spread(frame)
    assert per_n.to_dict() == {6: 1.0, 7: 1.05, 8: 0.95}
    assert spread == pytest.approx(1.05 / 0.95 - 1)


def test_c_hat_spread_undefined_when_a_generation_is_vacuous():
    frame = pd.DataFrame({"N": [6, 7], "ratio": [1.0, None]})
    per_n, spread = c_hat_spread(frame)
    assert spread is None
    assert math.isnan(per_n[7])


def test_degenerate_summary_is_a_pivot():
    frame = pd.DataFrame({"delta": [0.2, 0.2, 0.8, 0.8], "n": [0, 1, 0, 1], "favard": [2.0, 1.5, 2.0, 1.7]})
    table = degenerate_summary(frame)
    assert list(table.columns) == ["n", "delta=0.2", "delta=0.8"]
    assert table["delta=0.8"].tolist() == [2.0, 1.7]


def test_analyzer_reads_from_the_ledger(tmp_path):
    db = ExperimentDatabase(str(tmp_path / "experiments.db"))
    analyzer = ExperimentAnalyzer(db)
    assert analyzer.decay_fit() is None

    record = ExperimentRecord("h", "favard-sweep", "1", datetime(2024, 1, 1))
    for n in range(2, 8):
        record.add_row(n=n, favard=1.0 / n)
    db.insert_record(record.finish())

    fit = analyzer.decay_fit("h")
    assert fit.exponent == pytest.approx(1.0)
    report = analyzer.generate_report()
    assert report["ledger"]["total_records"] == 1
    assert report["decay"]["exponent"] == pytest.approx(1.0)
    assert "stacking" not in report


# -- exponent ledger ---------------------------------------------------------

def test_ledger_reproduces_the_published_chain():
    ledger = exponent_ledger()
    assert ledger.M == 5
    assert 21.85 < ledger.alpha_min < 21.86
    assert ledger.A_min == pytest.approx(5 * ledger.alpha_min + 2)
    assert abs(1 / ledger.epsilon0_max - 223) <= 1
    for beta, denominator in ledger.p_denominators().items():
        assert abs(denominator - 225) <= 1
        assert denominator == pytest.approx(1 / ledger.epsilon0_max + beta)


def test_loose_bound_costs_one_more_zero():
    ledger = exponent_ledger()
    assert ledger.loose_sup_bound > ledger.sup_bound
    assert ledger.loose_M == 6


def test_ledger_margins_and_frame():
    base = exponent_ledger(betas=(2.0,))
    wider = exponent_ledger(betas=(2.0,), alpha_margin=0.1, A_margin=1.0)
    assert wider.p_max[2.0] < base.p_max[2.0]
    frame = exponent_ledger(betas=(2.0, 2.5, 3.0)).to_frame()
    assert frame["beta"].tolist() == [2.0, 2.5, 3.0]
    assert (frame["M"] == 5).all()


def test_ledger_rejects_bad_inputs():
    with pytest.raises(DomainError):
        exponent_ledger(H=0.0)
    with pytest.raises(DomainError):
        exponent_ledger(alpha_margin=-1.0)


def test_zero_count_bound():
    assert zero_count_bound(17.0) == 5
    assert zero_count_bound(1.0 + 2.0 * math.exp(2.4)) == 5
