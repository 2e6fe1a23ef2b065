import sys
from pathlib import Path

import pytest

# Add repo root to path so `src.*` imports resolve
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.experiments.config import ExperimentConfig  # noqa: E402


@pytest.fixture
def small_config(tmp_path) -> ExperimentConfig:
    """A configuration sized for seconds, writing into a temporary directory."""
    return ExperimentConfig(
        n_max=4,
        generation_cap=10,
        theta_samples=16,
        m=2,
        riesz_audit_samples=2000,
        cetsq_trials=5,
        cetsq_max_k=20,
        stability_grid=10,
        tiling_m_max=3,
        tiling_t_samples=4,
        tiling_zero_samples=3,
        stacking_n_min=3,
        stacking_n_max=4,
        degenerate_deltas=(0.2, 0.8),
        degenerate_n_max=3,
        output_dir=str(tmp_path / "results"),
    )


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(12345)
