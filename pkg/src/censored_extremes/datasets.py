"""Bundled synthetic survival data shaped like a clinical follow-up study."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .censored_data import CensoredSample, generate_censored, read_survival_csv
from .distributions import Beta

__all__ = ["SYNTHETIC_SEED", "SYNTHETIC_SIZE", "SYNTHETIC_SCALE", "make_synthetic_survival", "load_synthetic_survival", "synthetic_path"]

SYNTHETIC_SIZE = 1342
SYNTHETIC_SEED = 17
SYNTHETIC_SCALE = 3000.0  # days


def make_synthetic_survival(n: int = SYNTHETIC_SIZE, seed: int = SYNTHETIC_SEED) -> CensoredSample:
    """Scaled Beta(1, 3) event times censored by scaled Beta(1, 2) times.

    Events are in the Weibull domain (gamma_F = -1/3), about 40% of the
    observations are censored and the tail non-censoring index is 0.6.
    """
    s = generate_censored(Beta(1, 3), Beta(1, 2), n, np.random.default_rng(seed))
    return CensoredSample(s.z * SYNTHETIC_SCALE, s.delta)


def synthetic_path():
    return resources.files("censored_extremes") / "data" / "synthetic_survival.csv"


def load_synthetic_survival() -> CensoredSample:
    with resources.as_file(synthetic_path()) as p:
        return read_survival_csv(p)
