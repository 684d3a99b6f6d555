"""Utility functions for sbfctl."""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from errors import ValidationError

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(level: int = logging.WARNING):
    """Configure root logging the same way for the CLI and scripts."""
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)


def make_rng(seed: int) -> np.random.Generator:
    """Create the single seeded generator a run draws all randomness from."""
    return np.random.default_rng(seed)


def format_float(value: float) -> str:
    """Format a float with 17 significant digits."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def parse_norm_exponent(value: Union[str, float, int]) -> float:
    """Parse a norm exponent p in [1, inf].

    Args:
        value: Number or one of 'inf', 'infinity'

    Returns:
        p as a float (math.inf for the sup norm)
    """
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "oo"):
            return math.inf
        try:
            value = float(text)
        except ValueError:
            raise ValidationError(f"invalid norm exponent: {value!r}")
    p = float(value)
    if not p >= 1.0:
        raise ValidationError(f"norm exponent must be >= 1, got {p}")
    return p


def conjugate_exponent(p: float) -> float:
    """Return p' with 1/p + 1/p' = 1."""
    if math.isinf(p):
        return 1.0
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def inverse_exponent(p: float) -> float:
    """Return 1/p (0 for p = inf)."""
    return 0.0 if math.isinf(p) else 1.0 / p


@dataclass(frozen=True)
class SlopeFit:
    """Result of a weighted log-log line fit."""
    slope: float
    intercept: float
    r_squared: float
    points: int

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points": self.points,
        }


def fit_loglog_slope(x: Sequence[float], y: Sequence[float],
                     weights: Optional[Sequence[float]] = None) -> SlopeFit:
    """Fit log y = slope * log x + intercept by weighted least squares.

    Args:
        x: Abscissae (positive)
        y: Ordinates (positive)
        weights: Per-point weights; defaults to 1, 2, ..., k so that later
            (finer) levels count more

    Returns:
        SlopeFit with the weighted coefficient of determination
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if keep.sum() < 2:
        raise ValidationError("slope fit needs at least two positive points",
                              points=int(keep.sum()))
    if weights is None:
        w = np.arange(1, x.size + 1, dtype=float)
    else:
        w = np.asarray(weights, dtype=float)
    lx, ly, w = np.log(x[keep]), np.log(y[keep]), w[keep]

    slope, intercept = np.polyfit(lx, ly, 1, w=np.sqrt(w))
    resid = ly - (slope * lx + intercept)
    mean = np.sum(w * ly) / np.sum(w)
    total = np.sum(w * (ly - mean) ** 2)
    r_squared = 1.0 - np.sum(w * resid ** 2) / total if total > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), float(r_squared), int(lx.size))

