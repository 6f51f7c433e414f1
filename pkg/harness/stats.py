"""Binomial proportions with Wilson intervals, and ROC area."""

from __future__ import annotations
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import binomtest

CONFIDENCE = 0.95


@dataclass(frozen=True)
class Proportion:
    successes: int
    trials: int
    low: float
    high: float

    @property
    def value(self) -> float:
        return self.successes / self.trials

    @property
    def half_width(self) -> float:
        return 0.5 * (self.high - self.low)

    def contains(self, p: float) -> bool:
        return self.low <= p <= self.high


def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE) -> Tuple[float, float]:
    if trials < 1:
        raise ValueError("need at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"{successes} successes out of {trials} trials")
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=confidence,
                                                              method="wilson")
    return float(ci.low), float(ci.high)


def proportion(successes: int, trials: int, confidence: float = CONFIDENCE) -> Proportion:
    low, high = wilson_interval(successes, trials, confidence)
    return Proportion(int(successes), int(trials), low, high)


def roc_auc(p_fa: Sequence[float], p_d: Sequence[float]) -> float:
    """Trapezoid area under the empirical ROC, anchored at (0, 0) and (1, 1)."""
    x = np.concatenate([[0.0], np.asarray(p_fa, dtype=float), [1.0]])
    y = np.concatenate([[0.0], np.asarray(p_d, dtype=float), [1.0]])
    order = np.lexsort((y, x))
    return float(trapezoid(y[order], x[order]))
