"""
Tracy-Widom (order 2) Table
===========================
Tabulated CDF of the TW2 law with monotone interpolation, its inverse, and the
centering/scaling constants of the largest eigenvalue of a complex Wishart
matrix R = N * Q.

Interior: PCHIP through (t, logit F2(t)), so the curve is monotone and passes
exactly through every knot. Tails: log(1 - F2) is extended linearly from the
last two knots on the right, log F2 linearly from the first two on the left,
and the result is clamped to (eps, 1 - eps).
"""

from __future__ import annotations
import math
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.special import expit, logit

from config.settings import SETTINGS
from sensing.errors import DomainError
from sensing.schemas import WishartParams

EPS = SETTINGS["numerics"]["tw2_tail_eps"]

# Published TW2 CDF values (Prahofer & Spohn tables).
TABLE_KNOTS: Tuple[Tuple[float, float], ...] = (
    (-3.70, 0.01),
    (-2.90, 0.1),
    (-1.80, 0.5),
    (-0.60, 0.9),
    (-0.23, 0.95),
    (0.49, 0.99),
    (1.32, 0.999),
    (2.06, 0.9999),
    (2.68, 0.99999),
)


class Tw2Table:
    """Immutable TW2 CDF table; every query is a pure function."""

    def __init__(self, knots: Sequence[Tuple[float, float]] = TABLE_KNOTS):
        t = np.array([k[0] for k in knots], dtype=float)
        f = np.array([k[1] for k in knots], dtype=float)
        if t.size < 2:
            raise ValueError("TW2 table needs at least two knots")
        if np.any(np.diff(t) <= 0) or np.any(np.diff(f) <= 0):
            raise ValueError("TW2 table must be strictly increasing in t and F2")
        if np.any(f <= 0) or np.any(f >= 1):
            raise ValueError("TW2 table F2 values must lie in (0, 1)")
        self.t = t
        self.f = f
        self._by_t: Dict[float, float] = dict(zip(t.tolist(), f.tolist()))
        self._by_f: Dict[float, float] = dict(zip(f.tolist(), t.tolist()))
        self._interior = PchipInterpolator(t, logit(f), extrapolate=False)
        # log-linear tail slopes
        self._left_slope = (math.log(f[1]) - math.log(f[0])) / (t[1] - t[0])
        self._right_slope = (math.log1p(-f[-1]) - math.log1p(-f[-2])) / (t[-1] - t[-2])

    @classmethod
    def from_file(cls, path: Path) -> "Tw2Table":
        """Two whitespace-separated columns (t, F2), one knot per row."""
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns, got {data.shape[1]}")
        return cls([(float(a), float(b)) for a, b in data])

    def describe(self) -> Dict[str, str]:
        return {
            "tw2_knots": str(len(self.t)),
            "tw2_interpolation": "pchip on logit(F2) between knots",
            "tw2_left_tail": "log F2 linear from the first two knots",
            "tw2_right_tail": "log(1 - F2) linear from the last two knots",
            "tw2_clamp": f"({EPS:g}, 1 - {EPS:g})",
        }

    # ---- CDF -------------------------------------------------

    def cdf(self, t: float) -> float:
        t = float(t)
        if t in self._by_t:
            return self._by_t[t]
        if t < self.t[0]:
            value = math.exp(math.log(self.f[0]) + self._left_slope * (t - self.t[0]))
        elif t > self.t[-1]:
            value = -math.expm1(math.log1p(-self.f[-1]) + self._right_slope * (t - self.t[-1]))
        else:
            value = float(expit(self._interior(t)))
        return min(max(value, EPS), 1.0 - EPS)

    # ---- Quantile --------------------------------------------

    def quantile(self, p: float) -> float:
        p = float(p)
        if not 0.0 < p < 1.0:
            raise DomainError(f"probability {p} outside (0, 1)")
        if p in self._by_f:
            return self._by_f[p]
        if p < self.f[0]:
            return float(self.t[0] + (math.log(p) - math.log(self.f[0])) / self._left_slope)
        if p > self.f[-1]:
            return float(self.t[-1] + (math.log1p(-p) - math.log1p(-self.f[-1])) / self._right_slope)
        i = int(np.searchsorted(self.f, p))
        lo, hi = self.t[i - 1], self.t[i]
        target = float(logit(p))
        return float(brentq(lambda x: float(self._interior(x)) - target, lo, hi,
                            xtol=1e-14, rtol=4 * np.finfo(float).eps))


@lru_cache(maxsize=1)
def default_table() -> Tw2Table:
    override: Optional[Path] = SETTINGS["paths"]["tw2_table"]
    if override is not None:
        return Tw2Table.from_file(override)
    return Tw2Table()


def tw2_cdf(t: float, table: Optional[Tw2Table] = None) -> float:
    return (table or default_table()).cdf(t)


def tw2_quantile(p: float, table: Optional[Tw2Table] = None) -> float:
    return (table or default_table()).quantile(p)


def wishart_params(M: int, N: int) -> WishartParams:
    """mu = (sqrt M + sqrt N)^2, nu = sqrt(mu) (1/sqrt M + 1/sqrt N)^(1/3)."""
    if M < 1 or N < 1:
        raise DomainError(f"M and N must be >= 1, got M={M}, N={N}")
    mu = (math.sqrt(M) + math.sqrt(N)) ** 2
    nu = math.sqrt(mu) * (1.0 / math.sqrt(M) + 1.0 / math.sqrt(N)) ** (1.0 / 3.0)
    return WishartParams(mu=mu, nu=nu)


def wishart_standardize(lambda_max_R: float, M: int, N: int) -> float:
    """(lambda_max(R) - mu) / nu for R = N * sample covariance."""
    w = wishart_params(M, N)
    return (lambda_max_R - w.mu) / w.nu
