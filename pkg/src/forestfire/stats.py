"""Empirical distribution helpers: summaries, KS distances, survival curves."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyRequestError

DEFAULT_QUANTILES = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99)


def _sorted_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise EmptyRequestError("samples must be nonempty")
    # stable sort: ties keep input order, so results are deterministic
    return np.sort(x, kind="stable")


def ks_statistic(samples, cdf: Callable) -> float:
    """Sup-norm distance between the empirical CDF of `samples` and `cdf`.

    `cdf` is called once on the sorted sample array and must be vectorized.
    """
    x = _sorted_samples(samples)
    return _ks_sorted(x, cdf)


def _ks_sorted(x: np.ndarray, cdf: Callable) -> float:
    n = x.size
    F = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(max(np.max(upper - F), np.max(F - lower), 0.0))


def ks_two_sample(a, b) -> float:
    """Sup-norm distance between two empirical CDFs."""
    xa = _sorted_samples(a)
    xb = _sorted_samples(b)
    pts = np.concatenate([xa, xb])
    Fa = np.searchsorted(xa, pts, side="right") / xa.size
    Fb = np.searchsorted(xb, pts, side="right") / xb.size
    return float(np.max(np.abs(Fa - Fb)))


def dkw_bound(n: int, alpha: float = 0.01) -> float:
    """Dvoretzky-Kiefer-Wolfowitz radius: P(KS > eps) <= alpha for this eps."""
    return float(np.sqrt(np.log(2.0 / alpha) / (2.0 * n)))


@dataclass(frozen=True)
class SurvivalCurve:
    """Empirical survival P(X > x) on a grid with Wilson-score standard errors.

    `se` is the one-sigma Wilson half-width, which stays positive at the
    boundary estimates 0 and 1 where the Wald error collapses.
    """

    x: np.ndarray
    survival: np.ndarray
    se: np.ndarray
    count: int


def empirical_survival(samples, x_grid) -> SurvivalCurve:
    x = _sorted_samples(samples)
    grid = np.asarray(x_grid, dtype=float)
    n = x.size
    surv = 1.0 - np.searchsorted(x, grid, side="right") / n
    z2 = 1.0
    se = np.sqrt(surv * (1 - surv) / n + z2 / (4 * n * n)) / (1 + z2 / n)
    for arr in (grid, surv, se):
        arr.setflags(write=False)
    return SurvivalCurve(x=grid, survival=surv, se=se, count=n)


@dataclass(frozen=True)
class SampleSummary:
    count: int
    mean: float
    variance: float
    quantiles: dict
    sorted_samples: np.ndarray = field(repr=False)

    @classmethod
    def from_samples(cls, samples, probs: Sequence[float] = DEFAULT_QUANTILES):
        x = _sorted_samples(samples)
        x.setflags(write=False)
        var = float(np.var(x, ddof=1)) if x.size > 1 else 0.0
        qs = np.quantile(x, probs)
        return cls(
            count=int(x.size),
            mean=float(np.mean(x)),
            variance=var,
            quantiles={float(p): float(q) for p, q in zip(probs, qs)},
            sorted_samples=x,
        )

    @property
    def standard_error(self) -> float:
        return float(np.sqrt(self.variance / self.count))

    def ks(self, cdf: Callable) -> float:
        return _ks_sorted(self.sorted_samples, cdf)

    def survival(self, x_grid) -> SurvivalCurve:
        return empirical_survival(self.sorted_samples, x_grid)

    def to_dict(self, cdf: Callable | None = None) -> dict:
        out = {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "quantiles": {f"{p:g}": q for p, q in self.quantiles.items()},
        }
        if cdf is not None:
            out["ks"] = self.ks(cdf)
        return out


def summarize(samples, probs: Sequence[float] = DEFAULT_QUANTILES) -> SampleSummary:
    return SampleSummary.from_samples(samples, probs)


def write_csv(path_or_file, header: Sequence[str], rows, comments: Sequence[str] = ()):
    """Write rows to CSV, preceded by `# ...` comment lines."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if own:
            fh.close()
