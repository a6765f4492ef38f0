"""Monte Carlo estimates with batch-means error bars."""
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .errors import InsufficientSamples

N_BATCHES = 20


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    stderr: float
    ess: float
    n: int

    def z_score(self, target: float = 0.0) -> float:
        diff = abs(self.value - target)
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / self.stderr

    def within(self, k: float = 3.0, target: float = 0.0) -> bool:
        """|value - target| <= k * stderr."""
        return abs(self.value - target) <= k * self.stderr

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "ess": self.ess, "n": self.n}


def batch_means(values: Sequence[float], n_batches: int = N_BATCHES) -> EstimateWithError:
    """Mean of a (possibly autocorrelated) sequence with a batch-means standard error.

    Leading samples that do not fill a whole batch are dropped from the error
    estimate but kept in the mean.

    Raises:
        InsufficientSamples: fewer values than batches
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < n_batches:
        raise InsufficientSamples(f"{n} samples cannot fill {n_batches} batches")
    size = n // n_batches
    batches = x[n - size * n_batches:].reshape(n_batches, size).mean(axis=1)
    se = float(np.std(batches, ddof=1) / math.sqrt(n_batches))
    var = float(np.var(x, ddof=1)) if n > 1 else 0.0
    ess = var / se ** 2 if se > 0 else float(n)
    return EstimateWithError(float(np.mean(x)), se, ess, n)


def batch_means_array(values: np.ndarray, n_batches: int = N_BATCHES):
    """Column-wise batch means of an (n, k) array; returns (mean, stderr)."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < n_batches:
        raise InsufficientSamples(f"{n} samples cannot fill {n_batches} batches")
    size = n // n_batches
    batches = x[n - size * n_batches:].reshape((n_batches, size) + x.shape[1:]).mean(axis=1)
    return x.mean(axis=0), batches.std(axis=0, ddof=1) / math.sqrt(n_batches)


def pooled_stderr(*errors: float) -> float:
    return math.sqrt(sum(e * e for e in errors))


@dataclass
class Moments:
    """Running count, mean and sum of squared deviations; merges associatively."""
    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, value: float):
        self.n += 1
        d = value - self.mean
        self.mean += d / self.n
        self.m2 += d * (value - self.mean)

    def merge(self, other: "Moments") -> "Moments":
        n = self.n + other.n
        if n == 0:
            return Moments()
        d = other.mean - self.mean
        mean = self.mean + d * other.n / n
        m2 = self.m2 + other.m2 + d * d * self.n * other.n / n
        return Moments(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float


def poisson_chi_square(counts: Sequence[int], mean: float, min_expected: float = 5.0) -> ChiSquareResult:
    """Goodness of fit of observed counts against Poisson(mean).

    Cells with expected frequency below `min_expected` are merged into the
    two tails.
    """
    counts = np.asarray(counts, dtype=int)
    n = len(counts)
    lo = int(sps.poisson.ppf(1e-4, mean))
    hi = int(sps.poisson.isf(1e-4, mean)) + 1
    edges = list(range(lo, hi + 1))
    # cells [lo, lo+1), ..., with open tails folded into the end cells
    probs = np.diff(sps.poisson.cdf(np.array(edges) - 1, mean))
    probs[0] += sps.poisson.cdf(lo - 1, mean)
    probs[-1] += sps.poisson.sf(hi - 1, mean)
    observed = np.array([np.sum(counts == k) for k in range(lo, hi)], dtype=float)
    observed[0] += np.sum(counts < lo)
    observed[-1] += np.sum(counts >= hi)
    expected = probs * n

    merged_obs, merged_exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            merged_obs.append(acc_o)
            merged_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and merged_exp:
        merged_obs[-1] += acc_o
        merged_exp[-1] += acc_e
    if len(merged_exp) < 2:
        return ChiSquareResult(0.0, 0, 1.0)
    result = sps.chisquare(np.array(merged_obs), np.array(merged_exp))
    return ChiSquareResult(float(result.statistic), len(merged_exp) - 1, float(result.pvalue))
