"""Error decomposition over the network of estimates.

The mean squared estimation error over the network splits exactly into
the variance of the estimates around their mean plus the squared error of
that mean: (1/N) sum ||x_i - c||^2 = (1/N) sum ||x_i - xbar||^2 +
||xbar - c||^2. The reported rmse is the square root of the left side.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricsRecord:
    t: int
    rmse: float
    variance: float
    mean_bias_sq: float
    per_node_error: tuple

    def identity_gap(self) -> float:
        """Relative mismatch of rmse^2 against variance + mean_bias_sq."""
        lhs = self.rmse * self.rmse
        rhs = self.variance + self.mean_bias_sq
        return abs(lhs - rhs) / max(rhs, 1e-300)


def decompose_error(estimates, truth, t: int = 0) -> MetricsRecord:
    """Split the network's squared error at time t into variance and bias.

    estimates: (N, 2) per-node common error estimates; truth: (2,) the
    true common error c(t).
    """
    estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
    truth = np.asarray(truth, dtype=float)
    centered = estimates - estimates.mean(axis=0)
    variance = float(np.einsum("ij,ij->", centered, centered)) / estimates.shape[0]
    bias = estimates.mean(axis=0) - truth
    mean_bias_sq = float(bias @ bias)
    errors = np.linalg.norm(estimates - truth, axis=1)
    return MetricsRecord(
        t=t,
        rmse=float(np.sqrt(variance + mean_bias_sq)),
        variance=variance,
        mean_bias_sq=mean_bias_sq,
        per_node_error=tuple(float(e) for e in errors),
    )


def steady_state_mean(records, field: str = "rmse") -> float:
    """Time average of a metric over the second half of the run."""
    if not records:
        raise ValueError("no records")
    tail = records[len(records) // 2 :]
    return float(np.mean([getattr(r, field) for r in tail]))
