"""Linear discriminant analysis with a shrinkage-stabilized pooled covariance.

Sigma = (S0 + S1) / (N - 2) + shrinkage * I, where S_c is the within-class
scatter of class c. Discriminant of class c at x:

    delta_c(x) = x' Sigma^-1 mu_c - 0.5 * mu_c' Sigma^-1 mu_c + log pi_c

with empirical priors pi_c. The malicious score is the softmax posterior
sigmoid(delta_1 - delta_0); ties (score exactly 0.5) go to Malicious.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericalError, TrainingError
from .svm import _sigmoid


class LdaModel:
    __slots__ = ("means", "precision", "log_priors")

    def __init__(self, means: np.ndarray, precision: np.ndarray, log_priors: np.ndarray):
        self.means = np.asarray(means, dtype=np.float64)          # (2, d)
        self.precision = np.asarray(precision, dtype=np.float64)  # (d, d)
        self.log_priors = np.asarray(log_priors, dtype=np.float64)

    def discriminants(self, x: np.ndarray) -> np.ndarray:
        """(n, 2) array of delta_c values."""
        xf = x.astype(np.float64)
        coef = self.precision @ self.means.T                      # (d, 2)
        const = -0.5 * np.sum(self.means * coef.T, axis=1) + self.log_priors
        return xf @ coef + const

    def scores(self, x: np.ndarray) -> np.ndarray:
        delta = self.discriminants(x)
        return _sigmoid(delta[:, 1] - delta[:, 0])

    def labels(self, x: np.ndarray) -> np.ndarray:
        delta = self.discriminants(x)
        return (delta[:, 1] >= delta[:, 0]).astype(np.uint8)


def lda_fit(x: np.ndarray, y: np.ndarray, params) -> LdaModel:
    xf = np.asarray(x, dtype=np.float64)
    yy = np.asarray(y)
    n, d = xf.shape
    if n < 3:
        raise TrainingError("pooled covariance needs at least 3 samples")
    means = np.zeros((2, d))
    scatter = np.zeros((d, d))
    counts = np.zeros(2)
    for c in (0, 1):
        rows = xf[yy == c]
        if len(rows) == 0:
            raise TrainingError("training set has no class-%d samples" % c)
        counts[c] = len(rows)
        means[c] = rows.mean(axis=0)
        centered = rows - means[c]
        scatter += centered.T @ centered
    pooled = scatter / (n - 2) + params.shrinkage * np.eye(d)
    try:
        precision = np.linalg.inv(pooled)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("pooled covariance is singular: %s" % exc)
    if not np.isfinite(precision).all():
        raise NumericalError("pooled covariance inversion overflowed")
    log_priors = np.log(counts / n)
    return LdaModel(means, precision, log_priors)
