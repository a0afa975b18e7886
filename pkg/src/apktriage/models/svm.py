"""Linear SVM trained with the Pegasos stochastic subgradient method.

Objective: (lambda/2)*||w||^2 + mean_i hinge(y_i * (w.x_i + b)) with labels
in {-1, +1}. Step t visits one sample with learning rate eta_t = 1/(lambda*t);
the weight shrink uses the algebraically equal factor (1 - 1/t). The bias is
carried as an always-on augmented coordinate, so the shrink applies to it
too; without the shrink the first step's eta_1 = 1/lambda kick to b decays
only like O(1/sqrt(T)) and 50 epochs cannot reach a separating plane. An
epoch is one pass over a fresh shuffle of the training rows (rng.shuffle),
and the returned model is the average of the iterates seen after each of
the n updates of the final epoch.
"""

from __future__ import annotations

import numpy as np

from ..rng import Rng


class SvmModel:
    __slots__ = ("w", "b")

    def __init__(self, w: np.ndarray, b: float):
        self.w = np.asarray(w, dtype=np.float64)
        self.b = float(b)

    def margins(self, x: np.ndarray) -> np.ndarray:
        return x.astype(np.float64) @ self.w + self.b

    def scores(self, x: np.ndarray) -> np.ndarray:
        return _sigmoid(self.margins(x))

    def labels(self, x: np.ndarray) -> np.ndarray:
        return (self.margins(x) >= 0.0).astype(np.uint8)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def svm_objective(model: SvmModel, x: np.ndarray, y01: np.ndarray, lambda_reg: float) -> float:
    """Primal value at (w, b); y01 holds 0/1 labels."""
    ypm = np.asarray(y01, dtype=np.float64) * 2.0 - 1.0
    hinge = np.maximum(0.0, 1.0 - ypm * model.margins(x))
    return float(0.5 * lambda_reg * model.w @ model.w + hinge.mean())


def svm_fit(x: np.ndarray, y: np.ndarray, params, rng: Rng) -> SvmModel:
    n, d = x.shape
    lam = params.lambda_reg
    xf = x.astype(np.float64)
    ypm = np.asarray(y, dtype=np.float64) * 2.0 - 1.0
    w = np.zeros(d)
    b = 0.0
    w_sum = np.zeros(d)
    b_sum = 0.0
    t = 0
    for epoch in range(params.epochs):
        order = list(range(n))
        rng.shuffle(order)
        final = epoch == params.epochs - 1
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            violated = ypm[i] * (xf[i] @ w + b) < 1.0
            shrink = 1.0 - 1.0 / t
            w *= shrink
            b *= shrink
            if violated:
                w += (eta * ypm[i]) * xf[i]
                b += eta * ypm[i]
            if final:
                w_sum += w
                b_sum += b
    return SvmModel(w_sum / n, b_sum / n)
