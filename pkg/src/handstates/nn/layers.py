"""Dense, batch-norm, ReLU and dropout building blocks with exact gradients.

Every layer caches what its backward pass needs during forward and exposes
its parameters/gradients through ``params()`` / ``grads()`` dictionaries so
the optimizer can address them by name. All math is float64.
"""

from __future__ import annotations

import numpy as np

BN_EPS = 1e-5
BN_MOMENTUM = 0.9


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = float(np.sqrt(6.0 / (fan_in + fan_out)))
    return rng.uniform(-limit, limit, size=shape)


class Dense:
    """Affine map y = x W + b with an optional L2 penalty on W.

    The penalty is lambda * ||W||^2, contributing 2 * lambda * W to the
    weight gradient; biases are not penalised.
    """

    def __init__(self, w: np.ndarray, b: np.ndarray, l2: float = 0.0, name: str = "dense"):
        if w.ndim != 2 or b.shape != (w.shape[1],):
            raise ValueError(f"inconsistent dense shapes {w.shape} / {b.shape}")
        self.w = w
        self.b = b
        self.l2 = float(l2)
        self.name = name
        self.dw = np.zeros_like(w)
        self.db = np.zeros_like(b)
        self._x: np.ndarray | None = None

    @classmethod
    def create(cls, rng, n_in: int, n_out: int, l2: float = 0.0, name: str = "dense"):
        w = glorot_uniform(rng, n_in, n_out, (n_in, n_out))
        return cls(w, np.zeros(n_out), l2=l2, name=name)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if x.shape[1] != self.w.shape[0]:
            raise ValueError(
                f"{self.name}: input width {x.shape[1]} != weight rows {self.w.shape[0]}"
            )
        self._x = x
        return x @ self.w + self.b

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x = self._x
        self.dw += x.T @ dy
        if self.l2 > 0.0:
            self.dw += 2.0 * self.l2 * self.w
        self.db += dy.sum(axis=0)
        return dy @ self.w.T

    def penalty(self) -> float:
        return self.l2 * float((self.w * self.w).sum()) if self.l2 > 0.0 else 0.0

    def params(self):
        return {f"{self.name}.w": self.w, f"{self.name}.b": self.b}

    def grads(self):
        return {f"{self.name}.w": self.dw, f"{self.name}.b": self.db}

    def zero_grads(self):
        self.dw[:] = 0.0
        self.db[:] = 0.0


class ReLU:
    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        self._mask = x > 0
        return x * self._mask

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return dy * self._mask


class BatchNorm:
    """Per-feature batch normalisation with running statistics.

    Train mode normalises by the batch mean and population variance and
    blends them into the running statistics with momentum 0.9; inference
    uses the running statistics only. Training batches must have >= 2 rows,
    otherwise the batch variance is degenerate.
    """

    def __init__(self, gamma: np.ndarray, beta: np.ndarray, name: str = "bn"):
        self.gamma = gamma
        self.beta = beta
        self.name = name
        self.running_mean = np.zeros_like(gamma)
        self.running_var = np.ones_like(gamma)
        self.dgamma = np.zeros_like(gamma)
        self.dbeta = np.zeros_like(beta)
        self._cache = None

    @classmethod
    def create(cls, dim: int, name: str = "bn"):
        return cls(np.ones(dim), np.zeros(dim), name=name)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if train:
            if x.shape[0] < 2:
                raise ValueError(f"{self.name}: train-mode batch must have >= 2 rows")
            mu = x.mean(axis=0)
            var = x.var(axis=0)
            inv_std = 1.0 / np.sqrt(var + BN_EPS)
            xhat = (x - mu) * inv_std
            self.running_mean = BN_MOMENTUM * self.running_mean + (1 - BN_MOMENTUM) * mu
            self.running_var = BN_MOMENTUM * self.running_var + (1 - BN_MOMENTUM) * var
            self._cache = (xhat, inv_std)
        else:
            inv_std = 1.0 / np.sqrt(self.running_var + BN_EPS)
            xhat = (x - self.running_mean) * inv_std
            self._cache = None
        return self.gamma * xhat + self.beta

    def backward(self, dy: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise RuntimeError(f"{self.name}: backward requires a train-mode forward")
        xhat, inv_std = self._cache
        m = dy.shape[0]
        self.dgamma += (dy * xhat).sum(axis=0)
        self.dbeta += dy.sum(axis=0)
        dxhat = dy * self.gamma
        return (
            inv_std
            / m
            * (m * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
        )

    def params(self):
        return {f"{self.name}.gamma": self.gamma, f"{self.name}.beta": self.beta}

    def grads(self):
        return {f"{self.name}.gamma": self.dgamma, f"{self.name}.beta": self.dbeta}

    def zero_grads(self):
        self.dgamma[:] = 0.0
        self.dbeta[:] = 0.0

    def running_stats(self):
        return {"mean": self.running_mean, "var": self.running_var}

    def set_running_stats(self, mean: np.ndarray, var: np.ndarray):
        self.running_mean = np.asarray(mean, dtype=np.float64)
        self.running_var = np.asarray(var, dtype=np.float64)


class Dropout:
    """Inverted dropout: kept units are scaled by 1/(1-p) at train time."""

    def __init__(self, p: float):
        if not 0.0 <= p < 1.0:
            raise ValueError("dropout probability must be in [0, 1)")
        self.p = float(p)
        self._mask = None

    def forward(self, x: np.ndarray, train: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
        if not train or self.p == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("train-mode dropout needs an RNG")
        self._mask = (rng.random(x.shape) >= self.p) / (1.0 - self.p)
        return x * self._mask

    def backward(self, dy: np.ndarray) -> np.ndarray:
        if self._mask is None:
            return dy
        return dy * self._mask
