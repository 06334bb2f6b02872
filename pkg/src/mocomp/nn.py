"""Minimal numpy building blocks with hand-derived gradients.

Every op comes as a forward returning (output, cache) and a backward taking
(upstream grad, cache). Shapes: sequences are (F, C) arrays, frames first.
Gradients are exact analytic ones; tests cross-check them against central
finite differences.
"""

from __future__ import annotations

import numpy as np


def glorot(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    fan_in = int(np.prod(shape[:-1]))
    fan_out = int(shape[-1])
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def linear_fwd(x, W, b):
    return x @ W + b, (x, W)


def linear_bwd(dy, cache):
    x, W = cache
    dx = dy @ W.T
    dW = x.T @ dy
    db = dy.sum(axis=0) if dy.ndim > 1 else dy
    return dx, dW, db


def tanh_fwd(x):
    y = np.tanh(x)
    return y, y


def tanh_bwd(dy, y):
    return dy * (1.0 - y * y)


def conv1d_fwd(x, K, b):
    """Temporal convolution with zero 'same' padding.

    x: (F, C_in); K: (k, C_in, C_out) with odd k; b: (C_out,).
    """
    F, c_in = x.shape
    k, _, c_out = K.shape
    pad = k // 2
    xp = np.zeros((F + 2 * pad, c_in))
    xp[pad : pad + F] = x
    cols = np.concatenate([xp[i : i + F] for i in range(k)], axis=1)  # (F, k*C_in)
    y = cols @ K.reshape(k * c_in, c_out) + b
    return y, (cols, K, F, c_in)


def conv1d_bwd(dy, cache):
    cols, K, F, c_in = cache
    k, _, c_out = K.shape
    pad = k // 2
    dK = (cols.T @ dy).reshape(k, c_in, c_out)
    db = dy.sum(axis=0)
    dcols = dy @ K.reshape(k * c_in, c_out).T
    dxp = np.zeros((F + 2 * pad, c_in))
    for i in range(k):
        dxp[i : i + F] += dcols[:, i * c_in : (i + 1) * c_in]
    return dxp[pad : pad + F], dK, db


def sincos_features(pos: np.ndarray, n_features: int) -> np.ndarray:
    """Sinusoidal encoding of positions in [0, 1]; n_features must be even."""
    n_pairs = n_features // 2
    freqs = np.pi * (2.0 ** np.arange(n_pairs))
    angles = np.atleast_1d(pos)[..., None] * freqs
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=-1)


def l2_normalize_fwd(x):
    norm = np.sqrt((x * x).sum(axis=-1, keepdims=True))
    y = x / norm
    return y, (y, norm)


def l2_normalize_bwd(dy, cache):
    y, norm = cache
    return (dy - y * (dy * y).sum(axis=-1, keepdims=True)) / norm


class Adam:
    """Adam over a dict of named parameter arrays; update order is fixed by
    sorted name so runs are bit-reproducible."""

    def __init__(self, params: dict[str, np.ndarray], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for name in sorted(self.params):
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            m_hat = self.m[name] / b1c
            v_hat = self.v[name] / b2c
            self.params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def zero_grads_like(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in params.items()}
