"""Optimizers for the from-scratch engine: Adam (default) and plain SGD.

Both mutate the model's parameter arrays in place; the learning rate is a
plain attribute so a training loop can decay it per epoch. Gradient arrays
are re-read from the model on every step because layers publish fresh grad
arrays on each backward pass.
"""

from __future__ import annotations

import numpy as np


class Adam:
    def __init__(self, model, lr: float = 0.01, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.model = model
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = [np.zeros_like(value) for _, value, _ in model.parameters()]
        self._v = [np.zeros_like(value) for _, value, _ in model.parameters()]

    def step(self):
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for (_, value, grad), m, v in zip(self.model.parameters(), self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            value -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


class SGD:
    def __init__(self, model, lr: float = 0.01):
        self.model = model
        self.lr = lr

    def step(self):
        for _, value, grad in self.model.parameters():
            value -= self.lr * grad


def make_optimizer(model, name: str = "adam", lr: float = 0.01):
    if name == "adam":
        return Adam(model, lr=lr)
    if name == "sgd":
        return SGD(model, lr=lr)
    raise ValueError(f"unknown optimizer {name!r}")
