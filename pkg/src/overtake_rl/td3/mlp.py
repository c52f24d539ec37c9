"""Dense ReLU networks with hand-written backpropagation, plus Adam."""
from __future__ import annotations

import numba
import numpy as np


class Mlp:
    """Fully connected network: ReLU on hidden layers, ``tanh`` or identity on the output.

    Rows are samples: ``forward`` takes (batch, in) and returns (batch, out).
    Parameters live in ``self.params`` as [W0, b0, W1, b1, ...] with W of shape (in, out).
    """

    def __init__(self, layer_sizes, output="identity", rng=None):
        if output not in ("identity", "tanh"):
            raise ValueError(f"unknown output activation {output!r}")
        self.layer_sizes = [int(n) for n in layer_sizes]
        self.output = output
        rng = np.random.default_rng() if rng is None else rng
        self.params = []
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.params.append(rng.uniform(-bound, bound, size=fan_out))

    @property
    def n_layers(self):
        return len(self.params) // 2

    def forward(self, x, keep=False):
        """Returns the output, or (output, cache) when ``keep`` is set for a later backward pass."""
        a = np.atleast_2d(np.asarray(x, dtype=np.float64))
        cache = [a]
        last = self.n_layers - 1
        z = None
        for k in range(self.n_layers):
            a = a @ self.params[2 * k]
            a += self.params[2 * k + 1]
            if k < last:
                np.maximum(a, 0.0, out=a)
            elif self.output == "tanh":
                if keep:
                    z = a.copy()
                np.tanh(a, out=a)
            cache.append(a)
        if not keep:
            return a
        cache.append(a if z is None else z)  # output pre-activation, see preactivation()
        return a, cache

    def preactivation(self, cache):
        """Output layer values before the squashing function, from a ``keep`` cache."""
        return cache[self.n_layers + 1]

    __call__ = forward

    def backward(self, cache, grad_out, param_grads=True, grad_preact=None):
        """Gradients of sum(grad_out * output) w.r.t. every parameter and the input.

        ``grad_preact`` adds a gradient taken directly w.r.t. the output
        pre-activation. With ``param_grads=False`` only the input gradient is
        formed (the parameter list comes back as Nones), which skips half the matmuls.
        """
        grads = [None] * len(self.params)
        g = np.asarray(grad_out, dtype=np.float64)
        last = self.n_layers - 1
        for k in range(last, -1, -1):
            out = cache[k + 1]
            if k < last:
                g = g * (out > 0.0)
            elif self.output == "tanh":
                g = g * (1.0 - out * out)
            if k == last and grad_preact is not None:
                g = g + grad_preact
            if param_grads:
                grads[2 * k] = cache[k].T @ g
                grads[2 * k + 1] = g.sum(axis=0)
            g = g @ self.params[2 * k].T
        return grads, g

    def copy(self):
        twin = Mlp.__new__(Mlp)
        twin.layer_sizes = list(self.layer_sizes)
        twin.output = self.output
        twin.params = [p.copy() for p in self.params]
        return twin

    def soft_update(self, source, tau):
        """theta <- tau * theta_source + (1 - tau) * theta."""
        for p, q in zip(self.params, source.params):
            p *= 1.0 - tau
            p += tau * q


class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads):
        self.t += 1
        corr1 = 1.0 - self.beta1 ** self.t
        corr2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            _adam_kernel(p.reshape(-1), np.ascontiguousarray(g, dtype=np.float64).reshape(-1),
                         m.reshape(-1), v.reshape(-1), self.lr, self.beta1, self.beta2, self.eps, corr1, corr2)


@numba.njit(cache=True)
def _adam_kernel(p, g, m, v, lr, b1, b2, eps, corr1, corr2):
    for i in range(p.shape[0]):
        m[i] = b1 * m[i] + (1.0 - b1) * g[i]
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i]
        p[i] -= lr * (m[i] / corr1) / (np.sqrt(v[i] / corr2) + eps)
