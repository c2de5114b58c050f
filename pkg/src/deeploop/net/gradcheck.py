"""Central finite-difference checks of every analytic gradient.

Errors are reported as |analytic - numeric| / max(|analytic|, |numeric|, 1e-3),
so tiny gradients are judged on an absolute 1e-6 scale.  Entries whose
perturbation flips a ReLU mask or a max-pool winner sit on a kink where the
central difference is meaningless; those are skipped and counted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import layers, model

EPS = 1e-4
TOLERANCE = 1e-3


@dataclass
class CheckResult:
    name: str
    max_error: float
    checked: int
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return self.max_error <= TOLERANCE


def rel_error(a, n):
    a = np.asarray(a, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-3)


def numeric_gradient(f, arr, eps=EPS, signature=None):
    """Central differences of scalar ``f()`` w.r.t. every entry of ``arr`` (perturbed in place).

    With ``signature`` (a callable returning a hashable kink pattern), entries
    whose +/- perturbations change the pattern come back as NaN.
    """
    grad = np.empty(arr.shape)
    flat = arr.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f()
        sp = signature() if signature else None
        flat[i] = orig - eps
        fm = f()
        sm = signature() if signature else None
        flat[i] = orig
        grad.reshape(-1)[i] = np.nan if sp != sm else (fp - fm) / (2 * eps)
    return grad


def _compare(name, analytic, numeric):
    mask = ~np.isnan(numeric)
    err = rel_error(np.asarray(analytic)[mask], numeric[mask])
    return CheckResult(name, float(err.max()) if err.size else 0.0, int(mask.sum()), int((~mask).sum()))


def check_layers(seed: int) -> list[CheckResult]:
    """Per-layer checks on small random float64 tensors."""
    rng = np.random.default_rng(seed)
    out = []

    # convolution, with stride and padding
    x = rng.standard_normal((2, 2, 7, 6))
    w = rng.standard_normal((3, 2, 3, 3))
    b = rng.standard_normal(3)
    y, cache = layers.conv2d(x, w, b, stride=2, pad=1)
    r = rng.standard_normal(y.shape)
    dx, dw, db = layers.conv2d_backward(r, cache)

    def f():
        return float((layers.conv2d(x, w, b, 2, 1)[0] * r).sum())

    out += [_compare("conv2d.x", dx, numeric_gradient(f, x)),
            _compare("conv2d.w", dw, numeric_gradient(f, w)),
            _compare("conv2d.b", db, numeric_gradient(f, b))]

    # max pooling (odd extents exercise floor semantics)
    x = rng.standard_normal((2, 2, 5, 6))
    y, memo = layers.maxpool2x2(x)
    r = rng.standard_normal(y.shape)
    dx = layers.maxpool2x2_backward(r, memo)
    out.append(_compare("maxpool2x2", dx, numeric_gradient(
        lambda: float((layers.maxpool2x2(x)[0] * r).sum()), x,
        signature=lambda: layers.maxpool2x2(x)[1][1].tobytes())))

    # activations
    z = rng.standard_normal(20) * 3
    r = rng.standard_normal(20)
    out.append(_compare("relu", layers.relu_backward(r, z), numeric_gradient(
        lambda: float((layers.relu(z) * r).sum()), z, signature=lambda: (z > 0).tobytes())))
    s = layers.sigmoid(z)
    out.append(_compare("sigmoid", layers.sigmoid_backward(r, s), numeric_gradient(
        lambda: float((layers.sigmoid(z) * r).sum()), z)))

    # fully connected
    x = rng.standard_normal((3, 5))
    w = rng.standard_normal((4, 5))
    b = rng.standard_normal(4)
    r = rng.standard_normal((3, 4))
    dx, dw, db = layers.fully_connected_backward(r, x, w)

    def g():
        return float((layers.fully_connected(x, w, b) * r).sum())

    out += [_compare("fc.x", dx, numeric_gradient(g, x)),
            _compare("fc.w", dw, numeric_gradient(g, w)),
            _compare("fc.b", db, numeric_gradient(g, b))]

    # loss
    p = rng.random((3, 4))
    t = rng.random((3, 4))
    _, dp = layers.l2_loss(p, t)
    out.append(_compare("l2_loss", dp, numeric_gradient(lambda: layers.l2_loss(p, t)[0], p)))
    return out


def _kink_signature(params, config, x):
    def sig():
        _, cache = model.forward_train(params, config, x)
        parts = [(cache.pre[k] > 0).tobytes() for k in sorted(cache.pre)]
        parts += [cache.pool[k][1].tobytes() for k in sorted(cache.pool)]
        return b"|".join(parts)

    return sig


def check_network(seed: int, config: model.NetConfig | None = None, batch: int = 2) -> list[CheckResult]:
    """Every parameter of the full training stack, float64, on a shrunken geometry."""
    config = config or model.small_config()
    rng = np.random.default_rng(seed)
    params = model.init_params(config, seed, dtype=np.float64)
    for k in params:
        if k.endswith(".b"):
            params[k] = rng.uniform(-0.1, 0.1, params[k].shape)
    x = rng.random((batch, 1, config.in_height, config.in_width))
    t = rng.random((batch, config.out_dim))
    _, cache = model.forward_train(params, config, x)
    _, grads = model.backward_train(params, config, cache, t)

    def loss():
        return layers.l2_loss(model.forward_train(params, config, x)[0], t)[0]

    sig = _kink_signature(params, config, x)
    return [_compare(name, grads[name], numeric_gradient(loss, params[name], signature=sig)) for name in params]


def run_suite(seed: int = 1, trials: int = 20) -> tuple[float, list[CheckResult]]:
    """Layer and network checks over ``trials`` consecutive seeds; returns (max error, results)."""
    results = []
    for t in range(trials):
        s = seed * 1000 + t
        results += check_layers(s)
        results += check_network(s)
    return max(r.max_error for r in results), results
