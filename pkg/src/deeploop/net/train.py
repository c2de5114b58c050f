"""SGD with momentum and weight decay, and the epoch training loop."""
from __future__ import annotations

import logging
from typing import Callable

import numpy as np

from ..errors import ShapeError
from . import model

log = logging.getLogger(__name__)

LEARNING_RATE = 9e-4
MOMENTUM = 0.9
WEIGHT_DECAY = 5e-4
EPOCHS = 42


def zero_velocity(params):
    return {k: np.zeros_like(v) for k, v in params.items()}


def sgd_step(params, grads, velocity, lr=LEARNING_RATE, momentum=MOMENTUM, weight_decay=WEIGHT_DECAY):
    """One momentum step; returns new (params, velocity) dicts.

    v <- momentum * v + grad + weight_decay * param  (no decay on biases)
    param <- param - lr * v
    """
    new_p, new_v = {}, {}
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(f"gradient {name} has shape {g.shape}, parameter {p.shape}")
        dt = p.dtype.type
        v = dt(momentum) * velocity[name] + g
        if not name.endswith(".b") and weight_decay:
            v = v + dt(weight_decay) * p
        new_v[name] = v
        new_p[name] = p - dt(lr) * v
    return new_p, new_v


def train(dataset, config: model.NetConfig, epochs: int = EPOCHS, seed: int = 0, *,
          batch_size: int = 32, lr: float = LEARNING_RATE, momentum: float = MOMENTUM,
          weight_decay: float = WEIGHT_DECAY, params=None,
          on_epoch: Callable[[int, float], None] | None = None):
    """Epoch-shuffled minibatch SGD.  Returns (params, per-epoch mean loss list)."""
    from ..datagen import BatchSampler

    if dataset.dim != config.out_dim:
        raise ShapeError(f"dataset target length {dataset.dim} != network output {config.out_dim}")
    if params is None:
        params = model.init_params(config, seed)
    velocity = zero_velocity(params)
    sampler = BatchSampler(dataset, batch_size, np.random.default_rng([seed, 1]))
    history = []
    for epoch in range(epochs):
        total, count = 0.0, 0
        for idx, x1, x2 in sampler.epoch():
            _, cache = model.forward_train(params, config, x1)
            loss, grads = model.backward_train(params, config, cache, x2)
            params, velocity = sgd_step(params, grads, velocity, lr, momentum, weight_decay)
            total += loss * len(idx)
            count += len(idx)
        mean = total / count
        if not np.isfinite(mean):
            raise FloatingPointError(f"loss diverged at epoch {epoch}")
        history.append(mean)
        log.info("epoch %d mean loss %.6f", epoch, mean)
        if on_epoch is not None:
            on_epoch(epoch, mean)
    return params, history


def write_loss_log(history, path) -> None:
    with open(path, "w") as fh:
        fh.write("epoch,mean_loss\n")
        for i, v in enumerate(history):
            fh.write(f"{i},{v:.9g}\n")
