"""Minimal numpy network: layers, the autoencoder, training and the model file."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    DESCRIPTOR_DIM,
    ConvSpec,
    NetConfig,
    backward_train,
    encode_image,
    extract_descriptor,
    forward_train,
    init_params,
    small_config,
)
from .serialize import load_model, save_model
from .train import sgd_step, train, zero_velocity

__all__ = [
    "DESCRIPTOR_DIM",
    "ConvSpec",
    "Model",
    "NetConfig",
    "backward_train",
    "encode_image",
    "extract_descriptor",
    "forward_train",
    "init_params",
    "load_model",
    "save_model",
    "sgd_step",
    "small_config",
    "train",
    "zero_velocity",
]


@dataclass
class Model:
    """Parameters bundled with their configuration."""

    params: dict
    config: NetConfig

    @classmethod
    def load(cls, path) -> Model:
        return cls(*load_model(path))

    @classmethod
    def random(cls, config: NetConfig | None = None, seed: int = 0) -> Model:
        config = config or NetConfig()
        return cls(init_params(config, seed), config)

    def save(self, path) -> None:
        save_model(self.params, self.config, path)

    def describe(self, img) -> np.ndarray:
        return extract_descriptor(self.params, self.config, img)

    @property
    def descriptor_dim(self) -> int:
        return self.config.descriptor_dim
