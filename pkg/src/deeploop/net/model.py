"""The HOG-reconstructing convolutional autoencoder.

Training stack::

    conv1-relu-pool1 -> conv2-relu-pool2 -> conv3-relu -> flatten
        -> fc1-sigmoid -> fc2-sigmoid -> fc3-sigmoid

Deployment keeps only the three convolutions; the flattened conv3 activation
is the place descriptor.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import InvalidDescriptorError, ShapeError
from ..image import GrayImage
from . import layers

DESCRIPTOR_DIM = 1064


@dataclass(frozen=True)
class ConvSpec:
    channels: int
    kernel: int
    stride: int = 1
    pad: int = 0


@dataclass(frozen=True)
class NetConfig:
    in_height: int = 120
    in_width: int = 160
    conv1: ConvSpec = ConvSpec(16, 5, 2, 2)
    conv2: ConvSpec = ConvSpec(32, 5, 1, 2)
    conv3: ConvSpec = ConvSpec(4, 2, 1, 0)
    fc: tuple[int, int] = (2048, 3072)
    out_dim: int = 2520

    def __post_init__(self):
        self.shapes()  # validates geometry

    def shapes(self) -> dict[str, tuple[int, ...]]:
        """Activation shape (per item) after each stage."""
        h, w = self.in_height, self.in_width
        out = {}
        c = 1
        for name, spec, pooled in (("conv1", self.conv1, True), ("conv2", self.conv2, True), ("conv3", self.conv3, False)):
            h = layers.conv_output_size(h, spec.kernel, spec.stride, spec.pad)
            w = layers.conv_output_size(w, spec.kernel, spec.stride, spec.pad)
            c = spec.channels
            if h < 1 or w < 1:
                raise ShapeError(f"{name} output is empty for input {self.in_height}x{self.in_width}")
            out[name] = (c, h, w)
            if pooled:
                h, w = h // 2, w // 2
                if h < 1 or w < 1:
                    raise ShapeError(f"pool after {name} yields an empty map")
                out["pool" + name[-1]] = (c, h, w)
        out["flatten"] = (c * h * w,)
        out["fc1"] = (self.fc[0],)
        out["fc2"] = (self.fc[1],)
        out["fc3"] = (self.out_dim,)
        return out

    @property
    def descriptor_dim(self) -> int:
        return self.shapes()["flatten"][0]

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        s = {}
        cin = 1
        for name in ("conv1", "conv2", "conv3"):
            spec = getattr(self, name)
            s[name + ".w"] = (spec.channels, cin, spec.kernel, spec.kernel)
            s[name + ".b"] = (spec.channels,)
            cin = spec.channels
        widths = [self.descriptor_dim, *self.fc, self.out_dim]
        for i in range(3):
            s[f"fc{i + 1}.w"] = (widths[i + 1], widths[i])
            s[f"fc{i + 1}.b"] = (widths[i + 1],)
        return s

    def to_ints(self) -> list[int]:
        vals = [self.in_height, self.in_width]
        for spec in (self.conv1, self.conv2, self.conv3):
            vals += [spec.channels, spec.kernel, spec.stride, spec.pad]
        return vals + list(self.fc) + [self.out_dim]

    @classmethod
    def from_ints(cls, vals) -> NetConfig:
        v = [int(x) for x in vals]
        if len(v) != 17:
            raise ShapeError(f"config block needs 17 values, got {len(v)}")
        return cls(v[0], v[1], ConvSpec(*v[2:6]), ConvSpec(*v[6:10]), ConvSpec(*v[10:14]), (v[14], v[15]), v[16])

    def as_dict(self) -> dict:
        return asdict(self)


def small_config(out_dim: int = 5) -> NetConfig:
    """Shrunken geometry used for finite-difference checks (1x12x16 input)."""
    return NetConfig(12, 16, ConvSpec(2, 3, 1, 1), ConvSpec(2, 3, 1, 1), ConvSpec(1, 2, 1, 0), (8, 8), out_dim)


def init_params(config: NetConfig, seed: int = 0, dtype=np.float32) -> dict[str, np.ndarray]:
    """Fan-in scaled uniform weights (bound sqrt(6 / fan_in)), zero biases."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in config.param_shapes().items():
        if name.endswith(".b"):
            params[name] = np.zeros(shape, dtype=dtype)
        else:
            fan_in = int(np.prod(shape[1:]))
            bound = np.sqrt(6.0 / fan_in)
            params[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
    return params


def _check_params(params, config):
    for name, shape in config.param_shapes().items():
        if name not in params or params[name].shape != shape:
            got = None if name not in params else params[name].shape
            raise ShapeError(f"parameter {name}: expected {shape}, got {got}")


@dataclass
class Cache:
    x: np.ndarray
    conv: dict = field(default_factory=dict)
    pre: dict = field(default_factory=dict)
    pool: dict = field(default_factory=dict)
    act: dict = field(default_factory=dict)
    token: tuple = ()


def _param_token(params):
    return tuple(params[k] for k in sorted(params))


def _is_stale(cache, params):
    cur = _param_token(params)
    return len(cur) != len(cache.token) or any(a is not b for a, b in zip(cur, cache.token))


def encode(params, config: NetConfig, x, cache: Cache | None = None):
    """Convolutional stack on a (N, 1, H, W) batch; returns post-ReLU conv3 (N, C, h, w)."""
    h = x
    for name in ("conv1", "conv2", "conv3"):
        spec = getattr(config, name)
        z, ccache = layers.conv2d(h, params[name + ".w"], params[name + ".b"], spec.stride, spec.pad)
        h = layers.relu(z)
        if cache is not None:
            cache.conv[name] = ccache
            cache.pre[name] = z
        if name != "conv3":
            h, memo = layers.maxpool2x2(h)
            if cache is not None:
                cache.pool[name] = memo
    return h


def _prep_input(x1, config, dtype):
    x = np.asarray(x1, dtype=dtype)
    if x.ndim == 3:
        x = x[:, None]
    if x.shape[1:] != (1, config.in_height, config.in_width):
        raise ShapeError(f"input batch must be N x 1 x {config.in_height} x {config.in_width}, got {x.shape}")
    return x


def forward_train(params, config: NetConfig, x1):
    """Full training forward.  Returns (reconstruction N x D, cache)."""
    _check_params(params, config)
    dtype = params["fc1.w"].dtype
    x = _prep_input(x1, config, dtype)
    cache = Cache(x=x, token=_param_token(params))
    h = encode(params, config, x, cache).reshape(x.shape[0], -1)
    cache.act["flatten"] = h
    for i in (1, 2, 3):
        z = layers.fully_connected(h, params[f"fc{i}.w"], params[f"fc{i}.b"])
        h = layers.sigmoid(z)
        cache.act[f"fc{i}"] = h
    return h, cache


def backward_train(params, config: NetConfig, cache: Cache, x2):
    """Loss and exact gradients of the l2 reconstruction loss for every parameter."""
    if _is_stale(cache, params):
        raise ShapeError("stale cache: parameters changed since the forward pass")
    pred = cache.act["fc3"]
    loss, d = layers.l2_loss(pred, np.asarray(x2, dtype=pred.dtype))
    grads = {}
    for i in (3, 2, 1):
        d = layers.sigmoid_backward(d, cache.act[f"fc{i}"])
        x_in = cache.act["flatten"] if i == 1 else cache.act[f"fc{i - 1}"]
        d, grads[f"fc{i}.w"], grads[f"fc{i}.b"] = layers.fully_connected_backward(d, x_in, params[f"fc{i}.w"])
    d = d.reshape(cache.pre["conv3"].shape)
    for name in ("conv3", "conv2", "conv1"):
        if name != "conv3":
            d = layers.maxpool2x2_backward(d, cache.pool[name])
        d = layers.relu_backward(d, cache.pre[name])
        d, grads[name + ".w"], grads[name + ".b"] = layers.conv2d_backward(d, cache.conv[name], need_dx=name != "conv1")
    return loss, grads


def encode_image(params, config: NetConfig, img) -> np.ndarray:
    """Un-normalized flattened conv3 activation for one image (or 2-D [0,1] array)."""
    _check_params(params, config)
    dtype = params["conv1.w"].dtype
    if isinstance(img, GrayImage):
        x = (img.data.astype(dtype) / dtype.type(255.0))
    else:
        x = np.asarray(img, dtype=dtype)
    x = _prep_input(x[None], config, dtype)
    return encode(params, config, x).reshape(-1)


def extract_descriptor(params, config: NetConfig, img) -> np.ndarray:
    """L2-normalized float32 descriptor (length ``config.descriptor_dim``)."""
    v = encode_image(params, config, img).astype(np.float64)
    n = np.sqrt(v @ v)
    if not n > 0:
        raise InvalidDescriptorError("all-zero descriptor activation")
    return (v / n).astype(np.float32)
