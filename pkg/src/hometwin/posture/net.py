"""A small convolutional network implemented directly on numpy.

The input is a 20-frame residual stack treated as channels over an r x r
grid.  Every convolutional layer is followed by batch normalization, ReLU,
(max pooling at 32x32) and dropout; fully-connected layers finish with a
softmax over the five posture classes.

Training mode uses batch statistics and inverted dropout; inference mode uses
running statistics with dropout off, so repeated inference on the same input
is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import PostureLabel
from ..errors import DimensionError

BN_MOMENTUM = 0.9
BN_EPS = 1e-5


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # conv | bn | relu | pool | dropout | flatten | fc
    out: int = 0  # conv filters or fc width
    kernel: int = 3
    pad: int = 0


@dataclass(frozen=True)
class NetworkConfig:
    resolution: int
    layers: tuple[LayerSpec, ...]
    in_channels: int = 20
    n_classes: int = 5
    dropout_rate: float = 0.25

    def to_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "in_channels": self.in_channels,
            "n_classes": self.n_classes,
            "dropout_rate": self.dropout_rate,
            "layers": [
                {"kind": s.kind, "out": s.out, "kernel": s.kernel, "pad": s.pad}
                for s in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        return cls(
            resolution=int(data["resolution"]),
            in_channels=int(data["in_channels"]),
            n_classes=int(data["n_classes"]),
            dropout_rate=float(data["dropout_rate"]),
            layers=tuple(
                LayerSpec(s["kind"], int(s["out"]), int(s["kernel"]), int(s["pad"]))
                for s in data["layers"]
            ),
        )


def config_for_resolution(resolution: int, dropout_rate: float = 0.25) -> NetworkConfig:
    if resolution == 32:
        layers = (
            LayerSpec("conv", 16, 3, 0), LayerSpec("bn"), LayerSpec("relu"),
            LayerSpec("pool"), LayerSpec("dropout"),
            LayerSpec("conv", 32, 3, 0), LayerSpec("bn"), LayerSpec("relu"),
            LayerSpec("pool"), LayerSpec("dropout"),
            LayerSpec("conv", 64, 3, 0), LayerSpec("bn"), LayerSpec("relu"),
            LayerSpec("pool"), LayerSpec("dropout"),
            LayerSpec("flatten"),
            LayerSpec("fc", 128), LayerSpec("relu"),
            LayerSpec("fc", 5),
        )
    elif resolution == 4:
        layers = (
            LayerSpec("conv", 16, 3, 1), LayerSpec("bn"), LayerSpec("relu"),
            LayerSpec("dropout"),
            LayerSpec("flatten"),
            LayerSpec("fc", 64),
            LayerSpec("fc", 5),
        )
    else:
        raise DimensionError(f"no default architecture for resolution {resolution}")
    return NetworkConfig(resolution=resolution, layers=layers, dropout_rate=dropout_rate)


def toy_config() -> NetworkConfig:
    """A one-conv-layer net small enough for exhaustive gradient checking."""
    return NetworkConfig(
        resolution=4,
        layers=(
            LayerSpec("conv", 2, 3, 1), LayerSpec("bn"), LayerSpec("relu"),
            LayerSpec("flatten"), LayerSpec("fc", 5),
        ),
        dropout_rate=0.0,
    )


# ---------------------------------------------------------------------------
# modules


def _im2col(x: np.ndarray, k: int, pad: int) -> tuple[np.ndarray, tuple[int, int]]:
    """Patches as (n, c*k*k, ho*wo), assembled from k*k contiguous slices."""
    n, c, h, w = x.shape
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    ho, wo = h + 2 * pad - k + 1, w + 2 * pad - k + 1
    cols = np.empty((n, c, k, k, ho, wo), dtype=x.dtype)
    for i in range(k):
        for j in range(k):
            cols[:, :, i, j] = x[:, :, i : i + ho, j : j + wo]
    return cols.reshape(n, c * k * k, ho * wo), (ho, wo)


def _col2im(dcols: np.ndarray, x_shape, k: int, pad: int, ho: int, wo: int) -> np.ndarray:
    """Scatter patch gradients (n, c*k*k, ho*wo) back onto the input."""
    n, c, h, w = x_shape
    hp, wp = h + 2 * pad, w + 2 * pad
    dx = np.zeros((n, c, hp, wp), dtype=dcols.dtype)
    dcols = dcols.reshape(n, c, k, k, ho, wo)
    for i in range(k):
        for j in range(k):
            dx[:, :, i : i + ho, j : j + wo] += dcols[:, :, i, j]
    if pad:
        dx = dx[:, :, pad:-pad, pad:-pad]
    return dx


class _Conv:
    def __init__(self, spec: LayerSpec, in_ch: int, rng, dtype):
        k = spec.kernel
        fan_in = in_ch * k * k
        self.w = (rng.standard_normal((spec.out, in_ch, k, k)) * np.sqrt(2.0 / fan_in)).astype(dtype)
        self.b = np.zeros(spec.out, dtype=dtype)
        self.k, self.pad = k, spec.pad
        self.dw = None
        self.db = None
        self._cache = None

    def params(self):
        return [("w", self.w), ("b", self.b)]

    def grads(self):
        return [("w", self.dw), ("b", self.db)]

    def forward(self, x, train, rng):
        cols, (ho, wo) = _im2col(x, self.k, self.pad)
        wmat = self.w.reshape(self.w.shape[0], -1)
        out = np.matmul(wmat[None], cols)  # (n, out, ho*wo)
        out += self.b[None, :, None]
        self._cache = (cols, x.shape, (ho, wo))
        return out.reshape(x.shape[0], -1, ho, wo)

    def backward(self, dout):
        cols, x_shape, (ho, wo) = self._cache
        n, o = dout.shape[0], dout.shape[1]
        f = self.w.size // o
        dmat = dout.reshape(n, o, ho * wo)
        self.dw = np.matmul(dmat, cols.transpose(0, 2, 1)).sum(axis=0).reshape(self.w.shape)
        self.db = dmat.sum(axis=(0, 2))
        # one big GEMM for the patch gradient: (f, o) @ (o, n*l)
        dflat = np.ascontiguousarray(dmat.transpose(1, 0, 2)).reshape(o, -1)
        dcols = (self.w.reshape(o, f).T @ dflat).reshape(f, n, ho * wo).transpose(1, 0, 2)
        return _col2im(np.ascontiguousarray(dcols), x_shape, self.k, self.pad, ho, wo)


class _BatchNorm:
    def __init__(self, channels: int, dtype):
        self.gamma = np.ones(channels, dtype=dtype)
        self.beta = np.zeros(channels, dtype=dtype)
        self.running_mean = np.zeros(channels, dtype=np.float64)
        self.running_var = np.ones(channels, dtype=np.float64)
        self.dgamma = None
        self.dbeta = None
        self._cache = None
        self.update_stats = True

    def params(self):
        return [("gamma", self.gamma), ("beta", self.beta)]

    def grads(self):
        return [("gamma", self.dgamma), ("beta", self.dbeta)]

    def buffers(self):
        return [("running_mean", self.running_mean), ("running_var", self.running_var)]

    @staticmethod
    def _axes(x):
        return (0, 2, 3) if x.ndim == 4 else (0,)

    def _shape(self, x):
        return (1, -1, 1, 1) if x.ndim == 4 else (1, -1)

    def forward(self, x, train, rng):
        shape = self._shape(x)
        if train:
            axes = self._axes(x)
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            inv = 1.0 / np.sqrt(var + BN_EPS)
            xhat = (x - mean.reshape(shape)) * inv.reshape(shape)
            if self.update_stats:
                self.running_mean = BN_MOMENTUM * self.running_mean + (1 - BN_MOMENTUM) * mean
                self.running_var = BN_MOMENTUM * self.running_var + (1 - BN_MOMENTUM) * var
            self._cache = (xhat, inv, axes, shape)
            return self.gamma.reshape(shape) * xhat + self.beta.reshape(shape)
        inv = 1.0 / np.sqrt(self.running_var + BN_EPS)
        xhat = (x - self.running_mean.reshape(shape)) * inv.reshape(shape)
        return (self.gamma.reshape(shape) * xhat + self.beta.reshape(shape)).astype(x.dtype)

    def backward(self, dout):
        xhat, inv, axes, shape = self._cache
        m = dout.size // dout.shape[1]
        self.dgamma = (dout * xhat).sum(axis=axes)
        self.dbeta = dout.sum(axis=axes)
        dxhat = dout * self.gamma.reshape(shape)
        dx = (
            dxhat
            - dxhat.mean(axis=axes).reshape(shape)
            - xhat * (dxhat * xhat).mean(axis=axes).reshape(shape)
        ) * inv.reshape(shape)
        return dx


class _ReLU:
    def __init__(self):
        self._mask = None

    def forward(self, x, train, rng):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dout):
        return dout * self._mask


class _MaxPool2:
    """2x2 max pooling, stride 2, floor semantics (odd edges dropped)."""

    def __init__(self):
        self._cache = None

    def forward(self, x, train, rng):
        n, c, h, w = x.shape
        h2, w2 = h // 2, w // 2
        x = x[:, :, : h2 * 2, : w2 * 2]
        tiles = x.reshape(n, c, h2, 2, w2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h2, w2, 4)
        arg = tiles.argmax(axis=-1)
        out = np.take_along_axis(tiles, arg[..., None], axis=-1)[..., 0]
        self._cache = (arg, (n, c, h, w), (h2, w2))
        return out

    def backward(self, dout):
        arg, (n, c, h, w), (h2, w2) = self._cache
        dtiles = np.zeros((n, c, h2, w2, 4), dtype=dout.dtype)
        np.put_along_axis(dtiles, arg[..., None], dout[..., None], axis=-1)
        dx = np.zeros((n, c, h, w), dtype=dout.dtype)
        dx[:, :, : h2 * 2, : w2 * 2] = (
            dtiles.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h2 * 2, w2 * 2)
        )
        return dx


class _Dropout:
    """Inverted dropout; rate >= 1 blanks every activation (degenerate but defined)."""

    def __init__(self, rate: float):
        self.rate = rate
        self._mask = None

    def forward(self, x, train, rng):
        if not train or self.rate <= 0.0:
            self._mask = None
            return x
        if self.rate >= 1.0:
            self._mask = np.zeros_like(x)
            return x * self._mask
        keep = (rng.random(x.shape) >= self.rate).astype(x.dtype)
        self._mask = keep / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask


class _Flatten:
    def __init__(self):
        self._shape = None

    def forward(self, x, train, rng):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


class _Dense:
    def __init__(self, in_dim: int, out_dim: int, rng, dtype):
        self.w = (rng.standard_normal((out_dim, in_dim)) * np.sqrt(2.0 / in_dim)).astype(dtype)
        self.b = np.zeros(out_dim, dtype=dtype)
        self.dw = None
        self.db = None
        self._x = None

    def params(self):
        return [("w", self.w), ("b", self.b)]

    def grads(self):
        return [("w", self.dw), ("b", self.db)]

    def forward(self, x, train, rng):
        self._x = x
        return x @ self.w.T + self.b

    def backward(self, dout):
        self.dw = dout.T @ self._x
        self.db = dout.sum(axis=0)
        return dout @ self.w


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy loss and its gradient w.r.t. the logits."""
    probs = softmax(logits)
    n = logits.shape[0]
    loss = -float(np.log(np.maximum(probs[np.arange(n), labels], 1e-300)).mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    return loss, dlogits / n


@dataclass
class PosturePrediction:
    label: PostureLabel
    probabilities: np.ndarray  # 5-vector, sums to 1


class PostureNet:
    def __init__(self, config: NetworkConfig, seed: int = 0, dtype=np.float32):
        self.config = config
        self.dtype = dtype
        rng = np.random.default_rng(seed)
        self.modules = []
        ch = config.in_channels
        side = config.resolution
        dim = None
        for spec in config.layers:
            if spec.kind == "conv":
                self.modules.append(_Conv(spec, ch, rng, dtype))
                ch = spec.out
                side = side + 2 * spec.pad - spec.kernel + 1
            elif spec.kind == "bn":
                self.modules.append(_BatchNorm(ch, dtype))
            elif spec.kind == "relu":
                self.modules.append(_ReLU())
            elif spec.kind == "pool":
                self.modules.append(_MaxPool2())
                side //= 2
            elif spec.kind == "dropout":
                self.modules.append(_Dropout(config.dropout_rate))
            elif spec.kind == "flatten":
                self.modules.append(_Flatten())
                dim = ch * side * side
            elif spec.kind == "fc":
                if dim is None:
                    raise DimensionError("fc layer before flatten")
                self.modules.append(_Dense(dim, spec.out, rng, dtype))
                dim = spec.out
            else:
                raise DimensionError(f"unknown layer kind {spec.kind!r}")

    # -- parameter plumbing ------------------------------------------------

    def named_params(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, m in enumerate(self.modules):
            if hasattr(m, "params"):
                out.extend((f"m{i}.{name}", arr) for name, arr in m.params())
        return out

    def named_grads(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, m in enumerate(self.modules):
            if hasattr(m, "grads"):
                out.extend((f"m{i}.{name}", arr) for name, arr in m.grads())
        return out

    def named_buffers(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, m in enumerate(self.modules):
            if hasattr(m, "buffers"):
                out.extend((f"m{i}.{name}", arr) for name, arr in m.buffers())
        return out

    def state_dict(self) -> dict[str, np.ndarray]:
        state = {name: arr.copy() for name, arr in self.named_params()}
        state.update({name: arr.copy() for name, arr in self.named_buffers()})
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for name, arr in self.named_params():
            arr[...] = state[name]
        for i, m in enumerate(self.modules):
            if hasattr(m, "buffers"):
                m.running_mean = state[f"m{i}.running_mean"].copy()
                m.running_var = state[f"m{i}.running_var"].copy()

    def set_update_stats(self, flag: bool) -> None:
        for m in self.modules:
            if isinstance(m, _BatchNorm):
                m.update_stats = flag

    # -- computation ---------------------------------------------------------

    def _check_input(self, x: np.ndarray) -> None:
        want = (self.config.in_channels, self.config.resolution, self.config.resolution)
        if x.ndim != 4 or x.shape[1:] != want:
            raise DimensionError(f"expected input [n, {want[0]}, {want[1]}, {want[2]}], got {x.shape}")

    def forward(self, x: np.ndarray, train: bool, rng: np.random.Generator | None = None) -> np.ndarray:
        self._check_input(x)
        out = np.ascontiguousarray(x, dtype=self.dtype)
        for m in self.modules:
            out = m.forward(out, train, rng)
        return out

    def backward(self, dlogits: np.ndarray) -> np.ndarray:
        dout = dlogits.astype(self.dtype)
        for m in reversed(self.modules):
            dout = m.backward(dout)
        return dout

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Inference-mode class probabilities (deterministic)."""
        return softmax(self.forward(x, train=False))

    def predict(self, x: np.ndarray) -> list[PosturePrediction]:
        probs = self.predict_proba(x)
        out = []
        for row in probs:
            label = PostureLabel(int(np.argmax(row)))  # ties: lowest enum wins
            out.append(PosturePrediction(label, row))
        return out
