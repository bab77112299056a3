"""Dual point-set encoders producing subset-space and superset-space embeddings.

Each of the two networks applies a shared per-point MLP, max-pools over
points, and maps the pooled feature through a small head.  Outputs are made
positive with softplus, offset by a small epsilon and scaled to unit norm.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .fuzzy import DualEmbedding
from .numeric import ad, container
from .numeric.autodiff import value

POINT_WIDTHS = (64, 128, 128)
HEAD_WIDTHS = (128,)
OUTPUT_EPS = 1e-8
CENTER_TOL = 1e-6
T_INIT = 0.1
NETS = ("f", "g")


class EncoderInputError(ValueError):
    pass


@dataclass
class EmbedConfig:
    dim: int = 16
    points: int = 1024
    nonneg: str = "softplus"
    seed: int = 0

    def validate(self):
        if self.dim < 2:
            raise ValueError("embedding dimension must be at least 2")
        if self.points < 8:
            raise ValueError("need at least 8 points per cloud")
        if self.nonneg not in ("softplus", "relu"):
            raise ValueError(f"nonneg must be 'softplus' or 'relu', got {self.nonneg!r}")


@dataclass
class EncoderParams:
    config: EmbedConfig
    arrays: dict = field(default_factory=dict)

    @property
    def t(self) -> float:
        return float(self.arrays["t"])

    def net(self, prefix: str) -> dict:
        return {k: v for k, v in self.arrays.items() if k.startswith(prefix + ".")}

    def copy(self) -> "EncoderParams":
        return EncoderParams(EmbedConfig(**asdict(self.config)),
                             {k: v.copy() for k, v in self.arrays.items()})


def layer_shapes(dim: int) -> list:
    widths = (3,) + POINT_WIDTHS + HEAD_WIDTHS + (dim,)
    return list(zip(widths[:-1], widths[1:]))


def init_params(config: EmbedConfig, rng_seed=None) -> EncoderParams:
    """He-uniform weights (limit ``sqrt(6 / fan_in)``), zero biases, ``t = 0.1``."""
    config.validate()
    rng = np.random.default_rng(config.seed if rng_seed is None else rng_seed)
    arrays = {}
    for net in NETS:
        for i, (fan_in, fan_out) in enumerate(layer_shapes(config.dim), start=1):
            limit = np.sqrt(6.0 / fan_in)
            arrays[f"{net}.w{i}"] = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            arrays[f"{net}.b{i}"] = np.zeros(fan_out)
    arrays["t"] = np.array(T_INIT)
    return EncoderParams(config, arrays)


def _nonneg(h, mode):
    if mode == "softplus":
        return ad.softplus(h)
    return ad.relu(h)


def encode_net(params, prefix: str, clouds, dim: int, nonneg: str = "softplus"):
    """Run one network on a ``(B, n, 3)`` stack; returns ``(B, dim)`` unit vectors.

    ``params`` maps names to arrays or tape tensors.
    """
    clouds = np.asarray(clouds, dtype=np.float64)
    b, n, _ = clouds.shape
    n_point = len(POINT_WIDTHS)
    n_layers = len(layer_shapes(dim))
    h = clouds.reshape(b * n, 3)
    for i in range(1, n_point + 1):
        h = ad.relu(ad.add(ad.matmul(h, params[f"{prefix}.w{i}"]), params[f"{prefix}.b{i}"]))
    h = ad.max_reduce(ad.reshape(h, (b, n, POINT_WIDTHS[-1])), axis=1)
    for i in range(n_point + 1, n_layers + 1):
        h = ad.add(ad.matmul(h, params[f"{prefix}.w{i}"]), params[f"{prefix}.b{i}"])
        if i < n_layers:
            h = ad.relu(h)
    h = ad.add(_nonneg(h, nonneg), OUTPUT_EPS)
    return ad.div(h, ad.l2_norm(h, axis=-1, keepdims=True))


def encode(params, clouds, config: EmbedConfig) -> DualEmbedding:
    """Both embeddings for a ``(B, n, 3)`` stack, differentiable when ``params`` are tensors."""
    return DualEmbedding(encode_net(params, "f", clouds, config.dim, config.nonneg),
                         encode_net(params, "g", clouds, config.dim, config.nonneg))


def _check_cloud(cloud, config: EmbedConfig):
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim != 2 or cloud.shape[1] != 3:
        raise EncoderInputError(f"expected an (n, 3) cloud, got shape {cloud.shape}")
    if cloud.shape[0] != config.points:
        raise EncoderInputError(f"expected {config.points} points, got {cloud.shape[0]}")
    center = 0.5 * (cloud.min(axis=0) + cloud.max(axis=0))
    if np.max(np.abs(center)) > CENTER_TOL:
        raise EncoderInputError(f"cloud is not centered (bbox center {center})")
    return cloud


def embed(params: EncoderParams, cloud) -> DualEmbedding:
    cloud = _check_cloud(cloud, params.config)
    e = encode(params.arrays, cloud[None], params.config)
    return DualEmbedding(value(e.f)[0], value(e.g)[0])


def embed_batch(params: EncoderParams, clouds) -> list:
    out = []
    for i, cloud in enumerate(clouds):
        try:
            out.append(embed(params, cloud))
        except EncoderInputError as err:
            raise EncoderInputError(f"item {i}: {err}") from err
    return out


def embed_stack(params: EncoderParams, clouds, chunk: int = 32) -> DualEmbedding:
    """Embed many clouds at once; returns stacked ``(M, D)`` arrays."""
    clouds = [_check_cloud(c, params.config) for c in clouds]
    fs, gs = [], []
    for lo in range(0, len(clouds), chunk):
        e = encode(params.arrays, np.stack(clouds[lo:lo + chunk]), params.config)
        fs.append(value(e.f))
        gs.append(value(e.g))
    d = params.config.dim
    if not fs:
        return DualEmbedding(np.zeros((0, d)), np.zeros((0, d)))
    return DualEmbedding(np.concatenate(fs), np.concatenate(gs))


# -- checkpoints -----------------------------------------------------------


def save_checkpoint(path, params: EncoderParams, adam=None, meta: dict | None = None) -> None:
    tensors = {f"param/{k}": v for k, v in params.arrays.items()}
    info = {"format": "dualfuzzy-checkpoint", "embed_config": asdict(params.config)}
    if adam is not None:
        for k in params.arrays:
            if k in adam.m:
                tensors[f"adam/m/{k}"] = adam.m[k]
                tensors[f"adam/v/{k}"] = adam.v[k]
        info["adam"] = {"step": adam.step, "lr": adam.lr, "decay_rate": adam.decay_rate,
                        "decay_steps": adam.decay_steps, "beta1": adam.beta1,
                        "beta2": adam.beta2, "eps": adam.eps}
    info.update(meta or {})
    container.save(path, tensors, info)


def load_checkpoint(path, expect: EmbedConfig | None = None):
    """Return ``(params, adam_state_or_None, meta)``; validates D and point count."""
    from .numeric.optim import AdamState

    tensors, meta = container.load(path)
    if meta.get("format") != "dualfuzzy-checkpoint":
        raise ValueError(f"{path}: not an encoder checkpoint")
    config = EmbedConfig(**meta["embed_config"])
    if expect is not None and (expect.dim != config.dim or expect.points != config.points):
        raise ValueError(f"{path}: checkpoint has D={config.dim}, points={config.points}; "
                         f"expected D={expect.dim}, points={expect.points}")
    arrays = {k[len("param/"):]: v for k, v in tensors.items() if k.startswith("param/")}
    expected = set(init_params(config).arrays)
    if set(arrays) != expected:
        raise ValueError(f"{path}: parameter names do not match the encoder layout")
    adam = None
    if "adam" in meta:
        a = meta["adam"]
        adam = AdamState(lr=a["lr"], decay_rate=a["decay_rate"], decay_steps=a["decay_steps"],
                         beta1=a["beta1"], beta2=a["beta2"], eps=a["eps"], step=a["step"])
        for k in arrays:
            if f"adam/m/{k}" in tensors:
                adam.m[k] = tensors[f"adam/m/{k}"]
                adam.v[k] = tensors[f"adam/v/{k}"]
    return EncoderParams(config, arrays), adam, meta
