"""
The composed network:

    embedding -> batchnorm -> BiLSTM (sigmoid output, dropout)
              -> BiLSTM (tanh output, no dropout) -> attention
              -> concat(context, standardized features) -> softmax

``ModelState`` holds every learned array by name plus non-learned buffers
(batch-norm running statistics, feature standardization).
"""
import copy
from dataclasses import asdict, dataclass, fields

import numpy as np

from ..exceptions import CacheMismatch
from . import layers
from .init import glorot_uniform, orthogonal, uniform


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    seq_len: int = 50
    d_emb: int = 128
    h1: int = 128
    h2: int = 64
    n_feat: int = 10
    n_classes: int = 4
    dropout: float = 0.4
    recurrent_dropout: float = 0.4
    l2_attn_W: float = 1e-4
    l2_attn_b: float = 1e-4
    bn_momentum: float = 0.99
    bn_eps: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        for name in ("vocab_size", "seq_len", "d_emb", "h1", "h2", "n_classes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_feat < 0:
            raise ValueError("n_feat must be >= 0")
        for name in ("dropout", "recurrent_dropout"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must be in [0, 1)")

    @property
    def d_attn(self):
        return 2 * self.h2

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def _lstm_shapes(prefix, d_in, H):
    for g in layers.GATES:
        yield f"{prefix}.W_{g}", (d_in, H)
        yield f"{prefix}.U_{g}", (H, H)
        yield f"{prefix}.b_{g}", (H,)


def param_shapes(config):
    """Ordered mapping of parameter name -> shape."""
    c = config
    shapes = {"E": (c.vocab_size, c.d_emb), "bn.gamma": (c.d_emb,), "bn.beta": (c.d_emb,)}
    for direction in ("fwd", "bwd"):
        shapes.update(_lstm_shapes(f"lstm1.{direction}", c.d_emb, c.h1))
    for direction in ("fwd", "bwd"):
        shapes.update(_lstm_shapes(f"lstm2.{direction}", 2 * c.h1, c.h2))
    D = c.d_attn
    shapes.update({
        "attn.W_a": (D, D), "attn.b_a": (D,), "attn.u_a": (D,),
        "out.W": (D + c.n_feat, c.n_classes), "out.b": (c.n_classes,),
    })
    return shapes


@dataclass
class ModelState:
    config: ModelConfig
    params: dict
    buffers: dict

    def copy(self):
        return ModelState(self.config, copy.deepcopy(self.params), copy.deepcopy(self.buffers))

    def n_params(self):
        return sum(p.size for p in self.params.values())


def init_state(config, rng):
    """Initialize parameters.

    Embeddings are uniform in +-0.05; input kernels, attention and output
    weights are glorot-uniform; recurrent kernels are orthogonal; the
    forget-gate bias starts at 1 and all other biases at 0.
    """
    params = {}
    for name, shape in param_shapes(config).items():
        leaf = name.rsplit(".", 1)[-1]
        if name == "E":
            params[name] = uniform(shape, rng)
        elif name == "bn.gamma":
            params[name] = np.ones(shape)
        elif leaf.startswith("W_") or name in ("attn.W_a", "out.W"):
            params[name] = glorot_uniform(shape, rng)
        elif leaf.startswith("U_"):
            params[name] = orthogonal(shape, rng)
        elif leaf == "b_f":
            params[name] = np.ones(shape)
        elif name == "attn.u_a":
            params[name] = glorot_uniform((shape[0], 1), rng)[:, 0]
        else:
            params[name] = np.zeros(shape)
    buffers = {
        "bn.running_mean": np.zeros(config.d_emb),
        "bn.running_var": np.ones(config.d_emb),
        "feat.mean": np.zeros(config.n_feat),
        "feat.std": np.ones(config.n_feat),
    }
    return ModelState(config, params, buffers)


def zero_state(config):
    """A state whose parameters are all zero (buffers at their defaults)."""
    state = init_state(config, np.random.default_rng(0))
    for p in state.params.values():
        p[...] = 0.0
    return state


class ForwardCache:
    __slots__ = ("config", "batch_shape", "indices", "emb", "bn", "lstm1", "lstm2",
                 "attn", "head_input", "alpha", "probs")


def effective_lengths(lengths):
    # empty tweets still attend to their leading PAD position
    return np.maximum(np.asarray(lengths, dtype=np.int64), 1)


def model_forward(state, indices, lengths, feats, mode="infer", rng=None):
    """Run the network on a batch.

    Parameters
    ----------
    state : ModelState
    indices : int array (B, L)
    lengths : int array (B,)
        True token counts; zero-length rows attend to position 0.
    feats : array (B, n_feat)
        Raw manual features; standardized here with the state's buffers.
    mode : {"train", "infer"}
        Train mode uses batch statistics (and updates the running ones in
        place) and draws dropout masks from ``rng``.

    Returns
    -------
    probs : array (B, n_classes)
    cache : ForwardCache
    """
    cfg, p, buf = state.config, state.params, state.buffers
    if mode == "train" and rng is None and (cfg.dropout > 0 or cfg.recurrent_dropout > 0):
        raise ValueError("train mode with dropout requires an rng")
    indices = np.asarray(indices)
    B, L = indices.shape
    lengths = effective_lengths(lengths)
    cache = ForwardCache()
    cache.config = cfg
    cache.batch_shape = (B, L)
    cache.indices = indices

    x = layers.embedding_forward(indices, p["E"])
    x, cache.bn = layers.batchnorm_forward(
        x, p["bn.gamma"], p["bn.beta"], buf["bn.running_mean"], buf["bn.running_var"],
        mode, cfg.bn_momentum, cfg.bn_eps)
    x, cache.lstm1 = layers.bilstm_forward(
        x, lengths, p, "lstm1", "sigmoid", cfg.dropout, cfg.recurrent_dropout, rng, mode)
    x, cache.lstm2 = layers.bilstm_forward(x, lengths, p, "lstm2", "tanh", mode=mode)
    mask = layers.length_mask(lengths, L)
    context, cache.alpha, cache.attn = layers.attention_forward(
        x, p["attn.W_a"], p["attn.b_a"], p["attn.u_a"], mask)
    f = (np.asarray(feats, dtype=np.float64).reshape(B, cfg.n_feat) - buf["feat.mean"]) / buf["feat.std"]
    probs, cache.head_input = layers.output_head_forward(context, f, p["out.W"], p["out.b"])
    cache.probs = probs
    return probs, cache


def regularization(state):
    p, c = state.params, state.config
    return layers.l2_penalty(p["attn.W_a"], p["attn.b_a"], c.l2_attn_W, c.l2_attn_b)


def model_backward(cache, grad_z, state):
    """Reverse-mode gradients of every parameter, L2 attention terms included."""
    if not isinstance(cache, ForwardCache) or cache.config != state.config:
        raise CacheMismatch("cache was not produced by a forward pass with this config")
    grad_z = np.asarray(grad_z, dtype=np.float64)
    if grad_z.shape != (cache.batch_shape[0], state.config.n_classes):
        raise CacheMismatch(f"grad_z shape {grad_z.shape} does not match the cached batch")
    cfg, p = state.config, state.params
    grads = {}
    dctx, grads["out.W"], grads["out.b"] = layers.output_head_backward(
        grad_z, cache.head_input, p["out.W"], cfg.d_attn)
    dx, dW_a, db_a, grads["attn.u_a"] = layers.attention_backward(dctx, cache.attn)
    grads["attn.W_a"] = dW_a + 2.0 * cfg.l2_attn_W * p["attn.W_a"]
    grads["attn.b_a"] = db_a + 2.0 * cfg.l2_attn_b * p["attn.b_a"]
    dx, g2 = layers.bilstm_backward(dx, cache.lstm2)
    dx, g1 = layers.bilstm_backward(dx, cache.lstm1)
    grads.update(g1)
    grads.update(g2)
    dx, grads["bn.gamma"], grads["bn.beta"] = layers.batchnorm_backward(dx, cache.bn)
    grads["E"] = layers.embedding_backward(cache.indices, dx, cfg.vocab_size)
    return {name: grads[name] for name in p}


def loss_and_grads(state, indices, lengths, feats, gold, class_weights, mode="train", rng=None):
    """Total loss (weighted cross-entropy + attention L2) and its gradients."""
    probs, cache = model_forward(state, indices, lengths, feats, mode, rng)
    ce, grad_z = layers.weighted_crossentropy(probs, gold, class_weights)
    grads = model_backward(cache, grad_z, state)
    return ce + regularization(state), grads, probs
