"""
Forward and backward passes for every layer of the classifier.

Conventions: activations are row vectors, so a dense map is ``x @ W`` with
``W`` of shape (fan_in, fan_out). LSTM gate blocks are packed along the last
axis in the order i, f, o, g. Padding is always trailing; ``lengths`` gives
the number of valid positions per row.
"""
import numpy as np

from ..exceptions import AllPositionsMasked, DegenerateBatch, IndexOutOfRange

GATES = ("i", "f", "o", "g")
PROB_FLOOR = 1e-12


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def softmax(z, axis=-1):
    z = z - z.max(axis=axis, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=axis, keepdims=True)


def dropout_mask(rng, shape, p):
    """Inverted-dropout mask: Bernoulli(1 - p) scaled by 1 / (1 - p)."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {p}")
    return (rng.random(shape) >= p) / (1.0 - p)


def length_mask(lengths, seq_len):
    return np.arange(seq_len)[None, :] < np.asarray(lengths)[:, None]


# -- embedding ---------------------------------------------------------------


def embedding_forward(indices, E):
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= E.shape[0]):
        raise IndexOutOfRange(f"indices must lie in [0, {E.shape[0]})")
    return E[indices]


def embedding_backward(indices, dout, vocab_size):
    dE = np.zeros((vocab_size, dout.shape[-1]))
    np.add.at(dE, np.asarray(indices).reshape(-1), dout.reshape(-1, dout.shape[-1]))
    return dE


# -- batch normalization -------------------------------------------------------


def batchnorm_forward(x, gamma, beta, running_mean, running_var, mode,
                      momentum=0.99, eps=1e-5):
    """Per-channel batch normalization over all leading axes of ``x``.

    In ``"train"`` mode the batch statistics are used and ``running_mean`` /
    ``running_var`` are updated in place with ``momentum``. In ``"infer"``
    mode the running statistics are used and nothing is mutated.
    """
    C = x.shape[-1]
    flat = x.reshape(-1, C)
    if mode == "train":
        if flat.shape[0] < 2:
            raise DegenerateBatch("batch norm needs at least 2 positions in train mode")
        mean = flat.mean(axis=0)
        var = flat.var(axis=0)
        running_mean *= momentum
        running_mean += (1.0 - momentum) * mean
        running_var *= momentum
        running_var += (1.0 - momentum) * var
    elif mode == "infer":
        mean, var = running_mean, running_var
    else:
        raise ValueError(f"unknown mode {mode!r}")
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (flat - mean) * inv_std
    y = gamma * xhat + beta
    cache = (xhat, inv_std, gamma, mode, x.shape)
    return y.reshape(x.shape), cache


def batchnorm_backward(dy, cache):
    xhat, inv_std, gamma, mode, shape = cache
    dy = dy.reshape(-1, shape[-1])
    dgamma = (dy * xhat).sum(axis=0)
    dbeta = dy.sum(axis=0)
    dxhat = dy * gamma
    if mode == "infer":
        dx = dxhat * inv_std
    else:
        n = dy.shape[0]
        dx = inv_std / n * (n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
    return dx.reshape(shape), dgamma, dbeta


# -- LSTM ----------------------------------------------------------------------


def pack_gates(params, prefix):
    """Stack per-gate ``W_*``, ``U_*``, ``b_*`` arrays into i|f|o|g blocks."""
    W = np.concatenate([params[f"{prefix}.W_{g}"] for g in GATES], axis=1)
    U = np.concatenate([params[f"{prefix}.U_{g}"] for g in GATES], axis=1)
    b = np.concatenate([params[f"{prefix}.b_{g}"] for g in GATES])
    return W, U, b


def unpack_gates(dW, dU, db, prefix):
    H = db.shape[0] // 4
    grads = {}
    for k, g in enumerate(GATES):
        sl = slice(k * H, (k + 1) * H)
        grads[f"{prefix}.W_{g}"] = dW[:, sl]
        grads[f"{prefix}.U_{g}"] = dU[:, sl]
        grads[f"{prefix}.b_{g}"] = db[sl]
    return grads


def _activate(c, kind):
    if kind == "sigmoid":
        return sigmoid(c)
    if kind == "tanh":
        return np.tanh(c)
    raise ValueError(f"unknown output activation {kind!r}")


def _activation_grad(a, kind):
    return a * (1.0 - a) if kind == "sigmoid" else 1.0 - a * a


def lstm_cell_forward(x, h_prev, c_prev, W, U, b, out_activation="tanh"):
    """One LSTM step. Returns ``(h, c, cache)``.

    ``h = o * act(c)`` where ``act`` is ``out_activation``; the gates
    themselves are always logistic (i, f, o) and tanh (g).
    """
    H = h_prev.shape[-1]
    z = x @ W + h_prev @ U + b
    i = sigmoid(z[:, :H])
    f = sigmoid(z[:, H:2 * H])
    o = sigmoid(z[:, 2 * H:3 * H])
    g = np.tanh(z[:, 3 * H:])
    c = f * c_prev + i * g
    a = _activate(c, out_activation)
    h = o * a
    return h, c, (x, h_prev, c_prev, i, f, o, g, a, out_activation)


def lstm_cell_backward(dh, dc, cache, W, U):
    """Backward through one step; returns ``(dx, dh_prev, dc_prev, dW, dU, db)``."""
    x, h_prev, c_prev, i, f, o, g, a, kind = cache
    dc = dc + dh * o * _activation_grad(a, kind)
    dz = np.concatenate([
        dc * g * i * (1.0 - i),
        dc * c_prev * f * (1.0 - f),
        dh * a * o * (1.0 - o),
        dc * i * (1.0 - g * g),
    ], axis=1)
    return dz @ W.T, dz @ U.T, dc * f, x.T @ dz, h_prev.T @ dz, dz.sum(axis=0)


def lstm_cell(x_t, h_prev, c_prev, gateparams, out_activation="tanh", prefix="cell"):
    """Convenience wrapper taking named per-gate parameters."""
    W, U, b = pack_gates(gateparams, prefix)
    h, c, _ = lstm_cell_forward(x_t, h_prev, c_prev, W, U, b, out_activation)
    return h, c


def lstm_forward(x, lengths, W, U, b, out_activation, x_mask=None, h_mask=None):
    """Unidirectional LSTM over ``x`` (B, L, d); outputs are zero past ``lengths``.

    ``x_mask`` (B, d) and ``h_mask`` (B, H) are per-sequence dropout masks
    reused at every step.
    """
    B, L, _ = x.shape
    H = U.shape[0]
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    valid = length_mask(lengths, L)[:, :, None]
    out = np.zeros((B, L, H))
    steps = []
    for t in range(L):
        x_in = x[:, t] if x_mask is None else x[:, t] * x_mask
        h_in = h if h_mask is None else h * h_mask
        h, c, step = lstm_cell_forward(x_in, h_in, c, W, U, b, out_activation)
        out[:, t] = h * valid[:, t]
        steps.append(step)
    return out, (steps, valid, x_mask, h_mask, x.shape)


def lstm_backward(dout, cache, W, U):
    steps, valid, x_mask, h_mask, shape = cache
    B, L, _ = shape
    dx = np.zeros(shape)
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(W.shape[1])
    dh_next = np.zeros((B, U.shape[0]))
    dc_next = np.zeros_like(dh_next)
    for t in reversed(range(L)):
        dh = dout[:, t] * valid[:, t] + dh_next
        dx_in, dh_in, dc_next, dW_t, dU_t, db_t = lstm_cell_backward(dh, dc_next, steps[t], W, U)
        dW += dW_t
        dU += dU_t
        db += db_t
        dx[:, t] = dx_in if x_mask is None else dx_in * x_mask
        dh_next = dh_in if h_mask is None else dh_in * h_mask
    return dx, dW, dU, db


def reverse_index(lengths, seq_len):
    """Per-row permutation reversing the first ``lengths[b]`` positions.

    It is an involution, so the same index un-reverses.
    """
    t = np.arange(seq_len)[None, :]
    lengths = np.asarray(lengths)[:, None]
    return np.where(t < lengths, lengths - 1 - t, t)


def _gather_time(x, perm):
    return np.take_along_axis(x, perm[:, :, None], axis=1)


def bilstm_forward(x, lengths, params, prefix, out_activation="tanh",
                   dropout=0.0, recurrent_dropout=0.0, rng=None, mode="infer"):
    """Bidirectional LSTM; returns ``(out, cache)`` with ``out`` of shape (B, L, 2H).

    ``params`` holds ``{prefix}.fwd.*`` and ``{prefix}.bwd.*`` per-gate arrays.
    In train mode, input and recurrent dropout masks are drawn once per
    sequence from ``rng``, in the order fwd-input, fwd-recurrent,
    bwd-input, bwd-recurrent.
    """
    B, L, d = x.shape
    perm = reverse_index(lengths, L)
    outs, caches = [], []
    for direction in ("fwd", "bwd"):
        W, U, b = pack_gates(params, f"{prefix}.{direction}")
        H = U.shape[0]
        x_mask = h_mask = None
        if mode == "train" and dropout > 0:
            x_mask = dropout_mask(rng, (B, d), dropout)
        if mode == "train" and recurrent_dropout > 0:
            h_mask = dropout_mask(rng, (B, H), recurrent_dropout)
        x_dir = x if direction == "fwd" else _gather_time(x, perm)
        out, cache = lstm_forward(x_dir, lengths, W, U, b, out_activation, x_mask, h_mask)
        if direction == "bwd":
            out = _gather_time(out, perm)
        outs.append(out)
        caches.append((W, U, cache))
    return np.concatenate(outs, axis=2), (caches, perm, prefix)


def bilstm_backward(dout, cache):
    caches, perm, prefix = cache
    H = dout.shape[2] // 2
    dx = None
    grads = {}
    for k, direction in enumerate(("fwd", "bwd")):
        W, U, lcache = caches[k]
        d_dir = dout[:, :, k * H:(k + 1) * H]
        if direction == "bwd":
            d_dir = _gather_time(d_dir, perm)
        dx_dir, dW, dU, db = lstm_backward(d_dir, lcache, W, U)
        if direction == "bwd":
            dx_dir = _gather_time(dx_dir, perm)
        dx = dx_dir if dx is None else dx + dx_dir
        grads.update(unpack_gates(dW, dU, db, f"{prefix}.{direction}"))
    return dx, grads


# -- attention -----------------------------------------------------------------


def attention_forward(h, W_a, b_a, u_a, mask):
    """Additive attention pooling over time.

    ``e_t = tanh(h_t W_a + b_a) . u_a``, ``alpha = softmax(e)`` over
    positions where ``mask`` is true (exactly zero elsewhere), and
    ``context = sum_t alpha_t h_t``.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any(axis=1).all():
        raise AllPositionsMasked("every row needs at least one unmasked position")
    s = np.tanh(h @ W_a + b_a)
    e = s @ u_a
    e = np.where(mask, e, -np.inf)
    e = e - e.max(axis=1, keepdims=True)
    w = np.where(mask, np.exp(e), 0.0)
    alpha = w / w.sum(axis=1, keepdims=True)
    context = np.einsum("bl,bld->bd", alpha, h)
    return context, alpha, (h, s, alpha, W_a, u_a)


def attention_backward(dcontext, cache):
    h, s, alpha, W_a, u_a = cache
    dh = alpha[:, :, None] * dcontext[:, None, :]
    dalpha = np.einsum("bld,bd->bl", h, dcontext)
    de = alpha * (dalpha - (alpha * dalpha).sum(axis=1, keepdims=True))
    du_a = np.einsum("bld,bl->d", s, de)
    dpre = de[:, :, None] * u_a * (1.0 - s * s)
    dW_a = np.einsum("bli,blj->ij", h, dpre)
    db_a = dpre.sum(axis=(0, 1))
    dh += dpre @ W_a.T
    return dh, dW_a, db_a, du_a


def l2_penalty(W_a, b_a, l2_W, l2_b):
    return l2_W * float(np.sum(W_a * W_a)) + l2_b * float(np.sum(b_a * b_a))


# -- output head and loss --------------------------------------------------------


def output_head_forward(context, feats, W_out, b_out):
    inp = np.concatenate([context, feats], axis=1)
    probs = softmax(inp @ W_out + b_out)
    return probs, inp


def output_head_backward(grad_z, inp, W_out, n_context):
    dW = inp.T @ grad_z
    db = grad_z.sum(axis=0)
    dinp = grad_z @ W_out.T
    return dinp[:, :n_context], dW, db


def weighted_crossentropy(probs, gold, class_weights):
    """Mean over the batch of ``w[y] * -log p[y]``.

    Returns the loss and its gradient with respect to the pre-softmax
    logits, ``w[y] * (p - onehot(y)) / B``.
    """
    gold = np.asarray(gold)
    B = probs.shape[0]
    w = np.asarray(class_weights, dtype=np.float64)[gold]
    p_gold = np.maximum(probs[np.arange(B), gold], PROB_FLOOR)
    loss = float(np.sum(w * -np.log(p_gold)) / B)
    grad = probs.copy()
    grad[np.arange(B), gold] -= 1.0
    grad *= w[:, None] / B
    return loss, grad
