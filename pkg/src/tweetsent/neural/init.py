"""Parameter initializers. All take an explicit ``numpy.random.Generator``."""
import numpy as np


def glorot_uniform(shape, rng):
    """Uniform on +-sqrt(6 / (fan_in + fan_out)); ``shape`` is (fan_in, fan_out)."""
    fan_in, fan_out = shape
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def orthogonal(shape, rng, gain=1.0):
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


def uniform(shape, rng, limit=0.05):
    return rng.uniform(-limit, limit, size=shape)
