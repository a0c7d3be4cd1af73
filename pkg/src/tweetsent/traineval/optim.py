"""Adam with bias correction, operating in place on named parameter dicts."""
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import NonfiniteGradient


@dataclass
class AdamState:
    lr: float = 0.0005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0

    def copy(self):
        return AdamState(self.lr, self.beta1, self.beta2, self.eps,
                         {k: a.copy() for k, a in self.m.items()},
                         {k: a.copy() for k, a in self.v.items()}, self.t)


def adam_step(params, grads, adam):
    """Apply one Adam update to ``params`` in place and advance ``adam``.

    Raises NonfiniteGradient before touching any state if a gradient holds
    NaN or inf.
    """
    for name, g in grads.items():
        if g.shape != params[name].shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, expected {params[name].shape}")
        if not np.all(np.isfinite(g)):
            raise NonfiniteGradient(f"non-finite gradient for {name}")
    adam.t += 1
    bc1 = 1.0 - adam.beta1 ** adam.t
    bc2 = 1.0 - adam.beta2 ** adam.t
    for name, g in grads.items():
        if name not in adam.m:
            adam.m[name] = np.zeros_like(g)
            adam.v[name] = np.zeros_like(g)
        m, v = adam.m[name], adam.v[name]
        m *= adam.beta1
        m += (1.0 - adam.beta1) * g
        v *= adam.beta2
        v += (1.0 - adam.beta2) * (g * g)
        params[name] -= adam.lr * (m / bc1) / (np.sqrt(v / bc2) + adam.eps)
    return params, adam
