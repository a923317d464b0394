"""Adam optimizer with bias correction.

Update rule per step t (applied in place to each parameter tensor):

    m <- b1*m + (1-b1)*g        mhat = m / (1 - b1^t)
    v <- b2*v + (1-b2)*g^2      vhat = v / (1 - b2^t)
    p <- p - lr * mhat / (sqrt(vhat) + eps)

Moments start at zero and live in float32, same as the parameters, so
checkpointed optimizer state round-trips exactly.
"""

import numpy as np

from rndcnn.errors import ShapeError


class Adam:
    def __init__(self, params, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-7):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m = [np.zeros_like(p) for _, p in params]
        self.v = [np.zeros_like(p) for _, p in params]

    def step(self, params, grads) -> None:
        if len(grads) != len(self.m):
            raise ShapeError(f"{len(grads)} gradients for {len(self.m)} parameter tensors")
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for (_, p), g, m, v in zip(params, grads, self.m, self.v):
            if g.shape != p.shape:
                raise ShapeError(f"gradient shape {g.shape} != parameter shape {p.shape}")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_tensors(self) -> list[tuple[str, np.ndarray]]:
        out = [(f"m{i}", m) for i, m in enumerate(self.m)]
        out += [(f"v{i}", v) for i, v in enumerate(self.v)]
        return out
