"""Dense numerics shared by the trainable models.

Arrays are float64 numpy arrays (row-major). Shapes are checked at the
public boundaries and every result is checked for NaN/Inf.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class NonFiniteError(FloatingPointError):
    pass


def as_tensor(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def check_finite(x: np.ndarray, what: str = "value") -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f"{what} contains NaN or Inf")
    return x


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(logits, axis: int = -1) -> np.ndarray:
    z = as_tensor(logits)
    if z.size == 0 or z.shape[axis] == 0:
        raise ValueError("softmax of an empty vector")
    check_finite(z, "logits")
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(logits, axis: int = -1) -> np.ndarray:
    z = as_tensor(logits)
    z = z - z.max(axis=axis, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=axis, keepdims=True))


def mse_loss(predictions, targets) -> float:
    """Mean of squared differences."""
    p = as_tensor(predictions).ravel()
    t = as_tensor(targets).ravel()
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.size} predictions vs {t.size} targets")
    if p.size == 0:
        raise ValueError("mse of empty vectors")
    d = p - t
    return float(check_finite(np.dot(d, d) / d.size, "mse"))


@dataclass(frozen=True)
class AdamHyper:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros_like(cls, params: np.ndarray) -> "AdamState":
        return cls(np.zeros_like(params, dtype=np.float64), np.zeros_like(params, dtype=np.float64), 0)


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState, hyper: AdamHyper = AdamHyper()):
    """One bias-corrected Adam update. Returns ``(new_params, new_state)``; inputs are not modified."""
    if params.shape != grads.shape or state.m.shape != params.shape or state.v.shape != params.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grads {grads.shape}, "
                         f"moments {state.m.shape}/{state.v.shape}")
    t = state.t + 1
    m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * grads
    v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * (grads * grads)
    m_hat = m / (1.0 - hyper.beta1 ** t)
    v_hat = v / (1.0 - hyper.beta2 ** t)
    new = params - hyper.learning_rate * m_hat / (np.sqrt(v_hat) + hyper.epsilon)
    return check_finite(new, "parameters"), AdamState(m, v, t)


@dataclass
class Adam:
    """Adam over a dict of named parameter arrays, updated in place."""

    hyper: AdamHyper = field(default_factory=AdamHyper)
    states: dict = field(default_factory=dict)

    def step(self, params: dict, grads: dict) -> None:
        for name, p in params.items():
            state = self.states.get(name)
            if state is None:
                state = AdamState.zeros_like(p)
            new, self.states[name] = adam_step(p, grads[name], state, self.hyper)
            p[...] = new


def numeric_gradient(f: Callable[[np.ndarray], float], params: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central differences, one coordinate at a time."""
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.array(params, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        fp = f(x)
        flat[i] = orig - step
        fm = f(x)
        flat[i] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteError(f"objective is not finite around coordinate {i}")
        gflat[i] = (fp - fm) / (2.0 * step)
    return g


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    num = np.abs(analytic - numeric)
    den = np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
    return float(np.max(num / den)) if num.size else 0.0


def grad_check(f: Callable[[np.ndarray], tuple], params, step: float = 1e-5) -> float:
    """Max relative error between ``f``'s analytic gradient and central differences.

    ``f(params)`` returns ``(value, gradient)``.
    """
    x = as_tensor(params)
    value, analytic = f(x.copy())
    if not np.isfinite(value):
        raise NonFiniteError("objective is not finite at params")
    numeric = numeric_gradient(lambda p: f(p)[0], x, step)
    return relative_error(as_tensor(analytic), numeric)
