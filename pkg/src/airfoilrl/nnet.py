"""Minimal feedforward network engine shared by surrogate, actor, critic.

Plain numpy: forward pass with cached activations, exact reverse-mode
gradients, Adam updates, and per-dimension (0,1) min-max scaling of
inputs and outputs.  Hidden activation is the rectifier, output is
identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class NnetError(ValueError):
    pass


@dataclass(frozen=True)
class Scaler:
    """Per-dimension min-max map onto (0,1)."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        if np.any(self.hi <= self.lo):
            raise NnetError("scaler requires lo < hi per dimension")

    def scale(self, v: np.ndarray) -> np.ndarray:
        return (v - self.lo) / (self.hi - self.lo)

    def unscale(self, v: np.ndarray) -> np.ndarray:
        return v * (self.hi - self.lo) + self.lo

    @staticmethod
    def identity(dim: int) -> "Scaler":
        return Scaler(lo=np.zeros(dim), hi=np.ones(dim))

    @staticmethod
    def from_bounds(bounds) -> "Scaler":
        arr = np.asarray(bounds, dtype=float)
        return Scaler(lo=arr[:, 0].copy(), hi=arr[:, 1].copy())


@dataclass
class MlpModel:
    sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input_scaler: Scaler
    output_scaler: Scaler

    @property
    def n_in(self) -> int:
        return self.sizes[0]

    @property
    def n_out(self) -> int:
        return self.sizes[-1]

    def copy(self) -> "MlpModel":
        return MlpModel(
            sizes=list(self.sizes),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            input_scaler=self.input_scaler,
            output_scaler=self.output_scaler,
        )

    def parameters(self) -> list[np.ndarray]:
        return list(self.weights) + list(self.biases)

    def set_parameters(self, params: list[np.ndarray]) -> None:
        n = len(self.weights)
        self.weights = [p.copy() for p in params[:n]]
        self.biases = [p.copy() for p in params[n:]]


def make_mlp(sizes, rng, input_scaler: Scaler | None = None,
             output_scaler: Scaler | None = None) -> MlpModel:
    """Glorot-uniform initialized MLP with the given layer sizes."""
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
        biases.append(np.zeros(n_out))
    return MlpModel(
        sizes=list(sizes),
        weights=weights,
        biases=biases,
        input_scaler=input_scaler or Scaler.identity(sizes[0]),
        output_scaler=output_scaler or Scaler.identity(sizes[-1]),
    )


def mlp_forward(model: MlpModel, x: np.ndarray, scaled: bool = True,
                with_cache: bool = False):
    """Forward pass on a (n, d) batch or a single d-vector.

    With scaled=True the input is min-max scaled before the chain and
    the raw output unscaled after; training code works in scaled space
    with scaled=False on pre-scaled arrays.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.n_in:
        raise NnetError(f"input dimension {x.shape[1]} != {model.n_in}")
    h = model.input_scaler.scale(x) if scaled else x
    cache = [h]
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        h = z if i == last else np.maximum(z, 0.0)
        cache.append(h)
    out = model.output_scaler.unscale(h) if scaled else h
    if single:
        out = out[0]
    if with_cache:
        return out, cache
    return out


def mlp_backward(model: MlpModel, cache: list[np.ndarray],
                 grad_out: np.ndarray) -> list[np.ndarray]:
    """Exact gradients w.r.t. parameters, ordered as model.parameters().

    grad_out is dLoss/d(chain output) for the batch the cache came
    from, in the same (scaled) space the chain ran in.
    """
    grad_out = np.asarray(grad_out, dtype=float)
    if grad_out.ndim == 1:
        grad_out = grad_out[None, :]
    if len(cache) != len(model.weights) + 1:
        raise NnetError("stale or mismatched forward cache")
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    delta = grad_out
    for i in range(len(model.weights) - 1, -1, -1):
        h_in = cache[i]
        if i < len(model.weights) - 1:
            # cache holds post-relu activations; relu' = 1 where act > 0
            delta = delta * (cache[i + 1] > 0.0)
        grads_w[i] = h_in.T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ model.weights[i].T
    return grads_w + grads_b


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    @staticmethod
    def for_params(params) -> "AdamState":
        return AdamState(m=[np.zeros_like(p) for p in params],
                         v=[np.zeros_like(p) for p in params])


def adam_update(params, grads, state: AdamState, lr: float) -> list[np.ndarray]:
    """Standard Adam step with bias correction; returns updated params."""
    if len(params) != len(grads):
        raise NnetError("parameter/gradient count mismatch")
    state.step += 1
    t = state.step
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g
        m_hat = state.m[i] / (1.0 - state.beta1**t)
        v_hat = state.v[i] / (1.0 - state.beta2**t)
        out.append(p - lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out


def train_minibatch(model: MlpModel, inputs: np.ndarray, targets: np.ndarray,
                    schedule, batch_size: int, seed: int,
                    record_every: int = 100, callback=None) -> list[float]:
    """Minibatch MSE regression in scaled space.

    schedule is a list of (epochs, learning_rate) segments applied in
    order; each epoch reshuffles with a generator seeded once from
    `seed`.  Returns the running MSE recorded every `record_every`
    minibatches; `callback(minibatch_index)` fires at the same cadence.
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if inputs.size == 0:
        raise NnetError("empty dataset")
    if targets.ndim == 1:
        targets = targets[:, None]
    xs = model.input_scaler.scale(inputs)
    ys = model.output_scaler.scale(targets)
    rng = np.random.default_rng(seed)
    state = AdamState.for_params(model.parameters())
    n = xs.shape[0]
    history: list[float] = []
    mb = 0
    for epochs, lr in schedule:
        for _ in range(epochs):
            order = rng.permutation(n)
            for start in range(0, n, batch_size):
                idx = order[start : start + batch_size]
                xb, yb = xs[idx], ys[idx]
                pred, cache = mlp_forward(model, xb, scaled=False, with_cache=True)
                diff = pred - yb
                loss = float(np.mean(diff**2))
                if not np.isfinite(loss):
                    raise NnetError("divergent loss (non-finite)")
                grad_out = 2.0 * diff / diff.size
                grads = mlp_backward(model, cache, grad_out)
                model.set_parameters(
                    adam_update(model.parameters(), grads, state, lr))
                mb += 1
                if mb % record_every == 0:
                    history.append(loss)
                    if callback is not None:
                        callback(mb)
    return history


# ---------------------------------------------------------------------------
# model container: npz with layer sizes, scaler bounds, and parameters


def save_model(path, model: MlpModel) -> None:
    arrays = {
        "version": np.array([1]),
        "sizes": np.array(model.sizes),
        "in_lo": model.input_scaler.lo,
        "in_hi": model.input_scaler.hi,
        "out_lo": model.output_scaler.lo,
        "out_hi": model.output_scaler.hi,
    }
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    np.savez(path, **arrays)


def load_model(path) -> MlpModel:
    with np.load(path) as data:
        if int(data["version"][0]) != 1:
            raise NnetError("unknown model file version")
        sizes = [int(s) for s in data["sizes"]]
        weights = [data[f"w{i}"].copy() for i in range(len(sizes) - 1)]
        biases = [data[f"b{i}"].copy() for i in range(len(sizes) - 1)]
        input_scaler = Scaler(lo=data["in_lo"].copy(), hi=data["in_hi"].copy())
        output_scaler = Scaler(lo=data["out_lo"].copy(), hi=data["out_hi"].copy())
    return MlpModel(sizes=sizes, weights=weights, biases=biases,
                    input_scaler=input_scaler, output_scaler=output_scaler)
