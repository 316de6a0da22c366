"""A small fully connected network with hand-written reverse-mode gradients.

Hidden layers are rectified and optionally dropped out (inverted dropout);
the output layer is linear, one unit per time interval. Training uses
minibatch Adam with decoupled weight decay under a warm-restart schedule:
the learning rate is cosine-annealed within each cycle, cycles grow
geometrically and the peak rate decays at every restart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class Mlp:
    """Network parameters. Treated as immutable; training returns a new Mlp."""

    weights: tuple
    biases: tuple
    dropout: float = 0.0

    def __post_init__(self):
        if not self.weights or len(self.weights) != len(self.biases):
            raise ValidationError("weights and biases must pair up, one per layer")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValidationError(f"layer {i}: inconsistent parameter shapes")
            if i > 0 and w.shape[0] != self.weights[i - 1].shape[1]:
                raise ValidationError(f"layer {i}: input width does not chain")
        if not 0.0 <= self.dropout < 1.0:
            raise ValidationError("dropout rate must be in [0, 1)")

    @property
    def widths(self) -> tuple:
        return (self.weights[0].shape[0], *(w.shape[1] for w in self.weights))

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]


def init_mlp(widths, dropout: float = 0.0, seed: int = 0) -> Mlp:
    """Uniform init within +-sqrt(6 / (fan_in + fan_out)), biases zero."""
    widths = [int(w) for w in widths]
    if len(widths) < 2 or min(widths) < 1:
        raise ValidationError("widths must list at least input and output sizes")
    rng = np.random.default_rng(seed)
    ws, bs = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        ws.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        bs.append(np.zeros(fan_out))
    return Mlp(tuple(ws), tuple(bs), dropout)


def _forward_cached(net: Mlp, x, training: bool, rng):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != net.widths[0]:
        raise ValidationError(
            f"input has {x.shape[1]} columns, network expects {net.widths[0]}"
        )
    use_dropout = training and net.dropout > 0.0
    if use_dropout and rng is None:
        raise ValidationError("training-mode forward with dropout needs an rng")
    n_layers = len(net.weights)
    acts = [x]
    zs = []
    masks = [None]
    a = x
    for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        zs.append(z)
        if layer < n_layers - 1:
            a = np.maximum(z, 0.0)
            mask = None
            if use_dropout:
                keep = 1.0 - net.dropout
                mask = (rng.random(a.shape) < keep) / keep
                a = a * mask
            acts.append(a)
            masks.append(mask)
        else:
            a = z
    return a, (acts, zs, masks)


def forward(net: Mlp, x, training: bool = False, rng=None):
    """Network outputs for a batch; deterministic when not training."""
    out, _ = _forward_cached(net, x, training, rng)
    return out


def backward(net: Mlp, cache, grad_out):
    """Parameter gradients given the gradient at the outputs."""
    acts, zs, masks = cache
    n_layers = len(net.weights)
    grads_w = [None] * n_layers
    grads_b = [None] * n_layers
    delta = np.asarray(grad_out, dtype=float)
    for layer in range(n_layers - 1, -1, -1):
        grads_w[layer] = acts[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            da = delta @ net.weights[layer].T
            if masks[layer] is not None:
                da = da * masks[layer]
            delta = da * (zs[layer - 1] > 0)
    return grads_w, grads_b


@dataclass
class OptimizerState:
    """Adaptive-moment accumulators, one pair per parameter array."""

    moment1: list
    moment2: list
    step: int = 0

    @classmethod
    def for_params(cls, params) -> "OptimizerState":
        return cls(
            [np.zeros_like(p) for p in params],
            [np.zeros_like(p) for p in params],
        )


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 256
    learning_rate: float = 0.01
    cycle_length: int = 1
    cycle_mult: int = 2
    lr_decay: float = 0.8
    max_epochs: int = 100
    patience: int = 10
    seed: int = 0
    weight_decay: float = 0.0

    def __post_init__(self):
        positive = ("batch_size", "learning_rate", "cycle_length", "cycle_mult",
                    "max_epochs", "patience")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValidationError("lr_decay must be in (0, 1]")
        if self.weight_decay < 0:
            raise ValidationError("weight_decay must be nonnegative")


def learning_rate_at(cfg: TrainConfig, position: float) -> float:
    """Warm-restart schedule evaluated at a fractional epoch position.

    Cycle k has length cycle_length * cycle_mult**k epochs and starts at peak
    learning_rate * lr_decay**k, annealed to zero by a half cosine over the
    cycle. At every cycle start the rate is exactly the decayed peak.
    """
    start, length, restarts = 0.0, float(cfg.cycle_length), 0
    while position >= start + length:
        start += length
        length *= cfg.cycle_mult
        restarts += 1
    frac = (position - start) / length
    peak = cfg.learning_rate * cfg.lr_decay**restarts
    return float(peak * 0.5 * (1.0 + np.cos(np.pi * frac)))


def fit(net: Mlp, loss_fn, train_x, train_labels, val_x, val_labels, cfg: TrainConfig):
    """Train and return (best network, per-epoch log).

    The parameters with the lowest validation loss seen are returned. Training
    stops early once the validation loss has not improved for more than
    ``patience`` epochs. Shuffling and dropout draw from one generator seeded
    by the config, so a config fully determines the result.
    """
    train_x = np.atleast_2d(np.asarray(train_x, dtype=float))
    val_x = np.atleast_2d(np.asarray(val_x, dtype=float))
    if len(train_labels) != train_x.shape[0] or len(val_labels) != val_x.shape[0]:
        raise ValidationError("label counts must match the covariate rows")
    rng = np.random.default_rng(cfg.seed)
    params = [w.copy() for w in net.weights] + [b.copy() for b in net.biases]
    n_w = len(net.weights)
    state = OptimizerState.for_params(params)
    best_val = np.inf
    best_params = [p.copy() for p in params]
    bad_epochs = 0
    log = []
    n = train_x.shape[0]
    n_batches = max(1, int(np.ceil(n / cfg.batch_size)))

    def as_net():
        return Mlp(tuple(params[:n_w]), tuple(params[n_w:]), net.dropout)

    for epoch in range(cfg.max_epochs):
        perm = rng.permutation(n)
        batch_losses = []
        for b in range(n_batches):
            sel = perm[b * cfg.batch_size : (b + 1) * cfg.batch_size]
            out, cache = _forward_cached(as_net(), train_x[sel], training=True, rng=rng)
            result = loss_fn(out, train_labels.take(sel))
            if not np.isfinite(result.value):
                raise NumericalError(
                    f"non-finite training loss in epoch {epoch}, batch {b}"
                )
            grads_w, grads_b = backward(as_net(), cache, result.grad)
            grads = grads_w + grads_b
            lr = learning_rate_at(cfg, epoch + b / n_batches)
            state.step += 1
            c1 = 1.0 - ADAM_BETA1**state.step
            c2 = 1.0 - ADAM_BETA2**state.step
            for p, g, m1, m2 in zip(params, grads, state.moment1, state.moment2):
                m1 += (1.0 - ADAM_BETA1) * (g - m1)
                m2 += (1.0 - ADAM_BETA2) * (g * g - m2)
                p -= lr * (m1 / c1) / (np.sqrt(m2 / c2) + ADAM_EPS)
                if cfg.weight_decay > 0:
                    p -= lr * cfg.weight_decay * p
            batch_losses.append(result.value)
        val_out = forward(as_net(), val_x, training=False)
        val_loss = loss_fn(val_out, val_labels).value
        if not np.isfinite(val_loss):
            raise NumericalError(f"non-finite validation loss in epoch {epoch}")
        log.append(
            {
                "epoch": epoch,
                "train_loss": float(np.mean(batch_losses)),
                "val_loss": float(val_loss),
                "lr": learning_rate_at(cfg, float(epoch)),
            }
        )
        if val_loss < best_val:
            best_val = val_loss
            best_params = [p.copy() for p in params]
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > cfg.patience:
                break
    trained = Mlp(tuple(best_params[:n_w]), tuple(best_params[n_w:]), net.dropout)
    return trained, log


def gradient_check(net: Mlp, loss_fn, x, labels, eps: float = 1e-5) -> float:
    """Largest relative disagreement between backprop and central differences.

    Runs the network in evaluation mode (no dropout), perturbs every parameter
    coordinate by +-eps and compares (f+ - f-) / (2 eps) against the
    reverse-mode gradient. The relative error uses the larger of the two
    magnitudes, floored at 1e-6.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out, cache = _forward_cached(net, x, training=False, rng=None)
    grads_w, grads_b = backward(net, cache, loss_fn(out, labels).grad)
    work_w = [w.copy() for w in net.weights]
    work_b = [b.copy() for b in net.biases]

    def value():
        model = Mlp(tuple(work_w), tuple(work_b), net.dropout)
        return loss_fn(forward(model, x), labels).value

    worst = 0.0
    for arrays, grads in ((work_w, grads_w), (work_b, grads_b)):
        for arr, grad in zip(arrays, grads):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                i = it.multi_index
                orig = arr[i]
                arr[i] = orig + eps
                f_plus = value()
                arr[i] = orig - eps
                f_minus = value()
                arr[i] = orig
                fd = (f_plus - f_minus) / (2.0 * eps)
                denom = max(abs(fd), abs(grad[i]), 1e-6)
                worst = max(worst, abs(fd - grad[i]) / denom)
    return worst


def net_to_dict(net: Mlp) -> dict:
    """JSON-ready parameter dump: widths, dropout, row-major weights, biases."""
    return {
        "widths": [int(w) for w in net.widths],
        "dropout": float(net.dropout),
        "weights": [w.ravel(order="C").tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }


def net_from_dict(doc: dict) -> Mlp:
    widths = [int(w) for w in doc["widths"]]
    ws = []
    for flat, fan_in, fan_out in zip(doc["weights"], widths[:-1], widths[1:]):
        arr = np.asarray(flat, dtype=float)
        if arr.size != fan_in * fan_out:
            raise ValidationError("weight array size disagrees with widths")
        ws.append(arr.reshape(fan_in, fan_out))
    bs = [np.asarray(b, dtype=float) for b in doc["biases"]]
    return Mlp(tuple(ws), tuple(bs), float(doc.get("dropout", 0.0)))
