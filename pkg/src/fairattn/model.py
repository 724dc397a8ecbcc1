"""Attention-pooled tabular classifier with hand-derived gradients.

For one sample with m features, each feature value selects one row of the
embedding table; those rows form the columns of E (d_e x m). Then

    H      = tanh(E)
    scores = w @ H
    alpha  = softmax(scores)
    alpha' = alpha * mask           (post-softmax, not renormalized)
    r      = tanh(E @ alpha')
    hidden = relu(W1 @ r + b1)
    logit  = W2 @ hidden + b2
    prob   = sigmoid(logit)

Training minimizes mean binary cross-entropy with plain mini-batch SGD.
Gradients are exact analytic derivatives of that objective, including the
path through the masked softmax; no autodiff framework is involved.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import DataError, TrainingDivergedError
from .schema import EncodedSample, FeatureSchema, stack_samples

PROB_CLAMP = 1e-12


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # overflow-free in both tails
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softmax_rows(s: np.ndarray) -> np.ndarray:
    z = s - s.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class TrainConfig:
    """Training hyperparameters.

    The anneal_* fields define an accuracy-triggered learning-rate anneal:
    once training-set accuracy (checked every `anneal_check_every` batches)
    reaches `anneal_acc`, the learning rate is multiplied by
    `anneal_factor` after every subsequent batch, freezing the model
    shortly after it becomes a good-but-not-saturated fit. Fully converged
    models on the synthetic scenarios stop responding to attention
    interventions altogether, which defeats attribution; the anneal keeps
    the fitted model in the regime where interventions are informative.
    Set anneal_acc to None to train at a constant rate.
    """

    d_e: int = 32
    h: int = 64
    learning_rate: float = 0.05
    epochs: int = 30
    batch_size: int = 128
    seed: int = 0
    init_scale: float = 0.45
    anneal_acc: float | None = 0.878
    anneal_factor: float = 0.85
    anneal_check_every: int = 2

    def __post_init__(self):
        if self.d_e < 1 or self.h < 1:
            raise DataError("layer widths must be >= 1")
        if self.learning_rate <= 0 or self.init_scale <= 0:
            raise DataError("learning_rate and init_scale must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise DataError("epochs and batch_size must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise DataError("seed must fit in an unsigned 64-bit integer")
        if self.anneal_acc is not None and not 0.0 < self.anneal_acc <= 1.0:
            raise DataError("anneal_acc must lie in (0, 1]")
        if not 0.0 < self.anneal_factor < 1.0:
            raise DataError("anneal_factor must lie in (0, 1)")
        if self.anneal_check_every < 1:
            raise DataError("anneal_check_every must be >= 1")

    def to_dict(self) -> dict:
        return {
            "d_e": self.d_e, "h": self.h, "learning_rate": self.learning_rate,
            "epochs": self.epochs, "batch_size": self.batch_size,
            "seed": self.seed, "init_scale": self.init_scale,
            "anneal_acc": self.anneal_acc, "anneal_factor": self.anneal_factor,
            "anneal_check_every": self.anneal_check_every,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class AttentionClassifier:
    embed: np.ndarray  # (total_entities, d_e)
    w: np.ndarray      # (d_e,)
    W1: np.ndarray     # (h, d_e)
    b1: np.ndarray     # (h,)
    W2: np.ndarray     # (h,)
    b2: float

    def __post_init__(self):
        d_e = self.w.shape[0]
        h = self.b1.shape[0]
        if self.embed.ndim != 2 or self.embed.shape[1] != d_e:
            raise DataError("embed must be (total_entities, d_e)")
        if self.W1.shape != (h, d_e) or self.W2.shape != (h,):
            raise DataError("dense layer shapes inconsistent")

    @property
    def d_e(self) -> int:
        return self.w.shape[0]

    @property
    def h(self) -> int:
        return self.b1.shape[0]

    @property
    def total_entities(self) -> int:
        return self.embed.shape[0]

    def copy(self) -> "AttentionClassifier":
        return AttentionClassifier(
            embed=self.embed.copy(), w=self.w.copy(), W1=self.W1.copy(),
            b1=self.b1.copy(), W2=self.W2.copy(), b2=float(self.b2),
        )

    def params_bytes(self) -> bytes:
        """Concatenated parameter bytes, for immutability checks."""
        parts = [self.embed.tobytes(), self.w.tobytes(), self.W1.tobytes(),
                 self.b1.tobytes(), self.W2.tobytes(),
                 np.float64(self.b2).tobytes()]
        return b"".join(parts)

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in
                   (self.embed, self.w, self.W1, self.b1, self.W2)) and np.isfinite(self.b2)


@dataclass
class Gradients:
    embed: np.ndarray
    w: np.ndarray
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: float


@dataclass(frozen=True)
class AttentionMask:
    """Per-feature multipliers in [0, 1] applied to post-softmax weights."""

    multipliers: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.multipliers, dtype=np.float64).copy()
        if arr.ndim != 1:
            raise DataError("mask must be a 1-D vector")
        if np.any(arr < 0) or np.any(arr > 1):
            raise DataError("mask multipliers must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "multipliers", arr)

    @property
    def m(self) -> int:
        return len(self.multipliers)

    @classmethod
    def ones(cls, m: int) -> "AttentionMask":
        return cls(np.ones(m))

    @classmethod
    def zero_feature(cls, m: int, k: int) -> "AttentionMask":
        mult = np.ones(m)
        mult[k] = 0.0
        return cls(mult)

    @classmethod
    def decay(cls, m: int, indices, rate: float) -> "AttentionMask":
        mult = np.ones(m)
        for k in indices:
            mult[k] = rate
        return cls(mult)


@dataclass(frozen=True)
class ForwardTrace:
    """Cached intermediates of one forward pass; `alpha` is post-mask."""

    E: np.ndarray       # (d_e, m)
    H: np.ndarray       # (d_e, m)
    alpha: np.ndarray   # (m,)
    r: np.ndarray       # (d_e,)
    hidden: np.ndarray  # (h,)
    logit: float
    prob: float


def _resolve_mask(mask: AttentionMask | None, m: int) -> np.ndarray:
    if mask is None:
        return np.ones(m)
    if mask.m != m:
        raise DataError(f"mask length {mask.m} does not match feature count {m}")
    return mask.multipliers


def _forward_arrays(model: AttentionClassifier, ids: np.ndarray, mult: np.ndarray,
                    renormalize: bool) -> dict:
    E = model.embed[ids].transpose(0, 2, 1)            # (n, d_e, m)
    H = np.tanh(E)
    scores = np.einsum("d,ndm->nm", model.w, H)
    alpha = _softmax_rows(scores)
    masked = alpha * mult                               # (n, m)
    if renormalize:
        denom = masked.sum(axis=1, keepdims=True)
        if np.any(denom <= 0):
            raise DataError("cannot renormalize: mask removed all attention weight")
        used = masked / denom
    else:
        denom = None
        used = masked
    z = np.einsum("ndm,nm->nd", E, used)
    r = np.tanh(z)
    u = r @ model.W1.T + model.b1
    hidden = np.maximum(u, 0.0)
    logit = hidden @ model.W2 + model.b2
    prob = _sigmoid(logit)
    return {
        "E": E, "H": H, "alpha": alpha, "masked": masked, "denom": denom,
        "used": used, "r": r, "u": u, "hidden": hidden, "logit": logit, "prob": prob,
    }


def forward(model: AttentionClassifier, sample: EncodedSample,
            mask: AttentionMask | None = None, renormalize: bool = False) -> ForwardTrace:
    """Run one sample through the network and keep all intermediates."""
    ids = np.asarray([sample.entity_ids], dtype=np.int64)
    if ids.shape[1] == 0:
        raise DataError("sample has no features")
    if np.any(ids < 0) or np.any(ids >= model.total_entities):
        raise DataError("entity id outside embedding table")
    mult = _resolve_mask(mask, ids.shape[1])
    c = _forward_arrays(model, ids, mult, renormalize)
    return ForwardTrace(
        E=c["E"][0], H=c["H"][0], alpha=c["used"][0].copy(), r=c["r"][0],
        hidden=c["hidden"][0], logit=float(c["logit"][0]), prob=float(c["prob"][0]),
    )


def _loss_grad_arrays(model: AttentionClassifier, ids: np.ndarray, y: np.ndarray,
                      mult: np.ndarray, renormalize: bool) -> tuple[float, Gradients]:
    n = len(y)
    c = _forward_arrays(model, ids, mult, renormalize)
    prob = c["prob"]
    p_safe = np.clip(prob, PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss = float(-np.mean(y * np.log(p_safe) + (1 - y) * np.log1p(-p_safe)))

    # dL/dlogit of mean BCE through the sigmoid
    dlogit = (prob - y) / n                             # (n,)
    gW2 = c["hidden"].T @ dlogit
    gb2 = float(dlogit.sum())
    dhidden = np.outer(dlogit, model.W2)                # (n, h)
    du = dhidden * (c["u"] > 0)
    gW1 = du.T @ c["r"]
    gb1 = du.sum(axis=0)
    dr = du @ model.W1                                  # (n, d_e)
    dz = dr * (1.0 - c["r"] ** 2)
    dused = np.einsum("ndm,nd->nm", c["E"], dz)         # (n, m)
    if renormalize:
        # used = masked / denom
        row_dot = (dused * c["used"]).sum(axis=1, keepdims=True)
        dmasked = (dused - row_dot) / c["denom"]
    else:
        dmasked = dused
    dalpha = dmasked * mult
    # softmax backward: ds = alpha * (dalpha - <dalpha, alpha>)
    ds = c["alpha"] * (dalpha - (dalpha * c["alpha"]).sum(axis=1, keepdims=True))
    gw = np.einsum("ndm,nm->d", c["H"], ds)
    dH = np.einsum("d,nm->ndm", model.w, ds)
    dE = dH * (1.0 - c["H"] ** 2) + np.einsum("nd,nm->ndm", dz, c["used"])
    gEmbed = np.zeros_like(model.embed)
    np.add.at(gEmbed, ids.reshape(-1), dE.transpose(0, 2, 1).reshape(-1, model.d_e))
    return loss, Gradients(embed=gEmbed, w=gw, W1=gW1, b1=gb1, W2=gW2, b2=gb2)


def loss_and_grad(model: AttentionClassifier, batch: list[EncodedSample],
                  mask: AttentionMask | None = None,
                  renormalize: bool = False) -> tuple[float, Gradients]:
    """Mean binary cross-entropy over the batch and its exact gradients."""
    ids, y, _ = stack_samples(batch)
    mult = _resolve_mask(mask, ids.shape[1])
    return _loss_grad_arrays(model, ids, y, mult, renormalize)


def sgd_step(model: AttentionClassifier, grads: Gradients,
             learning_rate: float) -> AttentionClassifier:
    """One plain gradient step; returns a new model, inputs untouched."""
    lr = float(learning_rate)
    return AttentionClassifier(
        embed=model.embed - lr * grads.embed,
        w=model.w - lr * grads.w,
        W1=model.W1 - lr * grads.W1,
        b1=model.b1 - lr * grads.b1,
        W2=model.W2 - lr * grads.W2,
        b2=float(model.b2 - lr * grads.b2),
    )


def init_model(schema: FeatureSchema, config: TrainConfig) -> AttentionClassifier:
    """Uniform(-init_scale, +init_scale) parameters from the init stream.

    Draw order is fixed (embed, w, W1, b1, W2, b2) and part of the
    determinism contract.
    """
    gen = rng.substream(config.seed, rng.INIT_STREAM)
    s = config.init_scale
    te = schema.total_entities
    return AttentionClassifier(
        embed=gen.uniform(-s, s, size=(te, config.d_e)),
        w=gen.uniform(-s, s, size=config.d_e),
        W1=gen.uniform(-s, s, size=(config.h, config.d_e)),
        b1=gen.uniform(-s, s, size=config.h),
        W2=gen.uniform(-s, s, size=config.h),
        b2=float(gen.uniform(-s, s)),
    )


def train(schema: FeatureSchema, train_samples: list[EncodedSample],
          config: TrainConfig) -> AttentionClassifier:
    """Seeded mini-batch SGD with the all-ones mask.

    Same (data, config) reproduces bit-identical parameters on one
    platform. Raises TrainingDivergedError with the epoch index if the
    loss or parameters stop being finite.
    """
    ids, y, _ = stack_samples(train_samples)
    if ids.shape[1] != schema.m:
        raise DataError("samples do not match schema feature count")
    model = init_model(schema, config)
    mult = np.ones(schema.m)
    shuffler = rng.substream(config.seed, rng.SHUFFLE_STREAM)
    n = len(y)
    lr = config.learning_rate
    annealing = False
    batch_index = 0
    for epoch in range(config.epochs):
        order = shuffler.permutation(n)
        for start in range(0, n, config.batch_size):
            pick = order[start:start + config.batch_size]
            loss, grads = _loss_grad_arrays(model, ids[pick], y[pick], mult, False)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            model = sgd_step(model, grads, lr)
            batch_index += 1
            if annealing:
                lr *= config.anneal_factor
            elif (config.anneal_acc is not None
                  and batch_index % config.anneal_check_every == 0):
                probs = _forward_arrays(model, ids, mult, False)["prob"]
                if ((probs >= 0.5) == y).mean() >= config.anneal_acc:
                    annealing = True
        if not model.all_finite():
            raise TrainingDivergedError(epoch)
    return model


def predict_proba(model: AttentionClassifier, samples: list[EncodedSample],
                  mask: AttentionMask | None = None, renormalize: bool = False,
                  batch_size: int = 8192) -> np.ndarray:
    ids, _, _ = stack_samples(samples)
    mult = _resolve_mask(mask, ids.shape[1])
    out = np.empty(len(ids), dtype=np.float64)
    for start in range(0, len(ids), batch_size):
        c = _forward_arrays(model, ids[start:start + batch_size], mult, renormalize)
        out[start:start + len(c["prob"])] = c["prob"]
    return out


def predict(model: AttentionClassifier, samples: list[EncodedSample],
            mask: AttentionMask | None = None, threshold: float = 0.5,
            renormalize: bool = False) -> np.ndarray:
    """Binary predictions; probability ties at the threshold go to 1."""
    probs = predict_proba(model, samples, mask, renormalize)
    return (probs >= threshold).astype(np.int64)
