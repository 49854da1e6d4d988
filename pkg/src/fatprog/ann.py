"""Small fully-connected regressor mapping features to a failure-time embedding.

One hidden tanh layer (default twelve units) and a linear output, trained by
minibatch Adam on mean squared error with L2 regularization. Inputs and the
target are standardized outside the network; AnnModel bundles the fitted
parameters with that normalization so predictions come back in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionMismatch, EmptyBatch, EmptySet


@dataclass(frozen=True)
class TrainConfig:
    lam: float = 1e-4  # L2 coefficient on all weights and biases
    learning_rate: float = 1e-4  # initial Adam step size
    batch_size: int = 8
    max_epochs: int = 500
    rng_seed: int = 0
    patience: int = 20  # epochs for the relative train-loss convergence test
    plateau_patience: int = 10  # epochs without val improvement before halving the rate
    rel_tol: float = 1e-6
    hidden_dim: int = 12
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError("lam must be non-negative")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")


@dataclass(frozen=True)
class AnnParams:
    w1: np.ndarray  # (hidden, in)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float
    activation: str = "tanh"

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.w1.ravel(), self.b1, self.w2, [self.b2]])

    def from_flat(self, theta: np.ndarray) -> "AnnParams":
        h, d = self.w1.shape
        i = 0
        w1 = theta[i : i + h * d].reshape(h, d)
        i += h * d
        b1 = theta[i : i + h]
        i += h
        w2 = theta[i : i + h]
        i += h
        b2 = float(theta[i])
        return AnnParams(w1=w1, b1=b1, w2=w2, b2=b2, activation=self.activation)


def ann_init(input_dim: int, rng_seed: int = 0, hidden_dim: int = 12) -> AnnParams:
    """Xavier-initialized parameters: weight variance 2/(fan_in+fan_out), zero biases."""
    rng = np.random.default_rng(rng_seed)
    w1 = rng.normal(0.0, np.sqrt(2.0 / (input_dim + hidden_dim)), size=(hidden_dim, input_dim))
    w2 = rng.normal(0.0, np.sqrt(2.0 / (hidden_dim + 1)), size=hidden_dim)
    return AnnParams(w1=w1, b1=np.zeros(hidden_dim), w2=w2, b2=0.0)


def ann_forward(params: AnnParams, u: np.ndarray) -> np.ndarray:
    """Network output for a batch of (standardized) input rows."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape[1] != params.input_dim:
        raise DimensionMismatch(
            f"input has {u.shape[1]} features, network expects {params.input_dim}"
        )
    hidden = np.tanh(u @ params.w1.T + params.b1)
    return hidden @ params.w2 + params.b2


def ann_loss_and_gradient(params: AnnParams, u: np.ndarray, y: np.ndarray, lam: float):
    """Mean squared error plus lam*||theta||^2, and its exact gradient.

    The gradient comes back flattened in the same order as
    ``AnnParams.flatten`` so finite-difference checks and the optimizer can
    treat the parameters as one vector.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    y = np.asarray(y, dtype=float)
    n = u.shape[0]
    if n == 0:
        raise EmptyBatch("gradient of an empty batch is undefined")
    z1 = u @ params.w1.T + params.b1
    hidden = np.tanh(z1)
    pred = hidden @ params.w2 + params.b2
    resid = pred - y
    theta = params.flatten()
    loss = float(np.mean(resid**2) + lam * np.dot(theta, theta))

    g_out = 2.0 * resid / n
    grad_w2 = hidden.T @ g_out + 2.0 * lam * params.w2
    grad_b2 = float(np.sum(g_out)) + 2.0 * lam * params.b2
    g_hidden = np.outer(g_out, params.w2) * (1.0 - hidden**2)
    grad_w1 = g_hidden.T @ u + 2.0 * lam * params.w1
    grad_b1 = g_hidden.sum(axis=0) + 2.0 * lam * params.b1
    grad = np.concatenate([grad_w1.ravel(), grad_b1, grad_w2, [grad_b2]])
    return loss, grad


def ann_train(train, val, config: TrainConfig = TrainConfig()):
    """Fit by minibatch Adam; returns (params at best validation loss, history).

    `train` and `val` are (inputs, targets) pairs in standardized units.
    Training stops when the full-set training loss changes by less than
    rel_tol over `patience` epochs, or at max_epochs. The learning rate is
    halved whenever the validation loss fails to improve for
    `plateau_patience` consecutive epochs.
    """
    u_tr, y_tr = np.atleast_2d(np.asarray(train[0], float)), np.asarray(train[1], float)
    u_va, y_va = np.atleast_2d(np.asarray(val[0], float)), np.asarray(val[1], float)
    if u_tr.shape[0] == 0 or u_va.shape[0] == 0:
        raise EmptySet("training and validation sets must be non-empty")

    rng = np.random.default_rng(config.rng_seed)
    params = ann_init(u_tr.shape[1], rng_seed=config.rng_seed, hidden_dim=config.hidden_dim)
    theta = params.flatten()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    step = 0
    lr = config.learning_rate

    n = u_tr.shape[0]
    batch = max(1, min(config.batch_size, n))
    history = {"train_loss": [], "val_loss": [], "lr": []}
    best_val = np.inf
    best_theta = theta.copy()
    best_epoch = 0
    since_improve = 0

    for epoch in range(config.max_epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch):
            idx = perm[start : start + batch]
            _, grad = ann_loss_and_gradient(params.from_flat(theta), u_tr[idx], y_tr[idx], config.lam)
            step += 1
            m = config.beta1 * m + (1.0 - config.beta1) * grad
            v = config.beta2 * v + (1.0 - config.beta2) * grad**2
            m_hat = m / (1.0 - config.beta1**step)
            v_hat = v / (1.0 - config.beta2**step)
            theta = theta - lr * m_hat / (np.sqrt(v_hat) + config.eps)
        cur = params.from_flat(theta)
        train_loss, _ = ann_loss_and_gradient(cur, u_tr, y_tr, config.lam)
        val_loss = float(np.mean((ann_forward(cur, u_va) - y_va) ** 2))
        history["train_loss"].append(train_loss)
        history["val_loss"].append(val_loss)
        history["lr"].append(lr)
        if val_loss < best_val:
            best_val = val_loss
            best_theta = theta.copy()
            best_epoch = epoch
            since_improve = 0
        else:
            since_improve += 1
            if since_improve >= config.plateau_patience:
                lr *= 0.5
                since_improve = 0
        if epoch >= config.patience:
            ref = history["train_loss"][epoch - config.patience]
            if abs(train_loss - ref) < config.rel_tol * max(abs(ref), 1e-30):
                break

    history["best_epoch"] = best_epoch
    return params.from_flat(best_theta), history


# --- standardization and the serialized model ---


@dataclass(frozen=True)
class Normalization:
    feature_means: np.ndarray
    feature_stds: np.ndarray
    target_mean: float
    target_std: float

    def encode_features(self, u: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(np.asarray(u, float)) - self.feature_means) / self.feature_stds

    def decode_features(self, z: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.asarray(z, float)) * self.feature_stds + self.feature_means

    def encode_target(self, y):
        return (np.asarray(y, float) - self.target_mean) / self.target_std

    def decode_target(self, z):
        return np.asarray(z, float) * self.target_std + self.target_mean


def fit_normalization(u: np.ndarray, y: np.ndarray) -> Normalization:
    """Zero-mean/unit-variance transform fitted on the training split."""
    u = np.atleast_2d(np.asarray(u, float))
    stds = np.std(u, axis=0)
    stds = np.where(stds > 0, stds, 1.0)
    y_std = float(np.std(y))
    return Normalization(
        feature_means=np.mean(u, axis=0),
        feature_stds=stds,
        target_mean=float(np.mean(y)),
        target_std=y_std if y_std > 0 else 1.0,
    )


@dataclass(frozen=True)
class AnnModel:
    """Fitted network plus the feature/target standardization it was trained under."""

    params: AnnParams
    norm: Normalization

    def predict(self, u_raw: np.ndarray) -> np.ndarray:
        """Failure-time embedding in seconds for raw (unstandardized) feature rows."""
        z = self.norm.encode_features(u_raw)
        return self.norm.decode_target(ann_forward(self.params, z))

    def to_dict(self) -> dict:
        p = self.params
        return {
            "schema": "ann/1",
            "dims": [p.input_dim, p.hidden_dim, 1],
            "activation": p.activation,
            "weights": {"w1": p.w1.tolist(), "w2": p.w2.tolist()},
            "biases": {"b1": p.b1.tolist(), "b2": p.b2},
            "normalization": {
                "feature_means": self.norm.feature_means.tolist(),
                "feature_stds": self.norm.feature_stds.tolist(),
                "target_mean": self.norm.target_mean,
                "target_std": self.norm.target_std,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnModel":
        if d.get("schema") != "ann/1":
            raise ConfigError(f"unsupported ann schema: {d.get('schema')!r}")
        params = AnnParams(
            w1=np.array(d["weights"]["w1"], dtype=float),
            b1=np.array(d["biases"]["b1"], dtype=float),
            w2=np.array(d["weights"]["w2"], dtype=float),
            b2=float(d["biases"]["b2"]),
            activation=d["activation"],
        )
        n = d["normalization"]
        norm = Normalization(
            feature_means=np.array(n["feature_means"], dtype=float),
            feature_stds=np.array(n["feature_stds"], dtype=float),
            target_mean=float(n["target_mean"]),
            target_std=float(n["target_std"]),
        )
        return cls(params=params, norm=norm)
