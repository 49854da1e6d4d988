"""One-dimensional Gaussian process regression over the network embedding.

Squared-exponential kernel with additive observation noise; hyperparameters
(noise std, length scale, signal std) are fitted by multi-start L-BFGS on
the exact log marginal likelihood in log-parameter space. The fitted model
caches the Cholesky factor, so predictions are O(N) each.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from .errors import ConfigError, EmptySet, SingularKernel

JITTER_LADDER = (1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


@dataclass(frozen=True)
class GprHyper:
    sigma_n: float  # observation noise std
    l: float  # kernel length scale
    sigma_l: float  # kernel signal std

    def __post_init__(self):
        if min(self.sigma_n, self.l, self.sigma_l) <= 0:
            raise ConfigError("all GPR hyperparameters must be strictly positive")

    def log_array(self) -> np.ndarray:
        return np.log([self.sigma_n, self.l, self.sigma_l])

    @classmethod
    def from_log(cls, psi) -> "GprHyper":
        s = np.exp(np.asarray(psi, dtype=float))
        return cls(sigma_n=float(s[0]), l=float(s[1]), sigma_l=float(s[2]))


def rbf_kernel(eta1, eta2, hyper: GprHyper):
    """Squared-exponential covariance sigma_l^2 * exp(-(eta-eta')^2 / (2 l^2))."""
    d = np.asarray(eta1, dtype=float) - np.asarray(eta2, dtype=float)
    out = hyper.sigma_l**2 * np.exp(-0.5 * (d / hyper.l) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def _kernel_matrix(eta: np.ndarray, hyper: GprHyper) -> np.ndarray:
    diff = eta[:, None] - eta[None, :]
    k = hyper.sigma_l**2 * np.exp(-0.5 * (diff / hyper.l) ** 2)
    k[np.diag_indices_from(k)] += hyper.sigma_n**2
    return k


def _cholesky_with_jitter(k: np.ndarray):
    """Lower Cholesky factor, escalating a diagonal jitter when needed."""
    scale = float(np.mean(np.diag(k)))
    try:
        return cholesky(k, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    for jit in JITTER_LADDER:
        try:
            return cholesky(k + jit * scale * np.eye(k.shape[0]), lower=True), jit * scale
        except np.linalg.LinAlgError:
            continue
    raise SingularKernel("kernel matrix not positive definite after jitter escalation")


def log_marginal_likelihood_and_gradient(hyper: GprHyper, train_eta, train_tau):
    """Exact log marginal likelihood and its gradient w.r.t. the log-hyperparameters.

    Gradient components follow the trace identity
    0.5*Tr[(alpha alpha^T - K^{-1}) dK/dtheta] with dK taken in log space,
    ordered (log sigma_n, log l, log sigma_l).
    """
    eta = np.asarray(train_eta, dtype=float)
    tau = np.asarray(train_tau, dtype=float)
    if eta.size < 1:
        raise EmptySet("need at least one conditioning pair")
    n = eta.size
    diff = eta[:, None] - eta[None, :]
    sq = (diff / hyper.l) ** 2
    k_rbf = hyper.sigma_l**2 * np.exp(-0.5 * sq)
    k = k_rbf + hyper.sigma_n**2 * np.eye(n)
    chol, _ = _cholesky_with_jitter(k)
    alpha = cho_solve((chol, True), tau)
    lml = float(
        -0.5 * tau @ alpha - np.sum(np.log(np.diag(chol))) - 0.5 * n * np.log(2.0 * np.pi)
    )
    k_inv = cho_solve((chol, True), np.eye(n))
    w = np.outer(alpha, alpha) - k_inv
    d_sigma_n = 2.0 * hyper.sigma_n**2 * np.eye(n)
    d_l = k_rbf * sq
    d_sigma_l = 2.0 * k_rbf
    grad = np.array(
        [
            0.5 * np.sum(w * d_sigma_n),
            0.5 * np.sum(w * d_l),
            0.5 * np.sum(w * d_sigma_l),
        ]
    )
    return lml, grad


@dataclass
class GprModel:
    hyper: GprHyper
    train_eta: np.ndarray
    train_tau: np.ndarray
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float

    @classmethod
    def from_data(cls, train_eta, train_tau, hyper: GprHyper) -> "GprModel":
        """Condition on data with fixed hyperparameters (no fitting)."""
        eta = np.asarray(train_eta, dtype=float)
        tau = np.asarray(train_tau, dtype=float)
        k = _kernel_matrix(eta, hyper)
        chol, jitter = _cholesky_with_jitter(k)
        alpha = cho_solve((chol, True), tau)
        return cls(hyper=hyper, train_eta=eta, train_tau=tau, chol=chol, alpha=alpha, jitter=jitter)

    def predict(self, eta_star, include_noise: bool = False):
        """Posterior mean and variance at query embeddings.

        The default variance is that of the latent function; with
        include_noise=True the observation noise variance is added, which is
        the spread of actual failure times about the latent curve.
        """
        eta_star = np.atleast_1d(np.asarray(eta_star, dtype=float))
        k_star = rbf_kernel(eta_star[:, None], self.train_eta[None, :], self.hyper)
        mu = k_star @ self.alpha
        v = solve_triangular(self.chol, k_star.T, lower=True)
        var = self.hyper.sigma_l**2 - np.sum(v**2, axis=0)
        var = np.maximum(var, 0.0)
        if include_noise:
            var = var + self.hyper.sigma_n**2
        return mu, var

    def to_dict(self) -> dict:
        return {
            "schema": "gpr/1",
            "log_hypers": self.hyper.log_array().tolist(),
            "train_eta": self.train_eta.tolist(),
            "train_tau": self.train_tau.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GprModel":
        if d.get("schema") != "gpr/1":
            raise ConfigError(f"unsupported gpr schema: {d.get('schema')!r}")
        hyper = GprHyper.from_log(np.array(d["log_hypers"], dtype=float))
        return cls.from_data(
            np.array(d["train_eta"], dtype=float), np.array(d["train_tau"], dtype=float), hyper
        )


def gpr_predict(model: GprModel, eta_star, include_noise: bool = False):
    return model.predict(eta_star, include_noise=include_noise)


def gpr_fit(train_eta, train_tau, restarts: int = 8, rng_seed: int = 0) -> GprModel:
    """Multi-start maximization of the log marginal likelihood in log-hyper space.

    Restart points are log-uniform across [1e-2, 1e2] times the data scales
    (target std for the noise/signal parameters, input std for the length
    scale); the best restart by achieved likelihood wins.
    """
    eta = np.asarray(train_eta, dtype=float)
    tau = np.asarray(train_tau, dtype=float)
    if eta.size < 2:
        raise EmptySet("need at least two conditioning pairs to fit hyperparameters")
    s_x = float(np.std(eta))
    s_x = s_x if s_x > 0 else 1.0
    s_y = float(np.std(tau))
    s_y = s_y if s_y > 0 else 1.0

    base = np.log([0.1 * s_y, s_x, s_y])
    bounds = [
        (np.log(1e-6 * s_y), np.log(1e3 * s_y)),
        (np.log(1e-3 * s_x), np.log(1e3 * s_x)),
        (np.log(1e-6 * s_y), np.log(1e3 * s_y)),
    ]
    rng = np.random.default_rng(rng_seed)
    starts = [base]
    for _ in range(max(0, restarts - 1)):
        starts.append(base + rng.uniform(np.log(1e-2), np.log(1e2), size=3))
    starts = [np.clip(s, [b[0] for b in bounds], [b[1] for b in bounds]) for s in starts]

    def objective(psi):
        lml, grad = log_marginal_likelihood_and_gradient(GprHyper.from_log(psi), eta, tau)
        return -lml, -grad

    best_psi, best_val = None, np.inf
    for x0 in starts:
        res = minimize(objective, x0, jac=True, method="L-BFGS-B", bounds=bounds)
        if res.fun < best_val:
            best_val = float(res.fun)
            best_psi = res.x
    if best_psi is None:
        raise SingularKernel("no optimizer restart converged")
    return GprModel.from_data(eta, tau, GprHyper.from_log(best_psi))


def write_gpr_json(path, model: GprModel) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh, indent=2, sort_keys=True)


def read_gpr_json(path) -> GprModel:
    with open(path) as fh:
        return GprModel.from_dict(json.load(fh))
