"""Failure-time posterior: a Gaussian belief gated by survival to time t.

The regression stage supplies a Gaussian over failure times; observing that
failure has not yet occurred at measurement time t zeroes the density below
t and renormalizes by the surviving upper-tail mass. Both the posterior
mode and the closed-form confidence interval follow, the interval switching
from a symmetric form to a left-clamped form once t penetrates it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc, erfcinv, erfinv

from .errors import ConfigError, VanishingMass

SQRT2 = np.sqrt(2.0)
VANISHING_TAIL_SIGMAS = 12.0  # beyond this truncation depth erf arithmetic underflows


@dataclass(frozen=True)
class TruncatedGaussian:
    mu: float  # prior mean, seconds
    sigma: float  # prior std, seconds
    t_now: float  # truncation point: failure has not occurred by here

    def __post_init__(self):
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")


def _surviving_mass(tg: TruncatedGaussian) -> float:
    z = (tg.t_now - tg.mu) / tg.sigma
    if z > VANISHING_TAIL_SIGMAS:
        raise VanishingMass(
            f"truncation at {z:.1f} sigma above the mean leaves no representable mass"
        )
    return 0.5 * erfc(z / SQRT2)


def posterior_pdf(tg: TruncatedGaussian, tau):
    """Density of the truncated Gaussian at tau (scalar or array)."""
    mass = _surviving_mass(tg)
    tau = np.asarray(tau, dtype=float)
    z = (tau - tg.mu) / tg.sigma
    dens = np.exp(-0.5 * z * z) / (tg.sigma * np.sqrt(2.0 * np.pi) * mass)
    dens = np.where(tau < tg.t_now, 0.0, dens)
    return float(dens) if dens.ndim == 0 else dens


@dataclass(frozen=True)
class Prediction:
    t: float  # measurement instant, seconds
    tau_pred: float  # posterior mode
    tau_minus: float
    tau_plus: float
    alpha: float  # confidence level held by [tau_minus, tau_plus]
    mu: float  # prior mean
    sigma: float  # prior std
    kappa: float
    gamma: float
    nu: float
    overdue: bool = False  # truncation consumed all mass; bounds degenerate at t


def predict_and_interval(tg: TruncatedGaussian, alpha: float = 0.95) -> Prediction:
    """Posterior mode and the confidence interval holding mass alpha.

    kappa = erf((mu - t)/(sqrt(2) sigma)) measures how far the truncation sits
    below the mean. While t <= mu - gamma*sigma the interval is the symmetric
    mu -/+ gamma*sigma with gamma = sqrt(2)*erfinv(alpha*(1+kappa)/2); once t
    penetrates it, the interval clamps to [t, mu + nu*sigma] with
    nu = sqrt(2)*erfinv(alpha*(1+kappa) - kappa). Either way the enclosed
    posterior mass is exactly alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    _surviving_mass(tg)  # raises VanishingMass when truncation is too deep
    mu, sigma, t = tg.mu, tg.sigma, tg.t_now
    z = (mu - t) / (SQRT2 * sigma)
    kappa = float(erf(z))
    w = float(erfc(-z))  # 1 + kappa, stable when t >> mu
    gamma = float(SQRT2 * erfinv(0.5 * alpha * w))
    nu = float(SQRT2 * erfcinv(w * (1.0 - alpha)))  # = erfinv(alpha*(1+kappa) - kappa)
    tau_pred = max(mu, t)
    if t <= mu - gamma * sigma:
        lo, hi = mu - gamma * sigma, mu + gamma * sigma
    else:
        lo, hi = t, mu + nu * sigma
    return Prediction(
        t=t,
        tau_pred=tau_pred,
        tau_minus=lo,
        tau_plus=hi,
        alpha=alpha,
        mu=mu,
        sigma=sigma,
        kappa=kappa,
        gamma=gamma,
        nu=nu,
    )


def overdue_prediction(t: float, mu: float, sigma: float, alpha: float) -> Prediction:
    """Alarm record emitted when the posterior mass has entirely vanished below t."""
    return Prediction(
        t=t,
        tau_pred=t,
        tau_minus=t,
        tau_plus=t,
        alpha=alpha,
        mu=mu,
        sigma=sigma,
        kappa=-1.0,
        gamma=0.0,
        nu=float("inf"),
        overdue=True,
    )


def write_predictions_csv(path, predictions) -> None:
    """One row per prediction instant: t,tau_pred,tau_minus,tau_plus,mu,sigma,alpha."""
    with open(path, "w") as fh:
        fh.write("t,tau_pred,tau_minus,tau_plus,mu,sigma,alpha\n")
        for p in predictions:
            cells = (p.t, p.tau_pred, p.tau_minus, p.tau_plus, p.mu, p.sigma, p.alpha)
            fh.write(",".join(repr(float(c)) for c in cells) + "\n")
