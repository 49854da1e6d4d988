"""End-to-end orchestration: dataset synthesis, hybrid training, streaming
prediction, and the accuracy/earliness/stability evaluation.

Each dataset sample is a randomly drawn loading recipe whose synthesis
duration is adapted (probe, then margin) until the ground-truth failure time
lands inside the recorded signal, plus the causally streamed feature
trajectory sampled at f_s. The hybrid model is a network fitted on the
training split feeding a 1-D GP fitted on the cross-validation split's
embeddings; streaming predictions gate the GP's Gaussian through the
survival-to-t truncation.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .ann import AnnModel, TrainConfig, ann_train, fit_normalization
from .errors import (
    ConfigError,
    DegenerateSplit,
    EmptyResults,
    GenerationFailed,
    NoDamage,
    VanishingMass,
    WindowUncovered,
)
from .fatigue import EXCURSION_FILTER_FRACTION, MaterialParams, failure_time
from .features import (
    DEFAULT_FEATURE_RANGES,
    FeatureRanges,
    StreamState,
    build_features,
)
from .gpr import GprModel, gpr_fit
from .posterior import (
    Prediction,
    TruncatedGaussian,
    overdue_prediction,
    predict_and_interval,
)
from .signal_gen import (
    PsdSpec,
    Signal,
    SignalRecipe,
    Table1Ranges,
    sample_recipe,
    synthesize_signal,
    write_signal_csv,
)

ACCURATE = "accurate"
CONSERVATIVE = "conservative"
NONCONSERVATIVE = "nonconservative"


@dataclass(frozen=True)
class GenerationConfig:
    """Knobs for dataset synthesis; none of them are ground truth."""

    n_components: int = 20
    sample_rate: float = 4000.0  # Hz, 4x the largest constructing frequency
    probe_duration: float = 4.0  # seconds used to estimate the damage rate
    margin: float = 1.3  # synthesis duration = margin * estimated failure time
    tau_min: float = 10.0  # accepted ground-truth failure-time window, seconds
    tau_max: float = 200.0
    f_s: float = 1.0  # feature/prediction sampling rate, Hz
    rho: float = 0.9  # percentile for the amplitude feature
    noise_frac: float = 0.025  # measurement-noise fraction of each feature range
    no_damage_cap: int = 10  # redraws allowed for zero-damage recipes
    attempt_cap: int = 60  # total redraws per dataset slot
    extend_retries: int = 4  # duration extensions when the margin was short
    require_crossing: bool = True  # False: keep the probe-length record and the
    # rate-extrapolated failure time (no adaptive extension, no upper cap on
    # observing the crossing); needed when failure times exceed what can be
    # recorded

    def to_dict(self) -> dict:
        return {
            "n_components": self.n_components,
            "sample_rate": self.sample_rate,
            "probe_duration": self.probe_duration,
            "margin": self.margin,
            "tau_min": self.tau_min,
            "tau_max": self.tau_max,
            "f_s": self.f_s,
            "rho": self.rho,
            "noise_frac": self.noise_frac,
            "no_damage_cap": self.no_damage_cap,
            "attempt_cap": self.attempt_cap,
            "extend_retries": self.extend_retries,
            "require_crossing": self.require_crossing,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationConfig":
        return cls(**d)


@dataclass
class DatasetSample:
    sample_id: int
    recipe: SignalRecipe
    material: MaterialParams
    x_m_true: float
    tau_gt: float
    extrapolated: bool
    trajectory_t: np.ndarray
    trajectory_features: np.ndarray  # rows (A, b, sigma_uts, x_bar, xi)

    def to_dict(self) -> dict:
        return {
            "id": self.sample_id,
            "recipe": self.recipe.to_dict(),
            "material": {
                "A": self.material.A,
                "b": self.material.b,
                "sigma_uts": self.material.sigma_uts,
            },
            "x_m": self.x_m_true,
            "tau_gt": self.tau_gt,
            "extrapolated": self.extrapolated,
            "trajectory": {
                "t": self.trajectory_t.tolist(),
                "features": self.trajectory_features.tolist(),
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSample":
        m = d["material"]
        return cls(
            sample_id=int(d["id"]),
            recipe=SignalRecipe.from_dict(d["recipe"]),
            material=MaterialParams(A=m["A"], b=m["b"], sigma_uts=m["sigma_uts"]),
            x_m_true=float(d["x_m"]),
            tau_gt=float(d["tau_gt"]),
            extrapolated=bool(d["extrapolated"]),
            trajectory_t=np.array(d["trajectory"]["t"], dtype=float),
            trajectory_features=np.array(d["trajectory"]["features"], dtype=float),
        )


@dataclass
class Dataset:
    samples: list
    master_seed: int
    config: GenerationConfig
    ranges: Table1Ranges
    psd: PsdSpec
    feature_widths: np.ndarray | None = None  # realized ranges scaling the noise

    def to_manifest(self) -> dict:
        return {
            "schema": "dataset/1",
            "master_seed": self.master_seed,
            "config": self.config.to_dict(),
            "ranges": self.ranges.to_dict(),
            "psd": {"mu_g": self.psd.mu_g, "sigma_g": self.psd.sigma_g},
            "feature_widths": (
                self.feature_widths.tolist() if self.feature_widths is not None else None
            ),
            "samples": [s.to_dict() for s in self.samples],
        }

    @classmethod
    def from_manifest(cls, d: dict) -> "Dataset":
        if d.get("schema") != "dataset/1":
            raise ConfigError(f"unsupported dataset schema: {d.get('schema')!r}")
        widths = d.get("feature_widths")
        return cls(
            samples=[DatasetSample.from_dict(s) for s in d["samples"]],
            master_seed=int(d["master_seed"]),
            config=GenerationConfig.from_dict(d["config"]),
            ranges=Table1Ranges.from_dict(d["ranges"]),
            psd=PsdSpec(d["psd"]["mu_g"], d["psd"]["sigma_g"]),
            feature_widths=np.array(widths, dtype=float) if widths is not None else None,
        )

    def save(self, out_dir, write_signals: bool = True) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
            json.dump(self.to_manifest(), fh, indent=2, sort_keys=True)
        if write_signals:
            sig_dir = os.path.join(out_dir, "signals")
            os.makedirs(sig_dir, exist_ok=True)
            for s in self.samples:
                sig = synthesize_signal(s.recipe)
                write_signal_csv(os.path.join(sig_dir, f"sample_{s.sample_id:04d}.csv"), sig)

    @classmethod
    def load(cls, path) -> "Dataset":
        if os.path.isdir(path):
            path = os.path.join(path, "manifest.json")
        with open(path) as fh:
            return cls.from_manifest(json.load(fh))


def _slot_seed(master_seed: int, *key) -> int:
    """Deterministic child seed independent of draw order."""
    ss = np.random.SeedSequence(entropy=[int(master_seed)] + [int(k) for k in key])
    return int(ss.generate_state(1, np.uint64)[0])


def iter_stream_instants(signal: Signal, f_s: float, eps: float):
    """Feed the signal causally, yielding (state, t) at each instant k/f_s."""
    state = StreamState(signal.sample_rate, eps=eps)
    n = len(signal.samples)
    fs = signal.sample_rate
    prev = -1
    k = 1
    while True:
        idx = int(np.floor(k / f_s * fs + 1e-9))
        if idx >= n:
            break
        state.extend(signal.samples[prev + 1 : idx + 1])
        yield state, state.t
        prev = idx
        k += 1


def _stream_trajectory(signal, material, rho, f_s):
    """Noise-free causal feature rows at each instant with at least one extremum."""
    eps = EXCURSION_FILTER_FRACTION * material.sigma_uts
    times, rows = [], []
    for state, t in iter_stream_instants(signal, f_s, eps):
        if state.n_extrema == 0:
            continue
        fv = build_features(state, material, rho=rho)
        times.append(t)
        rows.append(fv.as_array())
    return np.asarray(times), np.asarray(rows)


def generate_sample(
    sample_id: int,
    master_seed: int,
    config: GenerationConfig,
    ranges: Table1Ranges,
    psd: PsdSpec,
) -> DatasetSample:
    """Draw recipes until one fails inside the accepted time window.

    A short probe estimates the stationary damage rate; the recipe is then
    re-synthesized at margin * estimated failure time so the damage crossing
    is observed rather than extrapolated. The stored trajectory is noise
    free; measurement noise is injected dataset-wide afterwards, once the
    realized feature ranges are known.
    """
    no_damage = 0
    for attempt in range(config.attempt_cap):
        seed = _slot_seed(master_seed, sample_id, attempt, 0)
        recipe, material = sample_recipe(
            ranges,
            seed,
            n_components=config.n_components,
            duration=config.probe_duration,
            sample_rate=config.sample_rate,
            psd=psd,
        )
        probe = synthesize_signal(recipe)
        try:
            est = failure_time(probe, material, recipe.x_m)
        except NoDamage:
            no_damage += 1
            if no_damage >= config.no_damage_cap:
                raise GenerationFailed(
                    f"slot {sample_id}: {no_damage} zero-damage draws in a row"
                )
            continue
        tau_hat = est.tau
        if not (config.tau_min <= tau_hat <= config.tau_max):
            continue
        if not config.require_crossing:
            traj_t, traj_f = _stream_trajectory(probe, material, config.rho, config.f_s)
            if traj_t.size == 0:
                continue
            return DatasetSample(
                sample_id=sample_id,
                recipe=recipe,
                material=material,
                x_m_true=recipe.x_m,
                tau_gt=tau_hat,
                extrapolated=est.extrapolated,
                trajectory_t=traj_t,
                trajectory_features=traj_f,
            )
        # the probe's normalization peak grows with duration, so tau_hat is
        # biased low; re-estimate from each longer synthesis until the
        # damage crossing is actually observed
        duration = config.margin * tau_hat
        result = None
        for _ in range(config.extend_retries):
            signal = synthesize_signal(recipe.with_duration(duration))
            ft = failure_time(signal, material, recipe.x_m)
            if not ft.extrapolated:
                result = (signal, ft, duration)
                break
            tau_hat = ft.tau  # rate-based estimate from the longer record
            if tau_hat > 1.5 * config.tau_max:
                break
            duration = config.margin * tau_hat
        if result is None:
            continue
        signal, ft, duration = result
        if not (config.tau_min <= ft.tau <= 1.2 * config.tau_max):
            continue
        traj_t, traj_f = _stream_trajectory(signal, material, config.rho, config.f_s)
        if traj_t.size == 0 or traj_t[0] > ft.tau:
            continue
        return DatasetSample(
            sample_id=sample_id,
            recipe=recipe.with_duration(duration),
            material=material,
            x_m_true=recipe.x_m,
            tau_gt=ft.tau,
            extrapolated=ft.extrapolated,
            trajectory_t=traj_t,
            trajectory_features=traj_f,
        )
    raise GenerationFailed(
        f"slot {sample_id}: no acceptable draw within {config.attempt_cap} attempts"
    )


_NOISE_STREAM_TAG = 982_451_653  # namespaces the noise seeds away from attempt seeds


def generate_dataset(
    n: int,
    ranges: Table1Ranges | None = None,
    psd: PsdSpec | None = None,
    rng_seed: int = 0,
    config: GenerationConfig = GenerationConfig(),
) -> Dataset:
    """Generate n samples with ground-truth failure times and feature trajectories.

    Measurement noise (noise_frac of each feature's realized range across the
    dataset, drawn per emitted vector) is added to every trajectory in a
    second pass, once the ranges are known.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if ranges is None:
        ranges = Table1Ranges()
    if psd is None:
        psd = PsdSpec(mu_g=150.0, sigma_g=500.0)
    samples = [generate_sample(i, rng_seed, config, ranges, psd) for i in range(n)]
    all_rows = np.vstack([s.trajectory_features for s in samples])
    widths = all_rows.max(axis=0) - all_rows.min(axis=0)
    if config.noise_frac > 0.0:
        for s in samples:
            noise_rng = np.random.default_rng(
                _slot_seed(rng_seed, _NOISE_STREAM_TAG, s.sample_id)
            )
            s.trajectory_features = s.trajectory_features + noise_rng.normal(
                size=s.trajectory_features.shape
            ) * (config.noise_frac * widths)
    return Dataset(
        samples=samples,
        master_seed=rng_seed,
        config=config,
        ranges=ranges,
        psd=psd,
        feature_widths=widths,
    )


def split_dataset(samples, ratios=(0.6, 0.2, 0.2), rng_seed: int = 0):
    """Shuffled disjoint (train, cv, test) partition; rounding remainder goes to train."""
    r = tuple(float(x) for x in ratios)
    if len(r) != 3 or any(x < 0 for x in r) or abs(sum(r) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must be 3 non-negative numbers summing to 1, got {ratios}")
    n = len(samples)
    n_cv = round(r[1] * n)
    n_test = round(r[2] * n)
    n_train = n - n_cv - n_test
    if min(n_train, n_cv, n_test) < 1:
        raise DegenerateSplit(f"split {ratios} of {n} samples leaves an empty part")
    rng = np.random.default_rng(rng_seed)
    order = rng.permutation(n)
    train = [samples[i] for i in order[:n_train]]
    cv = [samples[i] for i in order[n_train : n_train + n_cv]]
    test = [samples[i] for i in order[n_train + n_cv :]]
    return train, cv, test


# --- the hybrid model ---


@dataclass
class HybridModel:
    ann: AnnModel
    gpr: GprModel  # fitted on standardized embeddings/targets (the ann normalization)
    rho: float
    f_s: float
    train_instant_fraction: float = 1.0

    def predict_prior(self, features_raw: np.ndarray):
        """Gaussian failure-time belief (mu, sigma in seconds) for raw feature rows.

        The spread includes the fitted observation-noise variance: it is the
        belief over actual failure times, not over the latent regression curve.
        """
        eta_sec = self.ann.predict(features_raw)
        eta_z = self.ann.norm.encode_target(eta_sec)
        mu_z, var_z = self.gpr.predict(eta_z, include_noise=True)
        mu = self.ann.norm.decode_target(mu_z)
        sigma = np.sqrt(var_z) * self.ann.norm.target_std
        return mu, sigma

    def to_dict(self) -> dict:
        return {
            "schema": "hybrid/1",
            "rho": self.rho,
            "f_s": self.f_s,
            "train_instant_fraction": self.train_instant_fraction,
            "ann": self.ann.to_dict(),
            "gpr": self.gpr.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HybridModel":
        if d.get("schema") != "hybrid/1":
            raise ConfigError(f"unsupported hybrid schema: {d.get('schema')!r}")
        return cls(
            ann=AnnModel.from_dict(d["ann"]),
            gpr=GprModel.from_dict(d["gpr"]),
            rho=float(d["rho"]),
            f_s=float(d["f_s"]),
            train_instant_fraction=float(d["train_instant_fraction"]),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "HybridModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class TrainArtifacts:
    history: dict
    cv_eta: np.ndarray  # seconds
    cv_tau: np.ndarray  # seconds


def _row_at_fraction(sample: DatasetSample, fraction: float) -> np.ndarray:
    """Feature row at the last instant not past fraction * tau_gt."""
    target = fraction * sample.tau_gt
    idx = int(np.searchsorted(sample.trajectory_t, target + 1e-12, side="right")) - 1
    idx = max(idx, 0)
    return sample.trajectory_features[idx]


def train_hybrid(
    train_samples,
    cv_samples,
    ann_config: TrainConfig = TrainConfig(),
    gpr_restarts: int = 8,
    gpr_seed: int = 0,
    train_instant_fraction: float = 1.0,
    rho: float = 0.9,
    f_s: float = 1.0,
    val_fraction: float = 0.15,
):
    """Fit the network on the training split, then the GP on CV embeddings.

    Early stopping uses a held-out slice of the training split; the CV split
    is reserved intact to condition the GP, so its targets never leak into
    the network fit. Returns (HybridModel, TrainArtifacts).
    """
    if len(train_samples) == 0 or len(cv_samples) == 0:
        raise DegenerateSplit("train and cv splits must be non-empty")
    u_train = np.array([_row_at_fraction(s, train_instant_fraction) for s in train_samples])
    y_train = np.array([s.tau_gt for s in train_samples])
    u_cv = np.array([_row_at_fraction(s, train_instant_fraction) for s in cv_samples])
    y_cv = np.array([s.tau_gt for s in cv_samples])

    norm = fit_normalization(u_train, y_train)
    uz = norm.encode_features(u_train)
    yz = norm.encode_target(y_train)

    rng = np.random.default_rng(ann_config.rng_seed)
    order = rng.permutation(len(u_train))
    n_val = max(1, int(round(val_fraction * len(u_train))))
    if len(u_train) - n_val < 1:
        raise DegenerateSplit("training split too small for an early-stopping slice")
    val_idx, fit_idx = order[:n_val], order[n_val:]
    params, history = ann_train(
        (uz[fit_idx], yz[fit_idx]), (uz[val_idx], yz[val_idx]), ann_config
    )
    ann_model = AnnModel(params=params, norm=norm)

    eta_cv = ann_model.predict(u_cv)
    gpr_model = gpr_fit(
        norm.encode_target(eta_cv), norm.encode_target(y_cv), restarts=gpr_restarts, rng_seed=gpr_seed
    )
    model = HybridModel(
        ann=ann_model,
        gpr=gpr_model,
        rho=rho,
        f_s=f_s,
        train_instant_fraction=train_instant_fraction,
    )
    return model, TrainArtifacts(history=history, cv_eta=eta_cv, cv_tau=y_cv)


def gp_posterior_curve(model: HybridModel, eta_grid_sec):
    """Posterior mean and spread (seconds) of the GP stage along an embedding grid."""
    eta_z = model.ann.norm.encode_target(np.asarray(eta_grid_sec, dtype=float))
    mu_z, var_z = model.gpr.predict(eta_z, include_noise=True)
    mu = model.ann.norm.decode_target(mu_z)
    sigma = np.sqrt(var_z) * model.ann.norm.target_std
    return mu, sigma


# --- streaming prediction and evaluation ---


@dataclass(frozen=True)
class EvalConfig:
    alpha: float = 0.95  # confidence level
    beta: float = 0.6  # earliness: evaluate at beta * tau_gt
    r: float = 0.75  # stability: containment must hold this fraction of the window
    f_s: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must be in (0, 1)")
        if not 0 < self.beta < 1:
            raise ConfigError("beta must be in (0, 1)")
        if not 0 < self.r <= 1:
            raise ConfigError("r must be in (0, 1]")


def stream_predict(
    model: HybridModel,
    signal: Signal,
    material: MaterialParams,
    alpha: float = 0.95,
    f_s: float | None = None,
    noise_frac: float = 0.0,
    rng: np.random.Generator | None = None,
    feature_ranges: FeatureRanges = DEFAULT_FEATURE_RANGES,
) -> list[Prediction]:
    """Causal predictions at each instant k/f_s over the measured signal.

    Instants before the first detected extremum emit nothing. When the
    truncation time has overrun the belief entirely (vanished mass), an
    overdue alarm record is emitted instead of an interval.
    """
    if f_s is None:
        f_s = model.f_s
    eps = EXCURSION_FILTER_FRACTION * material.sigma_uts
    out = []
    for state, t in iter_stream_instants(signal, f_s, eps):
        if state.n_extrema == 0:
            continue
        fv = build_features(
            state,
            material,
            rho=model.rho,
            noise_frac=noise_frac,
            rng=rng,
            ranges=feature_ranges,
        )
        mu_arr, sigma_arr = model.predict_prior(fv.as_array()[None, :])
        mu, sigma = float(mu_arr[0]), float(sigma_arr[0])
        try:
            pred = predict_and_interval(TruncatedGaussian(mu=mu, sigma=sigma, t_now=t), alpha)
        except VanishingMass:
            pred = overdue_prediction(t, mu, sigma, alpha)
        out.append(pred)
    return out


def evaluate_success(predictions, tau_gt: float, cfg: EvalConfig) -> str:
    """Classify one signal's prediction run as accurate/conservative/nonconservative.

    Accurate means the ground truth sat inside the interval for at least
    fraction r of the instants in the window [(1-r)*beta*tau_gt, beta*tau_gt].
    Otherwise the miss side at the beta checkpoint decides the class; if the
    checkpoint itself is contained, the majority miss side in the window does.
    """
    lo = (1.0 - cfg.r) * cfg.beta * tau_gt
    hi = cfg.beta * tau_gt
    window = [p for p in predictions if lo - 1e-9 <= p.t <= hi + 1e-9]
    if not window:
        raise WindowUncovered(
            f"no prediction instants inside [{lo:.3g}, {hi:.3g}] s (tau_gt={tau_gt:.3g})"
        )
    contained = [
        (not p.overdue) and p.tau_minus <= tau_gt <= p.tau_plus for p in window
    ]
    if np.mean(contained) >= cfg.r:
        return ACCURATE
    checkpoint = window[-1]
    if tau_gt > checkpoint.tau_plus:
        return CONSERVATIVE
    if tau_gt < checkpoint.tau_minus:
        return NONCONSERVATIVE
    over = sum(1 for p in window if tau_gt > p.tau_plus)
    under = sum(1 for p in window if tau_gt < p.tau_minus or p.overdue)
    return CONSERVATIVE if over >= under else NONCONSERVATIVE


@dataclass(frozen=True)
class EvalReport:
    total: int
    accurate: int
    conservative: int
    nonconservative: int

    @property
    def accuracy(self) -> float:
        return self.accurate / self.total

    def to_dict(self) -> dict:
        inaccurate = self.conservative + self.nonconservative
        return {
            "schema": "report/1",
            "total": self.total,
            "accurate": {"count": self.accurate, "fraction": self.accuracy},
            "inaccurate": {
                "count": inaccurate,
                "conservative": {
                    "count": self.conservative,
                    "fraction_of_inaccurate": (
                        self.conservative / inaccurate if inaccurate else 0.0
                    ),
                },
                "nonconservative": {
                    "count": self.nonconservative,
                    "fraction_of_inaccurate": (
                        self.nonconservative / inaccurate if inaccurate else 0.0
                    ),
                },
            },
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def aggregate_metrics(outcomes) -> EvalReport:
    """Tally per-signal outcomes into the accuracy report."""
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyResults("no outcomes to aggregate")
    bad = set(outcomes) - {ACCURATE, CONSERVATIVE, NONCONSERVATIVE}
    if bad:
        raise ConfigError(f"unknown outcome labels: {sorted(bad)}")
    return EvalReport(
        total=len(outcomes),
        accurate=outcomes.count(ACCURATE),
        conservative=outcomes.count(CONSERVATIVE),
        nonconservative=outcomes.count(NONCONSERVATIVE),
    )


@dataclass
class SampleEvaluation:
    sample_id: int
    tau_gt: float
    outcome: str
    calibration_contained: bool  # tau_gt inside the CI at t = 0.95*tau_gt
    predictions: list


def evaluate_dataset(
    model: HybridModel,
    samples,
    cfg: EvalConfig = EvalConfig(),
    keep_predictions: bool = False,
    calibration_fraction_of_life: float = 0.95,
):
    """Stream every sample's regenerated signal and classify the outcome.

    Returns (EvalReport, list of SampleEvaluation). Prediction lists are
    retained only when keep_predictions is set (they are bulky).
    """
    details = []
    outcomes = []
    for s in samples:
        signal = synthesize_signal(s.recipe)
        preds = stream_predict(model, signal, s.material, alpha=cfg.alpha, f_s=cfg.f_s)
        outcome = evaluate_success(preds, s.tau_gt, cfg)
        outcomes.append(outcome)
        t_cal = calibration_fraction_of_life * s.tau_gt
        cal_preds = [p for p in preds if p.t <= t_cal + 1e-9]
        contained = False
        if cal_preds:
            p = cal_preds[-1]
            contained = (not p.overdue) and p.tau_minus <= s.tau_gt <= p.tau_plus
        details.append(
            SampleEvaluation(
                sample_id=s.sample_id,
                tau_gt=s.tau_gt,
                outcome=outcome,
                calibration_contained=contained,
                predictions=preds if keep_predictions else [],
            )
        )
    return aggregate_metrics(outcomes), details


# --- percentile tuning sweep ---


def tune_rho(samples, rho_grid, rng_seed: int = 0, val_fraction: float = 0.3):
    """Score each candidate percentile with a lightweight end-of-life regressor.

    For every sample the signal is regenerated once and its extrema reused
    across the grid; a ridge fit on standardized features against log
    failure time scores each rho on a held-out slice. Returns
    (best_rho, [(rho, val_mse), ...]) with the grid deduplicated and sorted.
    """
    grid = sorted(set(float(r) for r in rho_grid))
    if not grid or not samples:
        raise ConfigError("need a non-empty subset and rho grid")
    from .features import percentile_amplitude

    per_sample = []
    for s in samples:
        signal = synthesize_signal(s.recipe)
        eps = EXCURSION_FILTER_FRACTION * s.material.sigma_uts
        state = StreamState(signal.sample_rate, eps=eps)
        state.extend(signal.samples)
        per_sample.append(
            (
                s.material.A,
                s.material.b,
                s.material.sigma_uts,
                state.x_bar,
                state.extrema_shifted(),
                s.tau_gt,
            )
        )
    y = np.log(np.array([row[5] for row in per_sample]))
    n = len(per_sample)
    rng = np.random.default_rng(rng_seed)
    order = rng.permutation(n)
    n_val = max(1, int(round(val_fraction * n)))
    if n - n_val < 2:
        raise ConfigError("subset too small for a train/validation split")
    val_idx, fit_idx = order[:n_val], order[n_val:]

    table = []
    for rho in grid:
        u = np.array(
            [[a, b, uts, xb, percentile_amplitude(ext, rho)] for a, b, uts, xb, ext, _ in per_sample]
        )
        mean = u[fit_idx].mean(axis=0)
        std = u[fit_idx].std(axis=0)
        std = np.where(std > 0, std, 1.0)
        z = (u - mean) / std
        z = np.hstack([z, np.ones((n, 1))])
        zf = z[fit_idx]
        w = np.linalg.solve(
            zf.T @ zf + 1e-3 * np.eye(z.shape[1]), zf.T @ y[fit_idx]
        )
        resid = z[val_idx] @ w - y[val_idx]
        table.append((rho, float(np.mean(resid**2))))
    best = min(table, key=lambda row: row[1])[0]
    return best, table
