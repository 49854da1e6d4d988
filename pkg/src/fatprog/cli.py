"""Command-line interface.

Subcommands cover the whole workflow: synthesize a dataset with ground-truth
failure times (gen-data), fit the hybrid predictor (train), replay a signal
through streaming prediction (stream), score a dataset (evaluate), rebuild a
signal from a peak-valley file (import-pv), and sweep the amplitude
percentile (tune-rho).

Exit codes: 0 success, 2 invalid configuration, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import pipeline
from .ann import TrainConfig
from .errors import (
    ConfigError,
    DegenerateSpectrum,
    DegenerateSplit,
    EmptyBatch,
    EmptyExtrema,
    EmptyRecipe,
    EmptyResults,
    EmptySet,
    FatprogError,
    GenerationFailed,
    MeanExceedsUts,
    NoDamage,
    NonAlternatingSequence,
    NyquistViolation,
    RhoOutOfRange,
    SingularKernel,
    TooShort,
    VanishingMass,
    WindowUncovered,
)
from .fatigue import MaterialParams
from .posterior import write_predictions_csv
from .signal_gen import (
    PsdSpec,
    Table1Ranges,
    import_peak_valley,
    read_peak_valley_file,
    read_signal_csv,
    write_signal_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_CONFIG_ERRORS = (
    ConfigError,
    RhoOutOfRange,
    NyquistViolation,
    EmptyRecipe,
)
_DATA_ERRORS = (
    NonAlternatingSequence,
    TooShort,
    EmptyExtrema,
    EmptyBatch,
    EmptySet,
    DegenerateSplit,
    WindowUncovered,
    EmptyResults,
    FileNotFoundError,
    IsADirectoryError,
    json.JSONDecodeError,
)
_NUMERIC_ERRORS = (
    MeanExceedsUts,
    NoDamage,
    DegenerateSpectrum,
    SingularKernel,
    VanishingMass,
    GenerationFailed,
)


def _parse_triplet(text, name):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"{name} must be three comma-separated numbers, got {text!r}")
    return tuple(parts)


def _parse_grid(text):
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3:
            raise ConfigError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = parts
        if step <= 0 or stop < start:
            raise ConfigError(f"bad grid bounds {text!r}")
        return list(np.arange(start, stop + 1e-12, step))
    return [float(p) for p in text.split(",")]


def _load_gen_config(path):
    ranges, psd, gen = Table1Ranges(), None, pipeline.GenerationConfig()
    if path:
        with open(path) as fh:
            raw = json.load(fh)
        if "ranges" in raw:
            ranges = Table1Ranges.from_dict(raw["ranges"])
        if "psd" in raw:
            psd = PsdSpec(raw["psd"]["mu_g"], raw["psd"]["sigma_g"])
        if "generation" in raw:
            gen = pipeline.GenerationConfig.from_dict(raw["generation"])
    return ranges, psd, gen


def _write_meta(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def _cmd_gen_data(args):
    ranges, psd, gen = _load_gen_config(args.config)
    dataset = pipeline.generate_dataset(
        args.n, ranges=ranges, psd=psd, rng_seed=args.seed, config=gen
    )
    dataset.save(args.out, write_signals=not args.no_signals)
    print(f"wrote {len(dataset.samples)} samples to {args.out}")
    return EXIT_OK


def _cmd_train(args):
    dataset = pipeline.Dataset.load(args.data)
    ratios = _parse_triplet(args.split, "--split")
    train, cv, test = pipeline.split_dataset(dataset.samples, ratios, rng_seed=args.seed)
    ann_cfg = TrainConfig(
        lam=args.l2,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        max_epochs=args.epochs,
        rng_seed=args.seed,
    )
    model, artifacts = pipeline.train_hybrid(
        train,
        cv,
        ann_config=ann_cfg,
        gpr_restarts=args.gpr_restarts,
        gpr_seed=args.seed,
        train_instant_fraction=args.train_instant_fraction,
        rho=dataset.config.rho,
        f_s=dataset.config.f_s,
    )
    model.save(args.out)
    stem, _ = os.path.splitext(args.out)

    hist = artifacts.history
    with open(stem + "_training_loss.csv", "w") as fh:
        fh.write("epoch,train_loss,val_loss,lr\n")
        for i, (tr, va, lr) in enumerate(
            zip(hist["train_loss"], hist["val_loss"], hist["lr"])
        ):
            fh.write(f"{i},{tr!r},{va!r},{lr!r}\n")
    with open(stem + "_cv_embedding.csv", "w") as fh:
        fh.write("eta,tau_gt\n")
        for e, t in zip(artifacts.cv_eta, artifacts.cv_tau):
            fh.write(f"{float(e)!r},{float(t)!r}\n")
    grid = np.linspace(artifacts.cv_eta.min(), artifacts.cv_eta.max(), 200)
    pad = 0.1 * (grid[-1] - grid[0] if grid[-1] > grid[0] else 1.0)
    grid = np.linspace(grid[0] - pad, grid[-1] + pad, 200)
    mu, sigma = pipeline.gp_posterior_curve(model, grid)
    with open(stem + "_gp_posterior.csv", "w") as fh:
        fh.write("eta,mu,sigma\n")
        for e, m, s in zip(grid, mu, sigma):
            fh.write(f"{float(e)!r},{float(m)!r},{float(s)!r}\n")
    _write_meta(
        stem + ".meta.json",
        {
            "command": "train",
            "data": args.data,
            "split": list(ratios),
            "seed": args.seed,
            "sizes": {"train": len(train), "cv": len(cv), "test": len(test)},
            "ann": {
                "lam": ann_cfg.lam,
                "learning_rate": ann_cfg.learning_rate,
                "batch_size": ann_cfg.batch_size,
                "max_epochs": ann_cfg.max_epochs,
            },
            "gpr_restarts": args.gpr_restarts,
            "train_instant_fraction": args.train_instant_fraction,
        },
    )
    print(f"wrote model to {args.out} (train/cv/test = {len(train)}/{len(cv)}/{len(test)})")
    return EXIT_OK


def _cmd_stream(args):
    model = pipeline.HybridModel.load(args.model)
    signal = read_signal_csv(args.signal)
    a, b, uts = _parse_triplet(args.material, "--material")
    material = MaterialParams(A=a, b=b, sigma_uts=uts)
    preds = pipeline.stream_predict(model, signal, material, alpha=args.alpha, f_s=args.fs)
    write_predictions_csv(args.out, preds)
    print(f"wrote {len(preds)} predictions to {args.out}")
    return EXIT_OK


def _cmd_evaluate(args):
    model = pipeline.HybridModel.load(args.model)
    dataset = pipeline.Dataset.load(args.data)
    samples = dataset.samples
    if args.split:
        ratios = _parse_triplet(args.split, "--split")
        _, _, samples = pipeline.split_dataset(samples, ratios, rng_seed=args.seed)
    cfg = pipeline.EvalConfig(alpha=args.alpha, beta=args.beta, r=args.r, f_s=model.f_s)
    report, details = pipeline.evaluate_dataset(model, samples, cfg)
    payload = report.to_dict()
    payload["calibration_contained_fraction"] = float(
        np.mean([d.calibration_contained for d in details])
    )
    payload["config"] = {
        "alpha": cfg.alpha,
        "beta": cfg.beta,
        "r": cfg.r,
        "seed": args.seed,
        "split": args.split,
        "n_evaluated": len(samples),
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    print(
        f"accuracy {report.accuracy:.1%} ({report.accurate}/{report.total}); "
        f"conservative {report.conservative}, nonconservative {report.nonconservative}"
    )
    return EXIT_OK


def _cmd_import_pv(args):
    seq = read_peak_valley_file(args.file, scale=args.scale)
    signal = import_peak_valley(seq, f_max=args.fmax, oversample=args.oversample, k_t=args.kt)
    write_signal_csv(args.out, signal)
    print(f"wrote {len(signal.samples)} samples at {signal.sample_rate} Hz to {args.out}")
    return EXIT_OK


def _cmd_tune_rho(args):
    dataset = pipeline.Dataset.load(args.data)
    samples = dataset.samples
    if args.subset and args.subset < len(samples):
        rng = np.random.default_rng(args.seed)
        idx = rng.choice(len(samples), size=args.subset, replace=False)
        samples = [samples[i] for i in sorted(idx)]
    grid = _parse_grid(args.grid)
    best, table = pipeline.tune_rho(samples, grid, rng_seed=args.seed)
    with open(args.out, "w") as fh:
        fh.write("rho,val_mse\n")
        for rho, score in table:
            fh.write(f"{rho!r},{score!r}\n")
    _write_meta(
        os.path.splitext(args.out)[0] + ".meta.json",
        {"command": "tune-rho", "data": args.data, "grid": grid, "seed": args.seed,
         "subset": len(samples), "best_rho": best},
    )
    print(f"best rho = {best}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fatprog",
        description="Probabilistic fatigue failure-time prognosis toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="synthesize a dataset with ground-truth failure times")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="JSON with ranges/psd/generation overrides")
    p.add_argument("--out", required=True)
    p.add_argument("--no-signals", action="store_true", help="skip per-sample signal CSVs")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="fit the hybrid predictor on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="0.6,0.2,0.2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--gpr-restarts", type=int, default=8)
    p.add_argument("--train-instant-fraction", type=float, default=1.0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("stream", help="replay a signal through streaming prediction")
    p.add_argument("--model", required=True)
    p.add_argument("--signal", required=True)
    p.add_argument("--material", required=True, help="A,b,sigma_uts")
    p.add_argument("--alpha", type=float, default=0.95)
    p.add_argument("--fs", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stream)

    p = sub.add_parser("evaluate", help="score streaming predictions over a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, default=0.95)
    p.add_argument("--beta", type=float, default=0.6)
    p.add_argument("--r", type=float, default=0.75)
    p.add_argument("--split", default=None, help="evaluate only the test part of this split")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("import-pv", help="rebuild a signal from a peak-valley file")
    p.add_argument("--file", required=True)
    p.add_argument("--fmax", type=float, required=True)
    p.add_argument("--kt", type=float, default=1.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--oversample", type=float, default=10.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_import_pv)

    p = sub.add_parser("tune-rho", help="sweep the amplitude percentile")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", default="0.5:0.99:0.05")
    p.add_argument("--subset", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_tune_rho)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FatprogError as exc:  # anything else package-specific counts as data
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
