"""Signal synthesis and peak-valley ingestion."""

import numpy as np
import pytest

import fatprog as fp
from fatprog.errors import (
    ConfigError,
    EmptyRecipe,
    NonAlternatingSequence,
    NyquistViolation,
    TooShort,
)
from fatprog.signal_gen import read_signal_csv, write_signal_csv


def make_recipe(**overrides):
    base = dict(
        psd=fp.PsdSpec(150.0, 500.0),
        n_components=8,
        frequencies=np.linspace(40.0, 400.0, 8),
        phases=np.linspace(0.1, 5.9, 8),
        x_m=50.0,
        k_s=0.5,
        sigma_uts=500.0,
        duration=2.0,
        sample_rate=2000.0,
        rng_seed=1,
    )
    base.update(overrides)
    return fp.SignalRecipe(**base)


class TestGaussianPsd:
    def test_peak_value(self):
        spec = fp.PsdSpec(mu_g=500.0, sigma_g=20.0)
        assert fp.gaussian_psd_value(500.0, spec) == pytest.approx(
            1.0 / (np.sqrt(2 * np.pi) * 20.0), rel=1e-12
        )
        assert fp.gaussian_psd_value(500.0, spec) == pytest.approx(0.019947, rel=1e-4)

    def test_one_sigma_ratio(self):
        spec = fp.PsdSpec(mu_g=500.0, sigma_g=20.0)
        peak = fp.gaussian_psd_value(500.0, spec)
        assert fp.gaussian_psd_value(520.0, spec) == pytest.approx(peak * np.exp(-0.5), rel=1e-12)
        assert fp.gaussian_psd_value(480.0, spec) == pytest.approx(peak * np.exp(-0.5), rel=1e-12)

    def test_dataset_spec_is_flat_around_peak(self):
        # the wide sigma_g makes the density nearly constant across the
        # monotone band around its peak
        spec = fp.PsdSpec(mu_g=150.0, sigma_g=500.0)
        f = np.linspace(0.0, 2 * spec.mu_g, 101)
        vals = fp.gaussian_psd_value(f, spec)
        assert (vals.max() - vals.min()) / vals.max() < 0.05


class TestSynthesize:
    def test_single_component_is_pure_cosine_with_exact_peak(self):
        rec = make_recipe(
            n_components=1, frequencies=[25.0], phases=[0.7], x_m=0.0, k_s=0.2, sigma_uts=500.0
        )
        sig = fp.synthesize_signal(rec)
        assert np.max(np.abs(sig.samples)) == rec.envelope == 100.0
        # normalized carrier is a unit cosine
        t = sig.times()
        expected = 100.0 * np.cos(2 * np.pi * 25.0 * t + 0.7) / np.max(
            np.abs(np.cos(2 * np.pi * 25.0 * t + 0.7))
        )
        assert np.allclose(sig.samples, expected, atol=1e-9)

    def test_envelope_bound_with_equality_somewhere(self):
        rec = make_recipe(x_m=50.0, k_s=0.4, sigma_uts=500.0)
        sig = fp.synthesize_signal(rec)
        env = rec.envelope
        dev = np.abs(sig.samples - rec.x_m)
        assert np.all(dev <= env + 1e-12)
        assert np.max(dev) == env
        assert sig.samples.max() <= rec.x_m + env
        assert sig.samples.min() >= rec.x_m - env

    def test_determinism(self):
        a = fp.synthesize_signal(make_recipe())
        b = fp.synthesize_signal(make_recipe())
        assert np.array_equal(a.samples, b.samples)

    def test_long_duration_mean_approaches_x_m(self):
        rec, _ = fp.sample_recipe(fp.Table1Ranges(), rng_seed=123, duration=100.0)
        sig = fp.synthesize_signal(rec)
        # cosine terms average out over many periods
        assert np.mean(sig.samples) == pytest.approx(rec.x_m, abs=0.02 * max(abs(rec.x_m), 1.0))

    def test_empty_recipe_rejected(self):
        with pytest.raises((EmptyRecipe, ConfigError)):
            fp.synthesize_signal(make_recipe(n_components=0, frequencies=[], phases=[]))

    def test_nyquist_violation(self):
        rec = make_recipe(frequencies=np.linspace(40.0, 1500.0, 8))
        with pytest.raises(NyquistViolation):
            fp.synthesize_signal(rec)

    def test_psd_consistency_spectral_centroid(self):
        # Welch centroid of a long signal vs the power-weighted component centroid
        rec, _ = fp.sample_recipe(fp.Table1Ranges(), rng_seed=42, duration=60.0)
        sig = fp.synthesize_signal(rec)
        summary = fp.welch_moments(sig)
        weights = 2.0 * fp.gaussian_psd_value(rec.frequencies, rec.psd)  # amplitude^2 weights
        centroid = np.sum(weights * rec.frequencies) / np.sum(weights)
        assert summary.m1 / summary.m0 == pytest.approx(centroid, rel=0.10)


class TestSampleRecipe:
    def test_ranges_respected(self):
        ranges = fp.Table1Ranges()
        rng_draws = [fp.sample_recipe(ranges, seed) for seed in range(300)]
        for rec, mat in rng_draws:
            assert ranges.A[0] <= mat.A <= ranges.A[1]
            assert ranges.b[0] <= mat.b <= ranges.b[1]
            assert ranges.sigma_uts[0] <= mat.sigma_uts <= ranges.sigma_uts[1]
            assert ranges.x_m[0] <= rec.x_m <= ranges.x_m[1]
            assert ranges.k_s[0] <= rec.k_s <= ranges.k_s[1]
            assert np.all(rec.frequencies > ranges.f[0])
            assert np.all(rec.frequencies <= ranges.f[1])
            assert np.all((rec.phases >= 0) & (rec.phases < 2 * np.pi))
            assert rec.k_s * rec.sigma_uts - abs(rec.x_m) > 0
            assert rec.sigma_uts == mat.sigma_uts

    def test_determinism(self):
        r1, m1 = fp.sample_recipe(fp.Table1Ranges(), 77)
        r2, m2 = fp.sample_recipe(fp.Table1Ranges(), 77)
        assert np.array_equal(r1.frequencies, r2.frequencies)
        assert np.array_equal(r1.phases, r2.phases)
        assert (r1.x_m, r1.k_s, r1.sigma_uts) == (r2.x_m, r2.k_s, r2.sigma_uts)
        assert (m1.A, m1.b) == (m2.A, m2.b)


class TestImportPeakValley:
    def test_passes_through_knots(self):
        seq = [-1.0, 1.0, -1.0]
        sig = fp.import_peak_valley(seq, f_max=35.0, oversample=10.0, k_t=1.0)
        assert sig.sample_rate == 350.0
        knot_idx = (np.arange(3) * sig.sample_rate / (2 * 35.0)).astype(int)
        assert np.allclose(sig.samples[knot_idx], seq, rtol=1e-12, atol=1e-12)

    def test_kt_scales_linearly(self):
        seq = [-1.0, 2.0, -0.5, 1.5, -2.0]
        base = fp.import_peak_valley(seq, f_max=35.0, k_t=1.0)
        scaled = fp.import_peak_valley(seq, f_max=35.0, k_t=3.12)
        assert np.allclose(scaled.samples, 3.12 * base.samples, rtol=1e-12)

    def test_sample_rate_is_oversample_times_fmax(self):
        sig = fp.import_peak_valley([-1.0, 1.0, -1.0, 1.0], f_max=35.0, oversample=10.0)
        assert sig.sample_rate == 350.0

    def test_spline_hits_all_extrema(self):
        rng = np.random.default_rng(5)
        seq = np.empty(40)
        seq[::2] = -rng.uniform(0.5, 2.0, 20)
        seq[1::2] = rng.uniform(0.5, 2.0, 20)
        sig = fp.import_peak_valley(seq, f_max=10.0, oversample=8.0)
        knot_idx = (np.arange(40) * sig.sample_rate / 20.0).astype(int)
        assert np.allclose(sig.samples[knot_idx], seq, rtol=1e-12, atol=1e-12)

    def test_rejects_non_alternating(self):
        with pytest.raises(NonAlternatingSequence):
            fp.import_peak_valley([-1.0, 1.0, 2.0], f_max=35.0)
        with pytest.raises(NonAlternatingSequence):
            fp.import_peak_valley([-1.0, 1.0, 1.0], f_max=35.0)

    def test_rejects_too_short(self):
        with pytest.raises(TooShort):
            fp.import_peak_valley([-1.0, 1.0], f_max=35.0)


class TestSignalIo:
    def test_csv_round_trip(self, tmp_path):
        sig = fp.synthesize_signal(make_recipe())
        path = tmp_path / "sig.csv"
        write_signal_csv(path, sig)
        back = read_signal_csv(path)
        assert back.sample_rate == pytest.approx(sig.sample_rate, rel=1e-9)
        assert np.allclose(back.samples, sig.samples, rtol=0, atol=0)

    def test_recipe_json_round_trip(self, tmp_path):
        rec = make_recipe()
        path = tmp_path / "recipe.json"
        fp.signal_gen.write_recipe_json(path, rec)
        back = fp.signal_gen.read_recipe_json(path)
        assert np.array_equal(back.frequencies, rec.frequencies)
        assert np.array_equal(back.phases, rec.phases)
        assert back.to_dict() == rec.to_dict()
        assert np.array_equal(
            fp.synthesize_signal(back).samples, fp.synthesize_signal(rec).samples
        )
