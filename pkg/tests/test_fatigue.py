"""Rainflow counting, damage accumulation, and failure-time oracle checks."""

import numpy as np
import pytest

import fatprog as fp
from fatprog.errors import MeanExceedsUts, NoDamage, NonAlternatingSequence
from oracles import rainflow_reference

MAT = fp.MaterialParams(A=1000.0, b=-0.1, sigma_uts=500.0)


def as_tuples(cycles):
    return sorted((c.amplitude, c.mean, c.weight) for c in cycles)


class TestRainflow:
    def test_reference_sequence(self):
        ext = [-2.0, 1.0, -3.0, 5.0, -1.0, 3.0, -4.0, 4.0, -2.0]
        cycles = fp.rainflow_count(ext)
        fulls = [c for c in cycles if c.weight == 1.0]
        halves = sorted(2 * c.amplitude for c in cycles if c.weight == 0.5)
        assert len(fulls) == 1
        assert 2 * fulls[0].amplitude == 4.0  # the -1/3 excursion
        assert fulls[0].mean == 1.0
        assert halves == [3.0, 4.0, 6.0, 8.0, 8.0, 9.0]

    def test_periodic_signal_counts_n_cycles_of_damage(self):
        # n periods of a pure cosine: one full cycle equivalent per period
        n = 7
        t = np.linspace(0, n, 2 * n + 1)  # extrema at half-period spacing
        ext = 3.0 + 2.0 * np.cos(2 * np.pi * t)
        cycles = fp.rainflow_count(ext)
        assert all(c.amplitude == pytest.approx(2.0) for c in cycles)
        assert all(c.mean == pytest.approx(3.0) for c in cycles)
        assert sum(c.weight for c in cycles) == pytest.approx(n)

    def test_monotone_ramp_single_half_cycle(self):
        values, idx = fp.turning_points(np.linspace(0.0, 10.0, 50))
        cycles = fp.rainflow_count(values)
        assert as_tuples(cycles) == [(5.0, 5.0, 0.5)]

    def test_matches_reference_on_random_sequences(self):
        rng = np.random.default_rng(0)
        for trial in range(200):
            n = rng.integers(2, 40)
            seq = [float(rng.uniform(-5, 5))]
            while len(seq) < n:
                nxt = float(rng.uniform(-5, 5))
                if len(seq) == 1:
                    if nxt != seq[-1]:
                        seq.append(nxt)
                elif (seq[-1] > seq[-2] and nxt < seq[-1]) or (
                    seq[-1] < seq[-2] and nxt > seq[-1]
                ):
                    seq.append(nxt)
            assert as_tuples(fp.rainflow_count(seq)) == rainflow_reference(seq)

    def test_conservation_of_excursions(self):
        rng = np.random.default_rng(4)
        x = np.cumsum(rng.normal(size=500))
        values, _ = fp.turning_points(x)
        cycles = fp.rainflow_count(values)
        assert 2 * sum(c.weight for c in cycles) == pytest.approx(len(values) - 1)

    def test_rejects_non_alternating(self):
        with pytest.raises(NonAlternatingSequence):
            fp.rainflow_count([0.0, 1.0, 2.0])

    def test_short_input_empty(self):
        assert fp.rainflow_count([1.0]) == []
        assert fp.rainflow_count([]) == []

    def test_zero_mean_negation_symmetry(self):
        rng = np.random.default_rng(9)
        x = np.cumsum(rng.normal(size=400))
        x -= x.mean()
        v1, _ = fp.turning_points(x)
        v2, _ = fp.turning_points(-x)
        c1 = fp.rainflow_count(v1)
        c2 = fp.rainflow_count(v2)
        assert sorted((c.amplitude, c.weight) for c in c1) == sorted(
            (c.amplitude, c.weight) for c in c2
        )
        d1 = fp.cumulative_damage(c1, MAT, 0.0)
        d2 = fp.cumulative_damage(c2, MAT, 0.0)
        assert d1 == pytest.approx(d2, rel=1e-12)


class TestCyclesToFailure:
    def test_hand_value(self):
        assert fp.cycles_to_failure(100.0, 0.0, MAT) == pytest.approx(1e10, rel=1e-9)

    def test_zero_mean_gives_unit_goodman(self):
        from fatprog.fatigue import goodman_factor

        assert goodman_factor(0.0, MAT) == 1.0

    def test_half_uts_mean_halves_allowable(self):
        n_half = fp.cycles_to_failure(100.0, 250.0, MAT)
        n_double = fp.cycles_to_failure(200.0, 0.0, MAT)
        assert n_half == pytest.approx(n_double, rel=1e-12)

    def test_zero_amplitude_never_fails(self):
        assert fp.cycles_to_failure(0.0, 0.0, MAT) == np.inf

    def test_mean_exceeds_uts(self):
        with pytest.raises(MeanExceedsUts):
            fp.cycles_to_failure(100.0, 500.0, MAT)

    def test_decreasing_in_amplitude(self):
        amps = np.linspace(10, 400, 20)
        ns = [fp.cycles_to_failure(a, 0.0, MAT) for a in amps]
        assert np.all(np.diff(ns) < 0)


class TestCumulativeDamage:
    def test_empty_cycles(self):
        assert fp.cumulative_damage([], MAT, 0.0) == 0.0

    def test_single_amplitude_exact(self):
        cycles = [fp.CountedCycle(100.0, 0.0, 1.0)] * 25
        assert fp.cumulative_damage(cycles, MAT, 0.0) == pytest.approx(25 / 1e10, rel=1e-12)

    def test_additivity_on_disjoint_segments(self):
        rng = np.random.default_rng(11)
        a = np.cumsum(rng.normal(size=300))
        b = np.cumsum(rng.normal(size=300)) + a[-1]
        va, _ = fp.turning_points(a)
        vb, _ = fp.turning_points(b)
        vc, _ = fp.turning_points(np.concatenate([a, b]))
        da = fp.cumulative_damage(fp.rainflow_count(va), MAT, 0.0)
        db = fp.cumulative_damage(fp.rainflow_count(vb), MAT, 0.0)
        dc = fp.cumulative_damage(fp.rainflow_count(vc), MAT, 0.0)
        # residues of the two halves interact at the seam; damage only moves
        # between half- and full-cycle accounting of the same excursions
        assert dc == pytest.approx(da + db, rel=0.25)

    def test_monotone_as_extrema_append(self):
        rng = np.random.default_rng(21)
        x = np.cumsum(rng.normal(size=400))
        values, _ = fp.turning_points(x)
        damages = [
            fp.cumulative_damage(fp.rainflow_count(values[:k]), MAT, 0.0)
            for k in range(2, len(values), 7)
        ]
        assert np.all(np.diff(damages) >= -1e-15)


class TestFailureTime:
    def test_constant_amplitude_sinusoid(self):
        # amplitude 100 at 10 Hz: N_f = 1e10 cycles -> tau = 1e9 s, reached
        # far beyond the record so the rate extrapolation kicks in
        rec = fp.SignalRecipe(
            psd=fp.PsdSpec(100.0, 20.0),
            n_components=1,
            frequencies=[10.0],
            phases=[0.0],
            x_m=0.0,
            k_s=0.2,
            sigma_uts=500.0,
            duration=3.0,
            sample_rate=1000.0,
            rng_seed=1,
        )
        sig = fp.synthesize_signal(rec)
        ft = fp.failure_time(sig, MAT, 0.0)
        assert ft.extrapolated
        assert ft.tau == pytest.approx(1e9, rel=1e-6)

    def test_prefix_crossing_detected_without_extrapolation(self):
        rec = fp.SignalRecipe(
            psd=fp.PsdSpec(100.0, 20.0),
            n_components=1,
            frequencies=[50.0],
            phases=[0.0],
            x_m=0.0,
            k_s=0.9,
            sigma_uts=500.0,
            duration=20.0,
            sample_rate=1000.0,
            rng_seed=1,
        )
        mat = fp.MaterialParams(A=1000.0, b=-0.2, sigma_uts=500.0)
        sig = fp.synthesize_signal(rec)
        ft = fp.failure_time(sig, mat, 0.0)
        # N_f = (450/1000)^(-5) cycles at 50 Hz
        expected = (0.45) ** (-5.0) / 50.0
        assert not ft.extrapolated
        assert ft.tau == pytest.approx(expected, rel=0.02)

    def test_scaling_up_amplitudes_shortens_life(self):
        ranges = fp.Table1Ranges()
        for seed in (3, 17, 29):
            rec, mat = fp.sample_recipe(ranges, seed, duration=6.0)
            if 2 * rec.k_s * rec.sigma_uts - abs(rec.x_m) <= 0:
                continue
            boosted = fp.SignalRecipe(
                psd=rec.psd,
                n_components=rec.n_components,
                frequencies=rec.frequencies,
                phases=rec.phases,
                x_m=rec.x_m,
                k_s=min(2 * rec.k_s, 0.999),
                sigma_uts=rec.sigma_uts,
                duration=rec.duration,
                sample_rate=rec.sample_rate,
                rng_seed=rec.rng_seed,
            )
            t1 = fp.failure_time(fp.synthesize_signal(rec), mat, rec.x_m).tau
            t2 = fp.failure_time(fp.synthesize_signal(boosted), mat, rec.x_m).tau
            assert t2 < t1

    def test_flat_signal_raises_no_damage(self):
        sig = fp.Signal(samples=np.full(100, 7.0), sample_rate=100.0)
        with pytest.raises(NoDamage):
            fp.failure_time(sig, MAT, 0.0)

    def test_prefix_damage_matches_batch_recount(self):
        rng = np.random.default_rng(33)
        x = np.cumsum(rng.normal(size=2000))
        sig = fp.Signal(samples=x, sample_rate=100.0)
        mat = fp.MaterialParams(A=30.0, b=-0.15, sigma_uts=500.0)
        ft = fp.failure_time(sig, mat, 0.0)
        values, _ = fp.turning_points(x, 1e-9 * mat.sigma_uts)
        batch = fp.cumulative_damage(fp.rainflow_count(values), mat, 0.0)
        assert ft.damage_end.D == pytest.approx(batch, rel=1e-9)


class TestCyclesCsv:
    def test_export(self, tmp_path):
        cycles = fp.rainflow_count([-2.0, 1.0, -3.0, 5.0, -1.0])
        path = tmp_path / "cycles.csv"
        fp.fatigue.write_cycles_csv(path, cycles)
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "amplitude,mean,weight"
        assert len(rows) == len(cycles) + 1
        amp0 = float(rows[1].split(",")[0])
        assert amp0 == cycles[0].amplitude
