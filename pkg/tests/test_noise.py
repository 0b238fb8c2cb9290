"""Noise sources: amplitude law, sampling distributions, stream discipline."""

import math

import numpy as np
import pytest

from kljn import (
    DistributionKind,
    NoiseSpec,
    ResistorPair,
    Trace,
    johnson_sigma,
    sample,
    scaled_sigma_high,
    stream,
)

BOLTZMANN = 1.380649e-23  # exact SI definition


class TestJohnsonSigma:
    def test_reference_value(self):
        # Independent arithmetic oracle: sqrt(4 k T R B) at 10 kOhm,
        # 300 K, 10 kHz.
        oracle = math.sqrt(4.0 * BOLTZMANN * 300.0 * 1.0e4 * 1.0e4)
        got = johnson_sigma(1.0e4, 300.0, 1.0e4)
        assert got == pytest.approx(oracle, rel=1e-12)
        assert got == pytest.approx(1.2872e-6, rel=1e-3)

    def test_quadrupling_resistance_doubles_sigma(self):
        assert johnson_sigma(4.0e4, 300.0, 1.0e4) == 2.0 * johnson_sigma(1.0e4, 300.0, 1.0e4)

    @pytest.mark.parametrize("field", ["resistance", "temperature", "bandwidth"])
    def test_rejects_nonpositive(self, field):
        kwargs = {"resistance": 1.0e4, "temperature": 300.0, "bandwidth": 1.0e4}
        for bad in (0.0, -1.0):
            kwargs[field] = bad
            with pytest.raises(ValueError):
                johnson_sigma(**kwargs)

    def test_continuous_at_zero_resistance(self):
        # The function rejects zero but must tend to zero smoothly.
        assert johnson_sigma(1e-30, 300.0, 1.0e4) < 1e-18

    def test_monotone_in_each_argument(self):
        base = johnson_sigma(1.0e4, 300.0, 1.0e4)
        assert johnson_sigma(2.0e4, 300.0, 1.0e4) > base
        assert johnson_sigma(1.0e4, 600.0, 1.0e4) > base
        assert johnson_sigma(1.0e4, 300.0, 2.0e4) > base


class TestScaledSigmaHigh:
    def test_nine_to_one_pair_triples(self):
        assert scaled_sigma_high(ResistorPair(1.0, 9.0), 1.0) == 3.0

    def test_four_to_one_pair_doubles(self):
        assert scaled_sigma_high(ResistorPair(1.0, 4.0), 1.5) == 3.0

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            scaled_sigma_high(ResistorPair(1.0, 4.0), 0.0)


class TestResistorPair:
    @pytest.mark.parametrize("r_low,r_high", [(0.0, 1.0), (-1.0, 2.0), (2.0, 2.0), (3.0, 2.0)])
    def test_rejects_bad_pairs(self, r_low, r_high):
        with pytest.raises(ValueError):
            ResistorPair(r_low, r_high)

    def test_accepts_ordered_pair(self):
        pair = ResistorPair(1.0, 4.0)
        assert pair.r_low == 1.0 and pair.r_high == 4.0


class TestNoiseSpec:
    def test_rejects_nonpositive_scale(self):
        for bad in (0.0, -2.0, math.inf, math.nan):
            with pytest.raises(ValueError):
                NoiseSpec(DistributionKind.GAUSSIAN, bad)

    def test_accepts_kind_by_value(self):
        assert NoiseSpec("uniform", 1.0).kind is DistributionKind.UNIFORM


class TestTrace:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Trace(np.array([]))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Trace(np.array([1.0, math.nan]))
        with pytest.raises(ValueError):
            Trace(np.array([1.0, math.inf]))

    def test_rejects_2d(self):
        with pytest.raises(ValueError):
            Trace(np.zeros((2, 2)))

    def test_samples_are_read_only(self):
        t = Trace(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            t.samples[0] = 5.0

    def test_len(self):
        assert len(Trace(np.arange(7, dtype=float))) == 7


class TestSampling:
    def test_deterministic_for_fixed_seed(self):
        spec = NoiseSpec(DistributionKind.GAUSSIAN, 2.0)
        a = sample(spec, 1000, seed=123)
        b = sample(spec, 1000, seed=123)
        assert np.array_equal(a.samples, b.samples)

    def test_different_seeds_differ(self):
        spec = NoiseSpec(DistributionKind.GAUSSIAN, 1.0)
        a = sample(spec, 100, seed=1)
        b = sample(spec, 100, seed=2)
        assert not np.array_equal(a.samples, b.samples)

    def test_rejects_zero_draws(self):
        with pytest.raises(ValueError):
            sample(NoiseSpec(DistributionKind.GAUSSIAN, 1.0), 0, seed=0)

    @pytest.mark.parametrize("kind", [DistributionKind.GAUSSIAN, DistributionKind.UNIFORM])
    @pytest.mark.parametrize("n", [10_000, 1_000_000])
    def test_sample_variance_tracks_scale(self, kind, n):
        # Relative error bound 5 standard errors of the variance
        # estimator; the uniform kurtosis is below Gaussian so the same
        # bound is conservative there.
        spec = NoiseSpec(kind, 1.7)
        trace = sample(spec, n, seed=42)
        observed = float(np.mean(trace.samples**2))
        assert abs(observed / spec.scale**2 - 1.0) < 5.0 * math.sqrt(2.0 / n)

    def test_gaussian_mean_near_zero(self):
        trace = sample(NoiseSpec(DistributionKind.GAUSSIAN, 1.0), 1_000_000, seed=7)
        assert abs(float(np.mean(trace.samples))) < 5.0 / math.sqrt(1_000_000)

    def test_uniform_support_is_sqrt3_scale(self):
        scale = 1.3
        bound = math.sqrt(3.0) * scale
        trace = sample(NoiseSpec(DistributionKind.UNIFORM, scale), 1_000_000, seed=5)
        assert float(np.max(trace.samples)) <= bound
        assert float(np.min(trace.samples)) >= -bound
        # mass actually reaches toward both edges
        assert float(np.max(trace.samples)) > 0.999 * bound
        assert float(np.min(trace.samples)) < -0.999 * bound

    def test_cauchy_draws_are_finite_with_heavy_tails(self):
        scale = 2.0
        trace = sample(NoiseSpec(DistributionKind.CAUCHY, scale), 1_000_000, seed=11)
        assert np.isfinite(trace.samples).all()
        # |X| has median equal to the scale parameter.
        assert float(np.median(np.abs(trace.samples))) == pytest.approx(scale, rel=0.01)
        # About 2/(10 pi) of the mass lies beyond 10 scales; a Gaussian
        # would put essentially nothing there.
        far = float(np.mean(np.abs(trace.samples) > 10.0 * scale))
        assert 0.04 < far < 0.09


class TestStreams:
    def test_same_path_reproduces(self):
        a = stream(99, 3, 1).standard_normal(8)
        b = stream(99, 3, 1).standard_normal(8)
        assert np.array_equal(a, b)

    def test_disjoint_paths_are_distinct(self):
        a = stream(99, 3, 1).standard_normal(8)
        b = stream(99, 3, 2).standard_normal(8)
        c = stream(99, 4, 1).standard_normal(8)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_rejects_negative_seed_or_path(self):
        with pytest.raises(ValueError):
            stream(-1)
        with pytest.raises(ValueError):
            stream(1, -2)

    def test_generator_passthrough(self):
        gen = stream(4, 0)
        first = sample(NoiseSpec(DistributionKind.GAUSSIAN, 1.0), 4, gen)
        second = sample(NoiseSpec(DistributionKind.GAUSSIAN, 1.0), 4, gen)
        # One generator advances across calls instead of restarting.
        assert not np.array_equal(first.samples, second.samples)
