import math

import numpy as np
import pytest

from ctxdiag.data import DatasetError, Schema
from ctxdiag.signals import (
    CalibrationModel,
    FaultShift,
    FeatureDetectorSpec,
    GeneratorConfig,
    MissingModel,
    RegimeContext,
    SeveritySpec,
    SlotResponse,
    TransientCurve,
    config_from_json,
    config_to_json,
    default_config,
    extract_features,
    generate_dataset,
    generate_observation,
)

from oracles import exact_least_squares


def grid(n=769, t0=0.0, dt=1 / 64):
    return tuple(t0 + k * dt for k in range(n))


def triangle(times, apex_t, apex_v, half_width):
    return tuple(
        max(0.0, apex_v * (1.0 - abs(t - apex_t) / half_width)) for t in times
    )


PEAK = FeatureDetectorSpec(
    feature="bump", curve="main", kind="peak", entry_slope=1.0, exit_slope=-1.0,
    window=(0.0, 12.0),
)


class TestDetectors:
    def test_triangle_peak_found_exactly(self):
        times = grid()
        curve = TransientCurve("main", times, triangle(times, 3.0, 10.0, 3.0))
        fv = extract_features([curve], [PEAK])
        assert fv.slots == (3.0, 10.0)

    def test_flat_curve_reports_missing(self):
        times = grid()
        curve = TransientCurve("main", times, tuple(0.0 for _ in times))
        fv = extract_features([curve], [PEAK])
        assert fv.slots == (None, None)

    def test_window_selects_second_peak(self):
        times = grid()
        values = tuple(
            a + b
            for a, b in zip(triangle(times, 3.0, 8.0, 1.5), triangle(times, 8.0, 6.0, 1.5))
        )
        curve = TransientCurve("main", times, values)
        spec = FeatureDetectorSpec(
            feature="late", curve="main", kind="peak", entry_slope=1.0, exit_slope=-1.0,
            window=(5.5, 11.0),
        )
        fv = extract_features([curve], [spec])
        # Oracle: the tallest sample inside the window.
        t = np.asarray(times)
        v = np.asarray(values)
        mask = (t >= 5.5) & (t <= 11.0)
        k = np.flatnonzero(mask)[np.argmax(v[mask])]
        assert fv.slots == (float(t[k]), float(v[k]))

    def test_valley(self):
        times = grid()
        values = tuple(-v for v in triangle(times, 4.0, 9.0, 2.0))
        spec = FeatureDetectorSpec(
            feature="dip", curve="main", kind="valley", entry_slope=-1.0, exit_slope=1.0,
            window=(0.0, 12.0),
        )
        fv = extract_features([TransientCurve("main", times, values)], [spec])
        assert fv.slots == (4.0, -9.0)

    def test_rise_crossing_fires_at_first_fast_sample(self):
        times = grid()
        values = tuple(0.0 if t < 5.0 else (t - 5.0) * 4.0 for t in times)
        spec = FeatureDetectorSpec(
            feature="takeoff", curve="main", kind="rise-crossing", entry_slope=2.0,
            exit_slope=0.0, window=(0.0, 12.0),
        )
        fv = extract_features([TransientCurve("main", times, values)], [spec])
        assert fv.slots[0] is not None and 4.8 <= fv.slots[0] <= 5.4

    def test_settle_point_needs_activity_first(self):
        times = grid()
        values = tuple(10.0 * (1.0 - math.exp(-t / 1.5)) for t in times)
        spec = FeatureDetectorSpec(
            feature="steady", curve="main", kind="settle-point", entry_slope=2.0,
            exit_slope=0.2, window=(0.0, 12.0),
        )
        fv = extract_features([TransientCurve("main", times, values)], [spec])
        assert fv.slots[0] is not None and fv.slots[0] > 2.0

    def test_absent_curve_is_error(self):
        times = grid(65)
        with pytest.raises(ValueError, match="absent curve"):
            extract_features([TransientCurve("other", times, times)], [PEAK])

    def test_deterministic(self):
        times = grid()
        curve = TransientCurve("main", times, triangle(times, 3.0, 10.0, 3.0))
        assert extract_features([curve], [PEAK]) == extract_features([curve], [PEAK])


def random_curve_and_spec(rng):
    times = grid(n=641)
    apex_t = float(rng.integers(4, 56) * 0.125)
    apex_v = float(rng.integers(4, 40) * 0.25)
    width = float(rng.integers(8, 24) * 0.125)
    values = triangle(times, apex_t, apex_v, width)
    slope = apex_v / width
    spec = FeatureDetectorSpec(
        feature="bump", curve="main", kind="peak",
        entry_slope=slope * 0.5, exit_slope=-slope * 0.5,
        window=(0.25, 9.75),
    )
    return TransientCurve("main", times, values), spec


class TestCovariance:
    def test_time_translation_exact(self):
        rng = np.random.default_rng(101)
        for _ in range(100):
            curve, spec = random_curve_and_spec(rng)
            shift = float(rng.integers(-128, 128)) / 64.0
            moved = TransientCurve(
                "main", tuple(t + shift for t in curve.times), curve.values
            )
            spec_moved = FeatureDetectorSpec(
                feature=spec.feature, curve=spec.curve, kind=spec.kind,
                entry_slope=spec.entry_slope, exit_slope=spec.exit_slope,
                window=(spec.window[0] + shift, spec.window[1] + shift),
            )
            base = extract_features([curve], [spec]).slots
            shifted = extract_features([moved], [spec_moved]).slots
            if base[0] is None:
                assert shifted == (None, None)
            else:
                assert shifted[0] == base[0] + shift
                assert shifted[1] == base[1]

    def test_value_scale_exact(self):
        rng = np.random.default_rng(202)
        for _ in range(100):
            curve, spec = random_curve_and_spec(rng)
            alpha = float(rng.choice((0.25, 0.5, 2.0, 4.0, 8.0)))
            scaled = TransientCurve(
                "main", curve.times, tuple(alpha * v for v in curve.values)
            )
            spec_scaled = FeatureDetectorSpec(
                feature=spec.feature, curve=spec.curve, kind=spec.kind,
                entry_slope=alpha * spec.entry_slope, exit_slope=alpha * spec.exit_slope,
                window=spec.window,
            )
            base = extract_features([curve], [spec]).slots
            rescaled = extract_features([scaled], [spec_scaled]).slots
            if base[0] is None:
                assert rescaled == (None, None)
            else:
                assert rescaled[0] == base[0]
                assert rescaled[1] == alpha * base[1]

    def test_pattern_free_curves_are_missing_not_fabricated(self):
        rng = np.random.default_rng(303)
        times = grid(n=321)
        for _ in range(100):
            # Slow drifts well under the entry threshold.
            slope = float(rng.uniform(-0.2, 0.2))
            offset = float(rng.uniform(-5, 5))
            values = tuple(offset + slope * t for t in times)
            fv = extract_features([TransientCurve("main", times, values)], [PEAK])
            assert fv.slots == (None, None)


def tiny_config(noise=0.0, missing=None, seed=0, calibration=None, **overrides):
    schema = Schema(
        feature_names=("alpha", "beta"),
        context_names=("t1", "baro"),
        class_names=("worn", "healthy"),
        healthy_class="healthy",
    )
    responses = (
        SlotResponse(intercept=2.0, linear=(0.1, 0.0)),
        SlotResponse(intercept=100.0, linear=(-1.0, 2.0)),
        SlotResponse(intercept=5.0, linear=(0.05, -0.2)),
        SlotResponse(intercept=50.0, linear=(0.5, 1.0)),
    )
    cfg = dict(
        schema=schema,
        regimes={
            "october": RegimeContext(mean=(10.0, 14.0), spread=(2.0, 0.3)),
            "november": RegimeContext(mean=(0.0, 14.6), spread=(2.0, 0.3)),
        },
        responses=responses,
        noise=(noise,) * 4,
        fault_profiles={"worn": (FaultShift("alpha", 1.0, -5.0),)},
        missing=missing or MissingModel(),
        calibration=calibration or CalibrationModel(),
        counts={},
        severity={"worn": SeveritySpec(kind="constant", value=1.0)},
        baseline_count=4,
        seed=seed,
    )
    cfg.update(overrides)
    return GeneratorConfig(**cfg)


class TestGenerator:
    def test_zero_severity_zero_noise_hits_response_exactly(self):
        cfg = tiny_config()
        obs = generate_observation(cfg, "healthy", 0.0, "october", np.random.default_rng(5))
        expected = tuple(resp(obs.context.values) for resp in cfg.responses)
        assert obs.features.slots == expected

    def test_same_seed_same_observation(self):
        cfg = tiny_config(noise=0.2, missing=MissingModel(base=0.2))
        a = generate_observation(cfg, "worn", 0.7, "october", np.random.default_rng(9))
        b = generate_observation(cfg, "worn", 0.7, "october", np.random.default_rng(9))
        assert a == b

    def test_fault_shift_direction(self):
        cfg = tiny_config()
        rng = np.random.default_rng(11)
        healthy = generate_observation(cfg, "healthy", 0.0, "october", np.random.default_rng(11))
        worn = generate_observation(cfg, "worn", 1.0, "october", rng)
        assert worn.features.slots[0] == pytest.approx(healthy.features.slots[0] + 1.0)
        assert worn.features.slots[1] == pytest.approx(healthy.features.slots[1] - 5.0)
        assert worn.features.slots[2] == healthy.features.slots[2]

    def test_monte_carlo_healthy_mean(self):
        cfg = tiny_config(
            noise=0.5,
            regimes={
                "october": RegimeContext(mean=(10.0, 14.0), spread=(0.0, 0.0)),
                "november": RegimeContext(mean=(0.0, 14.6), spread=(0.0, 0.0)),
            },
        )
        rng = np.random.default_rng(17)
        draws = np.array(
            [
                generate_observation(cfg, "healthy", 0.0, "october", rng).features.slots
                for _ in range(1000)
            ],
            dtype=float,
        )
        expected = np.array([resp((10.0, 14.0)) for resp in cfg.responses])
        bound = 3 * 0.5 / math.sqrt(1000)
        assert np.all(np.abs(draws.mean(axis=0) - expected) < bound)

    def test_affected_features_go_missing_with_severity(self):
        cfg = tiny_config(missing=MissingModel(base=0.0, severity_gain=1.0))
        obs = generate_observation(cfg, "worn", 1.0, "october", np.random.default_rng(3))
        assert obs.features.slots[0] is None and obs.features.slots[1] is None
        assert obs.features.slots[2] is not None and obs.features.slots[3] is not None

    def test_erroneous_values_land_far_out(self):
        cfg = tiny_config(
            noise=0.1, missing=MissingModel(erroneous=1.0, erroneous_scale=100.0)
        )
        obs = generate_observation(cfg, "healthy", 0.0, "october", np.random.default_rng(23))
        clean = tuple(resp(obs.context.values) for resp in cfg.responses)
        for got, want in zip(obs.features.slots, clean):
            assert abs(got - want) > 5.0  # 100 noise units, give or take the noise

    def test_dataset_composition_and_baselines(self):
        cfg = tiny_config(
            counts={
                "october": {"worn": 3, "healthy": 6},
                "november": {"worn": 2, "healthy": 5},
            }
        )
        ds = generate_dataset(cfg)
        assert len(ds) == 16
        assert ds.class_counts() == {"worn": 5, "healthy": 11}
        assert len(ds.baselines) == 4
        assert all(ds.by_id(b).label == "healthy" for b in ds.baselines)

    def test_no_healthy_but_baselines_requested(self):
        cfg = tiny_config(counts={"october": {"worn": 3}})
        with pytest.raises(DatasetError, match="healthy"):
            generate_dataset(cfg)

    def test_healthy_only_composition_is_baseline_only(self):
        cfg = tiny_config(counts={"october": {"healthy": 4}})
        ds = generate_dataset(cfg)
        assert len(ds) == 4
        assert set(ds.baselines) == {o.id for o in ds.observations}

    def test_regime_context_means_differ_as_configured(self):
        cfg = tiny_config(counts={"october": {"worn": 120}, "november": {"worn": 120}})
        ds = generate_dataset(GeneratorConfig(**{**cfg.__dict__, "baseline_count": 0}))
        t1 = {
            regime: np.mean([o.context.values[0] for o in ds.observations if o.regime == regime])
            for regime in ("october", "november")
        }
        # Configured gap is 10 with spread 2: the sample gap lands near 10.
        assert t1["october"] - t1["november"] == pytest.approx(10.0, abs=0.8)

    def test_healthy_regression_recovers_linear_coefficients(self):
        cfg = tiny_config(noise=0.3, counts={"october": {"healthy": 200}})
        ds = generate_dataset(cfg)
        X = np.array([o.context.values for o in ds.observations])
        for slot, resp in enumerate(cfg.responses):
            y = np.array([o.features.slots[slot] for o in ds.observations])
            icept, coefs = exact_least_squares(X, y)
            design = np.column_stack([np.ones(len(y)), X])
            resid = y - design @ np.array([icept, *coefs])
            s2 = float(resid @ resid) / (len(y) - 3)
            cov = s2 * np.linalg.inv(design.T @ design)
            se = np.sqrt(np.diag(cov))
            assert abs(icept - resp.intercept) < 4 * se[0]
            for j, c in enumerate(coefs):
                assert abs(c - resp.linear[j]) < 4 * se[j + 1]

    def test_config_json_round_trip(self):
        cfg = default_config(seed=3)
        doc = config_to_json(cfg)
        back = config_from_json(doc)
        assert back == cfg
        assert generate_dataset(back) == generate_dataset(cfg)


class TestCurveValidation:
    def test_non_uniform_step_rejected(self):
        with pytest.raises(ValueError, match="uniform"):
            TransientCurve("bad", (0.0, 1.0, 3.0), (0.0, 0.0, 0.0))

    def test_decreasing_time_rejected(self):
        with pytest.raises(ValueError, match="increasing"):
            TransientCurve("bad", (0.0, 1.0, 0.5), (0.0, 0.0, 0.0))

    def test_peak_spec_needs_distinct_slopes(self):
        with pytest.raises(ValueError, match="differ"):
            FeatureDetectorSpec(
                feature="f", curve="c", kind="peak", entry_slope=1.0, exit_slope=1.0,
                window=(0.0, 1.0),
            )

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError, match="window"):
            FeatureDetectorSpec(
                feature="f", curve="c", kind="peak", entry_slope=1.0, exit_slope=-1.0,
                window=(2.0, 2.0),
            )
