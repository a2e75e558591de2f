import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowforge.compensation import (
    CompensationConfig,
    compensate_batch,
    compensate_flow,
    item_seed,
    sample_correspondences,
    splitmix64,
)
from flowforge.denseflow import FlowField, motion_magnitudes
from flowforge.errors import BatchItemError, ConfigurationError, InsufficientSamplesError
from flowforge.geometry import Homography, RansacConfig, camera_flow
from flowforge.storage import write_flo

from flowgen import camera_only_flow, outlier_flow, pan_patch_flow, random_homography


def is_zero(f):
    return not f.u.any() and not f.v.any()


class TestSampling:
    def test_zero_flow(self):
        c = sample_correspondences(FlowField.zeros(16, 16), 8)
        np.testing.assert_array_equal(c.p0, [[0, 0], [8, 0], [0, 8], [8, 8]])
        np.testing.assert_array_equal(c.p0, c.p1)

    def test_constant_flow(self):
        c = sample_correspondences(FlowField.constant(16, 16, 2.0, 3.0), 8)
        np.testing.assert_array_equal(c.p1 - c.p0, np.tile([2.0, 3.0], (4, 1)))

    def test_count(self):
        assert len(sample_correspondences(FlowField.zeros(32, 32), 8)) == 16

    def test_reads_flow_at_grid_point(self, rng):
        u, v = rng.normal(size=(2, 20, 24))
        c = sample_correspondences(FlowField(u, v), 5)
        for (x, y), (x1, y1) in zip(c.p0.astype(int), c.p1):
            assert x1 - x == pytest.approx(float(np.float32(u[y, x])))
            assert y1 - y == pytest.approx(float(np.float32(v[y, x])))

    def test_insufficient(self):
        with pytest.raises(InsufficientSamplesError):
            sample_correspondences(FlowField.zeros(8, 16), 8)


class TestSeeds:
    def test_splitmix_reference_value(self):
        # first output of the reference SplitMix64 generator seeded with 0
        assert splitmix64(0) == 0xE220A8397B1DCDAF

    def test_item_seeds_distinct(self):
        seeds = {item_seed(0, i) for i in range(1000)}
        assert len(seeds) == 1000
        assert item_seed(1, 0) != item_seed(0, 0)


class TestCompensateFlow:
    def test_camera_only_becomes_zero(self):
        out, rep = compensate_flow(camera_only_flow(1))
        assert rep.valid and is_zero(out)
        assert rep.homography is not None

    def test_pan_plus_patch(self):
        flow, mask = pan_patch_flow()
        out, rep = compensate_flow(flow)
        assert rep.valid
        bg_zero = (out.u[~mask] == 0) & (out.v[~mask] == 0)
        assert bg_zero.mean() >= 0.95
        assert abs(out.u[mask].mean() - 6.0) <= 0.5 and abs(out.v[mask].mean()) <= 0.5

    def test_all_outliers_fallback_bytes(self):
        flow = outlier_flow()
        out, rep = compensate_flow(flow)
        assert not rep.valid
        assert write_flo(out) == write_flo(flow)

    def test_thresholding_disabled_keeps_residual(self):
        flow = FlowField.constant(32, 32, 1.0, 0.0)
        cfg = CompensationConfig(thresholding_enabled=False)
        out, rep = compensate_flow(flow, cfg)
        assert rep.valid
        assert np.abs(out.u).max() < 1e-9

    def test_stride_must_fit(self):
        with pytest.raises(ConfigurationError):
            compensate_flow(FlowField.zeros(8, 8), CompensationConfig(stride=8))

    def test_large_object_motion_survives_identity_background(self):
        flow, mask = pan_patch_flow(pan=(0.0, 0.0), extra=(7.0, -3.0))
        out, rep = compensate_flow(flow)
        assert rep.valid
        np.testing.assert_allclose(out.u[mask], 7.0, atol=0.5)
        np.testing.assert_allclose(out.v[mask], -3.0, atol=0.5)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.0, 3.0))
    def test_zero_or_above_threshold(self, seed, tau):
        rng = np.random.default_rng(seed)
        base = camera_flow(random_homography(rng, 48), 48, 48)
        noise = rng.normal(0, 0.6, (2, 48, 48))
        flow = FlowField(base.u + noise[0], base.v + noise[1])
        out, _ = compensate_flow(flow, CompensationConfig(noise_threshold=tau))
        mag = motion_magnitudes(out)
        zero = (out.u == 0) & (out.v == 0)
        assert np.all(zero | (mag >= tau))

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10_000))
    def test_invalid_report_means_identical_bytes(self, seed):
        flow = outlier_flow(size=32, seed=seed)
        out, rep = compensate_flow(flow)
        if not rep.valid:
            assert write_flo(out) == write_flo(flow)


class TestBatch:
    def test_empty(self):
        assert compensate_batch([]) == []

    def test_three_identical(self):
        flow = camera_only_flow(2, size=64)
        for out, rep in compensate_batch([flow] * 3):
            assert rep.valid and is_zero(out)

    def test_mixed(self):
        cam, bad = camera_only_flow(3, size=64), outlier_flow()
        (o1, r1), (o2, r2) = compensate_batch([cam, bad])
        assert r1.valid and is_zero(o1)
        assert not r2.valid and write_flo(o2) == write_flo(bad)

    def test_matches_loop_with_derived_seed(self):
        flows = [pan_patch_flow(size=64, origin=(8 * i, 16))[0] for i in range(3)] + [outlier_flow(size=64)]
        cfg = CompensationConfig(ransac=RansacConfig(seed=99))
        batch = compensate_batch(flows, cfg, workers=3)
        for i, (f, (out, rep)) in enumerate(zip(flows, batch)):
            item = CompensationConfig(ransac=RansacConfig(seed=item_seed(99, i)))
            ref_out, ref_rep = compensate_flow(f, item)
            assert write_flo(out) == write_flo(ref_out)
            assert (rep.valid, rep.inlier_count) == (ref_rep.valid, ref_rep.inlier_count)

    def test_workers_do_not_change_results(self):
        flows = [outlier_flow(size=48, seed=s) for s in range(4)] + [camera_only_flow(s, 48) for s in range(4)]
        one = compensate_batch(flows, workers=1)
        many = compensate_batch(flows, workers=4)
        assert [write_flo(o) for o, _ in one] == [write_flo(o) for o, _ in many]

    def test_error_carries_index(self):
        flows = [FlowField.zeros(32, 32), FlowField.zeros(32, 32), FlowField.zeros(8, 8)]
        with pytest.raises(BatchItemError) as info:
            compensate_batch(flows)
        assert info.value.index == 2

    def test_structural_error_inside_item(self):
        tiny = [FlowField.zeros(8, 8)]
        with pytest.raises(BatchItemError) as info:
            compensate_batch(tiny)
        assert info.value.index == 0
        assert isinstance(info.value.cause, ConfigurationError)


def test_identity_homography_report():
    out, rep = compensate_flow(camera_flow(Homography.identity(), 32, 32))
    np.testing.assert_allclose(rep.homography.m, np.eye(3), atol=1e-9)
    assert rep.inlier_count == 16
