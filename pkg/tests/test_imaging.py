import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from flowforge.errors import IncompatibleFramesError, InvalidFrameError
from flowforge.imaging import Frame, gradients, resize_bilinear, to_grayscale


def unit_arrays(max_side=12, channels=st.sampled_from([1, 3])):
    return st.tuples(st.integers(1, max_side), st.integers(1, max_side), channels).flatmap(
        lambda s: arrays(np.float32, s, elements=st.floats(0, 1, width=32))
    )


class TestFrame:
    def test_shape_accessors(self):
        f = Frame(np.zeros((3, 5, 3)))
        assert (f.width, f.height, f.channels) == (5, 3, 3)
        assert f.pixels.dtype == np.float32

    def test_two_dimensional_input_becomes_single_channel(self):
        assert Frame(np.zeros((4, 4))).channels == 1

    def test_pixels_are_read_only(self):
        f = Frame(np.zeros((2, 2, 1)))
        with pytest.raises(ValueError):
            f.pixels[0, 0, 0] = 1.0

    @pytest.mark.parametrize("bad", [np.full((2, 2, 1), 1.5), np.full((2, 2, 1), -0.1), np.full((2, 2, 1), np.nan)])
    def test_rejects_out_of_range_or_nonfinite(self, bad):
        with pytest.raises(InvalidFrameError):
            Frame(bad)

    def test_rejects_two_channels(self):
        with pytest.raises(InvalidFrameError):
            Frame(np.zeros((2, 2, 2)))


class TestGrayscale:
    def test_white(self):
        g = to_grayscale(Frame(np.ones((2, 2, 3))))
        assert g.channels == 1
        np.testing.assert_allclose(g.pixels, 1.0)

    def test_unit_red(self):
        g = to_grayscale(Frame(np.array([[[1.0, 0.0, 0.0]]])))
        assert g.pixels[0, 0, 0] == pytest.approx(0.299, abs=1e-7)

    def test_single_channel_unchanged(self, rng):
        f = Frame(rng.random((3, 3, 1)))
        assert to_grayscale(f) == f

    @given(unit_arrays(channels=st.just(3)))
    def test_idempotent(self, arr):
        g = to_grayscale(Frame(arr))
        assert to_grayscale(g) == g


class TestResize:
    def test_constant_preserved(self):
        out = resize_bilinear(Frame(np.full((5, 7, 1), 0.5)), 13, 3)
        assert out.pixels.shape == (3, 13, 1)
        np.testing.assert_array_equal(out.pixels, np.float32(0.5))

    def test_identity_scale(self, rng):
        f = Frame(rng.random((4, 4, 3)))
        assert resize_bilinear(f, 4, 4) == f

    def test_two_to_four_hand_evaluated(self):
        # src x = (d + 0.5) * 0.5 - 0.5 -> -0.25, 0.25, 0.75, 1.25, clamped to [0, 1]
        out = resize_bilinear(Frame(np.array([[0.0, 1.0]])), 4, 1)
        np.testing.assert_allclose(out.pixels[0, :, 0], [0.0, 0.25, 0.75, 1.0])
        assert np.all(np.diff(out.pixels[0, :, 0]) >= 0)

    def test_downsample_averages_pairs(self):
        out = resize_bilinear(Frame(np.array([[0.0, 1.0, 0.0, 1.0]])), 2, 1)
        np.testing.assert_allclose(out.pixels[0, :, 0], [0.5, 0.5])

    @settings(max_examples=60)
    @given(unit_arrays(), st.integers(1, 20), st.integers(1, 20))
    def test_convex_hull(self, arr, w, h):
        out = resize_bilinear(Frame(arr), w, h)
        assert out.pixels.shape == (h, w, arr.shape[2])
        assert out.pixels.min() >= arr.min()
        assert out.pixels.max() <= arr.max()

    def test_rejects_zero_size(self):
        with pytest.raises(ValueError):
            resize_bilinear(Frame(np.zeros((2, 2))), 0, 2)


class TestGradients:
    def test_identical_frames_zero_temporal(self, rng):
        f = Frame(rng.random((6, 6, 1)))
        _, _, it = gradients(f, f)
        assert not it.any()

    def test_horizontal_ramp(self):
        ramp = np.tile(np.arange(10) * 0.1, (6, 1))
        ix, iy, _ = gradients(Frame(ramp), Frame(ramp))
        np.testing.assert_allclose(ix[:, 1:-1], 0.1, atol=1e-6)
        np.testing.assert_allclose(iy, 0.0, atol=1e-7)
        # replicated border halves the one-sided difference
        np.testing.assert_allclose(ix[:, 0], 0.05, atol=1e-6)

    def test_uniform_brightness_change(self):
        a = np.full((4, 4), 0.3)
        ix, iy, it = gradients(Frame(a), Frame(a + 0.2))
        np.testing.assert_allclose(it, 0.2, atol=1e-6)
        assert not ix.any() and not iy.any()

    @given(st.floats(0, 1), st.integers(1, 8), st.integers(1, 8))
    def test_constant_pair_all_zero(self, c, w, h):
        f = Frame(np.full((h, w), c))
        for g in gradients(f, f):
            assert not np.any(g)

    def test_size_mismatch(self):
        with pytest.raises(IncompatibleFramesError):
            gradients(Frame(np.zeros((4, 4))), Frame(np.zeros((4, 5))))
