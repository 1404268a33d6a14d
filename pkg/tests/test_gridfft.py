import numpy as np
import pytest

from holoctf.gridfft import Grid2D, crop, fft2, freq_sq, half_weights, ifft2, irfft2, pad, rfft2


def test_freq_sq_n4_axis_values():
    grid = Grid2D(4, 4, pad_factor=1)
    ky, kx = grid.frequencies()
    np.testing.assert_allclose(ky, [0, np.pi / 2, -np.pi, -np.pi / 2])
    q = freq_sq(grid)
    assert q[0, 0] == 0
    assert q[1, 0] == pytest.approx((2 * np.pi * 1 / 4) ** 2)
    assert q[1, 0] == pytest.approx(2.4674011, abs=1e-7)


def test_freq_sq_n2_corner():
    q = freq_sq(Grid2D(2, 2, pad_factor=1))
    assert q[1, 1] == pytest.approx(2 * np.pi**2)


def test_padded_shape_even_and_offsets():
    grid = Grid2D(5, 7, pad_factor=1.5)
    assert grid.padded_shape == (8, 12)
    assert Grid2D(4, 4).padded_shape == (8, 8)
    assert Grid2D(3, 5, pad_factor=1).padded_shape == (3, 5)


@pytest.mark.parametrize("bad", [(1, 4, 2.0), (4, 4, 0.5)])
def test_grid_rejects_invalid(bad):
    with pytest.raises(ValueError):
        Grid2D(*bad)


def test_constant_field_spectrum_at_zero():
    x = np.full((8, 8), 3.0)
    spec = fft2(x)
    assert abs(spec[0, 0]) == pytest.approx(3.0 * 8)
    spec[0, 0] = 0
    assert np.abs(spec).max() < 1e-12


@pytest.mark.parametrize("n", [8, 16, 64, 256])
def test_parseval(rng, n):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert np.linalg.norm(fft2(x)) == pytest.approx(np.linalg.norm(x), rel=1e-12)


def test_inner_product_preserved(rng):
    x = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    y = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    assert np.vdot(fft2(x), fft2(y)) == pytest.approx(np.vdot(x, y), rel=1e-12)


def test_round_trip(rng):
    x = rng.standard_normal((16, 16))
    np.testing.assert_allclose(ifft2(fft2(x)), x, atol=1e-12 * np.abs(x).max())


def test_hermitian_symmetry_of_real_input(rng):
    x = rng.standard_normal((32, 32))
    spec = fft2(x)
    mirrored = np.conj(np.roll(spec[::-1, ::-1], 1, axis=(0, 1)))
    assert np.abs(spec - mirrored).max() < 1e-12


def test_non_finite_rejected():
    x = np.zeros((4, 4))
    x[1, 2] = np.nan
    with pytest.raises(ValueError):
        fft2(x)


def test_half_spectrum_weights_reproduce_full_norm(rng):
    for shape in [(8, 8), (8, 7)]:
        x = rng.standard_normal(shape)
        half = rfft2(x)
        assert np.sum(np.abs(half) ** 2 * half_weights(shape)) == pytest.approx(np.sum(x**2), rel=1e-12)
        np.testing.assert_allclose(irfft2(half, shape), x, atol=1e-12)


def test_pad_factor_one_is_identity(rng):
    x = rng.standard_normal((6, 6))
    grid = Grid2D(6, 6, pad_factor=1)
    np.testing.assert_array_equal(pad(x, grid), x)
    np.testing.assert_array_equal(crop(x, grid), x)


def test_replicate_pad_of_ones():
    out = pad(np.ones((4, 4)), Grid2D(4, 4, 2))
    assert out.shape == (8, 8)
    np.testing.assert_array_equal(out, 1.0)


@pytest.mark.parametrize("mode", ["replicate", "zero"])
def test_crop_left_inverse_bit_exact(rng, mode):
    x = rng.standard_normal((8, 8))
    grid = Grid2D(8, 8, 2)
    np.testing.assert_array_equal(crop(pad(x, grid, mode), grid), x)


def test_zero_pad_margin_and_stack_axes(rng):
    x = rng.standard_normal((3, 4, 4))
    grid = Grid2D(4, 4, 2)
    p = pad(x, grid, "zero")
    assert p.shape == (3, 8, 8)
    assert np.sum(np.abs(p)) == pytest.approx(np.sum(np.abs(x)))


def test_crop_of_small_field_rejected():
    with pytest.raises(ValueError):
        crop(np.zeros((4, 4)), Grid2D(4, 4, 2))


def test_unknown_pad_mode():
    with pytest.raises(ValueError):
        pad(np.zeros((4, 4)), Grid2D(4, 4), "mirror")
