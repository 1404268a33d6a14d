import numpy as np
import pytest

from holoctf.ctf import ComplexObject, build_spectrum, ctf_forward
from holoctf.fresnel import Geometry, backpropagate, forward_intensity, fresnel_number, propagate, transfer_function
from holoctf.gridfft import Grid2D, fft2, freq_sq
from holoctf.phantom import wavelength

from conftest import smooth_field


def test_fresnel_number_unit_geometry():
    assert fresnel_number(Geometry(1.0, 1.0, 1.0)) == 1.0


def test_fresnel_number_colloid_setup():
    lam = wavelength(13.8)
    assert lam == pytest.approx(8.984e-11, rel=1e-3)
    s = 127.2e-9
    z = s**2 / (lam * 1.84e-3)
    assert z == pytest.approx(9.79e-2, rel=2e-3)
    assert fresnel_number(Geometry(lam, z, s)) == pytest.approx(1.84e-3, rel=1e-12)


def test_fresnel_number_scaling_and_cone_beam():
    f1 = fresnel_number(Geometry(1e-10, 0.1, 1e-7))
    assert fresnel_number(Geometry(1e-10, 0.2, 1e-7)) == pytest.approx(f1 / 2)
    # cone beam: M = 4, s_eff = s/4, z_eff = z/4  ->  f = s^2 / (16 lam z / 4)
    cone = fresnel_number(Geometry(1e-10, 0.3, 4e-7, source_distance=0.1))
    assert cone == pytest.approx((1e-7) ** 2 / (1e-10 * 0.075))


def test_geometry_rejects_nonpositive():
    with pytest.raises(ValueError):
        Geometry(1e-10, 0.0, 1e-7)


def test_plane_wave_unchanged():
    psi = np.full((16, 16), 0.7 + 0.2j)
    np.testing.assert_allclose(propagate(psi, 2.5e-3), psi, atol=1e-12)
    np.testing.assert_allclose(backpropagate(psi, 2.5e-3), psi, atol=1e-12)


def test_unitarity(rng):
    psi = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    assert np.linalg.norm(propagate(psi, 0.01)) == pytest.approx(np.linalg.norm(psi), rel=1e-12)


def test_semigroup(rng):
    psi = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    f1, f2 = 0.02, 0.05
    f12 = 1 / (1 / f1 + 1 / f2)
    # oracle: product of the two transfer functions applied directly
    q = freq_sq(Grid2D(32, 32, 1))
    oracle = np.fft.ifft2(transfer_function(q, f1) * transfer_function(q, f2) * np.fft.fft2(psi))
    np.testing.assert_allclose(propagate(propagate(psi, f1), f2), oracle, atol=1e-10)
    np.testing.assert_allclose(propagate(psi, f12), oracle, atol=1e-10)


def test_backpropagation_round_trip(rng):
    psi = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    np.testing.assert_allclose(backpropagate(propagate(psi, 2.5e-3), 2.5e-3), psi, atol=1e-10)


def test_backpropagation_is_conjugate_transfer(rng):
    psi = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    m = transfer_function(freq_sq(Grid2D(16, 16, 1)), 0.03)
    np.testing.assert_allclose(fft2(backpropagate(psi, 0.03)), np.conj(m) * fft2(psi), atol=1e-12)


def test_infinite_fresnel_is_identity(rng):
    psi = rng.standard_normal((8, 8)) + 0j
    np.testing.assert_array_equal(propagate(psi, np.inf), psi)


@pytest.mark.parametrize("f", [0.0, -1e-3])
def test_nonpositive_fresnel_rejected(f):
    with pytest.raises(ValueError):
        propagate(np.ones((4, 4)), f)


def test_empty_beam():
    out = forward_intensity(np.zeros((16, 16)), np.zeros((16, 16)), 1e-3)
    np.testing.assert_allclose(out, 1.0, atol=1e-12)


def test_uniform_absorber():
    mu = np.full((16, 16), -0.1)
    # periodic evaluation: a constant object is not diffracted at all
    out = forward_intensity(np.zeros((16, 16)), mu, 1e-3, pad_factor=1)
    np.testing.assert_allclose(out, np.exp(-0.2), atol=1e-12)
    # padded evaluation: only the edge of the object diffracts
    out = forward_intensity(np.zeros((128, 128)), np.full((128, 128), -0.1), 0.5)
    np.testing.assert_allclose(out[48:80, 48:80], np.exp(-0.2), atol=1e-3)


def test_energy_conserved_for_phase_object(rng):
    phi = -np.abs(smooth_field(rng, (64, 64), amplitude=0.5))
    out = forward_intensity(phi, np.zeros_like(phi), 2e-3, pad_factor=1)
    assert out.mean() == pytest.approx(1.0, abs=1e-12)
    assert np.all(out >= 0)


def test_stack_output_shape(rng):
    phi = -np.abs(smooth_field(rng, (16, 16), amplitude=0.1))
    out = forward_intensity(phi, 0 * phi, [1e-2, 2e-2, 3e-2])
    assert out.shape == (3, 16, 16)


def test_positive_object_warns():
    with pytest.warns(UserWarning):
        forward_intensity(np.full((8, 8), 0.1), np.zeros((8, 8)), 1e-2)


def test_grid_mismatch():
    with pytest.raises(ValueError):
        forward_intensity(np.zeros((8, 8)), np.zeros((8, 9)), 1e-2)


def test_weak_phase_matches_ctf_to_second_order(rng):
    phi = -1e-3 * np.abs(smooth_field(rng, (32, 32)))
    f = 5e-3
    exact = forward_intensity(phi, np.zeros_like(phi), f)
    spec = build_spectrum([f], Grid2D(32, 32, 2))
    linear = ctf_forward(ComplexObject(phi, np.zeros_like(phi)), spec).images[0]
    assert np.abs(exact - linear).max() < 10 * np.abs(phi).max() ** 2


def test_linearization_slope_two(rng):
    phi = -np.abs(smooth_field(rng, (32, 32)))
    mu = 0.1 * phi
    f = 5e-3
    spec = build_spectrum([f], Grid2D(32, 32, 2))
    ts = np.logspace(-4, -1, 7)
    res = []
    for t in ts:
        exact = forward_intensity(t * phi, t * mu, f)
        lin = ctf_forward(ComplexObject(t * phi, t * mu), spec).images[0]
        res.append(np.linalg.norm(exact - lin))
    slope = np.polyfit(np.log(ts), np.log(res), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.1)
