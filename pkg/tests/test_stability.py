import numpy as np
import pytest

from holoctf.stability import (
    STABILITY_FRESNEL,
    STABILITY_GAMMA,
    FresnelSet,
    curve,
    sigma_hom_sq,
    sigma_min_sq,
    sigma_min_sq_lb,
    svd_oracle,
)


def test_closed_form_matches_svd(rng):
    for _ in range(500):
        j = int(rng.choice([2, 3, 4, 6]))
        fset = FresnelSet(1.0 / rng.uniform(0, 10 * np.pi, j))
        q = 4 * np.pi
        lo, hi = svd_oracle(fset, None, q)
        assert sigma_min_sq(fset, q) == pytest.approx(lo**2, abs=1e-12)
        # trace identity: sigma_-^2 + sigma_+^2 = J
        assert lo**2 + hi**2 == pytest.approx(j, abs=1e-12)


def test_homogeneous_matches_svd(rng):
    fset = FresnelSet(STABILITY_FRESNEL)
    for q in rng.uniform(0, 1, 50):
        lo, hi = svd_oracle(fset, 0.3, q)
        assert lo == hi
        assert sigma_hom_sq(fset, 0.3, q) == pytest.approx(lo**2, abs=1e-12)


def test_lower_bound_and_agreement():
    fset = FresnelSet(STABILITY_FRESNEL)
    q = np.linspace(0, 1.0, 20001) ** 2
    exact = sigma_min_sq(fset, q)
    lb = sigma_min_sq_lb(fset, q)
    assert np.all(lb <= exact)
    small = (exact < 1e-3) & (lb > 0)
    assert np.all(exact[small] / lb[small] <= 1.05)


def test_envelope_and_zero_frequency():
    fset = FresnelSet(STABILITY_FRESNEL)
    c = curve(fset, STABILITY_GAMMA, np.linspace(0, 1.5, 4001))
    assert np.all(c.sigma_sq_min <= c.sigma_sq_pure + 1e-15)
    chi = FresnelSet(STABILITY_FRESNEL).chirps(c.xi**2)
    cos_norm = np.sum(np.cos(chi) ** 2, axis=-1)
    assert np.all(c.sigma_sq_min <= np.minimum(c.sigma_sq_pure, cos_norm) + 1e-12)
    assert c.sigma_sq_hom[0] == 4 * STABILITY_GAMMA**2
    assert c.sigma_sq_min[0] == 0 and c.sigma_sq_pure[0] == 0


def test_single_fresnel_number_is_degenerate():
    fset = FresnelSet([0.01])
    q = np.linspace(0, 5, 100)
    assert not sigma_min_sq(fset, q).any()
    assert fset.n_pairs == 0


def test_shift_invariance_of_inverse_numbers(rng):
    # sigma_- depends on pairwise differences of 1/f only
    f = rng.uniform(1e-3, 1e-2, 4)
    shifted = 1.0 / (1.0 / f + 37.0)
    q = rng.uniform(0, 2, 100)
    np.testing.assert_allclose(sigma_min_sq(FresnelSet(f), q), sigma_min_sq(FresnelSet(shifted), q), atol=1e-11)


def test_difference_fresnel_numbers():
    fset = FresnelSet(STABILITY_FRESNEL)
    assert fset.n_pairs == 6
    d = fset.difference_fresnel_numbers()
    assert d[0] == pytest.approx(0.1225)
    assert np.any(np.isclose(d, 0.06))
    assert FresnelSet([0.1, 0.2, 0.3]).n_pairs == 3
    assert np.isinf(FresnelSet([0.1, 0.1]).difference_fresnel_numbers()[0])


def test_fresnel_set_validation():
    with pytest.raises(ValueError):
        FresnelSet([0.1, -0.1])
    with pytest.raises(ValueError):
        sigma_hom_sq(FresnelSet([0.1]), -1.0, 0.0)
    assert list(FresnelSet([0.1, 0.3, 0.2]).values) == [0.3, 0.2, 0.1]


def test_csv_format(tmp_path):
    c = curve(FresnelSet(STABILITY_FRESNEL), STABILITY_GAMMA, [0.0, 0.1])
    text = c.to_csv()
    lines = text.split("\r\n")
    assert lines[0] == "xi,sigma_sq_min,sigma_sq_lb,sigma_sq_hom,sigma_sq_pure"
    assert lines[1].startswith("0.0,0.0,0.0,0.0004")
    assert len(lines) == 4 and lines[-1] == ""
    c.to_csv(tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_bytes() == text.encode()
