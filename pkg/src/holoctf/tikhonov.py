"""Closed-form frequency-weighted Tikhonov inversion of the stacked CTF system."""

from dataclasses import dataclass

import numpy as np

from .ctf import ComplexObject, build_spectrum
from .errors import SingularSystem
from .gridfft import Grid2D, crop, fft2, freq_sq, ifft2, pad

__all__ = [
    "RegularizationProfile",
    "TwoLevelProfileSpec",
    "build_two_level",
    "cutoff_radius",
    "determinant",
    "invert",
    "invert_hom",
    "default_profiles",
    "HOM_DEFAULTS",
    "INHOM_DEFAULTS",
]

# two-level (low; high) settings used for the colloid reconstructions
HOM_DEFAULTS = {"alpha_gamma": (0.0, 5e-3), "gamma": 8.61e-3, "tau": 1e-2}
INHOM_DEFAULTS = {"alpha_phi": (6e-5, 5e-3), "alpha_mu": (0.0, 5e-1), "tau": 1e-4}


@dataclass(frozen=True)
class RegularizationProfile:
    """Frequency weights ``alpha_phi(xi)`` and ``alpha_mu(xi)`` on the padded grid.

    Scalars are accepted and broadcast.
    """

    alpha_phi: np.ndarray
    alpha_mu: np.ndarray

    def __post_init__(self):
        for name in ("alpha_phi", "alpha_mu"):
            value = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(value)) or np.any(value < 0):
                raise ValueError(f"{name} must be finite and non-negative")
            object.__setattr__(self, name, value)

    def augmented(self, extra):
        return RegularizationProfile(self.alpha_phi + extra, self.alpha_mu + extra)


@dataclass(frozen=True)
class TwoLevelProfileSpec:
    """Step profile: ``alpha_low`` below the first pure-phase CTF maximum, ``alpha_high`` above.

    ``transition_width`` is the width of a smooth blend band as a fraction of
    the cutoff radius; 0 gives a hard step.
    """

    alpha_low: float
    alpha_high: float
    cutoff_fresnel: float
    transition_width: float = 0.0

    def __post_init__(self):
        if self.alpha_low < 0 or self.alpha_high < 0:
            raise ValueError("regularization levels must be non-negative")
        if not self.cutoff_fresnel > 0:
            raise ValueError("cutoff_fresnel must be positive")
        if not 0 <= self.transition_width < 2:
            raise ValueError("transition_width must lie in [0, 2)")


def cutoff_radius(fresnel):
    """Radius of the first maximum of ``sin^2(|xi|^2 / (4 pi f))``."""
    return np.sqrt(2 * np.pi**2 * fresnel)


def build_two_level(spec, grid):
    r = np.sqrt(freq_sq(grid))
    rc = cutoff_radius(spec.cutoff_fresnel)
    if spec.transition_width == 0:
        weight = (r >= rc).astype(float)
    else:
        half = 0.5 * spec.transition_width * rc
        t = np.clip((r - (rc - half)) / (2 * half), 0.0, 1.0)
        weight = t * t * (3 - 2 * t)
    return spec.alpha_low + (spec.alpha_high - spec.alpha_low) * weight


def default_profiles(grid, fresnel_numbers, cutoff_fresnel=None):
    """Default two-level profiles for both models on ``grid``.

    Returns ``(RegularizationProfile, alpha_gamma)``.  The cutoff defaults to
    the largest Fresnel number of the set.
    """
    if cutoff_fresnel is None:
        cutoff_fresnel = max(fresnel_numbers)
    lo, hi = INHOM_DEFAULTS["alpha_phi"]
    a_phi = build_two_level(TwoLevelProfileSpec(lo, hi, cutoff_fresnel), grid)
    lo, hi = INHOM_DEFAULTS["alpha_mu"]
    a_mu = build_two_level(TwoLevelProfileSpec(lo, hi, cutoff_fresnel), grid)
    lo, hi = HOM_DEFAULTS["alpha_gamma"]
    a_gamma = build_two_level(TwoLevelProfileSpec(lo, hi, cutoff_fresnel), grid)
    return RegularizationProfile(a_phi, a_mu), a_gamma


def determinant(spec, reg):
    """``det(M^T M + A^T A)`` per frequency for the factor-2 transfer matrix."""
    ss, cc, sc = spec.sums()
    a_phi, a_mu = reg.alpha_phi, reg.alpha_mu
    return 16 * (a_mu * a_phi + a_mu * ss + a_phi * cc + ss * cc - sc**2)


def _singular_threshold(n_holo):
    return 1e-14 * 16 * n_holo**2


def _prepare(stack, grid, pad_factor):
    if grid is None:
        grid = Grid2D.like(stack.images, pad_factor)
    if tuple(stack.shape) != grid.shape:
        raise ValueError(f"stack shape {tuple(stack.shape)} does not match grid {grid.shape}")
    spec = build_spectrum(stack.fresnel_numbers, grid)
    r_hat = fft2(pad(stack.residuals(), grid, "replicate"))
    return grid, spec, r_hat


def normal_solver(spec, reg):
    """Per-frequency closed-form solver of the regularized 2x2 normal equations.

    Returns a function mapping the half right-hand sides ``v_s = sum_j s_j R_j``
    and ``v_c = sum_j c_j R_j`` to ``(F phi, F mu)``; with the factor-2
    transfer matrix this is the ``8/D`` closed form.  Coefficients are
    computed once, so the returned function is cheap to call repeatedly.
    """
    ss, cc, sc = spec.sums()
    d = determinant(spec, reg)
    thresh = _singular_threshold(len(spec))
    if np.any(d <= thresh):
        raise SingularSystem(
            f"determinant vanishes at {int(np.sum(d <= thresh))} frequencies; "
            "increase regularization or add holograms"
        )
    scale = 8 / d
    k_pp = scale * (reg.alpha_mu + cc)
    k_mm = scale * (reg.alpha_phi + ss)
    k_pm = -scale * sc

    def apply(v_s, v_c):
        return k_pp * v_s + k_pm * v_c, k_pm * v_s + k_mm * v_c

    return apply


def solve_fourier(v_s, v_c, spec, reg):
    """One-shot form of :func:`normal_solver`."""
    return normal_solver(spec, reg)(v_s, v_c)


def invert(stack, reg, grid=None, pad_factor=2.0):
    """Tikhonov-regularized CTF reconstruction of phase and absorption.

    Parameters
    ----------
    stack : HologramStack
        Flat-field normalized holograms, at least one.
    reg : RegularizationProfile
        Weights on the padded grid (or scalars).
    grid : Grid2D, optional
        Padding geometry; defaults to the stack shape with ``pad_factor``.

    Returns
    -------
    ComplexObject
        Reconstruction on the image grid.

    Raises
    ------
    SingularSystem
        If the determinant is numerically zero at any frequency, e.g. a single
        hologram without regularization.
    """
    grid, spec, r_hat = _prepare(stack, grid, pad_factor)
    v_s = np.sum(spec.s * r_hat, axis=0)
    v_c = np.sum(spec.c * r_hat, axis=0)
    phi_hat, mu_hat = solve_fourier(v_s, v_c, spec, reg)
    return ComplexObject(crop(ifft2(phi_hat), grid).real, crop(ifft2(mu_hat), grid).real)


def hom_solver(spec, gamma, alpha_gamma):
    """Scalar analogue of :func:`normal_solver` for the single-material model."""
    h = spec.hom(gamma)
    denom = 4 * np.sum(h**2, axis=0) + 4 * np.asarray(alpha_gamma, dtype=float)
    thresh = 1e-14 * 4 * len(spec) ** 2
    if np.any(denom <= thresh):
        raise SingularSystem(
            f"homogeneous CTF denominator vanishes at {int(np.sum(denom <= thresh))} frequencies"
        )
    gain = 2 / denom
    return lambda v: gain * v


def invert_hom(stack, gamma, alpha_gamma, grid=None, pad_factor=2.0):
    """Tikhonov-regularized single-material CTF reconstruction of the phase."""
    if not (np.isfinite(gamma) and gamma >= 0):
        raise ValueError(f"gamma must be finite and >= 0, got {gamma}")
    alpha_gamma = np.asarray(alpha_gamma, dtype=float)
    if np.any(alpha_gamma < 0):
        raise ValueError("alpha_gamma must be non-negative")
    grid, spec, r_hat = _prepare(stack, grid, pad_factor)
    v = np.sum(spec.hom(gamma) * r_hat, axis=0)
    phi_hat = hom_solver(spec, gamma, alpha_gamma)(v)
    return crop(ifft2(phi_hat), grid).real
