"""Linearized (CTF) forward model, its adjoint and the per-frequency transfer spectra.

All operators act on objects defined on the image grid.  The object is
zero-padded onto the padded grid, filtered there and cropped back, so the
forward operator and its adjoint are exact adjoints of each other.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .gridfft import Grid2D, crop, fft2, freq_sq, ifft2, pad

__all__ = [
    "ComplexObject",
    "HologramStack",
    "TransferSpectrum",
    "build_spectrum",
    "ctf_forward",
    "ctf_adjoint",
    "hom_forward",
    "hom_adjoint",
]


@dataclass(frozen=True)
class ComplexObject:
    """Object ``f = mu + i*phi`` held as two real fields.

    By convention both phase and absorption are non-positive; this is not
    enforced here, see :meth:`check_sign`.
    """

    phi: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        if phi.shape != mu.shape or phi.ndim != 2:
            raise ValueError(f"phi and mu must share a 2D shape, got {phi.shape} and {mu.shape}")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(mu))):
            raise ValueError("object contains non-finite values")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape), np.zeros(shape))

    @classmethod
    def homogeneous(cls, phi, gamma):
        """Single-material object with ``mu = gamma * phi``."""
        phi = np.asarray(phi, dtype=float)
        return cls(phi, gamma * phi)

    @property
    def shape(self):
        return self.phi.shape

    def check_sign(self):
        if np.any(self.phi > 0) or np.any(self.mu > 0):
            warnings.warn("object has positive phase or absorption values", stacklevel=2)
        return self


@dataclass(frozen=True)
class HologramStack:
    """``J`` flat-field normalized holograms and their pixel Fresnel numbers."""

    images: np.ndarray
    fresnel_numbers: tuple

    def __post_init__(self):
        images = np.asarray(self.images, dtype=float)
        if images.ndim == 2:
            images = images[None]
        if images.ndim != 3:
            raise ValueError(f"hologram stack must be 2D or 3D, got shape {images.shape}")
        fn = tuple(float(f) for f in np.atleast_1d(self.fresnel_numbers))
        if len(fn) != images.shape[0]:
            raise ValueError(f"{images.shape[0]} holograms but {len(fn)} Fresnel numbers")
        if not all(f > 0 and np.isfinite(f) for f in fn):
            raise ValueError(f"Fresnel numbers must be positive and finite, got {fn}")
        if len(set(fn)) < len(fn):
            warnings.warn(f"duplicate Fresnel numbers in stack: {fn}", stacklevel=2)
        if not np.all(np.isfinite(images)):
            raise ValueError("hologram stack contains non-finite values")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "fresnel_numbers", fn)

    def __len__(self):
        return len(self.fresnel_numbers)

    @property
    def shape(self):
        return self.images.shape[-2:]

    def residuals(self):
        """Contrast ``I_j - 1`` of each hologram."""
        return self.images - 1.0

    def reordered(self, order):
        order = list(order)
        return HologramStack(self.images[order], tuple(self.fresnel_numbers[i] for i in order))


@dataclass(frozen=True)
class TransferSpectrum:
    """Sine and cosine transfer functions of ``J`` Fresnel numbers on a padded grid.

    ``s`` and ``c`` have shape ``(J, PH, PW)`` in transform ordering.
    """

    grid: Grid2D
    fresnel_numbers: tuple
    s: np.ndarray
    c: np.ndarray

    def __len__(self):
        return len(self.fresnel_numbers)

    def hom(self, gamma):
        """Homogeneous transfer ``s_j + gamma * c_j``."""
        return self.s + gamma * self.c

    def sums(self):
        """``(sum s^2, sum c^2, sum s*c)`` over holograms, per frequency."""
        return (
            np.sum(self.s**2, axis=0),
            np.sum(self.c**2, axis=0),
            np.sum(self.s * self.c, axis=0),
        )


def build_spectrum(fresnel_numbers, grid):
    """Evaluate ``sin`` and ``cos`` of the chirp ``|xi|^2 / (4 pi f_j)`` on ``grid``."""
    fn = tuple(float(f) for f in np.atleast_1d(fresnel_numbers))
    if not all(f > 0 and np.isfinite(f) for f in fn):
        raise ValueError(f"Fresnel numbers must be positive and finite, got {fn}")
    xi_sq = freq_sq(grid)
    chirp = xi_sq[None] / (4 * np.pi * np.asarray(fn)[:, None, None])
    return TransferSpectrum(grid, fn, np.sin(chirp), np.cos(chirp))


def _check_grid(shape, spec):
    if tuple(shape) != spec.grid.shape:
        raise ValueError(f"field shape {tuple(shape)} does not match spectrum grid {spec.grid.shape}")


def _forward_fourier(phi_hat, mu_hat, spec):
    return 2 * (spec.s * phi_hat + spec.c * mu_hat)


def _to_stack(contrast_hat, spec):
    images = crop(ifft2(contrast_hat), spec.grid)
    return HologramStack(1.0 + images.real, spec.fresnel_numbers)


def ctf_forward(obj, spec):
    """Linearized holograms ``I_j = 1 + 2 F^-1(s_j F phi + c_j F mu)``."""
    _check_grid(obj.shape, spec)
    phi_hat = fft2(pad(obj.phi, spec.grid, "zero"))
    mu_hat = fft2(pad(obj.mu, spec.grid, "zero"))
    return _to_stack(_forward_fourier(phi_hat, mu_hat, spec), spec)


def _residual_hat(residuals, spec):
    residuals = np.asarray(residuals, dtype=float)
    if residuals.ndim == 2:
        residuals = residuals[None]
    _check_grid(residuals.shape[-2:], spec)
    if residuals.shape[0] != len(spec):
        raise ValueError(f"{residuals.shape[0]} residual images for {len(spec)} Fresnel numbers")
    return fft2(pad(residuals, spec.grid, "zero"))


def ctf_adjoint(residuals, spec):
    """Adjoint of the CTF operator applied to hologram residuals ``I_j - 1``.

    ``residuals`` may be a :class:`HologramStack` (its ``I - 1`` is used) or
    an array of shape ``(J, H, W)``.
    """
    if isinstance(residuals, HologramStack):
        residuals = residuals.residuals()
    r_hat = _residual_hat(residuals, spec)
    phi = crop(ifft2(2 * np.sum(spec.s * r_hat, axis=0)), spec.grid).real
    mu = crop(ifft2(2 * np.sum(spec.c * r_hat, axis=0)), spec.grid).real
    return ComplexObject(phi, mu)


def hom_forward(phi, gamma, spec):
    """Holograms of a single-material object, ``I_j = 1 + 2 F^-1((s_j + gamma c_j) F phi)``."""
    if not (np.isfinite(gamma) and gamma >= 0):
        raise ValueError(f"gamma must be finite and >= 0, got {gamma}")
    phi = np.asarray(phi, dtype=float)
    _check_grid(phi.shape, spec)
    phi_hat = fft2(pad(phi, spec.grid, "zero"))
    return _to_stack(2 * spec.hom(gamma) * phi_hat, spec)


def hom_adjoint(residuals, gamma, spec):
    """Adjoint of :func:`hom_forward` (minus the constant background)."""
    if isinstance(residuals, HologramStack):
        residuals = residuals.residuals()
    r_hat = _residual_hat(residuals, spec)
    return crop(ifft2(2 * np.sum(spec.hom(gamma) * r_hat, axis=0)), spec.grid).real
