"""Nonlinear Fresnel propagation and the holographic forward operator."""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gridfft import Grid2D, crop, fft2, freq_sq, ifft2, pad

__all__ = [
    "Geometry",
    "fresnel_number",
    "transfer_function",
    "propagate",
    "backpropagate",
    "forward_intensity",
]


@dataclass(frozen=True)
class Geometry:
    """Imaging geometry in SI units.

    ``source_distance`` switches to cone-beam geometry, which is mapped onto
    an equivalent parallel beam through the Fresnel scaling theorem.
    """

    wavelength: float
    distance: float
    pixel_size: float
    source_distance: Optional[float] = None

    def __post_init__(self):
        values = [self.wavelength, self.distance, self.pixel_size]
        if self.source_distance is not None:
            values.append(self.source_distance)
        if not all(math.isfinite(v) and v > 0 for v in values):
            raise ValueError(f"geometry values must be positive and finite: {self}")


def fresnel_number(geom):
    """Pixel Fresnel number ``s**2 / (lambda * z)`` of a geometry.

    For cone beams the magnification ``M = (z01 + z12) / z01`` rescales the
    pixel to ``s / M`` and the distance to ``z12 / M``.
    """
    s, z = geom.pixel_size, geom.distance
    if geom.source_distance is not None:
        mag = (geom.source_distance + geom.distance) / geom.source_distance
        s, z = s / mag, z / mag
    return s**2 / (geom.wavelength * z)


def _check_fresnel(f):
    if not (f > 0):
        raise ValueError(f"Fresnel number must be positive, got {f}")
    return float(f)


def transfer_function(xi_sq, f):
    """Fresnel transfer function ``exp(-i |xi|^2 / (4 pi f))``; ``f=inf`` gives ones."""
    f = _check_fresnel(f)
    if math.isinf(f):
        return np.ones_like(xi_sq, dtype=complex)
    return np.exp(-1j * xi_sq / (4 * np.pi * f))


def _apply(psi, f, conjugate):
    f = _check_fresnel(f)
    psi = np.asarray(psi)
    if math.isinf(f):
        return psi.astype(complex, copy=True)
    grid = Grid2D(psi.shape[-2], psi.shape[-1], pad_factor=1)
    m = transfer_function(freq_sq(grid), f)
    if conjugate:
        m = m.conj()
    return ifft2(m * fft2(psi))


def propagate(psi, f):
    """Propagate the wave field ``psi`` (already padded) by Fresnel number ``f``.

    The field is treated as periodic over its array; pad beforehand to keep
    wrap-around out of the region of interest.
    """
    return _apply(psi, f, conjugate=False)


def backpropagate(psi, f):
    """Undo :func:`propagate` using the conjugate transfer function."""
    return _apply(psi, f, conjugate=True)


def forward_intensity(phi, mu, f, pad_factor=2.0):
    """Hologram ``|D(exp(mu + i phi))|**2`` of an object at Fresnel number ``f``.

    The object is embedded in unit transmission on the padded grid, propagated,
    and the intensity is cropped back to the object grid.

    Parameters
    ----------
    phi, mu : ndarray
        Phase and log-amplitude, same 2D shape, both expected to be <= 0.
    f : float or sequence of float
        Pixel Fresnel number(s).  A sequence returns a ``(J, H, W)`` stack.
    pad_factor : float
        Padding ratio of the simulation grid.
    """
    phi = np.asarray(phi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if phi.shape != mu.shape or phi.ndim != 2:
        raise ValueError(f"phi and mu must share a 2D shape, got {phi.shape} and {mu.shape}")
    if np.any(phi > 0) or np.any(mu > 0):
        warnings.warn("object has positive phase or absorption values", stacklevel=2)
    grid = Grid2D.like(phi, pad_factor)
    # zero margin of the exponent = unit transmission, i.e. empty beam
    psi = np.exp(pad(mu, grid, "zero") + 1j * pad(phi, grid, "zero"))
    if np.ndim(f) == 0:
        return crop(np.abs(propagate(psi, f)) ** 2, grid)
    return np.stack([crop(np.abs(propagate(psi, fj)) ** 2, grid) for fj in f])
