"""Fourier-grid conventions, unitary transforms and padding.

Spectra are kept in transform ordering (zero frequency at index ``(0, 0)``);
nothing in the package applies ``fftshift`` to stored data.  Frequencies are
angular and per pixel, ``xi_n = 2*pi*n/N`` for ``n`` in ``[-N/2, N/2)``.
"""

import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.fft

__all__ = ["Grid2D", "freq_sq", "fft2", "ifft2", "rfft2", "irfft2", "half_weights", "pad", "crop", "workers"]


def workers():
    """Number of FFT worker threads, capped by ``HOLOCTF_THREADS``."""
    value = os.environ.get("HOLOCTF_THREADS")
    if not value:
        return 1
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _even_ceil(x):
    n = math.ceil(x - 1e-9)
    return n + (n % 2)


@dataclass(frozen=True)
class Grid2D:
    """Image grid plus the padded grid used for Fourier-domain work.

    Parameters
    ----------
    height, width : int
        Size of the image in pixels, both at least 2.
    pad_factor : float
        Ratio of padded to image size along each axis.  The padded size is
        rounded up to an even number of pixels.
    """

    height: int
    width: int
    pad_factor: float = 2.0

    def __post_init__(self):
        if int(self.height) < 2 or int(self.width) < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.height}x{self.width}")
        if not self.pad_factor >= 1:
            raise ValueError(f"pad_factor must be >= 1, got {self.pad_factor}")

    @classmethod
    def like(cls, array, pad_factor=2.0):
        return cls(array.shape[-2], array.shape[-1], pad_factor)

    @property
    def shape(self):
        return (int(self.height), int(self.width))

    @property
    def padded_shape(self):
        if self.pad_factor == 1:
            # keep odd sizes untouched so pad/crop is the identity
            return self.shape
        return (_even_ceil(self.height * self.pad_factor), _even_ceil(self.width * self.pad_factor))

    @property
    def offsets(self):
        """Top-left corner of the image inside the padded grid."""
        (h, w), (ph, pw) = self.shape, self.padded_shape
        return ((ph - h) // 2, (pw - w) // 2)

    def frequencies(self):
        """Angular frequency samples ``(xi_y, xi_x)`` of the padded grid, 1D each."""
        ph, pw = self.padded_shape
        return (2 * np.pi * np.fft.fftfreq(ph), 2 * np.pi * np.fft.fftfreq(pw))


def freq_sq(grid):
    """Squared frequency magnitude ``|xi|**2`` on the padded grid.

    Zero frequency sits at index ``(0, 0)``; for even sizes the Nyquist sample
    is ``n = -N/2``, i.e. ``xi = -pi``.
    """
    ky, kx = grid.frequencies()
    return ky[:, None] ** 2 + kx[None, :] ** 2


def _check_finite(x):
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite values in field")
    return x


def fft2(x):
    """Unitary 2D Fourier transform over the last two axes."""
    return scipy.fft.fft2(_check_finite(x), norm="ortho", workers=workers())


def ifft2(x):
    """Inverse of :func:`fft2`; also unitary."""
    return scipy.fft.ifft2(_check_finite(x), norm="ortho", workers=workers())


def pad(field, grid, mode="replicate"):
    """Embed ``field`` centred in the padded grid.

    ``mode='replicate'`` repeats edge values into the margin, ``'zero'`` fills
    it with zeros.  Leading axes (e.g. a hologram stack) are carried along.
    """
    field = np.asarray(field)
    if field.shape[-2:] != grid.shape:
        raise ValueError(f"field shape {field.shape[-2:]} does not match grid {grid.shape}")
    (h, w), (ph, pw) = grid.shape, grid.padded_shape
    oy, ox = grid.offsets
    widths = [(0, 0)] * (field.ndim - 2) + [(oy, ph - h - oy), (ox, pw - w - ox)]
    if mode == "replicate":
        return np.pad(field, widths, mode="edge")
    if mode == "zero":
        return np.pad(field, widths, mode="constant")
    raise ValueError(f"unknown padding mode {mode!r}")


def crop(field, grid):
    """Cut the image region back out of a padded field (left inverse of :func:`pad`)."""
    field = np.asarray(field)
    (h, w), (ph, pw) = grid.shape, grid.padded_shape
    if field.shape[-2] < ph or field.shape[-1] < pw:
        raise ValueError(f"cannot crop field of shape {field.shape[-2:]} to grid {grid.shape}")
    if field.shape[-2:] != (ph, pw):
        raise ValueError(f"field shape {field.shape[-2:]} is not the padded shape {(ph, pw)}")
    oy, ox = grid.offsets
    return field[..., oy:oy + h, ox:ox + w]


def rfft2(x):
    """Unitary half-spectrum transform of a real field (last axis halved)."""
    return scipy.fft.rfft2(_check_finite(x), norm="ortho", workers=workers())


def irfft2(x, shape):
    """Inverse of :func:`rfft2` back to real fields with trailing ``shape``."""
    return scipy.fft.irfft2(x, s=shape, norm="ortho", workers=workers())


def half_weights(shape):
    """Column multiplicities of a half spectrum, so weighted sums match full-spectrum sums."""
    w = shape[-1]
    weights = np.full(w // 2 + 1, 2.0)
    weights[0] = 1.0
    if w % 2 == 0:
        weights[-1] = 1.0
    return weights
