"""Singular-value stability of the normalized CTF transfer matrices.

The normalized matrix has rows ``(sin chi_j, cos chi_j)`` with chirp
``chi_j = |xi|^2 / (4 pi f_j)``; its homogeneous counterpart is the column
``sin chi_j + gamma cos chi_j``.  Everything here works on ``|xi|^2`` and
broadcasts over arrays of it.
"""

import csv
import io
from dataclasses import dataclass
from itertools import combinations

import numpy as np

__all__ = [
    "FresnelSet",
    "StabilityCurve",
    "sigma_min_sq",
    "sigma_min_sq_lb",
    "sigma_hom_sq",
    "svd_oracle",
    "curve",
    "STABILITY_FRESNEL",
    "STABILITY_GAMMA",
]

STABILITY_FRESNEL = (2.50e-3, 2.45e-3, 2.40e-3, 2.39e-3)
STABILITY_GAMMA = 0.01


class FresnelSet:
    """Set of pixel Fresnel numbers, kept sorted in descending order."""

    def __init__(self, values):
        values = np.sort(np.atleast_1d(np.asarray(values, dtype=float)))[::-1]
        if values.size < 1:
            raise ValueError("need at least one Fresnel number")
        if not np.all(np.isfinite(values) & (values > 0)):
            raise ValueError(f"Fresnel numbers must be positive and finite, got {values}")
        self.values = values

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"FresnelSet({self.values.tolist()})"

    @property
    def n_pairs(self):
        """Number of difference terms, ``(J^2 - J) / 2``."""
        j = len(self)
        return (j * j - j) // 2

    def inverse_differences(self):
        """``1/f_k - 1/f_j`` for every pair ``k < j`` (signed)."""
        inv = 1.0 / self.values
        return np.array([inv[k] - inv[j] for k, j in combinations(range(len(self)), 2)])

    def difference_fresnel_numbers(self):
        """Magnitudes of the difference Fresnel numbers; ``inf`` for duplicate pairs."""
        d = np.abs(self.inverse_differences())
        with np.errstate(divide="ignore"):
            return 1.0 / d

    def chirps(self, xi_sq):
        xi_sq = np.asarray(xi_sq, dtype=float)
        return xi_sq[..., None] / (4 * np.pi * self.values)

    def difference_chirps(self, xi_sq):
        xi_sq = np.asarray(xi_sq, dtype=float)
        return xi_sq[..., None] * self.inverse_differences() / (4 * np.pi)


def _pair_sum(fset, xi_sq):
    if fset.n_pairs == 0:
        return np.zeros(np.shape(xi_sq))
    return np.sum(np.sin(fset.difference_chirps(xi_sq)) ** 2, axis=-1)


def sigma_min_sq(fset, xi_sq):
    """Squared smallest singular value of the normalized ``J x 2`` transfer matrix.

    Evaluates ``J/2 - sqrt(J^2 - 4 P)/2`` with ``P`` the sum of ``sin^2`` over
    difference chirps, in the cancellation-free form ``2P / (J + sqrt(J^2 - 4P))``.
    """
    j = len(fset)
    p = _pair_sum(fset, xi_sq)
    root = np.sqrt(np.maximum(j * j - 4 * p, 0.0))
    return 2 * p / (j + root)


def sigma_min_sq_lb(fset, xi_sq):
    """Lower bound ``P / J`` of :func:`sigma_min_sq`."""
    return _pair_sum(fset, xi_sq) / len(fset)


def sigma_hom_sq(fset, gamma, xi_sq):
    """Squared singular value ``sum_j (sin chi_j + gamma cos chi_j)^2`` of the homogeneous column."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    chi = fset.chirps(xi_sq)
    return np.sum((np.sin(chi) + gamma * np.cos(chi)) ** 2, axis=-1)


def svd_oracle(fset, gamma, xi_sq):
    """Brute-force singular values at a single ``|xi|^2``.

    Assembles the normalized transfer matrix, ``J x 2`` when ``gamma`` is None
    and the ``J x 1`` homogeneous column otherwise, and diagonalizes its Gram
    matrix.  Returns ``(sigma_min, sigma_max)``.
    """
    chi = fset.chirps(float(xi_sq))
    if gamma is None:
        m = np.column_stack([np.sin(chi), np.cos(chi)])
    else:
        m = (np.sin(chi) + gamma * np.cos(chi))[:, None]
    eig = np.linalg.eigvalsh(m.T @ m)
    eig = np.sqrt(np.maximum(eig, 0.0))
    return float(eig[0]), float(eig[-1])


@dataclass
class StabilityCurve:
    xi: np.ndarray
    sigma_sq_min: np.ndarray
    sigma_sq_lb: np.ndarray
    sigma_sq_hom: np.ndarray
    sigma_sq_pure: np.ndarray

    columns = ("xi", "sigma_sq_min", "sigma_sq_lb", "sigma_sq_hom", "sigma_sq_pure")

    def to_csv(self, path=None):
        """Write the curves as CSV (header row, '.' decimals); returns the text if no path."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.columns)
        for row in zip(*(getattr(self, c) for c in self.columns)):
            writer.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None


def curve(fset, gamma, xi_grid):
    """Evaluate all stability curves over radial frequencies ``xi_grid`` (not squared)."""
    xi = np.asarray(xi_grid, dtype=float)
    xi_sq = xi**2
    return StabilityCurve(
        xi=xi,
        sigma_sq_min=sigma_min_sq(fset, xi_sq),
        sigma_sq_lb=sigma_min_sq_lb(fset, xi_sq),
        sigma_sq_hom=sigma_hom_sq(fset, gamma, xi_sq),
        sigma_sq_pure=sigma_hom_sq(fset, 0.0, xi_sq),
    )
