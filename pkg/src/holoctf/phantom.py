"""Synthetic colloid phantoms: projected spheres of known materials and their holograms."""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ctf import ComplexObject, HologramStack
from .fresnel import forward_intensity

__all__ = [
    "HC_EV_M",
    "MaterialSpec",
    "SphereSpec",
    "PhantomConfig",
    "MATERIALS",
    "wavelength",
    "project",
    "synthesize",
    "colloid_scene",
    "COLLOID_FRESNEL",
]

HC_EV_M = 1.23984193e-6
COLLOID_FRESNEL = (1.84e-3, 1.81e-3, 1.78e-3, 1.73e-3)


@dataclass(frozen=True)
class MaterialSpec:
    """Complex refractive index ``n = 1 - delta + i*beta`` of a material."""

    name: str
    delta: float
    beta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"{self.name}: delta must be positive")
        if self.beta < 0:
            raise ValueError(f"{self.name}: beta must be non-negative")

    @property
    def gamma(self):
        return self.beta / self.delta


# 13.8 keV values
MATERIALS = {
    "SiO2": MaterialSpec("SiO2", 1.86e-6, 1.60e-8),
    "PS": MaterialSpec("PS", 1.23e-6, 7.08e-10),
}


@dataclass(frozen=True)
class SphereSpec:
    center: tuple
    radius: float
    material: MaterialSpec

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")


@dataclass
class PhantomConfig:
    """Scene description.  Sphere centres and radii are in pixels, ``(x, y)`` order."""

    shape: tuple
    pixel_size: float
    energy_kev: float
    spheres: list = field(default_factory=list)
    photon_count: Optional[float] = None
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.shape) != 2 or min(self.shape) < 2:
            raise ValueError(f"invalid phantom shape {self.shape}")
        if not (self.pixel_size > 0 and self.energy_kev > 0):
            raise ValueError("pixel_size and energy_kev must be positive")
        if self.photon_count is not None and not self.photon_count > 0:
            raise ValueError("photon_count must be positive")

    @property
    def wavelength(self):
        return wavelength(self.energy_kev)

    @property
    def wavenumber(self):
        return 2 * np.pi / self.wavelength


def wavelength(energy_kev):
    """Photon wavelength in metres for an energy in keV."""
    return HC_EV_M / (energy_kev * 1e3)


def _chord(r_sq, radius):
    return 2 * np.sqrt(np.maximum(radius**2 - r_sq, 0.0))


def _sphere_thickness(shape, sphere, sub=4):
    """Projected chord length in pixels, supersampled ``sub x sub`` near the rim."""
    h, w = shape
    cx, cy = sphere.center
    r = sphere.radius
    out = np.zeros(shape)
    y0, y1 = max(int(math.floor(cy - r - 1)), 0), min(int(math.ceil(cy + r + 2)), h)
    x0, x1 = max(int(math.floor(cx - r - 1)), 0), min(int(math.ceil(cx + r + 2)), w)
    if y0 >= y1 or x0 >= x1:
        return out
    yy, xx = np.mgrid[y0:y1, x0:x1].astype(float)
    dy, dx = yy - cy, xx - cx
    rho = np.sqrt(dx**2 + dy**2)
    t = _chord(rho**2, r)
    rim = np.abs(rho - r) < 0.75
    if np.any(rim):
        offs = (np.arange(sub) + 0.5) / sub - 0.5
        oy, ox = np.meshgrid(offs, offs, indexing="ij")
        ry = dy[rim][:, None] + oy.ravel()
        rx = dx[rim][:, None] + ox.ravel()
        t[rim] = _chord(rx**2 + ry**2, r).mean(axis=1)
    out[y0:y1, x0:x1] = t
    return out


def project(config):
    """Phase and absorption of the scene in projection approximation.

    ``phi = -k * sum(delta * t)`` and ``mu = -k * sum(beta * t)`` with ``t``
    the projected sphere thickness in metres; overlapping spheres add.
    """
    h, w = config.shape
    phi = np.zeros((h, w))
    mu = np.zeros((h, w))
    k = config.wavenumber
    for sphere in config.spheres:
        cx, cy = sphere.center
        r = sphere.radius
        if cx - r < 0 or cy - r < 0 or cx + r > w - 1 or cy + r > h - 1:
            warnings.warn(f"sphere at {sphere.center} is clipped by the image border", stacklevel=2)
        t = _sphere_thickness((h, w), sphere) * config.pixel_size
        phi -= k * sphere.material.delta * t
        mu -= k * sphere.material.beta * t
    return ComplexObject(phi, mu)


def synthesize(config, fresnel_numbers, pad_factor=2.0):
    """Simulate holograms of the scene with the nonlinear Fresnel model.

    With ``config.photon_count`` set, each intensity is replaced by
    ``Poisson(count * I) / count`` drawn from a generator seeded with
    ``config.rng_seed``.

    Returns
    -------
    stack : HologramStack
    truth : ComplexObject
    """
    truth = project(config)
    images = forward_intensity(truth.phi, truth.mu, list(fresnel_numbers), pad_factor=pad_factor)
    if config.photon_count is not None:
        rng = np.random.default_rng(config.rng_seed)
        images = rng.poisson(config.photon_count * images) / config.photon_count
    return HologramStack(images, tuple(fresnel_numbers)), truth


def colloid_scene(
    shape=(256, 256),
    pixel_size=127.2e-9,
    energy_kev=13.8,
    d_silica=4.27e-6,
    d_ps=4.24e-6,
    photon_count=None,
    rng_seed=0,
):
    """Mixed silica / polystyrene colloid scene on a loose hexagonal-ish layout.

    Spheres alternate between the two materials and fill the central part of
    the field, leaving a margin of empty beam around them.
    """
    h, w = shape
    r_si = d_silica / pixel_size / 2
    r_ps = d_ps / pixel_size / 2
    step = 2.4 * max(r_si, r_ps)
    margin = 0.18 * min(h, w) + max(r_si, r_ps)
    spheres = []
    ys = np.arange(margin, h - margin + 1e-9, step)
    for i, y in enumerate(ys):
        shift = 0.5 * step if i % 2 else 0.0
        xs = np.arange(margin + shift, w - margin + 1e-9, step)
        for j, x in enumerate(xs):
            if (i + j) % 2 == 0:
                spheres.append(SphereSpec((float(x), float(y)), r_si, MATERIALS["SiO2"]))
            else:
                spheres.append(SphereSpec((float(x), float(y)), r_ps, MATERIALS["PS"]))
    return PhantomConfig(tuple(shape), pixel_size, energy_kev, spheres, photon_count, rng_seed)
