"""
Fresnel propagation of a weak sphere
====================================

A single polystyrene sphere is propagated to four detector distances with the
nonlinear Fresnel model.  The linear CTF model is compared against it as the
object contrast grows.
"""

import numpy as np

from holoctf import ComplexObject, build_spectrum, ctf_forward, forward_intensity
from holoctf.gridfft import Grid2D
from holoctf.phantom import MATERIALS, COLLOID_FRESNEL, PhantomConfig, SphereSpec, project

# one 4.24 um PS sphere on a 128 x 128 grid of 127.2 nm pixels at 13.8 keV
r = 4.24e-6 / 127.2e-9 / 2
cfg = PhantomConfig((128, 128), 127.2e-9, 13.8, [SphereSpec((64.0, 64.0), r, MATERIALS["PS"])])
obj = project(cfg)
print(f"phase min {obj.phi.min():.4f} rad, absorption min {obj.mu.min():.2e}")

holograms = forward_intensity(obj.phi, obj.mu, list(COLLOID_FRESNEL))
for f, img in zip(COLLOID_FRESNEL, holograms):
    print(f"f = {f:.2e}: intensity range [{img.min():.3f}, {img.max():.3f}]")

# the CTF is the first-order expansion around the empty beam: the error
# shrinks quadratically when the object is scaled down
spec = build_spectrum(COLLOID_FRESNEL, Grid2D(128, 128))
for t in (1.0, 0.1, 0.01):
    scaled = ComplexObject(t * obj.phi, t * obj.mu)
    err = np.abs(forward_intensity(scaled.phi, scaled.mu, list(COLLOID_FRESNEL)) - ctf_forward(scaled, spec).images).max()
    print(f"contrast x{t:<5}  max |Fresnel - CTF| = {err:.2e}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(1, 4, figsize=(12, 3))
    for ax, f, img in zip(axes, COLLOID_FRESNEL, holograms):
        ax.imshow(img, cmap="gray")
        ax.set_title(f"f = {f:.2e}")
        ax.axis("off")
    fig.tight_layout()
    fig.savefig("fresnel_propagation.png", dpi=120)
    print("saved fresnel_propagation.png")
