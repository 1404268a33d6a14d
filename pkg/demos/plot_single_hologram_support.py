"""
One hologram and a support constraint
=====================================

With a single hologram and no absorption the pure-phase CTF vanishes at
every zero of sin(chi), so the plain Fourier filter has nothing to divide by.
A known support plus non-positivity restores the lost frequencies.
"""

import numpy as np

from holoctf import AdmmConfig, ConstraintSpec, SingularSystem, invert_hom, solve_hom, synthesize
from holoctf.phantom import MATERIALS, COLLOID_FRESNEL, MaterialSpec, PhantomConfig, SphereSpec

weak = MaterialSpec("PS-weak", 0.3 * MATERIALS["PS"].delta, 0.0)
r = 4.24e-6 / 127.2e-9 / 2
cfg = PhantomConfig((128, 128), 127.2e-9, 13.8, [SphereSpec((64.0, 64.0), r, weak)])
stack, truth = synthesize(cfg, [COLLOID_FRESNEL[0]])

try:
    invert_hom(stack, 0.0, 0.0)
except SingularSystem as exc:
    print("closed form:", exc)

yy, xx = np.mgrid[:128, :128]
support = (xx - 64.0) ** 2 + (yy - 64.0) ** 2 <= (r + 1) ** 2
constraint = ConstraintSpec.composite([ConstraintSpec.support(support), ConstraintSpec.nonpositive()])

history = []
phi, report = solve_hom(
    stack, 0.0, 0.0, constraint, AdmmConfig(tau=1e-2, max_iter=1000),
    callback=lambda k, g: history.append(k),
)
err = np.sqrt(np.mean((phi - truth.phi) ** 2)) / np.abs(truth.phi).max()
print(f"ADMM converged={report.converged} after {report.iterations} iterations, {len(report.restarts)} restarts")
print(f"phase RMSE {err:.4f} of peak")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
    a.plot(truth.phi[64], label="truth")
    a.plot(phi[64], "--", label="ADMM")
    a.legend()
    a.set_title("central line")
    b.semilogy(report.primal, label="primal")
    b.semilogy(report.dual, label="dual")
    b.legend()
    b.set_xlabel("iteration")
    fig.tight_layout()
    fig.savefig("single_hologram_support.png", dpi=120)
    print("saved single_hologram_support.png")
