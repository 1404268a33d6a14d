"""
Stability of CTF inversion with and without homogeneity
=======================================================

Squared smallest singular values of the normalized transfer matrices for four
closely spaced Fresnel numbers.  Without the homogeneity assumption the
stability is governed by the difference Fresnel numbers; with it, the cosine
term keeps the zero frequency away from zero.
"""

import numpy as np

from holoctf.stability import STABILITY_FRESNEL, STABILITY_GAMMA, FresnelSet, curve

fset = FresnelSet(STABILITY_FRESNEL)
print(f"{len(fset)} Fresnel numbers give {fset.n_pairs} difference Fresnel numbers:")
print("  " + ", ".join(f"{d:.3e}" for d in fset.difference_fresnel_numbers()))

xi = np.linspace(0, 1.0, 2001)
c = curve(fset, STABILITY_GAMMA, xi)

# the inhomogeneous value never exceeds the pure-phase one
print("sigma_-^2 <= pure phase everywhere:", bool(np.all(c.sigma_sq_min <= c.sigma_sq_pure)))
print(f"homogeneous value at xi = 0: {c.sigma_sq_hom[0]:.1e} (J gamma^2)")

# the lower bound is tight where the singular value is small
small = (c.sigma_sq_min < 1e-3) & (c.sigma_sq_lb > 0)
print(f"worst ratio to lower bound where sigma_-^2 < 1e-3: {np.max(c.sigma_sq_min[small] / c.sigma_sq_lb[small]):.5f}")

c.to_csv("stability_curves.csv")
print("wrote stability_curves.csv")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, stop in zip(axes, (0.1, 1.0)):
        sel = xi <= stop
        ax.semilogy(xi[sel], c.sigma_sq_pure[sel], label="pure phase")
        ax.semilogy(xi[sel], c.sigma_sq_hom[sel], label=f"homogeneous, gamma={STABILITY_GAMMA}")
        ax.semilogy(xi[sel], c.sigma_sq_min[sel], label="inhomogeneous")
        ax.semilogy(xi[sel], c.sigma_sq_lb[sel], "--", label="lower bound")
        ax.set_ylim(1e-8, 10)
        ax.set_xlabel("|xi|")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig("stability_curves.png", dpi=120)
    print("saved stability_curves.png")
