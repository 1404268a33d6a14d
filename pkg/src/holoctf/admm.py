"""Constrained CTF phase retrieval by ADMM.

The splitting is ``min_f  ||L f - I||^2 + ||A F f||^2 + i_C(g)`` subject to
``f = g``.  The f-update is the closed-form Tikhonov solve with every
regularization weight raised by ``tau / 4``:  the system matrix of the update
is ``M^T M + A^T A + tau*I = 4 * [[S + a_phi + tau/4, X], [X, C + a_mu + tau/4]]``
and its right-hand side ``2 v + tau w = 2 (v + tau/2 w)``, so
the closed-form solve of ``v + tau/2 w`` with augmented weights is exact.  The g-update
is the metric projection onto ``C``; all sets here are pixelwise intervals, so
the projection is a clip.

Acceleration follows fast ADMM with adaptive restart (Goldstein et al., 2014):
the iterates ``(g, h)`` are extrapolated with Nesterov weights while the
combined residual ``||h_k - h^_k||^2 + ||g_k - g^_k||^2`` shrinks by at least
a factor ``eta``; otherwise the momentum is reset and the un-extrapolated
iterate is used for the next step.
"""

import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .ctf import ComplexObject, TransferSpectrum
from .errors import NonConvergence
from .gridfft import crop, half_weights, irfft2, pad, rfft2
from .tikhonov import RegularizationProfile, _prepare, hom_solver, normal_solver

__all__ = [
    "ConstraintSpec",
    "AdmmConfig",
    "ConvergenceReport",
    "project",
    "solve",
    "solve_hom",
]

_KINDS = ("none", "nonpositive", "support", "box", "composite")
_CHANNELS = ("phi_only", "both")


@dataclass(frozen=True)
class ConstraintSpec:
    """Closed convex constraint set, described per pixel as an interval.

    Use the class constructors rather than filling the fields by hand::

        ConstraintSpec.nonpositive()
        ConstraintSpec.composite([ConstraintSpec.support(mask), ConstraintSpec.nonpositive()])
    """

    kind: str = "none"
    channels: str = "both"
    mask: object = None
    lo: tuple = (-np.inf, -np.inf)
    hi: tuple = (np.inf, np.inf)
    parts: tuple = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.channels not in _CHANNELS:
            raise ValueError(f"unknown constraint channels {self.channels!r}")
        if self.kind == "support" and self.mask is None:
            raise ValueError("support constraint needs a mask")
        if self.kind == "box":
            if np.any(np.asarray(self.lo[0]) > np.asarray(self.hi[0])) or np.any(
                np.asarray(self.lo[1]) > np.asarray(self.hi[1])
            ):
                raise ValueError(f"box constraint has lo > hi: lo={self.lo}, hi={self.hi}")

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def nonpositive(cls, channels="both"):
        return cls("nonpositive", channels)

    @classmethod
    def support(cls, mask, channels="both"):
        return cls("support", channels, mask=np.asarray(mask, dtype=bool))

    @classmethod
    def box(cls, lo, hi, channels="both"):
        lo = tuple(lo) if np.ndim(lo) == 1 else (lo, lo)
        hi = tuple(hi) if np.ndim(hi) == 1 else (hi, hi)
        return cls("box", channels, lo=lo, hi=hi)

    @classmethod
    def composite(cls, parts):
        return cls("composite", parts=tuple(parts))

    def bounds(self, shape, n_channels=2):
        """Per-pixel ``(lo, hi)`` arrays of shape ``(n_channels, *shape)``."""
        lo = np.full((n_channels,) + tuple(shape), -np.inf)
        hi = np.full((n_channels,) + tuple(shape), np.inf)
        if self.kind == "composite":
            for part in self.parts:
                plo, phi = part.bounds(shape, n_channels)
                np.maximum(lo, plo, out=lo)
                np.minimum(hi, phi, out=hi)
            if np.any(lo > hi):
                raise ValueError("composite constraint set is empty")
            return lo, hi
        active = range(n_channels) if self.channels == "both" else [0]
        for ch in active:
            if self.kind == "nonpositive":
                hi[ch] = 0.0
            elif self.kind == "support":
                mask = np.asarray(self.mask, dtype=bool)
                if mask.shape != tuple(shape):
                    raise ValueError(f"support mask shape {mask.shape} does not match {tuple(shape)}")
                lo[ch][~mask] = 0.0
                hi[ch][~mask] = 0.0
            elif self.kind == "box":
                lo[ch] = self.lo[ch]
                hi[ch] = self.hi[ch]
        return lo, hi

    def padded(self, grid):
        """Same constraint with any mask embedded in the padded grid (outside = not in support)."""
        if self.kind == "support":
            return ConstraintSpec("support", self.channels, mask=pad(self.mask, grid, "zero"))
        if self.kind == "composite":
            return ConstraintSpec.composite([p.padded(grid) for p in self.parts])
        return self

    def to_dict(self):
        d = {"kind": self.kind, "channels": self.channels}
        if self.kind == "box":
            d.update(lo=[float(v) for v in self.lo], hi=[float(v) for v in self.hi])
        if self.kind == "composite":
            d["parts"] = [p.to_dict() for p in self.parts]
        return d


def project(obj, constraint):
    """Metric projection of a :class:`ComplexObject` onto the constraint set."""
    lo, hi = constraint.bounds(obj.shape)
    x = np.clip(np.stack([obj.phi, obj.mu]), lo, hi)
    return ComplexObject(x[0], x[1])


@dataclass
class AdmmConfig:
    tau: float
    max_iter: int = 300
    tol_primal: float = 1e-6
    tol_dual: float = 1e-6
    accelerate: bool = True
    restart: bool = True
    eta: float = 0.999

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class ConvergenceReport:
    iterations: int = 0
    converged: bool = False
    primal: list = field(default_factory=list)
    dual: list = field(default_factory=list)
    combined: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    restarts: list = field(default_factory=list)
    final_objective: float = float("nan")

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _norm(x):
    x = x.ravel()
    return float(np.sqrt(np.dot(x, x)))


def _run(update, objective, lo, hi, n_channels, shape, cfg, callback):
    """Generic accelerated ADMM on real arrays of shape ``(n_channels, *shape)``.

    ``update(w_hat)`` returns the half spectrum of the f-update given the half
    spectrum of ``g - h``; ``objective`` takes the half spectrum of ``g``.
    """
    g = np.zeros((n_channels,) + tuple(shape))
    h = np.zeros_like(g)
    gx, hx = g, h
    a = 1.0
    c_prev = np.inf
    report = ConvergenceReport()
    best = (np.inf, g, 0)

    for k in range(1, cfg.max_iter + 1):
        f = irfft2(update(rfft2(gx - hx)), shape)
        g_new = np.clip(f + hx, lo, hi)
        h_new = hx + f - g_new

        scale = _norm(g_new)
        primal = _norm(f - g_new)
        dual = _norm(g_new - g)
        combined = _norm(h_new - hx) ** 2 + _norm(g_new - gx) ** 2
        obj_val = objective(rfft2(g_new))
        report.primal.append(primal)
        report.dual.append(dual)
        report.combined.append(combined)
        report.objective.append(obj_val)
        report.iterations = k
        if obj_val < best[0]:
            best = (obj_val, g_new, k)
        if callback is not None:
            callback(k, g_new)

        if cfg.accelerate:
            if not cfg.restart or combined < cfg.eta * c_prev:
                a_next = 0.5 * (1 + np.sqrt(1 + 4 * a * a))
                w = (a - 1) / a_next
                gx = g_new + w * (g_new - g)
                hx = h_new + w * (h_new - h)
                c_prev = combined
            else:
                # residual grew: drop momentum, keep the plain ADMM step
                a_next = 1.0
                gx, hx = g_new, h_new
                c_prev = combined
                report.restarts.append(k)
            a = a_next
        else:
            gx, hx = g_new, h_new

        g, h = g_new, h_new
        if primal <= cfg.tol_primal * scale and dual <= cfg.tol_dual * scale:
            report.converged = True
            break

    if report.converged:
        result = g
        report.final_objective = report.objective[-1]
    else:
        report.final_objective, result, k_best = best
        warnings.warn(
            f"ADMM did not converge in {cfg.max_iter} iterations; returning iterate {k_best}",
            NonConvergence,
            stacklevel=3,
        )
    return result, report


def _half(x, full_shape):
    return np.broadcast_to(np.asarray(x, dtype=float), full_shape)[..., : full_shape[-1] // 2 + 1]


def solve(stack, reg, constraint, cfg, grid=None, pad_factor=2.0, callback=None):
    """Constrained CTF reconstruction of phase and absorption.

    Parameters
    ----------
    stack : HologramStack
    reg : RegularizationProfile
    constraint : ConstraintSpec
        Masks are given on the image grid; the padded margin counts as outside
        the support.
    cfg : AdmmConfig
    callback : callable, optional
        Called as ``callback(k, g)`` with the projected iterate on the padded grid.

    Returns
    -------
    obj : ComplexObject
        Projected iterate ``g`` cropped to the image grid.
    report : ConvergenceReport
        Flags ``converged=False`` (with a :class:`NonConvergence` warning) when
        ``max_iter`` is exhausted; the iterate with the lowest objective is
        returned in that case.
    """
    if len(stack) == 1:
        warnings.warn(
            "a single hologram does not determine phase and absorption without further constraints",
            stacklevel=2,
        )
    grid, spec, r_hat = _prepare(stack, grid, pad_factor)
    full = grid.padded_shape
    half = TransferSpectrum(grid, spec.fresnel_numbers, _half(spec.s, spec.s.shape), _half(spec.c, spec.c.shape))
    r_half = r_hat[..., : full[-1] // 2 + 1]
    v_s = np.sum(half.s * r_half, axis=0)
    v_c = np.sum(half.c * r_half, axis=0)
    a_phi = _half(reg.alpha_phi, full)
    a_mu = _half(reg.alpha_mu, full)
    solver = normal_solver(half, RegularizationProfile(a_phi + cfg.tau / 4, a_mu + cfg.tau / 4))
    half_tau = cfg.tau / 2

    def update(w_hat):
        return np.stack(solver(v_s + half_tau * w_hat[0], v_c + half_tau * w_hat[1]))

    ss, cc, sc = half.sums()
    weights = half_weights(full)
    r_energy = float(np.sum(np.abs(r_hat) ** 2))

    def objective(x_hat):
        p, m = x_hat
        pp, mm = np.abs(p) ** 2, np.abs(m) ** 2
        quad = 4 * ((ss + a_phi) * pp + (cc + a_mu) * mm + 2 * sc * (p * m.conj()).real)
        lin = 4 * (p * v_s.conj() + m * v_c.conj()).real
        return float(np.sum((quad - lin) * weights) + r_energy)

    lo, hi = constraint.padded(grid).bounds(full, 2)
    g, report = _run(update, objective, lo, hi, 2, full, cfg, callback)
    return ComplexObject(crop(g[0], grid), crop(g[1], grid)), report


def solve_hom(stack, gamma, alpha_gamma, constraint, cfg, grid=None, pad_factor=2.0, callback=None):
    """Constrained single-material CTF reconstruction of the phase.

    Only the phase channel of ``constraint`` is used.  Returns ``(phi, report)``.
    """
    if not (np.isfinite(gamma) and gamma >= 0):
        raise ValueError(f"gamma must be finite and >= 0, got {gamma}")
    alpha_gamma = np.asarray(alpha_gamma, dtype=float)
    if np.any(alpha_gamma < 0):
        raise ValueError("alpha_gamma must be non-negative")
    grid, spec, r_hat = _prepare(stack, grid, pad_factor)
    full = grid.padded_shape
    half = TransferSpectrum(grid, spec.fresnel_numbers, _half(spec.s, spec.s.shape), _half(spec.c, spec.c.shape))
    r_half = r_hat[..., : full[-1] // 2 + 1]
    hom = half.hom(gamma)
    v = np.sum(hom * r_half, axis=0)
    a_gamma = _half(alpha_gamma, full)
    solver = hom_solver(half, gamma, a_gamma + cfg.tau / 4)
    half_tau = cfg.tau / 2

    def update(w_hat):
        return solver(v + half_tau * w_hat[0])[None]

    hh = np.sum(hom**2, axis=0)
    weights = half_weights(full)
    r_energy = float(np.sum(np.abs(r_hat) ** 2))

    def objective(x_hat):
        p = x_hat[0]
        quad = 4 * (hh + a_gamma) * np.abs(p) ** 2
        lin = 4 * (p * v.conj()).real
        return float(np.sum((quad - lin) * weights) + r_energy)

    lo, hi = constraint.padded(grid).bounds(full, 1)
    g, report = _run(update, objective, lo, hi, 1, full, cfg, callback)
    return crop(g[0], grid), report
