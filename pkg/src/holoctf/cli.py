"""Command-line tools for CTF phase retrieval of near-field holograms.

Exit codes: 0 success, 2 invalid input or configuration, 3 grid mismatch,
4 singular system, 5 ADMM did not converge (outputs are still written).
"""

import argparse
import json
import os
import sys
import warnings

import jsonschema
import numpy as np

from . import container, phantom, stability
from .admm import AdmmConfig, ConstraintSpec, solve, solve_hom
from .ctf import HologramStack
from .errors import NonConvergence, SingularSystem
from .fresnel import forward_intensity
from .gridfft import Grid2D
from .tikhonov import (
    HOM_DEFAULTS,
    INHOM_DEFAULTS,
    RegularizationProfile,
    TwoLevelProfileSpec,
    build_two_level,
    invert,
    invert_hom,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GRID = 3
EXIT_SINGULAR = 4
EXIT_NONCONVERGENCE = 5

_material = {
    "oneOf": [
        {"type": "string"},
        {
            "type": "object",
            "required": ["name", "delta", "beta"],
            "properties": {
                "name": {"type": "string"},
                "delta": {"type": "number", "exclusiveMinimum": 0},
                "beta": {"type": "number", "minimum": 0},
            },
        },
    ]
}

PHANTOM_SCHEMA = {
    "type": "object",
    "required": ["shape", "pixel_size_m", "energy_keV"],
    "additionalProperties": False,
    "properties": {
        "shape": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 2, "maxItems": 2},
        "pixel_size_m": {"type": "number", "exclusiveMinimum": 0},
        "energy_keV": {"type": "number", "exclusiveMinimum": 0},
        "scene": {"enum": ["colloids"]},
        "materials": {"type": "object", "additionalProperties": _material["oneOf"][1]},
        "spheres": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["center", "material"],
                "additionalProperties": False,
                "properties": {
                    "center": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    "radius": {"type": "number", "exclusiveMinimum": 0},
                    "diameter_m": {"type": "number", "exclusiveMinimum": 0},
                    "material": _material,
                },
                "oneOf": [{"required": ["radius"]}, {"required": ["diameter_m"]}],
            },
        },
        "photon_count": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "rng_seed": {"type": "integer"},
    },
}

_constraint = {
    "oneOf": [
        {"enum": ["none", "nonpositive"]},
        {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["none", "nonpositive", "support", "box", "composite"]},
                "channels": {"enum": ["phi_only", "both"]},
                "mask": {"type": "string"},
                "lo": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "hi": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "parts": {"type": "array"},
            },
        },
    ]
}

_nonneg = {"type": "number", "minimum": 0}

RUN_SCHEMA = {
    "type": "object",
    "required": ["method"],
    "additionalProperties": False,
    "properties": {
        "method": {"enum": ["ctf", "homctf"]},
        "constraint": _constraint,
        "gamma": _nonneg,
        "alpha_phi_low": _nonneg,
        "alpha_phi_high": _nonneg,
        "alpha_mu_low": _nonneg,
        "alpha_mu_high": _nonneg,
        "alpha_gamma_low": _nonneg,
        "alpha_gamma_high": _nonneg,
        "cutoff_fresnel": {"type": "number", "exclusiveMinimum": 0},
        "transition_width": {"type": "number", "minimum": 0, "exclusiveMaximum": 2},
        "tau": {"type": "number", "exclusiveMinimum": 0},
        "pad_factor": {"type": "number", "minimum": 1},
        "admm": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_iter": {"type": "integer", "minimum": 1},
                "tol_primal": {"type": "number", "exclusiveMinimum": 0},
                "tol_dual": {"type": "number", "exclusiveMinimum": 0},
                "accelerate": {"type": "boolean"},
                "restart": {"type": "boolean"},
            },
        },
    },
    "if": {"properties": {"method": {"const": "homctf"}}},
    "then": {"required": ["gamma"]},
}


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def load_json(path, schema):
    """Parse and validate a JSON config, turning failures into line/field diagnostics."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/" + "/".join(str(p) for p in exc.absolute_path)
        raise CliError(f"{path}: field {where}: {exc.message}") from exc
    return doc


def _floats(text, name):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise CliError(f"--{name}: expected comma-separated numbers, got {text!r}") from exc
    return values


def phantom_config(doc):
    """Build a :class:`PhantomConfig` from a validated JSON document."""
    materials = dict(phantom.MATERIALS)
    for name, m in doc.get("materials", {}).items():
        materials[name] = phantom.MaterialSpec(m.get("name", name), m["delta"], m["beta"])
    shape = tuple(doc["shape"])
    pixel = doc["pixel_size_m"]
    if doc.get("scene") == "colloids":
        cfg = phantom.colloid_scene(shape, pixel, doc["energy_keV"])
        spheres = list(cfg.spheres)
    else:
        spheres = []
    for i, s in enumerate(doc.get("spheres", [])):
        mat = s["material"]
        if isinstance(mat, str):
            if mat not in materials:
                raise CliError(f"field /spheres/{i}/material: unknown material {mat!r}")
            mat = materials[mat]
        else:
            mat = phantom.MaterialSpec(mat["name"], mat["delta"], mat["beta"])
        radius = s["radius"] if "radius" in s else s["diameter_m"] / pixel / 2
        spheres.append(phantom.SphereSpec(tuple(s["center"]), radius, mat))
    return phantom.PhantomConfig(
        shape, pixel, doc["energy_keV"], spheres, doc.get("photon_count"), doc.get("rng_seed", 0)
    )


def cmd_phantom(args):
    cfg = phantom_config(load_json(args.config, PHANTOM_SCHEMA))
    obj = phantom.project(cfg)
    os.makedirs(args.out, exist_ok=True)
    meta = {"pixel_size_m": cfg.pixel_size, "energy_keV": cfg.energy_kev}
    for name, image in (("phi", obj.phi), ("mu", obj.mu)):
        preview = None
        if args.preview:
            lo, hi = container.write_pgm(os.path.join(args.out, f"{name}.pgm"), image)
            preview = {"file": f"{name}.pgm", "min": lo, "max": hi}
        container.write_array(os.path.join(args.out, name), image, preview=preview, **meta)
    print(f"wrote phantom {cfg.shape[0]}x{cfg.shape[1]} with {len(cfg.spheres)} spheres to {args.out}")
    return EXIT_OK


def _read(path):
    try:
        return container.read_array(path)
    except (OSError, ValueError, jsonschema.ValidationError) as exc:
        raise CliError(f"{path}: cannot read container: {exc}") from exc


def cmd_simulate(args):
    phi, meta = _read(os.path.join(args.object, "phi"))
    mu, _ = _read(os.path.join(args.object, "mu"))
    if phi.shape != mu.shape or phi.ndim != 2:
        raise CliError(f"phase {phi.shape} and absorption {mu.shape} grids differ", EXIT_GRID)
    fresnel = _floats(args.fresnel, "fresnel")
    if not fresnel or any(f <= 0 for f in fresnel):
        raise CliError("--fresnel: need at least one positive Fresnel number")
    images = forward_intensity(phi, mu, fresnel, pad_factor=args.pad_factor)
    if args.photons is not None:
        rng = np.random.default_rng(args.seed)
        images = rng.poisson(args.photons * images) / args.photons
    extra = {k: meta[k] for k in ("pixel_size_m", "energy_keV") if k in meta}
    container.write_array(args.out, images, fresnel_numbers=fresnel, **extra)
    print(f"wrote {len(fresnel)} holograms of {phi.shape[0]}x{phi.shape[1]} to {args.out}")
    return EXIT_OK


def _constraint_from(doc, shape):
    if doc is None or doc == "none":
        return ConstraintSpec.none()
    if doc == "nonpositive":
        return ConstraintSpec.nonpositive()
    kind = doc["kind"]
    channels = doc.get("channels", "both")
    if kind == "none":
        return ConstraintSpec.none()
    if kind == "nonpositive":
        return ConstraintSpec.nonpositive(channels)
    if kind == "support":
        if "mask" not in doc:
            raise CliError("field /constraint/mask: support constraint needs a mask container")
        mask, _ = _read(doc["mask"])
        if mask.shape != tuple(shape):
            raise CliError(f"support mask {mask.shape} does not match stack {tuple(shape)}", EXIT_GRID)
        return ConstraintSpec.support(mask != 0, channels)
    if kind == "box":
        try:
            return ConstraintSpec.box(doc.get("lo", [-np.inf] * 2), doc.get("hi", [np.inf] * 2), channels)
        except ValueError as exc:
            raise CliError(f"field /constraint: {exc}") from exc
    return ConstraintSpec.composite([_constraint_from(p, shape) for p in doc.get("parts", [])])


def _two_level(run, name, defaults, cutoff, width, grid):
    lo = run.get(f"{name}_low", defaults[0])
    hi = run.get(f"{name}_high", defaults[1])
    return build_two_level(TwoLevelProfileSpec(lo, hi, cutoff, width), grid)


def cmd_reconstruct(args):
    run = load_json(args.run, RUN_SCHEMA)
    images, meta = _read(args.stack)
    if images.ndim == 2:
        images = images[None]
    if "fresnel_numbers" not in meta:
        raise CliError(f"{args.stack}: meta.json lacks fresnel_numbers")
    if len(meta["fresnel_numbers"]) != images.shape[0]:
        raise CliError(f"{args.stack}: {images.shape[0]} images but {len(meta['fresnel_numbers'])} Fresnel numbers", EXIT_GRID)
    stack = HologramStack(images, tuple(meta["fresnel_numbers"]))
    grid = Grid2D(images.shape[1], images.shape[2], run.get("pad_factor", 2.0))
    cutoff = run.get("cutoff_fresnel", max(stack.fresnel_numbers))
    width = run.get("transition_width", 0.0)
    constraint = _constraint_from(run.get("constraint"), grid.shape)
    method = run["method"]
    defaults = HOM_DEFAULTS if method == "homctf" else INHOM_DEFAULTS
    admm_opts = dict(run.get("admm", {}))
    cfg = AdmmConfig(tau=run.get("tau", defaults["tau"]), **admm_opts)

    report = None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonConvergence)
            if method == "homctf":
                gamma = run["gamma"]
                a_gamma = _two_level(run, "alpha_gamma", defaults["alpha_gamma"], cutoff, width, grid)
                if constraint.kind == "none":
                    phi = invert_hom(stack, gamma, a_gamma, grid=grid)
                else:
                    phi, report = solve_hom(stack, gamma, a_gamma, constraint, cfg, grid=grid)
                outputs = {"phi": phi}
            else:
                reg = RegularizationProfile(
                    _two_level(run, "alpha_phi", defaults["alpha_phi"], cutoff, width, grid),
                    _two_level(run, "alpha_mu", defaults["alpha_mu"], cutoff, width, grid),
                )
                if constraint.kind == "none":
                    obj = invert(stack, reg, grid=grid)
                else:
                    obj, report = solve(stack, reg, constraint, cfg, grid=grid)
                outputs = {"phi": obj.phi, "mu": obj.mu}
    except SingularSystem as exc:
        raise CliError(f"singular system: {exc}", EXIT_SINGULAR) from exc

    extra = {k: meta[k] for k in ("pixel_size_m", "energy_keV") if k in meta}
    os.makedirs(args.out, exist_ok=True)
    for name, image in outputs.items():
        lo, hi = container.write_pgm(os.path.join(args.out, f"{name}.pgm"), image)
        container.write_array(
            os.path.join(args.out, name), image, preview={"file": f"{name}.pgm", "min": lo, "max": hi}, **extra
        )

    summary = {
        "method": method,
        "constraint": constraint.to_dict(),
        "solver": "closed-form" if report is None else "admm",
        "converged": True if report is None else report.converged,
    }
    if report is not None:
        summary.update(report.to_dict())
    report_path = args.report or os.path.join(args.out, "report.json")
    with open(report_path, "w") as fh:
        json.dump(summary, fh, indent=2)

    if args.profile:
        coords = _floats(args.profile, "profile")
        if len(coords) != 4:
            raise CliError("--profile: expected x0,y0,x1,y1")
        names = list(outputs)
        arc, x, y, values = container.line_profile([outputs[n] for n in names], *coords)
        container.write_profile_csv(os.path.join(args.out, "profile.csv"), names, arc, x, y, values)

    if report is not None and not report.converged:
        print(f"ADMM stopped after {report.iterations} iterations without converging", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    print(f"wrote {', '.join(outputs)} to {args.out}")
    return EXIT_OK


def cmd_stability(args):
    fresnel = _floats(args.fresnel, "fresnel")
    if len(fresnel) < 1:
        raise CliError("--fresnel: need at least one Fresnel number")
    if any(f <= 0 for f in fresnel):
        raise CliError("--fresnel: Fresnel numbers must be positive")
    fset = stability.FresnelSet(fresnel)
    xi = np.linspace(0.0, args.xi_max, args.samples)
    stability.curve(fset, args.gamma, xi).to_csv(args.out)
    diffs = fset.difference_fresnel_numbers()
    print(f"N({len(fset)}) = {fset.n_pairs}")
    print("difference Fresnel numbers: " + "; ".join(f"{d:.3e}" for d in diffs))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="holoctf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="project a sphere phantom to phase/absorption images")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--preview", action="store_true", help="also write 16-bit PGM previews")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("simulate", help="simulate holograms with the nonlinear Fresnel model")
    p.add_argument("--object", required=True)
    p.add_argument("--fresnel", required=True, help="comma-separated pixel Fresnel numbers")
    p.add_argument("--photons", type=float, default=None, help="Poisson photons per pixel")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pad-factor", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="CTF / homogeneous CTF phase retrieval")
    p.add_argument("--stack", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--profile", default=None, help="x0,y0,x1,y1 in pixels")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("stability", help="singular-value curves of the transfer matrices")
    p.add_argument("--fresnel", required=True)
    p.add_argument("--gamma", type=float, default=stability.STABILITY_GAMMA)
    p.add_argument("--xi-max", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stability)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"holoctf {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
