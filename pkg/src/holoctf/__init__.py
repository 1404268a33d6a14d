"""CTF phase retrieval for X-ray near-field holography, with and without the
single-material assumption."""

from .admm import AdmmConfig, ConstraintSpec, ConvergenceReport, project, solve, solve_hom
from .ctf import (
    ComplexObject,
    HologramStack,
    TransferSpectrum,
    build_spectrum,
    ctf_adjoint,
    ctf_forward,
    hom_adjoint,
    hom_forward,
)
from .errors import NonConvergence, SingularSystem
from .fresnel import Geometry, backpropagate, forward_intensity, fresnel_number, propagate
from .gridfft import Grid2D, crop, fft2, freq_sq, ifft2, pad
from .phantom import MaterialSpec, PhantomConfig, SphereSpec, colloid_scene, synthesize
from .tikhonov import (
    RegularizationProfile,
    TwoLevelProfileSpec,
    build_two_level,
    determinant,
    invert,
    invert_hom,
    default_profiles,
)

__version__ = "0.1.0"
