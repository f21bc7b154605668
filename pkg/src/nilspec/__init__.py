"""Spectral analysis of nilsystems, Weyl systems and skew products.

Correlation sequences c(n) = <U^n f, f> are computed by closed form,
quadrature or Birkhoff averaging and turned into spectral summaries.
"""
from .correlation import (
    CorrSeq,
    conjugation_shift_check,
    corr_birkhoff,
    corr_exact,
    corr_quadrature,
    corr_quadrature_many,
    validate_psd,
)
from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .nilalgebra import (
    HeisElement,
    LatticePoint,
    TranslationConfig,
    heis_commutator,
    heis_inv,
    heis_mul,
    heis_pow,
    parry_solve,
    reduce_mod_lattice,
)
from .observables import (
    ZakProfile,
    project_center_character,
    project_kronecker,
    tensor,
    torus_character,
    trig_polynomial,
    zak_observable,
)
from .scenarios import emit_outputs, run_scenario
from .spectral import (
    SpectralSummary,
    atom_mass,
    classify,
    convolve_measures,
    fejer_density,
    rotate_measure,
    rotation_average_flatness,
    wiener_atom_scan,
)
from .systems import Heisenberg, Joining, Product, Rotation, Skew, TrigCocycle, Weyl, product

__version__ = "0.1.0"
