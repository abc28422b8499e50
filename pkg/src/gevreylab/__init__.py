"""Numerical toolkit for extended Gevrey regularity.

Subpackages cover: Lambert W evaluation with certified brackets (lambert),
log-domain weight-sequence conditions (sequences), associated functions and
weight axioms (associated), compactly supported bump construction and
derivative growth profiles (bump), multi-index chain-rule combinatorics
(faa), Fourier decay analysis (spectral), and STFT-based directional
regularity scans (wavefront).  The cli module exposes all of it as
subcommands of the `gevreylab` entry point.
"""

from .errors import ContractError, DomainError
from .lambert import WEval, lambert_bounds, lambert_w
from .sequences import (
    ConditionReport,
    DefiningSequence,
    ProductSequence,
    RSequence,
    check_domination,
    check_m1,
    fit_doubling_constant,
    fit_m2_tilde,
    fit_m2prime_tilde,
    floor_power,
    m3prime_partial_sum,
    r_product_log,
    tilde_r,
    witness_r_sequence,
)
from .associated import (
    AssociatedEval,
    AssocResult,
    asymptotic_T,
    carleman_mu,
    gevrey_T_closed,
    komatsu_T,
    two_param_T,
    weight_property_check,
)
from .grids import GridSignal, GridSpec, symmetric_grid
from .bump import (
    BumpResult,
    GrowthProfile,
    base_mollifier,
    build_bump,
    default_bump_grid,
    derivative_growth_profile,
    fd_derivative,
    gevrey_cutoff,
    spectral_derivative,
    tensor_bump_2d,
    verify_algebra,
    verify_inverse,
)
from .faa import Decomposition, enumerate_decompositions, faa_di_bruno
from .spectral import (
    DecayFit,
    Spectrum,
    derivative_bound_from_decay,
    dft,
    growth_bound_check,
    idft,
    point_mass_spectrum,
    pw_decay_fit,
)
from .wavefront import (
    ConeFit,
    FitConfig,
    StftGrid,
    WavefrontVerdict,
    cone_decay_fit,
    sing_support,
    stft,
    wavefront_scan,
    window_from_bump,
    window_self_certificate,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
