"""Exact distribution and error bounds for randomized range finder subspace errors.

The package computes the exact cumulative distribution function of the largest
principal angle between the dominant k-dimensional singular subspace of a
matrix and the subspace produced by the Gaussian randomized range finder (RRF),
together with closed-form probabilistic bounds on sin(theta_1) and an empirical
sampling harness for validation.
"""

from .numerics import (
    RngStream,
    gaussian_matrix,
    haar_stiefel,
    haar_stiefel_batch,
    principal_angles,
    largest_canonical_angle,
    pseudoinverse,
    pseudodet,
    perp_projector,
)
from .partitions import (
    enumerate_partitions,
    pochhammer_partition,
    zonal_value,
    build_zonal_table,
    ZonalTable,
)
from .hypergeom import (
    SeriesControl,
    SeriesResult,
    DivergedSeries,
    ParameterPole,
    mvgamma_ln,
    hyp_pFq,
    tilde_2F1,
    gamma_prefactor_tilde_cdf,
)
from .cdf import (
    Spectrum,
    CdfEstimate,
    integrand_J,
    sample_S_eigs,
    cdf,
    cdf_curve,
    invert_cdf,
)
from .bounds import (
    BoundReport,
    DegenerateLeading,
    bound_scalar,
    frob_ratio,
    spectral_ratio,
    scalar_constant,
    bound_frobenius,
    bound_gap,
    bound_conjecture,
    prop_lower_bound,
)
from .harness import (
    SampleBatch,
    SpectrumRecipe,
    make_spectrum,
    rrf_sample_diag,
    rrf_sample_batch,
    rrf_sample_full,
    rsi_spectrum,
    rsvd_estimate_spectrum,
    empirical_quantile,
    sample_batch,
    save_batch,
    load_batch,
)

__version__ = "0.1.0"
