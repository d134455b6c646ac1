"""Constrained primal/dual Potts pair model.

Embedded graphs, exact enumeration checks of the model's identities, and
Markov chain sampling of height-increment observables. Everything is
implemented in the C++ extension module; this package only re-exports it.
"""

from ._pottspair import (
    Distribution,
    EmbeddedGraph,
    FkgInput,
    JointLaw,
    Params,
    Report,
    SamplerConfig,
    SigmaLaw,
    build_box,
    build_prism,
    build_torus,
    central_face,
    check_conditional_laws,
    check_correlation_formula,
    check_current_law,
    check_fk_reduction,
    check_fkg_lattice,
    check_griffiths,
    check_loop_marginal,
    check_omega_marginals,
    check_potts_duality,
    check_resummation,
    check_six_vertex,
    check_unconstrained_equivalence,
    check_variance_identity,
    default_alphabet,
    enumerate_joint,
    enumerate_sigma,
    medial,
    omega_marginal_form_table,
    omega_marginal_table,
    sample_estimates,
    sigma_marginal_table,
    validate_against_oracle,
)

__all__ = [
    "Distribution",
    "EmbeddedGraph",
    "FkgInput",
    "JointLaw",
    "Params",
    "Report",
    "SamplerConfig",
    "SigmaLaw",
    "build_box",
    "build_prism",
    "build_torus",
    "central_face",
    "check_conditional_laws",
    "check_correlation_formula",
    "check_current_law",
    "check_fk_reduction",
    "check_fkg_lattice",
    "check_griffiths",
    "check_loop_marginal",
    "check_omega_marginals",
    "check_potts_duality",
    "check_resummation",
    "check_six_vertex",
    "check_unconstrained_equivalence",
    "check_variance_identity",
    "default_alphabet",
    "enumerate_joint",
    "enumerate_sigma",
    "medial",
    "omega_marginal_form_table",
    "omega_marginal_table",
    "sample_estimates",
    "sigma_marginal_table",
    "validate_against_oracle",
]

__version__ = "0.1.0"
