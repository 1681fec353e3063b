"""chronoscope: exact quantum causal influence, local arrow-of-time
vectorfields, and error-corrected causal influence on 1D qubit lattices."""

__version__ = "0.1.0"

from chronoscope.qcore import (
    DenseOperator,
    SchmidtPair,
    StateVector,
    hs_inner,
    partial_trace,
    renyi2_entropy,
    schmidt_split,
    von_neumann_entropy,
)
from chronoscope.pauli import PauliString, PauliSum, project_nontrivial
from chronoscope.hamlib import (
    EvolutionResult,
    HamiltonianSpec,
    build_ising,
    build_pxp,
    evolve,
    heisenberg_site_decomposition,
)
from chronoscope.causal import (
    CiValue,
    GammaOperator,
    MomentCoefficients,
    ThetaOperator,
    ci_exact,
    ci_monte_carlo,
    ci_short_time_diff,
    ci_short_time_same,
    gamma,
    spectral_overlap,
    theta,
)
from chronoscope.aot import SpacetimeLattice, aot_field, aot_leading, aot_vector, neighborhood
from chronoscope.acausal import TheoremReport, build_ising_acausal_state, theorem_check
from chronoscope.qec import (
    EciValue,
    RecoveryChannel,
    StabilizerCode,
    ci_phys_anc,
    eci_exact,
    five_qubit_code,
    iceberg_code,
    iceberg_self_influence,
    protected_states_513,
    recovery_adjoint,
    rep_code_ci,
    repetition_code_x,
)
from chronoscope.sdo import SuperdensityOperator, direct_two_time_correlator, sdo_build, sdo_correlator

__all__ = [name for name in dir() if not name.startswith("_")]
