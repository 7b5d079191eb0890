"""Gaussian matrix product states: covariance-matrix toolkit, chain assembly,
spectral (Fourier) analysis, parent Hamiltonians and constructive protocols."""

from .channels import (
    S_REG,
    GaussChannel,
    SymplecticOp,
    apply_channel,
    apply_symplectic,
    channel_compose,
    channel_from_symplectic,
    epr_state,
    identity_channel,
    random_channel,
    random_pure_channel,
    random_symplectic,
    tms_state,
    vacuum_channel,
)
from .covmat import (
    CovMat,
    CriticalState,
    CriticalWarning,
    collapse_epr,
    direct_sum,
    entropy,
    partial_transpose,
    purity,
    schur_complement,
    symplectic_eigenvalues,
    symplectic_form,
    validate_state,
    williamson,
    xy_decompose,
)
from .hamiltonian import (
    QuadHamiltonian,
    ground_energy_density,
    ground_state,
    has_gmps_ground_state,
    parent_hamiltonian,
    spectral_function,
)
from .lattice import GmpsSpec, build_gmps, build_pi
from .protocols import (
    SchmidtForm,
    TrotterPlan,
    nested_symplectic,
    protocol_report,
    protocol_round,
    reduce_bond_entanglement,
    schmidt_decompose,
    trotterize,
)
from .spectral import (
    RationalCM,
    correlation_length,
    correlations_infinite,
    dft_roundtrip,
    finite_correlations,
    gamma_hat,
    rationalize,
)

__version__ = "0.1.0"
