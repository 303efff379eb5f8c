"""Entropy-cone certificates, DoF region polytopes and Monte Carlo capacity
checks for MIMO networks without transmitter channel state information.

The package splits into four layers: exact Shannon-cone machinery
(`cone`, `certify`, `induction`), exact region geometry (`regions`),
seeded Monte Carlo rate estimation (`capacity`), and achievable-scheme
simulation with outer-bound comparison (`simulate`).  The `nocsit`
console script fronts all of them.
"""

from .capacity import (
    CapacityEstimate,
    DegenerateEigens,
    EmpiricalEigens,
    RateRegion,
    SlopeFit,
    bc_outer_region,
    covariance_optimality_probe,
    dof_slope,
    eigen_samples,
    ergodic_capacity,
    log_det_rate,
    sample_channel,
    theorem2_bound,
    theorem2_region,
    theta_class_report,
)
from .certify import (
    CertificateReplayError,
    LemmaFamilyReport,
    NotShannonProvable,
    ProofCertificate,
    read_certificate,
    verify_lemma_family,
    verify_shannon_type,
    write_certificate,
)
from .cone import (
    EntropyVector,
    LinearInequality,
    VarSet,
    elemental_inequalities,
    gaussian_entropy_vector,
    sliding_window_inequality,
    window_mask,
    window_masks,
)
from .errors import MathCheckError, ParameterError
from .induction import InductionTrace, TraceStep, induction_trace, merged_window_identity
from .regions import (
    BcConfig,
    Constraint,
    DofRegion,
    IcConfig,
    Schedule,
    TightnessClass,
    apply_permutation,
    bc_dof_region,
    ic2_outer_region,
    ick_outer_region,
    relabel_ic2,
    tightness_class,
    time_sharing_schedule,
)
from .simulate import (
    GapReport,
    SimResult,
    gap_to_outer,
    simulate_bc_time_sharing,
    simulate_ic_zero_forcing,
)

__version__ = "0.1.0"

__all__ = [
    "BcConfig",
    "CapacityEstimate",
    "CertificateReplayError",
    "Constraint",
    "DegenerateEigens",
    "DofRegion",
    "EmpiricalEigens",
    "EntropyVector",
    "GapReport",
    "IcConfig",
    "InductionTrace",
    "LemmaFamilyReport",
    "LinearInequality",
    "MathCheckError",
    "NotShannonProvable",
    "ParameterError",
    "ProofCertificate",
    "RateRegion",
    "Schedule",
    "SimResult",
    "SlopeFit",
    "TightnessClass",
    "TraceStep",
    "VarSet",
    "apply_permutation",
    "bc_dof_region",
    "bc_outer_region",
    "covariance_optimality_probe",
    "dof_slope",
    "eigen_samples",
    "elemental_inequalities",
    "ergodic_capacity",
    "gap_to_outer",
    "gaussian_entropy_vector",
    "ic2_outer_region",
    "ick_outer_region",
    "induction_trace",
    "log_det_rate",
    "merged_window_identity",
    "read_certificate",
    "relabel_ic2",
    "sample_channel",
    "simulate_bc_time_sharing",
    "simulate_ic_zero_forcing",
    "sliding_window_inequality",
    "theorem2_bound",
    "theorem2_region",
    "theta_class_report",
    "tightness_class",
    "time_sharing_schedule",
    "verify_lemma_family",
    "verify_shannon_type",
    "window_mask",
    "window_masks",
    "write_certificate",
]
