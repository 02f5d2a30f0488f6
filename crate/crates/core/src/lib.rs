//! Point masses in reproducing kernel Hilbert spaces on countable sets.
//!
//! The crate answers one question numerically: given a positive definite
//! kernel `k` on a discrete set and a point `x`, does the indicator `δ_x`
//! have finite norm in the RKHS of `k`, and if so what are `‖δ_x‖²` and
//! the induced kernel `⟨δ_x, δ_y⟩`? Everything is computed from Gram
//! matrices over a fixed filtration `F_1 ⊂ F_2 ⊂ ⋯` of the point set.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`point_config`] | points, kernels, Gram assembly, definiteness check |
//! | [`gram`] | LDLᵗ with bordering updates, log-determinants, solves |
//! | [`pointmass`] | filtration scans, induced kernel, ℓ² rows, projections |
//! | [`kernels`] / [`oracles`] | built-in kernels and their closed forms |
//! | [`network`] | energy spaces of weighted graphs |
//! | [`moments`] | spectral moments from Gram data |
//! | [`sampling`] | frame bounds, interpolation, restriction isometry |
//! | [`oracle_suite`] | every closed form checked against the engine |
//! | [`kernel_spec`] / [`report`] | JSON and CSV input and output |

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod gram;
pub mod network;
pub mod kernel_spec;
pub mod kernels;
pub mod moments;
pub mod oracle_suite;
pub mod oracles;
pub mod point_config;
pub mod pointmass;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
pub use gram::{GramFactorization, DEFAULT_EPS_PD};
pub use kernels::{
    make_kernel, BinomialKernel, BridgeKernel, BuiltinKernelId, MatrixKernel, MinKernel,
    SincKernel,
};
pub use point_config::{
    assemble_gram, build_config, validate_pd, GramMatrix, Kernel, PdVerdict, Point,
    PointConfiguration,
};
pub use pointmass::{
    delta_norm_sq, induced_kernel_entry, l2_row_test, membership_scan, minor_ratio,
    DeltaNormEstimate, FiltrationTrace, ScanPolicy, Verdict,
};
pub use kernel_spec::KernelSpec;
pub use moments::{
    moment_identity_check, mu_a_moments, mu_a_moments_finite, mu_b_moments, network_moment_check,
    IdentityCheck, MomentReport, NetworkMomentCheck,
};
pub use network::{
    energy_kernel, load_network, network_moments, parse_edge_list, EdgeRecord, EnergyKernel, NetworkGraph,
    NetworkMoments,
};
pub use oracle_suite::{run_oracle_suite, OracleResult, SuiteOptions, FORMULAS};
pub use report::MembershipReport;
pub use sampling::{
    frame_lower_bound, interpolate, restriction_isometry_check, shannon_reconstruct, Interpolation,
    KernelExpansion, SampleSet,
};
