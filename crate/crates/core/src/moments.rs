//! Moments of the spectral measures `μ_x^{(A)}` and `μ_x^{(B)}`.
//!
//! The measures are never discretized. Every moment is read off Gram data:
//!
//! | moment | `μ^{(A)}` | `μ^{(B)}` |
//! |--------|-----------|-----------|
//! | 0 | `1` | `k(x, x)` |
//! | 1 | `‖δ_x‖²` | `1` |
//! | 2 | `Σ_y ⟨δ_x, δ_y⟩²` | `‖δ_x‖²` |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramFactorization;
use crate::network::{network_moments, EnergyKernel, NetworkGraph, NetworkMoments};
use crate::point_config::{assemble_gram, Kernel, Point, PointConfiguration};
use crate::pointmass::{delta_norm_sq, l2_row_test, projection_coeffs, ScanPolicy, Verdict};

/// Zeroth, first and second moments. Non-finite values serialize as `null`
/// and mean the moment is unbounded along the scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub m0: f64,
    #[serde(with = "crate::report::nullable_f64")]
    pub m1: f64,
    #[serde(with = "crate::report::nullable_f64")]
    pub m2: f64,
    #[serde(with = "crate::report::nullable_f64")]
    pub covariance: f64,
    pub m1_verdict: Verdict,
    pub m2_verdict: Verdict,
}

fn unbounded_if_diverging(value: f64, verdict: &Verdict) -> f64 {
    if verdict.is_diverging() {
        f64::INFINITY
    } else {
        value
    }
}

/// Moments of `μ_x^{(A)}`: `m1` is the `δ_x` scan and `m2` the `ℓ²` row
/// test.
pub fn mu_a_moments(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    x: Point,
    policy: &ScanPolicy,
) -> Result<MomentReport> {
    let d = delta_norm_sq(kernel, config, x, policy)?;
    let row = l2_row_test(kernel, config, x, policy)?;
    let m1 = unbounded_if_diverging(d.estimate, &d.verdict);
    let m2 = unbounded_if_diverging(row.limit().unwrap_or(f64::NAN), &row.verdict);
    Ok(MomentReport {
        m0: 1.0,
        m1,
        m2,
        covariance: m2 - m1 * m1,
        m1_verdict: d.verdict,
        m2_verdict: row.verdict,
    })
}

/// Moments of `μ_x^{(A)}` in the finite model on the whole configuration,
/// with no plateau detection: `m1 = (K⁻¹)_{xx}`, `m2 = ‖K⁻¹ e_x‖²`.
pub fn mu_a_moments_finite(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    x: Point,
) -> Result<MomentReport> {
    let t = config
        .index_of(x)
        .ok_or_else(|| Error::UnknownPoint { point: x.to_string() })?;
    let gram = assemble_gram(kernel, config, config.len())?;
    let fact = GramFactorization::factorize(&gram, crate::DEFAULT_EPS_PD)?;
    let zeta = projection_coeffs(&fact, t)?;
    let m1 = zeta[t];
    let m2: f64 = zeta.iter().map(|z| z * z).sum();
    let exact = Verdict::CertifiedBounded { limit: m1 };
    Ok(MomentReport {
        m0: 1.0,
        m1,
        m2,
        covariance: m2 - m1 * m1,
        m1_verdict: exact,
        m2_verdict: Verdict::CertifiedBounded { limit: m2 },
    })
}

/// Moments of `μ_x^{(B)}`.
///
/// `m0 = k(x, x)`. On the last filtration of the scan, with
/// `ζ = K⁻¹ e_x`, `m1` is the reproducing value `(K ζ)_x` and `m2` the
/// quadratic form `ζᵗ K ζ = ‖P_F δ_x‖²`. Both are computed from the Gram
/// matrix, independently of the pivot sum behind the `μ^{(A)}` moments.
pub fn mu_b_moments(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    x: Point,
    policy: &ScanPolicy,
) -> Result<MomentReport> {
    let d = delta_norm_sq(kernel, config, x, policy)?;
    let t = config
        .index_of(x)
        .ok_or_else(|| Error::UnknownPoint { point: x.to_string() })?;
    kernel.check_points(config.points())?;
    let m0 = kernel.eval(x, x);
    if d.verdict.is_diverging() {
        return Ok(MomentReport {
            m0,
            m1: 1.0,
            m2: f64::INFINITY,
            covariance: f64::INFINITY,
            m1_verdict: Verdict::CertifiedBounded { limit: 1.0 },
            m2_verdict: d.verdict,
        });
    }
    let n = policy.max_n.min(config.len()).max(t + 1);
    let gram = assemble_gram(kernel, config, n)?;
    let fact = GramFactorization::factorize(&gram, policy.eps_pd)?;
    let zeta = projection_coeffs(&fact, t)?;
    let k_zeta = gram.apply(&zeta);
    let m1 = k_zeta[t];
    let m2: f64 = zeta.iter().zip(&k_zeta).map(|(a, b)| a * b).sum();
    Ok(MomentReport {
        m0,
        m1,
        m2,
        covariance: m2 / m0 - (m1 / m0).powi(2),
        m1_verdict: Verdict::CertifiedBounded { limit: m1 },
        m2_verdict: d.verdict,
    })
}

/// `∫λ dμ^{(A)} = ∫λ² dμ^{(B)} = ‖δ_x‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// `μ^{(A)}` first moment.
    pub lhs: f64,
    /// `μ^{(B)}` second moment.
    pub rhs: f64,
    pub rel_err: f64,
    pub pass: bool,
    pub verdict: Verdict,
}

pub fn moment_identity_check(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    x: Point,
    policy: &ScanPolicy,
    rel_tol: f64,
) -> Result<IdentityCheck> {
    let a = mu_a_moments(kernel, config, x, policy)?;
    let b = mu_b_moments(kernel, config, x, policy)?;
    let rel_err = (a.m1 - b.m2).abs() / a.m1.abs().max(f64::MIN_POSITIVE);
    Ok(IdentityCheck {
        lhs: a.m1,
        rhs: b.m2,
        rel_err,
        pass: a.m1_verdict.is_certified() && rel_err <= rel_tol,
        verdict: a.m1_verdict,
    })
}

/// Kernel-side and closed-form moments of one network vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkMomentCheck {
    pub closed_form: NetworkMoments,
    /// Finite-model `μ^{(A)}` moments of the energy kernel on `V \ {o}`.
    pub kernel_moments: MomentReport,
    /// `c_{xo}²`: the row entry `⟨δ_x, δ_o⟩²` that the kernel model on
    /// `V \ {o}` does not contain.
    pub base_term: f64,
    pub max_rel_err: f64,
}

/// Compares [`network_moments`] against the energy kernel's Gram data.
pub fn network_moment_check(
    graph: &NetworkGraph,
    kernel: &EnergyKernel,
    config: &PointConfiguration,
    x: usize,
) -> Result<NetworkMomentCheck> {
    let closed = network_moments(graph, x)?;
    let km = mu_a_moments_finite(kernel, config, Point::Label(x))?;
    let base_term = graph.conductance(x, graph.base()).map_or(0.0, |c| c * c);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    let max_rel_err = rel(km.m1, closed.m1)
        .max(rel(km.m2 + base_term, closed.m2))
        .max(rel(km.covariance + base_term, closed.covariance));
    Ok(NetworkMomentCheck {
        closed_form: closed,
        kernel_moments: km,
        base_term,
        max_rel_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{BinomialKernel, BridgeKernel, MinKernel, SincKernel};
    use crate::network::energy_kernel;

    fn reals(xs: &[f64]) -> PointConfiguration {
        PointConfiguration::from_reals(xs, true).unwrap()
    }

    #[test]
    fn path_energy_mu_a() {
        let g = NetworkGraph::path(30, 1.0).unwrap();
        let k = energy_kernel(&g).unwrap();
        let c = g.non_base_config();
        let m = mu_a_moments(&k, &c, Point::Label(5), &ScanPolicy::default()).unwrap();
        assert!((m.m0 - 1.0).abs() == 0.0);
        assert!((m.m1 - 2.0).abs() < 1e-9);
        assert!((m.m2 - 6.0).abs() < 1e-9);
        assert!((m.covariance - 2.0).abs() < 1e-8);
    }

    #[test]
    fn sinc_moments() {
        let xs: Vec<f64> = (-15..=15).map(f64::from).collect();
        let c = reals(&xs);
        let a = mu_a_moments(&SincKernel, &c, Point::Real(0.0), &ScanPolicy::default()).unwrap();
        assert_eq!((a.m0, a.m1, a.m2, a.covariance), (1.0, 1.0, 1.0, 0.0));
        let b = mu_b_moments(&SincKernel, &c, Point::Real(0.0), &ScanPolicy::default()).unwrap();
        assert_eq!((b.m0, b.m1, b.m2), (1.0, 1.0, 1.0));
    }

    #[test]
    fn binomial_m1_diverges() {
        let xs: Vec<f64> = (0..=20).map(f64::from).collect();
        let c = reals(&xs);
        let a = mu_a_moments(&BinomialKernel, &c, Point::Real(2.0), &ScanPolicy::with_max_n(20))
            .unwrap();
        assert!(a.m1_verdict.is_diverging());
        assert!(a.m1.is_infinite());
    }

    #[test]
    fn mu_b_examples() {
        let xs: Vec<f64> = (1..=30).map(f64::from).collect();
        let b = mu_b_moments(&MinKernel, &reals(&xs), Point::Real(1.0), &ScanPolicy::default())
            .unwrap();
        assert_eq!(b.m0, 1.0);
        assert!((b.m1 - 1.0).abs() < 1e-12);
        assert!((b.m2 - 2.0).abs() < 1e-12);
        let br = reals(&[0.25, 0.5, 0.75]);
        let b = mu_b_moments(&BridgeKernel, &br, Point::Real(0.5), &ScanPolicy::default()).unwrap();
        assert_eq!(b.m0, 0.25);
        assert!((b.m1 - 1.0).abs() < 1e-12);
        assert!((b.m2 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn identity_passes_on_min() {
        let xs: Vec<f64> = (1..=30).map(f64::from).collect();
        let r = moment_identity_check(&MinKernel, &reals(&xs), Point::Real(1.0), &ScanPolicy::default(), 1e-8)
            .unwrap();
        assert!(r.pass);
        assert!((r.lhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn network_check_with_base_neighbor() {
        let g = NetworkGraph::path(8, 1.0).unwrap();
        let k = energy_kernel(&g).unwrap();
        let c = g.non_base_config();
        for x in 1..8 {
            let chk = network_moment_check(&g, &k, &c, x).unwrap();
            assert!(chk.max_rel_err < 1e-10, "vertex {x}: {chk:?}");
        }
    }
}
