//! Point-mass sample sets, frame bounds, interpolation and the restriction
//! isometry.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramFactorization;
use crate::kernels::SincKernel;
use crate::point_config::{assemble_gram, Kernel, Point, PointConfiguration};
use crate::pointmass::{membership_scan, ScanPolicy};

/// A nonempty set of configuration indices, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    indices: Vec<usize>,
}

impl SampleSet {
    pub fn new(mut indices: Vec<usize>, config: &PointConfiguration) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= config.len() {
                return Err(Error::IndexOutOfRange { index: last, dim: config.len() });
            }
        }
        Ok(Self { indices })
    }

    /// `F_n` itself.
    pub fn prefix(n: usize, config: &PointConfiguration) -> Result<Self> {
        Self::new((0..n).collect(), config)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn max_index(&self) -> usize {
        *self.indices.last().expect("nonempty")
    }
}

/// `f = Σ c_s k_s` over a finite support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelExpansion {
    pub points: Vec<Point>,
    pub coefficients: Vec<f64>,
}

impl KernelExpansion {
    pub fn new(points: Vec<Point>, coefficients: Vec<f64>) -> Result<Self> {
        if points.len() != coefficients.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: coefficients.len() });
        }
        Ok(Self { points, coefficients })
    }

    pub fn eval(&self, kernel: &dyn Kernel, x: Point) -> f64 {
        self.points
            .iter()
            .zip(&self.coefficients)
            .map(|(&s, c)| c * kernel.eval(x, s))
            .sum()
    }

    /// `Σ_s Σ_t c_s c_t k(s, t)`.
    pub fn norm_sq(&self, kernel: &dyn Kernel) -> f64 {
        let mut acc = 0.0;
        for (i, (&s, cs)) in self.points.iter().zip(&self.coefficients).enumerate() {
            acc += cs * cs * kernel.eval(s, s);
            for (&t, ct) in self.points[i + 1..].iter().zip(&self.coefficients[i + 1..]) {
                acc += 2.0 * cs * ct * kernel.eval(s, t);
            }
        }
        acc
    }
}

fn check_subset(sample: &SampleSet, n: usize) -> Result<()> {
    if sample.max_index() >= n {
        return Err(Error::IndexOutOfRange { index: sample.max_index(), dim: n });
    }
    Ok(())
}

/// Largest `ε` with `Σ_{s∈S} |f(s)|² ≥ ε ‖f‖²` for `f ∈ span{k_x : x ∈ F_n}`.
///
/// With `K_{F_n} = C Cᵗ`, `C = L D^{1/2}`, the generalized problem
/// `K_{·S} K_{S·} v = ε K v` reduces to the smallest eigenvalue of
/// `C_Sᵗ C_S`, where `C_S` keeps the rows of `C` indexed by `S`. Returns 0
/// when that matrix is rank-deficient, which is always the case for
/// `|S| < n`.
pub fn frame_lower_bound(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    sample: &SampleSet,
    n: usize,
    eps_pd: f64,
) -> Result<f64> {
    check_subset(sample, n)?;
    let gram = assemble_gram(kernel, config, n)?;
    let fact = GramFactorization::factorize(&gram, eps_pd)?;
    if sample.len() < n {
        return Ok(0.0);
    }
    let sqrt_d: Vec<f64> = fact.pivots().iter().map(|d| d.sqrt()).collect();
    let c = DMatrix::from_fn(sample.len(), n, |r, j| fact.l(sample.indices()[r], j) * sqrt_d[j]);
    let m = c.transpose() * &c;
    let eig = SymmetricEigen::new(m).eigenvalues;
    let max = eig.max();
    let min = eig.min();
    Ok(if min <= n as f64 * f64::EPSILON * max { 0.0 } else { min })
}

/// [`frame_lower_bound`] on each truncation `F_n`, `n ∈ ns`.
pub fn frame_bound_trend(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    sample: &SampleSet,
    ns: &[usize],
    eps_pd: f64,
) -> Result<Vec<(usize, f64)>> {
    ns.iter()
        .map(|&n| Ok((n, frame_lower_bound(kernel, config, sample, n, eps_pd)?)))
        .collect()
}

/// Result of [`interpolate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interpolation {
    pub expansion: KernelExpansion,
    /// `‖f̂‖²` as the double sum over pairings and kernel values.
    pub norm_sq: f64,
    /// `‖f̂‖²` from the values of `f̂` on `S` and the inverse sampled Gram.
    pub norm_sq_from_values: f64,
    /// Sample points whose scan did not certify a finite norm.
    pub unverified: Vec<String>,
}

/// `f̂ = Σ_{s∈S} ⟨δ_s, f⟩ k_s`.
///
/// Fails with [`Error::SubsetMembershipUnverified`] if any `δ_s` scan
/// diverges; inconclusive scans are listed in the result.
pub fn interpolate(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    sample: &SampleSet,
    pairings: &[f64],
    policy: &ScanPolicy,
) -> Result<Interpolation> {
    if pairings.len() != sample.len() {
        return Err(Error::DimensionMismatch { expected: sample.len(), got: pairings.len() });
    }
    let mut unverified = Vec::new();
    for &s in sample.indices() {
        let p = config.point(s);
        let trace = membership_scan(kernel, config, p, policy)?;
        if trace.verdict.is_diverging() {
            return Err(Error::SubsetMembershipUnverified { point: p.to_string() });
        }
        if !trace.verdict.is_certified() {
            unverified.push(p.to_string());
        }
    }
    let sub = config.subset(sample.indices())?;
    let expansion = KernelExpansion::new(sub.points().to_vec(), pairings.to_vec())?;
    let norm_sq = expansion.norm_sq(kernel);
    if !(norm_sq <= policy.divergence_cap) {
        return Err(Error::NormDivergent { value: norm_sq, cap: policy.divergence_cap });
    }
    let gram = assemble_gram(kernel, &sub, sub.len())?;
    let fact = GramFactorization::factorize(&gram, policy.eps_pd)?;
    let values = gram.apply(pairings);
    let norm_sq_from_values = fact.inverse_quadratic(&values)?;
    Ok(Interpolation { expansion, norm_sq, norm_sq_from_values, unverified })
}

/// Pairings `⟨δ_y, f⟩` on `F_n` of the function with values `f` on `F_n`:
/// `K_{F_n}⁻¹ f`.
pub fn pairings_from_values(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    values: &[f64],
    eps_pd: f64,
) -> Result<Vec<f64>> {
    let n = values.len();
    let gram = assemble_gram(kernel, config, n)?;
    GramFactorization::factorize(&gram, eps_pd)?.solve(values)
}

/// Pairings of `f = Σ c_y k_y` over `F_n` restricted to `S`: `⟨δ_s, f⟩ = c_s`.
pub fn pairings_from_expansion(coefficients: &[f64], sample: &SampleSet) -> Result<Vec<f64>> {
    check_subset(sample, coefficients.len())?;
    Ok(sample.indices().iter().map(|&s| coefficients[s]).collect())
}

/// Largest relative gap between `ξᵗ K|_{S×S} ξ` from the Gram of `S` alone
/// and from the submatrix of the full Gram, over `trials` seeded random `ξ`.
pub fn restriction_isometry_check(
    kernel: &dyn Kernel,
    full_config: &PointConfiguration,
    sample: &SampleSet,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    check_subset(sample, full_config.len())?;
    let sub = full_config.subset(sample.indices())?;
    let restricted = assemble_gram(kernel, &sub, sub.len())?;
    let n = sample.max_index() + 1;
    let full = assemble_gram(kernel, full_config, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let xi: Vec<f64> = (0..sample.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = restricted.quadratic_form(&xi);
        let mut padded = vec![0.0; n];
        for (&s, v) in sample.indices().iter().zip(&xi) {
            padded[s] = *v;
        }
        let b = full.quadratic_form(&padded);
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((a - b).abs() / scale);
    }
    Ok(worst)
}

/// Result of [`shannon_reconstruct`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShannonReconstruction {
    pub values: Vec<f64>,
    /// `(Σ_{N<|n|≤M} |f(n)|²)^{1/2}`, which bounds the truncation error
    /// pointwise since `‖k_x‖ = 1`.
    pub tail_l2: f64,
}

/// `f(x) ≈ Σ_{|n|≤N} f(n) sinc(x − n)` at each `x`.
pub fn shannon_reconstruct(
    samples: impl Fn(i64) -> f64,
    window: i64,
    tail_horizon: i64,
    xs: &[f64],
) -> ShannonReconstruction {
    let fs: Vec<(f64, f64)> = (-window..=window).map(|n| (n as f64, samples(n))).collect();
    let values = xs
        .iter()
        .map(|&x| {
            fs.iter()
                .map(|&(n, f)| f * SincKernel.eval(Point::Real(x), Point::Real(n)))
                .sum()
        })
        .collect();
    let tail: f64 = (window + 1..=tail_horizon.max(window))
        .map(|n| samples(n).powi(2) + samples(-n).powi(2))
        .sum();
    ShannonReconstruction { values, tail_l2: tail.sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::MinKernel;
    use crate::oracles::psi;

    fn reals(xs: &[f64]) -> PointConfiguration {
        PointConfiguration::from_reals(xs, true).unwrap()
    }

    #[test]
    fn frame_bound_full_set_is_lambda_min() {
        let c = reals(&[0.5, 1.0, 2.5, 3.0]);
        let s = SampleSet::prefix(4, &c).unwrap();
        let eps = frame_lower_bound(&MinKernel, &c, &s, 4, 1e-12).unwrap();
        let k = assemble_gram(&MinKernel, &c, 4).unwrap();
        let lam = SymmetricEigen::new(k.entries().clone()).eigenvalues.min();
        assert!((eps - lam).abs() < 1e-12 * lam.max(1.0));
    }

    #[test]
    fn frame_bound_single_point_is_zero() {
        let c = reals(&[1.0, 2.0]);
        let s = SampleSet::new(vec![0], &c).unwrap();
        assert_eq!(frame_lower_bound(&MinKernel, &c, &s, 2, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn sinc_frame_bound_is_one() {
        let xs: Vec<f64> = (-5..=5).map(f64::from).collect();
        let c = reals(&xs);
        let s = SampleSet::prefix(11, &c).unwrap();
        let eps = frame_lower_bound(&SincKernel, &c, &s, 11, 1e-12).unwrap();
        assert!((eps - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_examples() {
        let c = reals(&[1.0, 2.0, 3.0]);
        let s = SampleSet::prefix(3, &c).unwrap();
        let coeffs = [1.0, 0.5, -0.25];
        let p = pairings_from_expansion(&coeffs, &s).unwrap();
        let r = interpolate(&MinKernel, &c, &s, &p, &ScanPolicy::default()).unwrap();
        assert_eq!(r.expansion.coefficients, coeffs.to_vec());
        assert!((r.norm_sq - r.norm_sq_from_values).abs() < 1e-12 * r.norm_sq);
        let zero = interpolate(&MinKernel, &c, &s, &[0.0; 3], &ScanPolicy::default()).unwrap();
        assert_eq!(zero.norm_sq, 0.0);
        // k_t reproduced from the unit pairing row
        let kt = interpolate(&MinKernel, &c, &s, &[0.0, 1.0, 0.0], &ScanPolicy::default()).unwrap();
        for x in [0.5, 1.7, 4.0] {
            assert_eq!(kt.expansion.eval(&MinKernel, Point::Real(x)), MinKernel.eval(Point::Real(x), Point::Real(2.0)));
        }
    }

    #[test]
    fn restriction_isometry() {
        let c = reals(&[0.3, 0.9, 1.4, 2.0, 3.3]);
        let s = SampleSet::new(vec![1, 3], &c).unwrap();
        assert!(restriction_isometry_check(&MinKernel, &c, &s, 100, 0).unwrap() <= 1e-12);
    }

    #[test]
    fn shannon_sinc() {
        let xs: Vec<f64> = (0..50).map(|i| -10.0 + 0.41 * i as f64 + 0.05).collect();
        let r = shannon_reconstruct(|n| if n == 0 { 1.0 } else { 0.0 }, 200, 400, &xs);
        for (x, v) in xs.iter().zip(&r.values) {
            assert!((v - psi(std::f64::consts::PI * x)).abs() < 1e-6);
        }
        assert_eq!(r.tail_l2, 0.0);
    }
}
