//! Point-mass certification along a filtration `F_1 ⊂ F_2 ⊂ ⋯`.
//!
//! `ζ_n(x) = (K_{F_n}⁻¹ δ_x)(x) = ‖P_{F_n} δ_x‖²` is nondecreasing in `n`,
//! and `δ_x` has finite norm iff the sequence is bounded. A scan grows the
//! factorization one point at a time and tracks the column `L⁻¹ e_x`, so
//! each step costs one triangular solve for the new row plus `O(n)` for
//! the tracked quantities.
//!
//! Verdicts are evidence, not proofs: a plateau over the last `window`
//! steps certifies, sustained positive log-growth or crossing the cap flags
//! divergence, anything else is inconclusive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{dot, GramFactorization, DEFAULT_EPS_PD};
use crate::point_config::{assemble_gram, kernel_border, Kernel, Point, PointConfiguration};

/// Numerical surrogate for the supremum over all finite subsets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPolicy {
    /// Largest filtration size examined.
    pub max_n: usize,
    /// Plateau / slope window, in steps.
    pub window: usize,
    /// Relative increase over the window below which the trace plateaus.
    pub rel_tol: f64,
    /// Absolute value above which the trace is declared diverging.
    pub divergence_cap: f64,
    /// Log-scale slope per step above which growth counts as divergence.
    pub slope_tol: f64,
    pub eps_pd: f64,
    /// Steps between residual audits of the bordered factorization.
    pub audit_every: usize,
}

impl Default for ScanPolicy {
    fn default() -> Self {
        Self {
            max_n: 200,
            window: 5,
            rel_tol: 1e-9,
            divergence_cap: 1e12,
            slope_tol: 1e-3,
            eps_pd: DEFAULT_EPS_PD,
            audit_every: 64,
        }
    }
}

impl ScanPolicy {
    pub fn with_max_n(max_n: usize) -> Self {
        Self { max_n, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::InvalidPolicy("window must be at least 2".into()));
        }
        if self.max_n < self.window {
            return Err(Error::InvalidPolicy("max_n must be at least the window".into()));
        }
        if !(self.rel_tol > 0.0) || !(self.divergence_cap > 0.0) || !(self.eps_pd > 0.0) {
            return Err(Error::InvalidPolicy(
                "rel_tol, divergence_cap and eps_pd must be positive".into(),
            ));
        }
        if self.audit_every == 0 {
            return Err(Error::InvalidPolicy("audit_every must be positive".into()));
        }
        Ok(())
    }
}

/// Three-valued outcome of a filtration scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    CertifiedBounded { limit: f64 },
    /// `log_slope` is the fitted per-step slope of `log value` over the
    /// window, when one was available.
    Diverging { log_slope: Option<f64> },
    Inconclusive,
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::CertifiedBounded { .. })
    }

    pub fn is_diverging(&self) -> bool {
        matches!(self, Verdict::Diverging { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::CertifiedBounded { .. } => "certified_bounded",
            Verdict::Diverging { .. } => "diverging",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Least-squares slope of `ln v` against the step index.
fn log_slope(values: &[f64]) -> Option<f64> {
    if values.len() < 2 || values.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let m = values.len() as f64;
    let xbar = (m - 1.0) / 2.0;
    let ybar = values.iter().map(|v| v.ln()).sum::<f64>() / m;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, v) in values.iter().enumerate() {
        let dx = i as f64 - xbar;
        num += dx * (v.ln() - ybar);
        den += dx * dx;
    }
    Some(num / den)
}

/// Verdict for a nondecreasing positive sequence, judged on its tail.
pub fn classify_monotone(values: &[f64], policy: &ScanPolicy) -> Verdict {
    let Some(&last) = values.last() else {
        return Verdict::Inconclusive;
    };
    let w = policy.window;
    let tail = &values[values.len().saturating_sub(w + 1)..];
    if last > policy.divergence_cap {
        return Verdict::Diverging { log_slope: log_slope(tail) };
    }
    if values.len() < w + 1 {
        return Verdict::Inconclusive;
    }
    let earlier = tail[0];
    if (last - earlier) / last.max(1e-300) < policy.rel_tol {
        return Verdict::CertifiedBounded { limit: last };
    }
    match log_slope(tail) {
        Some(s) if s > policy.slope_tol && still_growing(tail, policy) => {
            Verdict::Diverging { log_slope: Some(s) }
        }
        _ => Verdict::Inconclusive,
    }
}

/// The newest step is a relative increase above `rel_tol`, so a single
/// earlier jump followed by a flat tail never reads as growth.
fn still_growing(tail: &[f64], policy: &ScanPolicy) -> bool {
    match tail {
        [.., prev, last] => (last - prev) / last.abs().max(1e-300) >= policy.rel_tol,
        _ => false,
    }
}

/// Verdict for a signed sequence whose magnitude is bounded by `scales`
/// (Cauchy–Schwarz: `|D_xy| ≤ √(ζ_x ζ_y)`). Plateau is judged relative to
/// that scale so entries converging to zero still certify.
fn classify_scaled(values: &[f64], scales: &[f64], policy: &ScanPolicy) -> Verdict {
    let Some(&last) = values.last() else {
        return Verdict::Inconclusive;
    };
    let w = policy.window;
    let scale = *scales.last().unwrap();
    if scale > policy.divergence_cap {
        return Verdict::Diverging {
            log_slope: log_slope(&scales[scales.len().saturating_sub(w + 1)..]),
        };
    }
    if values.len() < w + 1 {
        return Verdict::Inconclusive;
    }
    let earlier = values[values.len() - 1 - w];
    if (last - earlier).abs() / scale.max(1e-300) < policy.rel_tol {
        return Verdict::CertifiedBounded { limit: last };
    }
    let scale_tail = &scales[scales.len() - 1 - w..];
    match log_slope(scale_tail) {
        Some(s) if s > policy.slope_tol && still_growing(scale_tail, policy) => {
            Verdict::Diverging { log_slope: Some(s) }
        }
        _ => Verdict::Inconclusive,
    }
}

/// Incremental `F_n → F_{n+1}` driver over a configuration.
pub struct Filtration<'a> {
    kernel: &'a dyn Kernel,
    config: &'a PointConfiguration,
    fact: GramFactorization,
    column: Vec<f64>,
    corner: f64,
}

impl<'a> Filtration<'a> {
    /// Checks the kernel's domain on the whole configuration up front.
    pub fn new(kernel: &'a dyn Kernel, config: &'a PointConfiguration, eps_pd: f64) -> Result<Self> {
        kernel.check_points(config.points())?;
        Ok(Self {
            kernel,
            config,
            fact: GramFactorization::empty(eps_pd),
            column: Vec::new(),
            corner: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.fact.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.fact.dim() == 0
    }

    pub fn is_exhausted(&self) -> bool {
        self.len() == self.config.len()
    }

    pub fn factorization(&self) -> &GramFactorization {
        &self.fact
    }

    pub fn into_factorization(self) -> GramFactorization {
        self.fact
    }

    /// Adds the next point; returns the new pivot.
    pub fn advance(&mut self) -> Result<f64> {
        let m = self.len();
        if m >= self.config.len() {
            return Err(Error::SizeOutOfRange {
                requested: m + 1,
                available: self.config.len(),
            });
        }
        self.corner = kernel_border(self.kernel, self.config, m, &mut self.column);
        self.fact.push(&self.column, self.corner)
    }

    /// Grows the filtration until it holds `n` points.
    pub fn advance_to(&mut self, n: usize) -> Result<()> {
        while self.len() < n {
            self.advance()?;
        }
        Ok(())
    }

    /// Residual of the newest row of `K_n K_n⁻¹ = I`, computed from the
    /// kernel column of the last bordering step.
    pub fn audit_last_row(&self) -> f64 {
        let n = self.len();
        if n == 0 {
            return 0.0;
        }
        let mut e = vec![0.0; n];
        e[n - 1] = 1.0;
        let w = self.fact.solve(&e).expect("dimension matches");
        let r = dot(&self.column, &w[..n - 1]) + self.corner * w[n - 1] - 1.0;
        r.abs()
    }
}

/// `L⁻¹ e_t` maintained across bordering steps together with
/// `ζ = Σ_j g_j² / d_j`.
#[derive(Clone, Debug)]
struct TrackedColumn {
    target: usize,
    g: Vec<f64>,
    zeta: f64,
}

impl TrackedColumn {
    fn new(target: usize) -> Self {
        Self { target, g: Vec::new(), zeta: 0.0 }
    }

    /// Extends to the current size of `fact`; returns the newest `g_j`.
    fn update(&mut self, fact: &GramFactorization) -> f64 {
        let n = fact.dim();
        while self.g.len() < n {
            let j = self.g.len();
            let gj = match j.cmp(&self.target) {
                std::cmp::Ordering::Less => 0.0,
                std::cmp::Ordering::Equal => 1.0,
                std::cmp::Ordering::Greater => {
                    let t = self.target;
                    -dot(&fact.row(j)[t..j], &self.g[t..j])
                }
            };
            self.g.push(gj);
            if j >= self.target {
                self.zeta += gj * gj / fact.pivots()[j];
            }
        }
        *self.g.last().unwrap_or(&0.0)
    }
}

/// One step of a trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Size of `F_n`.
    pub n: usize,
    pub value: f64,
    pub verdict_so_far: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub n: usize,
    pub residual: f64,
}

/// Record of `ζ_n(x)` along the filtration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiltrationTrace {
    pub target_index: usize,
    pub steps: Vec<TraceStep>,
    pub verdict: Verdict,
    /// First `n` from which the trace stays within `rel_tol` of its final
    /// value.
    pub plateau_n: Option<usize>,
    /// Filtration size at which the factorization lost positive
    /// definiteness, if it did.
    pub breakdown_n: Option<usize>,
    pub audits: Vec<Audit>,
    pub policy: ScanPolicy,
}

impl FiltrationTrace {
    pub fn values(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.value).collect()
    }

    pub fn last_value(&self) -> Option<f64> {
        self.steps.last().map(|s| s.value)
    }
}

fn plateau_start(steps: &[TraceStep], rel_tol: f64) -> Option<usize> {
    let last = steps.last()?.value;
    steps
        .iter()
        .find(|s| (last - s.value).abs() <= rel_tol * last.abs().max(1e-300))
        .map(|s| s.n)
}

fn target_index(config: &PointConfiguration, x: Point) -> Result<usize> {
    config
        .index_of(x)
        .ok_or_else(|| Error::UnknownPoint { point: x.to_string() })
}

/// `ζ^{(F)} = K_F⁻¹ δ_x`, the coefficients of `P_F δ_x` in the `k_y`.
pub fn projection_coeffs(fact: &GramFactorization, x_index: usize) -> Result<Vec<f64>> {
    let n = fact.dim();
    if x_index >= n {
        return Err(Error::IndexOutOfRange { index: x_index, dim: n });
    }
    fact.solve(&crate::gram::unit(n, x_index))
}

/// `(K_F⁻¹ δ_x)(x) = ‖P_F δ_x‖²`, accumulated from pivots so it is never
/// negative.
pub fn pf_delta_norm_sq(fact: &GramFactorization, x_index: usize) -> Result<f64> {
    let n = fact.dim();
    if x_index >= n {
        return Err(Error::IndexOutOfRange { index: x_index, dim: n });
    }
    let g = fact.unit_forward(x_index);
    Ok(g.iter()
        .zip(fact.pivots())
        .skip(x_index)
        .map(|(g, d)| g * g / d)
        .sum())
}

/// Scans `ζ_n(x)` for `n` from `index(x) + 1` up to `policy.max_n` (or the
/// configuration size). Stops early once the divergence cap is crossed or
/// the factorization breaks down.
pub fn membership_scan(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    x: Point,
    policy: &ScanPolicy,
) -> Result<FiltrationTrace> {
    policy.validate()?;
    let t = target_index(config, x)?;
    let mut filt = Filtration::new(kernel, config, policy.eps_pd)?;
    let mut col = TrackedColumn::new(t);
    let upper = policy.max_n.min(config.len());
    let mut steps = Vec::new();
    let mut values = Vec::new();
    let mut audits = Vec::new();
    let mut breakdown_n = None;

    if t < upper {
        if let Err(e) = filt.advance_to(t + 1) {
            return match e {
                Error::NotPositiveDefinite { pivot, .. } => Ok(FiltrationTrace {
                    target_index: t,
                    steps,
                    verdict: Verdict::Inconclusive,
                    plateau_n: None,
                    breakdown_n: Some(pivot),
                    audits,
                    policy: *policy,
                }),
                other => Err(other),
            };
        }
        loop {
            col.update(filt.factorization());
            let n = filt.len();
            values.push(col.zeta);
            let verdict_so_far = classify_monotone(&values, policy);
            steps.push(TraceStep { n, value: col.zeta, verdict_so_far });
            if n % policy.audit_every == 0 {
                audits.push(Audit { n, residual: filt.audit_last_row() });
            }
            if col.zeta > policy.divergence_cap || n >= upper {
                break;
            }
            match filt.advance() {
                Ok(_) => {}
                Err(Error::NotPositiveDefinite { pivot, .. }) => {
                    breakdown_n = Some(pivot);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }

    let verdict = steps.last().map_or(Verdict::Inconclusive, |s| s.verdict_so_far);
    let plateau_n = match verdict {
        Verdict::CertifiedBounded { .. } => plateau_start(&steps, policy.rel_tol),
        _ => None,
    };
    Ok(FiltrationTrace {
        target_index: t,
        steps,
        verdict,
        plateau_n,
        breakdown_n,
        audits,
        policy: *policy,
    })
}

/// Estimate of `‖δ_x‖²` with the verdict backing it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaNormEstimate {
    /// Last value of the trace; the finite-model value even when the
    /// verdict does not certify it.
    pub estimate: f64,
    pub verdict: Verdict,
}

impl DeltaNormEstimate {
    pub fn certified(&self) -> Option<f64> {
        self.verdict.is_certified().then_some(self.estimate)
    }
}

pub fn delta_norm_sq(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    x: Point,
    policy: &ScanPolicy,
) -> Result<DeltaNormEstimate> {
    let trace = membership_scan(kernel, config, x, policy)?;
    Ok(DeltaNormEstimate {
        estimate: trace.last_value().unwrap_or(f64::NAN),
        verdict: trace.verdict,
    })
}

/// `det K'_F / det K_F`, where `K'_F` omits the row and column of `x`.
/// Equal to `ζ^{(F)}(x)` by Cramer's rule; computed from two independent
/// factorizations.
pub fn minor_ratio(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    x: Point,
    n: usize,
) -> Result<f64> {
    let t = target_index(config, x)?;
    if t >= n {
        return Err(Error::IndexOutOfRange { index: t, dim: n });
    }
    let gram = assemble_gram(kernel, config, n)?;
    let full = GramFactorization::factorize(&gram, DEFAULT_EPS_PD)?;
    let keep: Vec<usize> = (0..n).filter(|&i| i != t).collect();
    let minor = gram.entries().select_rows(&keep).select_columns(&keep);
    let minor = GramFactorization::factorize_matrix(&minor, DEFAULT_EPS_PD)?;
    Ok((minor.log_det() - full.log_det()).exp())
}

/// Trace of `(K_{F_n}⁻¹)_{xy}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedEntry {
    pub estimate: f64,
    pub verdict: Verdict,
    pub steps: Vec<(usize, f64)>,
}

/// `⟨δ_x, δ_y⟩_ℋ = lim_n (K_{F_n}⁻¹)_{xy}`.
///
/// The plateau test is relative to `√(ζ_n(x) ζ_n(y))`, which bounds the
/// entry. If either diagonal scan diverges, so does the entry.
pub fn induced_kernel_entry(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    x: Point,
    y: Point,
    policy: &ScanPolicy,
) -> Result<InducedEntry> {
    policy.validate()?;
    let tx = target_index(config, x)?;
    let ty = target_index(config, y)?;
    let start = tx.max(ty) + 1;
    let upper = policy.max_n.min(config.len());
    let mut filt = Filtration::new(kernel, config, policy.eps_pd)?;
    let mut cx = TrackedColumn::new(tx);
    let mut cy = TrackedColumn::new(ty);
    let mut entry = 0.0;
    let mut steps = Vec::new();
    let (mut values, mut scales, mut zx, mut zy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());

    if start <= upper && filt.advance_to(start).is_ok() {
        let mut accounted = 0;
        loop {
            cx.update(filt.factorization());
            cy.update(filt.factorization());
            let n = filt.len();
            let d = filt.factorization().pivots();
            while accounted < n {
                entry += cx.g[accounted] * cy.g[accounted] / d[accounted];
                accounted += 1;
            }
            steps.push((n, entry));
            values.push(entry);
            scales.push((cx.zeta * cy.zeta).sqrt());
            zx.push(cx.zeta);
            zy.push(cy.zeta);
            if cx.zeta.max(cy.zeta) > policy.divergence_cap || n >= upper {
                break;
            }
            if filt.advance().is_err() {
                break;
            }
        }
    }

    let vx = classify_monotone(&zx, policy);
    let vy = classify_monotone(&zy, policy);
    let verdict = if vx.is_diverging() || vy.is_diverging() {
        Verdict::Diverging { log_slope: None }
    } else {
        classify_scaled(&values, &scales, policy)
    };
    Ok(InducedEntry {
        estimate: values.last().copied().unwrap_or(f64::NAN),
        verdict,
        steps,
    })
}

/// Partial sums of `Σ_y |(K_{F_n}⁻¹)_{xy}|²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowTest {
    pub partial_sums: Vec<(usize, f64)>,
    pub verdict: Verdict,
    /// Verdict of the underlying `ζ_n(x)` scan.
    pub diagonal_verdict: Verdict,
}

impl RowTest {
    pub fn limit(&self) -> Option<f64> {
        self.partial_sums.last().map(|p| p.1)
    }
}

/// Tests whether the row `⟨δ_x, δ_·⟩_ℋ` is square-summable.
pub fn l2_row_test(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    x: Point,
    policy: &ScanPolicy,
) -> Result<RowTest> {
    policy.validate()?;
    let t = target_index(config, x)?;
    let upper = policy.max_n.min(config.len());
    let mut filt = Filtration::new(kernel, config, policy.eps_pd)?;
    let mut col = TrackedColumn::new(t);
    let mut sums = Vec::new();
    let mut values = Vec::new();
    let mut zetas = Vec::new();

    if t < upper && filt.advance_to(t + 1).is_ok() {
        loop {
            col.update(filt.factorization());
            let fact = filt.factorization();
            let n = fact.dim();
            let mut z: Vec<f64> = col.g.iter().zip(fact.pivots()).map(|(g, d)| g / d).collect();
            fact.backward_in_place(&mut z);
            let s: f64 = z.iter().map(|v| v * v).sum();
            sums.push((n, s));
            values.push(s);
            zetas.push(col.zeta);
            if col.zeta > policy.divergence_cap || n >= upper {
                break;
            }
            if filt.advance().is_err() {
                break;
            }
        }
    }

    let diagonal_verdict = classify_monotone(&zetas, policy);
    let verdict = if diagonal_verdict.is_diverging() {
        diagonal_verdict
    } else {
        // the row sum is not monotone in general; plateau on its own scale
        classify_scaled(&values, &values.iter().map(|v| v.abs()).collect::<Vec<_>>(), policy)
    };
    Ok(RowTest {
        partial_sums: sums,
        verdict,
        diagonal_verdict,
    })
}

/// Orthogonal projection onto `span{δ_s : s ∈ subset}` in the finite model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelProjection {
    /// Coefficients on the `δ_s`, in subset order.
    pub coefficients: Vec<f64>,
    /// `‖f − proj‖²_ℋ`.
    pub residual_norm_sq: f64,
    /// `‖f‖²_ℋ`.
    pub norm_sq: f64,
}

/// Projects `f = Σ c_y k_y` onto the span of the point masses in `subset`.
///
/// In the finite model `⟨δ_s, δ_t⟩ = (K⁻¹)_{st}` and `⟨δ_s, f⟩ = c_s`, so
/// the coefficients solve `(K⁻¹)_{SS} a = c_S`.
pub fn del_projection(
    fact: &GramFactorization,
    gram: &crate::point_config::GramMatrix,
    f_coeffs: &[f64],
    subset: &[usize],
) -> Result<DelProjection> {
    let n = fact.dim();
    if f_coeffs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f_coeffs.len() });
    }
    if gram.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: gram.dim() });
    }
    for &s in subset {
        if s >= n {
            return Err(Error::IndexOutOfRange { index: s, dim: n });
        }
    }
    let norm_sq = gram.quadratic_form(f_coeffs);
    if subset.is_empty() {
        return Ok(DelProjection { coefficients: vec![], residual_norm_sq: norm_sq, norm_sq });
    }
    // columns of K⁻¹ restricted to the subset
    let cols: Vec<Vec<f64>> = subset
        .iter()
        .map(|&s| fact.solve(&crate::gram::unit(n, s)))
        .collect::<Result<_>>()?;
    let m = subset.len();
    let inner = nalgebra::DMatrix::from_fn(m, m, |a, b| {
        // symmetrize the two computed entries
        0.5 * (cols[b][subset[a]] + cols[a][subset[b]])
    });
    let inner_fact = GramFactorization::factorize_matrix(&inner, DEFAULT_EPS_PD)?;
    let rhs: Vec<f64> = subset.iter().map(|&s| f_coeffs[s]).collect();
    let coefficients = inner_fact.solve(&rhs)?;
    let captured: f64 = coefficients.iter().zip(&rhs).map(|(a, c)| a * c).sum();
    Ok(DelProjection {
        coefficients,
        residual_norm_sq: (norm_sq - captured).max(0.0),
        norm_sq,
    })
}

/// [`del_projection`] on `F_n` after confirming that no requested point
/// mass has a diverging scan.
pub fn del_projection_checked(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    n: usize,
    f_coeffs: &[f64],
    subset: &[usize],
    policy: &ScanPolicy,
) -> Result<DelProjection> {
    for &s in subset {
        let p = config.point(s);
        if membership_scan(kernel, config, p, policy)?.verdict.is_diverging() {
            return Err(Error::SubsetMembershipUnverified { point: p.to_string() });
        }
    }
    let gram = assemble_gram(kernel, config, n)?;
    let fact = GramFactorization::factorize(&gram, policy.eps_pd)?;
    del_projection(&fact, &gram, f_coeffs, subset)
}

/// Running lower bound for the constant `C_f` with
/// `|Σ ξ̄ f|² ≤ C_f · ξᵗ K ξ` over finitely supported `ξ` on `F_n`.
///
/// On each `F_n` the best `ξ` is `K⁻¹ f`, giving `fᵗ K_{F_n}⁻¹ f`; the
/// sequence is nondecreasing and bounded iff `f ∈ ℋ`. The returned trace
/// uses the same verdict rules as [`membership_scan`].
pub fn norm_lower_bound_trace(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    f_values: &[f64],
    policy: &ScanPolicy,
) -> Result<(Vec<(usize, f64)>, Verdict)> {
    policy.validate()?;
    if f_values.len() != config.len() {
        return Err(Error::DimensionMismatch { expected: config.len(), got: f_values.len() });
    }
    let upper = policy.max_n.min(config.len());
    let mut filt = Filtration::new(kernel, config, policy.eps_pd)?;
    let mut y: Vec<f64> = Vec::new();
    let mut acc = 0.0;
    let mut out = Vec::new();
    let mut values = Vec::new();
    while filt.len() < upper {
        if filt.advance().is_err() {
            break;
        }
        let fact = filt.factorization();
        let j = fact.dim() - 1;
        let yj = f_values[j] - dot(fact.row(j), &y);
        y.push(yj);
        acc += yj * yj / fact.pivots()[j];
        out.push((j + 1, acc));
        values.push(acc);
    }
    Ok((out, classify_monotone(&values, policy)))
}
