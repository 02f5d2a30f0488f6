//! Every closed-form oracle run against the numeric engine.
//!
//! Each check compares engine values `e` against oracle values `o` and
//! reports `max |e·(1 + perturb) − o| / scale(o)`. A nonzero `perturb`
//! is a negative control: every check must then fail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{GramFactorization, DEFAULT_EPS_PD};
use crate::kernels::{binomial_kernel_exact, pascal_table, BinomialKernel, BridgeKernel, MinKernel};
use crate::moments::moment_identity_check;
use crate::network::{delta_inner_energy, energy_inner, energy_kernel, laplacian_apply, NetworkGraph, VertexFunction};
use crate::oracles::{
    binomial_partial_sum, int_matmul, int_transpose, oracle_binomial_gram_inverse, oracle_bridge_delta_norm_sq,
    oracle_bridge_det, oracle_min_delta_norm_sq, oracle_min_det, pascal_inverse, pascal_lower, psi,
};
use crate::point_config::{assemble_gram, Point, PointConfiguration};
use crate::pointmass::{membership_scan, minor_ratio, pf_delta_norm_sq, ScanPolicy};
use crate::sampling::shannon_reconstruct;

/// Formula ids in run order.
pub const FORMULAS: [&str; 11] = ["bm5", "bm6", "bb7", "b5", "b7", "b9", "b12", "an7", "L3", "wa1", "sh2"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub formula: String,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Formula ids to run; empty runs all.
    pub filter: Vec<String>,
    pub seed: u64,
    /// Relative perturbation applied to every engine value.
    pub perturb: f64,
}

struct Acc {
    perturb: f64,
    worst: f64,
    samples: usize,
}

impl Acc {
    fn new(perturb: f64) -> Self {
        Self { perturb, worst: 0.0, samples: 0 }
    }

    fn push(&mut self, engine: f64, oracle: f64, scale: f64) {
        let e = engine * (1.0 + self.perturb);
        let err = (e - oracle).abs() / scale;
        // NaN counts as a failure
        self.worst = if err.is_nan() { f64::INFINITY } else { self.worst.max(err) };
        self.samples += 1;
    }

    fn rel(&mut self, engine: f64, oracle: f64) {
        let scale = if oracle == 0.0 { 1.0 } else { oracle.abs() };
        self.push(engine, oracle, scale);
    }

    fn finish(self, formula: &str, tolerance: f64) -> OracleResult {
        OracleResult {
            formula: formula.into(),
            max_rel_err: self.worst,
            tolerance,
            samples: self.samples,
            pass: self.worst <= tolerance,
        }
    }
}

fn random_increasing(rng: &mut ChaCha8Rng, n: usize, min_gap: f64, max_gap: f64) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x += rng.gen_range(min_gap..max_gap);
            x
        })
        .collect()
}

fn random_unit_interval(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let gaps: Vec<f64> = (0..=n).map(|_| rng.gen_range(1.0..2.0)).collect();
    let total: f64 = gaps.iter().sum();
    let mut x = 0.0;
    gaps[..n]
        .iter()
        .map(|g| {
            x += g / total;
            x
        })
        .collect()
}

fn config(xs: &[f64]) -> Result<PointConfiguration> {
    PointConfiguration::from_reals(xs, true)
}

fn check_bm5(rng: &mut ChaCha8Rng, acc: &mut Acc) -> Result<()> {
    for _ in 0..20 {
        let n = rng.gen_range(2..=300);
        let xs = random_increasing(rng, n, 1e-3, 1.0);
        let gram = assemble_gram(&MinKernel, &config(&xs)?, n)?;
        let fact = GramFactorization::factorize(&gram, DEFAULT_EPS_PD)?;
        let o = oracle_min_det(&xs);
        acc.push(fact.log_det(), o, o.abs().max(1.0));
    }
    Ok(())
}

fn check_bm6(rng: &mut ChaCha8Rng, acc: &mut Acc) -> Result<()> {
    for _ in 0..5 {
        let n = 40;
        let xs = random_increasing(rng, n, 1e-2, 1.0);
        let c = config(&xs)?;
        for i in [0, 1, n / 2, n - 2] {
            let o = oracle_min_delta_norm_sq(&xs, i).value;
            let trace = membership_scan(&MinKernel, &c, Point::Real(xs[i]), &ScanPolicy::default())?;
            acc.rel(trace.last_value().unwrap_or(f64::NAN), o);
            acc.rel(minor_ratio(&MinKernel, &c, Point::Real(xs[i]), i + 2)?, o);
        }
    }
    Ok(())
}

fn check_bb7(rng: &mut ChaCha8Rng, acc: &mut Acc) -> Result<()> {
    for _ in 0..10 {
        let n = rng.gen_range(2..=60);
        let xs = random_unit_interval(rng, n);
        let c = config(&xs)?;
        let gram = assemble_gram(&BridgeKernel, &c, n)?;
        let fact = GramFactorization::factorize(&gram, DEFAULT_EPS_PD)?;
        let o = oracle_bridge_det(&xs);
        acc.push(fact.log_det(), o, o.abs().max(1.0));
        for i in [0, n / 2, n - 1] {
            let pf = pf_delta_norm_sq(&fact, i)?;
            acc.rel(pf, oracle_bridge_delta_norm_sq(&xs, i));
        }
    }
    Ok(())
}

fn int_identity_error(m: &[Vec<i128>], acc: &mut Acc) {
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            acc.rel(v as f64, f64::from(u8::from(i == j)));
        }
    }
}

fn check_b5(acc: &mut Acc) -> Result<()> {
    for n in 0..=25 {
        int_identity_error(&int_matmul(&pascal_lower(n)?, &pascal_inverse(n)?)?, acc);
    }
    Ok(())
}

/// `K = L Lᵗ` against the Vandermonde form `k(x, y) = C(x + y, x)`.
fn check_b7(acc: &mut Acc) -> Result<()> {
    let t = pascal_table();
    for n in [5, 12, 25] {
        let l = pascal_lower(n)?;
        let k = int_matmul(&l, &int_transpose(&l))?;
        for x in 0..=n {
            for y in 0..=n {
                acc.rel(k[x][y] as f64, t[x + y][x] as f64);
                acc.rel(binomial_kernel_exact(x, y)? as f64, t[x + y][x] as f64);
            }
        }
    }
    Ok(())
}

fn check_b9(acc: &mut Acc) -> Result<()> {
    for n in [3, 10, 20] {
        let k: Vec<Vec<i128>> = (0..=n)
            .map(|x| (0..=n).map(|y| binomial_kernel_exact(x, y).map(|v| v as i128)).collect())
            .collect::<Result<_>>()?;
        int_identity_error(&int_matmul(&k, &oracle_binomial_gram_inverse(n)?)?, acc);
    }
    Ok(())
}

fn check_b12(acc: &mut Acc) -> Result<()> {
    for n in 0..=25 {
        let inv = oracle_binomial_gram_inverse(n)?;
        for x in 0..=n.min(5) {
            acc.rel(inv[x][x] as f64, binomial_partial_sum(x, n)? as f64);
        }
    }
    let xs: Vec<f64> = (0..=10).map(f64::from).collect();
    let c = config(&xs)?;
    for n in 2..=10 {
        let gram = assemble_gram(&BinomialKernel, &c, n + 1)?;
        let fact = GramFactorization::factorize(&gram, DEFAULT_EPS_PD)?;
        for x in 0..=n.min(5) {
            acc.rel(pf_delta_norm_sq(&fact, x)?, binomial_partial_sum(x, n)? as f64);
        }
    }
    Ok(())
}

fn random_graphs(rng: &mut ChaCha8Rng, count: usize, max_n: usize) -> Result<Vec<NetworkGraph>> {
    (0..count)
        .map(|_| {
            let n = rng.gen_range(3..=max_n);
            let extra = rng.gen_range(0..=2 * n);
            NetworkGraph::random_connected(n, extra, 0.5, 2.0, rng.gen())
        })
        .collect()
}

fn check_an7(rng: &mut ChaCha8Rng, acc: &mut Acc) -> Result<()> {
    for g in random_graphs(rng, 5, 40)? {
        let k = energy_kernel(&g)?;
        let c = g.non_base_config();
        let gram = assemble_gram(&k, &c, c.len())?;
        let fact = GramFactorization::factorize(&gram, DEFAULT_EPS_PD)?;
        let verts = g.non_base_vertices();
        for (a, &x) in verts.iter().enumerate() {
            let col = fact.solve(&crate::gram::unit(verts.len(), a))?;
            for (b, &y) in verts.iter().enumerate() {
                let o = delta_inner_energy(&g, x, y);
                let scale = g.degree(x).max(g.degree(y));
                acc.push(col[b], o, scale);
                let e = energy_inner(&g, &g.indicator(x), &g.indicator(y));
                acc.push(e, o, scale);
            }
        }
    }
    Ok(())
}

fn check_l3(rng: &mut ChaCha8Rng, acc: &mut Acc) -> Result<()> {
    for g in random_graphs(rng, 5, 60)? {
        let k = energy_kernel(&g)?;
        for x in g.non_base_vertices() {
            let kx = VertexFunction(k.green().column(x).iter().copied().collect());
            let lap = laplacian_apply(&g, &kx);
            for y in g.non_base_vertices() {
                acc.push(lap.0[y], f64::from(u8::from(x == y)), 1.0);
            }
        }
    }
    Ok(())
}

fn check_wa1(rng: &mut ChaCha8Rng, acc: &mut Acc) -> Result<()> {
    let xs = random_increasing(rng, 40, 1e-2, 1.0);
    let c = config(&xs)?;
    for i in [0, 5, 17, 30] {
        let r = moment_identity_check(&MinKernel, &c, Point::Real(xs[i]), &ScanPolicy::default(), 1e-8)?;
        acc.rel(r.rhs, r.lhs);
    }
    Ok(())
}

fn check_sh2(acc: &mut Acc) {
    let xs: Vec<f64> = (0..50).map(|i| -12.3 + 0.5 * i as f64).collect();
    let r = shannon_reconstruct(|n| if n == 0 { 1.0 } else { 0.0 }, 200, 400, &xs);
    for (x, v) in xs.iter().zip(&r.values) {
        acc.push(*v, psi(std::f64::consts::PI * x), 1.0);
    }
}

fn tolerance(formula: &str) -> f64 {
    match formula {
        "sh2" => 1e-6,
        "wa1" => 1e-8,
        "b5" | "b7" | "b9" => 0.0,
        _ => 1e-9,
    }
}

/// Runs the selected checks in [`FORMULAS`] order.
pub fn run_oracle_suite(opts: &SuiteOptions) -> Result<Vec<OracleResult>> {
    for f in &opts.filter {
        if !FORMULAS.contains(&f.as_str()) {
            return Err(Error::InvalidPolicy(format!("unknown formula {f}")));
        }
    }
    let mut out = Vec::new();
    for (k, &formula) in FORMULAS.iter().enumerate() {
        if !opts.filter.is_empty() && !opts.filter.iter().any(|f| f == formula) {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
        let mut acc = Acc::new(opts.perturb);
        match formula {
            "bm5" => check_bm5(&mut rng, &mut acc)?,
            "bm6" => check_bm6(&mut rng, &mut acc)?,
            "bb7" => check_bb7(&mut rng, &mut acc)?,
            "b5" => check_b5(&mut acc)?,
            "b7" => check_b7(&mut acc)?,
            "b9" => check_b9(&mut acc)?,
            "b12" => check_b12(&mut acc)?,
            "an7" => check_an7(&mut rng, &mut acc)?,
            "L3" => check_l3(&mut rng, &mut acc)?,
            "wa1" => check_wa1(&mut rng, &mut acc)?,
            "sh2" => check_sh2(&mut acc),
            _ => unreachable!(),
        }
        out.push(acc.finish(formula, tolerance(formula)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let r = run_oracle_suite(&SuiteOptions::default()).unwrap();
        assert_eq!(r.len(), FORMULAS.len());
        for o in &r {
            assert!(o.pass, "{o:?}");
        }
    }

    #[test]
    fn perturbation_is_detected() {
        let opts = SuiteOptions { perturb: 1e-5, ..Default::default() };
        for o in run_oracle_suite(&opts).unwrap() {
            assert!(!o.pass, "{o:?}");
        }
    }

    #[test]
    fn filter() {
        let opts = SuiteOptions { filter: vec!["b5".into()], ..Default::default() };
        assert_eq!(run_oracle_suite(&opts).unwrap().len(), 1);
        let bad = SuiteOptions { filter: vec!["zz".into()], ..Default::default() };
        assert!(run_oracle_suite(&bad).is_err());
    }
}
