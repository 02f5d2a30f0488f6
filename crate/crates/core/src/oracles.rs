//! Closed-form values for the built-in kernels.
//!
//! Nothing here touches the factorization engine; these are the independent
//! references the engine is checked against.

use crate::error::{Error, Result};
use crate::kernels::pascal_table;

/// `log det K_F` for the min kernel: `log x₁ + Σ log(x_{i+1} − x_i)`.
pub fn oracle_min_det(points: &[f64]) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for &x in points {
        acc += (x - prev).ln();
        prev = x;
    }
    acc
}

/// `log det K_F` for the bridge kernel: the min-kernel product times
/// `(1 − x_n)`.
pub fn oracle_bridge_det(points: &[f64]) -> f64 {
    match points.last() {
        Some(&last) => oracle_min_det(points) + (1.0 - last).ln(),
        None => 0.0,
    }
}

/// A closed-form `‖δ_x‖²` value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaNormOracle {
    pub value: f64,
    /// Set when `i` is the last point of the window, where the value is the
    /// finite-window `1/(x_i − x_{i−1})` rather than the limit.
    pub window_edge: bool,
}

/// `‖δ_{x_i}‖²` for the min kernel at 0-based position `i`, with the
/// virtual left neighbor `x_{-1} = 0`.
pub fn oracle_min_delta_norm_sq(points: &[f64], i: usize) -> DeltaNormOracle {
    let left = if i == 0 { 0.0 } else { points[i - 1] };
    let x = points[i];
    match points.get(i + 1) {
        Some(&right) => DeltaNormOracle {
            value: (right - left) / ((x - left) * (right - x)),
            window_edge: false,
        },
        None => DeltaNormOracle {
            value: 1.0 / (x - left),
            window_edge: true,
        },
    }
}

/// `‖δ_{x_i}‖²` for the bridge kernel, with virtual neighbors `0` and `1`.
/// Exact on every finite window.
pub fn oracle_bridge_delta_norm_sq(points: &[f64], i: usize) -> f64 {
    let left = if i == 0 { 0.0 } else { points[i - 1] };
    let right = points.get(i + 1).copied().unwrap_or(1.0);
    let x = points[i];
    (right - left) / ((right - x) * (x - left))
}

/// The lower-triangular Pascal matrix `L[x][y] = C(x, y)` on `0..=n`.
pub fn pascal_lower(n: usize) -> Result<Vec<Vec<i128>>> {
    pascal_signed(n, false)
}

/// Its inverse, `(−1)^{x−y} C(x, y)`.
pub fn pascal_inverse(n: usize) -> Result<Vec<Vec<i128>>> {
    pascal_signed(n, true)
}

fn pascal_signed(n: usize, alternate: bool) -> Result<Vec<Vec<i128>>> {
    let t = pascal_table();
    if n >= t.len() {
        return Err(Error::IntegerOverflow { n });
    }
    Ok((0..=n)
        .map(|x| {
            (0..=n)
                .map(|y| {
                    if y > x {
                        0
                    } else {
                        let c = t[x][y] as i128;
                        if alternate && (x - y) % 2 == 1 {
                            -c
                        } else {
                            c
                        }
                    }
                })
                .collect()
        })
        .collect())
}

/// Checked integer matrix product.
pub fn int_matmul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Result<Vec<Vec<i128>>> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![0i128; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc: i128 = 0;
            for k in 0..b.len() {
                let p = a[i][k]
                    .checked_mul(b[k][j])
                    .ok_or(Error::IntegerOverflow { n })?;
                acc = acc.checked_add(p).ok_or(Error::IntegerOverflow { n })?;
            }
            out[i][j] = acc;
        }
    }
    Ok(out)
}

pub fn int_transpose(a: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

/// Upper bound on `n` for [`oracle_binomial_gram_inverse`].
pub const BINOMIAL_INVERSE_MAX: usize = 30;

/// `K_n⁻¹ = (Lᵗ)⁻¹ L⁻¹` for the binomial Gram matrix on `{0, …, n}`, exact.
pub fn oracle_binomial_gram_inverse(n: usize) -> Result<Vec<Vec<i128>>> {
    if n > BINOMIAL_INVERSE_MAX {
        return Err(Error::IntegerOverflow { n });
    }
    let inv = pascal_inverse(n)?;
    int_matmul(&int_transpose(&inv), &inv)
}

/// `Σ_{k=x}^{n} C(k, x)²`, exact.
pub fn binomial_partial_sum(x: usize, n: usize) -> Result<u128> {
    let t = pascal_table();
    if n >= t.len() {
        return Err(Error::IntegerOverflow { n });
    }
    (x..=n).try_fold(0u128, |acc, k| {
        let c = t[k][x];
        c.checked_mul(c)
            .and_then(|sq| acc.checked_add(sq))
            .ok_or(Error::IntegerOverflow { n })
    })
}

/// `ψ(t) = sin t / t`.
pub fn psi(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        t.sin() / t
    }
}

/// `ψ′(t) = (t cos t − sin t) / t²`, with `ψ′(0) = 0`. Uses a Taylor
/// expansion near zero where the closed form cancels.
pub fn psi_prime(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        let t2 = t * t;
        return -t / 3.0 + t * t2 / 30.0 - t * t2 * t2 / 840.0;
    }
    (t * t.cos() - t.sin()) / (t * t)
}

/// Truncated infinite product `∏_{n=1}^{terms} cos(t / 2ⁿ)`.
pub fn psi_product(t: f64, terms: u32) -> f64 {
    (1..=terms).map(|n| (t / 2f64.powi(n as i32)).cos()).product()
}

/// Composite Simpson rule on `[a, b]` with step close to `h`.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, h: f64) -> f64 {
    let mut m = ((b - a) / h).ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let m = m.max(2);
    let step = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * step);
    }
    acc * step / 3.0
}

/// Result of [`sinc_gap_check`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SincGapReport {
    /// `∫₀ᵀ |ψ′|²`.
    pub head: f64,
    /// `∫_T^{2T} |ψ′|²`.
    pub tail: f64,
    /// `max |ψ(nπ)|` over `1 ≤ n`, `nπ ≤ T`.
    pub max_zero_residual: f64,
    /// `max |ψ(t) − ∏ cos(t/2ⁿ)|` over the zero grid.
    pub max_product_residual: f64,
}

/// Quadrature of `|ψ′|²` on `[0, T]` and `[T, 2T]` plus the zero set of `ψ`.
pub fn sinc_gap_check(horizon: f64, h: f64) -> SincGapReport {
    let integrand = |t: f64| psi_prime(t).powi(2);
    let head = simpson(integrand, 0.0, horizon, h);
    let tail = simpson(integrand, horizon, 2.0 * horizon, h);
    let mut max_zero_residual: f64 = 0.0;
    let mut max_product_residual: f64 = 0.0;
    let mut n = 1;
    while n as f64 * std::f64::consts::PI <= horizon {
        let t = n as f64 * std::f64::consts::PI;
        max_zero_residual = max_zero_residual.max(psi(t).abs());
        max_product_residual = max_product_residual.max((psi(t) - psi_product(t, 60)).abs());
        n += 1;
    }
    SincGapReport {
        head,
        tail,
        max_zero_residual,
        max_product_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_det_examples() {
        assert_eq!(oracle_min_det(&[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(oracle_min_det(&[0.5]), 0.5f64.ln());
        assert!((oracle_min_det(&[1.0, 1.5, 4.0]) - 1.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn min_delta_norm_examples() {
        let ints: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(oracle_min_delta_norm_sq(&ints, 0).value, 2.0);
        let sparse: Vec<f64> = (1..=8).map(|i| (i * (i - 1) / 2) as f64).collect();
        let v = oracle_min_delta_norm_sq(&sparse, 3).value;
        assert!((v - 7.0 / 12.0).abs() < 1e-15);
        let h = 0.25;
        let uni: Vec<f64> = (1..=6).map(|i| i as f64 * h).collect();
        assert!((oracle_min_delta_norm_sq(&uni, 3).value - 2.0 / h).abs() < 1e-12);
        let edge = oracle_min_delta_norm_sq(&[1.0, 2.0], 1);
        assert!(edge.window_edge);
        assert_eq!(edge.value, 1.0);
    }

    #[test]
    fn bridge_examples() {
        let pts = [0.25, 0.5, 0.75];
        assert!((oracle_bridge_det(&pts) - 0.25f64.powi(4).ln()).abs() < 1e-14);
        assert!((oracle_bridge_det(&[0.5]) - 0.25f64.ln()).abs() < 1e-15);
        assert_eq!(oracle_bridge_delta_norm_sq(&pts, 1), 8.0);
        let mut prev = f64::INFINITY;
        for k in 1..10 {
            let d = oracle_bridge_det(&[0.5, 1.0 - 0.5f64.powi(k + 1)]);
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn pascal_examples() {
        let l = pascal_lower(3).unwrap();
        assert_eq!(l[3], vec![1, 3, 3, 1]);
        assert_eq!(pascal_inverse(3).unwrap()[2][1], -2);
        let n = 10;
        let prod = int_matmul(&pascal_lower(n).unwrap(), &pascal_inverse(n).unwrap()).unwrap();
        for (i, row) in prod.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, i128::from(i == j));
            }
        }
    }

    #[test]
    fn binomial_inverse_examples() {
        let inv = oracle_binomial_gram_inverse(3).unwrap();
        assert_eq!(inv[1][1], 14);
        for n in 0..12 {
            assert_eq!(oracle_binomial_gram_inverse(n).unwrap()[n][n], 1);
        }
        assert_eq!(binomial_partial_sum(1, 4).unwrap(), 30);
        assert!(oracle_binomial_gram_inverse(31).is_err());
    }

    #[test]
    fn psi_checks() {
        let r = sinc_gap_check(100.0, 0.01);
        assert!(r.head > 0.0 && r.head.is_finite());
        assert!(r.max_zero_residual < 1e-12);
        assert!(r.max_product_residual < 1e-12);
        let r2 = sinc_gap_check(200.0, 0.01);
        assert!(r2.tail < r.tail);
        // ψ′ near zero agrees with the closed form just outside the cutoff
        let t: f64 = 1.2e-3;
        let closed = (t * t.cos() - t.sin()) / (t * t);
        assert!((psi_prime(t) - closed).abs() < 1e-9);
    }
}
