//! Built-in kernels: Brownian motion, Brownian bridge, binomial, sinc, and
//! an explicit matrix.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point_config::{Kernel, Point};

/// Largest point accepted by the binomial kernel. `k(x, y) = C(x + y, x)`
/// must stay exact in `u128`.
pub const BINOMIAL_MAX_POINT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinKernelId {
    Min,
    Bridge,
    Binomial,
    Sinc,
    #[serde(rename = "matrix")]
    MatrixBacked,
}

impl BuiltinKernelId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Min => "min",
            Self::Bridge => "bridge",
            Self::Binomial => "binomial",
            Self::Sinc => "sinc",
            Self::MatrixBacked => "matrix",
        }
    }
}

impl FromStr for BuiltinKernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Self::Min),
            "bridge" => Ok(Self::Bridge),
            "binomial" => Ok(Self::Binomial),
            "sinc" => Ok(Self::Sinc),
            "matrix" => Ok(Self::MatrixBacked),
            other => Err(Error::KernelSpec(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Instantiates a closed-form kernel. Matrix kernels need their data and are
/// built with [`MatrixKernel::new`].
pub fn make_kernel(id: BuiltinKernelId) -> Result<Box<dyn Kernel>> {
    match id {
        BuiltinKernelId::Min => Ok(Box::new(MinKernel)),
        BuiltinKernelId::Bridge => Ok(Box::new(BridgeKernel)),
        BuiltinKernelId::Binomial => Ok(Box::new(BinomialKernel)),
        BuiltinKernelId::Sinc => Ok(Box::new(SincKernel)),
        BuiltinKernelId::MatrixBacked => Err(Error::KernelSpec(
            "matrix kernel requires explicit entries".into(),
        )),
    }
}

fn real_point(kernel: &str, index: usize, x: Point) -> Result<f64> {
    x.as_real().ok_or_else(|| Error::DomainViolation {
        kernel: kernel.into(),
        index,
        reason: "expected a scalar point".into(),
    })
}

fn check_increasing(kernel: &str, points: &[Point]) -> Result<()> {
    for i in 1..points.len() {
        let (a, b) = (points[i - 1].as_real(), points[i].as_real());
        if let (Some(a), Some(b)) = (a, b) {
            if a >= b {
                return Err(Error::DomainViolation {
                    kernel: kernel.into(),
                    index: i,
                    reason: "points must be strictly increasing".into(),
                });
            }
        }
    }
    Ok(())
}

/// `k(s, t) = s ∧ t`, the Brownian motion covariance on `(0, ∞)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinKernel;

impl Kernel for MinKernel {
    fn name(&self) -> &str {
        "min"
    }

    fn eval(&self, x: Point, y: Point) -> f64 {
        let (s, t) = (x.as_real().unwrap_or(f64::NAN), y.as_real().unwrap_or(f64::NAN));
        s.min(t)
    }

    fn check_point(&self, index: usize, x: Point) -> Result<()> {
        let v = real_point("min", index, x)?;
        if v > 0.0 {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                kernel: "min".into(),
                index,
                reason: format!("{v} is not in (0, ∞)"),
            })
        }
    }

    fn check_points(&self, points: &[Point]) -> Result<()> {
        for (i, &p) in points.iter().enumerate() {
            self.check_point(i, p)?;
        }
        check_increasing("min", points)
    }

    fn strict(&self) -> Option<bool> {
        Some(true)
    }
}

/// `k(s, t) = s ∧ t − s t`, the Brownian bridge covariance on `(0, 1)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BridgeKernel;

impl Kernel for BridgeKernel {
    fn name(&self) -> &str {
        "bridge"
    }

    fn eval(&self, x: Point, y: Point) -> f64 {
        let (s, t) = (x.as_real().unwrap_or(f64::NAN), y.as_real().unwrap_or(f64::NAN));
        s.min(t) - s * t
    }

    fn check_point(&self, index: usize, x: Point) -> Result<()> {
        let v = real_point("bridge", index, x)?;
        if v > 0.0 && v < 1.0 {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                kernel: "bridge".into(),
                index,
                reason: format!("{v} is not in (0, 1)"),
            })
        }
    }

    fn check_points(&self, points: &[Point]) -> Result<()> {
        for (i, &p) in points.iter().enumerate() {
            self.check_point(i, p)?;
        }
        check_increasing("bridge", points)
    }

    fn strict(&self) -> Option<bool> {
        Some(true)
    }
}

/// Pascal triangle rows `0..=2·BINOMIAL_MAX_POINT` in `u128`, built by the
/// additive recurrence.
pub fn pascal_table() -> &'static [Vec<u128>] {
    static TABLE: OnceLock<Vec<Vec<u128>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let rows = 2 * BINOMIAL_MAX_POINT + 1;
        let mut t: Vec<Vec<u128>> = Vec::with_capacity(rows);
        for n in 0..rows {
            let mut row = vec![1u128; n + 1];
            for k in 1..n {
                row[k] = t[n - 1][k - 1] + t[n - 1][k];
            }
            t.push(row);
        }
        t
    })
}

/// `Σ_{n=0}^{x∧y} C(x, n) C(y, n)` exactly, for points up to
/// [`BINOMIAL_MAX_POINT`].
pub fn binomial_kernel_exact(x: usize, y: usize) -> Result<u128> {
    if x > BINOMIAL_MAX_POINT || y > BINOMIAL_MAX_POINT {
        return Err(Error::IntegerOverflow { n: x.max(y) });
    }
    let t = pascal_table();
    let mut acc: u128 = 0;
    for n in 0..=x.min(y) {
        let term = t[x][n]
            .checked_mul(t[y][n])
            .ok_or(Error::IntegerOverflow { n: x.max(y) })?;
        acc = acc
            .checked_add(term)
            .ok_or(Error::IntegerOverflow { n: x.max(y) })?;
    }
    Ok(acc)
}

/// `k(x, y) = Σ_n C(x, n) C(y, n)` on the nonnegative integers.
#[derive(Clone, Copy, Debug, Default)]
pub struct BinomialKernel;

fn as_small_integer(v: f64) -> Option<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v <= BINOMIAL_MAX_POINT as f64 {
        Some(v as usize)
    } else {
        None
    }
}

impl Kernel for BinomialKernel {
    fn name(&self) -> &str {
        "binomial"
    }

    fn eval(&self, x: Point, y: Point) -> f64 {
        let to_int = |p: Point| match p {
            Point::Real(v) => as_small_integer(v),
            Point::Label(l) => Some(l),
        };
        match (to_int(x), to_int(y)) {
            (Some(a), Some(b)) => binomial_kernel_exact(a, b).map_or(f64::NAN, |v| v as f64),
            _ => f64::NAN,
        }
    }

    fn check_point(&self, index: usize, x: Point) -> Result<()> {
        let ok = match x {
            Point::Real(v) => as_small_integer(v).is_some(),
            Point::Label(l) => l <= BINOMIAL_MAX_POINT,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                kernel: "binomial".into(),
                index,
                reason: format!(
                    "{x} is not an integer in [0, {BINOMIAL_MAX_POINT}]"
                ),
            })
        }
    }

    fn strict(&self) -> Option<bool> {
        Some(true)
    }
}

/// `sin πt / (πt)` with exact zeros at nonzero integers and `1` at `t = 0`.
pub fn sinc_pi(t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if t.fract() == 0.0 {
        return 0.0;
    }
    // reduce modulo 2 so the argument of sin stays in [-π, π]
    let r = t - 2.0 * (t / 2.0).round();
    (PI * r).sin() / (PI * t)
}

/// `k(x, y) = sin π(x − y) / (π(x − y))`, the band-limited kernel.
#[derive(Clone, Copy, Debug, Default)]
pub struct SincKernel;

impl Kernel for SincKernel {
    fn name(&self) -> &str {
        "sinc"
    }

    fn eval(&self, x: Point, y: Point) -> f64 {
        let (s, t) = (x.as_real().unwrap_or(f64::NAN), y.as_real().unwrap_or(f64::NAN));
        let d = s - t;
        // sinc is even, so symmetry only needs |d|
        sinc_pi(d.abs())
    }

    fn check_point(&self, index: usize, x: Point) -> Result<()> {
        real_point("sinc", index, x).map(|_| ())
    }

    fn strict(&self) -> Option<bool> {
        Some(true)
    }
}

/// A kernel given by an explicit symmetric matrix on labels `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixKernel {
    entries: Vec<Vec<f64>>,
}

impl MatrixKernel {
    /// Validates squareness and exact symmetry.
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = entries.len();
        for row in &entries {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::AsymmetricMatrix { row: i, col: j });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }
}

impl Kernel for MatrixKernel {
    fn name(&self) -> &str {
        "matrix"
    }

    fn eval(&self, x: Point, y: Point) -> f64 {
        match (x.as_label(), y.as_label()) {
            (Some(i), Some(j)) if i < self.dim() && j < self.dim() => self.entries[i][j],
            _ => f64::NAN,
        }
    }

    fn check_point(&self, index: usize, x: Point) -> Result<()> {
        match x.as_label() {
            Some(l) if l < self.dim() => Ok(()),
            _ => Err(Error::DomainViolation {
                kernel: "matrix".into(),
                index,
                reason: format!("{x} is not a label in 0..{}", self.dim()),
            }),
        }
    }
}
