//! Point sets, kernels and Gram-matrix assembly.
//!
//! A [`PointConfiguration`] fixes the filtration order: `F_n` is always the
//! first `n` points. Kernels never see anything but pairs of [`Point`]s.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A point of the underlying countable set.
///
/// Scalar points are exact `f64` values. Labels are opaque indices; kernels
/// defined on labels receive the index itself.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Point {
    Real(f64),
    Label(usize),
}

impl Point {
    pub fn as_real(self) -> Option<f64> {
        match self {
            Point::Real(x) => Some(x),
            Point::Label(_) => None,
        }
    }

    pub fn as_label(self) -> Option<usize> {
        match self {
            Point::Label(l) => Some(l),
            Point::Real(_) => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(x) => write!(f, "{x}"),
            Point::Label(l) => write!(f, "#{l}"),
        }
    }
}

/// An ordered, duplicate-free sequence of points.
///
/// Duplicates are detected with exact equality. Near-duplicates are accepted
/// and will show up as ill-conditioned Gram matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfiguration {
    points: Vec<Point>,
    ordered: bool,
}

impl PointConfiguration {
    /// Builds a configuration, rejecting duplicates and, when `ordered` is
    /// set, any scalar sequence that is not strictly increasing.
    pub fn new(points: Vec<Point>, ordered: bool) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        let all_real = points.iter().all(|p| matches!(p, Point::Real(_)));
        let all_label = points.iter().all(|p| matches!(p, Point::Label(_)));
        if !all_real && !all_label {
            return Err(Error::KernelSpec(
                "scalar points and labels cannot be mixed".into(),
            ));
        }
        if all_real {
            if let Some(i) = points.iter().position(|p| !p.as_real().unwrap().is_finite()) {
                return Err(Error::DomainViolation {
                    kernel: "config".into(),
                    index: i,
                    reason: "point is not finite".into(),
                });
            }
        }

        if ordered && all_real {
            for i in 1..points.len() {
                let (a, b) = (points[i - 1].as_real().unwrap(), points[i].as_real().unwrap());
                if a == b {
                    return Err(Error::DuplicatePoint { first: i - 1, second: i });
                }
                if a > b {
                    return Err(Error::NotIncreasing { index: i });
                }
            }
        } else {
            check_duplicates(&points)?;
        }

        Ok(Self { points, ordered })
    }

    pub fn from_reals(xs: &[f64], ordered: bool) -> Result<Self> {
        Self::new(xs.iter().copied().map(Point::Real).collect(), ordered)
    }

    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        Self::new(labels.iter().copied().map(Point::Label).collect(), false)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    /// Position of `p` in the filtration order.
    pub fn index_of(&self, p: Point) -> Option<usize> {
        self.points.iter().position(|&q| q == p)
    }

    /// The configuration restricted to the given positions, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut pts = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange { index: i, dim: self.len() });
            }
            pts.push(self.points[i]);
        }
        let ordered = self.ordered && indices.windows(2).all(|w| w[0] < w[1]);
        Self::new(pts, ordered)
    }
}

fn check_duplicates(points: &[Point]) -> Result<()> {
    let mut keyed: Vec<(usize, Point)> = points.iter().copied().enumerate().collect();
    keyed.sort_by(|a, b| match (a.1, b.1) {
        (Point::Real(x), Point::Real(y)) => x.partial_cmp(&y).unwrap(),
        (Point::Label(x), Point::Label(y)) => x.cmp(&y),
        _ => unreachable!("mixed kinds rejected earlier"),
    });
    for w in keyed.windows(2) {
        if w[0].1 == w[1].1 {
            let (first, second) = (w[0].0.min(w[1].0), w[0].0.max(w[1].0));
            return Err(Error::DuplicatePoint { first, second });
        }
    }
    Ok(())
}

/// `build_config` in free-function form.
pub fn build_config(points: Vec<Point>, ordered: bool) -> Result<PointConfiguration> {
    PointConfiguration::new(points, ordered)
}

/// A symmetric real kernel on pairs of points.
///
/// Evaluators must be pure. Positive definiteness is never assumed; it is
/// checked by [`validate_pd`] or by the factorization.
pub trait Kernel: Send + Sync {
    fn name(&self) -> &str;

    fn eval(&self, x: Point, y: Point) -> f64;

    /// Domain check for a single point, reported with its position.
    fn check_point(&self, _index: usize, _x: Point) -> Result<()> {
        Ok(())
    }

    /// Domain check for a whole configuration prefix.
    fn check_points(&self, points: &[Point]) -> Result<()> {
        points
            .iter()
            .enumerate()
            .try_for_each(|(i, &p)| self.check_point(i, p))
    }

    /// Optional claim that every finite Gram matrix is nonsingular.
    fn strict(&self) -> Option<bool> {
        None
    }
}

impl<K: Kernel + ?Sized> Kernel for Box<K> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn eval(&self, x: Point, y: Point) -> f64 {
        (**self).eval(x, y)
    }
    fn check_point(&self, index: usize, x: Point) -> Result<()> {
        (**self).check_point(index, x)
    }
    fn check_points(&self, points: &[Point]) -> Result<()> {
        (**self).check_points(points)
    }
    fn strict(&self) -> Option<bool> {
        (**self).strict()
    }
}

/// `K_{F_n}`: a dense symmetric Gram matrix together with the points it was
/// built from.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    points: Vec<Point>,
}

impl GramMatrix {
    /// Wraps an explicit matrix. Rejects non-square or asymmetric input.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..i {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::AsymmetricMatrix { row: i, col: j });
                }
            }
        }
        Ok(Self {
            entries,
            points: (0..n).map(Point::Label).collect(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn max_diagonal(&self) -> f64 {
        self.entries.diagonal().iter().copied().fold(0.0, f64::max)
    }

    /// Leading principal `m × m` block.
    pub fn leading(&self, m: usize) -> GramMatrix {
        GramMatrix {
            entries: self.entries.view((0, 0), (m, m)).into_owned(),
            points: self.points[..m].to_vec(),
        }
    }

    /// `ξᵗ K ξ`.
    pub fn quadratic_form(&self, xi: &[f64]) -> f64 {
        let n = self.dim();
        assert_eq!(xi.len(), n, "coefficient length must match the Gram dimension");
        let mut total = 0.0;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| self.entries[(i, j)] * xi[j]).sum();
            total += xi[i] * row;
        }
        total
    }

    /// `K v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(v.len(), n, "vector length must match the Gram dimension");
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[(i, j)] * v[j]).sum())
            .collect()
    }
}

/// Assembles `K_{F_n}` for the first `n` points of `config`.
///
/// Only the upper triangle is evaluated; the lower triangle is mirrored so
/// the result is exactly symmetric.
pub fn assemble_gram(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    n: usize,
) -> Result<GramMatrix> {
    if n > config.len() {
        return Err(Error::SizeOutOfRange {
            requested: n,
            available: config.len(),
        });
    }
    let points = &config.points()[..n];
    kernel.check_points(points)?;
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(points[i], points[j]);
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(GramMatrix {
        entries,
        points: points.to_vec(),
    })
}

/// `(k(x_0, x_m), …, k(x_{m-1}, x_m))` and `k(x_m, x_m)`: the bordering data
/// for growing `F_m` to `F_{m+1}`.
pub fn kernel_border(
    kernel: &dyn Kernel,
    config: &PointConfiguration,
    m: usize,
    column: &mut Vec<f64>,
) -> f64 {
    let pts = config.points();
    let x = pts[m];
    column.clear();
    column.extend(pts[..m].iter().map(|&y| kernel.eval(y, x)));
    kernel.eval(x, x)
}

/// Outcome of [`validate_pd`]. Pivot positions are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdVerdict {
    StrictlyPositive,
    Degenerate { rank: usize },
    Indefinite { pivot: usize },
}

/// Classifies a symmetric Gram matrix by running an LDLᵗ factorization that
/// tolerates zero pivots.
///
/// A pivot counts as zero when `|d| ≤ eps_pd · max_diag`. A zero pivot whose
/// column still carries Schur-complement mass marks the matrix indefinite.
pub fn validate_pd(gram: &GramMatrix, eps_pd: f64) -> PdVerdict {
    let n = gram.dim();
    let a = gram.entries();
    let max_diag = gram.max_diagonal();
    let tol = eps_pd * max_diag;
    // off-diagonal Schur mass allowed next to a zero pivot: |s_ij|² ≤ s_ii s_jj
    let off_tol = eps_pd.sqrt() * max_diag;

    let mut l = vec![vec![0.0; n]; n];
    let mut d = vec![0.0; n];
    let mut zero = vec![false; n];
    let mut rank = 0;
    let mut degenerate = false;
    for i in 0..n {
        let mut y = vec![0.0; i];
        for j in 0..i {
            let s: f64 = (0..j).map(|k| l[j][k] * y[k]).sum();
            y[j] = a[(i, j)] - s;
        }
        for j in 0..i {
            if zero[j] {
                if y[j].abs() > off_tol {
                    return PdVerdict::Indefinite { pivot: i + 1 };
                }
                l[i][j] = 0.0;
            } else {
                l[i][j] = y[j] / d[j];
            }
        }
        let s: f64 = (0..i).filter(|&j| !zero[j]).map(|j| y[j] * l[i][j]).sum();
        let piv = a[(i, i)] - s;
        if piv < -tol {
            return PdVerdict::Indefinite { pivot: i + 1 };
        }
        if piv <= tol {
            zero[i] = true;
            degenerate = true;
        } else {
            rank += 1;
        }
        d[i] = piv;
    }
    if degenerate || (n > 0 && max_diag <= 0.0) {
        PdVerdict::Degenerate { rank }
    } else {
        PdVerdict::StrictlyPositive
    }
}
