//! Energy Hilbert spaces of finite weighted graphs.
//!
//! Infinite networks are handled through user-supplied finite truncations.
//! Dipoles and the Green's function come from the Laplacian grounded at the
//! base point, which is positive definite on a connected graph.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{GramFactorization, DEFAULT_EPS_PD};
use crate::point_config::{Kernel, Point, PointConfiguration};

/// One line `u v c` of an edge list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub conductance: f64,
}

/// Parses whitespace-separated `u v c` lines; `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<Vec<EdgeRecord>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected `u v c`, found {} fields", fields.len()),
            });
        }
        let conductance: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("invalid conductance `{}`", fields[2]),
        })?;
        out.push(EdgeRecord {
            u: fields[0].to_string(),
            v: fields[1].to_string(),
            conductance,
        });
    }
    Ok(out)
}

/// A connected graph with symmetric positive conductances and a base point.
#[derive(Clone, Debug)]
pub struct NetworkGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    /// Neighbor lists sorted by vertex index.
    adj: Vec<Vec<(usize, f64)>>,
    /// Edges `(u, v, c)` with `u < v`, sorted.
    edges: Vec<(usize, usize, f64)>,
    degree: Vec<f64>,
    base: usize,
}

/// Validates an edge list and builds the graph. Repeated edges between the
/// same pair are merged by adding their conductances.
pub fn load_network(edges: &[EdgeRecord], base: &str) -> Result<NetworkGraph> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut intern = |s: &str| -> usize {
        if let Some(&i) = index.get(s) {
            return i;
        }
        labels.push(s.to_string());
        index.insert(s.to_string(), labels.len() - 1);
        labels.len() - 1
    };
    let mut indexed = Vec::with_capacity(edges.len());
    for e in edges {
        if e.u == e.v {
            return Err(Error::SelfLoop { vertex: e.u.clone() });
        }
        if !(e.conductance > 0.0) || !e.conductance.is_finite() {
            return Err(Error::NonpositiveConductance {
                u: e.u.clone(),
                v: e.v.clone(),
                value: e.conductance,
            });
        }
        let (u, v) = (intern(&e.u), intern(&e.v));
        indexed.push((u, v, e.conductance));
    }
    let base_idx = *index
        .get(base)
        .ok_or_else(|| Error::UnknownVertex(base.to_string()))?;
    NetworkGraph::build(labels, index, &indexed, base_idx)
}

impl NetworkGraph {
    /// Builds a graph on vertices `0..n` labelled by their index.
    pub fn from_indexed_edges(n: usize, edges: &[(usize, usize, f64)], base: usize) -> Result<Self> {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let index = labels.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        for &(u, v, c) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownVertex(u.max(v).to_string()));
            }
            if u == v {
                return Err(Error::SelfLoop { vertex: u.to_string() });
            }
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::NonpositiveConductance {
                    u: u.to_string(),
                    v: v.to_string(),
                    value: c,
                });
            }
        }
        if base >= n {
            return Err(Error::UnknownVertex(base.to_string()));
        }
        Self::build(labels, index, edges, base)
    }

    /// The path `0 − 1 − ⋯ − n` with constant conductance, based at `0`.
    pub fn path(n: usize, conductance: f64) -> Result<Self> {
        let edges: Vec<_> = (0..n).map(|i| (i, i + 1, conductance)).collect();
        Self::from_indexed_edges(n + 1, &edges, 0)
    }

    /// A random connected graph on `0..n` based at `0`: a random recursive
    /// tree plus `extra` random chords, conductances uniform in `[lo, hi]`.
    pub fn random_connected(n: usize, extra: usize, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::with_capacity(n + extra);
        for v in 1..n {
            edges.push((rng.gen_range(0..v), v, rng.gen_range(lo..=hi)));
        }
        if n > 1 {
            for _ in 0..extra {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v {
                    edges.push((u, v, rng.gen_range(lo..=hi)));
                }
            }
        }
        Self::from_indexed_edges(n, &edges, 0)
    }

    fn build(
        labels: Vec<String>,
        index: HashMap<String, usize>,
        indexed: &[(usize, usize, f64)],
        base: usize,
    ) -> Result<Self> {
        let n = labels.len();
        let mut merged: HashMap<(usize, usize), f64> = HashMap::new();
        for &(u, v, c) in indexed {
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += c;
        }
        let mut edges: Vec<(usize, usize, f64)> =
            merged.into_iter().map(|((u, v), c)| (u, v, c)).collect();
        edges.sort_by_key(|e| (e.0, e.1));
        let mut adj = vec![Vec::new(); n];
        for &(u, v, c) in &edges {
            adj[u].push((v, c));
            adj[v].push((u, c));
        }
        for list in &mut adj {
            list.sort_by_key(|&(w, _)| w);
        }
        let degree = adj
            .iter()
            .map(|l| l.iter().fold(0.0, |acc, &(_, c)| acc + c))
            .collect();

        let graph = Self { labels, index, adj, edges, degree, base };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.base]);
        seen[self.base] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(Error::Disconnected { vertex: self.labels[i].clone() }),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn vertex(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// `c(x) = Σ_{y∼x} c_xy`.
    pub fn degree(&self, v: usize) -> f64 {
        self.degree[v]
    }

    pub fn conductance(&self, x: usize, y: usize) -> Option<f64> {
        self.adj[x]
            .binary_search_by_key(&y, |&(w, _)| w)
            .ok()
            .map(|i| self.adj[x][i].1)
    }

    /// Vertices other than the base point, in index order.
    pub fn non_base_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| v != self.base).collect()
    }

    /// The non-base vertices as a label configuration for [`EnergyKernel`].
    pub fn non_base_config(&self) -> PointConfiguration {
        PointConfiguration::from_labels(&self.non_base_vertices())
            .expect("a connected graph with an edge has a non-base vertex")
    }

    pub fn indicator(&self, v: usize) -> VertexFunction {
        let mut f = VertexFunction::zeros(self.len());
        f.0[v] = 1.0;
        f
    }
}

/// A real function on the vertices of the working graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexFunction(pub Vec<f64>);

impl VertexFunction {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// `(Δ_c f)(x) = Σ_{y∼x} c_xy (f(x) − f(y))`.
pub fn laplacian_apply(graph: &NetworkGraph, f: &VertexFunction) -> VertexFunction {
    let f = f.values();
    VertexFunction(
        (0..graph.len())
            .map(|x| {
                graph
                    .neighbors(x)
                    .iter()
                    .fold(0.0, |acc, &(y, c)| acc + c * (f[x] - f[y]))
            })
            .collect(),
    )
}

/// `½ Σ_x Σ_y c_xy (f(x) − f(y)) (g(x) − g(y))`, summed once per edge.
pub fn energy_inner(graph: &NetworkGraph, f: &VertexFunction, g: &VertexFunction) -> f64 {
    let (f, g) = (f.values(), g.values());
    graph
        .edges()
        .iter()
        .fold(0.0, |acc, &(u, v, c)| acc + c * (f[u] - f[v]) * (g[u] - g[v]))
}

/// `⟨δ_x, δ_y⟩_E` in closed form: `c(x)`, `−c_xy`, or `0`.
pub fn delta_inner_energy(graph: &NetworkGraph, x: usize, y: usize) -> f64 {
    if x == y {
        graph.degree(x)
    } else {
        graph.conductance(x, y).map_or(0.0, |c| -c)
    }
}

/// The Laplacian with the base row and column removed, factorized once and
/// shared by every dipole solve.
#[derive(Clone, Debug)]
pub struct GroundedLaplacian {
    fact: GramFactorization,
    /// Position of each vertex in the grounded system; `None` at the base.
    slot: Vec<Option<usize>>,
    vertices: Vec<usize>,
}

impl GroundedLaplacian {
    pub fn new(graph: &NetworkGraph) -> Result<Self> {
        let vertices = graph.non_base_vertices();
        let mut slot = vec![None; graph.len()];
        for (i, &v) in vertices.iter().enumerate() {
            slot[v] = Some(i);
        }
        let m = vertices.len();
        let mut a = DMatrix::zeros(m, m);
        for (i, &v) in vertices.iter().enumerate() {
            a[(i, i)] = graph.degree(v);
            for &(w, c) in graph.neighbors(v) {
                if let Some(j) = slot[w] {
                    a[(i, j)] = -c;
                }
            }
        }
        let fact = GramFactorization::factorize_matrix(&a, DEFAULT_EPS_PD)?;
        Ok(Self { fact, slot, vertices })
    }

    /// Solves `Δ v = rhs` on the non-base vertices with `v(o) = 0`.
    pub fn solve(&self, rhs: &VertexFunction) -> Result<VertexFunction> {
        let b: Vec<f64> = self.vertices.iter().map(|&v| rhs.0[v]).collect();
        let sol = self.fact.solve(&b)?;
        let mut out = VertexFunction::zeros(self.slot.len());
        for (&v, s) in self.vertices.iter().zip(sol) {
            out.0[v] = s;
        }
        Ok(out)
    }

    /// The dipole `v_xy` grounded at the base point.
    pub fn dipole(&self, x: usize, y: usize) -> Result<VertexFunction> {
        let mut rhs = VertexFunction::zeros(self.slot.len());
        rhs.0[x] += 1.0;
        rhs.0[y] -= 1.0;
        self.solve(&rhs)
    }
}

/// `v_xy` with `Δ_c v = δ_x − δ_y` and `v(o) = 0`; it satisfies
/// `⟨v_xy, f⟩_E = f(x) − f(y)`.
pub fn dipole(graph: &NetworkGraph, x: usize, y: usize) -> Result<VertexFunction> {
    if x >= graph.len() || y >= graph.len() {
        return Err(Error::UnknownVertex(x.max(y).to_string()));
    }
    GroundedLaplacian::new(graph)?.dipole(x, y)
}

/// `k(x, y) = ⟨v_x, v_y⟩_E` with `v_x = v_{x,o}`: the inverse of the
/// grounded Laplacian, evaluated on vertex labels.
#[derive(Clone, Debug)]
pub struct EnergyKernel {
    green: DMatrix<f64>,
    base: usize,
}

impl EnergyKernel {
    pub fn green(&self) -> &DMatrix<f64> {
        &self.green
    }
}

impl Kernel for EnergyKernel {
    fn name(&self) -> &str {
        "energy"
    }

    fn eval(&self, x: Point, y: Point) -> f64 {
        match (x.as_label(), y.as_label()) {
            (Some(i), Some(j)) if i < self.green.nrows() && j < self.green.nrows() => {
                self.green[(i, j)]
            }
            _ => f64::NAN,
        }
    }

    fn check_point(&self, index: usize, x: Point) -> Result<()> {
        match x.as_label() {
            Some(l) if l < self.green.nrows() && l != self.base => Ok(()),
            _ => Err(Error::DomainViolation {
                kernel: "energy".into(),
                index,
                reason: format!("{x} is not a non-base vertex"),
            }),
        }
    }

    fn strict(&self) -> Option<bool> {
        Some(true)
    }
}

pub fn energy_kernel(graph: &NetworkGraph) -> Result<EnergyKernel> {
    let grounded = GroundedLaplacian::new(graph)?;
    let n = graph.len();
    let mut green = DMatrix::zeros(n, n);
    for x in graph.non_base_vertices() {
        let v = grounded.solve(&graph.indicator(x))?;
        for (y, val) in v.0.into_iter().enumerate() {
            green[(y, x)] = val;
        }
    }
    // exact symmetry for the kernel contract
    let sym = (&green + green.transpose()) * 0.5;
    Ok(EnergyKernel { green: sym, base: graph.base })
}

/// `max_{x,y ≠ o} |(Δ_c k_x)(y) − δ_{xy}|`.
pub fn greens_identity_residual(graph: &NetworkGraph, kernel: &EnergyKernel) -> f64 {
    let mut worst: f64 = 0.0;
    for x in graph.non_base_vertices() {
        let kx = VertexFunction(kernel.green.column(x).iter().copied().collect());
        let lap = laplacian_apply(graph, &kx);
        for y in graph.non_base_vertices() {
            let want = if x == y { 1.0 } else { 0.0 };
            worst = worst.max((lap.0[y] - want).abs());
        }
    }
    worst
}

/// Closed-form moments of `μ_x^{(A)}` on a network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkMoments {
    pub vertex: String,
    pub degree: f64,
    /// `c(x)`.
    pub m1: f64,
    /// `c(x)² + Σ_{y∼x} c_xy²`.
    pub m2: f64,
    /// `Σ_{y∼x} c_xy²`.
    pub covariance: f64,
    /// `covariance ≤ c(x)²`.
    pub bound_holds: bool,
}

pub fn network_moments(graph: &NetworkGraph, x: usize) -> Result<NetworkMoments> {
    if x >= graph.len() {
        return Err(Error::UnknownVertex(x.to_string()));
    }
    if x == graph.base {
        return Err(Error::BasePoint);
    }
    let c = graph.degree(x);
    let covariance: f64 = graph.neighbors(x).iter().map(|&(_, cxy)| cxy * cxy).sum();
    Ok(NetworkMoments {
        vertex: graph.label(x).to_string(),
        degree: c,
        m1: c,
        m2: c * c + covariance,
        covariance,
        bound_holds: covariance <= c * c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(list: &[(&str, &str, f64)]) -> Vec<EdgeRecord> {
        list.iter()
            .map(|&(u, v, c)| EdgeRecord { u: u.into(), v: v.into(), conductance: c })
            .collect()
    }

    #[test]
    fn load_validates() {
        let path = edges(&[("0", "1", 1.0), ("1", "2", 1.0), ("2", "3", 1.0)]);
        assert_eq!(load_network(&path, "0").unwrap().len(), 4);
        let two = edges(&[("0", "1", 1.0), ("2", "3", 1.0)]);
        assert!(matches!(load_network(&two, "0"), Err(Error::Disconnected { .. })));
        let lp = edges(&[("1", "1", 2.0)]);
        assert!(matches!(load_network(&lp, "1"), Err(Error::SelfLoop { .. })));
        let neg = edges(&[("0", "1", -1.0)]);
        assert!(matches!(load_network(&neg, "0"), Err(Error::NonpositiveConductance { .. })));
        assert!(matches!(load_network(&path, "9"), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn parse_with_comments() {
        let text = "# path\n0 1 1.0\n1 2 2.5 # heavy\n\n";
        let e = parse_edge_list(text).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].conductance, 2.5);
        assert!(matches!(parse_edge_list("0 1"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_edge_list("0 1 x").is_err());
    }

    #[test]
    fn laplacian_examples() {
        let g = NetworkGraph::path(3, 1.0).unwrap();
        let lap = laplacian_apply(&g, &VertexFunction(vec![0.0, 1.0, 0.0, 0.0]));
        assert_eq!(lap.0, vec![-1.0, 2.0, -1.0, 0.0]);
        let lap = laplacian_apply(&g, &VertexFunction(vec![0.0, 1.0, 2.0, 3.0]));
        assert_eq!(lap.0, vec![-1.0, 0.0, 0.0, 1.0]);
        let lap = laplacian_apply(&g, &VertexFunction(vec![5.0; 4]));
        assert_eq!(lap.0, vec![0.0; 4]);
    }

    #[test]
    fn energy_examples() {
        let g = NetworkGraph::path(3, 1.0).unwrap();
        assert_eq!(energy_inner(&g, &g.indicator(1), &g.indicator(1)), 2.0);
        assert_eq!(energy_inner(&g, &g.indicator(1), &g.indicator(2)), -1.0);
        let c = VertexFunction(vec![3.0; 4]);
        assert_eq!(energy_inner(&g, &c, &c), 0.0);
        assert_eq!(delta_inner_energy(&g, 1, 1), 2.0);
        assert_eq!(delta_inner_energy(&g, 1, 2), -1.0);
        assert_eq!(delta_inner_energy(&g, 0, 3), 0.0);
    }

    #[test]
    fn dipole_examples() {
        let g = NetworkGraph::path(2, 1.0).unwrap();
        let v = dipole(&g, 2, 0).unwrap();
        for (got, want) in v.0.iter().zip([0.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let w = dipole(&g, 0, 2).unwrap();
        for (a, b) in v.0.iter().zip(&w.0) {
            assert!((a + b).abs() < 1e-14);
        }
        let f = VertexFunction(vec![0.3, -1.2, 4.0]);
        let got = energy_inner(&g, &v, &f);
        assert!((got - (4.0 - 0.3)).abs() < 1e-13);
    }

    #[test]
    fn path_energy_kernel_is_min() {
        let g = NetworkGraph::path(6, 1.0).unwrap();
        let k = energy_kernel(&g).unwrap();
        for i in 1..=6 {
            for j in 1..=6 {
                let v = k.eval(Point::Label(i), Point::Label(j));
                assert!((v - i.min(j) as f64).abs() < 1e-12);
            }
        }
        assert!(greens_identity_residual(&g, &k) < 1e-12);
        assert!(k.check_point(0, Point::Label(0)).is_err());
    }

    #[test]
    fn moment_examples() {
        let g = NetworkGraph::path(4, 1.0).unwrap();
        let m = network_moments(&g, 2).unwrap();
        assert_eq!((m.m1, m.m2, m.covariance, m.bound_holds), (2.0, 6.0, 2.0, true));
        let leaf = NetworkGraph::from_indexed_edges(2, &[(0, 1, 3.0)], 0).unwrap();
        let m = network_moments(&leaf, 1).unwrap();
        assert_eq!((m.m1, m.m2, m.covariance), (3.0, 18.0, 9.0));
        assert!(m.bound_holds);
        let star: Vec<_> = (1..=4).map(|i| (0, i, 1.0)).collect();
        let s = NetworkGraph::from_indexed_edges(5, &star, 1).unwrap();
        let m = network_moments(&s, 0).unwrap();
        assert_eq!((m.m1, m.m2, m.covariance), (4.0, 20.0, 4.0));
        assert!(matches!(network_moments(&s, 1), Err(Error::BasePoint)));
    }

    #[test]
    fn parallel_edges_merge() {
        let g = NetworkGraph::from_indexed_edges(2, &[(0, 1, 1.0), (1, 0, 2.0)], 0).unwrap();
        assert_eq!(g.conductance(0, 1), Some(3.0));
        assert_eq!(g.degree(1), 3.0);
    }
}
