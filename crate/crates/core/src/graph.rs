//! Weighted undirected graphs, the graph Laplacian and its spectrum.
//!
//! Nodes are 0-based inside the library. The JSON edge-list format uses
//! 1-based node numbers.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, RealMatrix};
use crate::panel::parse_error;

/// Symmetric n×n table of real weights with a zero diagonal. Entries may be
/// negative; this is the raw output of the recovery formulas.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    weights: RealMatrix,
}

impl WeightTable {
    /// Validates symmetry (exact), zero diagonal and finiteness.
    pub fn new(weights: RealMatrix) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::input("weight table must be square"));
        }
        let n = weights.rows();
        for x in 0..n {
            if weights[(x, x)] != 0.0 {
                return Err(Error::input(format!("nonzero diagonal weight at node {}", x + 1)));
            }
            for y in 0..x {
                if weights[(x, y)] != weights[(y, x)] {
                    return Err(Error::input(format!(
                        "weights not symmetric between nodes {} and {}",
                        y + 1,
                        x + 1
                    )));
                }
            }
        }
        Ok(Self { weights })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            weights: RealMatrix::zeros(n, n),
        }
    }

    /// From 0-based `(u, v, w)` triples; later duplicates overwrite earlier ones.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("graph needs at least one node"));
        }
        let mut m = RealMatrix::zeros(n, n);
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::input(format!("edge ({}, {}) outside {n} nodes", u + 1, v + 1)));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at node {}", u + 1)));
            }
            if !w.is_finite() {
                return Err(Error::input("non-finite edge weight"));
            }
            m[(u, v)] = w;
            m[(v, u)] = w;
        }
        Ok(Self { weights: m })
    }

    pub fn n(&self) -> usize {
        self.weights.rows()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.weights[(x, y)]
    }

    pub fn as_matrix(&self) -> &RealMatrix {
        &self.weights
    }

    /// 0-based `(u, v, w)` with `u < v` and `w != 0`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .map(|(u, v)| (u, v, self.get(u, v)))
            .filter(|e| e.2 != 0.0)
            .collect()
    }

    /// Largest off-diagonal entry (0 for a single node).
    pub fn max_weight(&self) -> f64 {
        self.edges().iter().fold(0.0, |m, e| m.max(e.2))
    }

    /// Entrywise `max(w, 0)`.
    pub fn positivize(&self) -> Self {
        let data = self.weights.as_slice().iter().map(|&w| w.max(0.0)).collect();
        Self {
            weights: RealMatrix::new(self.n(), self.n(), data).expect("same shape"),
        }
    }

    /// Every entry multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let data = self.weights.as_slice().iter().map(|&w| w * s).collect();
        Self {
            weights: RealMatrix::new(self.n(), self.n(), data).expect("same shape"),
        }
    }

    /// Restriction to the listed nodes, in the given order.
    pub fn subgraph(&self, nodes: &[usize]) -> Result<Self> {
        if nodes.iter().any(|&x| x >= self.n()) {
            return Err(Error::input("subgraph node out of range"));
        }
        let k = nodes.len();
        let mut m = RealMatrix::zeros(k.max(1), k.max(1));
        for (i, &x) in nodes.iter().enumerate() {
            for (j, &y) in nodes.iter().enumerate() {
                m[(i, j)] = self.get(x, y);
            }
        }
        Ok(Self { weights: m })
    }

    /// Fails if any weight is negative.
    pub fn into_graph(self) -> Result<WeightedGraph> {
        WeightedGraph::from_table(self)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n(),
            edges: self
                .edges()
                .into_iter()
                .map(|(u, v, w)| EdgeJson { u: u + 1, v: v + 1, w })
                .collect(),
        }
    }

    pub fn from_json(g: &GraphJson) -> Result<Self> {
        let mut edges = Vec::with_capacity(g.edges.len());
        for e in &g.edges {
            if e.u == 0 || e.v == 0 {
                return Err(Error::input("graph JSON node numbers are 1-based"));
            }
            edges.push((e.u - 1, e.v - 1, e.w));
        }
        Self::from_edges(g.n, &edges)
    }

    /// Dense CSV: header `node,1,…,n`, then one row per node.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.n();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["node".to_string()];
        header.extend((1..=n).map(|y| y.to_string()));
        w.write_record(&header)?;
        for x in 0..n {
            let mut row = vec![(x + 1).to_string()];
            row.extend((0..n).map(|y| format!("{:?}", self.get(x, y))));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the format written by [`WeightTable::write_csv`].
    pub fn read_csv<R: Read>(input: R, origin: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let n = r.headers()?.len().saturating_sub(1);
        if n == 0 {
            return Err(parse_error(origin, 1, "node", "no weight columns"));
        }
        let mut data = Vec::with_capacity(n * n);
        let mut rows = 0;
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            if rec.len() != n + 1 {
                return Err(parse_error(
                    origin,
                    row,
                    "*",
                    &format!("expected {} fields, found {}", n + 1, rec.len()),
                ));
            }
            for y in 0..n {
                let v: f64 = rec[y + 1]
                    .parse()
                    .map_err(|_| parse_error(origin, row, &(y + 1).to_string(), "not a number"))?;
                data.push(v);
            }
            rows += 1;
        }
        if rows != n {
            return Err(parse_error(
                origin,
                rows + 1,
                "node",
                &format!("expected {n} rows, found {rows}"),
            ));
        }
        Self::new(RealMatrix::new(n, n, data)?)
    }
}

/// Edge list CSV `u,v,w` with 1-based nodes.
pub fn write_edges_csv<W: Write>(edges: &[(usize, usize, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u", "v", "w"])?;
    for &(u, v, wt) in edges {
        w.write_record([(u + 1).to_string(), (v + 1).to_string(), format!("{wt:?}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses [`write_edges_csv`] output back into 0-based triples.
pub fn read_edges_csv<R: Read>(input: R, origin: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        if rec.len() != 3 {
            return Err(parse_error(origin, row, "*", "expected u,v,w"));
        }
        let node = |k: usize, name: &str| -> Result<usize> {
            match rec[k].parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(parse_error(origin, row, name, "node numbers are 1-based integers")),
            }
        };
        let w: f64 = rec[2]
            .parse()
            .map_err(|_| parse_error(origin, row, "w", "not a number"))?;
        out.push((node(0, "u")?, node(1, "v")?, w));
    }
    Ok(out)
}

/// Weighted undirected graph with nonnegative weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    table: WeightTable,
}

impl WeightedGraph {
    pub fn new(weights: RealMatrix) -> Result<Self> {
        Self::from_table(WeightTable::new(weights)?)
    }

    pub fn from_table(table: WeightTable) -> Result<Self> {
        if table.weights.as_slice().iter().any(|&w| w < 0.0) {
            return Err(Error::input("graph weights must be nonnegative"));
        }
        Ok(Self { table })
    }

    /// From 0-based `(u, v, w)` triples.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_table(WeightTable::from_edges(n, edges)?)
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.table.get(x, y)
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    pub fn degree(&self, x: usize) -> f64 {
        self.table.weights.row(x).iter().sum()
    }

    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.table.edges()
    }

    /// Breadth-first search over edges with weight strictly above zero.
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for y in 0..n {
                if !seen[y] && self.weight(x, y) > 0.0 {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == n
    }

    pub fn to_json(&self) -> GraphJson {
        self.table.to_json()
    }

    pub fn from_json(g: &GraphJson) -> Result<Self> {
        Self::from_table(WeightTable::from_json(g)?)
    }
}

/// Edge-list JSON document: `{"n": .., "edges": [{"u": .., "v": .., "w": ..}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<EdgeJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Laplacian eigenvalues (ascending) and orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    eigenvectors: RealMatrix,
}

impl SpectralData {
    /// Checks dimensions, ascending order and orthonormality within 1e-10.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: RealMatrix) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 || eigenvectors.rows() != n || eigenvectors.cols() != n {
            return Err(Error::input("spectrum dimensions do not match"));
        }
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite eigenvalue"));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::input("eigenvalues must be ascending"));
        }
        let gram = eigenvectors.transpose().matmul(&eigenvectors)?;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - want).abs() > 1e-10 {
                    return Err(Error::input("eigenvectors are not orthonormal"));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `k` holds eigenvector `k`.
    pub fn eigenvectors(&self) -> &RealMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }
}

/// `L = D - W`.
pub fn build_laplacian(g: &WeightedGraph) -> RealMatrix {
    let n = g.n();
    let mut l = RealMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            if x != y {
                l[(x, y)] = -g.weight(x, y);
            }
        }
        l[(x, x)] = g.degree(x);
    }
    l
}

/// Eigendecomposition of the Laplacian of a connected graph. The zero
/// eigenpair is set exactly to `0` and the constant vector `n^{-1/2}`.
pub fn spectral_decompose(g: &WeightedGraph) -> Result<SpectralData> {
    if !g.is_connected() {
        return Err(Error::domain("graph is not connected"));
    }
    let n = g.n();
    let eig = symmetric_eigen(&build_laplacian(g))?;
    let mut values = eig.eigenvalues;
    let mut vectors = eig.eigenvectors;
    values[0] = 0.0;
    let c = 1.0 / (n as f64).sqrt();
    for x in 0..n {
        vectors[(x, 0)] = c;
    }
    Ok(SpectralData {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

pub fn make_path_graph(n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::input(format!("path graph needs n >= 2, got {n}")));
    }
    let edges: Vec<_> = (0..n - 1).map(|x| (x, x + 1, 1.0)).collect();
    WeightedGraph::from_edges(n, &edges)
}

/// Closed-form path spectrum: `2 - 2cos(πk/n)` with cosine eigenvectors.
pub fn path_closed_form_spectrum(n: usize) -> Result<SpectralData> {
    if n < 2 {
        return Err(Error::input(format!("path graph needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let values = (0..n).map(|k| 2.0 - 2.0 * (PI * k as f64 / nf).cos()).collect();
    let mut vectors = RealMatrix::zeros(n, n);
    for x in 0..n {
        vectors[(x, 0)] = 1.0 / nf.sqrt();
        for k in 1..n {
            let xx = (x + 1) as f64;
            vectors[(x, k)] = (2.0 / nf).sqrt() * (PI * k as f64 * (2.0 * xx - 1.0) / (2.0 * nf)).cos();
        }
    }
    Ok(SpectralData {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// Coefficients `⟨f, v_k⟩`.
pub fn graph_fourier(f: &[f64], s: &SpectralData) -> Result<Vec<f64>> {
    if f.len() != s.n() {
        return Err(Error::input(format!(
            "node function has {} values, graph has {} nodes",
            f.len(),
            s.n()
        )));
    }
    Ok((0..s.n())
        .map(|k| (0..s.n()).map(|x| f[x] * s.eigenvectors[(x, k)]).sum())
        .collect())
}

/// `Σ_k coeff_k v_k`.
pub fn inverse_graph_fourier(coeffs: &[f64], s: &SpectralData) -> Result<Vec<f64>> {
    if coeffs.len() != s.n() {
        return Err(Error::input("coefficient count does not match the spectrum"));
    }
    s.eigenvectors.matvec(coeffs)
}

/// `w_xy = -Σ_k v_k(x) ρ_k v_k(y)` off the diagonal. Negative values are
/// kept as computed.
pub fn weights_from_spectrum(s: &SpectralData) -> WeightTable {
    let n = s.n();
    let mut m = RealMatrix::zeros(n, n);
    for x in 0..n {
        for y in x + 1..n {
            let w: f64 = -(0..n)
                .map(|k| s.eigenvectors[(x, k)] * s.eigenvalues[k] * s.eigenvectors[(y, k)])
                .sum::<f64>();
            m[(x, y)] = w;
            m[(y, x)] = w;
        }
    }
    WeightTable { weights: m }
}

/// `2 max_x deg(x)`, an upper bound on the largest Laplacian eigenvalue.
pub fn laplacian_degree_bound(g: &WeightedGraph) -> f64 {
    2.0 * (0..g.n()).map(|x| g.degree(x)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p3_laplacian() -> RealMatrix {
        RealMatrix::from_rows(&[vec![1.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 1.0]]).unwrap()
    }

    #[test]
    fn laplacian_of_small_graphs() {
        assert_eq!(build_laplacian(&make_path_graph(3).unwrap()), p3_laplacian());
        let empty = WeightedGraph::from_edges(4, &[]).unwrap();
        assert_eq!(build_laplacian(&empty), RealMatrix::zeros(4, 4));
    }

    #[test]
    fn weight_and_edge_csv_roundtrip() {
        let t = WeightTable::from_edges(3, &[(0, 1, 0.1 + 0.2), (1, 2, -1e-17)]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("node,1,2,3\n"));
        assert_eq!(WeightTable::read_csv(&buf[..], Path::new("w.csv")).unwrap(), t);
        let mut buf = Vec::new();
        write_edges_csv(&t.edges(), &mut buf).unwrap();
        assert_eq!(read_edges_csv(&buf[..], Path::new("e.csv")).unwrap(), t.edges());
        let bad = "u,v,w\n0,1,2.0\n";
        assert!(matches!(
            read_edges_csv(bad.as_bytes(), Path::new("e.csv")),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn path_graph_structure() {
        let g = make_path_graph(2).unwrap();
        assert_eq!(g.edges(), vec![(0, 1, 1.0)]);
        let g = make_path_graph(21).unwrap();
        assert_eq!(g.edges().len(), 20);
        let g = make_path_graph(5).unwrap();
        for x in 0..5usize {
            for y in 0..5 {
                let want = if x.abs_diff(y) == 1 { 1.0 } else { 0.0 };
                assert_eq!(g.weight(x, y), want);
            }
        }
        assert!(make_path_graph(1).is_err());
    }

    #[test]
    fn closed_form_small_cases() {
        let s = path_closed_form_spectrum(3).unwrap();
        for (got, want) in s.eigenvalues().iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let s = path_closed_form_spectrum(21).unwrap();
        assert_eq!(s.eigenvalues()[0], 0.0);
        assert!(s.eigenvalues()[20] < 4.0);
    }

    #[test]
    fn decomposition_matches_path_closed_form() {
        let got = spectral_decompose(&make_path_graph(21).unwrap()).unwrap();
        let want = path_closed_form_spectrum(21).unwrap();
        for (a, b) in got.eigenvalues().iter().zip(want.eigenvalues()) {
            assert!((a - b).abs() < 1e-9);
        }
        // distinct eigenvalues: eigenvectors agree up to sign
        for k in 0..21 {
            let (u, v) = (got.eigenvector(k), want.eigenvector(k));
            let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!((d.abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn triangle_and_constant_eigenvector() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let s = spectral_decompose(&g).unwrap();
        for (got, want) in s.eigenvalues().iter().zip([0.0, 3.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(s.eigenvector(0).iter().all(|&v| v == 1.0 / 3f64.sqrt()));
        let w = weights_from_spectrum(&s);
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            assert!((w.get(u, v) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn disconnected_is_domain_error() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(spectral_decompose(&g), Err(Error::Domain(_))));
    }

    #[test]
    fn fourier_examples() {
        let s = path_closed_form_spectrum(6).unwrap();
        let c = graph_fourier(&s.eigenvector(3), &s).unwrap();
        for (k, v) in c.iter().enumerate() {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
        let mut chi = vec![0.0; 6];
        chi[2] = 1.0;
        let c = graph_fourier(&chi, &s).unwrap();
        for k in 0..6 {
            assert!((c[k] - s.eigenvectors()[(2, k)]).abs() < 1e-15);
        }
        let c = graph_fourier(&[2.5; 6], &s).unwrap();
        assert!((c[0] - 2.5 * 6f64.sqrt()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
        assert!(graph_fourier(&[1.0; 5], &s).is_err());
    }

    #[test]
    fn weights_from_zero_spectrum() {
        let s = SpectralData::new(vec![0.0; 4], RealMatrix::identity(4)).unwrap();
        assert!(weights_from_spectrum(&s).edges().is_empty());
    }

    #[test]
    fn degree_bound_examples() {
        assert_eq!(laplacian_degree_bound(&make_path_graph(7).unwrap()), 4.0);
        assert_eq!(laplacian_degree_bound(&WeightedGraph::from_edges(3, &[]).unwrap()), 0.0);
        let star = WeightedGraph::from_edges(5, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)]).unwrap();
        assert_eq!(laplacian_degree_bound(&star), 8.0);
        let s = spectral_decompose(&star).unwrap();
        assert!((s.eigenvalues()[4] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn graph_validation() {
        let asym = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(WeightedGraph::new(asym).is_err());
        let neg = RealMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(WeightTable::new(neg.clone()).is_ok());
        assert!(WeightedGraph::new(neg).is_err());
        let diag = RealMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(WeightTable::new(diag).is_err());
    }

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let g = WeightTable::from_edges(4, &[(0, 1, 0.1 + 0.2), (1, 3, -1.0 / 3.0), (2, 3, 1e-300)]).unwrap();
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let back: GraphJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.edges[0].u, 1);
        assert_eq!(WeightTable::from_json(&back).unwrap(), g);
    }

    #[test]
    fn positivize_clamps_and_is_idempotent() {
        let t = WeightTable::from_edges(3, &[(0, 1, -0.3), (1, 2, 0.7)]).unwrap();
        let p = t.positivize();
        assert_eq!(p.get(0, 1), 0.0);
        assert_eq!(p.get(1, 2), 0.7);
        assert_eq!(p.positivize(), p);
    }

    fn connected_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
        (2..=max_n).prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                proptest::collection::vec(0.05f64..2.0, n - 1),
                proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..2.0], pairs),
            )
                .prop_map(move |(tree, extra)| {
                    let mut m = RealMatrix::zeros(n, n);
                    let mut idx = 0;
                    for x in 0..n {
                        for y in x + 1..n {
                            m[(x, y)] = extra[idx];
                            m[(y, x)] = extra[idx];
                            idx += 1;
                        }
                    }
                    // spanning path keeps the graph connected
                    for x in 0..n - 1 {
                        m[(x, x + 1)] = tree[x];
                        m[(x + 1, x)] = tree[x];
                    }
                    WeightedGraph::new(m).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn spectrum_roundtrip_recovers_weights(g in connected_graph(10)) {
            let w = weights_from_spectrum(&spectral_decompose(&g).unwrap());
            for x in 0..g.n() {
                for y in 0..g.n() {
                    prop_assert!((w.get(x, y) - g.weight(x, y)).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn laplacian_is_psd_and_bounded(g in connected_graph(10)) {
            let l = build_laplacian(&g);
            for x in 0..g.n() {
                prop_assert!(l.row(x).iter().sum::<f64>().abs() < 1e-12);
            }
            let s = spectral_decompose(&g).unwrap();
            let ev = s.eigenvalues();
            prop_assert!(ev.iter().all(|&v| v >= -1e-10));
            prop_assert_eq!(ev[0], 0.0);
            prop_assert!(ev[1] > 0.0);
            prop_assert!(ev[g.n() - 1] <= laplacian_degree_bound(&g) + 1e-10);
        }

        #[test]
        fn fourier_inverts(g in connected_graph(8), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let f: Vec<f64> = (0..g.n()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let s = spectral_decompose(&g).unwrap();
            let back = inverse_graph_fourier(&graph_fourier(&f, &s).unwrap(), &s).unwrap();
            for (a, b) in back.iter().zip(&f) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn path_spectra_agree_up_to_64() {
        for n in [2, 3, 5, 8, 13, 21, 34, 64] {
            let got = spectral_decompose(&make_path_graph(n).unwrap()).unwrap();
            let want = path_closed_form_spectrum(n).unwrap();
            for (a, b) in got.eigenvalues().iter().zip(want.eigenvalues()) {
                assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn repeated_eigenvalues_basis_invariance() {
        // complete graph K5: eigenvalue 5 with multiplicity 4
        let edges: Vec<_> = (0..5).flat_map(|x| (x + 1..5).map(move |y| (x, y, 1.0))).collect();
        let g = WeightedGraph::from_edges(5, &edges).unwrap();
        let s = spectral_decompose(&g).unwrap();
        // rotate the eigenspace basis in the (1,2) plane
        let (c, sn) = (0.6, 0.8);
        let mut v = s.eigenvectors().clone();
        for x in 0..5 {
            let (a, b) = (v[(x, 1)], v[(x, 2)]);
            v[(x, 1)] = c * a - sn * b;
            v[(x, 2)] = sn * a + c * b;
        }
        let rotated = SpectralData::new(s.eigenvalues().to_vec(), v).unwrap();
        let w1 = weights_from_spectrum(&s);
        let w2 = weights_from_spectrum(&rotated);
        for (a, b) in w1.as_matrix().as_slice().iter().zip(w2.as_matrix().as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
