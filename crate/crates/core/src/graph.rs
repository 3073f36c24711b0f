//! Graph storage and the empirical probability objects built on top of it.
//!
//! Vertex ids are 0-based everywhere in the library; the file formats handled
//! by the command-line front end are 1-based and translate on the way in.

use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::smoothing::Tau;

/// Vertex count at or below which adjacency is stored densely.
pub const DEFAULT_DENSE_THRESHOLD: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphOptions {
    pub allow_self_loops: bool,
    pub dense_threshold: usize,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self {
            allow_self_loops: false,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
        }
    }
}

/// Compressed sparse rows holding both triangles of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> Csr<T> {
    pub fn row(&self, x: usize) -> impl Iterator<Item = (usize, &T)> + '_ {
        let (lo, hi) = (self.indptr[x], self.indptr[x + 1]);
        self.indices[lo..hi].iter().copied().zip(&self.values[lo..hi])
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn get(&self, x: usize, y: usize) -> T {
        let (lo, hi) = (self.indptr[x], self.indptr[x + 1]);
        match self.indices[lo..hi].binary_search(&y) {
            Ok(i) => self.values[lo + i].clone(),
            Err(_) => T::zero(),
        }
    }
}

/// Symmetric non-negative weight matrix, dense or sparse.
#[derive(Debug, Clone, PartialEq)]
pub enum Adjacency<T> {
    Dense(Array2<T>),
    Sparse(Csr<T>),
}

impl<T: Scalar> Adjacency<T> {
    pub fn n(&self) -> usize {
        match self {
            Adjacency::Dense(a) => a.nrows(),
            Adjacency::Sparse(c) => c.n,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Adjacency::Dense(_))
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        match self {
            Adjacency::Dense(a) => a[[x, y]].clone(),
            Adjacency::Sparse(c) => c.get(x, y),
        }
    }

    /// Calls `f(y, w)` for every stored entry of row `x` with `w != 0`.
    pub fn for_each_in_row<F: FnMut(usize, &T)>(&self, x: usize, mut f: F) {
        match self {
            Adjacency::Dense(a) => {
                for (y, w) in a.row(x).iter().enumerate() {
                    if !w.is_zero() {
                        f(y, w);
                    }
                }
            }
            Adjacency::Sparse(c) => {
                for (y, w) in c.row(x) {
                    f(y, w);
                }
            }
        }
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.n())
            .map(|x| {
                let mut s = T::zero();
                self.for_each_in_row(x, |_, w| s += w.clone());
                s
            })
            .collect()
    }

    /// `A · v`.
    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.n());
        (0..self.n())
            .map(|x| {
                let mut s = T::zero();
                self.for_each_in_row(x, |y, w| s += w.clone() * v[y].clone());
                s
            })
            .collect()
    }

    /// Number of stored non-zero entries (both triangles).
    pub fn nnz(&self) -> usize {
        match self {
            Adjacency::Dense(a) => a.iter().filter(|w| !w.is_zero()).count(),
            Adjacency::Sparse(c) => c.nnz(),
        }
    }

    pub fn to_dense(&self) -> Array2<T> {
        match self {
            Adjacency::Dense(a) => a.clone(),
            Adjacency::Sparse(c) => {
                let mut a = Array2::zeros((c.n, c.n));
                for x in 0..c.n {
                    for (y, w) in c.row(x) {
                        a[[x, y]] = w.clone();
                    }
                }
                a
            }
        }
    }

    /// Upper-triangle entries `(x, y, w)` with `x <= y`, row-major.
    pub fn upper_entries(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for x in 0..self.n() {
            self.for_each_in_row(x, |y, w| {
                if y >= x {
                    out.push((x, y, w.clone()));
                }
            });
        }
        out
    }
}

/// Weighted undirected graph with cached degrees and volume.
#[derive(Debug, Clone)]
pub struct Graph<T> {
    adjacency: Arc<Adjacency<T>>,
    degrees: Vec<T>,
    volume: T,
    zero_degree: Vec<usize>,
}

impl<T: Scalar> Graph<T> {
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn adjacency(&self) -> &Adjacency<T> {
        &self.adjacency
    }

    pub(crate) fn shared_adjacency(&self) -> Arc<Adjacency<T>> {
        Arc::clone(&self.adjacency)
    }

    pub fn weight(&self, x: usize, y: usize) -> T {
        self.adjacency.get(x, y)
    }

    pub fn degrees(&self) -> &[T] {
        &self.degrees
    }

    pub fn volume(&self) -> &T {
        &self.volume
    }

    /// Vertices with degree zero. They stay in the graph with zero mass but
    /// are excluded from basis construction.
    pub fn zero_degree_vertices(&self) -> &[usize] {
        &self.zero_degree
    }

    /// The fixed label order `0..n`; for time-indexed graphs this is time.
    pub fn vertex_order(&self) -> std::ops::Range<usize> {
        0..self.n()
    }

    /// Rescales every weight by `c > 0`.
    pub fn scaled(&self, c: T) -> Graph<T> {
        let adjacency = match self.adjacency.as_ref() {
            Adjacency::Dense(a) => Adjacency::Dense(a.mapv(|w| w * c.clone())),
            Adjacency::Sparse(s) => Adjacency::Sparse(Csr {
                n: s.n,
                indptr: s.indptr.clone(),
                indices: s.indices.clone(),
                values: s.values.iter().map(|w| w.clone() * c.clone()).collect(),
            }),
        };
        Graph::from_adjacency(adjacency).expect("rescaling preserves validity")
    }

    /// Wraps an adjacency matrix that is already symmetric and non-negative.
    pub fn from_adjacency(adjacency: Adjacency<T>) -> Result<Self> {
        let n = adjacency.n();
        let degrees = adjacency.row_sums();
        let mut volume = T::zero();
        for d in &degrees {
            volume += d.clone();
        }
        if n == 0 || volume <= T::zero() {
            return Err(Error::EmptyGraph);
        }
        let zero_degree: Vec<usize> = degrees
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_zero())
            .map(|(i, _)| i)
            .collect();
        if !zero_degree.is_empty() {
            log::warn!("zero-degree vertices excluded from spectral computation: {zero_degree:?}");
        }
        Ok(Self {
            adjacency: Arc::new(adjacency),
            degrees,
            volume,
            zero_degree,
        })
    }

    /// Builds a graph from a dense symmetric matrix, validating it.
    pub fn from_dense(a: Array2<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!("{}x{} adjacency", n, a.ncols())));
        }
        for x in 0..n {
            for y in 0..n {
                if a[[x, y]] < T::zero() {
                    return Err(Error::NegativeWeight {
                        u: x,
                        v: y,
                        weight: a[[x, y]].as_f64(),
                    });
                }
                if a[[x, y]] != a[[y, x]] {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency not symmetric at ({x}, {y})"
                    )));
                }
            }
        }
        Self::from_adjacency(Adjacency::Dense(a))
    }
}

/// Builds a graph from 0-based weighted edges with default options.
pub fn build_graph<T: Scalar>(n: usize, edges: &[(usize, usize, T)]) -> Result<Graph<T>> {
    build_graph_with(n, edges, GraphOptions::default())
}

/// Builds a graph from 0-based weighted edges. Duplicate edges are summed.
pub fn build_graph_with<T: Scalar>(
    n: usize,
    edges: &[(usize, usize, T)],
    options: GraphOptions,
) -> Result<Graph<T>> {
    if edges.is_empty() || n == 0 {
        return Err(Error::EmptyGraph);
    }
    for (u, v, w) in edges {
        for id in [*u, *v] {
            if id >= n {
                return Err(Error::BadVertexId { id, n });
            }
        }
        if *w < T::zero() {
            return Err(Error::NegativeWeight {
                u: *u,
                v: *v,
                weight: w.as_f64(),
            });
        }
        if u == v && !options.allow_self_loops {
            return Err(Error::SelfLoop(*u));
        }
    }

    let adjacency = if n <= options.dense_threshold {
        let mut a = Array2::<T>::zeros((n, n));
        for (u, v, w) in edges {
            a[[*u, *v]] += w.clone();
            if u != v {
                a[[*v, *u]] += w.clone();
            }
        }
        Adjacency::Dense(a)
    } else {
        let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(2 * edges.len());
        for (u, v, w) in edges {
            triplets.push((*u, *v, w.clone()));
            if u != v {
                triplets.push((*v, *u, w.clone()));
            }
        }
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (u, v, w) in triplets {
            if last == Some((u, v)) {
                *values.last_mut().unwrap() += w;
            } else {
                indices.push(v);
                values.push(w);
                indptr[u + 1] += 1;
                last = Some((u, v));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Adjacency::Sparse(Csr {
            n,
            indptr,
            indices,
            values,
        })
    };
    Graph::from_adjacency(adjacency)
}

/// Where a vertex distribution came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance<T> {
    Empirical,
    Laplace(Tau<T>),
    /// Good-Turing, keeping the raw (un-normalized) masses.
    GoodTuring { raw: Vec<T> },
    Supplied,
    /// Stationary vector of a Markov chain.
    Stationary,
}

/// Probability mass function over vertices with its cumulative view.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexDistribution<T> {
    probs: Vec<T>,
    cdf: Vec<T>,
    provenance: Provenance<T>,
}

pub(crate) fn unit_tolerance<T: Scalar>() -> T {
    T::from_f64_lossy(1e-12)
}

impl<T: Scalar> VertexDistribution<T> {
    /// Validates non-negativity and unit total (to 1e-12).
    pub fn new(probs: Vec<T>, provenance: Provenance<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut total = T::zero();
        for (i, p) in probs.iter().enumerate() {
            if *p < T::zero() {
                return Err(Error::InvalidParameter(format!("negative mass at vertex {i}")));
            }
            total += p.clone();
        }
        if (total.clone() - T::one()).abs_val() > unit_tolerance() {
            return Err(Error::InvalidParameter(format!("masses sum to {total}, not 1")));
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = T::zero();
        for p in &probs {
            acc += p.clone();
            cdf.push(acc.clone());
        }
        // Pin the tail to exactly one so that Q(1) is the last atom.
        if let Some(last) = probs.iter().rposition(|p| !p.is_zero()) {
            for c in &mut cdf[last..] {
                *c = T::one();
            }
        }
        Ok(Self {
            probs,
            cdf,
            provenance,
        })
    }

    pub fn from_probs(probs: Vec<T>) -> Result<Self> {
        Self::new(probs, Provenance::Supplied)
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> &T {
        &self.probs[x]
    }

    pub fn cdf(&self) -> &[T] {
        &self.cdf
    }

    pub fn provenance(&self) -> &Provenance<T> {
        &self.provenance
    }

    /// Vertices carrying no mass.
    pub fn zero_mass(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// Left-continuous step quantile: the smallest `x` with `F(x) >= u`.
    pub fn quantile(&self, u: &T) -> Result<usize> {
        if *u <= T::zero() || *u > T::one() {
            return Err(Error::UOutOfRange(u.as_f64()));
        }
        let idx = self.cdf.partition_point(|c| c < u);
        if idx < self.cdf.len() {
            Ok(idx)
        } else {
            Ok(self
                .probs
                .iter()
                .rposition(|p| !p.is_zero())
                .unwrap_or(self.probs.len() - 1))
        }
    }

    /// Mid-distribution `F(x) - p(x)/2`.
    pub fn mid_cdf(&self) -> Vec<T> {
        let half = T::one() / (T::one() + T::one());
        self.cdf
            .iter()
            .zip(&self.probs)
            .map(|(c, p)| c.clone() - half.clone() * p.clone())
            .collect()
    }
}

/// Pmf over vertex pairs, stored as `(scale·A(x,y) + offset) / total`.
///
/// The two shipped estimators (empirical and two-dimensional Laplace) both
/// have this form, which keeps the network pmf as cheap as the adjacency it
/// is derived from.
#[derive(Debug, Clone)]
pub struct NetworkDistribution<T> {
    weights: Arc<Adjacency<T>>,
    scale: T,
    offset: T,
    total: T,
    provenance: Provenance<T>,
}

impl<T: Scalar> NetworkDistribution<T> {
    pub(crate) fn from_parts(
        weights: Arc<Adjacency<T>>,
        scale: T,
        offset: T,
        total: T,
        provenance: Provenance<T>,
    ) -> Self {
        Self {
            weights,
            scale,
            offset,
            total,
            provenance,
        }
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn provenance(&self) -> &Provenance<T> {
        &self.provenance
    }

    pub fn prob(&self, x: usize, y: usize) -> T {
        (self.scale.clone() * self.weights.get(x, y) + self.offset.clone()) / self.total.clone()
    }

    /// Row sums `Σ_y P(x, y)`.
    pub fn marginals(&self) -> Vec<T> {
        let n_offset = T::from_count(self.n()) * self.offset.clone();
        self.weights
            .row_sums()
            .into_iter()
            .map(|d| (self.scale.clone() * d + n_offset.clone()) / self.total.clone())
            .collect()
    }

    /// `P · v` without materializing `P`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let mut sum = T::zero();
        for x in v {
            sum += x.clone();
        }
        let shift = self.offset.clone() * sum;
        self.weights
            .matvec(v)
            .into_iter()
            .map(|av| (self.scale.clone() * av + shift.clone()) / self.total.clone())
            .collect()
    }

    pub fn to_dense(&self) -> Array2<T> {
        let n = self.n();
        Array2::from_shape_fn((n, n), |(x, y)| self.prob(x, y))
    }

    /// Sum of all entries; one up to rounding.
    pub fn total_mass(&self) -> T {
        let mut s = T::zero();
        for m in self.marginals() {
            s += m;
        }
        s
    }
}

/// `p(x) = d(x) / N`.
pub fn empirical_vertex_pmf<T: Scalar>(g: &Graph<T>) -> VertexDistribution<T> {
    let probs = g
        .degrees()
        .iter()
        .map(|d| d.clone() / g.volume().clone())
        .collect();
    VertexDistribution::new(probs, Provenance::Empirical)
        .expect("degrees over volume form a pmf")
}

/// `P(x, y) = A(x, y) / N`.
pub fn empirical_network_pmf<T: Scalar>(g: &Graph<T>) -> NetworkDistribution<T> {
    NetworkDistribution::from_parts(
        g.shared_adjacency(),
        T::one(),
        T::zero(),
        g.volume().clone(),
        Provenance::Empirical,
    )
}
