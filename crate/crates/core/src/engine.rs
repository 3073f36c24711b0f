//! G-matrix construction and the generalized eigenproblem behind every
//! spectral method in the crate.
//!
//! Projecting the centered GraField `C − 1` onto a basis `{η_j}` gives
//!
//! ```text
//! M[j,k] = Σ_{x,y} ξ_j(x) ξ_k(y) P(x,y) − (Σ_x ξ_j(x) p(x)) (Σ_y ξ_k(y) p(y))
//! ```
//!
//! and the Galerkin conditions for the eigenfunctions `φ_k = Σ_j θ_jk η_j`
//! become `M Θ = S Θ Λ` with `S` the basis Gram matrix. Block pulses turn
//! `M` into `ℒ − √p√pᵀ`, unit indicators into the modularity pencil
//! `(B, D)`, and the LP polynomials into a small `m × m` transform matrix.

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::bases::{
    bpf_on_support, build_grafield, char_on_support, lp_basis, BasisKind, BasisValues, GraField,
    OrthonormalBasis,
};
use crate::error::{Error, Result};
use crate::graph::{
    empirical_network_pmf, empirical_vertex_pmf, Graph, NetworkDistribution, VertexDistribution,
    DEFAULT_DENSE_THRESHOLD,
};
use crate::linalg::{
    cholesky, solve_lower, solve_lower_transpose, symmetric_eigen, top_eigenpairs, KrylovOptions,
    Which,
};
use crate::scalar::Real;
use crate::smoothing::{laplace_smooth_network, laplace_smooth_vertex, Tau};

/// How eigenvalues are ordered and reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumView {
    /// Signed eigenvalues, non-increasing.
    #[default]
    Signed,
    /// Karhunen–Loève view: ordered by magnitude, reported as `|λ|`.
    Singular,
}

#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    /// Problems with more basis functions than this go to the Krylov solver.
    pub dense_threshold: usize,
    pub view: SpectrumView,
    pub krylov: KrylovOptions,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            view: SpectrumView::Signed,
            krylov: KrylovOptions::default(),
        }
    }
}

impl EngineOptions {
    pub fn with_view(view: SpectrumView) -> Self {
        Self {
            view,
            ..Default::default()
        }
    }
}

/// Basis-projected transform-coefficient matrix with its Gram matrix.
#[derive(Debug, Clone)]
pub struct GMatrix<T> {
    pub matrix: Array2<T>,
    pub gram: Array2<T>,
    pub basis: OrthonormalBasis<T>,
    /// Whether the `(C − 1)` centering term was subtracted. Always true.
    pub centered: bool,
}

/// G-matrix of a GraField with respect to a basis built on the same pmf.
pub fn gmatrix<T: Real>(gf: &GraField<T>, basis: &OrthonormalBasis<T>) -> Result<GMatrix<T>> {
    let tol = T::from_f64_lossy(1e-12);
    let same = gf.n() == basis.n()
        && gf
            .vertex_dist()
            .probs()
            .iter()
            .zip(basis.measure().probs())
            .all(|(a, b)| (*a - *b).abs() <= tol);
    if !same {
        return Err(Error::InconsistentDistributions(
            "basis measure differs from the GraField vertex pmf".into(),
        ));
    }
    Ok(gmatrix_from_network(gf.network_dist(), basis))
}

/// `Ξ P Ξᵀ − c cᵀ` with `c_j = Σ_x ξ_j(x) p(x)` taken under the basis measure.
///
/// The network pmf need not be the one the basis measure was derived from;
/// this is how a smoothed trial basis meets an unsmoothed network pmf.
pub fn gmatrix_from_network<T: Real>(
    net: &NetworkDistribution<T>,
    basis: &OrthonormalBasis<T>,
) -> GMatrix<T> {
    let m = basis.m();
    let centers = basis.integrals();
    let mut matrix = match basis.values() {
        BasisValues::Indicator {
            vertices,
            amplitudes,
        } => Array2::from_shape_fn((m, m), |(j, k)| {
            amplitudes[j] * amplitudes[k] * net.prob(vertices[j], vertices[k])
        }),
        BasisValues::Dense(values) => {
            let images: Vec<Vec<T>> = (0..m)
                .into_par_iter()
                .map(|k| net.apply(&values.row(k).to_vec()))
                .collect();
            Array2::from_shape_fn((m, m), |(j, k)| {
                values
                    .row(j)
                    .iter()
                    .zip(&images[k])
                    .map(|(a, b)| *a * *b)
                    .sum()
            })
        }
    };
    let half = T::from_f64_lossy(0.5);
    for j in 0..m {
        for k in 0..=j {
            let v = half * (matrix[[j, k]] + matrix[[k, j]]) - centers[j] * centers[k];
            matrix[[j, k]] = v;
            matrix[[k, j]] = v;
        }
    }
    GMatrix {
        matrix,
        gram: basis.gram().clone(),
        basis: basis.clone(),
        centered: true,
    }
}

/// Solution of `M Θ = S Θ Λ`: `Θ` is `m × k` with `ΘᵀSΘ = I`.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen<T> {
    pub theta: Array2<T>,
    pub values: Vec<T>,
}

fn is_identity<T: Real>(s: &Array2<T>, tol: T) -> bool {
    s.indexed_iter().all(|((i, j), v)| {
        let want = if i == j { T::one() } else { T::zero() };
        (*v - want).abs() <= tol
    })
}

fn is_diagonal<T: Real>(s: &Array2<T>) -> bool {
    s.indexed_iter().all(|((i, j), v)| i == j || *v == T::zero())
}

/// Orders eigenpairs and fixes signs: values non-increasing under `view`,
/// near-ties ordered by the basis index of each column's dominant entry, and
/// each column's largest-magnitude entry made positive.
fn order_and_fix<T: Real>(
    values: &[T],
    vectors: &Array2<T>,
    k: usize,
    view: SpectrumView,
) -> (Vec<T>, Array2<T>) {
    let m = values.len();
    let key = |i: usize| match view {
        SpectrumView::Signed => values[i],
        SpectrumView::Singular => values[i].abs(),
    };
    let dominant = |col: usize| -> usize {
        let column = vectors.column(col);
        let peak = column.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let cut = peak * T::from_f64_lossy(1.0 - 1e-9);
        column.iter().position(|v| v.abs() >= cut).unwrap_or(0)
    };
    let scale = values.iter().fold(T::one(), |a, v| a.max(v.abs()));
    let tie = scale * T::from_f64_lossy(1e-12);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| key(b).partial_cmp(&key(a)).unwrap_or(std::cmp::Ordering::Equal));
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && (key(order[start]) - key(order[end])).abs() <= tie {
            end += 1;
        }
        order[start..end].sort_by_key(|&c| dominant(c));
        start = end;
    }

    let rows = vectors.nrows();
    let mut out = Array2::zeros((rows, k));
    let mut vals = Vec::with_capacity(k);
    for (dst, &src) in order.iter().take(k).enumerate() {
        let column = vectors.column(src);
        let d = dominant(src);
        let sign = if column[d] < T::zero() { -T::one() } else { T::one() };
        for r in 0..rows {
            out[[r, dst]] = sign * column[r];
        }
        vals.push(values[src]);
    }
    (vals, out)
}

/// Symmetric-definite reduction: factor `S`, solve the standard problem,
/// back-transform. Skipped when `S = I` to 1e-12.
pub fn solve_generalized<T: Real>(
    gm: &GMatrix<T>,
    k: usize,
    view: SpectrumView,
) -> Result<GeneralizedEigen<T>> {
    let m = gm.matrix.nrows();
    if k > m {
        return Err(Error::TooManyComponents {
            requested: k,
            available: m,
        });
    }
    let s = &gm.gram;
    let (values, theta) = if is_identity(s, T::from_f64_lossy(1e-12)) {
        let eig = symmetric_eigen(&gm.matrix)?;
        order_and_fix(&eig.values, &eig.vectors, k, view)
    } else if is_diagonal(s) {
        let mut inv_root = Vec::with_capacity(m);
        for j in 0..m {
            if !(s[[j, j]] > T::zero()) {
                return Err(Error::DegenerateGram(format!("diagonal entry {j} is {}", s[[j, j]])));
            }
            inv_root.push(T::one() / s[[j, j]].sqrt());
        }
        let reduced = Array2::from_shape_fn((m, m), |(i, j)| gm.matrix[[i, j]] * inv_root[i] * inv_root[j]);
        let eig = symmetric_eigen(&reduced)?;
        let (values, y) = order_and_fix(&eig.values, &eig.vectors, k, view);
        let theta = Array2::from_shape_fn((m, k), |(i, c)| y[[i, c]] * inv_root[i]);
        (values, theta)
    } else {
        let l = cholesky(s)?;
        let left = solve_lower(&l, &gm.matrix);
        let reduced = solve_lower(&l, &left.t().to_owned());
        let sym = Array2::from_shape_fn((m, m), |(i, j)| {
            T::from_f64_lossy(0.5) * (reduced[[i, j]] + reduced[[j, i]])
        });
        let eig = symmetric_eigen(&sym)?;
        let (values, y) = order_and_fix(&eig.values, &eig.vectors, k, view);
        (values, solve_lower_transpose(&l, &y))
    };
    Ok(GeneralizedEigen { theta, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    BpfExact,
    CharExact,
    Lp(usize),
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::BpfExact => f.write_str("bpf-exact"),
            Method::CharExact => f.write_str("char-exact"),
            Method::Lp(m) => write!(f, "lp({m})"),
        }
    }
}

/// Approximate Karhunen–Loève basis of a graph.
#[derive(Debug, Clone)]
pub struct GraphEmbedding<T> {
    /// Signed eigenvalues in reported order.
    pub eigenvalues: Vec<T>,
    /// `n × k`; column `k` is `φ̂_k(x) = Σ_j Θ(j,k) ξ_j(x)`.
    pub coordinates: Array2<T>,
    /// `m × k` expansion coefficients `Θ`.
    pub coefficients: Array2<T>,
    pub basis: OrthonormalBasis<T>,
    pub method: Method,
    pub view: SpectrumView,
}

impl<T: Real> GraphEmbedding<T> {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues as the view reports them (non-increasing).
    pub fn spectrum(&self) -> Vec<T> {
        match self.view {
            SpectrumView::Signed => self.eigenvalues.clone(),
            SpectrumView::Singular => self.eigenvalues.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn coordinate(&self, k: usize) -> Vec<T> {
        self.coordinates.column(k).to_vec()
    }

    /// Vertices per basis coefficient.
    pub fn compression_ratio(&self) -> f64 {
        self.basis.n() as f64 / self.basis.m() as f64
    }

    /// `1 + Σ_k λ_k φ_k(x) φ_k(y)` over the retained components.
    pub fn kernel_reconstruction(&self) -> Array2<T> {
        let n = self.coordinates.nrows();
        let scaled = Array2::from_shape_fn((n, self.k()), |(x, c)| {
            self.coordinates[[x, c]] * self.eigenvalues[c]
        });
        let mut out = scaled.dot(&self.coordinates.t());
        out.mapv_inplace(|v| v + T::one());
        out
    }
}

fn assemble<T: Real>(
    basis: OrthonormalBasis<T>,
    solved: GeneralizedEigen<T>,
    method: Method,
    view: SpectrumView,
) -> GraphEmbedding<T> {
    let n = basis.n();
    let k = solved.values.len();
    let mut coordinates = Array2::zeros((n, k));
    for c in 0..k {
        let column = basis.combine(&solved.theta.column(c).to_vec());
        for (x, v) in column.into_iter().enumerate() {
            coordinates[[x, c]] = v;
        }
    }
    GraphEmbedding {
        eigenvalues: solved.values,
        coordinates,
        coefficients: solved.theta,
        basis,
        method,
        view,
    }
}

/// Basis family for [`unified_spectral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSpec {
    BlockPulse,
    Characteristic,
    Lp { m: usize },
}

impl BasisSpec {
    pub fn kind(&self) -> BasisKind {
        match self {
            BasisSpec::BlockPulse => BasisKind::BlockPulse,
            BasisSpec::Characteristic => BasisKind::Characteristic,
            BasisSpec::Lp { .. } => BasisKind::Lp,
        }
    }
}

/// Vertex and network pmfs of a graph, optionally Laplace-smoothed in both.
pub fn graph_distributions<T: Real>(
    g: &Graph<T>,
    smoothing: Option<&Tau<T>>,
) -> Result<(VertexDistribution<T>, NetworkDistribution<T>)> {
    Ok(match smoothing {
        None => (empirical_vertex_pmf(g), empirical_network_pmf(g)),
        Some(tau) => (
            laplace_smooth_vertex(g.degrees(), g.volume(), tau)?,
            laplace_smooth_network(g, tau)?,
        ),
    })
}

/// The unified pipeline: distributions → basis → G-matrix → eigensolve →
/// `φ̂_k = Σ_j Θ(j,k) ξ_j`.
///
/// Indicator bases with more functions than `options.dense_threshold` are
/// solved matrix-free for the top `k` pairs.
pub fn unified_spectral<T: Real>(
    g: &Graph<T>,
    basis: BasisSpec,
    smoothing: Option<&Tau<T>>,
    k: usize,
    options: &EngineOptions,
) -> Result<GraphEmbedding<T>> {
    let (vdist, ndist) = graph_distributions(g, smoothing)?;
    let zeros = vdist.zero_mass();
    if !zeros.is_empty() {
        log::warn!("vertices {zeros:?} carry no mass and are left out of the basis");
    }
    let gf = build_grafield(vdist, ndist)?;
    let (basis, method) = match basis {
        BasisSpec::BlockPulse => (bpf_on_support(gf.vertex_dist()), Method::BpfExact),
        BasisSpec::Characteristic => (char_on_support(gf.vertex_dist()), Method::CharExact),
        BasisSpec::Lp { m } => (lp_basis(gf.vertex_dist(), m)?, Method::Lp(m)),
    };
    if k > basis.m() {
        return Err(Error::TooManyComponents {
            requested: k,
            available: basis.m(),
        });
    }
    if basis.m() > options.dense_threshold {
        if let BasisValues::Indicator { .. } = basis.values() {
            let solved = solve_indicator_matrix_free(&gf, &basis, k, options)?;
            return Ok(assemble(basis, solved, method, options.view));
        }
    }
    let gm = gmatrix(&gf, &basis)?;
    let solved = solve_generalized(&gm, k, options.view)?;
    Ok(assemble(basis, solved, method, options.view))
}

/// For any indicator basis the symmetric reduction of `(M, S)` is
/// `ℒ − √p√pᵀ` on the support; iterate on that operator directly.
fn solve_indicator_matrix_free<T: Real>(
    gf: &GraField<T>,
    basis: &OrthonormalBasis<T>,
    k: usize,
    options: &EngineOptions,
) -> Result<GeneralizedEigen<T>> {
    let BasisValues::Indicator {
        vertices,
        amplitudes,
    } = basis.values()
    else {
        unreachable!("caller checked the basis shape");
    };
    let n = gf.n();
    let p = gf.vertex_dist().probs();
    let inv_root: Vec<T> = vertices.iter().map(|&x| T::one() / p[x].sqrt()).collect();
    let root: Vec<T> = vertices.iter().map(|&x| p[x].sqrt()).collect();
    let net = gf.network_dist();
    let op = |v: &[T]| -> Vec<T> {
        let mut full = vec![T::zero(); n];
        for ((&x, &w), val) in vertices.iter().zip(&inv_root).zip(v) {
            full[x] = w * *val;
        }
        let image = net.apply(&full);
        let proj: T = root.iter().zip(v).map(|(a, b)| *a * *b).sum();
        vertices
            .iter()
            .zip(&inv_root)
            .zip(&root)
            .map(|((&x, &w), &r)| w * image[x] - r * proj)
            .collect()
    };
    let which = match options.view {
        SpectrumView::Signed => Which::LargestAlgebraic,
        SpectrumView::Singular => Which::LargestMagnitude,
    };
    let eig = top_eigenpairs(vertices.len(), k, op, which, options.krylov)?;
    let (values, y) = order_and_fix(&eig.values, &eig.vectors, k, options.view);
    // Θ = S^{-1/2} Y with S = diag(a² p).
    let theta = Array2::from_shape_fn((vertices.len(), k), |(j, c)| {
        y[[j, c]] / (amplitudes[j] * root[j])
    });
    Ok(GeneralizedEigen { theta, values })
}

/// LP-compressed spectral embedding: an `m × m` transform matrix replaces
/// the `n × n` operator, and `Φ̂ = S U` maps its eigenvectors back to
/// vertices.
pub fn lp_spectral<T: Real>(
    g: &Graph<T>,
    m: usize,
    k0: usize,
    options: &EngineOptions,
) -> Result<GraphEmbedding<T>> {
    if k0 > m {
        return Err(Error::TooManyComponents {
            requested: k0,
            available: m,
        });
    }
    let vdist = empirical_vertex_pmf(g);
    let basis = lp_basis(&vdist, m)?;
    let gm = gmatrix_from_network(&empirical_network_pmf(g), &basis);
    let solved = solve_generalized(&gm, k0, options.view)?;
    Ok(assemble(basis, solved, Method::Lp(m), options.view))
}

/// Residual `R_k(x) = Σ_y (C(x,y) − 1) φ̂_k(y) p(y) − λ̂_k φ̂_k(x)` in the
/// vertex domain, one value per vertex (zero off the support).
pub fn residual<T: Real>(gf: &GraField<T>, embedding: &GraphEmbedding<T>, k: usize) -> Vec<T> {
    let phi = embedding.coordinate(k);
    let lambda = embedding.eigenvalues[k];
    let p = gf.vertex_dist().probs();
    let mean: T = phi.iter().zip(p).map(|(a, b)| *a * *b).sum();
    let image = gf.network_dist().apply(&phi);
    (0..gf.n())
        .map(|x| {
            if p[x] > T::zero() {
                image[x] / p[x] - mean - lambda * phi[x]
            } else {
                T::zero()
            }
        })
        .collect()
}

/// `L²[0,1]` norm of the governing-equation residual for component `k`.
pub fn residual_norm<T: Real>(gf: &GraField<T>, embedding: &GraphEmbedding<T>, k: usize) -> T {
    let r = residual(gf, embedding, k);
    r.iter()
        .zip(gf.vertex_dist().probs())
        .map(|(a, w)| *a * *a * *w)
        .sum::<T>()
        .sqrt()
}

/// `⟨R_k, η_l⟩` for every basis function; zero under Galerkin orthogonality.
pub fn galerkin_defect<T: Real>(
    gf: &GraField<T>,
    embedding: &GraphEmbedding<T>,
    k: usize,
) -> Vec<T> {
    embedding.basis.project(&residual(gf, embedding, k))
}

/// `ΘᵀSΘ`, the identity for a correctly normalized solve.
pub fn s_orthonormality<T: Real>(embedding: &GraphEmbedding<T>) -> Array2<T> {
    let st = embedding.basis.gram().dot(&embedding.coefficients);
    embedding.coefficients.t().dot(&st)
}

/// Column means `Σ_x φ̂_k(x) p(x)` under the basis measure.
pub fn coordinate_means<T: Real>(embedding: &GraphEmbedding<T>) -> Vec<T> {
    let p = embedding.basis.measure().probs();
    embedding
        .coordinates
        .axis_iter(Axis(1))
        .map(|col| col.iter().zip(p).map(|(a, b)| *a * *b).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{bpf_basis, char_basis};
    use crate::graph::build_graph;

    fn toy() -> Graph<f64> {
        build_graph(4, &[(0, 1, 2.0), (1, 2, 3.0), (1, 3, 3.0), (2, 3, 3.0)]).unwrap()
    }

    fn field(g: &Graph<f64>) -> GraField<f64> {
        build_grafield(empirical_vertex_pmf(g), empirical_network_pmf(g)).unwrap()
    }

    #[test]
    fn toy_gmatrix_entries() {
        let g = toy();
        let gf = field(&g);
        let bpf = gmatrix(&gf, &bpf_basis(gf.vertex_dist()).unwrap()).unwrap();
        assert!((bpf.matrix[[0, 1]] - 7.0 / 22.0).abs() < 1e-14);
        let ch = gmatrix(&gf, &char_basis(gf.vertex_dist()).unwrap()).unwrap();
        assert!((ch.matrix[[0, 1]] - 7.0 / 121.0).abs() < 1e-15);
        for gm in [&bpf, &ch] {
            assert!(gm.centered);
            for ((i, j), v) in gm.matrix.indexed_iter() {
                assert_eq!(*v, gm.matrix[[j, i]]);
            }
        }
    }

    #[test]
    fn gmatrix_rejects_foreign_basis() {
        let g = toy();
        let gf = field(&g);
        let other = VertexDistribution::from_probs(vec![0.25; 4]).unwrap();
        assert!(gmatrix(&gf, &bpf_basis(&other).unwrap()).is_err());
    }

    #[test]
    fn triangle_spectrum_in_both_views() {
        let g = build_graph(3, &[(0, 1, 1.0f64), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let signed = unified_spectral(&g, BasisSpec::BlockPulse, None, 3, &EngineOptions::default()).unwrap();
        for (a, b) in signed.spectrum().iter().zip([0.0, -0.5, -0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
        let kl = unified_spectral(
            &g,
            BasisSpec::BlockPulse,
            None,
            3,
            &EngineOptions::with_view(SpectrumView::Singular),
        )
        .unwrap();
        for (a, b) in kl.spectrum().iter().zip([0.5, 0.5, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn too_many_components() {
        let g = toy();
        assert!(matches!(
            unified_spectral(&g, BasisSpec::BlockPulse, None, 5, &EngineOptions::default()),
            Err(Error::TooManyComponents { .. })
        ));
        assert!(matches!(
            lp_spectral(&g, 2, 3, &EngineOptions::default()),
            Err(Error::TooManyComponents { .. })
        ));
    }

    #[test]
    fn singular_gram_detected() {
        let g = toy();
        let gf = field(&g);
        let mut gm = gmatrix(&gf, &char_basis(gf.vertex_dist()).unwrap()).unwrap();
        gm.gram[[2, 2]] = 0.0;
        assert!(matches!(
            solve_generalized(&gm, 2, SpectrumView::Signed),
            Err(Error::DegenerateGram(_))
        ));
        gm.gram = Array2::from_elem((4, 4), 1.0);
        assert!(matches!(
            solve_generalized(&gm, 2, SpectrumView::Signed),
            Err(Error::DegenerateGram(_))
        ));
    }

    #[test]
    fn isolated_vertex_is_excluded() {
        let g = build_graph(4, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 1.0)]).unwrap();
        let emb = unified_spectral(&g, BasisSpec::BlockPulse, None, 3, &EngineOptions::default()).unwrap();
        assert_eq!(emb.basis.m(), 3);
        for c in 0..3 {
            assert_eq!(emb.coordinates[[3, c]], 0.0);
        }
    }
}
