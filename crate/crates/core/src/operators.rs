//! Classical spectral graph matrices and their links to the G-matrix engine.
//!
//! | constructor                | matrix                                   |
//! |----------------------------|------------------------------------------|
//! | [`laplacian`]              | `ℒ = D^{-1/2} A D^{-1/2}`                |
//! | [`laplacian_star`]         | `ℒ − √p√pᵀ`                              |
//! | [`modularity`]             | `B = A − ddᵀ/N`                          |
//! | [`random_walk`]            | `𝒯 = D^{-1} A`                           |
//! | [`reg_laplacian_type1`]    | `D_τ^{-1/2} A D_τ^{-1/2}`                |
//! | [`reg_laplacian_type2`]    | `D_τ^{-1/2} (A + τ/n·11ᵀ) D_τ^{-1/2}`    |
//! | [`pagerank_matrix`]        | `(1 − α) D^{-1} A + α/n·11ᵀ`             |
//!
//! PageRank uses the teleport convention: `α` is the mass sent uniformly at
//! random, so `α = 1` is the uniform chain and `α = 0` the plain random walk.

use std::collections::VecDeque;

use ndarray::Array2;

use crate::bases::{bpf_basis, bpf_on_support};
use crate::engine::{
    gmatrix_from_network, unified_spectral, BasisSpec, EngineOptions, GMatrix, SpectrumView,
};
use crate::error::{Error, Result};
use crate::graph::{empirical_network_pmf, Graph, Provenance, VertexDistribution};
use crate::scalar::{Real, Scalar};
use crate::smoothing::{laplace_smooth_network, laplace_smooth_vertex, Tau};

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind<T> {
    Laplacian,
    LaplacianStar,
    Modularity,
    RandomWalk,
    Type1(Tau<T>),
    Type2(Tau<T>),
    PageRank(T),
}

impl<T: Scalar> std::fmt::Display for OperatorKind<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OperatorKind::Laplacian => f.write_str("laplacian"),
            OperatorKind::LaplacianStar => f.write_str("laplacian-star"),
            OperatorKind::Modularity => f.write_str("modularity"),
            OperatorKind::RandomWalk => f.write_str("random-walk"),
            OperatorKind::Type1(t) => write!(f, "type1({})", t.as_f64()),
            OperatorKind::Type2(t) => write!(f, "type2({})", t.as_f64()),
            OperatorKind::PageRank(a) => write!(f, "pagerank({a})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix<T> {
    pub kind: OperatorKind<T>,
    pub matrix: Array2<T>,
    pub symmetric: bool,
}

fn require_positive_degrees<T: Scalar>(g: &Graph<T>) -> Result<()> {
    if g.zero_degree_vertices().is_empty() {
        Ok(())
    } else {
        Err(Error::ZeroDegree(g.zero_degree_vertices().to_vec()))
    }
}

fn sandwich<T: Real>(a: &Array2<T>, scale: &[T]) -> Array2<T> {
    Array2::from_shape_fn(a.dim(), |(x, y)| a[[x, y]] * scale[x] * scale[y])
}

/// `ℒ(x,y) = A(x,y)/√(d_x d_y)`.
pub fn laplacian<T: Real>(g: &Graph<T>) -> Result<OperatorMatrix<T>> {
    require_positive_degrees(g)?;
    let inv_root: Vec<T> = g.degrees().iter().map(|d| T::one() / d.sqrt()).collect();
    Ok(OperatorMatrix {
        kind: OperatorKind::Laplacian,
        matrix: sandwich(&g.adjacency().to_dense(), &inv_root),
        symmetric: true,
    })
}

/// `ℒ* = ℒ − √p̃ √p̃ᵀ`: the Laplacian with its trivial direction deflated.
pub fn laplacian_star<T: Real>(g: &Graph<T>) -> Result<OperatorMatrix<T>> {
    let mut l = laplacian(g)?;
    let root: Vec<T> = g.degrees().iter().map(|d| (*d / *g.volume()).sqrt()).collect();
    for ((x, y), v) in l.matrix.indexed_iter_mut() {
        *v -= root[x] * root[y];
    }
    l.kind = OperatorKind::LaplacianStar;
    Ok(l)
}

/// Newman's modularity matrix `B = A − ddᵀ/N`.
pub fn modularity<T: Scalar>(g: &Graph<T>) -> OperatorMatrix<T> {
    let a = g.adjacency().to_dense();
    let d = g.degrees();
    let vol = g.volume().clone();
    let matrix = Array2::from_shape_fn(a.dim(), |(x, y)| {
        a[[x, y]].clone() - d[x].clone() * d[y].clone() / vol.clone()
    });
    OperatorMatrix {
        kind: OperatorKind::Modularity,
        matrix,
        symmetric: true,
    }
}

/// One-step transition matrix `𝒯 = D^{-1} A`.
pub fn random_walk<T: Scalar>(g: &Graph<T>) -> Result<OperatorMatrix<T>> {
    require_positive_degrees(g)?;
    let a = g.adjacency().to_dense();
    let d = g.degrees();
    Ok(OperatorMatrix {
        kind: OperatorKind::RandomWalk,
        matrix: Array2::from_shape_fn(a.dim(), |(x, y)| a[[x, y]].clone() / d[x].clone()),
        symmetric: false,
    })
}

fn regularized_degrees<T: Real>(g: &Graph<T>, tau: &Tau<T>) -> Result<Vec<T>> {
    let t = match tau {
        Tau::Finite(t) if *t < T::zero() => {
            return Err(Error::BadShrinkage(format!("τ = {t} < 0")));
        }
        Tau::Finite(t) => *t,
        Tau::Infinite => unreachable!("handled by callers"),
    };
    g.degrees()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let v = *d + t;
            if v > T::zero() {
                Ok(T::one() / v.sqrt())
            } else {
                Err(Error::DanglingVertex(i))
            }
        })
        .collect()
}

/// Type-I regularized Laplacian `D_τ^{-1/2} A D_τ^{-1/2}`, `D_τ = diag(d + τ)`.
/// The `τ → ∞` limit is the zero matrix.
pub fn reg_laplacian_type1<T: Real>(g: &Graph<T>, tau: &Tau<T>) -> Result<OperatorMatrix<T>> {
    let n = g.n();
    let matrix = match tau {
        Tau::Infinite => Array2::zeros((n, n)),
        Tau::Finite(_) => sandwich(&g.adjacency().to_dense(), &regularized_degrees(g, tau)?),
    };
    Ok(OperatorMatrix {
        kind: OperatorKind::Type1(tau.clone()),
        matrix,
        symmetric: true,
    })
}

/// Type-II regularized Laplacian `D_τ^{-1/2} A_τ D_τ^{-1/2}` with
/// `A_τ = A + (τ/n)·11ᵀ`. The `τ → ∞` limit is the uniform matrix `11ᵀ/n`.
pub fn reg_laplacian_type2<T: Real>(g: &Graph<T>, tau: &Tau<T>) -> Result<OperatorMatrix<T>> {
    let n = g.n();
    let nf = T::from_count(n);
    let matrix = match tau {
        Tau::Infinite => Array2::from_elem((n, n), T::one() / nf),
        Tau::Finite(t) => {
            let shift = *t / nf;
            let a = g.adjacency().to_dense().mapv(|w| w + shift);
            sandwich(&a, &regularized_degrees(g, tau)?)
        }
    };
    Ok(OperatorMatrix {
        kind: OperatorKind::Type2(tau.clone()),
        matrix,
        symmetric: true,
    })
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha >= T::zero() && alpha <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("α = {alpha} outside [0, 1]")))
    }
}

/// `𝒯_α = (1 − α) D^{-1} A + α F`, `F = 11ᵀ/n`. Rows of isolated vertices
/// are taken to be uniform.
pub fn pagerank_matrix<T: Real>(g: &Graph<T>, alpha: T) -> Result<OperatorMatrix<T>> {
    check_alpha(alpha)?;
    let n = g.n();
    let teleport = alpha / T::from_count(n);
    let a = g.adjacency().to_dense();
    let d = g.degrees();
    let uniform = T::one() / T::from_count(n);
    let matrix = Array2::from_shape_fn((n, n), |(x, y)| {
        let walk = if d[x] > T::zero() { a[[x, y]] / d[x] } else { uniform };
        (T::one() - alpha) * walk + teleport
    });
    Ok(OperatorMatrix {
        kind: OperatorKind::PageRank(alpha),
        matrix,
        symmetric: false,
    })
}

/// Type-III regularization is the PageRank matrix.
pub fn reg_laplacian_type3<T: Real>(g: &Graph<T>, alpha: T) -> Result<OperatorMatrix<T>> {
    pagerank_matrix(g, alpha)
}

pub const PAGERANK_MAX_ITERATIONS: usize = 100_000;

/// Left stationary vector of [`pagerank_matrix`] by power iteration, stopping
/// when the L1 change drops below `tol`.
pub fn pagerank_scores<T: Real>(g: &Graph<T>, alpha: T, tol: T) -> Result<VertexDistribution<T>> {
    check_alpha(alpha)?;
    let n = g.n();
    let nf = T::from_count(n);
    if alpha == T::one() {
        return VertexDistribution::new(vec![T::one() / nf; n], Provenance::Stationary);
    }
    let d = g.degrees();
    let adjacency = g.adjacency();
    let mut x = vec![T::one() / nf; n];
    let mut residual = T::infinity();
    for _ in 0..PAGERANK_MAX_ITERATIONS {
        let total: T = x.iter().copied().sum();
        let dangling: T = x
            .iter()
            .zip(d)
            .filter(|(_, d)| **d == T::zero())
            .map(|(v, _)| *v)
            .sum();
        let scaled: Vec<T> = x
            .iter()
            .zip(d)
            .map(|(v, dv)| if *dv > T::zero() { *v / *dv } else { T::zero() })
            .collect();
        // A is symmetric, so xᵀ D⁻¹ A = (A (D⁻¹ x))ᵀ.
        let walk = adjacency.matvec(&scaled);
        let base = (T::one() - alpha) * dangling / nf + alpha * total / nf;
        let next: Vec<T> = walk.iter().map(|w| (T::one() - alpha) * *w + base).collect();
        residual = next.iter().zip(&x).map(|(a, b)| (*a - *b).abs()).sum();
        x = next;
        if residual < tol {
            let total: T = x.iter().copied().sum();
            let probs = x.into_iter().map(|v| v / total).collect();
            return VertexDistribution::new(probs, Provenance::Stationary);
        }
    }
    Err(Error::NoConvergence {
        iterations: PAGERANK_MAX_ITERATIONS,
        residual: residual.as_f64(),
    })
}

/// Number of connected components among all vertices.
pub fn connected_components<T: Scalar>(g: &Graph<T>) -> usize {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            g.adjacency().for_each_in_row(x, |y, _| {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            });
        }
    }
    count
}

/// Diffusion-map coordinates `λ_k^t φ_k(x)` at time `t`.
#[derive(Debug, Clone)]
pub struct DiffusionCoordinates<T> {
    pub t: f64,
    /// `n × k`.
    pub coords: Array2<T>,
    pub eigenvalues: Vec<T>,
    /// `n × k` unscaled eigenfunctions `φ_k = D_p^{-1/2} u_k`.
    pub eigenfunctions: Array2<T>,
}

fn time_power<T: Real>(lambda: T, t: f64) -> T {
    if t.fract() == 0.0 && t.abs() <= i32::MAX as f64 {
        lambda.powi(t as i32)
    } else {
        lambda.signum() * lambda.abs().powf(T::from_f64_lossy(t))
    }
}

/// Diffusion map from the block-pulse engine, keeping the `k` components of
/// largest magnitude. Integer `t` is exact; for fractional `t` negative
/// eigenvalues use `sign(λ)|λ|^t`.
pub fn diffusion_map<T: Real>(g: &Graph<T>, t: f64, k: usize) -> Result<DiffusionCoordinates<T>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("diffusion time {t} must be >= 0")));
    }
    require_positive_degrees(g)?;
    if connected_components(g) > 1 {
        log::warn!("graph is disconnected; the stationary distribution is not unique");
    }
    let embedding = unified_spectral(
        g,
        BasisSpec::BlockPulse,
        None,
        k,
        &EngineOptions::with_view(SpectrumView::Singular),
    )?;
    if t.fract() != 0.0 && embedding.eigenvalues.iter().any(|l| *l < T::zero()) {
        log::warn!("fractional diffusion time with negative eigenvalues: using sign(λ)|λ|^t");
    }
    let powers: Vec<T> = embedding.eigenvalues.iter().map(|l| time_power(*l, t)).collect();
    let coords = Array2::from_shape_fn(embedding.coordinates.dim(), |(x, c)| {
        powers[c] * embedding.coordinates[[x, c]]
    });
    Ok(DiffusionCoordinates {
        t,
        coords,
        eigenvalues: embedding.eigenvalues,
        eigenfunctions: embedding.coordinates,
    })
}

impl<T: Real> DiffusionCoordinates<T> {
    /// `1 + Σ_k λ_k^{t'} φ_k(x) φ_k(y)` at any time `t'`.
    pub fn kernel_at(&self, t: f64) -> Array2<T> {
        let (n, k) = self.eigenfunctions.dim();
        let mut out = Array2::from_elem((n, n), T::one());
        for c in 0..k {
            let w = time_power(self.eigenvalues[c], t);
            for x in 0..n {
                let a = w * self.eigenfunctions[[x, c]];
                for y in 0..n {
                    out[[x, y]] += a * self.eigenfunctions[[y, c]];
                }
            }
        }
        out
    }
}

/// `D_t(x, x')`: Euclidean distance between diffusion coordinates.
pub fn diffusion_distance<T: Real>(dc: &DiffusionCoordinates<T>, x: usize, y: usize) -> T {
    dc.coords
        .row(x)
        .iter()
        .zip(dc.coords.row(y))
        .map(|(a, b)| (*a - *b) * (*a - *b))
        .sum::<T>()
        .sqrt()
}

/// `N · 𝒯^t · D^{-1}` by repeated multiplication.
pub fn diffusion_kernel<T: Real>(g: &Graph<T>, t: u32) -> Result<Array2<T>> {
    let walk = random_walk(g)?.matrix;
    let n = g.n();
    let mut power = Array2::from_shape_fn((n, n), |(i, j)| if i == j { T::one() } else { T::zero() });
    for _ in 0..t {
        power = power.dot(&walk);
    }
    let vol = *g.volume();
    let d = g.degrees();
    Ok(Array2::from_shape_fn((n, n), |(x, y)| vol * power[[x, y]] / d[y]))
}

/// G-matrix of the τ-smoothed block-pulse trial basis against the empirical
/// network pmf; equals `((N+nτ)/N)·Type-I − v_τ v_τᵀ`.
pub fn type1_gmatrix<T: Real>(g: &Graph<T>, tau: &Tau<T>) -> Result<GMatrix<T>> {
    let smoothed = laplace_smooth_vertex(g.degrees(), g.volume(), tau)?;
    let basis = bpf_basis(&smoothed)?;
    Ok(gmatrix_from_network(&empirical_network_pmf(g), &basis))
}

/// G-matrix of the fully smoothed GraField under its own block pulses;
/// equals `Type-II − v vᵀ`.
pub fn type2_gmatrix<T: Real>(g: &Graph<T>, tau: &Tau<T>) -> Result<GMatrix<T>> {
    let vertex = laplace_smooth_vertex(g.degrees(), g.volume(), tau)?;
    let network = laplace_smooth_network(g, tau)?;
    let basis = bpf_on_support(&vertex);
    Ok(gmatrix_from_network(&network, &basis))
}

/// `((N+nτ)/N)·Type-I − v_τ v_τᵀ` with `v_τ = √p̂_τ`.
pub fn type1_identity_target<T: Real>(g: &Graph<T>, tau: &Tau<T>) -> Result<Array2<T>> {
    let t = match tau {
        Tau::Finite(t) => *t,
        Tau::Infinite => {
            return Err(Error::BadShrinkage(
                "Type-I identity needs a finite τ".into(),
            ))
        }
    };
    let l1 = reg_laplacian_type1(g, tau)?.matrix;
    let p = laplace_smooth_vertex(g.degrees(), g.volume(), tau)?;
    let n = T::from_count(g.n());
    let vol = *g.volume();
    let factor = (vol + n * t) / vol;
    let root: Vec<T> = p.probs().iter().map(|q| q.sqrt()).collect();
    Ok(Array2::from_shape_fn(l1.dim(), |(x, y)| {
        factor * l1[[x, y]] - root[x] * root[y]
    }))
}

/// `Type-II − v vᵀ` with `v = √(d+τ)/√(N+nτ)`.
pub fn type2_identity_target<T: Real>(g: &Graph<T>, tau: &Tau<T>) -> Result<Array2<T>> {
    let l2 = reg_laplacian_type2(g, tau)?.matrix;
    let p = laplace_smooth_vertex(g.degrees(), g.volume(), tau)?;
    let root: Vec<T> = p.probs().iter().map(|q| q.sqrt()).collect();
    Ok(Array2::from_shape_fn(l2.dim(), |(x, y)| {
        l2[[x, y]] - root[x] * root[y]
    }))
}
