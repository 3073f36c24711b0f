//! The GraField kernel and the orthonormal systems it is projected onto.
//!
//! For a vertex pmf `p` with cdf `F` and quantile `Q`, the GraField is the
//! piecewise-constant kernel on the unit square
//!
//! ```text
//! C(u, v) = P(Q(u), Q(v)) / (p(Q(u)) · p(Q(v)))
//! ```
//!
//! Every basis here is a vertex-domain function `ξ_j(x)` lifted to the unit
//! interval through the quantile, `η_j(u) = ξ_j(Q(u))`, so inner products on
//! `[0, 1]` reduce to `p`-weighted sums over vertices.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{NetworkDistribution, VertexDistribution};
use crate::scalar::{Real, Scalar};

/// Piecewise-constant kernel `P(x,y)/(p(x)p(y))` over the support of `p`.
#[derive(Debug, Clone)]
pub struct GraField<T> {
    vertex: VertexDistribution<T>,
    network: NetworkDistribution<T>,
    support: Vec<usize>,
}

/// Pairs a vertex pmf with a network pmf whose row sums agree with it.
pub fn build_grafield<T: Scalar>(
    vertex: VertexDistribution<T>,
    network: NetworkDistribution<T>,
) -> Result<GraField<T>> {
    if vertex.n() != network.n() {
        return Err(Error::InconsistentDistributions(format!(
            "vertex pmf has {} entries, network pmf is {}x{}",
            vertex.n(),
            network.n(),
            network.n()
        )));
    }
    let tol = T::from_f64_lossy(1e-9);
    for (x, (m, p)) in network.marginals().iter().zip(vertex.probs()).enumerate() {
        if (m.clone() - p.clone()).abs_val() > tol {
            return Err(Error::InconsistentDistributions(format!(
                "row {x}: network marginal {m} vs vertex mass {p}"
            )));
        }
    }
    let support = (0..vertex.n())
        .filter(|&x| !vertex.prob(x).is_zero())
        .collect();
    Ok(GraField {
        vertex,
        network,
        support,
    })
}

impl<T: Scalar> GraField<T> {
    pub fn n(&self) -> usize {
        self.vertex.n()
    }

    pub fn vertex_dist(&self) -> &VertexDistribution<T> {
        &self.vertex
    }

    pub fn network_dist(&self) -> &NetworkDistribution<T> {
        &self.network
    }

    /// Vertices with positive mass.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Kernel value for a vertex pair; `None` off the support.
    pub fn value(&self, x: usize, y: usize) -> Option<T> {
        let (px, py) = (self.vertex.prob(x), self.vertex.prob(y));
        if px.is_zero() || py.is_zero() {
            return None;
        }
        Some(self.network.prob(x, y) / (px.clone() * py.clone()))
    }

    /// Dense `n × n` table, zero outside the support.
    pub fn table(&self) -> Array2<T> {
        let n = self.n();
        Array2::from_shape_fn((n, n), |(x, y)| self.value(x, y).unwrap_or_else(T::zero))
    }

    /// `C(u, v)` through the left-continuous quantile.
    pub fn eval(&self, u: &T, v: &T) -> Result<T> {
        let x = self.vertex.quantile(u)?;
        let y = self.vertex.quantile(v)?;
        Ok(self.value(x, y).unwrap_or_else(T::zero))
    }

    /// `∬ C du dv = Σ C(x,y) p(x) p(y)`.
    pub fn total_mass(&self) -> T {
        let mut s = T::zero();
        for &x in &self.support {
            for &y in &self.support {
                s += self.network.prob(x, y);
            }
        }
        s
    }

    /// `Σ_y C(x,y) p(y)` for a support vertex `x`.
    pub fn slice_mass(&self, x: usize) -> T {
        let mut s = T::zero();
        for &y in &self.support {
            s += self.network.prob(x, y);
        }
        s / self.vertex.prob(x).clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Degree-adaptive block pulses, amplitude `p(j)^{-1/2}`.
    BlockPulse,
    /// Unit indicators on the same cdf intervals.
    Characteristic,
    /// Orthonormal polynomials of the mid-distribution rank transform.
    Lp,
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BasisKind::BlockPulse => "bpf",
            BasisKind::Characteristic => "characteristic",
            BasisKind::Lp => "lp",
        })
    }
}

/// Vertex-domain values of the basis functions.
#[derive(Debug, Clone)]
pub enum BasisValues<T> {
    /// `ξ_j(x) = amplitude_j · [x = vertex_j]`.
    Indicator { vertices: Vec<usize>, amplitudes: Vec<T> },
    /// Row `j` holds `ξ_j(·)`.
    Dense(Array2<T>),
}

/// A finite system of piecewise-constant functions on `(0, 1]`.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis<T> {
    kind: BasisKind,
    values: BasisValues<T>,
    measure: VertexDistribution<T>,
    gram: Array2<T>,
}

impl<T: Real> OrthonormalBasis<T> {
    fn new(kind: BasisKind, values: BasisValues<T>, measure: VertexDistribution<T>) -> Self {
        let mut basis = Self {
            kind,
            values,
            measure,
            gram: Array2::zeros((0, 0)),
        };
        basis.gram = basis.compute_gram();
        basis
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        match &self.values {
            BasisValues::Indicator { vertices, .. } => vertices.len(),
            BasisValues::Dense(v) => v.nrows(),
        }
    }

    pub fn n(&self) -> usize {
        self.measure.n()
    }

    pub fn measure(&self) -> &VertexDistribution<T> {
        &self.measure
    }

    pub fn values(&self) -> &BasisValues<T> {
        &self.values
    }

    /// `S_jl = Σ_x ξ_j(x) ξ_l(x) p(x)`.
    pub fn gram(&self) -> &Array2<T> {
        &self.gram
    }

    /// Cdf grid `{0, u_1, …, u_n}` on which every `η_j` is a step function.
    pub fn breakpoints(&self) -> Vec<T> {
        std::iter::once(T::zero())
            .chain(self.measure.cdf().iter().copied())
            .collect()
    }

    pub fn value(&self, j: usize, x: usize) -> T {
        match &self.values {
            BasisValues::Indicator {
                vertices,
                amplitudes,
            } => {
                if vertices[j] == x {
                    amplitudes[j]
                } else {
                    T::zero()
                }
            }
            BasisValues::Dense(v) => v[[j, x]],
        }
    }

    /// `η_j(u) = ξ_j(Q(u))`.
    pub fn eval(&self, j: usize, u: T) -> Result<T> {
        Ok(self.value(j, self.measure.quantile(&u)?))
    }

    /// `m × n` value table.
    pub fn to_dense(&self) -> Array2<T> {
        match &self.values {
            BasisValues::Dense(v) => v.clone(),
            BasisValues::Indicator {
                vertices,
                amplitudes,
            } => {
                let mut out = Array2::zeros((vertices.len(), self.n()));
                for (j, (&x, &a)) in vertices.iter().zip(amplitudes).enumerate() {
                    out[[j, x]] = a;
                }
                out
            }
        }
    }

    /// `∫₀¹ η_j(u) du = Σ_x ξ_j(x) p(x)` for every `j`.
    pub fn integrals(&self) -> Vec<T> {
        let p = self.measure.probs();
        match &self.values {
            BasisValues::Indicator {
                vertices,
                amplitudes,
            } => vertices
                .iter()
                .zip(amplitudes)
                .map(|(&x, &a)| a * p[x])
                .collect(),
            BasisValues::Dense(v) => v
                .rows()
                .into_iter()
                .map(|row| row.iter().zip(p).map(|(a, b)| *a * *b).sum())
                .collect(),
        }
    }

    /// `Σ_j c_j ξ_j(x)` for every vertex.
    pub fn combine(&self, coeffs: &[T]) -> Vec<T> {
        assert_eq!(coeffs.len(), self.m());
        let mut out = vec![T::zero(); self.n()];
        match &self.values {
            BasisValues::Indicator {
                vertices,
                amplitudes,
            } => {
                for ((&x, &a), &c) in vertices.iter().zip(amplitudes).zip(coeffs) {
                    out[x] += a * c;
                }
            }
            BasisValues::Dense(v) => {
                for (row, &c) in v.rows().into_iter().zip(coeffs) {
                    for (o, a) in out.iter_mut().zip(row) {
                        *o += *a * c;
                    }
                }
            }
        }
        out
    }

    /// `Σ_x ξ_j(x) f(x) p(x)` for every `j`.
    pub fn project(&self, f: &[T]) -> Vec<T> {
        let p = self.measure.probs();
        match &self.values {
            BasisValues::Indicator {
                vertices,
                amplitudes,
            } => vertices
                .iter()
                .zip(amplitudes)
                .map(|(&x, &a)| a * f[x] * p[x])
                .collect(),
            BasisValues::Dense(v) => v
                .rows()
                .into_iter()
                .map(|row| {
                    row.iter()
                        .zip(f)
                        .zip(p)
                        .map(|((a, b), c)| *a * *b * *c)
                        .sum()
                })
                .collect(),
        }
    }

    fn compute_gram(&self) -> Array2<T> {
        let m = self.m();
        let p = self.measure.probs();
        match &self.values {
            BasisValues::Indicator {
                vertices,
                amplitudes,
            } => {
                let mut g = Array2::zeros((m, m));
                for (j, (&x, &a)) in vertices.iter().zip(amplitudes).enumerate() {
                    g[[j, j]] = a * a * p[x];
                }
                g
            }
            BasisValues::Dense(v) => {
                let weighted = Array2::from_shape_fn(v.dim(), |(j, x)| v[[j, x]] * p[x]);
                v.dot(&weighted.t())
            }
        }
    }
}

fn positive_support<T: Real>(vdist: &VertexDistribution<T>) -> Vec<usize> {
    (0..vdist.n())
        .filter(|&x| *vdist.prob(x) > T::zero())
        .collect()
}

fn require_full_support<T: Real>(vdist: &VertexDistribution<T>) -> Result<()> {
    let zeros = vdist.zero_mass();
    if zeros.is_empty() {
        Ok(())
    } else {
        Err(Error::DegenerateAmplitude(zeros))
    }
}

/// Degree-adaptive block-pulse functions; requires every vertex to carry mass.
pub fn bpf_basis<T: Real>(vdist: &VertexDistribution<T>) -> Result<OrthonormalBasis<T>> {
    require_full_support(vdist)?;
    Ok(bpf_on_support(vdist))
}

/// Block pulses over the positive-mass vertices only.
pub fn bpf_on_support<T: Real>(vdist: &VertexDistribution<T>) -> OrthonormalBasis<T> {
    let vertices = positive_support(vdist);
    let amplitudes = vertices
        .iter()
        .map(|&x| T::one() / vdist.prob(x).sqrt())
        .collect();
    OrthonormalBasis::new(
        BasisKind::BlockPulse,
        BasisValues::Indicator {
            vertices,
            amplitudes,
        },
        vdist.clone(),
    )
}

/// Unit-amplitude indicators; the Gram matrix is `diag(p)`.
pub fn char_basis<T: Real>(vdist: &VertexDistribution<T>) -> Result<OrthonormalBasis<T>> {
    require_full_support(vdist)?;
    Ok(char_on_support(vdist))
}

pub fn char_on_support<T: Real>(vdist: &VertexDistribution<T>) -> OrthonormalBasis<T> {
    let vertices = positive_support(vdist);
    let amplitudes = vec![T::one(); vertices.len()];
    OrthonormalBasis::new(
        BasisKind::Characteristic,
        BasisValues::Indicator {
            vertices,
            amplitudes,
        },
        vdist.clone(),
    )
}

/// Standardized mid-distribution rank transform
/// `T₁(x) = √12 (F^mid(x) − ½) / √(1 − Σp³)`.
pub fn lp_score<T: Real>(vdist: &VertexDistribution<T>) -> Result<Vec<T>> {
    let cube: T = vdist.probs().iter().map(|p| *p * *p * *p).sum();
    let denom = (T::one() - cube).sqrt();
    if !(denom > T::zero()) {
        return Err(Error::LpRankExceeded {
            requested: 1,
            max: 0,
        });
    }
    let root12 = T::from_f64_lossy(12f64.sqrt());
    let half = T::from_f64_lossy(0.5);
    Ok(vdist
        .mid_cdf()
        .into_iter()
        .map(|f| root12 * (f - half) / denom)
        .collect())
}

/// Largest admissible LP basis size: distinct `T₁` values on the support, minus one.
pub fn lp_rank_cap<T: Real>(vdist: &VertexDistribution<T>) -> Result<usize> {
    let t1 = lp_score(vdist)?;
    let mut vals: Vec<T> = positive_support(vdist).iter().map(|&x| t1[x]).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    vals.dedup();
    Ok(vals.len().saturating_sub(1))
}

/// Relative norm below which a new polynomial direction counts as dependent.
const LP_DEPENDENCE_TOL: f64 = 1e-8;

/// LP polynomial basis `T_1, …, T_m`, orthonormal and mean-zero under `p`.
///
/// `T_j` is obtained by orthonormalizing `T₁ · T_{j−1}` against the constant
/// and all earlier `T`s (two passes). This spans the same nested polynomial
/// spaces as the raw powers of `T₁` with the same positive leading
/// coefficients, without their conditioning problems.
pub fn lp_basis<T: Real>(vdist: &VertexDistribution<T>, m: usize) -> Result<OrthonormalBasis<T>> {
    let n = vdist.n();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("LP basis needs n >= 2, got {n}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("LP basis size must be >= 1".into()));
    }
    let cap = lp_rank_cap(vdist)?;
    if m > cap {
        return Err(Error::LpRankExceeded {
            requested: m,
            max: cap,
        });
    }
    let p = vdist.probs();
    let inner = |a: &[T], b: &[T]| -> T { a.iter().zip(b).zip(p).map(|((x, y), w)| *x * *y * *w).sum() };

    let t1 = lp_score(vdist)?;
    let constant = vec![T::one(); n];
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut candidate = t1.clone();
    for j in 0..m {
        if j > 0 {
            candidate = t1.iter().zip(&rows[j - 1]).map(|(a, b)| *a * *b).collect();
        }
        let before = inner(&candidate, &candidate).sqrt();
        for _ in 0..2 {
            let c = inner(&candidate, &constant);
            for x in candidate.iter_mut() {
                *x -= c;
            }
            for prev in &rows {
                let c = inner(&candidate, prev);
                for (x, y) in candidate.iter_mut().zip(prev) {
                    *x -= c * *y;
                }
            }
        }
        let after = inner(&candidate, &candidate).sqrt();
        if !(after > T::from_f64_lossy(LP_DEPENDENCE_TOL) * before) {
            return Err(Error::LpRankExceeded {
                requested: m,
                max: j,
            });
        }
        for x in candidate.iter_mut() {
            *x /= after;
        }
        rows.push(candidate.clone());
    }
    let values = Array2::from_shape_fn((m, n), |(j, x)| rows[j][x]);
    Ok(OrthonormalBasis::new(
        BasisKind::Lp,
        BasisValues::Dense(values),
        vdist.clone(),
    ))
}
