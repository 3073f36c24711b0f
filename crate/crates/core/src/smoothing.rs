//! Shrinkage estimators for vertex, network and transition probabilities.
//!
//! Additive (Laplace) smoothing pulls the empirical pmf towards the uniform
//! distribution with a flattening constant `τ`:
//!
//! ```text
//! p̂_τ(j) = (d_j + τ) / (N + nτ) = N/(N+nτ) · p̃(j) + nτ/(N+nτ) · 1/n
//! ```
//!
//! Applying the same recipe to the network pmf replaces `A` by
//! `A + (τ/n)·11ᵀ`, and applying it row-wise to the random walk gives the
//! degree-adaptive teleportation matrix. The regularized operators in
//! [`crate::operators`] are these estimators pushed through the G-matrix.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{Graph, NetworkDistribution, Provenance, VertexDistribution};
use crate::scalar::{Real, Scalar};

/// A resolved flattening constant, possibly infinite (total shrinkage).
#[derive(Debug, Clone, PartialEq)]
pub enum Tau<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Tau<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Tau::Finite(t) => Some(t),
            Tau::Infinite => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Tau::Finite(t) => t.as_f64(),
            Tau::Infinite => f64::INFINITY,
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            Tau::Finite(t) if *t < T::zero() => Err(Error::BadShrinkage(format!("τ = {t} < 0"))),
            _ => Ok(()),
        }
    }
}

/// Named shrinkage presets.
#[derive(Debug, Clone, PartialEq)]
pub enum TauKind<T> {
    Laplace,
    KrichevskyTrofimov,
    Perks,
    Minimax,
    SteinOptimal,
    Fixed(T),
}

impl<T: Scalar> FromStr for TauKind<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "laplace" => Ok(TauKind::Laplace),
            "kt" | "krichevsky-trofimov" => Ok(TauKind::KrichevskyTrofimov),
            "perks" => Ok(TauKind::Perks),
            "minimax" => Ok(TauKind::Minimax),
            "stein" | "stein-optimal" => Ok(TauKind::SteinOptimal),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .and_then(T::from_f64)
                .map(TauKind::Fixed)
                .ok_or_else(|| Error::UnknownPreset(s.to_string())),
        }
    }
}

impl<T: fmt::Display> fmt::Display for TauKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauKind::Laplace => f.write_str("laplace"),
            TauKind::KrichevskyTrofimov => f.write_str("krichevsky-trofimov"),
            TauKind::Perks => f.write_str("perks"),
            TauKind::Minimax => f.write_str("minimax"),
            TauKind::SteinOptimal => f.write_str("stein-optimal"),
            TauKind::Fixed(t) => write!(f, "fixed({t})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauChoice<T> {
    pub kind: TauKind<T>,
    pub value: Tau<T>,
}

/// Resolves a preset against a graph's degree sequence.
pub fn resolve_tau<T: Real>(kind: TauKind<T>, degrees: &[T]) -> Result<TauChoice<T>> {
    let n = degrees.len();
    let total: T = degrees.iter().copied().sum();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 vertices, got {n}")));
    }
    if total <= T::zero() {
        return Err(Error::EmptyGraph);
    }
    let nf = T::from_count(n);
    let value = match &kind {
        TauKind::Laplace => Tau::Finite(T::one()),
        TauKind::KrichevskyTrofimov => Tau::Finite(T::from_f64_lossy(0.5)),
        TauKind::Perks => Tau::Finite(T::one() / nf),
        TauKind::Minimax => Tau::Finite(total.sqrt() / nf),
        TauKind::SteinOptimal => stein_optimal_tau(degrees),
        TauKind::Fixed(t) => {
            let tau = Tau::Finite(*t);
            tau.check()?;
            tau
        }
    };
    Ok(TauChoice { kind, value })
}

/// Closed-form MSE-optimal flattening constant estimated from degrees,
/// `(N² − Σd²) / (nΣd² − N²)`. A regular degree sequence makes the
/// denominator vanish; the empirical pmf is then already uniform and the
/// result is [`Tau::Infinite`].
pub fn stein_optimal_tau<T: Scalar>(degrees: &[T]) -> Tau<T> {
    let mut total = T::zero();
    let mut sum_sq = T::zero();
    for d in degrees {
        total += d.clone();
        sum_sq += d.clone() * d.clone();
    }
    let total_sq = total.clone() * total;
    let denom = T::from_count(degrees.len()) * sum_sq.clone() - total_sq.clone();
    if denom <= T::zero() {
        Tau::Infinite
    } else {
        Tau::Finite((total_sq - sum_sq) / denom)
    }
}

/// Population form of the optimal constant for a known pmf,
/// `(1 − Σp²) / (nΣp² − 1)`.
pub fn stein_optimal_tau_for_pmf<T: Scalar>(p: &VertexDistribution<T>) -> Tau<T> {
    let mut sum_sq = T::zero();
    for q in p.probs() {
        sum_sq += q.clone() * q.clone();
    }
    let denom = T::from_count(p.n()) * sum_sq.clone() - T::one();
    if denom <= T::zero() {
        Tau::Infinite
    } else {
        Tau::Finite((T::one() - sum_sq) / denom)
    }
}

/// `p̂_τ(j) = (d_j + τ)/(N + nτ)`; `τ = ∞` gives the exact uniform pmf.
pub fn laplace_smooth_vertex<T: Scalar>(
    degrees: &[T],
    total: &T,
    tau: &Tau<T>,
) -> Result<VertexDistribution<T>> {
    tau.check()?;
    if *total <= T::zero() {
        return Err(Error::EmptyGraph);
    }
    let n = T::from_count(degrees.len());
    let probs = match tau {
        Tau::Infinite => vec![T::one() / n; degrees.len()],
        Tau::Finite(t) => {
            let denom = total.clone() + n * t.clone();
            degrees
                .iter()
                .map(|d| (d.clone() + t.clone()) / denom.clone())
                .collect()
        }
    };
    VertexDistribution::new(probs, Provenance::Laplace(tau.clone()))
}

/// Pmf of `A_τ = A + (τ/n)·11ᵀ`, i.e. `(A(j,k) + τ/n)/(N + nτ)`.
pub fn laplace_smooth_network<T: Scalar>(
    g: &Graph<T>,
    tau: &Tau<T>,
) -> Result<NetworkDistribution<T>> {
    tau.check()?;
    let n = T::from_count(g.n());
    let (scale, offset, total) = match tau {
        Tau::Infinite => (T::zero(), T::one(), n.clone() * n),
        Tau::Finite(t) => (
            T::one(),
            t.clone() / n.clone(),
            g.volume().clone() + n * t.clone(),
        ),
    };
    Ok(NetworkDistribution::from_parts(
        g.shared_adjacency(),
        scale,
        offset,
        total,
        Provenance::Laplace(tau.clone()),
    ))
}

/// Degree-adaptive teleport weights `α_τ(i) = τ/(d_i + τ)`.
pub fn teleport_weights<T: Scalar>(degrees: &[T], tau: &Tau<T>) -> Result<Vec<T>> {
    tau.check()?;
    degrees
        .iter()
        .enumerate()
        .map(|(i, d)| match tau {
            Tau::Infinite => Ok(T::one()),
            Tau::Finite(t) => {
                let denom = d.clone() + t.clone();
                if denom.is_zero() {
                    Err(Error::DanglingVertex(i))
                } else {
                    Ok(t.clone() / denom)
                }
            }
        })
        .collect()
}

/// Row-smoothed transition matrix `T̂_τ(i,j) = (A(i,j) + τ/n)/(d_i + τ)`.
pub fn smooth_transition<T: Scalar>(g: &Graph<T>, tau: &Tau<T>) -> Result<Array2<T>> {
    tau.check()?;
    let n = g.n();
    let nf = T::from_count(n);
    let a = g.adjacency().to_dense();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        match tau {
            Tau::Infinite => out.row_mut(i).fill(T::one() / nf.clone()),
            Tau::Finite(t) => {
                let denom = g.degrees()[i].clone() + t.clone();
                if denom.is_zero() {
                    return Err(Error::DanglingVertex(i));
                }
                let shift = t.clone() / nf.clone();
                for j in 0..n {
                    out[[i, j]] = (a[[i, j]].clone() + shift.clone()) / denom.clone();
                }
            }
        }
    }
    Ok(out)
}

/// Good-Turing estimate `(ϖ_{d+1}/ϖ_d)·(d+1)/N`, renormalized to a pmf.
/// The raw masses are kept in the provenance.
pub fn good_turing<T: Scalar>(degrees: &[T]) -> Result<VertexDistribution<T>> {
    let counts: Vec<u64> = degrees
        .iter()
        .enumerate()
        .map(|(i, d)| {
            d.to_u64()
                .filter(|k| T::from_u64(*k).as_ref() == Some(d))
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "Good-Turing needs integer degrees; vertex {i} has {d}"
                    ))
                })
        })
        .collect::<Result<_>>()?;
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut freq_of_freq = std::collections::HashMap::<u64, u64>::new();
    for &k in &counts {
        *freq_of_freq.entry(k).or_default() += 1;
    }
    let big_n = T::from_u64(total).expect("total degree fits");
    let raw: Vec<T> = counts
        .iter()
        .map(|&k| {
            let here = freq_of_freq[&k];
            let next = freq_of_freq.get(&(k + 1)).copied().unwrap_or(0);
            T::from_u64(next * (k + 1)).unwrap() / (T::from_u64(here).unwrap() * big_n.clone())
        })
        .collect();
    let mut raw_total = T::zero();
    for r in &raw {
        raw_total += r.clone();
    }
    if raw_total.is_zero() {
        return Err(Error::DegenerateGoodTuring(
            "no degree class has an occupied successor class".into(),
        ));
    }
    let probs = raw.iter().map(|r| r.clone() / raw_total.clone()).collect();
    VertexDistribution::new(probs, Provenance::GoodTuring { raw })
}

/// Sampled risk function.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskCurve<T> {
    pub taus: Vec<T>,
    pub risks: Vec<T>,
}

impl<T: Scalar> RiskCurve<T> {
    /// Grid point with the smallest risk (first on ties).
    pub fn argmin(&self) -> Option<&T> {
        let mut best: Option<usize> = None;
        for (i, r) in self.risks.iter().enumerate() {
            if best.is_none_or(|b| *r < self.risks[b]) {
                best = Some(i);
            }
        }
        best.map(|i| &self.taus[i])
    }
}

/// Mean squared error of the Laplace estimator at flattening constant `τ`
/// when `sample_size` draws come from `p_true`:
/// `(1 − 2s)·ΣVar(p̃_i) + s²·ΣE(p̃_i − 1/n)²` with `s = nτ/(N+nτ)`.
pub fn mse_risk<T: Scalar>(p_true: &VertexDistribution<T>, sample_size: usize, tau: &T) -> Result<T> {
    if *tau < T::zero() {
        return Err(Error::BadShrinkage(format!("τ = {tau} < 0")));
    }
    if sample_size == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    let n = T::from_count(p_true.n());
    let big_n = T::from_count(sample_size);
    let uniform = T::one() / n.clone();
    let mut var = T::zero();
    let mut second = T::zero();
    for p in p_true.probs() {
        let v = p.clone() * (T::one() - p.clone()) / big_n.clone();
        let bias = p.clone() - uniform.clone();
        second += v.clone() + bias.clone() * bias;
        var += v;
    }
    let s = n.clone() * tau.clone() / (big_n + n * tau.clone());
    let two = T::one() + T::one();
    Ok((T::one() - two * s.clone()) * var + s.clone() * s * second)
}

pub fn risk_curve<T: Scalar>(
    p_true: &VertexDistribution<T>,
    sample_size: usize,
    taus: &[T],
) -> Result<RiskCurve<T>> {
    let risks = taus
        .iter()
        .map(|t| mse_risk(p_true, sample_size, t))
        .collect::<Result<_>>()?;
    Ok(RiskCurve {
        taus: taus.to_vec(),
        risks,
    })
}
