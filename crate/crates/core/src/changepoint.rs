//! Change-point detection for binary time series through a T-graph.
//!
//! Rows of an [`EventMatrix`] are time points. Pairs of rows are linked with
//! the squared Pearson φ association of their binary profiles, the resulting
//! graph is embedded with the LP-compressed spectral engine, and the leading
//! coordinate is clustered in one dimension. Label changes along time become
//! the reported boundaries.
//!
//! The LP coordinate is a low-degree polynomial in time, so its own labels
//! hardly ever flicker, even on pure noise. Stability is therefore judged by
//! clustering the uncompressed leading coordinate (block-pulse basis) and
//! counting how often those labels disagree with the LP segments. With a real
//! change both agree; without one the uncompressed coordinate is noise and
//! roughly a third of the rows disagree.

use ndarray::Array2;
use rayon::prelude::*;

use crate::engine::{lp_spectral, unified_spectral, BasisSpec, EngineOptions, SpectrumView};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Real;

/// Uncompressed embeddings above this many vertices use the Krylov solver.
const RAW_DENSE_LIMIT: usize = 400;

/// Width of the centred majority filter applied to labels along time.
pub const SMOOTHING_WINDOW: usize = 5;
/// Segmentations whose impurity exceeds this are flagged as unstable.
pub const IMPURITY_THRESHOLD: f64 = 0.2;

/// Binary time × feature matrix with optional row timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct EventMatrix {
    values: Array2<u8>,
    timestamps: Option<Vec<String>>,
}

impl EventMatrix {
    pub fn new(values: Array2<u8>, timestamps: Option<Vec<String>>) -> Result<Self> {
        let (n, d) = values.dim();
        if n < 2 || d < 1 {
            return Err(Error::InvalidEventMatrix(format!(
                "need at least 2 rows and 1 column, got {n}x{d}"
            )));
        }
        if let Some(((r, c), v)) = values.indexed_iter().find(|(_, v)| **v > 1) {
            return Err(Error::InvalidEventMatrix(format!(
                "value {v} at row {r}, column {c} is not 0/1"
            )));
        }
        if let Some(ts) = &timestamps {
            if ts.len() != n {
                return Err(Error::InvalidEventMatrix(format!(
                    "{} timestamps for {n} rows",
                    ts.len()
                )));
            }
        }
        Ok(Self { values, timestamps })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidEventMatrix("ragged rows".into()));
        }
        let flat: Vec<u8> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::InvalidEventMatrix(e.to_string()))?;
        Self::new(values, None)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<u8> {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    /// Rows whose entries are all equal.
    pub fn constant_rows(&self) -> Vec<usize> {
        self.values
            .rows()
            .into_iter()
            .enumerate()
            .filter(|(_, r)| r.iter().all(|v| *v == r[0]))
            .map(|(i, _)| i)
            .collect()
    }
}

/// `φ²` between two binary rows, with features as trials. Zero when either
/// row is constant.
pub fn phi_squared<T: Real>(a: &[u8], b: &[u8]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut n11 = 0usize;
    let mut r1 = 0usize;
    let mut c1 = 0usize;
    for (x, y) in a.iter().zip(b) {
        n11 += usize::from(*x & *y);
        r1 += usize::from(*x);
        c1 += usize::from(*y);
    }
    let d = a.len();
    let (n10, n01) = (r1 - n11, c1 - n11);
    let n00 = d + n11 - r1 - c1;
    let (r0, c0) = (d - r1, d - c1);
    if r1 == 0 || r0 == 0 || c1 == 0 || c0 == 0 {
        return T::zero();
    }
    let f = |v: usize| T::from_count(v);
    let num = f(n11) * f(n00) - f(n10) * f(n01);
    let den = (f(r1) * f(r0)) * (f(c1) * f(c0));
    num * num / den
}

/// T-graph over time points weighted by pairwise `φ²`.
pub fn phi2_graph<T: Real>(z: &EventMatrix) -> Result<Graph<T>> {
    let n = z.n();
    let constant = z.constant_rows();
    if !constant.is_empty() {
        log::warn!(
            "{} constant rows get zero association: {:?}",
            constant.len(),
            constant
        );
    }
    let rows: Vec<Vec<u8>> = z.values.rows().into_iter().map(|r| r.to_vec()).collect();
    let upper: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|s| {
            (s + 1..n)
                .map(|t| phi_squared::<T>(&rows[s], &rows[t]))
                .collect()
        })
        .collect();
    let mut a = Array2::<T>::zeros((n, n));
    let mut any = false;
    for (s, row) in upper.iter().enumerate() {
        for (offset, w) in row.iter().enumerate() {
            let t = s + 1 + offset;
            a[[s, t]] = *w;
            a[[t, s]] = *w;
            any |= *w > T::zero();
        }
    }
    if !any {
        return Err(Error::DegenerateAssociation(
            "every pair of rows has zero φ²".into(),
        ));
    }
    Graph::from_dense(a)
}

/// Optimal one-dimensional k-means by dynamic programming.
///
/// Equal values always share a cluster, so fewer than `k` clusters come back
/// when there are fewer than `k` distinct values. Cluster ids are ordered by
/// centre, and among equally good partitions the one with the earliest
/// split points wins.
pub fn kmeans_1d<T: Real>(values: &[T], k: usize) -> Result<Vec<usize>> {
    let n = values.len();
    if k == 0 || n < k {
        return Err(Error::InvalidParameter(format!(
            "k-means needs 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("k-means input is not finite".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap().then(i.cmp(&j)));

    // Distinct values with multiplicities, centred to limit cancellation.
    let mean = values.iter().copied().sum::<T>() / T::from_count(n);
    let mut groups: Vec<(T, usize)> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some((v, c)) if *v == values[i] - mean => *c += 1,
            _ => groups.push((values[i] - mean, 1)),
        }
    }
    let g = groups.len();
    let k_eff = k.min(g);

    let mut cw = vec![T::zero(); g + 1];
    let mut cs = vec![T::zero(); g + 1];
    let mut cq = vec![T::zero(); g + 1];
    for (i, (v, c)) in groups.iter().enumerate() {
        let w = T::from_count(*c);
        cw[i + 1] = cw[i] + w;
        cs[i + 1] = cs[i] + w * *v;
        cq[i + 1] = cq[i] + w * *v * *v;
    }
    // Within-cluster sum of squares of groups [a, b).
    let sse = |a: usize, b: usize| -> T {
        let w = cw[b] - cw[a];
        let s = cs[b] - cs[a];
        (cq[b] - cq[a] - s * s / w).max(T::zero())
    };

    let inf = T::infinity();
    let mut cost = vec![vec![inf; g + 1]; k_eff + 1];
    let mut split = vec![vec![0usize; g + 1]; k_eff + 1];
    cost[0][0] = T::zero();
    for c in 1..=k_eff {
        for b in c..=g {
            for a in (c - 1)..b {
                let candidate = cost[c - 1][a] + sse(a, b);
                if candidate < cost[c][b] {
                    cost[c][b] = candidate;
                    split[c][b] = a;
                }
            }
        }
    }

    let mut group_label = vec![0usize; g];
    let mut b = g;
    for c in (1..=k_eff).rev() {
        let a = split[c][b];
        for l in &mut group_label[a..b] {
            *l = c - 1;
        }
        b = a;
    }
    let mut labels = vec![0usize; n];
    let mut cursor = 0;
    for (gi, (_, count)) in groups.iter().enumerate() {
        for &i in &order[cursor..cursor + count] {
            labels[i] = group_label[gi];
        }
        cursor += count;
    }
    Ok(labels)
}

/// Within-cluster sum of squares of a labelling.
pub fn within_ss<T: Real>(values: &[T], labels: &[usize]) -> T {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sums = vec![T::zero(); k];
    let mut counts = vec![0usize; k];
    for (v, l) in values.iter().zip(labels) {
        sums[*l] += *v;
        counts[*l] += 1;
    }
    values
        .iter()
        .zip(labels)
        .map(|(v, l)| {
            let c = sums[*l] / T::from_count(counts[*l]);
            (*v - c) * (*v - c)
        })
        .sum()
}

/// Centred majority filter. Ties keep the current label.
pub fn majority_smooth(labels: &[usize], window: usize) -> Vec<usize> {
    let half = window / 2;
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; k];
    (0..labels.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(labels.len());
            counts.iter_mut().for_each(|c| *c = 0);
            for l in &labels[lo..hi] {
                counts[*l] += 1;
            }
            let mut best = labels[i];
            for (l, c) in counts.iter().enumerate() {
                if *c > counts[best] {
                    best = l;
                }
            }
            best
        })
        .collect()
}

/// Indices `i` such that the labels of rows `i − 1` and `i` differ, i.e.
/// the change lies between 1-based rows `i` and `i + 1`.
pub fn label_boundaries(labels: &[usize]) -> Vec<usize> {
    (1..labels.len()).filter(|&i| labels[i] != labels[i - 1]).collect()
}

/// Fraction of rows whose label disagrees with the majority label of the
/// segment they fall in. Segments are delimited by `boundaries`.
pub fn segment_impurity(labels: &[usize], boundaries: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let k = labels.iter().copied().max().unwrap() + 1;
    let mut edges = vec![0];
    edges.extend_from_slice(boundaries);
    edges.push(labels.len());
    let mut disagree = 0usize;
    for w in edges.windows(2) {
        let mut counts = vec![0usize; k];
        for l in &labels[w[0]..w[1]] {
            counts[*l] += 1;
        }
        let majority = counts.iter().copied().max().unwrap_or(0);
        disagree += (w[1] - w[0]) - majority;
    }
    disagree as f64 / labels.len() as f64
}

/// Renumbers labels by first appearance along time.
fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ChangePointReport<T> {
    /// Strictly increasing, within `[1, n − 1]`; a boundary `b` separates
    /// 1-based rows `b` and `b + 1`.
    pub boundaries: Vec<usize>,
    /// Majority-smoothed cluster id per row, numbered by first appearance.
    pub labels: Vec<usize>,
    /// Cluster ids from k-means on the LP coordinates, before smoothing.
    pub lp_labels: Vec<usize>,
    /// Cluster ids from the uncompressed leading coordinates.
    pub raw_labels: Vec<usize>,
    /// Leading LP embedding coordinate along time.
    pub phi1: Vec<T>,
    /// Leading uncompressed embedding coordinate along time.
    pub phi1_raw: Vec<T>,
    /// Fraction of `raw_labels` that disagree with the majority of their
    /// segment.
    pub impurity: f64,
    pub unstable: bool,
    pub constant_rows: Vec<usize>,
    pub m: usize,
    pub k: usize,
}

impl<T> ChangePointReport<T> {
    pub fn segments(&self) -> usize {
        self.boundaries.len() + 1
    }
}

/// Divisive clustering: split `s` (1-based) cuts one existing cluster in two
/// on coordinate `s`, choosing the cluster whose split removes the most
/// within-cluster variance.
fn recursive_split<T: Real>(coords: &Array2<T>, k: usize) -> Result<Vec<usize>> {
    let n = coords.nrows();
    let mut labels = vec![0usize; n];
    for s in 1..k {
        let column = coords.column(s - 1);
        let mut best: Option<(T, usize, Vec<usize>, Vec<usize>)> = None;
        for cluster in 0..s {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == cluster).collect();
            if members.len() < 2 {
                continue;
            }
            let vals: Vec<T> = members.iter().map(|&i| column[i]).collect();
            let sub = kmeans_1d(&vals, 2)?;
            let gain = within_ss(&vals, &vec![0; vals.len()]) - within_ss(&vals, &sub);
            if best.as_ref().is_none_or(|b| gain > b.0) {
                best = Some((gain, cluster, members, sub));
            }
        }
        let Some((_, _, members, sub)) = best else {
            break;
        };
        for (i, l) in members.iter().zip(sub) {
            if l == 1 {
                labels[*i] = s;
            }
        }
    }
    Ok(labels)
}

/// Full pipeline: T-graph, LP embedding with `m` basis functions, 1-D
/// clustering into `k` groups and boundary extraction.
pub fn detect_changepoints<T: Real>(
    z: &EventMatrix,
    m: usize,
    k: usize,
) -> Result<ChangePointReport<T>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need k >= 2 clusters, got {k}")));
    }
    let graph = phi2_graph::<T>(z)?;
    let embedding = lp_spectral(
        &graph,
        m,
        k - 1,
        &EngineOptions::with_view(SpectrumView::Singular),
    )?;
    let cluster = |coords: &Array2<T>| -> Result<Vec<usize>> {
        let labels = if k == 2 {
            kmeans_1d(&coords.column(0).to_vec(), 2)?
        } else {
            recursive_split(coords, k)?
        };
        Ok(canonical(&labels))
    };
    let lp_labels = cluster(&embedding.coordinates)?;
    let labels = canonical(&majority_smooth(&lp_labels, SMOOTHING_WINDOW));
    let boundaries = label_boundaries(&labels);

    let raw_options = EngineOptions {
        dense_threshold: RAW_DENSE_LIMIT,
        ..EngineOptions::with_view(SpectrumView::Singular)
    };
    let raw = unified_spectral(&graph, BasisSpec::BlockPulse, None, k - 1, &raw_options)?;
    let raw_labels = cluster(&raw.coordinates)?;
    let impurity = segment_impurity(&raw_labels, &boundaries);
    let unstable = impurity > IMPURITY_THRESHOLD;
    if unstable {
        log::warn!("segmentation impurity {impurity:.3} exceeds {IMPURITY_THRESHOLD}");
    }
    Ok(ChangePointReport {
        boundaries,
        labels,
        lp_labels,
        raw_labels,
        phi1: embedding.coordinate(0),
        phi1_raw: raw.coordinate(0),
        impurity,
        unstable,
        constant_rows: z.constant_rows(),
        m,
        k,
    })
}
