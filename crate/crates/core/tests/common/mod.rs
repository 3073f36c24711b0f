#![allow(dead_code)]

use grafield::{build_graph, EventMatrix, Graph};
use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn toy() -> Graph<f64> {
    build_graph(4, &[(0, 1, 2.0), (1, 2, 3.0), (1, 3, 3.0), (2, 3, 3.0)]).unwrap()
}

/// Connected weighted graph: a random spanning ring plus Erdős–Rényi edges.
pub fn random_connected(seed: u64, n: usize, density: f64) -> Graph<f64> {
    let mut r = rng(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, r.gen_range(0..=i));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push((perm[i], perm[(i + 1) % n], r.gen_range(0.5..3.0)));
    }
    for x in 0..n {
        for y in x + 1..n {
            if r.gen::<f64>() < density {
                edges.push((x, y, r.gen_range(0.1..5.0)));
            }
        }
    }
    build_graph(n, &edges).unwrap()
}

pub fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn adjacency_na(g: &Graph<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(g.n(), g.n(), |i, j| g.weight(i, j))
}

/// `ℒ* = D^{-1/2} A D^{-1/2} − √p √pᵀ` assembled directly.
pub fn laplacian_star_na(g: &Graph<f64>) -> DMatrix<f64> {
    let d = g.degrees();
    let vol = *g.volume();
    DMatrix::from_fn(g.n(), g.n(), |i, j| {
        g.weight(i, j) / (d[i] * d[j]).sqrt() - (d[i] * d[j]).sqrt() / vol
    })
}

/// Eigenpairs sorted by decreasing eigenvalue.
pub fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), idx.len(), |r, c| {
        eig.eigenvectors[(r, idx[c])]
    });
    (values, vectors)
}

/// `sorted_eigen` followed by two steps of shifted inverse iteration on every
/// eigenpair whose eigenvalue is separated from the rest by at least `min_gap`.
/// The stock symmetric solver occasionally leaves eigenvector residuals near
/// 1e-10, which is too loose for the tighter vector comparisons.
pub fn refined_eigen(m: DMatrix<f64>, min_gap: f64) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let (mut values, mut vectors) = sorted_eigen(m.clone());
    let scale = m.amax().max(1.0);
    for k in 0..n {
        let gap = (0..n)
            .filter(|&j| j != k)
            .map(|j| (values[j] - values[k]).abs())
            .fold(f64::INFINITY, f64::min);
        if gap < min_gap {
            continue;
        }
        let shift = values[k] + 1e-13 * scale;
        let lu = (&m - DMatrix::identity(n, n) * shift).lu();
        let mut v = vectors.column(k).into_owned();
        for _ in 0..2 {
            match lu.solve(&v) {
                Some(w) => v = w.normalize(),
                None => break,
            }
        }
        if v.dot(&vectors.column(k)) < 0.0 {
            v = -v;
        }
        values[k] = v.dot(&(&m * &v));
        vectors.set_column(k, &v);
    }
    (values, vectors)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Distance between `a` and `±b`, whichever sign fits better.
pub fn sign_aligned_diff(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let s = if dot < 0.0 { -1.0 } else { 1.0 };
    a.iter().zip(b).map(|(x, y)| (x - s * y).abs()).fold(0.0, f64::max)
}

/// Sine of the largest principal angle between the column spans of `a` and
/// `b`, both given in coordinates where the inner product is Euclidean.
pub fn largest_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let residual = &qb - &qa * (qa.transpose() * &qb);
    residual.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Stationary row vector of a row-stochastic matrix by a direct solve.
pub fn stationary_oracle(t: &DMatrix<f64>) -> DVector<f64> {
    let n = t.nrows();
    let mut system = DMatrix::identity(n, n) - t.transpose();
    for j in 0..n {
        system[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    system.lu().solve(&rhs).expect("stationary system is singular")
}

/// Two-regime binary matrix. Features fall into four blocks with means
/// (.8, .8, .2, .2) before `change` and (.8, .2, .8, .2) from `change` on.
pub fn planted_events(seed: u64, n: usize, d: usize, change: Option<usize>) -> EventMatrix {
    let mut r = rng(seed);
    let before = [0.8, 0.8, 0.2, 0.2];
    let after = [0.8, 0.2, 0.8, 0.2];
    let rows: Vec<Vec<u8>> = (0..n)
        .map(|t| {
            (0..d)
                .map(|j| {
                    let block = (4 * j / d).min(3);
                    let p = match change {
                        Some(c) if t >= c => after[block],
                        _ => before[block],
                    };
                    u8::from(r.gen::<f64>() < p)
                })
                .collect()
        })
        .collect();
    EventMatrix::from_rows(&rows).unwrap()
}
