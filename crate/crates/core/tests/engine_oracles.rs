mod common;

use common::*;
use grafield::engine::{galerkin_defect, residual_norm, s_orthonormality};
use grafield::{
    build_grafield, build_graph, empirical_network_pmf, empirical_vertex_pmf, lp_rank_cap,
    lp_spectral, modularity, unified_spectral, BasisSpec, EngineOptions, SpectrumView,
};
use nalgebra::DMatrix;

#[test]
fn toy_bpf_coordinates_match_dense_oracle() {
    let g = toy();
    let emb = unified_spectral(&g, BasisSpec::BlockPulse, None, 3, &EngineOptions::default()).unwrap();
    let (values, vectors) = sorted_eigen(laplacian_star_na(&g));
    let p: Vec<f64> = g.degrees().iter().map(|d| d / 22.0).collect();
    for k in 0..3 {
        assert!((emb.eigenvalues[k] - values[k]).abs() < 1e-10);
        let oracle: Vec<f64> = (0..4).map(|x| vectors[(x, k)] / p[x].sqrt()).collect();
        assert!(sign_aligned_diff(&emb.coordinate(k), &oracle) < 1e-9);
    }
}

#[test]
fn characteristic_basis_solves_modularity_pencil() {
    for seed in 0..20 {
        let g = random_connected(seed, 15, 0.3);
        let n = g.n();
        let emb = unified_spectral(&g, BasisSpec::Characteristic, None, n, &EngineOptions::default()).unwrap();
        let b = to_na(&modularity(&g).matrix);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(g.degrees()));
        let theta = to_na(&emb.coefficients);
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(emb.eigenvalues.clone()));
        let r = &b * &theta - &d * &theta * &lambda;
        assert!(r.amax() < 1e-9, "seed {seed}: residual {}", r.amax());
        // Same spectrum as the block-pulse engine.
        let bpf = unified_spectral(&g, BasisSpec::BlockPulse, None, n, &EngineOptions::default()).unwrap();
        assert!(max_abs_diff(&bpf.eigenvalues, &emb.eigenvalues) < 1e-10);
    }
}

#[test]
fn s_orthonormal_coefficients_and_centered_coordinates() {
    let g = random_connected(9, 25, 0.2);
    for spec in [BasisSpec::BlockPulse, BasisSpec::Characteristic, BasisSpec::Lp { m: 8 }] {
        let emb = unified_spectral(&g, spec, None, 5, &EngineOptions::default()).unwrap();
        let gram = s_orthonormality(&emb);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[[i, j]] - want).abs() < 1e-10, "{spec:?}");
            }
        }
        for m in grafield::engine::coordinate_means(&emb) {
            assert!(m.abs() < 1e-10);
        }
    }
}

/// Drops the deflated constant direction from a complete block-pulse
/// embedding; its coordinate is the constant function 1.
fn nontrivial(emb: &grafield::GraphEmbedding<f64>, p: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let means = grafield::engine::coordinate_means(emb);
    let keep: Vec<usize> = (0..emb.k()).filter(|&k| means[k].abs() < 0.5).collect();
    assert_eq!(keep.len() + 1, p.len());
    (
        keep.iter().map(|&k| emb.eigenvalues[k]).collect(),
        keep.iter().map(|&k| emb.coordinate(k)).collect(),
    )
}

#[test]
fn full_rank_lp_recovers_bpf_eigenspace() {
    for seed in 0..10 {
        let g = random_connected(100 + seed, 20, 0.3);
        let n = g.n();
        let p = empirical_vertex_pmf(&g);
        let cap = lp_rank_cap(&p).unwrap();
        assert_eq!(cap, n - 1);
        let lp = lp_spectral(&g, cap, cap, &EngineOptions::default()).unwrap();
        let bpf = unified_spectral(&g, BasisSpec::BlockPulse, None, n, &EngineOptions::default()).unwrap();
        let (values, coords) = nontrivial(&bpf, p.probs());
        assert!(max_abs_diff(&lp.eigenvalues, &values) < 1e-10, "seed {seed}");
        // Compare in the weighted inner product: scale rows by √p.
        let w = |x: usize| p.probs()[x].sqrt();
        let lp_span = DMatrix::from_fn(n, 3, |x, c| lp.coordinates[[x, c]] * w(x));
        let bpf_span = DMatrix::from_fn(n, 3, |x, c| coords[c][x] * w(x));
        let angle = largest_principal_angle(&lp_span, &bpf_span);
        assert!(angle < 1e-6, "seed {seed}: {angle}");
    }
}

/// The Galerkin residual need not shrink monotonically in `m` (it does not
/// on this graph); what nested trial spaces do guarantee is a non-decreasing
/// leading Ritz value and an exact solution at full rank.
#[test]
fn lp_sweep_over_basis_size() {
    let g = random_connected(77, 60, 0.08);
    let gf = build_grafield(empirical_vertex_pmf(&g), empirical_network_pmf(&g)).unwrap();
    let sizes = [2, 4, 8, 16, 32, 59];
    let mut ritz = Vec::new();
    let mut norms = Vec::new();
    for m in sizes {
        let emb = lp_spectral(&g, m, 1, &EngineOptions::default()).unwrap();
        norms.push(residual_norm(&gf, &emb, 0));
        ritz.push(emb.eigenvalues[0]);
        for v in galerkin_defect(&gf, &emb, 0) {
            assert!(v.abs() < 1e-10);
        }
    }
    for w in ritz.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "Ritz values {ritz:?}");
    }
    assert!(norms[..5].iter().all(|r| *r > 1e-3), "residuals {norms:?}");
    assert!(norms[5] < 1e-10);
}

#[test]
fn planted_blocks_split_by_sign() {
    let mut edges = Vec::new();
    let mut r = rng(5);
    use rand::Rng;
    for x in 0..60 {
        for y in x + 1..60 {
            let same = (x < 30) == (y < 30);
            if r.gen::<f64>() < if same { 0.6 } else { 0.03 } {
                edges.push((x, y, 1.0));
            }
        }
    }
    let g = build_graph(60, &edges).unwrap();
    let emb = lp_spectral(&g, 8, 1, &EngineOptions::with_view(SpectrumView::Singular)).unwrap();
    let phi = emb.coordinate(0);
    let first = phi[0] > 0.0;
    for (x, v) in phi.iter().enumerate() {
        assert_eq!(*v > 0.0, (x < 30) == first, "vertex {x}");
    }
}

#[test]
fn compression_ratio_bookkeeping() {
    let n = 2678;
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0 + (i % 7) as f64)).collect();
    let g = build_graph(n, &edges).unwrap();
    let emb = lp_spectral(&g, 15, 1, &EngineOptions::default()).unwrap();
    assert!((emb.compression_ratio() - 178.53).abs() < 5e-3);
}

#[test]
fn krylov_path_matches_dense_path() {
    let g = random_connected(3, 300, 0.02);
    let dense = unified_spectral(&g, BasisSpec::BlockPulse, None, 4, &EngineOptions::default()).unwrap();
    for view in [SpectrumView::Signed, SpectrumView::Singular] {
        let options = EngineOptions {
            dense_threshold: 50,
            ..EngineOptions::with_view(view)
        };
        let sparse = unified_spectral(&g, BasisSpec::BlockPulse, None, 4, &options).unwrap();
        let reference = if view == SpectrumView::Signed {
            dense.clone()
        } else {
            unified_spectral(&g, BasisSpec::BlockPulse, None, 4, &EngineOptions::with_view(view)).unwrap()
        };
        assert!(max_abs_diff(&sparse.eigenvalues, &reference.eigenvalues) < 1e-8);
        for k in 0..4 {
            assert!(sign_aligned_diff(&sparse.coordinate(k), &reference.coordinate(k)) < 1e-5);
        }
    }
}

#[test]
fn single_precision_engine() {
    let g = build_graph(4, &[(0, 1, 2.0f32), (1, 2, 3.0), (1, 3, 3.0), (2, 3, 3.0)]).unwrap();
    let emb = unified_spectral(&g, BasisSpec::BlockPulse, None, 3, &EngineOptions::default()).unwrap();
    let reference = unified_spectral(&toy(), BasisSpec::BlockPulse, None, 3, &EngineOptions::default()).unwrap();
    for (a, b) in emb.eigenvalues.iter().zip(&reference.eigenvalues) {
        assert!((f64::from(*a) - b).abs() < 1e-5);
    }
}
