mod common;

use common::*;
use grafield::operators::{
    diffusion_kernel, type1_gmatrix, type1_identity_target, type2_gmatrix, type2_identity_target,
};
use grafield::{
    diffusion_distance, diffusion_map, laplacian, laplacian_star, pagerank_matrix,
    pagerank_scores, reg_laplacian_type2, resolve_tau, Tau, TauKind,
};

#[test]
fn laplacian_star_spectrum_is_deflated_laplacian() {
    for seed in 0..30 {
        let g = random_connected(seed, 5 + (seed as usize % 25), 0.25);
        let (mut full, _) = sorted_eigen(to_na(&laplacian(&g).unwrap().matrix));
        let (star, _) = sorted_eigen(to_na(&laplacian_star(&g).unwrap().matrix));
        // Connected graph: the eigenvalue 1 is simple and the largest.
        assert!((full[0] - 1.0).abs() < 1e-10);
        full[0] = 0.0;
        assert!(max_abs_diff(&sorted(full), &sorted(star)) < 1e-10);
    }
}

#[test]
fn diffusion_reconstruction_matches_matrix_powers() {
    for seed in 0..15 {
        let g = random_connected(seed, 12, 0.3);
        let n = g.n();
        let dc = diffusion_map(&g, 1.0, n).unwrap();
        for t in [1u32, 2, 5] {
            let direct = diffusion_kernel(&g, t).unwrap();
            // Independent oracle through nalgebra matrix powers.
            let walk = {
                let a = adjacency_na(&g);
                let d = g.degrees();
                nalgebra::DMatrix::from_fn(n, n, |i, j| a[(i, j)] / d[i])
            };
            let power = (0..t).fold(nalgebra::DMatrix::identity(n, n), |acc, _| acc * &walk);
            let recon = dc.kernel_at(t as f64);
            for x in 0..n {
                for y in 0..n {
                    let want = g.volume() * power[(x, y)] / g.degrees()[y];
                    assert!((recon[[x, y]] - want).abs() < 1e-8, "t = {t}");
                    assert!((direct[[x, y]] - want).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn diffusion_distance_is_coordinate_distance() {
    let g = toy();
    let dc = diffusion_map(&g, 2.0, 3).unwrap();
    let d01 = diffusion_distance(&dc, 0, 1);
    let manual: f64 = (0..3)
        .map(|k| (dc.eigenvalues[k].powi(4)) * (dc.eigenfunctions[[0, k]] - dc.eigenfunctions[[1, k]]).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!((d01 - manual).abs() < 1e-12);

    // With every nontrivial component kept, D_t² is the p-weighted distance
    // between rows of 𝒯^t.
    let walk = grafield::random_walk(&g).unwrap().matrix;
    let t2 = walk.dot(&walk);
    let p: Vec<f64> = g.degrees().iter().map(|d| d / g.volume()).collect();
    for x in 0..4 {
        for y in 0..4 {
            let want: f64 = (0..4)
                .map(|z| (t2[[x, z]] - t2[[y, z]]).powi(2) / p[z])
                .sum::<f64>()
                .sqrt();
            assert!((diffusion_distance(&dc, x, y) - want).abs() < 1e-12);
        }
    }
}

fn taus(g: &grafield::Graph<f64>) -> Vec<Tau<f64>> {
    vec![
        Tau::Finite(0.5),
        Tau::Finite(1.0),
        resolve_tau(TauKind::Minimax, g.degrees()).unwrap().value,
        resolve_tau(TauKind::SteinOptimal, g.degrees()).unwrap().value,
    ]
}

#[test]
fn regularization_identities() {
    for seed in 0..20 {
        let g = random_connected(seed, 4 + seed as usize, 0.3);
        for tau in taus(&g) {
            let m1 = type1_gmatrix(&g, &tau).unwrap().matrix;
            let t1 = type1_identity_target(&g, &tau).unwrap();
            let e1 = (&m1 - &t1).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(e1 <= 1e-12, "Type-I {e1}");

            let m2 = type2_gmatrix(&g, &tau).unwrap().matrix;
            let t2 = type2_identity_target(&g, &tau).unwrap();
            let e2 = (&m2 - &t2).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(e2 <= 1e-12, "Type-II {e2}");

            let (mut l2, _) = sorted_eigen(to_na(&reg_laplacian_type2(&g, &tau).unwrap().matrix));
            let (mm, _) = sorted_eigen(to_na(&m2));
            assert!((l2[0] - 1.0).abs() < 1e-10);
            l2[0] = 0.0;
            assert!(max_abs_diff(&sorted(l2), &sorted(mm)) < 1e-10);
        }
    }
}

#[test]
fn pagerank_matches_direct_solve() {
    for seed in 0..20 {
        let g = random_connected(seed, 25, 0.15);
        for alpha in [0.1, 0.15, 0.5] {
            let s = pagerank_scores(&g, alpha, 1e-15).unwrap();
            let oracle = stationary_oracle(&to_na(&pagerank_matrix(&g, alpha).unwrap().matrix));
            assert!((s.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for (a, b) in s.probs().iter().zip(oracle.iter()) {
                assert!((a - b).abs() <= 1e-10);
            }
            // Invariant under rescaling the weights.
            let scaled = pagerank_scores(&g.scaled(7.0), alpha, 1e-15).unwrap();
            assert!(max_abs_diff(scaled.probs(), s.probs()) < 1e-13);
        }
    }
}
