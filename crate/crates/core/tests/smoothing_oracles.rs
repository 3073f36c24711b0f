mod common;

use grafield::smoothing::{stein_optimal_tau_for_pmf, teleport_weights};
use grafield::{
    build_graph, good_turing, laplace_smooth_vertex, mse_risk, random_walk, risk_curve,
    smooth_transition, stein_optimal_tau, Provenance, Tau, VertexDistribution,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

#[test]
fn exact_stein_constant() {
    let d = [q(2, 1), q(8, 1), q(6, 1), q(6, 1)];
    assert_eq!(stein_optimal_tau(&d), Tau::Finite(q(86, 19)));
    let d = [q(1, 1), q(99, 1)];
    assert_eq!(stein_optimal_tau(&d), Tau::Finite(q(198, 9604)));
    assert_eq!(stein_optimal_tau(&vec![q(3, 1); 5]), Tau::Infinite);
}

#[test]
fn exact_laplace_smoothing() {
    let d = [q(2, 1), q(8, 1), q(6, 1), q(6, 1)];
    let p = laplace_smooth_vertex(&d, &q(22, 1), &Tau::Finite(q(1, 1))).unwrap();
    assert_eq!(p.probs(), &[q(3, 26), q(9, 26), q(7, 26), q(7, 26)]);
    assert_eq!(p.provenance(), &Provenance::Laplace(Tau::Finite(q(1, 1))));
}

#[test]
fn exact_good_turing() {
    let d = [q(1, 1), q(1, 1), q(2, 1), q(3, 1)];
    let p = good_turing(&d).unwrap();
    assert_eq!(p.probs(), &[q(1, 5), q(1, 5), q(3, 5), q(0, 1)]);
    match p.provenance() {
        Provenance::GoodTuring { raw } => {
            assert_eq!(raw, &vec![q(1, 7), q(1, 7), q(3, 7), q(0, 1)])
        }
        other => panic!("unexpected provenance {other:?}"),
    }
}

/// `E‖p̂_τ − p‖²` written out per coordinate from the multinomial moments
/// `E d_i = N p_i`, `Var d_i = N p_i (1 − p_i)`.
fn risk_oracle(p: &[f64], big_n: f64, tau: f64) -> f64 {
    let n = p.len() as f64;
    let denom = big_n + n * tau;
    p.iter()
        .map(|pi| {
            let var = big_n * pi * (1.0 - pi) / (denom * denom);
            let bias = (big_n * pi + tau) / denom - pi;
            var + bias * bias
        })
        .sum()
}

fn pmf_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..10.0, 2..30).prop_map(|w| {
        let t: f64 = w.iter().sum();
        w.into_iter().map(|v| v / t).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn risk_matches_moment_oracle(p in pmf_strategy(), big_n in 1usize..500, tau in 0.0f64..40.0) {
        let dist = VertexDistribution::from_probs(p.clone()).unwrap();
        let got = mse_risk(&dist, big_n, &tau).unwrap();
        let want = risk_oracle(&p, big_n as f64, tau);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1e-300), "{} vs {}", got, want);
    }

    #[test]
    fn grid_argmin_matches_closed_form(p in pmf_strategy(), big_n in 5usize..500) {
        let dist = VertexDistribution::from_probs(p).unwrap();
        let tau = match stein_optimal_tau_for_pmf(&dist) {
            Tau::Finite(t) if t < 49.0 => t,
            _ => return Ok(()),
        };
        let step = 0.01;
        let grid: Vec<f64> = (0..=5000).map(|i| i as f64 * step).collect();
        let curve = risk_curve(&dist, big_n, &grid).unwrap();
        let best = *curve.argmin().unwrap();
        prop_assert!((best - tau).abs() <= step, "grid {} vs closed form {}", best, tau);
    }

    #[test]
    fn smoothing_is_a_convex_combination(
        d in prop::collection::vec(0.0f64..20.0, 2..20),
        tau in 0.0f64..30.0,
    ) {
        let total: f64 = d.iter().sum();
        prop_assume!(total > 0.1);
        let p = laplace_smooth_vertex(&d, &total, &Tau::Finite(tau)).unwrap();
        let n = d.len() as f64;
        let s = n * tau / (total + n * tau);
        for (pi, di) in p.probs().iter().zip(&d) {
            let want = (1.0 - s) * di / total + s / n;
            prop_assert!((pi - want).abs() < 1e-14);
        }
    }

    #[test]
    fn good_turing_is_a_pmf(counts in prop::collection::vec(0u32..6, 2..30)) {
        let d: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
        match good_turing(&d) {
            Ok(p) => {
                prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                // Vertices with equal counts get equal mass.
                for i in 0..d.len() {
                    for j in 0..d.len() {
                        if d[i] == d[j] {
                            prop_assert_eq!(p.probs()[i], p.probs()[j]);
                        }
                    }
                }
            }
            Err(grafield::Error::EmptyGraph) | Err(grafield::Error::DegenerateGoodTuring(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn smoothed_transition_is_a_teleporting_walk(seed in 0u64..1000, tau in 0.0f64..10.0) {
        let g = common::random_connected(seed, 12, 0.3);
        let t_hat = smooth_transition(&g, &Tau::Finite(tau)).unwrap();
        let walk = random_walk(&g).unwrap().matrix;
        let alpha = teleport_weights(g.degrees(), &Tau::Finite(tau)).unwrap();
        let n = g.n() as f64;
        for x in 0..g.n() {
            prop_assert!((t_hat.row(x).sum() - 1.0).abs() < 1e-13);
            for y in 0..g.n() {
                let want = (1.0 - alpha[x]) * walk[[x, y]] + alpha[x] / n;
                prop_assert!((t_hat[[x, y]] - want).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn infinite_tau_gives_uniform_limits() {
    let g = build_graph(3, &[(0, 1, 1.0f64), (1, 2, 4.0)]).unwrap();
    let p = laplace_smooth_vertex(g.degrees(), g.volume(), &Tau::Infinite).unwrap();
    assert!(p.probs().iter().all(|v| (*v - 1.0 / 3.0).abs() < 1e-16));
    let t = smooth_transition(&g, &Tau::Infinite).unwrap();
    assert!(t.iter().all(|v| (*v - 1.0 / 3.0).abs() < 1e-16));
}
