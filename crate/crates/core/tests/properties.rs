use nalgebra::DMatrix;
use proptest::prelude::*;

use linkopt::graph::synthetic::{random_weights, strongly_connected};
use linkopt::graph::{parse_graph, serialize_graph, ParseOptions};
use linkopt::hots::{self, HotsConfig, HotsNormalization};
use linkopt::optimizer::BoxSet;
use linkopt::spectral::{perron_dense, power_iterate, Normalization};
use linkopt::SparseMatrix;

fn instance(n: usize, seed: u64) -> SparseMatrix {
    let g = strongly_connected(n, n, 2, 2 * n, seed);
    g.assembler().assemble(&random_weights(g.facultative().len(), 0.0, 1.0, seed + 1))
}

fn config(alpha: f64) -> HotsConfig {
    HotsConfig {
        alpha,
        ..HotsConfig::default()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_text_round_trips(n in 3usize..30, seed in 0u64..1000) {
        let g = strongly_connected(n, n, 1 + n / 10, n, seed);
        let h = parse_graph(&serialize_graph(&g), ParseOptions::default()).unwrap();
        prop_assert_eq!(g, h);
    }

    #[test]
    fn box_projection_is_idempotent_and_nonexpansive(
        x in prop::collection::vec(-2.0f64..3.0, 1..20),
        shift in prop::collection::vec(-1.0f64..1.0, 20),
    ) {
        let b = BoxSet::UNIT;
        let p = b.project(&x);
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert_eq!(b.project(&p), p.clone());
        let y: Vec<f64> = x.iter().zip(&shift).map(|(a, s)| a + s).collect();
        let q = b.project(&y);
        for i in 0..x.len() {
            prop_assert!((p[i] - q[i]).abs() <= (x[i] - y[i]).abs() + 1e-15);
        }
    }

    #[test]
    fn theta_is_translation_invariant(n in 3usize..15, seed in 0u64..500, lam in -5.0f64..5.0, alpha in 0.55f64..0.95) {
        let a = instance(n, seed);
        let cfg = config(alpha);
        let p = random_weights(n, -1.0, 1.0, seed + 7);
        let q: Vec<f64> = p.iter().map(|v| v + lam).collect();
        let (t0, t1) = (hots::theta(&p, &a, &cfg).unwrap(), hots::theta(&q, &a, &cfg).unwrap());
        prop_assert!((t0 - t1).abs() <= 1e-12 * t0.abs().max(1.0));
    }

    #[test]
    fn theta_gradient_sums_to_zero(n in 3usize..15, seed in 0u64..500, alpha in 0.55f64..0.95) {
        let a = instance(n, seed);
        let p = random_weights(n, -2.0, 2.0, seed + 3);
        let g = hots::theta_grad(&p, &a, &config(alpha)).unwrap();
        prop_assert!(g.iter().sum::<f64>().abs() <= 1e-12);
    }

    #[test]
    fn hessian_matches_gradient_differences(n in 3usize..12, seed in 0u64..500, alpha in 0.55f64..0.95) {
        let a = instance(n, seed);
        let cfg = config(alpha);
        let p = random_weights(n, -1.0, 1.0, seed + 5);
        let y = random_weights(n, -1.0, 1.0, seed + 6);
        let h = 1e-5;
        let shifted = |s: f64| -> Vec<f64> { p.iter().zip(&y).map(|(a, b)| a + s * b).collect() };
        let gp = hots::theta_grad(&shifted(h), &a, &cfg).unwrap();
        let gm = hots::theta_grad(&shifted(-h), &a, &cfg).unwrap();
        let hy = hots::hessian_matvec(&p, &a, &cfg, &y).unwrap();
        for i in 0..n {
            let fd = (gp[i] - gm[i]) / (2.0 * h);
            prop_assert!((fd - hy[i]).abs() <= 1e-7, "{} vs {}", fd, hy[i]);
        }
        let q = dot(&y, &hy);
        prop_assert!(q >= -1e-14 && q <= 4.0 * dot(&y, &y));
    }

    #[test]
    fn hots_solution_is_stationary_and_normalized(n in 3usize..20, seed in 0u64..500, alpha in 0.55f64..0.95) {
        let a = instance(n, seed);
        let cfg = HotsConfig { normalization: HotsNormalization::MeanZero, ..config(alpha) };
        let s = hots::hots_solve(&vec![0.0; n], &a, &cfg).unwrap();
        prop_assert!(s.p.iter().sum::<f64>().abs() <= 1e-10);
        let g = hots::theta_grad(&s.p, &a, &cfg).unwrap();
        prop_assert!(g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= cfg.tol);
    }

    #[test]
    fn power_iteration_matches_dense_perron(n in 2usize..15, seed in 0u64..500) {
        let m = DMatrix::from_column_slice(n, n, &random_weights(n * n, 0.05, 1.0, seed));
        let (rho, u, _) = power_iterate(&m, &Normalization::L1, 1e-13, 100_000).unwrap();
        let (rho_d, u_d, _) = perron_dense(&m).unwrap();
        prop_assert!((rho - rho_d).abs() <= 1e-10 * rho_d);
        let s: f64 = u_d.iter().sum();
        for i in 0..n {
            prop_assert!((u[i] - u_d[i] / s).abs() <= 1e-10);
        }
    }
}

/// `(∇²θ)^#` of the symmetric Hessian with kernel `e`: `(H + eeᵀ/n)⁻¹ − eeᵀ/n`.
fn hessian_group_inverse(p: &[f64], a: &SparseMatrix, cfg: &HotsConfig) -> DMatrix<f64> {
    let n = p.len();
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut y = vec![0.0; n];
        y[j] = 1.0;
        let col = hots::hessian_matvec(p, a, cfg, &y).unwrap();
        h.set_column(j, &nalgebra::DVector::from_vec(col));
    }
    let e = DMatrix::from_element(n, n, 1.0 / n as f64);
    (h + &e).try_inverse().unwrap() - e
}

#[test]
fn aux_vector_matches_dense_group_inverse() {
    for seed in 0..10u64 {
        let n = 6;
        let a = instance(n, 40 + seed);
        for precondition in [false, true] {
            let cfg = config([0.6, 0.9][seed as usize % 2]);
            let s = hots::hots_solve(&vec![0.0; n], &a, &cfg).unwrap();
            let gf = random_weights(n, -1.0, 1.0, seed);
            let gn = cfg.normalization.gradient(&s.p);
            let aux = hots::hots_aux_w(&s.p, &a, &cfg, &gf, &gn, 1e-13, None, precondition, hots::AUX_CAP).unwrap();
            let fe: f64 = gf.iter().sum();
            let r = nalgebra::RowDVector::from_iterator(n, (0..n).map(|l| -gf[l] + fe * gn[l]));
            let w = r * hessian_group_inverse(&s.p, &a, &cfg);
            for i in 0..n {
                assert!((aux.w[i] - w[i]).abs() <= 1e-8, "seed {seed}: {:?} vs {w}", aux.w);
            }
        }
    }
}
