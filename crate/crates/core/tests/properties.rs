use ctc_core::ensemble::{build_ensemble, two_gaussian_groups};
use ctc_core::fft::fft;
use ctc_core::liouvillian::{LiouvillianBlock, ModelParams};
use ctc_core::meanfield::{fixed_points, integrate, rhs_single, single_jacobian, SingleCtc};
use ctc_core::ode::SolverOptions;
use ctc_core::spin::{enumerate_sectors, SpinOperators, SpinSector, TwiceSpin};
use ctc_core::sync::{
    classify, mean_pearson, pearson_matrix, AnalysisWindow, PearsonResult, SyncThresholds,
};
use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use proptest::prelude::*;

fn times(n: usize, dt: f64) -> Vec<f64> {
    (0..n).map(|k| k as f64 * dt).collect()
}

fn series_strategy() -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec([0.1f64..3.0, 0.0f64..6.3, -1.0f64..1.0], 2..6)
}

fn build_series(spec: &[[f64; 3]], t: &[f64]) -> Vec<Vec<f64>> {
    spec.iter()
        .map(|[w, ph, off]| {
            t.iter()
                .map(|t| (w * t + ph).sin() + 0.3 * (1.7 * w * t).cos() + off)
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sector_sum_rule(n in 1u32..64) {
        let total: BigUint = enumerate_sectors(n)
            .unwrap()
            .iter()
            .map(|s| s.multiplicity() * BigUint::from(s.dim()))
            .sum();
        prop_assert_eq!(total, BigUint::from(1u8) << n as usize);
    }

    #[test]
    fn casimir_and_commutators(tj in 0u32..30) {
        let ops = SpinOperators::new(TwiceSpin::new(tj));
        let j = tj as f64 / 2.0;
        let d = ops.dim();
        let s2 = &ops.sx * &ops.sx + &ops.sy * &ops.sy + &ops.sz * &ops.sz;
        let target = DMatrix::<Complex64>::identity(d, d) * Complex64::new(j * (j + 1.0), 0.0);
        prop_assert!((s2 - target).iter().all(|z| z.norm() < 1e-12 * (1.0 + j * j)));
        let comm = &ops.sx * &ops.sy - &ops.sy * &ops.sx;
        let want = &ops.sz * Complex64::new(0.0, 1.0);
        prop_assert!((comm - want).iter().all(|z| z.norm() < 1e-12 * (1.0 + j)));
    }

    #[test]
    fn identity_covector_is_conserved(n in 1u32..9, k in 0u32..5, omega in 0.0f64..2.0, kappa in 0.1f64..2.0) {
        let tj = if 2 * k <= n { n - 2 * k } else { n % 2 };
        let sector = SpinSector::new(n, TwiceSpin::new(tj)).unwrap();
        let block = LiouvillianBlock::build(sector.clone(), ModelParams::new(omega, kappa).unwrap()).unwrap();
        let d = sector.dim();
        let g = block.dense();
        for col in 0..d * d {
            let s: Complex64 = (0..d).map(|i| g[(i + i * d, col)]).sum();
            prop_assert!(s.norm() < 1e-10);
        }
    }

    #[test]
    fn pearson_affine_maps(spec in series_strategy(), a in 0.1f64..5.0, b in -3.0f64..3.0, pick in 0usize..6) {
        let t = times(2000, 0.05);
        let w = AnalysisWindow::new(10.0, 99.0).unwrap();
        let s = build_series(&spec, &t);
        let base = pearson_matrix(&s, &t, w, 1e-12).unwrap();
        let n = s.len();
        let pick = pick % n;
        let mut pos = s.clone();
        pos[pick] = s[pick].iter().map(|v| a * v + b).collect();
        let mut neg = s.clone();
        neg[pick] = s[pick].iter().map(|v| -a * v + b).collect();
        let p = pearson_matrix(&pos, &t, w, 1e-12).unwrap();
        let q = pearson_matrix(&neg, &t, w, 1e-12).unwrap();
        for i in 0..n {
            for j in 0..n {
                let c = base.get(i, j);
                prop_assert!((p.get(i, j) - c).abs() < 1e-10);
                let flip = if i != j && (i == pick || j == pick) { -c } else { c };
                prop_assert!((q.get(i, j) - flip).abs() < 1e-10);
                prop_assert_eq!(base.get(i, j), base.get(j, i));
                prop_assert!(c.abs() <= 1.0 + 1e-12);
            }
        }
        let m = base.mean();
        prop_assert!((-1.0..=1.0).contains(&m));
    }

    #[test]
    fn classifier_is_pure(spec in series_strategy(), lambda in -0.1f64..0.1) {
        let t = times(800, 0.1);
        let w = AnalysisWindow::new(0.0, 79.9).unwrap();
        let p = pearson_matrix(&build_series(&spec, &t), &t, w, 1e-12).unwrap();
        let th = SyncThresholds::default();
        prop_assert_eq!(classify(&p, lambda, &th), classify(&p.clone(), lambda, &th));
    }

    #[test]
    fn fixed_points_are_stationary(m in 0.01f64..1.0, r in 0.1f64..2.0) {
        prop_assume!((m - r).abs() > 1e-6);
        let p = ModelParams::new(r, 1.0).unwrap();
        let rep = fixed_points(m, &p).unwrap();
        for fp in rep.physical_points() {
            let v = rhs_single(&fp, &p);
            prop_assert!(v.iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn jacobian_matches_complex_step(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, r in 0.1f64..2.0, kappa in 0.3f64..2.0) {
        let p = ModelParams::new(r * kappa, kappa).unwrap();
        let j = single_jacobian(&[x, y, z], &p);
        let f = |v: [Complex64; 3]| {
            let [a, b, c] = v;
            [
                a * c * kappa,
                c * (-p.omega) + b * c * kappa,
                b * p.omega - (a * a + b * b) * kappa,
            ]
        };
        let h = 1e-20;
        for col in 0..3 {
            let mut v = [Complex64::new(x, 0.0), Complex64::new(y, 0.0), Complex64::new(z, 0.0)];
            v[col].im = h;
            let out = f(v);
            for row in 0..3 {
                prop_assert!((out[row].im / h - j[(row, col)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn uncoupled_norm_is_conserved(theta in 0.0f64..3.1, phi in 0.0f64..6.2, m in 0.05f64..1.0, r in 0.2f64..1.5) {
        let p = ModelParams::new(r, 1.0).unwrap();
        let y0 = [m * theta.sin() * phi.cos(), m * theta.sin() * phi.sin(), m * theta.cos()];
        let rec = integrate(SingleCtc(p), &y0, 0.0, 100.0, 0.5, SolverOptions::default()).unwrap();
        prop_assert!(rec.max_norm_drift() < 1e-8);
    }

    #[test]
    fn ensembles_are_seeded_and_in_support(seed in 0u64..1000, delta in 0.0f64..0.8, std in 0.0f64..0.2) {
        let spec = two_gaussian_groups(20, 0.8, delta, std, 0.5, 0.9, 1.0, seed);
        let a = build_ensemble(&spec).unwrap();
        let b = build_ensemble(&spec).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.frequencies.iter().all(|&w| w > 0.0 && w < 0.9));
        prop_assert!(a.norms.iter().all(|&m| m > 0.0 && m < 0.9));
    }

    #[test]
    fn fft_is_linear(xs in prop::collection::vec(-1.0f64..1.0, 1..80), ys in prop::collection::vec(-1.0f64..1.0, 1..80), a in -2.0f64..2.0) {
        let n = xs.len().min(ys.len());
        let x: Vec<Complex64> = xs[..n].iter().map(|&v| Complex64::new(v, 0.5 * v)).collect();
        let y: Vec<Complex64> = ys[..n].iter().map(|&v| Complex64::new(-v, v)).collect();
        let mut lhs: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| p * a + q).collect();
        fft(&mut lhs);
        let (mut fx, mut fy) = (x.clone(), y.clone());
        fft(&mut fx);
        fft(&mut fy);
        for k in 0..n {
            prop_assert!((lhs[k] - (fx[k] * a + fy[k])).norm() < 1e-10 * (1.0 + n as f64));
        }
    }
}

fn two_blocks(n: usize) -> Vec<f64> {
    let h = n / 2;
    (0..n * n)
        .map(|k| if (k / n < h) == (k % n < h) { 1.0 } else { 0.0 })
        .collect()
}

#[test]
fn two_block_mean_follows_counting_formula() {
    for n in [4usize, 10, 20] {
        let want = (n as f64 / 2.0 - 1.0) / (n as f64 - 1.0);
        assert!((mean_pearson(&two_blocks(n), n) - want).abs() < 1e-15);
    }
}

#[test]
fn two_block_matrix_is_cluster_sync() {
    let n = 20;
    let p = PearsonResult {
        n,
        window: AnalysisWindow::new(0.0, 1.0).unwrap(),
        matrix: two_blocks(n),
        dead: vec![false; n],
        degenerate: vec![],
    };
    let c = classify(&p, 0.0, &SyncThresholds::default());
    assert_eq!(c.clusters.len(), 2);
}
