use nalgebra::{DMatrix, DVector};
use splitsea::dpp_sampler::{
    empirical_edge_law, limit_shape_deviation, sample_stats, windowed_kernel, WindowedKernel,
};
use splitsea::kernel::{coefficient_band, kernel_eval};
use splitsea::HoppingCoefficients;
use std::time::Instant;

/// P(Y = S) = |det(K − I_{S^c})| for every subset of a small window.
fn exact_law(k: &DMatrix<f64>) -> Vec<f64> {
    let n = k.nrows();
    (0..1usize << n)
        .map(|mask| {
            let mut m = k.clone();
            for i in 0..n {
                if mask & (1 << i) == 0 {
                    m[(i, i)] -= 1.0;
                }
            }
            m.determinant().abs()
        })
        .collect()
}

fn toy_kernel(eigs: [f64; 6]) -> DMatrix<f64> {
    // orthonormal basis from QR of a fixed matrix
    let a = DMatrix::from_fn(6, 6, |i, j| ((3 * i + 5 * j + 1) as f64).sin() + (i == j) as u8 as f64);
    let q = a.qr().q();
    &q * DMatrix::from_diagonal(&DVector::from_row_slice(&eigs)) * q.transpose()
}

fn total_variation(k: DMatrix<f64>, n: usize, seed: u64) -> f64 {
    let exact = exact_law(&k);
    let wk = WindowedKernel::from_matrix(0, k, 0.0).unwrap();
    let mut counts = vec![0usize; exact.len()];
    for s in wk.sample_many(n, seed) {
        let mask = s.iter().fold(0usize, |m, &k| m | (1 << k));
        counts[mask] += 1;
    }
    0.5 * counts
        .iter()
        .zip(&exact)
        .map(|(&c, p)| (c as f64 / n as f64 - p).abs())
        .sum::<f64>()
}

#[test]
fn toy_projection_is_exact() {
    let tv = total_variation(toy_kernel([1.0, 1.0, 0.0, 0.0, 0.0, 0.0]), 200_000, 5);
    eprintln!("projection TV = {tv:.4}");
    assert!(tv < 0.01);
}

#[test]
fn toy_contractions_are_exact_on_both_sides_of_half_filling() {
    for (eigs, seed) in [([0.9, 0.7, 0.5, 0.2, 0.1, 0.05], 6), ([0.95, 0.9, 0.8, 0.6, 0.3, 0.9], 7)] {
        let tv = total_variation(toy_kernel(eigs), 200_000, seed);
        eprintln!("{eigs:?}: TV = {tv:.4}");
        assert!(tv < 0.01);
    }
}

#[test]
fn marginals_and_pairs_match_the_kernel() {
    let c = HoppingCoefficients::new(vec![1.0], 30.0).unwrap();
    let wk = windowed_kernel(&c, None).unwrap();
    let n = 20_000;
    let t0 = Instant::now();
    let samples = wk.sample_many(n, 9);
    eprintln!("{n} samples on {} sites in {:?}", wk.len(), t0.elapsed());
    let band = coefficient_band(&c).unwrap();
    let nf = n as f64;
    let mut good = 0;
    let sites: Vec<i64> = wk.sites().collect();
    for &k in &sites {
        let p = kernel_eval(&band, k, k);
        let hits = samples.iter().filter(|s| s.binary_search(&k).is_ok()).count() as f64 / nf;
        let se = (p * (1.0 - p) / nf).sqrt().max(1.0 / nf);
        if (hits - p).abs() <= 3.0 * se {
            good += 1;
        }
    }
    eprintln!("{good}/{} sites within 3 SE", sites.len());
    assert!(good as f64 >= 0.95 * sites.len() as f64);
    for (k, l) in [(0i64, 1i64), (-3, 2), (10, 12), (25, 27)] {
        let (kk, ll, kl) = (kernel_eval(&band, k, k), kernel_eval(&band, l, l), kernel_eval(&band, k, l));
        let want = kk * ll - kl * kl;
        let got = samples
            .iter()
            .filter(|s| s.binary_search(&k).is_ok() && s.binary_search(&l).is_ok())
            .count() as f64
            / nf;
        let se = (want * (1.0 - want) / nf).sqrt().max(1.0 / nf);
        assert!((got - want).abs() <= 4.0 * se, "({k},{l}): {got} vs {want}");
    }
}

#[test]
fn number_variance_below_mean() {
    let c = HoppingCoefficients::quadratic(-1.0 / 3.0, 20.0).unwrap();
    let wk = windowed_kernel(&c, None).unwrap();
    let stats = sample_stats(&wk, 4000, 3);
    let samples = wk.sample_many(4000, 3);
    for x in [0i64, 10, 25, 33] {
        let counts: Vec<f64> = samples
            .iter()
            .map(|s| s.iter().filter(|&&k| k > x).count() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
        assert!(var <= mean + 4.0 * (2.0 * mean * mean / 4000.0).sqrt() + 0.05, "x={x}: {var} vs {mean}");
    }
    assert_eq!(stats.k_max.len(), 4000);
}

#[test]
fn edge_law_matches_toeplitz() {
    let c = HoppingCoefficients::quadratic(-1.0 / 3.0, 40.0).unwrap();
    let t0 = Instant::now();
    let r = empirical_edge_law(&c, 5000, 2024).unwrap();
    eprintln!(
        "theta=40: ks_exact {:.4} ks_limit {:.4} leak {:e} ({:?})",
        r.ks_exact, r.ks_limit, r.leakage, t0.elapsed()
    );
    assert!(r.ks_exact < 1.63 / 5000f64.sqrt());
}

#[test]
fn limit_shape_sharpens() {
    let c = HoppingCoefficients::quadratic(-1.0 / 3.0, 1.0).unwrap();
    let t0 = Instant::now();
    let a = limit_shape_deviation(&c.with_theta(50.0).unwrap(), 60, 1).unwrap();
    let b = limit_shape_deviation(&c.with_theta(200.0).unwrap(), 30, 1).unwrap();
    eprintln!("p90 θ=50 {:.4}, θ=200 {:.4} ({:?})", a.p90, b.p90, t0.elapsed());
    assert!(b.p90 < a.p90);
    assert!(a.truncation < 1e-7);
}
