use splitsea::kernel::{
    coefficient_band, edge_prediction, kernel_eval, kernel_eval_quadrature, kernel_matrix,
    local_sine_prediction,
};
use splitsea::potential::{edge_profile, fermi_sea};
use splitsea::schur_oracle::brute_correlation;
use splitsea::HoppingCoefficients;

/// J_n(2θ) from its power series; fine for θ ≲ 5.
fn bessel_j(n: i64, theta: f64) -> f64 {
    let sign = if n < 0 && n % 2 != 0 { -1.0 } else { 1.0 };
    let n = n.unsigned_abs();
    let mut term = theta.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
    let mut sum = 0.0;
    for m in 0..80u64 {
        sum += term;
        term *= -theta * theta / ((m + 1) as f64 * (m + 1 + n) as f64);
    }
    sign * sum
}

#[test]
fn band_is_bessel_for_nearest_neighbour() {
    let c = HoppingCoefficients::new(vec![1.0], 2.5).unwrap();
    let band = coefficient_band(&c).unwrap();
    for n in -12..=12 {
        let want = bessel_j(n, 2.5);
        assert!((band.get(n) - want).abs() < 1e-13, "n={n}");
    }
}

#[test]
fn quadrature_agrees_with_series() {
    let c = HoppingCoefficients::quadratic(-1.0 / 3.0, 3.0).unwrap();
    let band = coefficient_band(&c).unwrap();
    for (k, l) in [(0, 0), (2, -1), (-3, 4), (5, 5)] {
        let series = kernel_eval(&band, k, l);
        let quad = kernel_eval_quadrature(&c, k, l, 0.05).unwrap();
        assert!((series - quad).abs() < 1e-9, "({k},{l}): {series} vs {quad}");
    }
}

#[test]
fn correlations_match_schur_sums() {
    let c = HoppingCoefficients::quadratic(0.4, 0.6).unwrap();
    let band = coefficient_band(&c).unwrap();
    for sites in [vec![0i64], vec![-1], vec![1, -2], vec![0, -1, -3]] {
        let brute = brute_correlation(&c, &sites, 22).unwrap();
        let det = kernel_matrix(&band, &sites).determinant();
        assert!((brute - det).abs() < 1e-10, "{sites:?}: {brute} vs {det}");
    }
}

#[test]
fn bulk_approaches_sine_kernel() {
    let c = HoppingCoefficients::quadratic(-1.0 / 3.0, 400.0).unwrap();
    let band = coefficient_band(&c).unwrap();
    for x in [0.0, 1.2] {
        let sea = fermi_sea(&c, x).unwrap();
        let k = (x * 400.0) as i64;
        for d in 0..4 {
            let got = kernel_eval(&band, k, k + d);
            let want = local_sine_prediction(&sea, d);
            assert!((got - want).abs() < 0.03, "x={x} d={d}: {got} vs {want}");
        }
    }
}

#[test]
fn edge_prediction_tracks_the_diagonal() {
    let c = HoppingCoefficients::quadratic(-1.0 / 3.0, 1600.0).unwrap();
    let p = edge_profile(&c).unwrap();
    let band = coefficient_band(&c).unwrap();
    let k = (p.b * 1600.0).floor() as i64 - 2;
    let got = kernel_eval(&band, k, k);
    let want = edge_prediction(&p, 1600.0, k, k).unwrap();
    assert!((got / want - 1.0).abs() < 0.15, "{got} vs {want}");
}
