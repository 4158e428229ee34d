use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitsea::potential::edge_profile;
use splitsea::unitary_mc::{
    angle_histogram, density_curve, eigen_density_supercritical, log_joint_density,
    metropolis_chain, partition_function_toeplitz,
};
use splitsea::HoppingCoefficients;
use std::f64::consts::PI;

fn bessel_i0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..60 {
        sum += term;
        term *= (x / 2.0).powi(2) / ((k + 1) * (k + 1)) as f64;
    }
    sum
}

/// Periodic trapezoid mean of f over [−π, π)^dim with n points per axis.
fn torus_mean(dim: usize, n: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut pt = vec![0.0; dim];
    for flat in 0..n.pow(dim as u32) {
        let mut rest = flat;
        for p in pt.iter_mut() {
            *p = -PI + 2.0 * PI * (rest % n) as f64 / n as f64;
            rest /= n;
        }
        acc += f(&pt);
    }
    acc / n.pow(dim as u32) as f64
}

const FAMILY: [(f64, usize); 4] = [(1.0 / 3.0, 1), (0.1, 1), (-0.125, 1), (-1.0 / 3.0, 2)];

#[test]
fn density_normalized_with_cuts_at_the_edge() {
    for (g2, cuts) in FAMILY {
        let c = HoppingCoefficients::quadratic(g2, 1.0).unwrap();
        let p = edge_profile(&c).unwrap();
        assert_eq!(p.n_cuts, cuts);
        for x in [p.b, p.b + 0.5, 10.0] {
            let curve = density_curve(&c, x, 4096).unwrap();
            assert!((curve.integral() - 1.0).abs() < 1e-8);
            assert!(curve.rho.iter().all(|&r| r >= 0.0));
            if x == p.b {
                assert_eq!(curve.zero_count(), cuts, "g2={g2}");
            } else {
                assert_eq!(curve.zero_count(), 0);
            }
        }
    }
    let c = HoppingCoefficients::quadratic(0.1, 1.0).unwrap();
    let far = eigen_density_supercritical(&c, 1e9, 0.7).unwrap();
    assert!((far - 1.0 / (2.0 * PI)).abs() < 1e-9);
}

#[test]
fn zero_is_of_order_two_m() {
    let c = HoppingCoefficients::quadratic(-1.0 / 3.0, 1.0).unwrap();
    let p = edge_profile(&c).unwrap();
    let chi = (3.0f64 / 8.0).acos();
    let d = 55.0 / 24.0;
    let centre = PI + chi;
    assert!(eigen_density_supercritical(&c, p.b, centre).unwrap() < 1e-14);
    // ρ(π + χ_b + h)·2π·b/d ≈ h² with the cubic correction vanishing at ±h
    for h in [1e-2, 2e-3] {
        let up = eigen_density_supercritical(&c, p.b, centre + h).unwrap();
        let dn = eigen_density_supercritical(&c, p.b, centre - h).unwrap();
        let fit = 0.5 * (up + dn) * 2.0 * PI * p.b / d;
        assert!((fit / (h * h) - 1.0).abs() < 2.0 * h, "h={h}: {}", fit / (h * h));
    }
}

#[test]
fn single_angle_partition_function_is_bessel() {
    for theta in [0.3, 1.0, 2.5] {
        let c = HoppingCoefficients::new(vec![1.0], theta).unwrap();
        let z = partition_function_toeplitz(&c, 1).unwrap();
        let quad = torus_mean(1, 256, |a| (2.0 * theta * a[0].cos()).exp());
        assert!((z - bessel_i0(2.0 * theta)).abs() < 1e-12 * z);
        assert!((z - quad).abs() < 1e-12 * z);
    }
    let c = HoppingCoefficients::new(vec![1.0], 0.0).unwrap();
    for ell in 1..5 {
        assert!((partition_function_toeplitz(&c, ell).unwrap() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn weyl_integrals_match_toeplitz() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let gammas = vec![rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5)];
        let theta = rng.random_range(0.05..1.0);
        let c = HoppingCoefficients::new(gammas, theta).unwrap();
        let z1 = torus_mean(1, 128, |a| log_joint_density(&c, theta, a).unwrap().exp());
        // |e^{ia} − e^{ib}|² = 4sin²((a−b)/2); the integrand is 0 on the diagonal
        let z2 = 2.0
            * torus_mean(2, 128, |a| log_joint_density(&c, theta, a).map(f64::exp).unwrap_or(0.0));
        let t1 = partition_function_toeplitz(&c, 1).unwrap();
        let t2 = partition_function_toeplitz(&c, 2).unwrap();
        assert!((z1 - t1).abs() < 1e-8 * t1);
        assert!((z2 - t2).abs() < 1e-8 * t2, "{z2} vs {t2}");
    }
}

#[test]
fn single_angle_chain_matches_density() {
    let c = HoppingCoefficients::new(vec![1.0, -1.0 / 3.0], 1.0).unwrap();
    let chain = metropolis_chain(&c, 0.8, 1, 125_000, 4).unwrap();
    let h = angle_histogram(chain, 16);
    let w = |a: f64| log_joint_density(&c, 0.8, &[a]).unwrap().exp();
    let z = torus_mean(1, 512, |a| w(a[0])) * 2.0 * PI;
    let width = 2.0 * PI / 16.0;
    let mut sup: f64 = 0.0;
    for (centre, dens) in h.centres.iter().zip(&h.density) {
        let bin = (0..64)
            .map(|i| w(centre - width / 2.0 + (i as f64 + 0.5) * width / 64.0))
            .sum::<f64>()
            / 64.0
            / z;
        sup = sup.max((bin - dens).abs());
    }
    eprintln!("ell=1 sup {sup:.4}, acceptance {:.2}", h.acceptance_rate);
    assert!(sup < 0.02);
    assert!((0.2..=0.5).contains(&h.acceptance_rate) || h.sigma >= PI);
}

#[test]
fn pair_chain_matches_quadrature() {
    let c = HoppingCoefficients::new(vec![1.0, 0.2], 1.0).unwrap();
    let theta = 0.4;
    let w = |a: &[f64]| log_joint_density(&c, theta, a).map(f64::exp).unwrap_or(0.0);
    let z = torus_mean(2, 128, w);
    let want = torus_mean(2, 128, |a| w(a) * (a[0] - a[1]).cos()) / z;
    let chain = metropolis_chain(&c, theta, 2, 250_000, 8).unwrap();
    let vals: Vec<f64> = chain.map(|s| (s.angles[0] - s.angles[1]).cos()).collect();
    // batch means for the standard error
    let batches = 50;
    let len = vals.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| vals[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let se = (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>()
        / (batches * (batches - 1)) as f64)
        .sqrt();
    eprintln!("<cos> chain {mean:.4} ± {se:.4}, quadrature {want:.4}");
    assert!((mean - want).abs() < 3.0 * se);
}

#[test]
fn eigenvalue_gas_dips_where_the_sea_splits() {
    let c = HoppingCoefficients::quadratic(-1.0 / 3.0, 1.0).unwrap();
    let ell = 24;
    let theta = ell as f64 / 2.2;
    let chain = metropolis_chain(&c, theta, ell, 100_000, 3).unwrap();
    let h = angle_histogram(chain, 48);
    let ratio = h.dip_ratio((3.0f64 / 8.0).acos());
    eprintln!("dip ratio {ratio:.3}, acceptance {:.2}", h.acceptance_rate);
    assert!(ratio < 0.5);
}
