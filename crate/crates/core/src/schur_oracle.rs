//! Brute-force Schur measure: Schur functions by (dual) Jacobi–Trudi and
//! exhaustive sums over small partitions.

use crate::error::{Error, Result};
use crate::potential::HoppingCoefficients;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) || parts.contains(&0) {
            return Err(Error::InvalidInput(format!("not a partition: {parts:?}")));
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// λ_i with λ_i = 0 beyond the length (1-based).
    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    pub fn first(&self) -> usize {
        self.part(1)
    }

    pub fn conjugate(&self) -> Self {
        let parts = (1..=self.first())
            .map(|j| self.parts.iter().filter(|&&p| p >= j).count())
            .collect();
        Self { parts }
    }

    /// λ_i − i for i = 1..=len; the site is this plus ½.
    pub fn site_ints(&self) -> impl Iterator<Item = i64> + '_ {
        self.parts
            .iter()
            .enumerate()
            .map(|(i, &p)| p as i64 - i as i64 - 1)
    }

    /// Whether the half-integer site k_int + ½ is occupied.
    pub fn occupies(&self, k_int: i64) -> bool {
        if k_int < -(self.len() as i64) {
            return true;
        }
        self.site_ints().any(|s| s == k_int)
    }

    /// N(X): number of occupied sites strictly above X.
    pub fn count_above(&self, x: f64) -> usize {
        let finite = self.site_ints().filter(|&s| s as f64 + 0.5 > x).count();
        // sites −i + ½ for i > len exceed X when i < ½ − X
        let len = self.len() as f64;
        let tail = ((0.5 - x).ceil() - 1.0 - len).max(0.0);
        finite + tail as usize
    }
}

/// All partitions of n, in decreasing lexicographic order.
pub fn partitions_of(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    rec(n, n, &mut cur, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiwaTimes {
    pub times: Vec<f64>,
}

impl MiwaTimes {
    pub fn new(times: Vec<f64>) -> Self {
        Self { times }
    }

    /// t_r = θγ_r.
    pub fn from_coeffs(coeffs: &HoppingCoefficients) -> Self {
        Self::new(coeffs.gammas().iter().map(|g| coeffs.theta() * g).collect())
    }

    fn flipped(&self) -> Self {
        let times = self
            .times
            .iter()
            .enumerate()
            .map(|(i, t)| if i % 2 == 0 { *t } else { -t })
            .collect();
        Self::new(times)
    }
}

/// Coefficients of exp(Σ t_r z^r) via n·h_n = Σ_r r·t_r·h_{n−r}.
pub fn complete_homogeneous(t: &MiwaTimes, n_max: usize) -> Vec<f64> {
    let mut h = vec![0.0; n_max + 1];
    h[0] = 1.0;
    for n in 1..=n_max {
        let s: f64 = t
            .times
            .iter()
            .enumerate()
            .take(n)
            .map(|(i, tr)| (i + 1) as f64 * tr * h[n - i - 1])
            .sum();
        h[n] = s / n as f64;
    }
    h
}

/// Coefficients of exp(−Σ(−1)^r t_r z^r).
pub fn elementary(t: &MiwaTimes, n_max: usize) -> Vec<f64> {
    complete_homogeneous(&t.flipped(), n_max)
}

/// Exact h_n for rational Miwa times.
pub fn complete_homogeneous_exact(t: &[BigRational], n_max: usize) -> Vec<BigRational> {
    let mut h = vec![BigRational::zero(); n_max + 1];
    h[0] = BigRational::one();
    for n in 1..=n_max {
        let mut s = BigRational::zero();
        for (i, tr) in t.iter().enumerate().take(n) {
            s += BigRational::from_integer(BigInt::from(i + 1)) * tr * &h[n - i - 1];
        }
        h[n] = s / BigRational::from_integer(BigInt::from(n));
    }
    h
}

fn jt_matrix(lambda: &Partition, seq: &[f64]) -> DMatrix<f64> {
    let n = lambda.len();
    DMatrix::from_fn(n, n, |i, j| {
        let idx = lambda.parts[i] as i64 - i as i64 + j as i64;
        if idx < 0 {
            0.0
        } else {
            seq[idx as usize]
        }
    })
}

fn hadamard(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.norm()).product()
}

/// s_λ[t] by Jacobi–Trudi, cross-checked against the dual (conjugate) form.
pub fn schur(lambda: &Partition, t: &MiwaTimes) -> Result<f64> {
    if lambda.len() > 64 || lambda.first() > 64 {
        return Err(Error::InvalidInput("partition exceeds the 64-row guard".into()));
    }
    let size = lambda.size();
    let h = complete_homogeneous(t, size + 1);
    let e = elementary(t, size + 1);
    schur_with(lambda, &h, &e)
}

fn schur_with(lambda: &Partition, h: &[f64], e: &[f64]) -> Result<f64> {
    if lambda.is_empty() {
        return Ok(1.0);
    }
    let a = jt_matrix(lambda, h);
    let b = jt_matrix(&lambda.conjugate(), e);
    let primal = a.clone().lu().determinant();
    let dual = b.clone().lu().determinant();
    let floor = 1e-13 * hadamard(&a).max(hadamard(&b));
    if (primal - dual).abs() > 1e-10 * (primal.abs() + dual.abs()) + floor {
        return Err(Error::OracleMismatch { primal, dual });
    }
    Ok(primal)
}

/// Exact s_λ for rational times (Gaussian elimination over ℚ).
pub fn schur_exact(lambda: &Partition, t: &[BigRational]) -> BigRational {
    let n = lambda.len();
    let h = complete_homogeneous_exact(t, lambda.size() + 1);
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let idx = lambda.parts[i] as i64 - i as i64 + j as i64;
                    if idx < 0 {
                        BigRational::zero()
                    } else {
                        h[idx as usize].clone()
                    }
                })
                .collect()
        })
        .collect();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det *= &pivot;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &pivot;
            for k in c..n {
                let v = &f * &m[c][k];
                m[r][k] -= v;
            }
        }
    }
    det
}

/// P(λ) = e^{−θ²Σrγ_r²} s_λ[θγ]².
pub fn measure_weight(lambda: &Partition, coeffs: &HoppingCoefficients) -> Result<f64> {
    let s = schur(lambda, &MiwaTimes::from_coeffs(coeffs))?;
    Ok(normalizer(coeffs) * s * s)
}

fn normalizer(coeffs: &HoppingCoefficients) -> f64 {
    (-coeffs.theta().powi(2) * coeffs.sum_r_gamma_sq()).exp()
}

/// Σ of P(λ) over |λ| ≤ cap with `keep(λ)`, summed per size class in order.
fn weighted_sum<F>(coeffs: &HoppingCoefficients, cap: usize, keep: F) -> Result<f64>
where
    F: Fn(&Partition) -> bool + Sync,
{
    let t = MiwaTimes::from_coeffs(coeffs);
    let h = complete_homogeneous(&t, cap + 1);
    let e = elementary(&t, cap + 1);
    let per_size: Vec<Result<f64>> = (0..=cap)
        .into_par_iter()
        .map(|n| {
            let mut acc = 0.0;
            for lambda in partitions_of(n) {
                if keep(&lambda) {
                    let s = schur_with(&lambda, &h, &e)?;
                    acc += s * s;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = 0.0;
    for v in per_size {
        total += v?;
    }
    Ok(normalizer(coeffs) * total)
}

pub fn total_mass(coeffs: &HoppingCoefficients, cap: usize) -> Result<f64> {
    weighted_sum(coeffs, cap, |_| true)
}

/// Partial sum of P(λ_1 ≤ ℓ) over |λ| ≤ cap.
pub fn brute_cdf_first_part(coeffs: &HoppingCoefficients, ell: usize, cap: usize) -> Result<f64> {
    weighted_sum(coeffs, cap, |l| l.first() <= ell)
}

/// Partial sum of P(all given sites occupied); sites are k_int (site = k_int + ½).
pub fn brute_correlation(coeffs: &HoppingCoefficients, sites: &[i64], cap: usize) -> Result<f64> {
    weighted_sum(coeffs, cap, |l| sites.iter().all(|&k| l.occupies(k)))
}

/// ψ_{λ,θ}(x): the upper edge of the Young diagram after the rotation
/// (u, v) ↦ (v − u, u + v), with rows of λ/θ stacked along u.
pub fn rescaled_profile(lambda: &Partition, theta: f64, x: f64) -> f64 {
    let big_x = x * theta;
    let lam = |i: usize| lambda.part(i) as f64;
    if big_x >= lam(1) {
        return big_x.abs() / theta;
    }
    let mut i = 1;
    loop {
        let fi = i as f64;
        // horizontal run of row i: X ∈ [λ_i − i, λ_i − i + 1]
        if big_x >= lam(i) - fi {
            return (2.0 * lam(i) - big_x) / theta;
        }
        // vertical drop at u = i: X ∈ [λ_{i+1} − i, λ_i − i]
        if big_x >= lam(i + 1) - fi {
            return (big_x + 2.0 * fi) / theta;
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn homogeneous_examples() {
        let h = complete_homogeneous(&MiwaTimes::new(vec![1.0]), 3);
        assert!(close(&h, &[1.0, 1.0, 0.5, 1.0 / 6.0]));
        let h = complete_homogeneous(&MiwaTimes::new(vec![0.0, 1.0]), 4);
        assert!(close(&h, &[1.0, 0.0, 1.0, 0.0, 0.5]));
        let h = complete_homogeneous(&MiwaTimes::new(vec![2.0, -1.0]), 2);
        assert!(close(&h, &[1.0, 2.0, 1.0]));
    }

    #[test]
    fn elementary_examples() {
        assert!(close(&elementary(&MiwaTimes::new(vec![1.0]), 2), &[1.0, 1.0, 0.5]));
        assert!(close(&elementary(&MiwaTimes::new(vec![0.0, 1.0]), 2), &[1.0, 0.0, -1.0]));
        assert!(close(&elementary(&MiwaTimes::new(vec![1.0, 1.0]), 1), &[1.0, 1.0]));
    }

    #[test]
    fn schur_examples() {
        let t = MiwaTimes::new(vec![0.7]);
        assert!((schur(&p(&[1]), &t).unwrap() - 0.7).abs() < 1e-15);
        let one = MiwaTimes::new(vec![1.0]);
        assert!((schur(&p(&[2, 1]), &one).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(schur(&Partition::empty(), &one).unwrap(), 1.0);
    }

    #[test]
    fn exact_mode_matches_floats() {
        let t = [
            BigRational::new(1.into(), 2.into()),
            BigRational::new((-1).into(), 3.into()),
        ];
        let tf = MiwaTimes::new(vec![0.5, -1.0 / 3.0]);
        for n in 0..=8 {
            for lambda in partitions_of(n) {
                let exact = schur_exact(&lambda, &t);
                let approx = schur(&lambda, &tf).unwrap();
                let ex = exact.numer().to_string().parse::<f64>().unwrap()
                    / exact.denom().to_string().parse::<f64>().unwrap();
                assert!((ex - approx).abs() <= 1e-13 * ex.abs().max(1e-3), "{lambda:?}");
            }
        }
        // a cancellation: with t = (1) every s_λ is f^λ/|λ|!, positive
        let unit = [BigRational::one()];
        assert!(schur_exact(&p(&[3, 1]), &unit) > BigRational::zero());
    }

    #[test]
    fn partitions_counts_and_order() {
        let counts: Vec<usize> = (0..=10).map(|n| partitions_of(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
        let four: Vec<Vec<usize>> = partitions_of(4).into_iter().map(|l| l.parts).collect();
        assert_eq!(four, vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]);
    }

    #[test]
    fn weights() {
        let c0 = HoppingCoefficients::new(vec![1.0], 0.0).unwrap();
        assert_eq!(measure_weight(&Partition::empty(), &c0).unwrap(), 1.0);
        let t = 0.8;
        let c = HoppingCoefficients::new(vec![1.0], t).unwrap();
        let w = measure_weight(&p(&[1]), &c).unwrap();
        assert!((w - (-t * t).exp() * t * t).abs() < 1e-15);
        let c = HoppingCoefficients::new(vec![1.0], 0.5).unwrap();
        assert!((total_mass(&c, 12).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cdf_examples() {
        let c0 = HoppingCoefficients::new(vec![1.0], 0.0).unwrap();
        assert_eq!(brute_cdf_first_part(&c0, 1, 10).unwrap(), 1.0);
        // λ_1 ≤ 1: single columns, s_{1^k}[θ] = θ^k/k!
        let th: f64 = 0.3;
        let c = HoppingCoefficients::new(vec![1.0], th).unwrap();
        let v = brute_cdf_first_part(&c, 1, 20).unwrap();
        let mut want = 0.0;
        let mut term = 1.0;
        for k in 0..=20 {
            if k > 0 {
                term *= th / k as f64;
            }
            want += term * term;
        }
        assert!((v - (-th * th).exp() * want).abs() < 1e-15);
    }

    #[test]
    fn correlations_at_zero_coupling() {
        let c0 = HoppingCoefficients::new(vec![1.0], 0.0).unwrap();
        assert_eq!(brute_correlation(&c0, &[-1], 6).unwrap(), 1.0);
        assert_eq!(brute_correlation(&c0, &[0], 6).unwrap(), 0.0);
    }

    #[test]
    fn sites_and_counts() {
        let l = p(&[3, 1]);
        let s: Vec<i64> = l.site_ints().collect();
        assert_eq!(s, vec![2, -1]);
        assert!(l.occupies(-3) && !l.occupies(-2) && l.occupies(2));
        assert_eq!(l.count_above(0.0), 1);
        assert_eq!(l.count_above(-2.0), 2);
        assert_eq!(l.count_above(-3.0), 3);
        assert_eq!(Partition::empty().count_above(-3.0), 3);
    }

    #[test]
    fn profiles() {
        for x in [-3.0, -0.4, 0.0, 1.7] {
            assert_eq!(rescaled_profile(&Partition::empty(), 1.0, x), f64::abs(x));
        }
        assert_eq!(rescaled_profile(&p(&[1]), 1.0, 0.0), 2.0);
        let l = p(&[2, 1]);
        let xs: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
        for w in xs.windows(2) {
            let slope = (rescaled_profile(&l, 1.0, w[1]) - rescaled_profile(&l, 1.0, w[0])) / 0.1;
            assert!((slope.abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn profile_matches_site_count_at_lattice_points() {
        for n in 0..=7 {
            for l in partitions_of(n) {
                for theta in [1.0, 2.5] {
                    for k in -10..=10 {
                        let x = k as f64 / theta;
                        let want = x + 2.0 * l.count_above(k as f64) as f64 / theta;
                        assert!((rescaled_profile(&l, theta, x) - want).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
