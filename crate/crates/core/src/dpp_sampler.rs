//! Exact sampling of the lattice determinantal process restricted to a window.
//!
//! Sites below the window are taken as occupied and sites above it as empty;
//! the measured leakage bounds the error of that truncation. Samples come from
//! the spectral (HKPV) algorithm. When more than half the window is expected
//! to be occupied the holes are sampled instead, with kernel I − K.

use crate::edge_distribution::{cdf_table, EdgeScaling};
use crate::error::{Error, Result};
use crate::kernel::{coefficient_band, kernel_matrix, CoefficientBand};
use crate::potential::{edge_profile, Dispersion, HoppingCoefficients};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

const CLIP: f64 = 1e-9;
const AUTO_LEAKAGE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct WindowedKernel {
    pub k_lo: i64,
    pub k_hi: i64,
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub leakage: f64,
    holes: bool,
}

impl WindowedKernel {
    /// Decomposes a symmetric contraction on the sites k_lo..k_lo + n.
    pub fn from_matrix(k_lo: i64, matrix: DMatrix<f64>, leakage: f64) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::InvalidInput("kernel matrix must be square and nonempty".into()));
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::InvalidInput(format!("kernel asymmetric by {asym:e}")));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let mut eigenvalues = Vec::with_capacity(n);
        for &v in eig.eigenvalues.iter() {
            if !(-CLIP..=1.0 + CLIP).contains(&v) {
                return Err(Error::InvalidInput(format!("kernel eigenvalue {v} outside [0, 1]")));
            }
            eigenvalues.push(v.clamp(0.0, 1.0));
        }
        let expected: f64 = eigenvalues.iter().sum();
        Ok(WindowedKernel {
            k_lo,
            k_hi: k_lo + n as i64 - 1,
            matrix,
            eigenvalues,
            eigenvectors: eig.eigenvectors,
            leakage,
            holes: expected > 0.5 * n as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.k_lo..=self.k_hi
    }

    pub fn expected_count(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Occupied sites (k_int) of the sample with the given index.
    pub fn sample(&self, seed: u64, index: u64) -> Vec<i64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let n = self.len();
        let chosen: Vec<usize> = (0..n)
            .filter(|&c| {
                let lam = self.eigenvalues[c];
                let keep = if self.holes { 1.0 - lam } else { lam };
                rng.random::<f64>() < keep
            })
            .collect();
        let picked = project_sample(&self.eigenvectors, &chosen, &mut rng);
        let mut mask = vec![self.holes; n];
        for i in picked {
            mask[i] = !self.holes;
        }
        mask.iter()
            .enumerate()
            .filter(|(_, &occ)| occ)
            .map(|(i, _)| self.k_lo + i as i64)
            .collect()
    }

    /// Samples 0..n in parallel; the result does not depend on the thread count.
    pub fn sample_many(&self, n: usize, seed: u64) -> Vec<Vec<i64>> {
        (0..n as u64).into_par_iter().map(|i| self.sample(seed, i)).collect()
    }
}

/// Sequential sampling from the projection onto the chosen eigenvectors.
/// Keeps p_j = squared norm of row j orthogonal to the directions already
/// used, so each step costs one pass over the rows.
fn project_sample(vecs: &DMatrix<f64>, chosen: &[usize], rng: &mut ChaCha20Rng) -> Vec<usize> {
    let n = vecs.nrows();
    let k = chosen.len();
    if k == 0 {
        return Vec::new();
    }
    // row-major copy of the selected columns
    let mut rows = vec![0.0; n * k];
    for i in 0..n {
        for (c, &col) in chosen.iter().enumerate() {
            rows[i * k + c] = vecs[(i, col)];
        }
    }
    let row = |i: usize| &rows[i * k..(i + 1) * k];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut p: Vec<f64> = (0..n).map(|i| dot(row(i), row(i))).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = p.iter().map(|v| v.max(0.0)).sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = n - 1;
        for (j, v) in p.iter().enumerate() {
            let v = v.max(0.0);
            if u < v {
                pick = j;
                break;
            }
            u -= v;
        }
        // guard against landing on a zero entry through rounding at the end
        while p[pick] <= 0.0 && pick > 0 {
            pick -= 1;
        }
        let mut w = row(pick).to_vec();
        for b in &basis {
            let c = dot(&w, b);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let norm = dot(&w, &w).sqrt();
        w.iter_mut().for_each(|x| *x /= norm);
        for (j, pj) in p.iter_mut().enumerate() {
            if *pj > 0.0 {
                let c = dot(row(j), &w);
                *pj -= c * c;
            }
        }
        p[pick] = 0.0;
        basis.push(w);
        out.push(pick);
    }
    out
}

/// Σ_{k<lo}(1 − K(k,k)) + Σ_{k>hi} K(k,k) from the band.
pub fn window_leakage(band: &CoefficientBand, lo: i64, hi: i64) -> f64 {
    let (a, b) = band.support();
    // 1 − K(k,k) = Σ_{j≤k} J_j², K(k,k) = Σ_{j>k} J_j²
    let left: f64 = (a..lo).map(|j| (lo - j) as f64 * band.get(j).powi(2)).sum();
    let right: f64 = ((hi + 2)..=b).map(|j| (j - hi - 1) as f64 * band.get(j).powi(2)).sum();
    left + right
}

/// [−b̃θ − 10√θ, bθ + 10(dθ)^{1/(2m+1)}], widened until the leakage is below 1e−6.
pub fn auto_window(coeffs: &HoppingCoefficients) -> Result<(i64, i64)> {
    let theta = coeffs.theta();
    let profile = edge_profile(coeffs)?;
    let scaling = EdgeScaling::from_profile(&profile);
    let band = coefficient_band(coeffs)?;
    let mut lo = (-profile.b_tilde * theta - 10.0 * theta.sqrt()).floor() as i64 - 2;
    let mut hi = (profile.b * theta + 10.0 * scaling.width(theta)).ceil() as i64 + 1;
    for _ in 0..8 {
        let leak = window_leakage(&band, lo, hi);
        if leak < AUTO_LEAKAGE {
            return Ok((lo, hi));
        }
        let grow = ((hi - lo) / 8).max(2);
        lo -= grow;
        hi += grow;
    }
    Err(Error::LeakageTooLarge {
        leakage: window_leakage(&band, lo, hi),
    })
}

/// Kernel restricted to [lo, hi]; `None` picks the window automatically.
pub fn windowed_kernel(
    coeffs: &HoppingCoefficients,
    window: Option<(i64, i64)>,
) -> Result<WindowedKernel> {
    let (lo, hi) = match window {
        Some(w) => w,
        None => auto_window(coeffs)?,
    };
    if hi < lo {
        return Err(Error::InvalidInput(format!("empty window [{lo}, {hi}]")));
    }
    let band = coefficient_band(coeffs)?;
    let sites: Vec<i64> = (lo..=hi).collect();
    let leakage = window_leakage(&band, lo, hi);
    WindowedKernel::from_matrix(lo, kernel_matrix(&band, &sites), leakage)
}

#[derive(Debug, Clone)]
pub struct SampleStats {
    pub n_samples: usize,
    pub seed: u64,
    pub k_lo: i64,
    /// empirical occupation of k_lo, k_lo + 1, …
    pub density: Vec<f64>,
    /// k_max (as k_int) of every sample, in sample order
    pub k_max: Vec<i64>,
}

pub fn sample_stats(wk: &WindowedKernel, n_samples: usize, seed: u64) -> SampleStats {
    let samples = wk.sample_many(n_samples, seed);
    let mut density = vec![0.0; wk.len()];
    let mut k_max = Vec::with_capacity(n_samples);
    for s in &samples {
        for &k in s {
            density[(k - wk.k_lo) as usize] += 1.0;
        }
        k_max.push(s.last().copied().unwrap_or(wk.k_lo - 1));
    }
    density.iter_mut().for_each(|v| *v /= n_samples.max(1) as f64);
    SampleStats {
        n_samples,
        seed,
        k_lo: wk.k_lo,
        density,
        k_max,
    }
}

#[derive(Debug, Clone)]
pub struct EdgeLawReport {
    pub theta: f64,
    pub scaling: EdgeScaling,
    /// k_max (as k_int) in sample order
    pub k_max: Vec<i64>,
    /// scaled k_max: (k_int + ½ − bθ)/(dθ)^{1/(2m+1)}
    pub scaled: Vec<f64>,
    /// sup_ℓ |#{k_max < ℓ}/n − P(k_max < ℓ)|
    pub ks_exact: f64,
    /// same against F_{2m+1}^{n_cuts} at the lattice images
    pub ks_limit: f64,
    pub leakage: f64,
}

/// Empirical law of k_max against the exact Toeplitz law and the Airy limit.
pub fn empirical_edge_law(
    coeffs: &HoppingCoefficients,
    n_samples: usize,
    seed: u64,
) -> Result<EdgeLawReport> {
    use crate::airy::{limiting_cdf, AiryOrder, FredholmConfig};
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let theta = coeffs.theta();
    let wk = windowed_kernel(coeffs, None)?;
    let stats = sample_stats(&wk, n_samples, seed);
    let mut kmax = stats.k_max.clone();
    kmax.sort_unstable();
    let top = (*kmax.last().unwrap()).max(wk.k_hi) + 1;
    let table = cdf_table(coeffs, top.max(1) as usize)?;
    let scaling = table.scaling;
    let empirical = |ell: i64| kmax.partition_point(|&k| k < ell) as f64 / n_samples as f64;
    let mut ks_exact: f64 = 0.0;
    for ell in 0..=top {
        let exact = table.p(ell as usize).unwrap_or(1.0);
        ks_exact = ks_exact.max((empirical(ell) - exact).abs());
    }
    let order = AiryOrder::new(scaling.m)?;
    let config = FredholmConfig::for_order(scaling.m);
    let mut ks_limit: f64 = 0.0;
    let first = kmax[0].max(0);
    for ell in first..=top {
        let s = scaling.s(theta, ell as f64);
        if !(-12.0..=40.0).contains(&s) {
            continue;
        }
        let f = limiting_cdf(&order, &config, scaling.n_cuts, s)?;
        ks_limit = ks_limit.max((empirical(ell) - f).abs());
    }
    Ok(EdgeLawReport {
        theta,
        scaling,
        scaled: stats.k_max.iter().map(|&k| scaling.s(theta, k as f64 + 0.5)).collect(),
        k_max: stats.k_max,
        ks_exact,
        ks_limit,
        leakage: wk.leakage,
    })
}

#[derive(Debug, Clone)]
pub struct LimitShapeReport {
    pub theta: f64,
    /// sup_x |N(xθ)/θ − ∫_x^∞ϱ| of every sample
    pub per_sample: Vec<f64>,
    pub p90: f64,
    /// window leakage divided by θ, the truncation part of the deviation
    pub truncation: f64,
}

/// Distance of sampled counting functions N(X) = #{particles > X} to the limit.
pub fn limit_shape_deviation(
    coeffs: &HoppingCoefficients,
    n_samples: usize,
    seed: u64,
) -> Result<LimitShapeReport> {
    let theta = coeffs.theta();
    if !(theta > 0.0) || n_samples == 0 {
        return Err(Error::InvalidInput("need theta > 0 and at least one sample".into()));
    }
    let wk = windowed_kernel(coeffs, None)?;
    let disp = Dispersion::new(coeffs)?;
    let grid: Vec<i64> = (wk.k_lo..=wk.k_hi + 1).collect();
    let limit: Vec<f64> = grid
        .iter()
        .map(|&x| disp.integrated_density(x as f64 / theta))
        .collect::<Result<_>>()?;
    let mut per_sample: Vec<f64> = wk
        .sample_many(n_samples, seed)
        .into_iter()
        .map(|s| {
            // sites are sorted; count those strictly above each grid point X
            let mut sup: f64 = 0.0;
            for (x, lim) in grid.iter().zip(&limit) {
                let above = s.len() - s.partition_point(|&k| k as f64 + 0.5 <= *x as f64);
                sup = sup.max((above as f64 / theta - lim).abs());
            }
            sup
        })
        .collect();
    let samples = per_sample.clone();
    per_sample.sort_by(|a, b| a.total_cmp(b));
    let idx = ((0.9 * n_samples as f64).ceil() as usize).clamp(1, n_samples) - 1;
    Ok(LimitShapeReport {
        theta,
        per_sample: samples,
        p90: per_sample[idx],
        truncation: wk.leakage / theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_is_the_domain_wall() {
        let c = HoppingCoefficients::new(vec![1.0], 0.0).unwrap();
        let wk = windowed_kernel(&c, None).unwrap();
        assert!(wk.k_lo < 0 && wk.k_hi >= 0);
        let want: Vec<i64> = (wk.k_lo..0).collect();
        for i in 0..5 {
            assert_eq!(wk.sample(1, i), want);
        }
    }

    #[test]
    fn keyed_streams_are_reproducible() {
        let c = HoppingCoefficients::quadratic(-1.0 / 3.0, 6.0).unwrap();
        let wk = windowed_kernel(&c, None).unwrap();
        assert!(wk.leakage < 1e-6);
        let a = wk.sample_many(6, 42);
        let b: Vec<Vec<i64>> = (0..6).map(|i| wk.sample(42, i)).collect();
        assert_eq!(a, b);
        assert_ne!(a[0], wk.sample(43, 0));
    }
}
