//! Law of the rightmost particle k_max.
//!
//! P(k_max < ℓ) = det T_ℓ · e^{−θ²Σrγ_r²}, where T_ℓ is the ℓ×ℓ Toeplitz
//! matrix of the symbol e^{−2θΣ(−1)^rγ_r cos rφ}. A discrete Fredholm
//! determinant of the kernel gives the same number by a different route.

mod toeplitz;

use crate::airy::{limiting_cdf, AiryOrder, FredholmConfig};
use crate::error::{Error, Result};
use crate::kernel::{coefficient_band, kernel_matrix, laurent_band};
use crate::potential::{edge_profile, EdgeProfile, HoppingCoefficients};
use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Desk guard on the Toeplitz order.
pub const MAX_ELL: usize = 4096;
/// Largest discrete Fredholm window.
pub const MAX_WINDOW: usize = 512;

/// Edge scaling copied from the profile: s = (ℓ − bθ)/(dθ)^{1/(2m+1)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeScaling {
    pub b: f64,
    pub d: f64,
    pub m: u32,
    pub n_cuts: u32,
}

impl EdgeScaling {
    pub fn from_profile(p: &EdgeProfile) -> Self {
        let lead = p.leading();
        EdgeScaling {
            b: p.b,
            d: lead.d,
            m: lead.m,
            n_cuts: p.n_cuts as u32,
        }
    }

    pub fn width(&self, theta: f64) -> f64 {
        (self.d * theta).powf(1.0 / (2 * self.m + 1) as f64)
    }

    pub fn s(&self, theta: f64, ell: f64) -> f64 {
        (ell - self.b * theta) / self.width(theta)
    }

    pub fn ell(&self, theta: f64, s: f64) -> f64 {
        self.b * theta + s * self.width(theta)
    }
}

#[derive(Debug, Clone)]
pub struct CdfTable {
    pub theta: f64,
    pub gammas: Vec<f64>,
    /// (ℓ, P(k_max < ℓ)) for ℓ = 0, 1, …
    pub rows: Vec<(usize, f64)>,
    pub scaling: EdgeScaling,
}

impl CdfTable {
    pub fn p(&self, ell: usize) -> Option<f64> {
        self.rows.get(ell).map(|r| r.1)
    }

    pub fn s(&self, ell: usize) -> f64 {
        self.scaling.s(self.theta, ell as f64)
    }

    /// P(k_max < y) for real y: the largest half-integer below y decides.
    pub fn p_below(&self, y: f64) -> Option<f64> {
        let ell = (y - 0.5).ceil();
        if ell <= 0.0 {
            return self.p(0);
        }
        self.p(ell as usize)
    }

    /// Real ℓ where the CDF crosses ½, linear between lattice points.
    pub fn median_location(&self) -> Option<f64> {
        self.rows.windows(2).find_map(|w| {
            let ((l0, p0), (l1, p1)) = (w[0], w[1]);
            (p0 < 0.5 && p1 >= 0.5).then(|| l0 as f64 + (0.5 - p0) / (p1 - p0) * (l1 - l0) as f64)
        })
    }
}

fn symbol_times(coeffs: &HoppingCoefficients) -> Vec<f64> {
    let theta = coeffs.theta();
    coeffs
        .gammas()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let sign = if (i + 1) % 2 == 0 { -1.0 } else { 1.0 };
            sign * theta * g
        })
        .collect()
}

fn log_normalizer(coeffs: &HoppingCoefficients) -> f64 {
    coeffs.theta().powi(2) * coeffs.sum_r_gamma_sq()
}

/// f_{−n_max}..=f_{n_max} of e^{−2θΣ(−1)^rγ_r cos rφ} in double precision.
pub fn symbol_coeffs(coeffs: &HoppingCoefficients, n_max: usize) -> Result<Vec<f64>> {
    let c = symbol_times(coeffs);
    let spread: f64 = c.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v.abs()).sum();
    let base = (8 * (spread.ceil() as usize + 64)).max(4 * n_max + 16);
    let (grid, all) = laurent_band(&c, false, base, 1e-15)?;
    let centre = grid / 2 - 1;
    Ok((0..=2 * n_max).map(|i| all[centre + i - n_max]).collect())
}

fn clamp_probability(p: f64) -> Result<f64> {
    if !(p > -1e-9 && p < 1.0 + 1e-9) {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

fn check_ell(ell: usize) -> Result<()> {
    if ell > MAX_ELL {
        return Err(Error::InvalidInput(format!("ell = {ell} above {MAX_ELL}")));
    }
    Ok(())
}

/// P(k_max < ℓ) for ℓ = 0..=ell_max from one Levinson pass.
pub fn cdf_table(coeffs: &HoppingCoefficients, ell_max: usize) -> Result<CdfTable> {
    check_ell(ell_max)?;
    let sym = toeplitz::mp_symbol(&symbol_times(coeffs), ell_max);
    let logdets = toeplitz::levinson_logdets(&sym, ell_max)?;
    let shift = log_normalizer(coeffs);
    let rows = logdets
        .iter()
        .enumerate()
        .map(|(ell, ld)| Ok((ell, clamp_probability((ld - shift).exp())?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CdfTable {
        theta: coeffs.theta(),
        gammas: coeffs.gammas().to_vec(),
        rows,
        scaling: EdgeScaling::from_profile(&edge_profile(coeffs)?),
    })
}

/// log det T_ℓ, the logarithm of the ℓ-fold Weyl integral.
pub fn toeplitz_logdet(coeffs: &HoppingCoefficients, ell: usize) -> Result<f64> {
    check_ell(ell)?;
    let sym = toeplitz::mp_symbol(&symbol_times(coeffs), ell);
    Ok(toeplitz::levinson_logdets(&sym, ell)?[ell])
}

pub fn toeplitz_cdf(coeffs: &HoppingCoefficients, ell: usize) -> Result<f64> {
    if ell == 0 {
        return Err(Error::InvalidInput("ell must be at least 1".into()));
    }
    clamp_probability((toeplitz_logdet(coeffs, ell)? - log_normalizer(coeffs)).exp())
}

/// Same quantity by f64 Cholesky of the dense T_ℓ; usable while the symbol
/// range stays below about e^{30}.
pub fn toeplitz_cdf_dense(coeffs: &HoppingCoefficients, ell: usize) -> Result<f64> {
    if ell == 0 {
        return Err(Error::InvalidInput("ell must be at least 1".into()));
    }
    check_ell(ell)?;
    let f = symbol_coeffs(coeffs, ell)?;
    let t = DMatrix::from_fn(ell, ell, |i, j| f[ell + i - j]);
    let chol = Cholesky::new(t).ok_or(Error::NotPositiveDefinite { order: ell })?;
    let logdet: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
    clamp_probability((logdet - log_normalizer(coeffs)).exp())
}

/// det(I − K) on the sites ℓ+½, …, ℓ+W−½ with the dropped trace below 1e−12.
pub fn fredholm_cdf_check(coeffs: &HoppingCoefficients, ell: usize) -> Result<f64> {
    let band = coefficient_band(coeffs)?;
    let (_, hi) = band.support();
    let start = ell as i64;
    // Σ_{k ≥ k0} K(k,k) = Σ_{j > k0} (j − k0) J_j²
    let tail_trace = |k0: i64| -> f64 {
        ((k0 + 1)..=hi.max(k0))
            .map(|j| (j - k0) as f64 * band.get(j).powi(2))
            .sum()
    };
    let mut width = 1usize;
    while tail_trace(start + width as i64) >= 1e-12 {
        if width >= MAX_WINDOW {
            return Err(Error::WindowTooSmall {
                width,
                tail: tail_trace(start + width as i64),
            });
        }
        width += 1;
    }
    let sites: Vec<i64> = (0..width as i64).map(|i| start + i).collect();
    let k = kernel_matrix(&band, &sites);
    let det = (DMatrix::identity(width, width) - k).determinant();
    clamp_probability(det)
}

#[derive(Debug, Clone)]
pub struct ConvergencePoint {
    pub ell: usize,
    pub s: f64,
    pub p: f64,
    pub limit: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub theta: f64,
    pub scaling: EdgeScaling,
    /// sup over lattice images s_ℓ ∈ [s_min, s_max] of |P(k_max < ℓ) − F(s_ℓ)|
    pub sup_lattice: f64,
    /// sup over the supplied s grid of the step-function distance
    pub sup_step: f64,
    pub lattice: Vec<ConvergencePoint>,
    /// (s, CDF_θ(s), F(s)) on the supplied grid
    pub step: Vec<(f64, f64, f64)>,
}

/// Scaled Toeplitz CDF against F_{2m+1}^{n_cuts} for each θ.
pub fn scaled_convergence_study(
    coeffs: &HoppingCoefficients,
    thetas: &[f64],
    s_grid: &[f64],
) -> Result<Vec<ConvergenceReport>> {
    scaled_convergence_study_with_power(coeffs, thetas, s_grid, None)
}

/// As above with the exponent of F_{2m+1} fixed by hand; `None` uses n_cuts.
pub fn scaled_convergence_study_with_power(
    coeffs: &HoppingCoefficients,
    thetas: &[f64],
    s_grid: &[f64],
    power: Option<u32>,
) -> Result<Vec<ConvergenceReport>> {
    if power == Some(0) {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    if s_grid.is_empty() {
        return Err(Error::InvalidInput("empty s grid".into()));
    }
    let s_min = s_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let s_max = s_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if s_min < -6.0 || s_max > 4.0 {
        return Err(Error::InvalidInput("s grid must lie in [-6, 4]".into()));
    }
    let profile = edge_profile(coeffs)?;
    let scaling = EdgeScaling::from_profile(&profile);
    let order = AiryOrder::new(scaling.m)?;
    let config = FredholmConfig::for_order(scaling.m);
    let exponent = power.unwrap_or(scaling.n_cuts);
    let limit = |s: f64| limiting_cdf(&order, &config, exponent, s);
    thetas
        .par_iter()
        .map(|&theta| {
            if !(theta > 0.0) {
                return Err(Error::InvalidInput("theta must be positive".into()));
            }
            let c = coeffs.with_theta(theta)?;
            let ell_max = scaling.ell(theta, s_max).ceil() as usize + 2;
            let table = cdf_table(&c, ell_max)?;
            let mut lattice = Vec::new();
            for &(ell, p) in &table.rows {
                let s = table.s(ell);
                if s >= s_min && s <= s_max {
                    lattice.push(ConvergencePoint { ell, s, p, limit: limit(s)? });
                }
            }
            let step = s_grid
                .iter()
                .map(|&s| {
                    let p = table
                        .p_below(scaling.ell(theta, s))
                        .ok_or_else(|| Error::InvalidInput("s beyond table".into()))?;
                    Ok((s, p, limit(s)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let sup_lattice = lattice.iter().map(|q| (q.p - q.limit).abs()).fold(0.0, f64::max);
            let sup_step = step.iter().map(|q| (q.1 - q.2).abs()).fold(0.0, f64::max);
            Ok(ConvergenceReport {
                theta,
                scaling,
                sup_lattice,
                sup_step,
                lattice,
                step,
            })
        })
        .collect()
}

/// C_n = (χ/2π)^n ∫_{[0,2π/χ]^n} Π_i cos χ(x_i − x_{i+1}) dx, indices cyclic.
pub fn oscillation_average(n: usize, chi_b: f64) -> Result<f64> {
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidInput(format!("n = {n} outside 2..=4")));
    }
    if !(chi_b > 0.0 && chi_b.is_finite()) {
        return Err(Error::InvalidInput("chi_b must be positive".into()));
    }
    // the integrand is a trigonometric polynomial of degree 2 per variable,
    // so the periodic trapezoid rule with 8 points is exact
    let pts = 8usize;
    let h = 2.0 * PI / chi_b / pts as f64;
    let total = pts.pow(n as u32);
    let mut acc = 0.0;
    let mut idx = vec![0usize; n];
    for flat in 0..total {
        let mut rest = flat;
        for slot in idx.iter_mut() {
            *slot = rest % pts;
            rest /= pts;
        }
        let mut prod = 1.0;
        for i in 0..n {
            let xi = idx[i] as f64 * h;
            let xj = idx[(i + 1) % n] as f64 * h;
            prod *= (chi_b * (xi - xj)).cos();
        }
        acc += prod;
    }
    Ok(acc / total as f64)
}
