//! The exact correlation kernel K_{θγ}(k, ℓ) on half-integer sites.
//!
//! Sites are passed as integers: `k_int` stands for the site k_int + ½.
//! With J_n the Laurent coefficients of F(z) = exp(θΣγ_r(z^r − z^{−r})),
//! K(k, ℓ) = Σ_{j≥1} J_{k_int+j} J_{ℓ_int+j}.

use crate::airy::{airy_kernel, AiryOrder};
use crate::error::{Error, Result};
use crate::potential::{EdgeProfile, FermiSea, HoppingCoefficients};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// The tensor rule is O(M²); 2^13 nodes per circle is about a second.
const MAX_QUAD_NODES: usize = 1 << 13;

#[derive(Debug, Clone)]
pub struct CoefficientBand {
    pub theta: f64,
    pub gammas: Vec<f64>,
    pub half_width: i64,
    /// J_{lo}..=J_{hi}, the part of the band above 1e−18.
    lo: i64,
    values: Vec<f64>,
}

impl CoefficientBand {
    pub fn get(&self, n: i64) -> f64 {
        if n < self.lo || n >= self.lo + self.values.len() as i64 {
            0.0
        } else {
            self.values[(n - self.lo) as usize]
        }
    }

    pub fn support(&self) -> (i64, i64) {
        (self.lo, self.lo + self.values.len() as i64 - 1)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Laurent coefficients of exp(Σ_r c_r (z^r − z^{−r})) (odd = true) or
/// exp(Σ_r c_r (z^r + z^{−r})) (odd = false) from an FFT on the unit circle.
/// Returns (grid, coefficients indexed −M/2..M/2) after the tail check.
pub(crate) fn laurent_band(
    c: &[f64],
    odd: bool,
    base_grid: usize,
    tail_tol: f64,
) -> Result<(usize, Vec<f64>)> {
    let mut grid = base_grid.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    for attempt in 0..4 {
        let fft = planner.plan_fft_forward(grid);
        let mut buf: Vec<Complex64> = (0..grid)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / grid as f64;
                let s: f64 = c
                    .iter()
                    .enumerate()
                    .map(|(i, cr)| {
                        let r = (i + 1) as f64;
                        2.0 * cr * if odd { (r * phi).sin() } else { (r * phi).cos() }
                    })
                    .sum();
                if odd {
                    Complex64::new(0.0, s).exp()
                } else {
                    Complex64::new(s.exp(), 0.0)
                }
            })
            .collect();
        fft.process(&mut buf);
        let half = grid as i64 / 2;
        let scale = 1.0 / grid as f64;
        let at = |n: i64| buf[n.rem_euclid(grid as i64) as usize] * scale;
        let coeffs: Vec<f64> = (-half + 1..half).map(|n| at(n).re).collect();
        let peak = coeffs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let imag = (-half + 1..half).fold(0.0f64, |a, n| a.max(at(n).im.abs()));
        let tail = (-half + 1..half)
            .filter(|n| n.abs() >= half - 8)
            .fold(0.0f64, |a, n| a.max(at(n).norm()));
        if tail < tail_tol * peak.max(1.0) && imag < 1e-13 * peak.max(1.0) {
            return Ok((grid, coeffs));
        }
        if attempt == 3 {
            return Err(Error::BandTooNarrow { grid, tail });
        }
        grid *= 2;
    }
    unreachable!()
}

/// FFT extraction of J_n on a grid of at least 8(⌈θΣr|γ_r|⌉ + 64) points.
pub fn coefficient_band(coeffs: &HoppingCoefficients) -> Result<CoefficientBand> {
    let theta = coeffs.theta();
    let spread: f64 = coeffs.iter().map(|(r, g)| r * g.abs()).sum::<f64>() * theta;
    let base = 8 * (spread.ceil() as usize + 64);
    let c: Vec<f64> = coeffs.gammas().iter().map(|g| theta * g).collect();
    let (grid, all) = laurent_band(&c, true, base, 1e-15)?;
    let half = grid as i64 / 2;
    let first = all.iter().position(|v| v.abs() > 1e-18).unwrap_or(0);
    let last = all.iter().rposition(|v| v.abs() > 1e-18).unwrap_or(0);
    Ok(CoefficientBand {
        theta,
        gammas: coeffs.gammas().to_vec(),
        half_width: half,
        lo: first as i64 - half + 1,
        values: all[first..=last].to_vec(),
    })
}

/// K(k_int + ½, l_int + ½) from the band.
pub fn kernel_eval(band: &CoefficientBand, k_int: i64, l_int: i64) -> f64 {
    let (lo, hi) = band.support();
    let j0 = (lo - k_int.min(l_int)).max(1);
    let j1 = hi - k_int.max(l_int);
    (j0..=j1)
        .map(|j| band.get(k_int + j) * band.get(l_int + j))
        .sum()
}

/// [K(k, ℓ)] over the given sites.
pub fn kernel_matrix(band: &CoefficientBand, sites: &[i64]) -> DMatrix<f64> {
    let n = sites.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel_eval(band, sites[i], sites[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// The double contour integral on |z| = 1+ε, |w| = 1−ε by a tensor trapezoid
/// rule, doubling M until two values agree to 1e−10.
pub fn kernel_eval_quadrature(
    coeffs: &HoppingCoefficients,
    k_int: i64,
    l_int: i64,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.2) {
        return Err(Error::InvalidInput(format!("contour offset {eps} outside (0, 0.2]")));
    }
    let theta = coeffs.theta();
    let log_f = |z: Complex64| -> Complex64 {
        coeffs
            .iter()
            .map(|(r, g)| {
                let zr = z.powi(r as i32);
                (zr - zr.inv()) * (theta * g)
            })
            .sum()
    };
    let eval = |m: usize| -> f64 {
        let nodes = |radius: f64| -> Vec<Complex64> {
            (0..m)
                .map(|a| Complex64::from_polar(radius, 2.0 * PI * a as f64 / m as f64))
                .collect()
        };
        let zs = nodes(1.0 + eps);
        let ws = nodes(1.0 - eps);
        let az: Vec<Complex64> = zs
            .iter()
            .map(|&z| (log_f(z) - z.ln() * k_int as f64).exp())
            .collect();
        let bw: Vec<Complex64> = ws
            .iter()
            .map(|&w| (w.ln() * (l_int + 1) as f64 - log_f(w)).exp())
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (z, a) in zs.iter().zip(&az) {
            let mut row = Complex64::new(0.0, 0.0);
            for (w, b) in ws.iter().zip(&bw) {
                row += b / (z - w);
            }
            acc += a * row;
        }
        acc.re / (m * m) as f64
    };
    let mut m = 64;
    let mut prev = eval(m);
    let mut delta = f64::INFINITY;
    while m < MAX_QUAD_NODES {
        m *= 2;
        let cur = eval(m);
        delta = (cur - prev).abs();
        if delta < 1e-10 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence { nodes: m, delta })
}

/// Extended sine kernel: (1/2π)∫_{I_x} e^{iφδ} dφ.
pub fn local_sine_prediction(sea: &FermiSea, delta: i64) -> f64 {
    if delta == 0 {
        return sea.density();
    }
    let d = delta as f64;
    sea.intervals()
        .map(|(a, b)| ((b * d).sin() - (a * d).sin()) / (PI * d))
        .sum()
}

/// (dθ)^{−1/(2m+1)}·2cos(χ_b(k−ℓ))·A_{2m+1}(x, y), x = (k − bθ)/(dθ)^{1/(2m+1)}.
pub fn edge_prediction(profile: &EdgeProfile, theta: f64, k_int: i64, l_int: i64) -> Result<f64> {
    let lead = profile.leading();
    let same_order = profile.maximizers.iter().filter(|m| m.m == lead.m).count();
    if same_order != 1 || !lead.interior() {
        return Err(Error::UnsupportedEdge(
            "prediction needs a single interior maximizer".into(),
        ));
    }
    if profile.n_cuts != 2 {
        return Err(Error::UnsupportedEdge(format!(
            "{} cuts below the edge",
            profile.n_cuts
        )));
    }
    if !(theta > 0.0) {
        return Err(Error::InvalidInput("theta must be positive".into()));
    }
    let scale = profile.scale(theta);
    let x = profile.scaled(theta, k_int as f64 + 0.5);
    let y = profile.scaled(theta, l_int as f64 + 0.5);
    if x.abs() > 6.0 || y.abs() > 6.0 {
        return Err(Error::InvalidInput(format!(
            "edge variables ({x:.2}, {y:.2}) outside [-6, 6]"
        )));
    }
    let order = AiryOrder::new(lead.m)?;
    let phase = (lead.chi_b * (k_int - l_int) as f64).cos();
    Ok(2.0 * phase * airy_kernel(&order, x, y)? / scale)
}
