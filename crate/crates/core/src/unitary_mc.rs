//! The dual unitary matrix model.
//!
//! Eigenvalue angles α_1..α_ℓ carry the weight
//! Π_j e^{−2θΣ_r(−1)^rγ_r cos rα_j} · Π_{j<k} |e^{iα_j} − e^{iα_k}|²,
//! whose normalizer (2π)^ℓ ℓ! · det T_ℓ links back to the fermion edge law.

use crate::edge_distribution::toeplitz_logdet;
use crate::error::{Error, Result};
use crate::potential::{global_extrema, eval_dispersion, HoppingCoefficients};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

/// ρ(α) = (1/2π)(1 − D(α − π)/x) for x ≥ b.
pub fn eigen_density_supercritical(coeffs: &HoppingCoefficients, x: f64, alpha: f64) -> Result<f64> {
    let (b, _) = global_extrema(coeffs)?;
    check_supercritical(x, b)?;
    Ok(density_at(coeffs, x, alpha))
}

fn check_supercritical(x: f64, b: f64) -> Result<()> {
    if !(x >= b * (1.0 - 1e-12)) {
        return Err(Error::SubcriticalPhase { x, b });
    }
    Ok(())
}

fn density_at(coeffs: &HoppingCoefficients, x: f64, alpha: f64) -> f64 {
    ((1.0 - eval_dispersion(coeffs, alpha - PI, 0) / x) / (2.0 * PI)).max(0.0)
}

#[derive(Debug, Clone)]
pub struct DensityCurve {
    pub x: f64,
    /// periodic grid −π + 2πj/n, j = 0..n
    pub alphas: Vec<f64>,
    pub rho: Vec<f64>,
    /// arcs (start, end) where ρ < 1e−3·max ρ; an arc through ±π has start > end
    pub support_cuts: Vec<(f64, f64)>,
}

impl DensityCurve {
    /// Periodic trapezoid integral.
    pub fn integral(&self) -> f64 {
        self.rho.iter().sum::<f64>() * 2.0 * PI / self.rho.len() as f64
    }

    pub fn zero_count(&self) -> usize {
        self.support_cuts.len()
    }
}

pub fn density_curve(coeffs: &HoppingCoefficients, x: f64, n_grid: usize) -> Result<DensityCurve> {
    if n_grid < 16 {
        return Err(Error::InvalidInput("density grid needs at least 16 points".into()));
    }
    let (b, _) = global_extrema(coeffs)?;
    check_supercritical(x, b)?;
    let alphas: Vec<f64> = (0..n_grid)
        .map(|j| -PI + 2.0 * PI * j as f64 / n_grid as f64)
        .collect();
    let rho: Vec<f64> = alphas.iter().map(|&a| density_at(coeffs, x, a)).collect();
    let peak = rho.iter().cloned().fold(0.0, f64::max);
    let low: Vec<bool> = rho.iter().map(|&r| r < 1e-3 * peak).collect();
    Ok(DensityCurve {
        x,
        support_cuts: circular_runs(&low, &alphas),
        alphas,
        rho,
    })
}

/// Maximal runs of `true` on a periodic grid, merging the run through ±π.
fn circular_runs(flags: &[bool], alphas: &[f64]) -> Vec<(f64, f64)> {
    let n = flags.len();
    if flags.iter().all(|&f| f) {
        return vec![(alphas[0], alphas[n - 1])];
    }
    // start scanning right after a `false` so no run is split
    let origin = flags.iter().position(|&f| !f).unwrap();
    let mut runs = Vec::new();
    let mut start = None;
    for step in 1..=n {
        let i = (origin + step) % n;
        match (flags[i], start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                let prev = (i + n - 1) % n;
                runs.push((alphas[s], alphas[prev]));
                start = None;
            }
            _ => {}
        }
    }
    runs
}

/// −2θΣ_r(−1)^rγ_r cos rα for one angle.
fn potential_term(coeffs: &HoppingCoefficients, theta: f64, alpha: f64) -> f64 {
    coeffs
        .gammas()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let r = (i + 1) as f64;
            let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
            -2.0 * theta * sign * g * (r * alpha).cos()
        })
        .sum()
}

/// Unnormalized log weight of the angles, with the Vandermonde written as
/// Π sin²((α_j − α_k)/2) (a factor 4 per pair below |e^{iα_j} − e^{iα_k}|²).
pub fn log_joint_density(coeffs: &HoppingCoefficients, theta: f64, angles: &[f64]) -> Result<f64> {
    let mut total: f64 = angles.iter().map(|&a| potential_term(coeffs, theta, a)).sum();
    for (j, &a) in angles.iter().enumerate() {
        for &c in &angles[j + 1..] {
            total += 2.0 * pair_log(a, c)?;
        }
    }
    Ok(total)
}

fn pair_log(a: f64, c: f64) -> Result<f64> {
    let s = ((a - c) / 2.0).sin().abs();
    if s == 0.0 {
        return Err(Error::CoincidentAngles);
    }
    Ok(s.ln())
}

#[derive(Debug, Clone)]
pub struct EigenSample {
    pub angles: Vec<f64>,
    pub log_weight: f64,
}

fn wrap(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Single-angle Gaussian random-walk Metropolis. The first 20% of the sweeps
/// are burn-in, during which σ is tuned toward 20–50% acceptance; after
/// that σ is frozen and each call to `next` returns the state after one sweep.
pub struct MetropolisChain {
    coeffs: HoppingCoefficients,
    theta: f64,
    angles: Vec<f64>,
    log_weight: f64,
    sigma: f64,
    rng: ChaCha20Rng,
    remaining: usize,
    accepted: u64,
    proposed: u64,
}

impl MetropolisChain {
    pub fn new(
        coeffs: &HoppingCoefficients,
        theta: f64,
        ell: usize,
        sweeps: usize,
        seed: u64,
    ) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidInput("ell must be at least 1".into()));
        }
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::InvalidInput("theta must be finite and nonnegative".into()));
        }
        let angles: Vec<f64> = (0..ell)
            .map(|j| -PI + 2.0 * PI * (j as f64 + 0.5) / ell as f64)
            .collect();
        let log_weight = log_joint_density(coeffs, theta, &angles)?;
        let burn = sweeps / 5;
        let mut chain = MetropolisChain {
            coeffs: coeffs.clone(),
            theta,
            angles,
            log_weight,
            sigma: 1.0,
            rng: ChaCha20Rng::seed_from_u64(seed),
            remaining: sweeps - burn,
            accepted: 0,
            proposed: 0,
        };
        let block = 50;
        let mut done = 0;
        while done < burn {
            let len = block.min(burn - done);
            let (a0, p0) = (chain.accepted, chain.proposed);
            for _ in 0..len {
                chain.sweep();
            }
            let rate = (chain.accepted - a0) as f64 / (chain.proposed - p0).max(1) as f64;
            if rate < 0.2 {
                chain.sigma *= 0.7;
            } else if rate > 0.5 {
                chain.sigma = (chain.sigma * 1.4).min(PI);
            }
            done += len;
        }
        chain.accepted = 0;
        chain.proposed = 0;
        Ok(chain)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Acceptance rate since burn-in ended.
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposed.max(1) as f64
    }

    fn sweep(&mut self) {
        let normal = Normal::new(0.0, self.sigma).expect("positive sigma");
        for j in 0..self.angles.len() {
            let old = self.angles[j];
            let new = wrap(old + normal.sample(&mut self.rng));
            let mut delta = potential_term(&self.coeffs, self.theta, new)
                - potential_term(&self.coeffs, self.theta, old);
            let mut coincident = false;
            for (k, &other) in self.angles.iter().enumerate() {
                if k == j {
                    continue;
                }
                match (pair_log(new, other), pair_log(old, other)) {
                    (Ok(a), Ok(b)) => delta += 2.0 * (a - b),
                    _ => coincident = true,
                }
            }
            self.proposed += 1;
            let u: f64 = self.rng.random();
            if !coincident && u.ln() < delta {
                self.angles[j] = new;
                self.log_weight += delta;
                self.accepted += 1;
            }
        }
    }
}

impl Iterator for MetropolisChain {
    type Item = EigenSample;

    fn next(&mut self) -> Option<EigenSample> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.sweep();
        let mut angles = self.angles.clone();
        angles.sort_by(|a, b| a.total_cmp(b));
        Some(EigenSample {
            angles,
            log_weight: self.log_weight,
        })
    }
}

pub fn metropolis_chain(
    coeffs: &HoppingCoefficients,
    theta: f64,
    ell: usize,
    sweeps: usize,
    seed: u64,
) -> Result<MetropolisChain> {
    MetropolisChain::new(coeffs, theta, ell, sweeps, seed)
}

#[derive(Debug, Clone)]
pub struct AngleHistogram {
    /// bin centres on [−π, π)
    pub centres: Vec<f64>,
    /// normalized to the one-point density (integrates to 1)
    pub density: Vec<f64>,
    pub acceptance_rate: f64,
    pub sigma: f64,
}

impl AngleHistogram {
    /// Histogram value at α, by bin.
    pub fn at(&self, alpha: f64) -> f64 {
        let n = self.density.len();
        let idx = (((wrap(alpha) + PI) / (2.0 * PI) * n as f64) as usize).min(n - 1);
        self.density[idx]
    }

    /// Mean histogram value at π ± χ over its value at 0.
    pub fn dip_ratio(&self, chi: f64) -> f64 {
        0.5 * (self.at(PI + chi) + self.at(PI - chi)) / self.at(0.0)
    }
}

/// Runs a chain and bins all angles of every kept sweep.
pub fn angle_histogram(chain: MetropolisChain, bins: usize) -> AngleHistogram {
    let mut counts = vec![0u64; bins];
    let mut total = 0u64;
    let mut chain = chain;
    for s in chain.by_ref() {
        for a in s.angles {
            let idx = (((a + PI) / (2.0 * PI) * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1;
            total += 1;
        }
    }
    let width = 2.0 * PI / bins as f64;
    AngleHistogram {
        centres: (0..bins).map(|i| -PI + (i as f64 + 0.5) * width).collect(),
        density: counts
            .iter()
            .map(|&c| c as f64 / (total.max(1) as f64 * width))
            .collect(),
        acceptance_rate: chain.acceptance_rate(),
        sigma: chain.sigma(),
    }
}

/// Z_ℓ = (1/((2π)^ℓ ℓ!))∫ Π weights · |Δ|² dα = det T_ℓ = e^{θ²Σrγ_r²}P(k_max < ℓ).
pub fn partition_function_toeplitz(coeffs: &HoppingCoefficients, ell: usize) -> Result<f64> {
    if ell == 0 {
        return Ok(1.0);
    }
    Ok(toeplitz_logdet(coeffs, ell)?.exp())
}
