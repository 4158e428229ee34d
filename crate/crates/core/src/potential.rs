//! The dispersion D(φ) = Σ 2rγ_r cos rφ, its Fermi seas and edge data.

use crate::error::{Error, Result};
use crate::quad;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct HoppingCoefficients {
    gammas: Vec<f64>,
    theta: f64,
}

impl HoppingCoefficients {
    /// Trailing zeros are trimmed. At least one weight must be nonzero.
    pub fn new(mut gammas: Vec<f64>, theta: f64) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidInput("empty hopping list".into()));
        }
        if gammas.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidInput("non-finite hopping weight".into()));
        }
        if !theta.is_finite() || theta < 0.0 {
            return Err(Error::InvalidInput(format!("theta must be >= 0, got {theta}")));
        }
        while gammas.last() == Some(&0.0) {
            gammas.pop();
        }
        if gammas.is_empty() {
            return Err(Error::DegenerateEdge);
        }
        Ok(Self { gammas, theta })
    }

    /// γ = (1, γ₂), the quadratic family.
    pub fn quadratic(gamma2: f64, theta: f64) -> Result<Self> {
        Self::new(vec![1.0, gamma2], theta)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.gammas.clone(), theta)
    }

    /// Largest r with γ_r ≠ 0.
    pub fn degree(&self) -> usize {
        self.gammas.len()
    }

    /// Σ r γ_r², the normalizer exponent of the Schur measure (times θ²).
    pub fn sum_r_gamma_sq(&self) -> f64 {
        self.iter().map(|(r, g)| r * g * g).sum()
    }

    /// Σ 2r|γ_r|, an upper bound for |D|.
    pub fn scale(&self) -> f64 {
        self.iter().map(|(r, g)| 2.0 * r * g.abs()).sum()
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gammas
            .iter()
            .enumerate()
            .map(|(i, &g)| ((i + 1) as f64, g))
    }
}

/// p-th derivative of D at φ.
pub fn eval_dispersion(coeffs: &HoppingCoefficients, phi: f64, order: u32) -> f64 {
    let shift = order as f64 * PI / 2.0;
    coeffs
        .iter()
        .map(|(r, g)| 2.0 * g * r.powi(order as i32 + 1) * (r * phi + shift).cos())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermiSea {
    pub x: f64,
    /// 0 ≤ χ_1 ≤ … ≤ χ_2p ≤ π; consecutive pairs are the intervals of I_x ∩ [0, π].
    pub boundaries: Vec<f64>,
    pub cuts: usize,
}

impl FermiSea {
    fn from_intervals(x: f64, intervals: &[(f64, f64)]) -> Self {
        let boundaries: Vec<f64> = intervals.iter().flat_map(|&(a, b)| [a, b]).collect();
        let cuts = count_cuts(intervals);
        Self { x, boundaries, cuts }
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.boundaries.chunks(2).map(|c| (c[0], c[1]))
    }

    /// Boundaries not sitting at 0 or π.
    pub fn interior_boundaries(&self) -> Vec<f64> {
        self.boundaries
            .iter()
            .copied()
            .filter(|&c| c != 0.0 && c != PI)
            .collect()
    }

    /// ϱ = |I_x| / 2π.
    pub fn density(&self) -> f64 {
        self.intervals().map(|(a, b)| b - a).sum::<f64>() / PI
    }
}

fn count_cuts(intervals: &[(f64, f64)]) -> usize {
    let wide: Vec<_> = intervals.iter().filter(|(a, b)| b > a).collect();
    if wide.len() == 1 && wide[0].0 == 0.0 && wide[0].1 == PI {
        return 0;
    }
    wide.iter()
        .map(|&&(a, b)| 2 - usize::from(a == 0.0) - usize::from(b == PI))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maximizer {
    pub chi_b: f64,
    pub m: u32,
    pub d: f64,
}

impl Maximizer {
    pub fn interior(&self) -> bool {
        self.chi_b > 0.0 && self.chi_b < PI
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProfile {
    pub b: f64,
    pub b_tilde: f64,
    pub maximizers: Vec<Maximizer>,
    pub n_cuts: usize,
}

impl EdgeProfile {
    /// The maximizer of lowest order; with several, the first in angle.
    pub fn leading(&self) -> &Maximizer {
        self.maximizers
            .iter()
            .min_by_key(|mx| mx.m)
            .expect("an edge profile always has a maximizer")
    }

    pub fn m(&self) -> u32 {
        self.leading().m
    }

    /// (dθ)^{1/(2m+1)}, the edge fluctuation scale.
    pub fn scale(&self, theta: f64) -> f64 {
        let mx = self.leading();
        (mx.d * theta).powf(1.0 / (2 * mx.m + 1) as f64)
    }

    /// s = (ℓ − bθ)/(dθ)^{1/(2m+1)}.
    pub fn scaled(&self, theta: f64, ell: f64) -> f64 {
        (ell - self.b * theta) / self.scale(theta)
    }
}

/// D with its critical points precomputed; D is monotone between them.
#[derive(Debug, Clone)]
pub struct Dispersion {
    coeffs: HoppingCoefficients,
    critical: Vec<f64>,
    values: Vec<f64>,
    scale: f64,
}

const ROOT_TOL: f64 = 1e-12;

impl Dispersion {
    pub fn new(coeffs: &HoppingCoefficients) -> Result<Self> {
        let scale = coeffs.scale();
        let grid = 4096 * coeffs.degree();
        let h = PI / grid as f64;
        let d1 = |phi: f64| eval_dispersion(coeffs, phi, 1);
        let mut critical = vec![0.0];
        let mut prev = d1(h * 0.5);
        for i in 1..grid {
            let phi = h * (i as f64 + 0.5);
            let cur = d1(phi);
            if prev == 0.0 || prev.signum() != cur.signum() {
                let c = polish_critical(coeffs, phi - h, phi);
                if c > 0.0 && c < PI && c - critical.last().unwrap() > 1e-12 {
                    critical.push(c);
                }
            }
            prev = cur;
        }
        if PI - critical.last().unwrap() > 1e-12 {
            critical.push(PI);
        } else {
            *critical.last_mut().unwrap() = PI;
        }
        let values = critical.iter().map(|&c| eval_dispersion(coeffs, c, 0)).collect();
        Ok(Self {
            coeffs: coeffs.clone(),
            critical,
            values,
            scale,
        })
    }

    pub fn coeffs(&self) -> &HoppingCoefficients {
        &self.coeffs
    }

    pub fn critical_points(&self) -> &[f64] {
        &self.critical
    }

    pub fn eval(&self, phi: f64, order: u32) -> f64 {
        eval_dispersion(&self.coeffs, phi, order)
    }

    pub fn extrema(&self) -> (f64, f64) {
        let b = self.values.iter().cloned().fold(f64::MIN, f64::max);
        let lo = self.values.iter().cloned().fold(f64::MAX, f64::min);
        (b, -lo)
    }

    fn sign(&self, v: f64, x: f64) -> i8 {
        let diff = v - x;
        if diff.abs() <= ROOT_TOL * self.scale.max(1.0) {
            0
        } else if diff > 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn fermi_sea(&self, x: f64) -> Result<FermiSea> {
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        let mut push = |a: f64, b: f64| match pieces.last_mut() {
            Some(last) if last.1 == a => last.1 = b,
            _ => pieces.push((a, b)),
        };
        let n = self.critical.len();
        for i in 0..n - 1 {
            let (c0, c1) = (self.critical[i], self.critical[i + 1]);
            let (s0, s1) = (self.sign(self.values[i], x), self.sign(self.values[i + 1], x));
            match (s0, s1) {
                (-1, -1) => {}
                (0, -1) => push(c0, c0),
                (-1, 0) => push(c1, c1),
                (1, -1) => push(c0, self.root(c0, c1, x)?),
                (-1, 1) => push(self.root(c0, c1, x)?, c1),
                _ => push(c0, c1),
            }
        }
        let sea = FermiSea::from_intervals(x, &pieces);
        self.validate(&sea)?;
        Ok(sea)
    }

    fn root(&self, a: f64, b: f64, x: f64) -> Result<f64> {
        let f = |phi: f64| self.eval(phi, 0) - x;
        let (mut lo, mut hi) = (a, b);
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-9 {
                break;
            }
        }
        let mut phi = 0.5 * (lo + hi);
        for _ in 0..20 {
            let step = f(phi) / self.eval(phi, 1);
            let next = phi - step;
            if !(next >= a && next <= b) || !step.is_finite() {
                break;
            }
            phi = next;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let residual = f(phi).abs();
        if residual > ROOT_TOL * self.scale.max(1.0) {
            return Err(Error::SolverFailure { phi, residual });
        }
        Ok(phi)
    }

    fn validate(&self, sea: &FermiSea) -> Result<()> {
        let tol = 1e-9 * self.scale.max(1.0);
        let mut edges = vec![0.0];
        edges.extend(&sea.boundaries);
        edges.push(PI);
        for w in edges.windows(2).enumerate() {
            let (i, pair) = w;
            if pair[1] - pair[0] < 1e-9 {
                continue;
            }
            let inside = i % 2 == 1;
            for t in [0.25, 0.5, 0.75] {
                let phi = pair[0] + t * (pair[1] - pair[0]);
                let v = self.eval(phi, 0) - sea.x;
                if (inside && v < -tol) || (!inside && v > tol) {
                    return Err(Error::SolverFailure { phi, residual: v.abs() });
                }
            }
        }
        Ok(())
    }

    pub fn edge_profile(&self) -> Result<EdgeProfile> {
        let (b, b_tilde) = self.extrema();
        let mut maximizers = Vec::new();
        for (&c, &v) in self.critical.iter().zip(&self.values) {
            if b - v > 1e-10 * self.scale.max(1.0) {
                continue;
            }
            let (chi_b, order) = refine_maximizer(&self.coeffs, c);
            if order % 2 == 1 {
                continue;
            }
            let p = order;
            let d = -self.eval(chi_b, p) / factorial(p);
            if d <= 0.0 {
                continue;
            }
            maximizers.push(Maximizer { chi_b, m: p / 2, d });
        }
        if maximizers.is_empty() {
            return Err(Error::DegenerateEdge);
        }
        let eps = 1e-6 * b.max(1.0);
        let n_cuts = self.fermi_sea(b - eps)?.cuts;
        Ok(EdgeProfile {
            b,
            b_tilde,
            maximizers,
            n_cuts,
        })
    }

    /// ∫_x^∞ ϱ.
    pub fn integrated_density(&self, x: f64) -> Result<f64> {
        let (b, b_tilde) = self.extrema();
        if x >= b {
            return Ok(0.0);
        }
        let mut total = 0.0;
        let start = if x < -b_tilde {
            total += -b_tilde - x;
            -b_tilde
        } else {
            x
        };
        let mut cuts: Vec<f64> = self
            .values
            .iter()
            .copied()
            .filter(|&v| v > start && v < b)
            .collect();
        cuts.push(start);
        cuts.push(b);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut failure = None;
        for w in cuts.windows(2) {
            total += quad::adaptive(
                |y| match self.fermi_sea(y) {
                    Ok(sea) => sea.density(),
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                w[0],
                w[1],
                1e-12,
            );
        }
        match failure {
            Some(e) => Err(e),
            None => Ok(total),
        }
    }

    pub fn limit_density(&self, x: f64) -> Result<f64> {
        Ok(self.fermi_sea(x)?.density())
    }

    /// Ω(x) = x + 2∫_x^∞ ϱ.
    pub fn limit_shape(&self, x: f64) -> Result<f64> {
        Ok(x + 2.0 * self.integrated_density(x)?)
    }
}

fn factorial(p: u32) -> f64 {
    (1..=p).map(f64::from).product()
}

/// Bisection on D′ inside a sign-change bracket, then a few Newton steps.
fn polish_critical(coeffs: &HoppingCoefficients, a: f64, b: f64) -> f64 {
    let d1 = |phi: f64| eval_dispersion(coeffs, phi, 1);
    let (mut lo, mut hi) = (a.max(0.0), b.min(PI));
    let flo = d1(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = d1(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Order of the first clearly nonvanishing derivative at a critical point,
/// and the point re-polished on the last vanishing derivative (a simple root).
fn refine_maximizer(coeffs: &HoppingCoefficients, c: f64) -> (f64, u32) {
    let natural = |p: u32| -> f64 {
        coeffs
            .iter()
            .map(|(r, g)| 2.0 * r.powi(p as i32 + 1) * g.abs())
            .sum()
    };
    let cap = 2 * coeffs.degree() as u32 + 2;
    let mut p = 2;
    while p < cap && eval_dispersion(coeffs, c, p).abs() < 1e-5 * natural(p) {
        p += 1;
    }
    let mut phi = c;
    if c > 0.0 && c < PI {
        for _ in 0..30 {
            let step = eval_dispersion(coeffs, phi, p - 1) / eval_dispersion(coeffs, phi, p);
            if !step.is_finite() {
                break;
            }
            phi -= step;
            if step.abs() < 1e-17 {
                break;
            }
        }
    }
    let mut order = 1;
    while order < cap && eval_dispersion(coeffs, phi, order).abs() < 1e-9 * natural(order) {
        order += 1;
    }
    (phi, order)
}

pub fn global_extrema(coeffs: &HoppingCoefficients) -> Result<(f64, f64)> {
    Ok(Dispersion::new(coeffs)?.extrema())
}

pub fn fermi_sea(coeffs: &HoppingCoefficients, x: f64) -> Result<FermiSea> {
    Dispersion::new(coeffs)?.fermi_sea(x)
}

pub fn edge_profile(coeffs: &HoppingCoefficients) -> Result<EdgeProfile> {
    Dispersion::new(coeffs)?.edge_profile()
}

pub fn limit_density(coeffs: &HoppingCoefficients, x: f64) -> Result<f64> {
    Dispersion::new(coeffs)?.limit_density(x)
}

pub fn limit_shape(coeffs: &HoppingCoefficients, x: f64) -> Result<f64> {
    Dispersion::new(coeffs)?.limit_shape(x)
}

/// Closed-form Fermi sea of D = 2cosφ + 4γcos2φ, read off from the roots
/// of y ↦ 8γy² + 2y − 4γ − x with y = cos χ.
pub fn quadratic_fermi_sea_oracle(gamma2: f64, x: f64) -> FermiSea {
    let g = gamma2;
    let full = [(0.0, PI)];
    let none: [(f64, f64); 0] = [];
    let acos = |y: f64| y.clamp(-1.0, 1.0).acos();
    let roots = || {
        let disc = (1.0 + 8.0 * x * g + 32.0 * g * g).max(0.0).sqrt();
        ((-1.0 + disc) / (8.0 * g), (-1.0 - disc) / (8.0 * g))
    };
    let intervals: Vec<(f64, f64)> = if g == 0.0 {
        if x < -2.0 {
            full.to_vec()
        } else if x < 2.0 {
            vec![(0.0, acos(x / 2.0))]
        } else {
            none.to_vec()
        }
    } else if g.abs() <= 0.125 {
        if x < 4.0 * g - 2.0 {
            full.to_vec()
        } else if x < 4.0 * g + 2.0 {
            vec![(0.0, acos(roots().0))]
        } else {
            none.to_vec()
        }
    } else if g < 0.0 {
        // split at the right edge
        let top = -(1.0 + 32.0 * g * g) / (8.0 * g);
        if x < 4.0 * g - 2.0 {
            full.to_vec()
        } else if x < 4.0 * g + 2.0 {
            vec![(0.0, acos(roots().0))]
        } else if x < top {
            let (yp, ym) = roots();
            vec![(acos(ym), acos(yp))]
        } else {
            none.to_vec()
        }
    } else {
        // split at the left edge
        let bottom = -(1.0 + 32.0 * g * g) / (8.0 * g);
        if x < bottom {
            full.to_vec()
        } else if x < 4.0 * g - 2.0 {
            let (yp, ym) = roots();
            vec![(0.0, acos(yp)), (acos(ym), PI)]
        } else if x < 4.0 * g + 2.0 {
            vec![(0.0, acos(roots().0))]
        } else {
            none.to_vec()
        }
    };
    FermiSea::from_intervals(x, &intervals)
}
