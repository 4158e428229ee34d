//! Order-m Airy functions Ai_{2m+1}, their kernels and the Fredholm
//! determinants F_{2m+1}(s) = det(I − A)_{L²(s,∞)}.
//!
//! Ai_{2m+1}(x) = (1/2πi)∫ exp((−1)^{m−1}ζ^{2m+1}/(2m+1) − xζ) dζ along
//! ζ = σ + it, so Ai_{2m+1}^{(2m)}(x) = (−1)^{m−1} x Ai_{2m+1}(x).

use crate::error::{Error, Result};
use crate::quad;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// log of the absolute tail level the contour integrand must reach.
const LOG_TAIL: f64 = -41.5; // ln 1e-18
/// Largest admissible log-magnitude of the integrand (≈ 3 digits of cancellation).
const LOG_PEAK: f64 = 7.0;
const PANEL: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryOrder {
    pub m: u32,
    pub contour_sigma: f64,
    pub t_max: f64,
}

impl AiryOrder {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > 4 {
            return Err(Error::InvalidInput(format!("Airy order m = {m} outside 1..=4")));
        }
        let sigma = 1.0;
        let t_max = tail_point(m, 0.0, sigma, 64.0).ok_or(Error::TruncationFailure {
            t_max: 64.0,
            tail: f64::NAN,
        })?;
        let order = Self {
            m,
            contour_sigma: sigma,
            t_max,
        };
        let tail = order.log_magnitude(0.0, sigma, t_max);
        if tail > LOG_TAIL {
            return Err(Error::TruncationFailure { t_max, tail: tail.exp() });
        }
        Ok(order)
    }

    fn exponent(&self, x: f64, z: Complex64) -> Complex64 {
        exponent(self.m, x, z)
    }

    fn log_magnitude(&self, x: f64, sigma: f64, t: f64) -> f64 {
        self.exponent(x, Complex64::new(sigma, t)).re
    }
}

fn exponent(m: u32, x: f64, z: Complex64) -> Complex64 {
    let n = 2 * m + 1;
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    z.powu(n) * (sign / n as f64) - z * x
}

/// First t beyond the integrand's peak where its log-magnitude stays below
/// LOG_TAIL; None if that does not happen before `cap`.
fn tail_point(m: u32, x: f64, sigma: f64, cap: f64) -> Option<f64> {
    let f = |t: f64| exponent(m, x, Complex64::new(sigma, t)).re;
    let dt = 0.05;
    let mut t = 0.0;
    let mut prev = f(0.0);
    while t < cap {
        t += dt;
        let cur = f(t);
        if cur < LOG_TAIL && cur < prev {
            return Some(t);
        }
        prev = cur;
    }
    None
}

/// Peak log-magnitude along the line and a rough node count.
fn contour_cost(m: u32, x: f64, sigma: f64, t_end: f64) -> (f64, f64) {
    let mut peak = f64::MIN;
    let mut nodes = 0.0;
    let steps = 200;
    let dt = t_end / steps as f64;
    for i in 0..=steps {
        let t = i as f64 * dt;
        let z = Complex64::new(sigma, t);
        peak = peak.max(exponent(m, x, z).re);
        nodes += dt * freq_bound(m, x, sigma, t) / (2.0 * PI);
    }
    (peak, nodes * PANEL as f64 + t_end / 0.5 * PANEL as f64)
}

/// Bound on |d/dt Im f(σ+it)| = |Re f′(ζ)| for t′ ≤ t.
fn freq_bound(m: u32, x: f64, sigma: f64, t: f64) -> f64 {
    (sigma * sigma + t * t).powi(m as i32) + x.abs()
}

/// Contour abscissa for a given x: the cheapest vertical line whose
/// integrand never exceeds e^{LOG_PEAK} (so cancellation stays mild).
fn choose_sigma(order: &AiryOrder, x: f64) -> Result<(f64, f64)> {
    let cap = 4.0 * order.t_max;
    let mut best: Option<(f64, f64, f64)> = None;
    let mut fallback: Option<(f64, f64, f64)> = None;
    let mut sigma = 0.05;
    while sigma < 16.0 {
        if let Some(t_end) = tail_point(order.m, x, sigma, cap) {
            let (peak, cost) = contour_cost(order.m, x, sigma, t_end);
            if peak <= LOG_PEAK {
                if best.is_none_or(|b| cost < b.2) {
                    best = Some((sigma, t_end, cost));
                }
            } else if fallback.is_none_or(|b| peak < b.2) {
                fallback = Some((sigma, t_end, peak));
            }
        }
        sigma *= 1.15;
    }
    match best.or(fallback) {
        Some((s, t, _)) => Ok((s, t)),
        None => Err(Error::TruncationFailure {
            t_max: cap,
            tail: order.log_magnitude(x, order.contour_sigma, cap).exp(),
        }),
    }
}

/// Ai_{2m+1}^{(j)}(x) for j = 0..count.
pub fn airy_derivatives(order: &AiryOrder, x: f64, count: usize) -> Result<Vec<f64>> {
    if !(x.abs() <= 40.0) {
        return Err(Error::InvalidInput(format!("|x| = {x} exceeds 40")));
    }
    let (sigma, t_end) = choose_sigma(order, x)?;
    let (gx, gw) = quad::gauss_legendre(PANEL);
    let mut acc = vec![0.0; count];
    let mut t = 0.0;
    while t < t_end {
        let w_bound = freq_bound(order.m, x, sigma, t + 0.5);
        let h = (2.0 * PI / w_bound).min(0.5).min(t_end - t).max(1e-3);
        for (u, w) in gx.iter().zip(&gw) {
            let tt = t + 0.5 * h * (u + 1.0);
            let z = Complex64::new(sigma, tt);
            let e = order.exponent(x, z).exp() * (0.5 * h * w);
            let mut zp = Complex64::new(1.0, 0.0);
            for a in acc.iter_mut() {
                *a += (zp * e).re;
                zp *= -z;
            }
        }
        t += h;
    }
    Ok(acc.into_iter().map(|a| a / PI).collect())
}

pub fn airy_fn(order: &AiryOrder, x: f64) -> Result<f64> {
    Ok(airy_derivatives(order, x, 1)?[0])
}

/// Point beyond which |Ai_{2m+1}| < 1e−16 for good.
fn decay_cut(order: &AiryOrder) -> Result<f64> {
    static CUTS: [OnceLock<f64>; 4] = [const { OnceLock::new() }; 4];
    let slot = &CUTS[order.m as usize - 1];
    if let Some(v) = slot.get() {
        return Ok(*v);
    }
    let mut u = 0.0;
    let mut prev = airy_fn(order, u)?.abs();
    loop {
        u += 0.5;
        let cur = airy_fn(order, u)?.abs();
        if cur < 1e-16 && cur < prev {
            break;
        }
        prev = cur;
    }
    Ok(*slot.get_or_init(|| u))
}

/// A_{2m+1}(x, y) = ∫_0^∞ Ai(x+v)Ai(y+v) dv, by panel quadrature refined
/// until two successive halvings agree.
pub fn airy_kernel(order: &AiryOrder, x: f64, y: f64) -> Result<f64> {
    let cut = decay_cut(order)?;
    let v_end = (cut - x.min(y)).max(0.0);
    if v_end == 0.0 {
        return Ok(0.0);
    }
    let mut panels = (v_end.ceil() as usize).max(1);
    let mut prev = kernel_panels(order, x, y, v_end, panels)?;
    for _ in 0..4 {
        panels *= 2;
        let cur = kernel_panels(order, x, y, v_end, panels)?;
        if (cur - prev).abs() < 1e-13 {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

fn kernel_panels(order: &AiryOrder, x: f64, y: f64, v_end: f64, panels: usize) -> Result<f64> {
    let (v, w) = quad::composite_gl(PANEL, panels, 0.0, v_end);
    let mut s = 0.0;
    for (v, w) in v.iter().zip(&w) {
        let a = airy_fn(order, x + v)?;
        let b = if x == y { a } else { airy_fn(order, y + v)? };
        s += w * a * b;
    }
    Ok(s)
}

/// Ai^{(0..2m)} at a point, with the 2m-th derivative from the ODE.
#[derive(Debug, Clone)]
pub struct AiryJet {
    pub x: f64,
    pub d: Vec<f64>,
}

impl AiryJet {
    pub fn new(order: &AiryOrder, x: f64) -> Result<Self> {
        let two_m = 2 * order.m as usize;
        let mut d = airy_derivatives(order, x, two_m)?;
        let sign = if order.m % 2 == 1 { 1.0 } else { -1.0 };
        d.push(sign * x * d[0]);
        Ok(Self { x, d })
    }
}

/// The kernel from derivative values only: integrating (x−y)Ai(x+v)Ai(y+v)
/// by parts with the ODE gives
/// (x−y)A(x,y) = (−1)^m Σ_{j<2m} (−1)^j Ai^{(2m−1−j)}(x) Ai^{(j)}(y).
pub fn kernel_from_jets(m: u32, a: &AiryJet, b: &AiryJet) -> f64 {
    let two_m = 2 * m as usize;
    let sm = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    if a.x == b.x {
        // −∂_y of the numerator at y = x
        let s: f64 = (0..two_m)
            .map(|j| {
                let sj = if j % 2 == 0 { 1.0 } else { -1.0 };
                sj * a.d[two_m - 1 - j] * a.d[j + 1]
            })
            .sum();
        return -sm * s;
    }
    let s: f64 = (0..two_m)
        .map(|j| {
            let sj = if j % 2 == 0 { 1.0 } else { -1.0 };
            sj * a.d[two_m - 1 - j] * b.d[j]
        })
        .sum();
    sm * s / (a.x - b.x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FredholmConfig {
    pub n_nodes: usize,
    pub upper_cut: f64,
}

impl FredholmConfig {
    pub fn for_order(m: u32) -> Self {
        Self {
            n_nodes: 64,
            upper_cut: if m == 1 { 14.0 } else { 10.0 },
        }
    }
}

/// Point beyond which the diagonal trace ∫ A(u,u) du is below 1e−13.
fn trace_cut(order: &AiryOrder) -> Result<f64> {
    static CUTS: [OnceLock<f64>; 4] = [const { OnceLock::new() }; 4];
    let slot = &CUTS[order.m as usize - 1];
    if let Some(v) = slot.get() {
        return Ok(*v);
    }
    let mut x0 = 0.0;
    loop {
        if tail_trace(order, x0, x0 + 12.0, 48)? < 1e-13 {
            break;
        }
        x0 += 0.5;
    }
    Ok(*slot.get_or_init(|| x0))
}

fn tail_trace(order: &AiryOrder, a: f64, b: f64, n: usize) -> Result<f64> {
    let (x, w) = quad::gauss_legendre_on(n, a, b);
    let mut s = 0.0;
    for (x, w) in x.iter().zip(&w) {
        let jet = AiryJet::new(order, *x)?;
        s += w * kernel_from_jets(order.m, &jet, &jet);
    }
    Ok(s)
}

/// ∫_s^∞ A(x,x) dx, the first trace of the operator.
pub fn kernel_trace(order: &AiryOrder, s: f64) -> Result<f64> {
    let upper = trace_cut(order)?.max(s) + 12.0;
    let n = (8.0 * (upper - s)).ceil() as usize + 32;
    tail_trace(order, s, upper, n)
}

fn fredholm_at(order: &AiryOrder, s: f64, upper: f64, n: usize) -> Result<f64> {
    let (x, w) = quad::gauss_legendre_on(n, s, upper);
    let jets = x
        .iter()
        .map(|&xi| AiryJet::new(order, xi))
        .collect::<Result<Vec<_>>>()?;
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mat = DMatrix::from_fn(n, n, |i, j| {
        let k = kernel_from_jets(order.m, &jets[i], &jets[j]);
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - sw[i] * k * sw[j]
    });
    Ok(mat.lu().determinant())
}

/// F_{2m+1}(s) by Nyström on Gauss–Legendre nodes over [s, max(s+L, x_tail)];
/// the value at 2n nodes is returned after checking it against n nodes.
#[allow(non_snake_case)]
pub fn fredholm_F(order: &AiryOrder, config: &FredholmConfig, s: f64) -> Result<f64> {
    if s < -12.0 {
        return Err(Error::InvalidInput(format!("s = {s} below the desk range -12")));
    }
    let upper = (s + config.upper_cut).max(trace_cut(order)?);
    let coarse = fredholm_at(order, s, upper, config.n_nodes)?;
    let fine = fredholm_at(order, s, upper, 2 * config.n_nodes)?;
    let delta = (fine - coarse).abs();
    if delta >= 1e-8 {
        return Err(Error::NodeCountInsufficient {
            nodes: config.n_nodes,
            delta,
        });
    }
    Ok(fine.clamp(0.0, 1.0))
}

/// F_{2m+1}(s)^n, the edge law of an n-cut Fermi sea.
pub fn limiting_cdf(order: &AiryOrder, config: &FredholmConfig, n_cuts: u32, s: f64) -> Result<f64> {
    if n_cuts == 0 {
        return Err(Error::InvalidInput("n_cuts must be positive".into()));
    }
    Ok(fredholm_F(order, config, s)?.powi(n_cuts as i32))
}
