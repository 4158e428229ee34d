//! log det T_ℓ for ℓ = 1..=n in one multiprecision Levinson–Durbin pass.
//!
//! The symbol e^{g}, g(φ) = Σ_r 2c_r cos rφ, spans e^{max g − min g}; T_ℓ
//! inherits that condition number, so f64 breaks down once the range exceeds
//! about e^{30}. Prediction errors E_k are the Cholesky pivots and log det T_ℓ
//! is Σ_{k<ℓ} ln E_k.

use crate::error::{Error, Result};
use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use std::f64::consts::PI;

const RM: RoundingMode = RoundingMode::ToEven;

pub(crate) fn big_to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((m, _, s, e, _)) => {
            let top = *m.last().unwrap_or(&0);
            if top == 0 {
                return 0.0;
            }
            let v = top as f64 / 2f64.powi(64) * 2f64.powi(e);
            if s == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

/// Range of g on a dense grid, padded by one part in 10⁶.
fn symbol_log_range(c: &[f64]) -> (f64, f64) {
    let n = 4096 * c.len().max(1);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..=n {
        let phi = PI * j as f64 / n as f64;
        let g: f64 = c
            .iter()
            .enumerate()
            .map(|(i, cr)| 2.0 * cr * ((i + 1) as f64 * phi).cos())
            .sum();
        lo = lo.min(g);
        hi = hi.max(g);
    }
    let pad = 1e-6 * (hi - lo) + 1e-9;
    (lo - pad, hi + pad)
}

/// Working precision in bits for a symbol with log-range `span`.
pub(crate) fn precision_for(span: f64) -> usize {
    let bits = 1.5 * span / std::f64::consts::LN_2 + 128.0;
    (bits.ceil() as usize).div_ceil(64) * 64
}

/// Smallest even trapezoid size M with aliasing below 2^{−p}e^{min g} for
/// coefficients up to n_max, from |f_n| ≤ exp(Σ|c_r|(ρ^r + ρ^{−r}))ρ^{−n}.
fn trapezoid_size(c: &[f64], n_max: usize, p: usize, min_g: f64) -> usize {
    let target = -(p as f64) * std::f64::consts::LN_2 + min_g - 4.0;
    let log_bound = |k: f64| -> f64 {
        (0..400)
            .map(|i| {
                let rho = 1.0f64 + 0.01 * 1.05f64.powi(i);
                let mag: f64 = c
                    .iter()
                    .enumerate()
                    .map(|(j, cr)| {
                        let r = (j + 1) as i32;
                        cr.abs() * (rho.powi(r) + rho.powi(-r))
                    })
                    .sum();
                mag - k * rho.ln()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let mut m = 2 * (n_max + 16);
    while log_bound((m - n_max) as f64) > target {
        m += m / 4 + 2;
    }
    m + (m & 1)
}

pub(crate) struct MpSymbol {
    pub precision: usize,
    /// f_0..f_{n_max}
    pub coeffs: Vec<BigFloat>,
}

/// Fourier coefficients of e^{Σ 2c_r cos rφ} in multiprecision.
pub(crate) fn mp_symbol(c: &[f64], n_max: usize) -> MpSymbol {
    let (lo, hi) = symbol_log_range(c);
    let p = precision_for(hi - lo);
    let m = trapezoid_size(c, n_max, p, lo);
    let mut cc = Consts::new().expect("constant cache");
    let two_pi = cc.pi(p, RM).mul(&BigFloat::from_f64(2.0, p), p, RM);
    let inv_m = BigFloat::from_f64(1.0, p).div(&BigFloat::from_u64(m as u64, p), p, RM);
    // cos(2πk/M) for k = 0..=M/2; other indices by reflection
    let half = m / 2;
    let cos_table: Vec<BigFloat> = (0..=half)
        .map(|k| {
            let arg = two_pi.mul(&BigFloat::from_u64(k as u64, p), p, RM).mul(&inv_m, p, RM);
            arg.cos(p, RM, &mut cc)
        })
        .collect();
    let cos_at = |k: usize| -> &BigFloat {
        let k = k % m;
        &cos_table[if k <= half { k } else { m - k }]
    };
    let cs: Vec<BigFloat> = c.iter().map(|&v| BigFloat::from_f64(2.0 * v, p)).collect();
    // symbol values on φ_j, j = 0..=M/2
    let values: Vec<BigFloat> = (0..=half)
        .map(|j| {
            let mut g = BigFloat::from_f64(0.0, p);
            for (i, cr) in cs.iter().enumerate() {
                g = g.add(&cr.mul(cos_at((i + 1) * j), p, RM), p, RM);
            }
            g.exp(p, RM, &mut cc)
        })
        .collect();
    let two = BigFloat::from_f64(2.0, p);
    let coeffs = (0..=n_max)
        .map(|n| {
            let mut acc = values[0].clone();
            let last = values[half].clone();
            acc = if n % 2 == 0 {
                acc.add(&last, p, RM)
            } else {
                acc.sub(&last, p, RM)
            };
            let mut inner = BigFloat::from_f64(0.0, p);
            for (j, v) in values.iter().enumerate().take(half).skip(1) {
                inner = inner.add(&v.mul(cos_at(n * j), p, RM), p, RM);
            }
            acc.add(&inner.mul(&two, p, RM), p, RM).mul(&inv_m, p, RM)
        })
        .collect();
    MpSymbol { precision: p, coeffs }
}

/// [log det T_0, …, log det T_n] with T_ℓ = [f_{i−j}]_{i,j<ℓ}.
pub(crate) fn levinson_logdets(sym: &MpSymbol, n: usize) -> Result<Vec<f64>> {
    let p = sym.precision;
    let r = &sym.coeffs;
    assert!(r.len() >= n, "symbol band shorter than requested order");
    let mut cc = Consts::new().expect("constant cache");
    let one = BigFloat::from_f64(1.0, p);
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    if n == 0 {
        return Ok(out);
    }
    let mut err = r[0].clone();
    if !err.is_positive() {
        return Err(Error::NotPositiveDefinite { order: 1 });
    }
    let mut logdet = err.ln(p, RM, &mut cc);
    out.push(big_to_f64(&logdet));
    let mut a: Vec<BigFloat> = Vec::with_capacity(n);
    for k in 1..n {
        let mut acc = r[k].clone();
        for (j, aj) in a.iter().enumerate() {
            acc = acc.sub(&aj.mul(&r[k - 1 - j], p, RM), p, RM);
        }
        let kappa = acc.div(&err, p, RM);
        let mut next = Vec::with_capacity(k);
        for j in 0..a.len() {
            next.push(a[j].sub(&kappa.mul(&a[a.len() - 1 - j], p, RM), p, RM));
        }
        next.push(kappa.clone());
        a = next;
        let shrink = one.sub(&kappa.mul(&kappa, p, RM), p, RM);
        err = err.mul(&shrink, p, RM);
        if !err.is_positive() {
            return Err(Error::NotPositiveDefinite { order: k + 1 });
        }
        logdet = logdet.add(&err.ln(p, RM, &mut cc), p, RM);
        out.push(big_to_f64(&logdet));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_round_trips() {
        for v in [1.0, -3.25, 1e-300, 7.5e200, 0.0, 0.1] {
            assert_eq!(big_to_f64(&BigFloat::from_f64(v, 256)), v);
        }
    }

    #[test]
    fn bessel_i_symbol() {
        // e^{2cos φ}: f_n = I_n(2) = Σ_k 1/(k!(k+n)!)
        let sym = mp_symbol(&[1.0], 6);
        for n in 0..=6usize {
            let mut term = 1.0 / (1..=n).map(|k| k as f64).product::<f64>();
            let mut want = 0.0;
            for k in 0..40 {
                want += term;
                term /= ((k + 1) * (k + 1 + n)) as f64;
            }
            assert!((big_to_f64(&sym.coeffs[n]) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn levinson_matches_small_determinants() {
        let sym = mp_symbol(&[0.4, -0.2], 4);
        let f: Vec<f64> = sym.coeffs.iter().map(big_to_f64).collect();
        let ld = levinson_logdets(&sym, 3).unwrap();
        let d2 = f[0] * f[0] - f[1] * f[1];
        let d3 = f[0] * (f[0] * f[0] - f[1] * f[1]) - f[1] * (f[1] * f[0] - f[1] * f[2])
            + f[2] * (f[1] * f[1] - f[0] * f[2]);
        assert!((ld[1] - f[0].ln()).abs() < 1e-14);
        assert!((ld[2] - d2.ln()).abs() < 1e-14);
        assert!((ld[3] - d3.ln()).abs() < 1e-13);
    }
}
