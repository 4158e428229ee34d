//! Gauss–Legendre rules and a small adaptive integrator.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (
        x.iter().map(|t| c + h * t).collect(),
        w.iter().map(|v| h * v).collect(),
    )
}

/// Composite rule: `panels` equal panels of an `order`-point rule on [a, b].
pub fn composite_gl(order: usize, panels: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (t, v) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (t + 1.0));
            weights.push(0.5 * h * v);
        }
    }
    (nodes, weights)
}

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn apply<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.x
            .iter()
            .zip(&self.w)
            .map(|(t, w)| w * f(c + h * t))
            .sum::<f64>()
            * h
    }
}

/// Adaptive bisection with a 10-point rule; the error estimate is the change
/// from splitting an interval in two.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (x, w) = gauss_legendre(10);
    let rule = Rule { x, w };
    let whole = rule.apply(&mut f, a, b);
    recurse(&rule, &mut f, a, b, whole, tol, 0)
}

fn recurse<F: FnMut(f64) -> f64>(
    rule: &Rule,
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = rule.apply(f, a, m);
    let right = rule.apply(f, m, b);
    if (left + right - whole).abs() <= tol || depth >= 40 {
        return left + right;
    }
    recurse(rule, f, a, m, left, 0.5 * tol, depth + 1)
        + recurse(rule, f, m, b, right, 0.5 * tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rules_stay_accurate() {
        let (x, w) = gauss_legendre_on(200, 0.0, PI);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.sin()).sum();
        assert!((s - 2.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_sqrt_edge() {
        let s = adaptive(|x| x.sqrt(), 0.0, 1.0, 1e-12);
        assert!((s - 2.0 / 3.0).abs() < 1e-10);
    }
}
