use splitsea::airy::{
    airy_derivatives, airy_fn, airy_kernel, fredholm_F, kernel_from_jets, kernel_trace,
    limiting_cdf, AiryJet, AiryOrder, FredholmConfig,
};
use std::time::Instant;

/// Classical Ai and Ai' from the Maclaurin series Ai = c₁f − c₂g.
fn ai_series(x: f64) -> (f64, f64) {
    let c1 = 0.355_028_053_887_817_2;
    let c2 = 0.258_819_403_792_806_8;
    let (mut f, mut g, mut fp, mut gp) = (0.0, 0.0, 0.0, 0.0);
    let (mut a, mut b) = (1.0, 1.0);
    let x3 = x * x * x;
    let mut p = 1.0; // x^{3k}
    let mut p_prev = 0.0;
    for k in 0..120 {
        let kf = k as f64;
        f += a * p;
        g += b * p * x;
        if k > 0 {
            fp += 3.0 * kf * a * x * x * p_prev;
        }
        gp += (3.0 * kf + 1.0) * b * p;
        a /= (3.0 * kf + 2.0) * (3.0 * kf + 3.0);
        b /= (3.0 * kf + 3.0) * (3.0 * kf + 4.0);
        p_prev = p;
        p *= x3;
    }
    (c1 * f - c2 * g, c1 * fp - c2 * gp)
}

#[test]
fn matches_power_series() {
    let o = AiryOrder::new(1).unwrap();
    for x in [-3.0, -1.0, 0.0, 1.0, 3.0, -6.0] {
        let want = ai_series(x).0;
        let got = airy_fn(&o, x).unwrap();
        assert!((got - want).abs() < 1e-12, "x={x}: {got} vs {want}");
    }
}

#[test]
fn oscillatory_side_keeps_precision() {
    // Ai(−12) and Ai(−30) from the asymptotic-free ODE check: Ai'' = x Ai via
    // central differences of the computed values.
    let o = AiryOrder::new(1).unwrap();
    for x in [-12.0, -30.0] {
        let h = 1e-3;
        let f = |x: f64| airy_fn(&o, x).unwrap();
        let fd = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        assert!((fd - x * f(x)).abs() < 1e-4, "x={x}");
    }
}

#[test]
fn eigenfunction_residuals() {
    for m in [1u32, 2] {
        let o = AiryOrder::new(m).unwrap();
        for (x, v) in [(0.3, 0.2), (-1.0, 0.5), (1.5, -0.4)] {
            let h = 0.01;
            let f = |u: f64| airy_fn(&o, u).unwrap();
            let u = x + v;
            let n = 2 * m as i32;
            // central 2m-th difference
            let mut diff = 0.0;
            for k in 0..=n {
                let c = binom(n as u64, k as u64) * if k % 2 == 0 { 1.0 } else { -1.0 };
                diff += c * f(u + (n as f64 / 2.0 - k as f64) * h);
            }
            diff /= h.powi(n);
            let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
            // (x + (−1)^m d^{2m}) Ai(x+v) = −v Ai(x+v)
            let resid = x * f(u) + sign * diff + v * f(u);
            assert!(resid.abs() < 1e-4, "m={m} x={x} v={v}: {resid}");
        }
    }
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn kernel_is_symmetric_and_matches_jets() {
    for m in [1u32, 2] {
        let o = AiryOrder::new(m).unwrap();
        for (x, y) in [(0.0, 0.0), (-2.0, 1.0), (1.2, 0.4), (-3.5, -3.0)] {
            let a = airy_kernel(&o, x, y).unwrap();
            let b = airy_kernel(&o, y, x).unwrap();
            assert!((a - b).abs() < 1e-14);
            let jx = AiryJet::new(&o, x).unwrap();
            let jy = AiryJet::new(&o, y).unwrap();
            let c = kernel_from_jets(m, &jx, &jy);
            assert!((a - c).abs() < 1e-10, "m={m} ({x},{y}): {a} vs {c}");
        }
    }
    let o = AiryOrder::new(1).unwrap();
    let far = airy_kernel(&o, 12.0, 12.0).unwrap();
    assert!(far.abs() < 1e-18, "{far}");
    // A(0,0) = Ai'(0)² for m = 1
    let d = ai_series(0.0).1;
    assert!((airy_kernel(&o, 0.0, 0.0).unwrap() - d * d).abs() < 1e-9);
}

#[test]
fn gue_value_and_doubling() {
    let o = AiryOrder::new(1).unwrap();
    let c = FredholmConfig::for_order(1);
    let t = Instant::now();
    let f = fredholm_F(&o, &c, -1.1).unwrap();
    eprintln!("F3(-1.1) = {f:.12} in {:?}", t.elapsed());
    // independent evaluation: scipy Airy functions, 120-node Gauss–Legendre
    assert!((f - 0.7772580015).abs() < 1e-9);
}

#[test]
fn cdf_shape_and_trace_bound() {
    for m in [1u32, 2] {
        let o = AiryOrder::new(m).unwrap();
        let c = FredholmConfig::for_order(m);
        let mut prev = 0.0;
        for i in 0..=28 {
            let s = -6.0 + 0.5 * i as f64;
            let f = fredholm_F(&o, &c, s).unwrap();
            assert!(f >= prev - 1e-12, "m={m} s={s}");
            prev = f;
            if f > 1e-12 && f < 1.0 - 1e-12 {
                let tr = kernel_trace(&o, s).unwrap();
                assert!(-f.ln() >= tr - 1e-10, "m={m} s={s}");
            }
        }
        assert!(prev > 1.0 - 1e-6);
        assert!(fredholm_F(&o, &c, -6.0).unwrap() < 1e-3);
    }
}

#[test]
fn quintic_at_five_is_one_minus_its_trace() {
    let o = AiryOrder::new(2).unwrap();
    let c = FredholmConfig::for_order(2);
    let f = fredholm_F(&o, &c, 5.0).unwrap();
    let tr = kernel_trace(&o, 5.0).unwrap();
    eprintln!("1 - F5(5) = {:e}, trace = {:e}", 1.0 - f, tr);
    assert!(((1.0 - f) - tr).abs() < 1e-3 * tr + 1e-12);
    assert!(limiting_cdf(&o, &c, 3, 8.0).unwrap() > 1.0 - 1e-6);
}

#[test]
fn derivatives_of_classical_airy() {
    let o = AiryOrder::new(1).unwrap();
    for x in [-2.0, 0.5, 2.0] {
        let d = airy_derivatives(&o, x, 2).unwrap();
        let (a, ap) = ai_series(x);
        assert!((d[0] - a).abs() < 1e-12 && (d[1] - ap).abs() < 1e-12);
    }
}
