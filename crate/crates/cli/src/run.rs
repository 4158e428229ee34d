//! One function per subcommand. Each writes its artifacts under `--out-dir`
//! and prints a JSON summary on stdout.

use crate::args::{Cli, Command, OracleCommand, Power};
use crate::error::CliError;
use crate::io::{write_csv, Table};
use crate::svg::{render, Panel, Series};
use rayon::prelude::*;
use serde_json::{json, Value};
use splitsea::airy::{limiting_cdf, AiryOrder, FredholmConfig};
use splitsea::dpp_sampler::empirical_edge_law;
use splitsea::edge_distribution::{cdf_table, scaled_convergence_study_with_power, toeplitz_cdf};
use splitsea::kernel::{coefficient_band, kernel_eval, kernel_eval_quadrature};
use splitsea::potential::{eval_dispersion, Dispersion};
use splitsea::schur_oracle::{brute_cdf_first_part, total_mass};
use splitsea::unitary_mc::{angle_histogram, density_curve, metropolis_chain};
use splitsea::{EdgeProfile, HoppingCoefficients};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

type Res<T> = Result<T, CliError>;

struct Out {
    dir: PathBuf,
}

impl Out {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn csv(&self, name: &str, table: &Table) -> Res<PathBuf> {
        let p = self.path(name);
        write_csv(&p, table)?;
        Ok(p)
    }

    fn json(&self, name: &str, value: &Value, print: bool) -> Res<()> {
        let text = serde_json::to_string_pretty(value).expect("json values serialize");
        fs::write(self.path(name), format!("{text}\n"))?;
        if print {
            println!("{text}");
        }
        Ok(())
    }
}

fn coeffs(gamma: &[f64], theta: f64) -> Res<HoppingCoefficients> {
    Ok(HoppingCoefficients::new(gamma.to_vec(), theta)?)
}

/// k = k_int + ½.
fn site(k: f64) -> Res<i64> {
    let t = k - 0.5;
    if t.fract() != 0.0 || t.abs() > 1e12 {
        return Err(CliError::Config(format!("site {k} is not a half-integer")));
    }
    Ok(t as i64)
}

fn profile_json(p: &EdgeProfile) -> Value {
    let maximizers: Vec<Value> = p
        .maximizers
        .iter()
        .map(|mx| json!({ "chi_b": mx.chi_b, "m": mx.m, "d": mx.d }))
        .collect();
    json!({
        "b": p.b,
        "b_tilde": p.b_tilde,
        "maximizers": maximizers,
        "n_cuts": p.n_cuts,
        "edge_kernel": edge_regime(p),
    })
}

/// Which edge law the profile falls under.
fn edge_regime(p: &EdgeProfile) -> &'static str {
    let m = p.m();
    let lowest = p.maximizers.iter().filter(|mx| mx.m == m).count();
    if p.n_cuts == 1 {
        "airy"
    } else if p.n_cuts == 2 && lowest == 1 && p.leading().interior() {
        "oscillating"
    } else {
        "unsupported"
    }
}

pub fn run(cli: &Cli) -> Res<()> {
    fs::create_dir_all(&cli.out_dir)?;
    let out = Out { dir: cli.out_dir.clone() };
    match &cli.command {
        Command::Analyze { gamma, x, json } => analyze(&out, &gamma.gamma.0, *x, *json),
        Command::Density { gamma, xmin, xmax, steps } => density(&out, &gamma.gamma.0, *xmin, *xmax, *steps),
        Command::Kernel { gamma, theta, k, l, eps } => kernel(&out, &gamma.gamma.0, *theta, *k, *l, *eps),
        Command::KernelProfile { gamma, theta, window } => kernel_profile(&out, &gamma.gamma.0, *theta, *window),
        Command::Oracle(OracleCommand::Cdf { gamma, theta, ell, cap }) => {
            oracle_cdf(&out, &gamma.gamma.0, *theta, *ell, *cap)
        }
        Command::Airy { m, s, power } => airy(&out, *m, &s.0, *power),
        Command::Cdf { gamma, theta, ell_range } => cdf(&out, &gamma.gamma.0, *theta, *ell_range),
        Command::Converge { gamma, thetas, power, s, svg } => {
            converge(&out, &gamma.gamma.0, &thetas.0, *power, &s.0, svg.as_deref())
        }
        Command::Sample { gamma, theta, n, seed } => sample(&out, &gamma.gamma.0, *theta, *n, *seed),
        Command::UnitaryDensity { gamma, x, points } => unitary_density(&out, &gamma.gamma.0, *x, *points),
        Command::UnitaryMc { gamma, theta, ell, sweeps, seed, bins } => {
            unitary_mc(&out, &gamma.gamma.0, *theta, *ell, *sweeps, *seed, *bins)
        }
        Command::Figures { gamma2, points } => figures(&out, &gamma2.0, *points),
    }
}

fn analyze(out: &Out, gamma: &[f64], x: Option<f64>, as_json: bool) -> Res<()> {
    let disp = Dispersion::new(&coeffs(gamma, 1.0)?)?;
    let profile = disp.edge_profile()?;
    let mut v = profile_json(&profile);
    if let Some(x) = x {
        let sea = disp.fermi_sea(x)?;
        v["sea"] = json!({
            "x": sea.x,
            "boundaries": sea.boundaries,
            "cuts": sea.cuts,
            "density": sea.density(),
        });
    }
    out.json("analyze.json", &v, as_json)?;
    if !as_json {
        println!("b = {}  b_tilde = {}  n_cuts = {}", profile.b, profile.b_tilde, profile.n_cuts);
        for mx in &profile.maximizers {
            println!("maximizer chi_b = {}  m = {}  d = {}", mx.chi_b, mx.m, mx.d);
        }
        println!("edge kernel: {}", edge_regime(&profile));
    }
    Ok(())
}

fn density(out: &Out, gamma: &[f64], xmin: Option<f64>, xmax: Option<f64>, steps: usize) -> Res<()> {
    let disp = Dispersion::new(&coeffs(gamma, 1.0)?)?;
    let (hi, b_tilde) = disp.extrema();
    let a = xmin.unwrap_or(-b_tilde - 0.5);
    let b = xmax.unwrap_or(hi + 0.5);
    if steps == 0 || !(a < b) {
        return Err(CliError::Config(format!("need xmin < xmax and steps > 0, got {a}, {b}, {steps}")));
    }
    let rows: Vec<Vec<f64>> = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let x = a + (b - a) * i as f64 / steps as f64;
            Ok(vec![x, disp.limit_density(x)?, disp.limit_shape(x)?])
        })
        .collect::<splitsea::Result<_>>()?;
    let mut t = Table::new(&["x", "rho", "Omega"]);
    rows.into_iter().for_each(|r| t.push(r));
    let p = out.csv("density.csv", &t)?;
    out.json("density.json", &json!({ "csv": p, "rows": t.rows.len() }), true)
}

fn kernel(out: &Out, gamma: &[f64], theta: f64, k: f64, l: f64, eps: f64) -> Res<()> {
    let c = coeffs(gamma, theta)?;
    let (ki, li) = (site(k)?, site(l)?);
    let value = kernel_eval(&coefficient_band(&c)?, ki, li);
    let oracle = kernel_eval_quadrature(&c, ki, li, eps)?;
    let v = json!({ "k": k, "l": l, "value": value, "oracle_value": oracle, "diff": (value - oracle).abs() });
    out.json("kernel.json", &v, true)
}

fn kernel_profile(out: &Out, gamma: &[f64], theta: f64, window: (f64, f64)) -> Res<()> {
    let band = coefficient_band(&coeffs(gamma, theta)?)?;
    let lo = (window.0 - 0.5).ceil() as i64;
    let hi = (window.1 - 0.5).floor() as i64;
    if hi < lo || hi - lo > 1_000_000 {
        return Err(CliError::Config(format!("window {}:{} holds no usable sites", window.0, window.1)));
    }
    let mut t = Table::new(&["k", "Kkk"]);
    for k in lo..=hi {
        t.push(vec![k as f64 + 0.5, kernel_eval(&band, k, k)]);
    }
    let p = out.csv("kernel_profile.csv", &t)?;
    out.json("kernel_profile.json", &json!({ "csv": p, "rows": t.rows.len() }), true)
}

fn oracle_cdf(out: &Out, gamma: &[f64], theta: f64, ell: usize, cap: usize) -> Res<()> {
    let c = coeffs(gamma, theta)?;
    if cap > 40 {
        return Err(CliError::Config(format!("cap {cap} above 40 is out of desk range")));
    }
    let value = brute_cdf_first_part(&c, ell, cap)?;
    // the omitted mass bounds the partial sum's shortfall, up to rounding
    let residual = (1.0 - total_mass(&c, cap)?).abs();
    let toeplitz = if ell == 0 { (-theta * theta * c.sum_r_gamma_sq()).exp() } else { toeplitz_cdf(&c, ell)? };
    let v = json!({ "value": value, "cap": cap, "residual_bound": residual, "toeplitz": toeplitz });
    out.json("oracle_cdf.json", &v, true)
}

fn airy(out: &Out, m: u32, s: &[f64], power: u32) -> Res<()> {
    let order = AiryOrder::new(m)?;
    let config = FredholmConfig::for_order(m);
    if power == 0 {
        return Err(CliError::Config("power must be positive".into()));
    }
    let f: Vec<f64> = s
        .par_iter()
        .map(|&s| limiting_cdf(&order, &config, power, s))
        .collect::<splitsea::Result<_>>()?;
    let mut t = Table::new(&["s", "F"]);
    s.iter().zip(f).for_each(|(&s, f)| t.push(vec![s, f]));
    let p = out.csv("airy.csv", &t)?;
    out.json("airy.json", &json!({ "csv": p, "m": m, "power": power, "rows": t.rows.len() }), true)
}

fn cdf(out: &Out, gamma: &[f64], theta: f64, (a, b): (usize, usize)) -> Res<()> {
    let table = cdf_table(&coeffs(gamma, theta)?, b)?;
    let mut t = Table::new(&["ell", "p", "s"]);
    for ell in a..=b {
        let p = table.p(ell).expect("table covers 0..=ell_max");
        t.push(vec![ell as f64, p, table.s(ell)]);
    }
    let p = out.csv("cdf.csv", &t)?;
    out.json("cdf.json", &json!({ "csv": p, "rows": t.rows.len() }), true)
}

fn converge(out: &Out, gamma: &[f64], thetas: &[f64], power: Power, s: &[f64], svg: Option<&Path>) -> Res<()> {
    if thetas.is_empty() {
        return Err(CliError::Config("no thetas given".into()));
    }
    let c = coeffs(gamma, 1.0)?;
    let fixed = match power {
        Power::Auto => None,
        Power::Fixed(n) => Some(n),
    };
    let reports = scaled_convergence_study_with_power(&c, thetas, s, fixed)?;
    let mut t = Table::new(&["theta", "ell", "s", "p", "limit"]);
    let mut summary = serde_json::Map::new();
    let mut series = Vec::new();
    for r in &reports {
        summary.insert(format!("{}", r.theta), json!(r.sup_lattice));
        for pt in &r.lattice {
            t.push(vec![r.theta, pt.ell as f64, pt.s, pt.p, pt.limit]);
        }
        series.push(Series {
            label: format!("theta = {}", r.theta),
            points: r.lattice.iter().map(|pt| (pt.s, pt.p)).collect(),
        });
    }
    if let Some(r) = reports.last() {
        let mut limit: Vec<(f64, f64)> = r.lattice.iter().map(|pt| (pt.s, pt.limit)).collect();
        limit.sort_by(|a, b| a.0.total_cmp(&b.0));
        series.push(Series { label: "limit".into(), points: limit });
    }
    out.csv("converge.csv", &t)?;
    if let Some(path) = svg {
        let panel = Panel { title: "P(k_max < l) against the scaled variable".into(), series };
        fs::write(path, render(&[panel]))?;
    }
    out.json("converge.json", &Value::Object(summary), true)
}

fn sample(out: &Out, gamma: &[f64], theta: f64, n: usize, seed: u64) -> Res<()> {
    let rep = empirical_edge_law(&coeffs(gamma, theta)?, n, seed)?;
    let mut t = Table::new(&["index", "k_max", "s"]);
    for (i, (&k, &s)) in rep.k_max.iter().zip(&rep.scaled).enumerate() {
        t.push(vec![i as f64, k as f64, s]);
    }
    out.csv("sample.csv", &t)?;
    let v = json!({
        "ks_exact": rep.ks_exact,
        "ks_limit": rep.ks_limit,
        "n_samples": n,
        "seed": seed,
        "theta": theta,
        "leakage": rep.leakage,
    });
    out.json("sample.json", &v, true)
}

fn unitary_density(out: &Out, gamma: &[f64], x: f64, points: usize) -> Res<()> {
    let curve = density_curve(&coeffs(gamma, 1.0)?, x, points)?;
    let mut t = Table::new(&["alpha", "rho"]);
    curve.alphas.iter().zip(&curve.rho).for_each(|(&a, &r)| t.push(vec![a, r]));
    out.csv("unitary_density.csv", &t)?;
    let cuts: Vec<[f64; 2]> = curve.support_cuts.iter().map(|&(a, b)| [a, b]).collect();
    let v = json!({
        "x": x,
        "integral": curve.integral(),
        "zero_count": curve.zero_count(),
        "support_cuts": cuts,
    });
    out.json("unitary_density.json", &v, true)
}

fn unitary_mc(out: &Out, gamma: &[f64], theta: f64, ell: usize, sweeps: usize, seed: u64, bins: usize) -> Res<()> {
    let c = coeffs(gamma, theta)?;
    if bins == 0 || sweeps == 0 {
        return Err(CliError::Config("bins and sweeps must be positive".into()));
    }
    let profile = Dispersion::new(&c)?.edge_profile()?;
    let hist = angle_histogram(metropolis_chain(&c, theta, ell, sweeps, seed)?, bins);
    let mut t = Table::new(&["alpha", "density"]);
    hist.centres.iter().zip(&hist.density).for_each(|(&a, &d)| t.push(vec![a, d]));
    out.csv("unitary_mc.csv", &t)?;
    let v = json!({
        "acceptance_rate": hist.acceptance_rate,
        "dip_ratio": hist.dip_ratio(profile.leading().chi_b),
        "sigma": hist.sigma,
        "ell": ell,
        "sweeps": sweeps,
        "seed": seed,
    });
    out.json("unitary_mc.json", &v, true)
}

fn figures(out: &Out, gamma2: &[f64], points: usize) -> Res<()> {
    if gamma2.is_empty() || points < 2 {
        return Err(CliError::Config("need at least one gamma2 and two points".into()));
    }
    let mut d_t = Table::new(&["gamma2", "phi", "D"]);
    let mut rho_t = Table::new(&["gamma2", "x", "rho"]);
    let mut eig_t = Table::new(&["gamma2", "alpha", "rho"]);
    let mut panels = [
        Panel { title: "D(phi)".into(), series: Vec::new() },
        Panel { title: "density of the sea against x".into(), series: Vec::new() },
        Panel { title: "eigenvalue density at x = b".into(), series: Vec::new() },
    ];
    for &g in gamma2 {
        let c = HoppingCoefficients::quadratic(g, 1.0)?;
        let disp = Dispersion::new(&c)?;
        let (b, bt) = disp.extrema();
        let label = format!("gamma2 = {g:.4}");
        let phis: Vec<f64> = (0..=points).map(|i| -PI + 2.0 * PI * i as f64 / points as f64).collect();
        let d: Vec<(f64, f64)> = phis.iter().map(|&p| (p, eval_dispersion(&c, p, 0))).collect();
        let (lo, hi) = (-bt - 0.25, b + 0.25);
        let rho: Vec<(f64, f64)> = (0..=points)
            .into_par_iter()
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / points as f64;
                Ok((x, disp.limit_density(x)?))
            })
            .collect::<splitsea::Result<_>>()?;
        let curve = density_curve(&c, b, points)?;
        let eig: Vec<(f64, f64)> = curve.alphas.iter().copied().zip(curve.rho.iter().copied()).collect();
        for (t, pts, panel) in [(&mut d_t, &d, 0), (&mut rho_t, &rho, 1), (&mut eig_t, &eig, 2)] {
            pts.iter().for_each(|&(u, v)| t.push(vec![g, u, v]));
            panels[panel].series.push(Series { label: label.clone(), points: pts.clone() });
        }
    }
    let files = [
        out.csv("figure_dispersion.csv", &d_t)?,
        out.csv("figure_density.csv", &rho_t)?,
        out.csv("figure_eigen_density.csv", &eig_t)?,
    ];
    let svg = out.path("figure.svg");
    fs::write(&svg, render(&panels))?;
    let v = json!({ "gamma2": gamma2, "csv": files, "svg": svg });
    out.json("figures.json", &v, true)
}
