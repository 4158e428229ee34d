use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "splitsea", version, args_override_self = true)]
#[command(about = "Multicut Fermi seas, edge laws and the unitary model")]
pub struct Cli {
    /// Worker threads (SPLITSEA_THREADS takes precedence)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat key = value file; explicit flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for CSV/JSON/SVG artifacts
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Gamma {
    /// Hopping weights γ_1,γ_2,…; entries may be fractions like -1/3
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub gamma: List,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Edge profile and regime of the dispersion
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Analyze {
        #[command(flatten)]
        gamma: Gamma,
        /// also report the Fermi sea at this level
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Limit density ϱ and shape Ω on a grid
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Density {
        #[command(flatten)]
        gamma: Gamma,
        #[arg(long)]
        xmin: Option<f64>,
        #[arg(long)]
        xmax: Option<f64>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// One kernel entry by series and by contour quadrature
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Kernel {
        #[command(flatten)]
        gamma: Gamma,
        #[arg(long)]
        theta: f64,
        /// half-integer site
        #[arg(long)]
        k: f64,
        /// half-integer site
        #[arg(long)]
        l: f64,
        /// contour offset for the quadrature route
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Kernel diagonal over a window of half-integer sites
    #[command(allow_negative_numbers = true, args_override_self = true)]
    KernelProfile {
        #[command(flatten)]
        gamma: Gamma,
        #[arg(long)]
        theta: f64,
        /// a:b, inclusive bounds on the sites
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        window: (f64, f64),
    },
    /// Brute-force Schur sums
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Higher-order Tracy–Widom F_{2m+1}^power
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Airy {
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// a:b:step
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, default_value = "-4:3:0.1")]
        s: List,
        #[arg(long, default_value_t = 1)]
        power: u32,
    },
    /// Exact law P(k_max < ℓ) from Toeplitz determinants
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Cdf {
        #[command(flatten)]
        gamma: Gamma,
        #[arg(long)]
        theta: f64,
        /// a:b, inclusive
        #[arg(long, value_parser = parse_ell_range)]
        ell_range: (usize, usize),
    },
    /// Scaled exact laws against F_{2m+1}^n over several θ
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Converge {
        #[command(flatten)]
        gamma: Gamma,
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        thetas: List,
        /// auto uses the number of cuts
        #[arg(long, value_parser = parse_power, default_value = "auto")]
        power: Power,
        /// a:b:step on the scaled axis
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, default_value = "-6:4:0.25")]
        s: List,
        /// overlay plot of the scaled laws
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// DPP samples of k_max
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Sample {
        #[command(flatten)]
        gamma: Gamma,
        #[arg(long)]
        theta: f64,
        #[arg(short = 'n', long = "samples", default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Supercritical eigenvalue density ρ(α) at level x
    #[command(allow_negative_numbers = true, args_override_self = true)]
    UnitaryDensity {
        #[command(flatten)]
        gamma: Gamma,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 1024)]
        points: usize,
    },
    /// Metropolis histogram of the unitary model
    #[command(allow_negative_numbers = true, args_override_self = true)]
    UnitaryMc {
        #[command(flatten)]
        gamma: Gamma,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = 200_000)]
        sweeps: usize,
        #[arg(long, default_value_t = 3)]
        seed: u64,
        #[arg(long, default_value_t = 48)]
        bins: usize,
    },
    /// D, ϱ and ρ at x = b for the family γ = (1, γ_2)
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Figures {
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true, default_value = "1/3,1/10,-1/8,-1/3")]
        gamma2: List,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Partial sum of P(λ_1 ≤ ℓ) over |λ| ≤ cap
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Cdf {
        #[command(flatten)]
        gamma: Gamma,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = 22)]
        cap: usize,
    },
}

/// A parsed list of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Power {
    Auto,
    Fixed(u32),
}

/// A number or a fraction p/q.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            p / q
        }
        None => s.parse().map_err(|_| format!("bad number {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// Comma-separated numbers; an empty string is an empty list.
pub fn parse_list(s: &str) -> Result<List, String> {
    if s.trim().is_empty() {
        return Ok(List(Vec::new()));
    }
    s.split(',').map(parse_number).collect::<Result<_, _>>().map(List)
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let (a, b) = (parse_number(a)?, parse_number(b)?);
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

fn parse_ell_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad bound {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad bound {b:?}"))?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

/// a:b:step, endpoints included; points are a + i·step to avoid drift.
pub fn parse_grid(s: &str) -> Result<List, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, h] = parts[..] else {
        return Err(format!("expected a:b:step, got {s:?}"));
    };
    let (a, b, h) = (parse_number(a)?, parse_number(b)?, parse_number(h)?);
    if !(h > 0.0) || a > b {
        return Err(format!("bad grid {s:?}"));
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(format!("grid {s:?} too fine"));
    }
    Ok(List((0..=n).map(|i| a + i as f64 * h).collect()))
}

fn parse_power(s: &str) -> Result<Power, String> {
    if s == "auto" {
        return Ok(Power::Auto);
    }
    match s.parse::<u32>() {
        Ok(n) if n > 0 => Ok(Power::Fixed(n)),
        _ => Err(format!("power must be auto or a positive integer, got {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_grids() {
        assert_eq!(parse_number("-1/8").unwrap(), -0.125);
        assert!(parse_number("1/0").is_err());
        assert_eq!(parse_list("").unwrap().0, Vec::<f64>::new());
        assert_eq!(parse_list("1, -1/3").unwrap().0, vec![1.0, -1.0 / 3.0]);
        let g = parse_grid("-2:2:0.1").unwrap().0;
        assert_eq!(g.len(), 41);
        assert_eq!(*g.last().unwrap(), -2.0 + 40.0 * 0.1);
        assert!(parse_grid("1:0:0.1").is_err());
        assert_eq!(parse_power("auto").unwrap(), Power::Auto);
        assert!(parse_power("0").is_err());
    }
}
