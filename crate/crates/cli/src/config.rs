//! Flat `key = value` config files.
//!
//! Entries become `--key=value` arguments placed right after the subcommand,
//! ahead of anything the user typed there, so explicit flags win.

use std::fs;

/// Global options that take a separate value.
const VALUED_GLOBALS: [&str; 3] = ["--threads", "--out-dir", "--config"];

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: bad key {:?}", n + 1, k.trim()));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// The `--config` path in argv, if any.
fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
        if a == "--config" {
            return it.next().cloned();
        }
    }
    None
}

/// Index just past the subcommand (two tokens for `oracle cdf`).
fn insertion_point(args: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let a = args[i].as_str();
        if VALUED_GLOBALS.contains(&a) {
            i += 2;
        } else if a.starts_with('-') {
            i += 1;
        } else {
            if a == "oracle" && args.get(i + 1).is_some_and(|b| !b.starts_with('-')) {
                return Some(i + 2);
            }
            return Some(i + 1);
        }
    }
    None
}

/// Splices the config file named by `--config` into argv.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
    let entries = parse(&text)?;
    let Some(at) = insertion_point(&args) else {
        return Ok(args);
    };
    let mut extra = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => extra.push(format!("--{k}")),
            "false" => {}
            _ => extra.push(format!("--{k}={v}")),
        }
    }
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parses_comments_and_underscores() {
        let e = parse("# c\ntheta = 2.5\n\nell_range=0:4 # trailing\n").unwrap();
        assert_eq!(
            e,
            vec![("theta".into(), "2.5".into()), ("ell-range".into(), "0:4".into())]
        );
        assert!(parse("nonsense").is_err());
    }

    #[test]
    fn inserts_after_subcommand() {
        assert_eq!(insertion_point(&argv("splitsea --threads 2 cdf --theta 1")), Some(4));
        assert_eq!(insertion_point(&argv("splitsea oracle cdf --ell 2")), Some(3));
        assert_eq!(insertion_point(&argv("splitsea --json")), None);
    }
}
