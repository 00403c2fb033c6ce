//! Plain-text `key = value` configuration with command-line overrides.
//!
//! ```text
//! # comments start with '#'
//! scheme = ZF
//! M = 8
//! U = 4
//! N = 8
//! W = 4
//! beta = 1, 1, 2, 0.5
//! reference_mode = external    # or member; auto picks per scheme
//! sweep.M = 4, 8
//! sweep.W = 0.25, 4
//! ```

use std::path::Path;

use crate::channel::{ReferenceMode, Scheme, SystemConfig};
use crate::error::{FamaError, Result};

/// Values given on the command line; each replaces the file value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub seed: Option<u64>,
    pub realizations: Option<u64>,
    pub scheme: Option<Scheme>,
    pub m: Option<usize>,
    pub u: Option<usize>,
    pub n: Option<usize>,
    pub w: Option<f64>,
    pub reference_mode: Option<ReferenceMode>,
}

/// Axes of a parameter sweep; an empty axis keeps the base value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    pub m: Vec<usize>,
    pub u: Vec<usize>,
    pub n: Vec<usize>,
    pub w: Vec<f64>,
    pub scheme: Vec<Scheme>,
}

impl SweepGrid {
    /// Every valid combination, in `scheme, M, U, N, W` nesting order.
    /// Combinations that fail validation (e.g. ZF with `M < U`) are skipped.
    pub fn expand(&self, base: &SystemConfig) -> Vec<SystemConfig> {
        fn axis<T: Clone>(values: &[T], fallback: T) -> Vec<T> {
            if values.is_empty() {
                vec![fallback]
            } else {
                values.to_vec()
            }
        }
        let mut out = Vec::new();
        for &scheme in &axis(&self.scheme, base.scheme) {
            for &m in &axis(&self.m, base.m) {
                for &u in &axis(&self.u, base.u) {
                    for &n in &axis(&self.n, base.n) {
                        for &w in &axis(&self.w, base.w) {
                            let mut c = base.clone();
                            c.scheme = scheme;
                            c.m = m;
                            c.n = n;
                            c.w = w;
                            if u != base.u {
                                c.u = u;
                                c.reset_gains();
                            }
                            if c.validate().is_ok() {
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// A parsed configuration together with any declared sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub system: SystemConfig,
    pub sweep: SweepGrid,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| FamaError::config(key, format!("cannot parse `{}`", value.trim())))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(FamaError::config(key, format!("expected true or false, got `{other}`"))),
    }
}

/// Parses configuration text, applies overrides and validates the result.
pub fn parse_config_str(text: &str, overrides: &ConfigOverrides) -> Result<ParsedConfig> {
    let mut cfg = SystemConfig::default();
    let mut beta: Option<Vec<f64>> = None;
    let mut powers: Option<Vec<f64>> = None;
    let mut sweep = SweepGrid::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(FamaError::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got `{line}`"),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "M" | "m" => cfg.m = parse_num(key, value)?,
            "U" | "u" => cfg.u = parse_num(key, value)?,
            "N" | "n" => cfg.n = parse_num(key, value)?,
            "W" | "w" => cfg.w = parse_num(key, value)?,
            "scheme" => cfg.scheme = value.parse()?,
            "beta" => beta = Some(parse_list(key, value)?),
            "powers" => powers = Some(parse_list(key, value)?),
            "reference_mode" if value.eq_ignore_ascii_case("auto") => cfg.reference_mode = None,
            "reference_mode" => cfg.reference_mode = Some(value.parse()?),
            "include_reference_in_selection" => {
                cfg.include_reference_in_selection = parse_bool(key, value)?
            }
            "seed" => cfg.seed = parse_num(key, value)?,
            "realizations" => cfg.realizations = parse_num(key, value)?,
            "sweep.M" | "sweep.m" => sweep.m = parse_list(key, value)?,
            "sweep.U" | "sweep.u" => sweep.u = parse_list(key, value)?,
            "sweep.N" | "sweep.n" => sweep.n = parse_list(key, value)?,
            "sweep.W" | "sweep.w" => sweep.w = parse_list(key, value)?,
            "sweep.scheme" => {
                sweep.scheme = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            other => return Err(FamaError::config(other, "unknown key")),
        }
    }
    if let Some(v) = overrides.seed {
        cfg.seed = v;
    }
    if let Some(v) = overrides.realizations {
        cfg.realizations = v;
    }
    if let Some(v) = overrides.scheme {
        cfg.scheme = v;
    }
    if let Some(v) = overrides.m {
        cfg.m = v;
    }
    if let Some(v) = overrides.u {
        cfg.u = v;
    }
    if let Some(v) = overrides.n {
        cfg.n = v;
    }
    if let Some(v) = overrides.w {
        cfg.w = v;
    }
    if let Some(v) = overrides.reference_mode {
        cfg.reference_mode = Some(v);
    }
    cfg.beta = beta.unwrap_or_else(|| vec![1.0; cfg.u]);
    cfg.powers = powers.unwrap_or_else(|| vec![1.0; cfg.u]);
    cfg.validate()?;
    Ok(ParsedConfig { system: cfg, sweep })
}

/// Reads `path` (if any) and applies `overrides`.
pub fn parse_config(path: Option<&Path>, overrides: &ConfigOverrides) -> Result<ParsedConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| FamaError::io(p, e))?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Configuration text that parses back to `cfg`.
pub fn render_config(cfg: &SystemConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("M = {}\n", cfg.m));
    out.push_str(&format!("U = {}\n", cfg.u));
    out.push_str(&format!("N = {}\n", cfg.n));
    out.push_str(&format!("W = {}\n", cfg.w));
    out.push_str(&format!("scheme = {}\n", cfg.scheme));
    out.push_str(&format!("beta = {}\n", join(&cfg.beta)));
    out.push_str(&format!("powers = {}\n", join(&cfg.powers)));
    match cfg.reference_mode {
        Some(mode) => out.push_str(&format!("reference_mode = {mode}\n")),
        None => out.push_str("reference_mode = auto\n"),
    }
    out.push_str(&format!(
        "include_reference_in_selection = {}\n",
        cfg.include_reference_in_selection
    ));
    out.push_str(&format!("seed = {}\n", cfg.seed));
    out.push_str(&format!("realizations = {}\n", cfg.realizations));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SystemConfig> {
        parse_config_str(text, &ConfigOverrides::default()).map(|p| p.system)
    }

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse("").unwrap();
        assert_eq!((c.m, c.u, c.n, c.scheme, c.w), (8, 4, 8, Scheme::Mrt, 0.25));
        assert_eq!(c.beta, vec![1.0; 4]);
        assert_eq!(c.powers, vec![1.0; 4]);
    }

    #[test]
    fn zf_boundaries() {
        let c = parse("scheme = ZF\nM = 4\nU = 4").unwrap();
        assert_eq!(crate::analytic::m_eff(c.scheme, c.m, c.u).unwrap(), 1);
        let err = parse("scheme=ZF\nM=3\nU=4").unwrap_err();
        assert!(err.to_string().contains("`M`"), "{err}");
    }

    #[test]
    fn unknown_and_malformed_keys_are_named() {
        let err = parse("antennas = 8").unwrap_err();
        assert!(err.to_string().contains("antennas"));
        let err = parse("N = eight").unwrap_err();
        assert!(err.to_string().contains("`N`"));
        let err = parse("beta = 1, 2").unwrap_err();
        assert!(err.to_string().contains("beta"));
        assert!(parse("just words").is_err());
    }

    #[test]
    fn overrides_win_and_gains_follow_u() {
        let o = ConfigOverrides {
            u: Some(3),
            w: Some(4.0),
            seed: Some(99),
            ..ConfigOverrides::default()
        };
        let c = parse_config_str("U = 6 # comment\nW = 1\n", &o).unwrap().system;
        assert_eq!((c.u, c.w, c.seed), (3, 4.0, 99));
        assert_eq!(c.beta.len(), 3);
    }

    #[test]
    fn rendered_config_round_trips() {
        let mut c = parse("scheme=ZF\nM=6\nU=3\nbeta=1,2,0.5\nseed=7").unwrap();
        c.reference_mode = Some(ReferenceMode::Member);
        let back = parse(&render_config(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn automatic_reference_mode_round_trips() {
        let c = parse("scheme = ZF").unwrap();
        assert_eq!(c.reference_mode, None);
        assert!(render_config(&c).contains("reference_mode = auto"));
        assert_eq!(parse(&render_config(&c)).unwrap(), c);
    }

    #[test]
    fn sweep_expands_valid_points() {
        let p = parse_config_str(
            "sweep.scheme = MRT, ZF\nsweep.M = 2, 8\nsweep.W = 0.25, 4",
            &ConfigOverrides::default(),
        )
        .unwrap();
        let points = p.sweep.expand(&p.system);
        // ZF with M = 2 < U = 4 is skipped
        assert_eq!(points.len(), 6);
        assert!(points.iter().all(|c| c.validate().is_ok()));
    }
}
