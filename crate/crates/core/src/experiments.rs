//! Figure-style experiments rendered to CSV, plus the command dispatcher.
//!
//! | command    | files                              |
//! |------------|------------------------------------|
//! | `fig2`     | `fig2_mrt.csv`, `fig2_zf.csv`      |
//! | `fig3`     | `fig3_mrt.csv`, `fig3_zf.csv`      |
//! | `fig4`     | `fig4_mrt.csv`, `fig4_zf.csv`      |
//! | `fig5`     | `fig5_mrt.csv`, `fig5_zf.csv`      |
//! | `sweep`    | `sweep.csv`                        |
//! | `validate` | `validate.txt`                     |
//!
//! Every run also writes `manifest.txt`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::acceptance;
use crate::analytic::{
    asymptote_small_gamma, asymptote_tail, betaprime_cdf, betaprime_cdf_finite_sum, betaprime_sf,
    BetaPrimeParams,
};
use crate::channel::{PortGeometry, Scheme, SystemConfig};
use crate::config::SweepGrid;
use crate::error::{FamaError, Result};
use crate::montecarlo::{
    binomial_half_width, marginal_tail_estimate, run_cdf_experiment, run_correlation_experiment,
    run_outage_experiment, CdfMode, CorrOptions, ExecOptions, OutageReport, Z_95,
};
use crate::output::{write_outputs, CsvFile, CurveTable, ExperimentRecord, PairTable, RunManifest};
use crate::specialfn::bessel_j0;

/// Exact-law sampler runs use this many times the physical sample count.
pub const MARGINAL_FACTOR: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Validate,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Fig2,
        Command::Fig3,
        Command::Fig4,
        Command::Fig5,
        Command::Validate,
        Command::Sweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Fig5 => "fig5",
            Command::Validate => "validate",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = FamaError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| FamaError::UnknownCommand(s.to_string()))
    }
}

/// CSVs and counters produced by one command, before anything touches disk.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<CsvFile>,
    pub records: Vec<ExperimentRecord>,
    /// Human-readable summary for the terminal.
    pub summary: String,
}

/// `10^(k / per_decade)` for integer `k` spanning the exponent range; whole
/// decades are exact powers of ten.
pub fn decade_grid(lo_exp: i32, hi_exp: i32, per_decade: i32) -> Vec<f64> {
    (lo_exp * per_decade..=hi_exp * per_decade)
        .map(|k| {
            if k % per_decade == 0 {
                10f64.powi(k / per_decade)
            } else {
                10f64.powf(k as f64 / per_decade as f64)
            }
        })
        .collect()
}

/// Outage thresholds: −20 dB to 30 dB in 1 dB steps.
pub fn outage_grid() -> Vec<f64> {
    decade_grid(-2, 3, 10)
}

/// Asymptote thresholds: 1e-3 to 1e3, ten points per decade.
pub fn asymptote_grid() -> Vec<f64> {
    decade_grid(-3, 3, 10)
}

fn for_scheme(config: &SystemConfig, scheme: Scheme) -> Result<SystemConfig> {
    let mut c = config.clone();
    c.scheme = scheme;
    c.validate()?;
    Ok(c)
}

fn file_tag(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Mrt => "mrt",
        Scheme::Zf => "zf",
    }
}

fn record(name: String, samples: u64, resampled: u64, infinite: u64, note: String) -> ExperimentRecord {
    ExperimentRecord {
        name,
        samples,
        resampled_singular: resampled,
        infinite,
        note,
    }
}

/// Per-port CDF: exact-law sampler, physical reference-location simulation
/// and both analytic forms.
pub fn fig2(config: &SystemConfig, opts: &ExecOptions) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    for scheme in [Scheme::Mrt, Scheme::Zf] {
        let c = for_scheme(config, scheme)?;
        let mut marginal_cfg = c.clone();
        marginal_cfg.realizations = c.realizations * MARGINAL_FACTOR;
        let marginal = run_cdf_experiment(&marginal_cfg, CdfMode::Marginal, opts)?;
        let physical = run_cdf_experiment(&c, CdfMode::PhysicalReference, opts)?;
        let p = marginal.params;
        let mut t = CurveTable::new();
        for (report, id) in [(&marginal, "marginal_mc"), (&physical, "physical_reference_mc")] {
            let n = report.empirical.n();
            for (g, v) in report.empirical.grid().iter().zip(report.empirical.values()) {
                let h = binomial_half_width(v, n);
                t.push(*g, v, (v - h).max(0.0), (v + h).min(1.0), id);
            }
        }
        for &g in marginal.empirical.grid() {
            t.push_exact(g, betaprime_cdf(g, p)?, "analytic_incbeta");
        }
        for &g in marginal.empirical.grid() {
            t.push_exact(g, betaprime_cdf_finite_sum(g, p)?, "analytic_finite_sum");
        }
        out.files.push(t.finish(format!("fig2_{}.csv", file_tag(scheme))));
        for r in [&marginal, &physical] {
            out.records.push(record(
                format!("fig2_{}.{}", file_tag(scheme), r.mode.as_str()),
                r.empirical.n(),
                r.resampled_singular,
                r.infinite,
                format!("beta_prime = ({}, {})", p.a(), p.b()),
            ));
            out.summary.push_str(&format!(
                "fig2 {scheme} {:<18} n = {:>9}  KS = {:.5}\n",
                r.mode.as_str(),
                r.empirical.n(),
                r.ks
            ));
        }
    }
    Ok(out)
}

fn fisher_interval(r: f64, n: u64) -> (f64, f64) {
    if n <= 3 || r.abs() >= 1.0 {
        return (r, r);
    }
    let z = r.atanh();
    let h = Z_95 / ((n - 3) as f64).sqrt();
    ((z - h).tanh(), (z + h).tanh())
}

/// Cross-port SIR correlation against the approximation and the Jakes kernel.
pub fn fig3(config: &SystemConfig, opts: &ExecOptions) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    for scheme in [Scheme::Mrt, Scheme::Zf] {
        let c = for_scheme(config, scheme)?;
        let report = run_correlation_experiment(&c, CorrOptions::default(), opts)?;
        let geometry = PortGeometry::for_config(&c)?;
        let d = geometry.displacements();
        let mut t = PairTable::new();
        for (k, l, emp, approx) in report.pairs() {
            let (lo, hi) = fisher_interval(emp, report.estimate.n);
            t.push(k + 1, l + 1, d[k], d[l], emp, lo, hi, "empirical");
            t.push(k + 1, l + 1, d[k], d[l], approx, approx, approx, "approximation");
        }
        for (k, l, _, _) in report.pairs() {
            let j = bessel_j0(2.0 * std::f64::consts::PI * (d[k] - d[l]).abs())?;
            t.push(k + 1, l + 1, d[k], d[l], j, j, j, "jakes_kernel");
        }
        out.files.push(t.finish(format!("fig3_{}.csv", file_tag(scheme))));
        out.records.push(record(
            format!("fig3_{}", file_tag(scheme)),
            report.estimate.n,
            report.resampled_singular,
            report.estimate.dropped,
            format!(
                "reference_mode = {}, excluded_ports = {:?}",
                report.reference_mode,
                report.estimate.excluded.iter().map(|k| k + 1).collect::<Vec<_>>(),
            ),
        ));
        out.summary.push_str(&format!(
            "fig3 {scheme} W = {}  pairs = {}  max |empirical - approximation| = {:.4}\n",
            c.w,
            report.pairs().len(),
            report.max_abs_deviation
        ));
    }
    Ok(out)
}

fn outage_table(report: &OutageReport, prefix: &str, t: &mut CurveTable) {
    for row in &report.rows {
        let g = row.gamma;
        let (pc, hc) = (row.correlated, row.correlated_ci);
        t.push(g, pc, (pc - hc).max(0.0), (pc + hc).min(1.0), &format!("{prefix}correlated_mc"));
        let (pi, hi) = (row.iid, row.iid_ci);
        t.push(g, pi, (pi - hi).max(0.0), (pi + hi).min(1.0), &format!("{prefix}iid_mc"));
        t.push_exact(g, row.envelope.upper, &format!("{prefix}upper"));
        t.push_exact(g, row.envelope.lower, &format!("{prefix}lower"));
        t.push_exact(g, row.envelope.iid_benchmark, &format!("{prefix}iid_analytic"));
        t.push_exact(g, row.envelope.large_n_approx, &format!("{prefix}large_n"));
    }
}

fn outage_record(name: String, report: &OutageReport) -> ExperimentRecord {
    record(
        name,
        report.n,
        report.resampled_singular,
        report.infinite,
        format!("reference_mode = {}, selectable_ports = {}", report.reference_mode, report.ports),
    )
}

/// Selection outage: physical correlated ports, independent-port sampler and
/// the analytic envelope.
pub fn fig4(config: &SystemConfig, opts: &ExecOptions) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    let grid = outage_grid();
    for scheme in [Scheme::Mrt, Scheme::Zf] {
        let c = for_scheme(config, scheme)?;
        let report = run_outage_experiment(&c, &grid, opts)?;
        let mut t = CurveTable::new();
        outage_table(&report, "", &mut t);
        out.files.push(t.finish(format!("fig4_{}.csv", file_tag(scheme))));
        out.records.push(outage_record(format!("fig4_{}", file_tag(scheme)), &report));
        out.summary.push_str(&format!(
            "fig4 {scheme} M = {} N = {} W = {}  reference_mode = {}  n = {}\n",
            c.m, c.n, c.w, report.reference_mode, report.n
        ));
    }
    Ok(out)
}

/// Small- and large-SIR asymptotes against the analytic law and the
/// exact-law sampler.
pub fn fig5(config: &SystemConfig, opts: &ExecOptions) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    let grid = asymptote_grid();
    for scheme in [Scheme::Mrt, Scheme::Zf] {
        let c = for_scheme(config, scheme)?;
        let p = BetaPrimeParams::for_scheme(scheme, c.m, c.u)?;
        let n = c.realizations * MARGINAL_FACTOR;
        let sf_mc = marginal_tail_estimate(p, &grid, n, c.seed, opts)?;
        let mut t = CurveTable::new();
        for &g in &grid {
            t.push_exact(g, betaprime_cdf(g, p)?, "analytic_cdf");
        }
        for &g in &grid {
            t.push_exact(g, betaprime_sf(g, p)?, "analytic_sf");
        }
        for &g in &grid {
            t.push_exact(g, asymptote_small_gamma(g, scheme, c.m, c.u)?, "small_gamma_asymptote");
        }
        for &g in &grid {
            t.push_exact(g, asymptote_tail(g, p)?, "tail_asymptote");
        }
        for (&g, &s) in grid.iter().zip(&sf_mc) {
            let v = 1.0 - s;
            let h = binomial_half_width(v, n);
            t.push(g, v, (v - h).max(0.0), (v + h).min(1.0), "mc_cdf");
        }
        for (&g, &s) in grid.iter().zip(&sf_mc) {
            let h = binomial_half_width(s, n);
            t.push(g, s, (s - h).max(0.0), (s + h).min(1.0), "mc_sf");
        }
        out.files.push(t.finish(format!("fig5_{}.csv", file_tag(scheme))));
        out.records.push(record(
            format!("fig5_{}", file_tag(scheme)),
            n,
            0,
            0,
            format!("beta_prime = ({}, {})", p.a(), p.b()),
        ));
        out.summary.push_str(&format!(
            "fig5 {scheme} beta_prime = ({}, {})  tail asymptote at 100 = {:.6e}\n",
            p.a(),
            p.b(),
            asymptote_tail(100.0, p)?
        ));
    }
    Ok(out)
}

/// Outage experiment at every valid point of the sweep grid.
pub fn sweep(config: &SystemConfig, grid: &SweepGrid, opts: &ExecOptions) -> Result<Artifacts> {
    let points = grid.expand(config);
    if points.is_empty() {
        return Err(FamaError::config("sweep", "no valid grid points"));
    }
    let gammas = outage_grid();
    let mut out = Artifacts::default();
    let mut t = CurveTable::new();
    for c in &points {
        let id = format!("{}_M{}_U{}_N{}_W{}", c.scheme, c.m, c.u, c.n, c.w);
        let report = run_outage_experiment(c, &gammas, opts)?;
        outage_table(&report, &format!("{id}:"), &mut t);
        out.records.push(outage_record(format!("sweep.{id}"), &report));
        out.summary.push_str(&format!("sweep {id}  n = {}\n", report.n));
    }
    out.files.push(t.finish("sweep.csv"));
    Ok(out)
}

/// Runs the acceptance suite and renders its table.
pub fn validate(opts: &ExecOptions) -> Result<(Artifacts, usize, usize)> {
    let outcomes = acceptance::run_all(opts)?;
    let table = acceptance::render_table(&outcomes);
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let out = Artifacts {
        files: vec![CsvFile {
            name: "validate.txt".into(),
            contents: table.clone(),
        }],
        records: vec![],
        summary: table,
    };
    Ok((out, failed, outcomes.len()))
}

/// Artifacts of a command without writing them.
pub fn render_command(
    command: Command,
    config: &SystemConfig,
    sweep_grid: &SweepGrid,
    opts: &ExecOptions,
) -> Result<(Artifacts, Option<(usize, usize)>)> {
    Ok(match command {
        Command::Fig2 => (fig2(config, opts)?, None),
        Command::Fig3 => (fig3(config, opts)?, None),
        Command::Fig4 => (fig4(config, opts)?, None),
        Command::Fig5 => (fig5(config, opts)?, None),
        Command::Sweep => (sweep(config, sweep_grid, opts)?, None),
        Command::Validate => {
            let (a, failed, total) = validate(opts)?;
            (a, Some((failed, total)))
        }
    })
}

/// What a finished command left behind.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// `(failed, total)` acceptance criteria for `validate`.
    pub verdict: Option<(usize, usize)>,
}

impl RunSummary {
    /// [`FamaError::Validation`] if any acceptance criterion failed.
    pub fn status(&self) -> Result<()> {
        match self.verdict {
            Some((failed, total)) if failed > 0 => Err(FamaError::Validation { failed, total }),
            _ => Ok(()),
        }
    }
}

/// Runs `command` and writes its CSVs and manifest into `out_dir`.
/// Acceptance failures are reported through [`RunSummary::status`].
pub fn run_command(
    command: Command,
    config: &SystemConfig,
    sweep_grid: &SweepGrid,
    out_dir: &Path,
    opts: &ExecOptions,
) -> Result<RunSummary> {
    let start = Instant::now();
    let (artifacts, verdict) = render_command(command, config, sweep_grid, opts)?;
    let manifest = RunManifest {
        command: command.to_string(),
        config: config.clone(),
        workers: opts.workers,
        chunk_size: opts.chunk_size,
        experiments: artifacts.records.clone(),
        files: artifacts.files.iter().map(|f| f.name.clone()).collect(),
        wall_clock: start.elapsed(),
    };
    let files = write_outputs(&artifacts.files, &manifest, out_dir)?;
    Ok(RunSummary {
        files,
        summary: artifacts.summary,
        verdict,
    })
}
