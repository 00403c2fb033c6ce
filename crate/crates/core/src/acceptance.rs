//! The ten acceptance criteria as runnable checks.
//!
//! Each check returns an outcome with a verdict and the measured numbers
//! behind it. Tolerances are fixed; failing checks are reported, never relaxed.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::analytic::{
    asymptote_small_gamma, betaprime_cdf, betaprime_cdf_finite_sum, betaprime_sf, BetaPrimeParams,
    OutageEnvelope,
};
use crate::channel::{PortGeometry, ReferenceMode, Scheme, SystemConfig};
use crate::config::SweepGrid;
use crate::error::{FamaError, Result};
use crate::experiments::{outage_grid, render_command, Command};
use crate::montecarlo::{
    marginal_tail_estimate, run_cdf_experiment, run_correlation_experiment, run_gain_law_experiment,
    run_outage_experiment, run_surrogate_correlation, simulate_sir_batch, CdfMode, CorrOptions,
    ExecOptions,
};
use crate::randlin::RngStream;
use crate::specialfn::{beta_fn, RealInterval};

pub const CRITERIA: usize = 10;

/// Seed shared by every acceptance experiment.
pub const ACCEPTANCE_SEED: u64 = 20_240_601;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    /// One line per measured quantity, each ending in `ok` or `FAIL`.
    pub details: Vec<String>,
    pub elapsed: Duration,
}

impl CriterionOutcome {
    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn headline(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} ({:.1} s)",
            self.id,
            self.status(),
            self.title,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Collects named checks for one criterion.
struct Checks {
    details: Vec<String>,
    passed: bool,
}

impl Checks {
    fn new() -> Self {
        Checks {
            details: Vec::new(),
            passed: true,
        }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.passed &= ok;
        self.details.push(format!("{what} .. {}", if ok { "ok" } else { "FAIL" }));
    }

    fn finish(self, id: usize, title: &'static str, start: Instant) -> CriterionOutcome {
        CriterionOutcome {
            id,
            title,
            passed: self.passed,
            details: self.details,
            elapsed: start.elapsed(),
        }
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "analytic cross-form identity",
        2 => "exact-law goodness of fit",
        3 => "physical-model fidelity",
        4 => "ZF nulling and gain laws",
        5 => "correlation model",
        6 => "outage sandwich",
        7 => "small-SIR asymptote",
        8 => "large-SIR tail",
        9 => "large-N regime",
        10 => "reproducibility",
        _ => "unknown",
    }
}

fn config(scheme: Scheme, m: usize, u: usize, n: usize, w: f64, realizations: u64) -> Result<SystemConfig> {
    let mut c = SystemConfig::new(scheme, m, u, n, w)?;
    c.seed = ACCEPTANCE_SEED;
    c.realizations = realizations;
    Ok(c)
}

/// Finite-sum and incomplete-Beta CDFs agree to 1e-10 over
/// `(a, b) ∈ [1,16]×[1,8]` on a 200-point log grid, in under 5 s.
pub fn criterion_1() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let grid = RealInterval::new(1e-3, 1e3)?.log_grid(200)?;
    let mut worst: f64 = 0.0;
    for a in 1..=16 {
        for b in 1..=8 {
            let p = BetaPrimeParams::new(a, b)?;
            for &g in &grid {
                worst = worst.max((betaprime_cdf(g, p)? - betaprime_cdf_finite_sum(g, p)?).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mut c = Checks::new();
    c.check(worst <= 1e-10, format!("max |incbeta - finite sum| = {worst:.3e} <= 1e-10"));
    c.check(secs < 5.0, format!("runtime {secs:.2} s < 5 s"));
    Ok(c.finish(1, title(1), start))
}

/// Gamma-ratio sampler at `n = 10^6`: KS ≤ 0.003 against the MRT and ZF laws,
/// exact spot values at `γ = 1`, in under 30 s.
pub fn criterion_2(opts: &ExecOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Checks::new();
    for scheme in [Scheme::Mrt, Scheme::Zf] {
        let cfg = config(scheme, 8, 4, 1, 0.0, 1_000_000)?;
        let r = run_cdf_experiment(&cfg, CdfMode::Marginal, opts)?;
        c.check(
            r.ks <= 0.003,
            format!("{scheme} Beta-prime({}, {}) KS = {:.5} <= 0.003", r.params.a(), r.params.b(), r.ks),
        );
    }
    for (a, b, want) in [(8, 3, 0.0546875), (5, 3, 29.0 / 128.0)] {
        let p = BetaPrimeParams::new(a, b)?;
        let got = betaprime_cdf(1.0, p)?;
        let sum = betaprime_cdf_finite_sum(1.0, p)?;
        c.check(
            (got - want).abs() <= 1e-12 && (sum - want).abs() <= 1e-12,
            format!("F(1; {a},{b}) = {got:.12} (finite sum {sum:.12}), want {want:.12}"),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 30.0, format!("runtime {secs:.2} s < 30 s"));
    Ok(c.finish(2, title(2), start))
}

/// Physical reference-location SIR at `n = 10^5`: MRT KS ≤ 0.03 against
/// Beta-prime(8,3); ZF (isotropic interference directions) KS ≤ 0.01
/// against Beta-prime(5,3).
pub fn criterion_3(opts: &ExecOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Checks::new();
    for (scheme, tol) in [(Scheme::Mrt, 0.03), (Scheme::Zf, 0.01)] {
        let cfg = config(scheme, 8, 4, 1, 0.0, 100_000)?;
        let r = run_cdf_experiment(&cfg, CdfMode::PhysicalReference, opts)?;
        c.check(
            r.ks <= tol,
            format!(
                "{scheme} physical_reference vs Beta-prime({}, {}) KS = {:.5} <= {tol}",
                r.params.a(),
                r.params.b(),
                r.ks
            ),
        );
    }
    Ok(c.finish(3, title(3), start))
}

/// ZF nulling residual ≤ 1e-10 over at least 10^4 draws; desired reference
/// gain means `M − U + 1` (ZF) and `M` (MRT) within 3σ.
pub fn criterion_4(opts: &ExecOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Checks::new();
    for (scheme, want) in [(Scheme::Zf, 5.0), (Scheme::Mrt, 8.0)] {
        let cfg = config(scheme, 8, 4, 1, 0.0, 100_000)?;
        let r = run_gain_law_experiment(&cfg, opts)?;
        c.check(
            (r.mean - want).abs() <= 3.0 * r.std_error,
            format!(
                "{scheme} mean reference gain {:.4} vs {want} (3 sigma = {:.4}, n = {})",
                r.mean,
                3.0 * r.std_error,
                r.n
            ),
        );
        if scheme == Scheme::Zf {
            c.check(
                r.max_nulling_residual <= 1e-10,
                format!("ZF max relative nulling residual {:.3e} <= 1e-10", r.max_nulling_residual),
            );
        }
    }
    Ok(c.finish(4, title(4), start))
}

/// Surrogate correlation at `μ = 1` equals `8/11 ± 0.01` at `n = 10^6`; physical
/// MRT correlation (`M=8, U=4, N=8, W=4`, ports ≥ 2) within 0.1 of the
/// approximation for every pair.
pub fn criterion_5(opts: &ExecOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Checks::new();
    let p = BetaPrimeParams::new(8, 3)?;
    let s = run_surrogate_correlation(&[1.0, 1.0], p, 1_000_000, ACCEPTANCE_SEED, opts)?;
    let r = s.matrix[0][1];
    c.check(
        (r - 8.0 / 11.0).abs() <= 0.01,
        format!("surrogate corr at mu = 1: {r:.5} vs {:.5} +- 0.01", 8.0 / 11.0),
    );
    let mut cfg = config(Scheme::Mrt, 8, 4, 8, 4.0, 1_000_000)?;
    cfg.reference_mode = Some(ReferenceMode::Member);
    let report = run_correlation_experiment(&cfg, CorrOptions::default(), opts)?;
    c.check(
        report.max_abs_deviation <= 0.1,
        format!(
            "physical MRT max |corr - approximation| over {} pairs = {:.4} <= 0.1",
            report.pairs().len(),
            report.max_abs_deviation
        ),
    );
    Ok(c.finish(5, title(5), start))
}

/// MRT outage for `(M, N) ∈ {4,8}×{2,8}`, `W ∈ {0.25, 4}` at `n = 10^5`:
/// every point inside `[lower − 2CI, upper + 2CI]`; `W = 4` within 0.05 of
/// `F^N` and `W = 0.25` within 0.05 of `F` wherever `0.05 ≤ F^N ≤ 0.95`;
/// total under 10 minutes.
pub fn criterion_6(opts: &ExecOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Checks::new();
    let grid = outage_grid();
    for m in [4, 8] {
        for n in [2, 8] {
            for w in [0.25, 4.0] {
                let cfg = config(Scheme::Mrt, m, 4, n, w, 100_000)?;
                let r = run_outage_experiment(&cfg, &grid, opts)?;
                let mut sandwich: f64 = 0.0;
                let mut regime: f64 = 0.0;
                let mut band_points = 0;
                for row in &r.rows {
                    let e = &row.envelope;
                    let ci2 = 2.0 * row.correlated_ci;
                    let below = (e.lower - ci2) - row.correlated;
                    let above = row.correlated - (e.upper + ci2);
                    sandwich = sandwich.max(below).max(above);
                    if (0.05..=0.95).contains(&e.iid_benchmark) {
                        band_points += 1;
                        let target = if w > 1.0 { e.iid_benchmark } else { e.single_port };
                        regime = regime.max((row.correlated - target).abs());
                    }
                }
                c.check(
                    sandwich <= 0.0,
                    format!("M={m} N={n} W={w}: worst excursion outside [lower-2CI, upper+2CI] = {:.3e}", sandwich.max(0.0)),
                );
                let target = if w > 1.0 { "F^N" } else { "F" };
                c.check(
                    regime <= 0.05,
                    format!("M={m} N={n} W={w}: max |P_out - {target}| on band ({band_points} pts) = {regime:.4} <= 0.05"),
                );
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 600.0, format!("runtime {secs:.1} s < 600 s"));
    Ok(c.finish(6, title(6), start))
}

/// `F(γ) / (C γ^{M_eff}) ∈ [0.95, 1]` at `γ = 0.0025` with `C = 45` (8,3) and
/// `C = 21` (5,3), increasing toward 1 as `γ` shrinks.
pub fn criterion_7() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Checks::new();
    let gammas = [0.02, 0.01, 0.005, 0.0025];
    for (scheme, prefactor) in [(Scheme::Mrt, 45.0), (Scheme::Zf, 21.0)] {
        let p = BetaPrimeParams::for_scheme(scheme, 8, 4)?;
        let ratios: Vec<f64> = gammas
            .iter()
            .map(|&g| Ok(betaprime_cdf(g, p)? / asymptote_small_gamma(g, scheme, 8, 4)?))
            .collect::<Result<_>>()?;
        let c_impl = asymptote_small_gamma(1.0, scheme, 8, 4)?;
        c.check(
            (c_impl - prefactor).abs() <= 1e-9 * prefactor,
            format!("{scheme} prefactor {c_impl:.9} = {prefactor}"),
        );
        let last = ratios[ratios.len() - 1];
        c.check(
            (0.95..=1.0).contains(&last),
            format!("{scheme} ratio at 0.0025 = {last:.5} in [0.95, 1]"),
        );
        let monotone = ratios.windows(2).all(|w| w[1] > w[0] && w[1] <= 1.0);
        c.check(
            monotone,
            format!("{scheme} ratios {:?} increase toward 1", ratios.iter().map(|r| format!("{r:.5}")).collect::<Vec<_>>()),
        );
    }
    Ok(c.finish(7, title(7), start))
}

/// `(1 − F(γ)) γ^b b B(a, b)` within 10% of 1 at `γ = 100` and 3% at
/// `γ = 1000`; sampler tail at `γ = 30` within 5% of `1 − F` at `n = 10^7`.
pub fn criterion_8(opts: &ExecOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Checks::new();
    for (a, b) in [(8u32, 3u32), (5, 3)] {
        let p = BetaPrimeParams::new(a, b)?;
        let norm = b as f64 * beta_fn(a as f64, b as f64)?;
        for (g, tol) in [(100.0, 0.10), (1000.0, 0.03)] {
            let v = betaprime_sf(g, p)? * g.powi(b as i32) * norm;
            c.check(
                (v - 1.0).abs() <= tol,
                format!("({a},{b}) scaled tail at {g} = {v:.5}, |x - 1| <= {tol}"),
            );
        }
    }
    let p = BetaPrimeParams::new(8, 3)?;
    let est = marginal_tail_estimate(p, &[30.0], 10_000_000, ACCEPTANCE_SEED, opts)?[0];
    let exact = betaprime_sf(30.0, p)?;
    let rel = (est - exact).abs() / exact;
    c.check(
        rel <= 0.05,
        format!("sampler tail at 30: {est:.6e} vs {exact:.6e}, relative error {rel:.4} <= 0.05"),
    );
    Ok(c.finish(8, title(8), start))
}

/// `|exp(−Nε) − (1 − ε)^N| ≤ Nε²/2 + 1e-12` for `N = 8` and `ε ∈ {1e-1, 1e-2, 1e-3}`.
pub fn criterion_9() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Checks::new();
    let n = 8usize;
    for eps in [1e-1, 1e-2, 1e-3] {
        let e = OutageEnvelope::from_parts(1.0, 1.0 - eps, eps, n)?;
        let gap = (e.large_n_approx - e.iid_benchmark).abs();
        let bound = n as f64 * eps * eps / 2.0 + 1e-12;
        c.check(gap <= bound, format!("eps = {eps:e}: gap {gap:.3e} <= {bound:.3e}"));
    }
    Ok(c.finish(9, title(9), start))
}

/// Byte-identical CSVs across 1, 2 and 8 workers; β and common-power scaling
/// change no SIR by more than 1e-12 relative.
pub fn criterion_10() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Checks::new();
    // a few full chunks plus a partial one
    let mut base = config(Scheme::Mrt, 6, 3, 4, 1.5, 3 * 4096 + 123)?;
    base.seed = ACCEPTANCE_SEED + 10;
    for command in [Command::Fig2, Command::Fig3, Command::Fig4, Command::Fig5] {
        let mut cfg = base.clone();
        if command == Command::Fig2 || command == Command::Fig5 {
            cfg.realizations /= 10;
        }
        let render = |workers: usize| -> Result<Vec<(String, String)>> {
            let (a, _) = render_command(command, &cfg, &SweepGrid::default(), &ExecOptions::with_workers(workers))?;
            Ok(a.files.into_iter().map(|f| (f.name, f.contents)).collect())
        };
        let one = render(1)?;
        let same = render(2)? == one && render(8)? == one;
        c.check(same, format!("{command}: CSVs identical for 1, 2 and 8 workers ({} files)", one.len()));
    }
    for scheme in [Scheme::Mrt, Scheme::Zf] {
        let cfg = config(scheme, 6, 3, 4, 1.5, 1)?;
        let geometry = PortGeometry::for_config(&cfg)?;
        let reference = simulate_sir_batch(&cfg, &geometry, &mut RngStream::new(77, 0), 2000)?;
        let mut scaled_beta = cfg.clone();
        scaled_beta.beta = cfg.beta.iter().map(|b| b * 37.5).collect();
        let mut scaled_power = cfg.clone();
        scaled_power.powers = cfg.powers.iter().map(|p| p * 0.0123).collect();
        for (label, variant) in [("beta x 37.5", &scaled_beta), ("powers x 0.0123", &scaled_power)] {
            let other = simulate_sir_batch(variant, &geometry, &mut RngStream::new(77, 0), 2000)?;
            let mut worst: f64 = 0.0;
            let mut same_infinite = true;
            for r in 0..reference.len() {
                for (x, y) in reference.row(r).iter().zip(other.row(r)) {
                    if x.is_finite() && y.is_finite() {
                        worst = worst.max((x - y).abs() / x.abs());
                    } else {
                        same_infinite &= x == y;
                    }
                }
            }
            c.check(
                worst <= 1e-12 && same_infinite,
                format!("{scheme} {label}: max relative SIR change {worst:.2e} <= 1e-12"),
            );
        }
    }
    Ok(c.finish(10, title(10), start))
}

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: usize, opts: &ExecOptions) -> Result<CriterionOutcome> {
    match id {
        1 => criterion_1(),
        2 => criterion_2(opts),
        3 => criterion_3(opts),
        4 => criterion_4(opts),
        5 => criterion_5(opts),
        6 => criterion_6(opts),
        7 => criterion_7(),
        8 => criterion_8(opts),
        9 => criterion_9(),
        10 => criterion_10(),
        other => Err(FamaError::domain("run_criterion", format!("no criterion {other}"))),
    }
}

pub fn run_all(opts: &ExecOptions) -> Result<Vec<CriterionOutcome>> {
    (1..=CRITERIA).map(|id| run_criterion(id, opts)).collect()
}

/// Plain-text pass/fail table with the measured details under each line.
pub fn render_table(outcomes: &[CriterionOutcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        let _ = writeln!(s, "{}", o.headline());
        for d in &o.details {
            let _ = writeln!(s, "    {d}");
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let _ = writeln!(s, "{passed}/{} criteria passed", outcomes.len());
    s
}
