//! Monte-Carlo estimation of per-port SIRs, selection outage and cross-port
//! correlation.
//!
//! Work is cut into fixed-size chunks. Chunk `c` of an experiment tagged `t`
//! draws from stream `(t << 32) | c` of the configured seed, and chunk results
//! are merged in chunk order, so every output is independent of the number of
//! workers. `FAMA_LAB_WORKERS` caps the worker count.
//!
//! Only user 0 is evaluated per realization; the other users supply
//! interference and shape the precoders.

use rayon::prelude::*;

use crate::analytic::{
    betaprime_cdf, m_eff, outage_envelope, rho_x_approx, BetaPrimeParams, OutageEnvelope,
};
use crate::channel::{ChannelSet, PortGeometry, ReferenceMode, Scheme, SystemConfig};
use crate::error::{FamaError, Result};
use crate::precoding::{precoders, PrecoderSet};
use crate::randlin::{dot_h, sample_gamma_int, sample_isotropic_unit, RngStream};
use crate::specialfn::RealInterval;

/// SIR sentinel for a nulled interference sum.
pub const INFINITE: f64 = f64::INFINITY;

/// Interference below this fraction of `‖h‖² Σ_{i≠u} P_i` counts as nulled.
pub const NULL_FLOOR: f64 = 1e-20;

/// Realizations per chunk.
pub const DEFAULT_CHUNK_SIZE: u64 = 4096;

/// Two-sided 95% normal quantile for binomial confidence half-widths.
pub const Z_95: f64 = 1.96;

pub const WORKERS_ENV: &str = "FAMA_LAB_WORKERS";

/// Stream tags; each experiment draws from its own family of streams.
pub mod tags {
    pub const CDF_MARGINAL: u64 = 1;
    pub const CDF_PHYSICAL: u64 = 2;
    pub const CORRELATION: u64 = 3;
    pub const OUTAGE_PHYSICAL: u64 = 4;
    pub const OUTAGE_IID: u64 = 5;
    pub const SURROGATE: u64 = 6;
    pub const TAIL: u64 = 7;
    pub const GAIN_LAWS: u64 = 8;
}

/// `(tag << 32) | chunk`.
pub fn stream_id(tag: u64, chunk: u64) -> u64 {
    debug_assert!(chunk < 1 << 32);
    (tag << 32) | chunk
}

/// Parallel execution settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    pub workers: usize,
    pub chunk_size: u64,
}

impl ExecOptions {
    pub fn with_workers(workers: usize) -> Self {
        ExecOptions {
            workers: workers.max(1),
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }

    /// Available parallelism, capped by `FAMA_LAB_WORKERS` when set.
    pub fn from_env() -> Self {
        let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
        let workers = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&w| w > 0)
            .map_or(avail, |w| w.min(avail));
        Self::with_workers(workers)
    }
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self::from_env()
    }
}

/// Runs `job(chunk, count)` over all chunks of `total` items and returns the
/// results in chunk order.
pub fn run_chunked<T, F>(total: u64, opts: &ExecOptions, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync + Send,
{
    let size = opts.chunk_size.max(1);
    let chunks = total.div_ceil(size);
    if chunks >= 1 << 32 {
        return Err(FamaError::domain("run_chunked", "too many chunks"));
    }
    let count = |c: u64| size.min(total - c * size);
    if opts.workers <= 1 {
        return (0..chunks).map(|c| job(c, count(c))).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| FamaError::domain("run_chunked", e.to_string()))?;
    pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| job(c, count(c)))
            .collect()
    })
}

/// Per-port SIR of `user`'s channel `h`:
/// `P_u|hᴴw_u|² / Σ_{i≠u} P_i|hᴴw_i|²`, or [`INFINITE`] when the sum is nulled.
pub fn sir_at(h: &[num_complex::Complex64], precoders: &PrecoderSet, powers: &[f64], user: usize) -> f64 {
    let mut desired = 0.0;
    let mut interference = 0.0;
    let mut interferer_power = 0.0;
    for i in 0..precoders.users() {
        let g = dot_h(h, precoders.beam(i)).norm_sqr() * powers[i];
        if i == user {
            desired = g;
        } else {
            interference += g;
            interferer_power += powers[i];
        }
    }
    let h_energy: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    if interference <= NULL_FLOOR * h_energy * interferer_power {
        INFINITE
    } else {
        desired / interference
    }
}

/// `X_{u,k}` for every user `u` and location `k`.
pub fn physical_sir_per_port(
    channels: &ChannelSet,
    precoders: &PrecoderSet,
    powers: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if precoders.users() != channels.users()
        || precoders.antennas() != channels.antennas()
        || powers.len() != channels.users()
    {
        return Err(FamaError::domain("physical_sir_per_port", "inconsistent dimensions"));
    }
    Ok((0..channels.users())
        .map(|u| {
            (0..channels.locations())
                .map(|k| sir_at(channels.port(u, k), precoders, powers, u))
                .collect()
        })
        .collect())
}

/// Argmax over `selection` (zero-based indices into `sirs`).
///
/// Ties go to the earliest index in `selection`; [`INFINITE`] beats any finite value.
pub fn select_best_port(sirs: &[f64], selection: &[usize]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &k in selection {
        let v = *sirs
            .get(k)
            .ok_or_else(|| FamaError::domain("select_best_port", format!("port {k} out of range")))?;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best.ok_or_else(|| FamaError::domain("select_best_port", "empty selection set"))
}

/// One draw of `G_a / G_b` with independent unit-scale Gamma variates.
pub fn marginal_model_sample(stream: &mut RngStream, p: BetaPrimeParams) -> Result<f64> {
    let num = sample_gamma_int(stream, p.a())?;
    let den = sample_gamma_int(stream, p.b())?;
    Ok(num / den)
}

/// Surrogate desired gains `U_k = μ_k² S_c + S_k`, with one shared
/// `S_c ~ Γ(M_eff)` and independent `S_k ~ Γ(L)` per port.
pub fn surrogate_gain_sample(stream: &mut RngStream, mu: &[f64], m_eff: u32, l: u32) -> Result<Vec<f64>> {
    let shared = sample_gamma_int(stream, m_eff)?;
    mu.iter()
        .map(|m| Ok(m * m * shared + sample_gamma_int(stream, l)?))
        .collect()
}

/// Streaming first and second co-moments of a pair of series.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoMoments {
    n: u64,
    mean_x: f64,
    mean_y: f64,
    m2_x: f64,
    m2_y: f64,
    c_xy: f64,
    dropped: u64,
}

impl CoMoments {
    /// Adds one pair; pairs with a non-finite member are dropped and counted.
    pub fn push(&mut self, x: f64, y: f64) {
        if !x.is_finite() || !y.is_finite() {
            self.dropped += 1;
            return;
        }
        self.n += 1;
        let n = self.n as f64;
        let dx = x - self.mean_x;
        self.mean_x += dx / n;
        let dy = y - self.mean_y;
        self.mean_y += dy / n;
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
        self.c_xy += dx * (y - self.mean_y);
    }

    pub fn merge(&mut self, other: &CoMoments) {
        self.dropped += other.dropped;
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            let dropped = self.dropped;
            *self = *other;
            self.dropped = dropped;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let dx = other.mean_x - self.mean_x;
        let dy = other.mean_y - self.mean_y;
        let w = na * nb / n;
        self.mean_x += dx * nb / n;
        self.mean_y += dy * nb / n;
        self.m2_x += other.m2_x + dx * dx * w;
        self.m2_y += other.m2_y + dy * dy * w;
        self.c_xy += other.c_xy + dx * dy * w;
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn correlation(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(FamaError::domain("pearson_correlation", "need at least two finite pairs"));
        }
        if !(self.m2_x > 0.0 && self.m2_y > 0.0) {
            return Err(FamaError::domain("pearson_correlation", "zero variance"));
        }
        Ok((self.c_xy / (self.m2_x * self.m2_y).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Sample Pearson coefficient over rows where both values are finite.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(FamaError::domain("pearson_correlation", "length mismatch"));
    }
    let mut acc = CoMoments::default();
    for (&a, &b) in x.iter().zip(y) {
        acc.push(a, b);
    }
    acc.correlation()
}

/// Cumulative counts of samples at or below each point of a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    grid: Vec<f64>,
    // hist[i]: samples in (grid[i-1], grid[i]]; the last slot holds those above the grid
    hist: Vec<u64>,
    n: u64,
}

impl EmpiricalCdf {
    pub fn new(grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(FamaError::domain("EmpiricalCdf::new", "grid must be non-empty and strictly increasing"));
        }
        let hist = vec![0; grid.len() + 1];
        Ok(EmpiricalCdf { grid, hist, n: 0 })
    }

    /// 200 log-spaced points on `[1e-3, 1e3]`.
    pub fn default_grid() -> Vec<f64> {
        RealInterval::new(1e-3, 1e3)
            .and_then(|r| r.log_grid(200))
            .expect("fixed valid interval")
    }

    pub fn with_default_grid() -> Self {
        Self::new(Self::default_grid()).expect("default grid is valid")
    }

    pub fn push(&mut self, x: f64) {
        let idx = self.grid.partition_point(|&g| g < x);
        self.hist[idx] += 1;
        self.n += 1;
    }

    pub fn merge(&mut self, other: &EmpiricalCdf) -> Result<()> {
        if self.grid != other.grid {
            return Err(FamaError::domain("EmpiricalCdf::merge", "grids differ"));
        }
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        self.n += other.n;
        Ok(())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> Vec<u64> {
        self.hist[..self.grid.len()]
            .iter()
            .scan(0u64, |acc, &h| {
                *acc += h;
                Some(*acc)
            })
            .collect()
    }

    /// `F̂(γ_i)` for every grid point.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.counts().into_iter().map(|c| c as f64 / n).collect()
    }
}

/// `max_i |F̂(γ_i) − F(γ_i)|` over the empirical grid.
pub fn ks_distance<F>(empirical: &EmpiricalCdf, cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut worst: f64 = 0.0;
    for (g, v) in empirical.grid().iter().zip(empirical.values()) {
        worst = worst.max((v - cdf(*g)?).abs());
    }
    Ok(worst)
}

/// Binomial 95% half-width `z √(p(1−p)/n)`.
pub fn binomial_half_width(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    Z_95 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Per-port SIRs of user 0 for consecutive physical realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SirBatch {
    locations: usize,
    /// Row-major: realization × location.
    sirs: Vec<f64>,
    selected: Vec<(usize, f64)>,
    pub resampled_singular: u64,
    pub infinite: u64,
}

impl SirBatch {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn locations(&self) -> usize {
        self.locations
    }

    /// SIRs at every location for realization `r`.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.sirs[r * self.locations..(r + 1) * self.locations]
    }

    /// `(location, Γ)` chosen in realization `r`.
    pub fn selected(&self, r: usize) -> (usize, f64) {
        self.selected[r]
    }
}

/// Reusable state for drawing physical realizations.
struct PhysicalSim<'a> {
    config: &'a SystemConfig,
    geometry: &'a PortGeometry,
    channels: ChannelSet,
    resampled: u64,
}

impl<'a> PhysicalSim<'a> {
    fn new(config: &'a SystemConfig, geometry: &'a PortGeometry) -> Self {
        PhysicalSim {
            config,
            geometry,
            channels: ChannelSet::zeros(config.m, config.u, geometry.len()),
            resampled: 0,
        }
    }

    /// Draws channels and precoders, redrawing on a singular Gram matrix.
    fn draw(&mut self, stream: &mut RngStream) -> Result<PrecoderSet> {
        loop {
            self.channels.resample(stream, self.geometry, &self.config.beta);
            match precoders(self.config.scheme, &self.channels.reference_matrix()) {
                Ok(p) => return Ok(p),
                Err(FamaError::SingularGram { .. }) => self.resampled += 1,
                Err(FamaError::Domain { .. }) if self.config.scheme == Scheme::Mrt => self.resampled += 1,
                Err(e) => return Err(e),
            }
        }
    }
}

/// Simulates `count` realizations of user 0's per-port SIRs from `stream`.
pub fn simulate_sir_batch(
    config: &SystemConfig,
    geometry: &PortGeometry,
    stream: &mut RngStream,
    count: u64,
) -> Result<SirBatch> {
    if geometry.len() != config.locations() {
        return Err(FamaError::domain("simulate_sir_batch", "geometry does not match configuration"));
    }
    let selection = config.selection_set();
    let locations = geometry.len();
    let mut sim = PhysicalSim::new(config, geometry);
    let mut sirs = Vec::with_capacity(count as usize * locations);
    let mut selected = Vec::with_capacity(count as usize);
    let mut infinite = 0;
    for _ in 0..count {
        let p = sim.draw(stream)?;
        let start = sirs.len();
        for k in 0..locations {
            let x = sir_at(sim.channels.port(0, k), &p, &config.powers, 0);
            infinite += u64::from(x == INFINITE);
            sirs.push(x);
        }
        selected.push(select_best_port(&sirs[start..], &selection)?);
    }
    Ok(SirBatch {
        locations,
        sirs,
        selected,
        resampled_singular: sim.resampled,
        infinite,
    })
}

/// Source of the per-port SIR samples in a CDF experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfMode {
    /// Exact Gamma-ratio sampler.
    Marginal,
    /// Physical simulation evaluated at the reference location. Under ZF the
    /// physical interference there is nulled, so each co-user term is instead
    /// `|gᴴv|²` with a fresh channel `g` and an independent isotropic unit
    /// direction `v`, which is exactly `Exp(1)` and independent across co-users.
    PhysicalReference,
}

impl CdfMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CdfMode::Marginal => "marginal",
            CdfMode::PhysicalReference => "physical_reference",
        }
    }
}

/// Empirical per-port CDF against the Beta-prime law.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfReport {
    pub scheme: Scheme,
    pub mode: CdfMode,
    pub params: BetaPrimeParams,
    pub empirical: EmpiricalCdf,
    pub analytic: Vec<f64>,
    pub ks: f64,
    pub resampled_singular: u64,
    pub infinite: u64,
}

fn merge_cdfs(parts: Vec<(EmpiricalCdf, u64, u64)>) -> Result<(EmpiricalCdf, u64, u64)> {
    let mut iter = parts.into_iter();
    let (mut cdf, mut resampled, mut infinite) =
        iter.next().ok_or_else(|| FamaError::domain("merge", "no chunks"))?;
    for (c, r, i) in iter {
        cdf.merge(&c)?;
        resampled += r;
        infinite += i;
    }
    Ok((cdf, resampled, infinite))
}

/// ZF reference-location SIR with the desired gain from the physical beam and
/// independent isotropic interference projections.
fn zf_reference_sample(
    sim: &mut PhysicalSim<'_>,
    stream: &mut RngStream,
) -> Result<f64> {
    let cfg = sim.config;
    let p = sim.draw(stream)?;
    let h = sim.channels.port(0, 0);
    let desired = cfg.powers[0] * dot_h(h, p.beam(0)).norm_sqr();
    let scale = cfg.beta[0].sqrt();
    let mut interference = 0.0;
    for i in 1..cfg.u {
        let v = sample_isotropic_unit(stream, cfg.m)?;
        let mut proj = num_complex::Complex64::new(0.0, 0.0);
        for vi in v.as_slice() {
            proj += (stream.complex_gaussian() * scale).conj() * vi;
        }
        interference += cfg.powers[i] * proj.norm_sqr();
    }
    Ok(if interference > 0.0 { desired / interference } else { INFINITE })
}

pub fn run_cdf_experiment(config: &SystemConfig, mode: CdfMode, opts: &ExecOptions) -> Result<CdfReport> {
    config.validate()?;
    let params = BetaPrimeParams::for_scheme(config.scheme, config.m, config.u)?;
    let grid = EmpiricalCdf::default_grid();
    let parts = match mode {
        CdfMode::Marginal => run_chunked(config.realizations, opts, |c, count| {
            let mut s = RngStream::new(config.seed, stream_id(tags::CDF_MARGINAL, c));
            let mut cdf = EmpiricalCdf::new(grid.clone())?;
            for _ in 0..count {
                cdf.push(marginal_model_sample(&mut s, params)?);
            }
            Ok((cdf, 0, 0))
        })?,
        CdfMode::PhysicalReference => {
            let mut single = config.clone();
            single.n = 1;
            single.reference_mode = Some(ReferenceMode::Member);
            let geometry = PortGeometry::for_config(&single)?;
            run_chunked(config.realizations, opts, |c, count| {
                let mut s = RngStream::new(config.seed, stream_id(tags::CDF_PHYSICAL, c));
                let mut cdf = EmpiricalCdf::new(grid.clone())?;
                let mut sim = PhysicalSim::new(&single, &geometry);
                let mut infinite = 0;
                for _ in 0..count {
                    let x = match single.scheme {
                        Scheme::Mrt => {
                            let p = sim.draw(&mut s)?;
                            sir_at(sim.channels.port(0, 0), &p, &single.powers, 0)
                        }
                        Scheme::Zf => zf_reference_sample(&mut sim, &mut s)?,
                    };
                    infinite += u64::from(x == INFINITE);
                    cdf.push(x);
                }
                Ok((cdf, sim.resampled, infinite))
            })?
        }
    };
    let (empirical, resampled_singular, infinite) = merge_cdfs(parts)?;
    let analytic = grid
        .iter()
        .map(|&g| betaprime_cdf(g, params))
        .collect::<Result<Vec<_>>>()?;
    let ks = empirical
        .values()
        .iter()
        .zip(&analytic)
        .fold(0.0f64, |m, (e, a)| m.max((e - a).abs()));
    Ok(CdfReport {
        scheme: config.scheme,
        mode,
        params,
        empirical,
        analytic,
        ks,
        resampled_singular,
        infinite,
    })
}

/// Cross-port correlation matrix with its sample size and the excluded locations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrEstimate {
    /// Zero-based locations that were estimated.
    pub ports: Vec<usize>,
    /// Symmetric, unit diagonal, indexed like `ports`.
    pub matrix: Vec<Vec<f64>>,
    pub n: u64,
    pub excluded: Vec<usize>,
    /// Rows dropped because a value was not finite (worst pair).
    pub dropped: u64,
}

fn estimate_from_moments(ports: Vec<usize>, excluded: Vec<usize>, moments: &[CoMoments]) -> Result<CorrEstimate> {
    let p = ports.len();
    let mut matrix = vec![vec![1.0; p]; p];
    let mut idx = 0;
    let mut n = u64::MAX;
    let mut dropped = 0;
    for a in 0..p {
        for b in a + 1..p {
            let r = moments[idx].correlation()?;
            matrix[a][b] = r;
            matrix[b][a] = r;
            n = n.min(moments[idx].count());
            dropped = dropped.max(moments[idx].dropped());
            idx += 1;
        }
    }
    Ok(CorrEstimate {
        ports,
        matrix,
        n: if n == u64::MAX { 0 } else { n },
        excluded,
        dropped,
    })
}

fn pair_moments_chunks<F>(total: u64, opts: &ExecOptions, pairs: usize, job: F) -> Result<Vec<CoMoments>>
where
    F: Fn(u64, u64, &mut [CoMoments]) -> Result<u64> + Sync + Send,
{
    let parts = run_chunked(total, opts, |c, count| {
        let mut acc = vec![CoMoments::default(); pairs];
        let extra = job(c, count, &mut acc)?;
        Ok((acc, extra))
    })?;
    let mut total_acc = vec![CoMoments::default(); pairs];
    for (acc, _) in &parts {
        for (t, a) in total_acc.iter_mut().zip(acc) {
            t.merge(a);
        }
    }
    Ok(total_acc)
}

/// Which locations enter a correlation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorrOptions {
    /// Member mode only: also estimate pairs involving the reference port.
    pub include_reference: bool,
}

/// Physical cross-port SIR correlation with the approximate overlay.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrReport {
    pub estimate: CorrEstimate,
    /// Approximation for each estimated pair, same layout as the estimate.
    pub overlay: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub max_abs_deviation: f64,
    pub reference_mode: ReferenceMode,
    pub resampled_singular: u64,
}

impl CorrReport {
    /// Off-diagonal pairs as `(k, ℓ, empirical, overlay)` with zero-based locations.
    pub fn pairs(&self) -> Vec<(usize, usize, f64, f64)> {
        let ports = &self.estimate.ports;
        let mut out = Vec::new();
        for a in 0..ports.len() {
            for b in a + 1..ports.len() {
                out.push((ports[a], ports[b], self.estimate.matrix[a][b], self.overlay[a][b]));
            }
        }
        out
    }
}

pub fn run_correlation_experiment(
    config: &SystemConfig,
    corr: CorrOptions,
    opts: &ExecOptions,
) -> Result<CorrReport> {
    config.validate()?;
    if config.n < 3 {
        return Err(FamaError::config("N", "correlation experiment needs N >= 3"));
    }
    let geometry = PortGeometry::for_config(config)?;
    let mode = config.reference_mode();
    let (ports, excluded): (Vec<usize>, Vec<usize>) = match mode {
        ReferenceMode::Member if corr.include_reference => ((0..config.n).collect(), vec![]),
        ReferenceMode::Member => ((1..config.n).collect(), vec![0]),
        ReferenceMode::External => ((1..=config.n).collect(), vec![0]),
    };
    let pairs = ports.len() * (ports.len() - 1) / 2;
    let resampled = std::sync::atomic::AtomicU64::new(0);
    let moments = pair_moments_chunks(config.realizations, opts, pairs, |c, count, acc| {
        let mut s = RngStream::new(config.seed, stream_id(tags::CORRELATION, c));
        let batch = simulate_sir_batch(config, &geometry, &mut s, count)?;
        resampled.fetch_add(batch.resampled_singular, std::sync::atomic::Ordering::Relaxed);
        for r in 0..batch.len() {
            let row = batch.row(r);
            let mut idx = 0;
            for a in 0..ports.len() {
                for b in a + 1..ports.len() {
                    acc[idx].push(row[ports[a]], row[ports[b]]);
                    idx += 1;
                }
            }
        }
        Ok(0)
    })?;
    let estimate = estimate_from_moments(ports.clone(), excluded, &moments)?;
    let a = m_eff(config.scheme, config.m, config.u)? as u32;
    let l = config.l() as u32;
    let mu = geometry.mu().to_vec();
    let p = ports.len();
    let mut overlay = vec![vec![1.0; p]; p];
    let mut worst: f64 = 0.0;
    for i in 0..p {
        for j in i + 1..p {
            let v = rho_x_approx(mu[ports[i]], mu[ports[j]], a, l);
            overlay[i][j] = v;
            overlay[j][i] = v;
            worst = worst.max((estimate.matrix[i][j] - v).abs());
        }
    }
    Ok(CorrReport {
        estimate,
        overlay,
        mu,
        max_abs_deviation: worst,
        reference_mode: mode,
        resampled_singular: resampled.into_inner(),
    })
}

/// Pairwise correlation of surrogate gains for the given `μ` vector.
pub fn run_surrogate_correlation(
    mu: &[f64],
    params: BetaPrimeParams,
    n: u64,
    seed: u64,
    opts: &ExecOptions,
) -> Result<CorrEstimate> {
    if mu.len() < 2 {
        return Err(FamaError::domain("run_surrogate_correlation", "need at least two ports"));
    }
    let p = mu.len();
    let pairs = p * (p - 1) / 2;
    let moments = pair_moments_chunks(n, opts, pairs, |c, count, acc| {
        let mut s = RngStream::new(seed, stream_id(tags::SURROGATE, c));
        for _ in 0..count {
            let g = surrogate_gain_sample(&mut s, mu, params.a(), params.b())?;
            let mut idx = 0;
            for a in 0..p {
                for b in a + 1..p {
                    acc[idx].push(g[a], g[b]);
                    idx += 1;
                }
            }
        }
        Ok(0)
    })?;
    estimate_from_moments((0..p).collect(), vec![], &moments)
}

/// One threshold of an outage experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageRow {
    pub gamma: f64,
    /// Physical correlated-port outage estimate.
    pub correlated: f64,
    pub correlated_ci: f64,
    /// Outage of the best of `N` independent exact-law samples.
    pub iid: f64,
    pub iid_ci: f64,
    pub envelope: OutageEnvelope,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageReport {
    pub rows: Vec<OutageRow>,
    pub n: u64,
    /// Size of the selection set.
    pub ports: usize,
    pub reference_mode: ReferenceMode,
    pub resampled_singular: u64,
    pub infinite: u64,
}

pub fn run_outage_experiment(config: &SystemConfig, gammas: &[f64], opts: &ExecOptions) -> Result<OutageReport> {
    config.validate()?;
    if gammas.is_empty() || gammas.iter().any(|g| !(*g > 0.0)) || gammas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(FamaError::config("gamma", "grid must be positive and strictly increasing"));
    }
    let geometry = PortGeometry::for_config(config)?;
    let selection = config.selection_set();
    let ports = selection.len();
    let params = BetaPrimeParams::for_scheme(config.scheme, config.m, config.u)?;

    let physical = run_chunked(config.realizations, opts, |c, count| {
        let mut s = RngStream::new(config.seed, stream_id(tags::OUTAGE_PHYSICAL, c));
        let batch = simulate_sir_batch(config, &geometry, &mut s, count)?;
        let mut cdf = EmpiricalCdf::new(gammas.to_vec())?;
        for r in 0..batch.len() {
            cdf.push(batch.selected(r).1);
        }
        Ok((cdf, batch.resampled_singular, batch.infinite))
    })?;
    let (correlated, resampled_singular, infinite) = merge_cdfs(physical)?;

    let iid = run_chunked(config.realizations, opts, |c, count| {
        let mut s = RngStream::new(config.seed, stream_id(tags::OUTAGE_IID, c));
        let mut cdf = EmpiricalCdf::new(gammas.to_vec())?;
        for _ in 0..count {
            let mut best = 0.0f64;
            for _ in 0..ports {
                best = best.max(marginal_model_sample(&mut s, params)?);
            }
            cdf.push(best);
        }
        Ok((cdf, 0, 0))
    })?;
    let (iid, _, _) = merge_cdfs(iid)?;

    let n = config.realizations;
    let rows = gammas
        .iter()
        .zip(correlated.values().into_iter().zip(iid.values()))
        .map(|(&gamma, (pc, pi))| {
            Ok(OutageRow {
                gamma,
                correlated: pc,
                correlated_ci: binomial_half_width(pc, n),
                iid: pi,
                iid_ci: binomial_half_width(pi, n),
                envelope: outage_envelope(gamma, params, ports)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OutageReport {
        rows,
        n,
        ports,
        reference_mode: config.reference_mode(),
        resampled_singular,
        infinite,
    })
}

/// Fraction of exact-law samples above each threshold.
pub fn marginal_tail_estimate(
    params: BetaPrimeParams,
    gammas: &[f64],
    n: u64,
    seed: u64,
    opts: &ExecOptions,
) -> Result<Vec<f64>> {
    let parts = run_chunked(n, opts, |c, count| {
        let mut s = RngStream::new(seed, stream_id(tags::TAIL, c));
        let mut cdf = EmpiricalCdf::new(gammas.to_vec())?;
        for _ in 0..count {
            cdf.push(marginal_model_sample(&mut s, params)?);
        }
        Ok((cdf, 0, 0))
    })?;
    let (cdf, _, _) = merge_cdfs(parts)?;
    Ok(cdf.values().into_iter().map(|v| 1.0 - v).collect())
}

/// Sample mean and standard error of the desired reference-location gain
/// `|h_{u,1}ᴴ w_u|²` of user 0, with the worst relative ZF nulling residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainLawReport {
    pub mean: f64,
    pub std_error: f64,
    pub max_nulling_residual: f64,
    pub n: u64,
}

pub fn run_gain_law_experiment(config: &SystemConfig, opts: &ExecOptions) -> Result<GainLawReport> {
    config.validate()?;
    let mut single = config.clone();
    single.n = 1;
    single.reference_mode = Some(ReferenceMode::Member);
    let geometry = PortGeometry::for_config(&single)?;
    let parts = run_chunked(config.realizations, opts, |c, count| {
        let mut s = RngStream::new(config.seed, stream_id(tags::GAIN_LAWS, c));
        let mut sim = PhysicalSim::new(&single, &geometry);
        let (mut sum, mut sum_sq, mut worst) = (0.0, 0.0, 0.0f64);
        for _ in 0..count {
            let p = sim.draw(&mut s)?;
            let g = dot_h(sim.channels.port(0, 0), p.beam(0)).norm_sqr() / single.beta[0];
            sum += g;
            sum_sq += g * g;
            if single.scheme == Scheme::Zf {
                for u in 0..single.u {
                    for i in 0..single.u {
                        if i != u {
                            let h = sim.channels.port(i, 0);
                            let norm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                            worst = worst.max(dot_h(h, p.beam(u)).norm() / norm);
                        }
                    }
                }
            }
        }
        Ok((sum, sum_sq, worst))
    })?;
    let n = config.realizations as f64;
    let (sum, sum_sq, worst) = parts
        .into_iter()
        .fold((0.0, 0.0, 0.0f64), |(a, b, c), (x, y, z)| (a + x, b + y, c.max(z)));
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean) * n / (n - 1.0).max(1.0);
    Ok(GainLawReport {
        mean,
        std_error: (var / n).sqrt(),
        max_nulling_residual: worst,
        n: config.realizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randlin::{ComplexMatrix, ComplexVector};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn selection_rules() {
        assert_eq!(select_best_port(&[3.0, 5.0, 2.0], &[0, 1, 2]).unwrap(), (1, 5.0));
        assert_eq!(select_best_port(&[4.0, 4.0], &[0, 1]).unwrap(), (0, 4.0));
        assert_eq!(select_best_port(&[1.0, INFINITE], &[0, 1]).unwrap(), (1, INFINITE));
        assert_eq!(select_best_port(&[9.0, 1.0, 2.0], &[1, 2]).unwrap(), (2, 2.0));
        assert!(select_best_port(&[1.0], &[]).is_err());
        assert!(select_best_port(&[1.0], &[3]).is_err());
    }

    #[test]
    fn hand_sir_example() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h1 = ComplexVector::from_real(&[1.0, 0.0]).unwrap();
        let h2 = ComplexVector::from_real(&[s, s]).unwrap();
        let p = precoders(Scheme::Mrt, &ComplexMatrix::from_columns(&[h1.clone(), h2]).unwrap()).unwrap();
        let x = sir_at(h1.as_slice(), &p, &[1.0, 1.0], 0);
        assert_abs_diff_eq!(x, 2.0, epsilon = 1e-14);
        let scaled = sir_at(h1.as_slice(), &p, &[3.5, 3.5], 0);
        assert!((scaled - x).abs() <= 1e-12 * x);
    }

    #[test]
    fn zf_reference_port_is_infinite() {
        let cfg = SystemConfig {
            scheme: Scheme::Zf,
            reference_mode: Some(ReferenceMode::Member),
            ..SystemConfig::default()
        };
        let geom = PortGeometry::for_config(&cfg).unwrap();
        let batch = simulate_sir_batch(&cfg, &geom, &mut RngStream::new(5, 0), 50).unwrap();
        for r in 0..batch.len() {
            assert_eq!(batch.row(r)[0], INFINITE);
            assert!(batch.row(r)[1].is_finite());
            assert_eq!(batch.selected(r), (0, INFINITE));
        }
        assert_eq!(batch.infinite, 50);
    }

    #[test]
    fn single_user_is_infinite_everywhere() {
        let h = ComplexVector::from_real(&[1.0, 2.0]).unwrap();
        let p = precoders(Scheme::Mrt, &ComplexMatrix::from_columns(&[h.clone()]).unwrap()).unwrap();
        assert_eq!(sir_at(h.as_slice(), &p, &[1.0], 0), INFINITE);
    }

    #[test]
    fn pearson_basics() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(pearson_correlation(&x, &x).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pearson_correlation(&x, &neg).unwrap(), -1.0, epsilon = 1e-12);
        assert!(pearson_correlation(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson_correlation(&[1.0], &[1.0]).is_err());
        let mut with_inf = x.clone();
        with_inf[3] = INFINITE;
        let mut acc = CoMoments::default();
        for (a, b) in with_inf.iter().zip(&x) {
            acc.push(*a, *b);
        }
        assert_eq!(acc.dropped(), 1);
        assert_eq!(acc.count(), 99);
    }

    #[test]
    fn comoment_merge_matches_single_pass() {
        let x: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64).collect();
        let y: Vec<f64> = (0..1000).map(|i| ((i * 53) % 89) as f64 + x[i] * 0.3).collect();
        let mut whole = CoMoments::default();
        for i in 0..1000 {
            whole.push(x[i], y[i]);
        }
        let mut merged = CoMoments::default();
        for chunk in (0..1000).collect::<Vec<_>>().chunks(77) {
            let mut part = CoMoments::default();
            for &i in chunk {
                part.push(x[i], y[i]);
            }
            merged.merge(&part);
        }
        assert_abs_diff_eq!(
            whole.correlation().unwrap(),
            merged.correlation().unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn empirical_cdf_counts() {
        let mut e = EmpiricalCdf::new(vec![1.0, 2.0, 3.0]).unwrap();
        for x in [0.5, 1.0, 2.5, 7.0, INFINITE] {
            e.push(x);
        }
        assert_eq!(e.counts(), vec![2, 2, 3]);
        assert_eq!(e.n(), 5);
        assert!(EmpiricalCdf::new(vec![1.0, 1.0]).is_err());
        let g = EmpiricalCdf::default_grid();
        assert_eq!(g.len(), 200);
        assert_eq!((g[0], g[199]), (1e-3, 1e3));
    }

    #[test]
    fn chunk_runner_preserves_order() {
        let out = run_chunked(10, &ExecOptions { workers: 3, chunk_size: 3 }, |c, n| Ok((c, n))).unwrap();
        assert_eq!(out, vec![(0, 3), (1, 3), (2, 3), (3, 1)]);
    }

    #[test]
    fn surrogate_shares_one_component() {
        let mut s = RngStream::new(11, 0);
        let g = surrogate_gain_sample(&mut s, &[0.0, 0.0], 3, 2).unwrap();
        assert!(g.iter().all(|v| *v > 0.0));
        let mut s = RngStream::new(11, 0);
        let _shared = sample_gamma_int(&mut s, 3).unwrap();
        let first = sample_gamma_int(&mut s, 2).unwrap();
        assert_eq!(g[0], first);
    }

    #[test]
    fn hermitian_projection_is_conjugate_linear() {
        let h = [Complex64::new(0.0, 1.0)];
        let w = [Complex64::new(1.0, 0.0)];
        assert_eq!(dot_h(&h, &w), Complex64::new(0.0, -1.0));
    }
}
