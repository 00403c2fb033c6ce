//! Fluid-antenna geometry, port correlation and correlated channel draws.
//!
//! Distances are in carrier wavelengths. Every port channel is built from a
//! shared reference vector `x0` and a private innovation `x_k`:
//!
//! ```text
//! h_1 = √β · x0
//! h_k = √β · (μ_k x0 + √(1 − μ_k²) x_k),   μ_k = J0(2π d_k)
//! ```
//!
//! Two non-reference ports `k, ℓ` are therefore correlated by `μ_k μ_ℓ`, not
//! by the Jakes kernel `J0(2π|d_k − d_ℓ|)` returned by [`correlation_matrix`].
//! The two agree only for pairs that involve the reference location. The
//! simulator uses the constructive model; the kernel is exposed for comparison.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{FamaError, Result};
use crate::randlin::{ComplexMatrix, ComplexVector, RngStream};
use crate::specialfn::bessel_j0;

/// Linear precoding scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Mrt,
    Zf,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Mrt => "MRT",
            Scheme::Zf => "ZF",
        }
    }

    /// Reference handling used when none is configured.
    pub fn default_reference_mode(self) -> ReferenceMode {
        match self {
            Scheme::Mrt => ReferenceMode::Member,
            Scheme::Zf => ReferenceMode::External,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = FamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MRT" => Ok(Scheme::Mrt),
            "ZF" => Ok(Scheme::Zf),
            other => Err(FamaError::config("scheme", format!("expected MRT or ZF, got `{other}`"))),
        }
    }
}

/// Where the CSI reference location sits relative to the selectable ports.
///
/// * `Member`: the reference is selectable port 1 of `N`.
/// * `External`: the reference sits at `d = 0` and the `N` selectable ports
///   occupy the following locations, so the layout has `N + 1` locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceMode {
    Member,
    External,
}

impl ReferenceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceMode::Member => "member",
            ReferenceMode::External => "external",
        }
    }
}

impl fmt::Display for ReferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReferenceMode {
    type Err = FamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "member" => Ok(ReferenceMode::Member),
            "external" => Ok(ReferenceMode::External),
            other => Err(FamaError::config(
                "reference_mode",
                format!("expected member or external, got `{other}`"),
            )),
        }
    }
}

/// All scenario parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Base-station antennas.
    pub m: usize,
    /// Users.
    pub u: usize,
    /// Selectable ports per user.
    pub n: usize,
    /// Aperture length in wavelengths.
    pub w: f64,
    pub scheme: Scheme,
    /// Large-scale gains `β_u`, one per user.
    pub beta: Vec<f64>,
    /// Transmit powers `P_u`, one per user.
    pub powers: Vec<f64>,
    /// `None` picks the scheme default.
    pub reference_mode: Option<ReferenceMode>,
    /// Member mode only: whether port 1 takes part in selection.
    pub include_reference_in_selection: bool,
    pub seed: u64,
    pub realizations: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            m: 8,
            u: 4,
            n: 8,
            w: 0.25,
            scheme: Scheme::Mrt,
            beta: vec![1.0; 4],
            powers: vec![1.0; 4],
            reference_mode: None,
            include_reference_in_selection: true,
            seed: 1,
            realizations: 100_000,
        }
    }
}

impl SystemConfig {
    /// Defaults with the given dimensions and unit gains and powers.
    pub fn new(scheme: Scheme, m: usize, u: usize, n: usize, w: f64) -> Result<Self> {
        let cfg = SystemConfig {
            m,
            u,
            n,
            w,
            scheme,
            beta: vec![1.0; u],
            powers: vec![1.0; u],
            ..SystemConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(FamaError::config("M", "must be at least 1"));
        }
        if self.u < 2 {
            return Err(FamaError::config("U", "must be at least 2 so that L = U - 1 >= 1"));
        }
        if self.n == 0 {
            return Err(FamaError::config("N", "must be at least 1"));
        }
        if !(self.w.is_finite() && self.w >= 0.0) {
            return Err(FamaError::config("W", "must be a finite nonnegative length"));
        }
        if self.scheme == Scheme::Zf && self.m < self.u {
            return Err(FamaError::config(
                "M",
                format!("ZF requires M >= U (M = {}, U = {})", self.m, self.u),
            ));
        }
        for (key, values) in [("beta", &self.beta), ("powers", &self.powers)] {
            if values.len() != self.u {
                return Err(FamaError::config(
                    key,
                    format!("expected {} entries, got {}", self.u, values.len()),
                ));
            }
            if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(FamaError::config(key, "entries must be positive and finite"));
            }
        }
        if self.realizations == 0 {
            return Err(FamaError::config("realizations", "must be positive"));
        }
        Ok(())
    }

    pub fn l(&self) -> usize {
        self.u - 1
    }

    pub fn reference_mode(&self) -> ReferenceMode {
        self.reference_mode
            .unwrap_or_else(|| self.scheme.default_reference_mode())
    }

    /// Number of physical locations, reference included.
    pub fn locations(&self) -> usize {
        match self.reference_mode() {
            ReferenceMode::Member => self.n,
            ReferenceMode::External => self.n + 1,
        }
    }

    /// Zero-based location indices that take part in port selection.
    pub fn selection_set(&self) -> Vec<usize> {
        match self.reference_mode() {
            ReferenceMode::Member if self.include_reference_in_selection || self.n == 1 => {
                (0..self.n).collect()
            }
            ReferenceMode::Member => (1..self.n).collect(),
            ReferenceMode::External => (1..=self.n).collect(),
        }
    }

    /// Resets gains and powers to one per user; call after changing `u`.
    pub fn reset_gains(&mut self) {
        self.beta = vec![1.0; self.u];
        self.powers = vec![1.0; self.u];
    }
}

/// `d_k = (k − 1)/(N − 1) · W`; a single port sits at 0.
pub fn port_displacements(n: usize, w: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(FamaError::domain("port_displacements", "N must be at least 1"));
    }
    if !(w.is_finite() && w >= 0.0) {
        return Err(FamaError::domain("port_displacements", "W must be finite and nonnegative"));
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let step = w / (n - 1) as f64;
    Ok((0..n)
        .map(|k| if k == n - 1 { w } else { k as f64 * step })
        .collect())
}

/// `μ_k = J0(2π |d_k − d_1|)`, with `μ_1 = 1` exactly.
pub fn mu_vector(displacements: &[f64]) -> Result<Vec<f64>> {
    let Some(&d1) = displacements.first() else {
        return Err(FamaError::domain("mu_vector", "no displacements"));
    };
    displacements
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            if k == 0 {
                Ok(1.0)
            } else {
                bessel_j0(2.0 * std::f64::consts::PI * (d - d1).abs())
            }
        })
        .collect()
}

/// Jakes kernel `J0(2π|d_k − d_ℓ|)` with `β` factored out.
pub fn correlation_matrix(displacements: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = displacements.len();
    let mut out = vec![vec![1.0; n]; n];
    for k in 0..n {
        for l in k + 1..n {
            let v = bessel_j0(2.0 * std::f64::consts::PI * (displacements[k] - displacements[l]).abs())?;
            out[k][l] = v;
            out[l][k] = v;
        }
    }
    Ok(out)
}

/// Port locations and their correlation with the reference location.
#[derive(Debug, Clone, PartialEq)]
pub struct PortGeometry {
    displacements: Vec<f64>,
    mu: Vec<f64>,
}

impl PortGeometry {
    /// `n` uniformly spaced locations over an aperture of `w` wavelengths.
    pub fn uniform(n: usize, w: f64) -> Result<Self> {
        let displacements = port_displacements(n, w)?;
        let mu = mu_vector(&displacements)?;
        Ok(PortGeometry { displacements, mu })
    }

    /// Layout implied by the configuration and its reference mode.
    pub fn for_config(config: &SystemConfig) -> Result<Self> {
        Self::uniform(config.locations(), config.w)
    }

    pub fn len(&self) -> usize {
        self.displacements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.displacements.is_empty()
    }

    pub fn displacements(&self) -> &[f64] {
        &self.displacements
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn correlation_matrix(&self) -> Result<Vec<Vec<f64>>> {
        correlation_matrix(&self.displacements)
    }
}

/// One draw of every user's per-location channels.
///
/// Storage is flat: location `k` of user `u` occupies
/// `[(u·K + k)·M, (u·K + k + 1)·M)` with `K` locations.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    m: usize,
    users: usize,
    locations: usize,
    reference: Vec<Complex64>,
    innovations: Vec<Complex64>,
    ports: Vec<Complex64>,
}

impl ChannelSet {
    pub fn zeros(m: usize, users: usize, locations: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        ChannelSet {
            m,
            users,
            locations,
            reference: vec![z; users * m],
            innovations: vec![z; users * locations.saturating_sub(1) * m],
            ports: vec![z; users * locations * m],
        }
    }

    pub fn antennas(&self) -> usize {
        self.m
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn locations(&self) -> usize {
        self.locations
    }

    /// `x_{u,0}`.
    pub fn reference(&self, user: usize) -> &[Complex64] {
        &self.reference[user * self.m..(user + 1) * self.m]
    }

    /// `x_{u,k}` for zero-based location `k ≥ 1`.
    pub fn innovation(&self, user: usize, location: usize) -> &[Complex64] {
        assert!(location >= 1, "the reference location has no innovation");
        let start = (user * (self.locations - 1) + location - 1) * self.m;
        &self.innovations[start..start + self.m]
    }

    /// `h_{u,k}` for zero-based location `k`.
    pub fn port(&self, user: usize, location: usize) -> &[Complex64] {
        let start = (user * self.locations + location) * self.m;
        &self.ports[start..start + self.m]
    }

    pub fn port_vector(&self, user: usize, location: usize) -> ComplexVector {
        ComplexVector::from_vec_unchecked(self.port(user, location).to_vec())
    }

    /// `H_1`: the reference-location channels as columns.
    pub fn reference_matrix(&self) -> ComplexMatrix {
        let cols: Vec<ComplexVector> = (0..self.users).map(|u| self.port_vector(u, 0)).collect();
        ComplexMatrix::from_columns(&cols).expect("users >= 1 and equal lengths")
    }

    /// Redraws every vector in place from `stream`.
    ///
    /// Draw order per user: `x0`, then `x_k` for locations `2..K`.
    pub fn resample(&mut self, stream: &mut RngStream, geometry: &PortGeometry, beta: &[f64]) {
        let (m, k_total) = (self.m, self.locations);
        debug_assert_eq!(geometry.len(), k_total);
        debug_assert_eq!(beta.len(), self.users);
        let mu = geometry.mu();
        for u in 0..self.users {
            let sb = beta[u].sqrt();
            for i in 0..m {
                self.reference[u * m + i] = stream.complex_gaussian();
            }
            for k in 1..k_total {
                let start = (u * (k_total - 1) + k - 1) * m;
                for i in 0..m {
                    self.innovations[start + i] = stream.complex_gaussian();
                }
            }
            for k in 0..k_total {
                let out = (u * k_total + k) * m;
                if k == 0 {
                    for i in 0..m {
                        self.ports[out + i] = self.reference[u * m + i] * sb;
                    }
                } else {
                    let a = mu[k];
                    let c = (1.0 - a * a).max(0.0).sqrt();
                    let inn = (u * (k_total - 1) + k - 1) * m;
                    for i in 0..m {
                        self.ports[out + i] =
                            (self.reference[u * m + i] * a + self.innovations[inn + i] * c) * sb;
                    }
                }
            }
        }
    }
}

/// Draws one independent channel set for all users.
pub fn generate_channel_set(
    stream: &mut RngStream,
    config: &SystemConfig,
    geometry: &PortGeometry,
) -> Result<ChannelSet> {
    config.validate()?;
    if geometry.len() != config.locations() {
        return Err(FamaError::domain(
            "generate_channel_set",
            format!(
                "geometry has {} locations, configuration needs {}",
                geometry.len(),
                config.locations()
            ),
        ));
    }
    let mut set = ChannelSet::zeros(config.m, config.u, geometry.len());
    set.resample(stream, geometry, &config.beta);
    Ok(set)
}
