//! Closed-form per-port SIR statistics.
//!
//! Under either precoder the per-port SIR is modelled as Beta-prime with
//! shapes `a = M_eff` (signal dimension) and `b = L = U − 1` (interferers):
//!
//! ```text
//! F(γ) = I_{γ/(1+γ)}(a, b)
//!      = 1 − (1+γ)^{−(a+b−1)} Σ_{j<a} C(a+b−1, j) γ^j
//! ```
//!
//! From `F` follow the selection-outage envelope, the port-correlation
//! approximations and the small- and large-SIR asymptotes.

use crate::channel::Scheme;
use crate::error::{FamaError, Result};
use crate::specialfn::{
    ln_beta, ln_binomial, ln_gamma, ln_reg_inc_beta_split, reg_inc_beta_split,
};

/// Shape pair `(a, b) = (M_eff, L)` of the Beta-prime law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BetaPrimeParams {
    a: u32,
    b: u32,
}

impl BetaPrimeParams {
    pub fn new(a: u32, b: u32) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(FamaError::domain("BetaPrimeParams::new", "shapes must be at least 1"));
        }
        Ok(BetaPrimeParams { a, b })
    }

    /// Accepts real shapes only if they are whole numbers.
    pub fn from_real(a: f64, b: f64) -> Result<Self> {
        let whole = |x: f64| x.is_finite() && x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64;
        if !whole(a) || !whole(b) {
            return Err(FamaError::domain(
                "BetaPrimeParams::from_real",
                format!("shapes must be positive integers, got ({a}, {b})"),
            ));
        }
        Self::new(a as u32, b as u32)
    }

    /// `(M_eff, U − 1)` for the given scheme and dimensions.
    pub fn for_scheme(scheme: Scheme, m: usize, u: usize) -> Result<Self> {
        if u < 2 {
            return Err(FamaError::domain("BetaPrimeParams::for_scheme", "need U >= 2"));
        }
        Self::new(m_eff(scheme, m, u)? as u32, (u - 1) as u32)
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    fn af(&self) -> f64 {
        self.a as f64
    }

    fn bf(&self) -> f64 {
        self.b as f64
    }
}

/// Effective signal dimension: `M` for MRT, `M − U + 1` for ZF.
pub fn m_eff(scheme: Scheme, m: usize, u: usize) -> Result<usize> {
    if m == 0 || u == 0 {
        return Err(FamaError::domain("m_eff", "M and U must be positive"));
    }
    match scheme {
        Scheme::Mrt => Ok(m),
        Scheme::Zf if m >= u => Ok(m - u + 1),
        Scheme::Zf => Err(FamaError::domain("m_eff", format!("ZF requires M >= U, got M={m}, U={u}"))),
    }
}

/// Small-SIR outage slope `M_eff · N`.
pub fn diversity_orders(scheme: Scheme, m: usize, u: usize, n: usize) -> Result<usize> {
    Ok(m_eff(scheme, m, u)? * n)
}

fn check_gamma(op: &'static str, gamma: f64) -> Result<()> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(FamaError::domain(op, format!("threshold must be nonnegative, got {gamma}")));
    }
    Ok(())
}

/// `x^{a−1} (1+x)^{−(a+b)} / B(a, b)`.
pub fn betaprime_pdf(x: f64, p: BetaPrimeParams) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(FamaError::domain("betaprime_pdf", format!("x must be nonnegative, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let ln_b = ln_beta(p.af(), p.bf())?;
    if x == 0.0 {
        return Ok(if p.a == 1 { (-ln_b).exp() } else { 0.0 });
    }
    Ok(((p.af() - 1.0) * x.ln() - (p.af() + p.bf()) * x.ln_1p() - ln_b).exp())
}

/// `F(γ) = I_{γ/(1+γ)}(a, b)`.
pub fn betaprime_cdf(gamma: f64, p: BetaPrimeParams) -> Result<f64> {
    check_gamma("betaprime_cdf", gamma)?;
    if gamma.is_infinite() {
        return Ok(1.0);
    }
    reg_inc_beta_split(gamma / (1.0 + gamma), 1.0 / (1.0 + gamma), p.af(), p.bf())
}

/// `1 − F(γ) = I_{1/(1+γ)}(b, a)`, accurate in the upper tail.
pub fn betaprime_sf(gamma: f64, p: BetaPrimeParams) -> Result<f64> {
    check_gamma("betaprime_sf", gamma)?;
    if gamma.is_infinite() {
        return Ok(0.0);
    }
    reg_inc_beta_split(1.0 / (1.0 + gamma), gamma / (1.0 + gamma), p.bf(), p.af())
}

/// `ln F(γ)`, finite where `F` underflows.
pub fn ln_betaprime_cdf(gamma: f64, p: BetaPrimeParams) -> Result<f64> {
    check_gamma("ln_betaprime_cdf", gamma)?;
    if gamma.is_infinite() {
        return Ok(0.0);
    }
    ln_reg_inc_beta_split(gamma / (1.0 + gamma), 1.0 / (1.0 + gamma), p.af(), p.bf())
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Binomial finite-sum form of `F`, with every term built in log space.
///
/// Both partial sums are formed. The smaller of `Σ_{j≥a}` and `Σ_{j<a}` is
/// the accurate one, so `F` is returned either directly or as a complement.
pub fn betaprime_cdf_finite_sum(gamma: f64, p: BetaPrimeParams) -> Result<f64> {
    check_gamma("betaprime_cdf_finite_sum", gamma)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    if gamma.is_infinite() {
        return Ok(1.0);
    }
    let n = (p.a + p.b - 1) as u64;
    let (ln_g, ln_1g) = (gamma.ln(), gamma.ln_1p());
    let terms: Vec<f64> = (0..=n)
        .map(|j| Ok(ln_binomial(n, j as i64)? + j as f64 * ln_g - n as f64 * ln_1g))
        .collect::<Result<_>>()?;
    let (lower, upper) = terms.split_at(p.a as usize);
    let ln_upper = log_sum_exp(upper);
    let ln_lower = log_sum_exp(lower);
    let f = if ln_upper <= ln_lower {
        ln_upper.exp()
    } else {
        1.0 - ln_lower.exp()
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Approximate correlation of the desired-gain proxies at ports `k, ℓ`:
/// `μ_k² μ_ℓ² · M_eff / (M_eff + L)`.
///
/// Meant for distinct ports; at `k = ℓ` it does not return 1.
pub fn rho_u_approx(mu_k: f64, mu_l: f64, m_eff: u32, l: u32) -> f64 {
    let (m, l) = (m_eff as f64, l as f64);
    mu_k * mu_k * mu_l * mu_l * m / (m + l)
}

/// Approximate cross-port SIR correlation: [`rho_u_approx`] scaled by
/// `L / (L + M_eff + 1)`.
///
/// Like [`rho_u_approx`] it targets distinct ports only.
pub fn rho_x_approx(mu_k: f64, mu_l: f64, m_eff: u32, l: u32) -> f64 {
    let (m, lf) = (m_eff as f64, l as f64);
    rho_u_approx(mu_k, mu_l, m_eff, l) * lf / (lf + m + 1.0)
}

/// Selection-outage quantities at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEnvelope {
    pub gamma: f64,
    /// Single-port CDF `F(γ)`.
    pub single_port: f64,
    /// Upper bound: equal to `F`.
    pub upper: f64,
    /// Lower bound `max(0, 1 − N(1 − F))`.
    pub lower: f64,
    /// Independent-port benchmark `F^N`.
    pub iid_benchmark: f64,
    /// `exp(−N(1 − F))`.
    pub large_n_approx: f64,
    /// `N(1 − F)`; the large-N approximation is meaningful when this is small.
    pub n_epsilon: f64,
}

impl OutageEnvelope {
    /// Envelope from `F` and its complement `ε = 1 − F`, given separately for accuracy.
    pub fn from_parts(gamma: f64, f: f64, eps: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(FamaError::domain("outage_envelope", "N must be at least 1"));
        }
        if !(0.0..=1.0).contains(&f) || !(0.0..=1.0).contains(&eps) {
            return Err(FamaError::domain("outage_envelope", "F and 1-F must lie in [0, 1]"));
        }
        let nf = n as f64;
        let (lower, iid) = if n == 1 {
            (f, f)
        } else {
            ((1.0 - nf * eps).max(0.0), (nf * (-eps).ln_1p()).exp())
        };
        Ok(OutageEnvelope {
            gamma,
            single_port: f,
            upper: f,
            lower,
            iid_benchmark: iid,
            large_n_approx: (-nf * eps).exp(),
            n_epsilon: nf * eps,
        })
    }

    pub fn from_single_port(gamma: f64, f: f64, n: usize) -> Result<Self> {
        Self::from_parts(gamma, f, 1.0 - f, n)
    }

    /// True when `N ε ≤ 0.1`.
    pub fn large_n_in_regime(&self) -> bool {
        self.n_epsilon <= 0.1
    }
}

/// Envelope for the Beta-prime law with `N` selectable ports.
pub fn outage_envelope(gamma: f64, p: BetaPrimeParams, n: usize) -> Result<OutageEnvelope> {
    let f = betaprime_cdf(gamma, p)?;
    let eps = betaprime_sf(gamma, p)?;
    OutageEnvelope::from_parts(gamma, f, eps, n)
}

/// `Γ(L + M_eff) / (Γ(L) Γ(M_eff + 1))`.
pub fn small_gamma_prefactor(p: BetaPrimeParams) -> Result<f64> {
    Ok(ln_small_gamma_prefactor(p)?.exp())
}

fn ln_small_gamma_prefactor(p: BetaPrimeParams) -> Result<f64> {
    Ok(ln_gamma(p.bf() + p.af())? - ln_gamma(p.bf())? - ln_gamma(p.af() + 1.0)?)
}

fn check_positive(op: &'static str, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(FamaError::domain(op, format!("threshold must be positive and finite, got {gamma}")));
    }
    Ok(())
}

/// Leading small-SIR term `C γ^{M_eff}`.
pub fn asymptote_small_gamma(gamma: f64, scheme: Scheme, m: usize, u: usize) -> Result<f64> {
    check_positive("asymptote_small_gamma", gamma)?;
    let p = BetaPrimeParams::for_scheme(scheme, m, u)?;
    Ok((ln_small_gamma_prefactor(p)? + p.af() * gamma.ln()).exp())
}

/// Large-array form `M_eff^{L−1} / Γ(L) · γ^{M_eff}`, valid for `γ < 1`.
pub fn asymptote_large_m(gamma: f64, scheme: Scheme, m: usize, u: usize) -> Result<f64> {
    check_positive("asymptote_large_m", gamma)?;
    if gamma >= 1.0 {
        return Err(FamaError::domain("asymptote_large_m", "expansion needs gamma < 1"));
    }
    let p = BetaPrimeParams::for_scheme(scheme, m, u)?;
    let ln = (p.bf() - 1.0) * p.af().ln() - ln_gamma(p.bf())? + p.af() * gamma.ln();
    Ok(ln.exp())
}

/// Upper-tail term `γ^{−b} / (b B(a, b))` approximating `1 − F(γ)`.
pub fn asymptote_tail(gamma: f64, p: BetaPrimeParams) -> Result<f64> {
    check_positive("asymptote_tail", gamma)?;
    Ok((-p.bf() * gamma.ln() - p.bf().ln() - ln_beta(p.af(), p.bf())?).exp())
}
