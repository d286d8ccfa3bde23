//! Per-link channel statistics: Gamma-approximated lognormal shadowing,
//! Nakagami-m fading power and the Generalized-K law of the interference
//! power contributed by a single base station.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::specfun::{bessel_k_scaled, ln_gamma};

/// dB-to-neper conversion constant used by the lognormal-to-Gamma mapping.
pub const DB_PER_NEPER: f64 = 8.686;

/// Gamma approximation of lognormal shadowing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowingParams {
    pub sigma_db: f64,
    /// Gamma shape `λ = 1/(exp((σ/8.686)²) − 1)`.
    pub lambda_sh: f64,
    /// `Ω = P_r √((λ+1)/λ)`.
    pub omega: f64,
    pub p_r: f64,
}

impl ShadowingParams {
    pub fn from_sigma_db(sigma_db: f64, p_r: f64) -> Result<Self> {
        if !(sigma_db > 0.0 && sigma_db <= 20.0) {
            return Err(Error::domain(
                "shadowing spread",
                sigma_db,
                "0 < sigma_dB <= 20",
            ));
        }
        if !(p_r > 0.0 && p_r.is_finite()) {
            return Err(Error::domain("received power anchor", p_r, "p_r > 0"));
        }
        let lambda_sh = 1.0 / (((sigma_db / DB_PER_NEPER).powi(2)).exp() - 1.0);
        let omega = p_r * ((lambda_sh + 1.0) / lambda_sh).sqrt();
        Ok(Self {
            sigma_db,
            lambda_sh,
            omega,
            p_r,
        })
    }

    /// Same shape, but with `Ω = P_r` so the shadow factor has mean `P_r`.
    ///
    /// Only meant for sensitivity probes against the default mapping.
    pub fn mean_matched(sigma_db: f64, p_r: f64) -> Result<Self> {
        let mut sp = Self::from_sigma_db(sigma_db, p_r)?;
        sp.omega = p_r;
        Ok(sp)
    }

    /// Gamma scale `Ω/λ` of the shadow factor.
    pub fn scale(&self) -> f64 {
        self.omega / self.lambda_sh
    }
}

/// Gamma shadowing density `(λ/Ω)^λ x^{λ−1} e^{−λx/Ω} / Γ(λ)`.
pub fn gamma_shadow_pdf(x: f64, sp: &ShadowingParams) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("gamma_shadow_pdf", x, "x > 0"));
    }
    let l = sp.lambda_sh;
    let rate = l / sp.omega;
    let ln = l * rate.ln() + (l - 1.0) * x.ln() - rate * x - ln_gamma(l)?;
    Ok(ln.exp())
}

/// Interferer field and link parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// Base-station density (m⁻²).
    pub lambda_bs: f64,
    /// Path-loss exponent.
    pub sigma_r: f64,
    pub n_t: u32,
    pub n_r: u32,
    /// Nakagami shape.
    pub m: f64,
    /// Per-antenna transmit power.
    pub p_ant: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            lambda_bs: 1.0 / (std::f64::consts::PI * 500.0 * 500.0),
            sigma_r: 4.0,
            n_t: 4,
            n_r: 2,
            m: 1.0,
            p_ant: 1.0,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_bs > 0.0 && self.lambda_bs.is_finite()) {
            return Err(Error::invalid(
                "lambda_bs",
                self.lambda_bs,
                "must be positive",
            ));
        }
        if !(self.sigma_r >= 2.0 && self.sigma_r.is_finite()) {
            return Err(Error::invalid(
                "sigma_r",
                self.sigma_r,
                "must be at least 2",
            ));
        }
        if self.n_t == 0 {
            return Err(Error::invalid("n_t", self.n_t, "must be at least 1"));
        }
        if self.n_r == 0 {
            return Err(Error::invalid("n_r", self.n_r, "must be at least 1"));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::invalid("m", self.m, "must be positive"));
        }
        if !(self.p_ant > 0.0 && self.p_ant.is_finite()) {
            return Err(Error::invalid("p_ant", self.p_ant, "must be positive"));
        }
        Ok(())
    }

    /// Characteristic exponent `2/σ_r`.
    pub fn alpha(&self) -> f64 {
        2.0 / self.sigma_r
    }

    /// Shape `N_t N_r m` of the summed fading power.
    pub fn fading_shape(&self) -> f64 {
        (self.n_t * self.n_r) as f64 * self.m
    }
}

/// Generalized-K density of `I_b = P_ant w Σ|z|²`, the unfaded-by-distance
/// interference power from one base station.
pub fn generalized_k_pdf(y: f64, np: &NetworkParams, sp: &ShadowingParams) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain("generalized_k_pdf", y, "y > 0"));
    }
    np.validate()?;
    let k = np.fading_shape();
    let l = sp.lambda_sh;
    let rate = np.m * l / sp.omega;
    let u = y / np.p_ant;
    let arg = 2.0 * (rate * u).sqrt();
    let kv = bessel_k_scaled(l - k, arg)?;
    let ln = std::f64::consts::LN_2 + 0.5 * (k + l) * rate.ln() - ln_gamma(k)? - ln_gamma(l)?
        + 0.5 * (k + l - 2.0) * u.ln()
        + kv.ln()
        - arg;
    Ok(ln.exp() / np.p_ant)
}

/// Mean of the Generalized-K law, `P_ant N_t N_r Ω`.
pub fn generalized_k_mean(np: &NetworkParams, sp: &ShadowingParams) -> f64 {
    np.p_ant * (np.n_t * np.n_r) as f64 * sp.omega
}

/// CDF of the Generalized-K density, tabulated by integrating the density
/// over a logarithmic grid and interpolated in `ln y`.
#[derive(Debug, Clone)]
pub struct GeneralizedKCdf {
    ln_y: Vec<f64>,
    cdf: Vec<f64>,
}

impl GeneralizedKCdf {
    const NODES: usize = 600;

    pub fn new(np: &NetworkParams, sp: &ShadowingParams) -> Result<Self> {
        let mean = generalized_k_mean(np, sp);
        let lo = (mean * 1e-9).ln();
        let hi = (mean * 1e4).ln();
        let pdf = |y: f64| generalized_k_pdf(y, np, sp).unwrap_or(0.0);
        let tol = Tolerance::new(1e-14, 1e-10);
        let first = lo.exp();
        let mut acc = quad::integrate(pdf, 0.0, first, tol)?.value;
        let mut ln_y = Vec::with_capacity(Self::NODES);
        let mut cdf = Vec::with_capacity(Self::NODES);
        ln_y.push(lo);
        cdf.push(acc);
        let step = (hi - lo) / (Self::NODES - 1) as f64;
        for i in 1..Self::NODES {
            let a = (lo + (i - 1) as f64 * step).exp();
            let b = (lo + i as f64 * step).exp();
            acc += quad::integrate(pdf, a, b, tol)?.value;
            ln_y.push(lo + i as f64 * step);
            cdf.push(acc.min(1.0));
        }
        Ok(Self { ln_y, cdf })
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return 0.0;
        }
        let t = y.ln();
        let n = self.ln_y.len();
        if t <= self.ln_y[0] {
            return self.cdf[0] * (t - self.ln_y[0]).exp();
        }
        if t >= self.ln_y[n - 1] {
            return self.cdf[n - 1];
        }
        let step = self.ln_y[1] - self.ln_y[0];
        let i = (((t - self.ln_y[0]) / step) as usize).min(n - 2);
        let w = (t - self.ln_y[i]) / step;
        self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Total mass captured by the table (should be 1 up to quadrature error).
    pub fn total(&self) -> f64 {
        *self.cdf.last().expect("non-empty table")
    }
}

/// Nakagami-m fading power: Gamma with shape `m` and unit mean.
pub fn sample_nakagami_power<R: Rng + ?Sized>(m: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(m, 1.0 / m).map_err(|_| Error::invalid("m", m, "must be positive"))?;
    Ok(g.sample(rng))
}

/// Sampler for the single-BS interference power `P_ant w Σ_{i,j} g_{ij}`.
///
/// The `N_t N_r` i.i.d. Gamma(m, 1/m) fading powers are drawn as their sum,
/// one Gamma(N_t N_r m, 1/m) variate, which has the same law.
#[derive(Debug, Clone, Copy)]
pub struct InterfererPowerSampler {
    fading: Gamma<f64>,
    shadow: Gamma<f64>,
    p_ant: f64,
}

impl InterfererPowerSampler {
    pub fn new(np: &NetworkParams, sp: &ShadowingParams) -> Result<Self> {
        np.validate()?;
        let k = np.fading_shape();
        let fading =
            Gamma::new(k, 1.0 / np.m).map_err(|_| Error::invalid("m", np.m, "must be positive"))?;
        let shadow = Gamma::new(sp.lambda_sh, sp.scale())
            .map_err(|_| Error::invalid("sigma_db", sp.sigma_db, "invalid shadow shape"))?;
        Ok(Self {
            fading,
            shadow,
            p_ant: np.p_ant,
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.p_ant * self.shadow.sample(rng) * self.fading.sample(rng)
    }
}

/// One draw of the single-BS interference power.
pub fn sample_interferer_power<R: Rng + ?Sized>(
    np: &NetworkParams,
    sp: &ShadowingParams,
    rng: &mut R,
) -> Result<f64> {
    Ok(InterfererPowerSampler::new(np, sp)?.sample(rng))
}
