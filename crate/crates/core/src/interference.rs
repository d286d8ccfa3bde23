//! Aggregate co-channel interference from a Poisson field of base stations.
//!
//! The aggregate power follows a totally skewed alpha-stable law with
//! exponent `α = 2/σ_r`; for `σ_r = 4` it reduces to the Lévy distribution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{NetworkParams, ShadowingParams};
use crate::curve::CurveData;
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::specfun::{factorial, gamma, ln_gamma};

/// `q(α) = π Γ(2−α) cos(πα/2) / (1−α)`, with the limit `π²/2` at `α = 1`.
pub fn q_factor(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("q_factor", alpha, "0 < alpha <= 1"));
    }
    if alpha == 1.0 {
        return Ok(PI * PI / 2.0);
    }
    // cos(πα/2) = sin(π(1−α)/2) avoids cancellation as α → 1
    let eps = 1.0 - alpha;
    Ok(PI * gamma(2.0 - alpha)? * (PI * eps / 2.0).sin() / eps)
}

/// Parameters of the aggregate-interference stable law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    pub alpha: f64,
    /// Scale `c`.
    pub c: f64,
    /// `γ = c^α`; for `α = 1/2` this is the Lévy parameter.
    pub gamma: f64,
}

impl StableParams {
    pub fn from_gamma(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain("stable exponent", alpha, "0 < alpha < 1"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::domain("stable gamma", gamma, "gamma > 0"));
        }
        Ok(Self {
            alpha,
            c: gamma.powf(1.0 / alpha),
            gamma,
        })
    }

    /// The Lévy law with parameter `γ` (`α = 1/2`, `c = γ²`).
    pub fn levy(gamma_levy: f64) -> Result<Self> {
        Self::from_gamma(0.5, gamma_levy)
    }
}

/// Fractional moment `E[I_b^α]` of the Generalized-K single-BS power.
pub fn fractional_moment(alpha: f64, np: &NetworkParams, sp: &ShadowingParams) -> Result<f64> {
    let k = np.fading_shape();
    let l = sp.lambda_sh;
    let ln_ratio = ln_gamma(l + alpha)? + ln_gamma(k + alpha)? - ln_gamma(k)? - ln_gamma(l)?;
    Ok((np.m * l / sp.omega).powf(-alpha) * np.p_ant.powf(alpha) * ln_ratio.exp())
}

/// Stable-law parameters of the aggregate interference:
/// `γ = λ_BS q(α) E[I_b^α]`, `c = γ^{1/α}`.
pub fn stable_scale(np: &NetworkParams, sp: &ShadowingParams) -> Result<StableParams> {
    np.validate()?;
    let alpha = np.alpha();
    if !(alpha < 1.0) {
        return Err(Error::domain(
            "stable_scale",
            alpha,
            "0 < alpha < 1 (sigma_r > 2)",
        ));
    }
    let gamma = np.lambda_bs * q_factor(alpha)? * fractional_moment(alpha, np, sp)?;
    StableParams::from_gamma(alpha, gamma)
}

/// Characteristic function `exp(−|cw|^α [1 − i sign(w) tan(πα/2)])`.
pub fn stable_cf(w: f64, stp: &StableParams) -> Complex64 {
    if w == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let mag = (stp.c * w).abs().powf(stp.alpha);
    let skew = w.signum() * (PI * stp.alpha / 2.0).tan();
    (-Complex64::new(mag, -mag * skew)).exp()
}

/// Density of the positive stable law at `y`, by Fourier inversion of
/// [`stable_cf`] with `f(y) = (1/2π) ∫ Φ(w) e^{−iwy} dw`.
///
/// The half-line integral `(1/π) Re ∫₀^∞ Φ(w) e^{−iwy} dw` is moved onto the
/// ray `w = r e^{−iθ}`, where both factors decay exponentially, so no
/// oscillatory tail has to be summed.
pub fn stable_pdf_numeric(y: f64, stp: &StableParams) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain("stable_pdf_numeric", y, "y > 0"));
    }
    let a = stp.alpha;
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain("stable_pdf_numeric", a, "0 < alpha < 1"));
    }
    // the CF factor keeps decaying while α(θ + π/2) < π/2
    let theta = (0.5 * (PI / (2.0 * a) - PI / 2.0)).min(PI / 4.0);
    let dir = Complex64::from_polar(1.0, -theta);
    let skew = Complex64::new(1.0, -(PI * a / 2.0).tan());
    let integrand = |r: f64| {
        if r == 0.0 {
            return dir.re;
        }
        let w = dir * r;
        let z = -(w * stp.c).powf(a) * skew - Complex64::i() * w * y;
        (dir * z.exp()).re
    };
    // widths over which each exponential factor falls by e
    let cf_width = (1.0 / (a * theta).cos().max(1e-3)).powf(1.0 / a) / stp.c;
    let phase_width = 1.0 / (y * theta.sin());
    let scale = cf_width.min(phase_width);
    let est = quad::integrate_positive_axis(integrand, scale, Tolerance::new(1e-300, 1e-10))?;
    Ok((est.value / PI).max(0.0))
}

/// Lévy density `√(γ²/2π) e^{−γ²/2y} y^{−3/2}`.
pub fn levy_pdf(y: f64, gamma_levy: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain("levy_pdf", y, "y > 0"));
    }
    if !(gamma_levy > 0.0) {
        return Err(Error::domain("levy_pdf", gamma_levy, "gamma > 0"));
    }
    let g2 = gamma_levy * gamma_levy;
    Ok((g2 / (2.0 * PI)).sqrt() * (-g2 / (2.0 * y)).exp() / (y * y.sqrt()))
}

/// Lévy CDF `erfc(γ/√(2y))`.
pub fn levy_cdf(y: f64, gamma_levy: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    libm::erfc(gamma_levy / (2.0 * y).sqrt())
}

/// Lévy parameter of the single-receive-antenna interference with Rayleigh
/// links and no shadowing: `γ = 2Γ(3/2) π λ_BS Γ(N_t + 1/2) / (N_t − 1)!`.
pub fn levy_gamma_miso(lambda_bs: f64, n_t: u32) -> Result<f64> {
    if !(lambda_bs > 0.0 && lambda_bs.is_finite()) {
        return Err(Error::invalid("lambda_bs", lambda_bs, "must be positive"));
    }
    if n_t == 0 {
        return Err(Error::invalid("n_t", n_t, "must be at least 1"));
    }
    Ok(2.0 * gamma(1.5)? * PI * lambda_bs * gamma(n_t as f64 + 0.5)? / factorial(n_t - 1))
}

/// Normal quantiles `Φ⁻¹(p)` for `p = 0.625, 0.75, 0.875`.
const Z_0625: f64 = 0.318_639_363_964_375_2;
const Z_075: f64 = 0.674_489_750_196_081_7;
const Z_0875: f64 = 1.150_349_380_376_008;
const IQR_PER_SIGMA: f64 = 2.0 * Z_075;

/// Gaussian `(μ, σ)` matched to a Lévy law by median and interquartile range.
pub fn matched_gaussian(gamma_levy: f64) -> (f64, f64) {
    // Lévy quantiles: P(γ²/Z² ≤ y) = P(|Z| ≥ γ/√y)
    let g2 = gamma_levy * gamma_levy;
    let q1 = g2 / (Z_0875 * Z_0875);
    let median = g2 / (Z_075 * Z_075);
    let q3 = g2 / (Z_0625 * Z_0625);
    (median, (q3 - q1) / IQR_PER_SIGMA)
}

/// Parameter varied by [`pdf_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    SigmaDb,
    LambdaBs,
    SigmaR,
    NT,
    NR,
    M,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::SigmaDb => "sigma_db",
            SweepParam::LambdaBs => "lambda_bs",
            SweepParam::SigmaR => "sigma_r",
            SweepParam::NT => "n_t",
            SweepParam::NR => "n_r",
            SweepParam::M => "m",
        }
    }

    /// Returns the parameter sets with this parameter replaced by `value`.
    /// A shadowing change keeps a mean-matched `Ω` mean-matched.
    pub fn apply(
        self,
        np: &NetworkParams,
        sp: &ShadowingParams,
        value: f64,
    ) -> Result<(NetworkParams, ShadowingParams)> {
        let mut np = *np;
        let mut sp = *sp;
        let count = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(Error::invalid(self.name(), v, "must be a positive integer"))
            }
        };
        match self {
            SweepParam::SigmaDb => {
                sp = if sp.omega == sp.p_r {
                    ShadowingParams::mean_matched(value, sp.p_r)?
                } else {
                    ShadowingParams::from_sigma_db(value, sp.p_r)?
                }
            }
            SweepParam::LambdaBs => np.lambda_bs = value,
            SweepParam::SigmaR => np.sigma_r = value,
            SweepParam::NT => np.n_t = count(value)?,
            SweepParam::NR => np.n_r = count(value)?,
            SweepParam::M => np.m = value,
        }
        np.validate()?;
        Ok((np, sp))
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sigma_db" => SweepParam::SigmaDb,
            "lambda_bs" => SweepParam::LambdaBs,
            "sigma_r" => SweepParam::SigmaR,
            "n_t" => SweepParam::NT,
            "n_r" => SweepParam::NR,
            "m" => SweepParam::M,
            _ => {
                return Err(Error::invalid(
                    "vary",
                    s,
                    "expected one of sigma_db, lambda_bs, sigma_r, n_t, n_r, m",
                ))
            }
        })
    }
}

/// Interference density evaluated for one parameter set: the closed-form Lévy
/// density when `σ_r = 4`, numerical inversion otherwise.
pub fn interference_pdf(y: f64, np: &NetworkParams, sp: &ShadowingParams) -> Result<f64> {
    let stp = stable_scale(np, sp)?;
    if np.sigma_r == 4.0 {
        levy_pdf(y, stp.gamma)
    } else {
        stable_pdf_numeric(y, &stp)
    }
}

/// One density curve per entry of `values`, each evaluated on `y_grid`.
pub fn pdf_sweep(
    np: &NetworkParams,
    sp: &ShadowingParams,
    vary: SweepParam,
    values: &[f64],
    y_grid: &[f64],
) -> Result<Vec<CurveData>> {
    if values.is_empty() || y_grid.is_empty() {
        return Err(Error::invalid(
            "grid",
            "empty",
            "sweep values and y grid must be non-empty",
        ));
    }
    if let Some(&bad) = y_grid.iter().find(|y| !(**y > 0.0 && y.is_finite())) {
        return Err(Error::invalid("y_grid", bad, "must be positive"));
    }
    values
        .iter()
        .map(|&value| {
            let (np_v, sp_v) = vary
                .apply(np, sp, value)
                .map_err(Error::at(vary.name(), value))?;
            let stp = stable_scale(&np_v, &sp_v).map_err(Error::at(vary.name(), value))?;
            let levy = np_v.sigma_r == 4.0;
            let y: Vec<f64> = y_grid
                .par_iter()
                .map(|&y| {
                    if levy {
                        levy_pdf(y, stp.gamma)
                    } else {
                        stable_pdf_numeric(y, &stp)
                    }
                })
                .collect::<Result<_>>()
                .map_err(Error::at(vary.name(), value))?;
            Ok(
                CurveData::new(format!("{}={}", vary.name(), value), y_grid.to_vec(), y)
                    .with_meta("vary", vary.name())
                    .with_meta(format!("gamma[{}={}]", vary.name(), value), stp.gamma),
            )
        })
        .collect()
}
