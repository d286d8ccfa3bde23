//! Downlink average capacity of cell-edge users served by a cooperative
//! cluster, with Lévy-distributed aggregate interference.

use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{NetworkParams, ShadowingParams};
use crate::curve::CurveData;
use crate::error::{Error, Result};
use crate::interference::{levy_gamma_miso, stable_scale};
use crate::quad::{self, Tolerance};
use crate::specfun::{bessel_k_half_integer_scaled, factorial, meijer_g, MeijerGSpec};

/// Cooperative cluster: `n_b` base stations, each sending on `n_t_c`
/// antennas, all at distance `r_b` (m) from the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopConfig {
    pub n_b: u32,
    pub n_t_c: u32,
    pub r_b: f64,
}

impl CoopConfig {
    pub fn new(n_b: u32, n_t_c: u32, r_b: f64) -> Result<Self> {
        let cfg = Self { n_b, n_t_c, r_b };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n_b) {
            return Err(Error::invalid("n_b", self.n_b, "must be in 1..=3"));
        }
        if !(1..=4).contains(&self.n_t_c) {
            return Err(Error::invalid("n_t_c", self.n_t_c, "must be in 1..=4"));
        }
        if !(self.r_b > 0.0 && self.r_b.is_finite()) {
            return Err(Error::invalid("r_b", self.r_b, "must be positive"));
        }
        Ok(())
    }

    /// Total number of cooperating antennas `N = n_b n_t_c`.
    pub fn antennas(&self) -> u32 {
        self.n_b * self.n_t_c
    }

    /// Bessel order `v = N − 1/2`.
    pub fn v(&self) -> f64 {
        self.antennas() as f64 - 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMethod {
    Quadrature,
    MeijerG,
    MonteCarlo,
}

impl CapacityMethod {
    pub fn name(self) -> &'static str {
        match self {
            CapacityMethod::Quadrature => "quadrature",
            CapacityMethod::MeijerG => "meijerg",
            CapacityMethod::MonteCarlo => "montecarlo",
        }
    }
}

/// Capacity in bits/s/Hz with the producing method and an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    pub value: f64,
    pub method: CapacityMethod,
    pub error_estimate: f64,
}

/// Largest eigenvalue of `H Hᴴ`.
pub fn max_eigen_gain(h: &DMatrix<Complex64>) -> Result<f64> {
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(Error::Dimension(format!(
            "empty {}x{} channel matrix",
            h.nrows(),
            h.ncols()
        )));
    }
    if h.nrows() == 1 {
        return Ok(h.iter().map(|z| z.norm_sqr()).sum());
    }
    let gram = h * h.adjoint();
    let eig = gram.symmetric_eigenvalues();
    Ok(eig.iter().copied().fold(0.0, f64::max))
}

/// Received desired-signal power `Σ_b Σ_j r_b^{−σ_r} |z_{b,j}|²` (unit
/// per-antenna power).
pub fn covariance_rxx(cfg: &CoopConfig, z: &[f64], sigma_r: f64) -> Result<f64> {
    cfg.validate()?;
    let expected = cfg.antennas() as usize;
    if z.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: z.len(),
        });
    }
    if let Some(&bad) = z.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::invalid(
            "z",
            bad,
            "fading powers must be non-negative",
        ));
    }
    Ok(cfg.r_b.powf(-sigma_r) * z.iter().sum::<f64>())
}

/// Density of the summed desired power: Gamma with shape `N` and scale 2,
/// `x^{N−1} e^{−x/2} / ((N−1)! 2^N)`.
pub fn desired_pdf_chisq(x: f64, cfg: &CoopConfig) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("desired_pdf_chisq", x, "x > 0"));
    }
    cfg.validate()?;
    let n = cfg.antennas();
    let ln = (n as f64 - 1.0) * x.ln() - 0.5 * x - factorial(n - 1).ln() - n as f64 * LN_2;
    Ok(ln.exp())
}

/// `√(2/π) / ((N−1)! 2^N)`, the γ-free part of the ratio-density constant.
fn ratio_norm(cfg: &CoopConfig) -> f64 {
    let n = cfg.antennas();
    (2.0 / PI).sqrt() / (factorial(n - 1) * 2f64.powi(n as i32))
}

/// Density of the SIR-like ratio `η′ = S_d′/S_I′`:
/// `p η′^{(v−1)/2} K_v(γ√η′)` with `p = γ^{v+1} √(2/π) / ((N−1)! 2^N)`.
pub fn ratio_pdf(eta: f64, cfg: &CoopConfig, gamma_levy: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::domain("ratio_pdf", eta, "eta > 0"));
    }
    if !(gamma_levy > 0.0) {
        return Err(Error::domain("ratio_pdf", gamma_levy, "gamma > 0"));
    }
    cfg.validate()?;
    let v = cfg.v();
    let x = gamma_levy * eta.sqrt();
    let k = bessel_k_half_integer_scaled(cfg.antennas() - 1, x)?;
    let ln =
        (v + 1.0) * gamma_levy.ln() + 0.5 * (v - 1.0) * eta.ln() + ratio_norm(cfg).ln() + k.ln()
            - x;
    Ok(ln.exp())
}

const CAPACITY_TOL: Tolerance = Tolerance::new(0.0, 1e-11);

/// Average capacity `E[log₂(1 + r_b⁻⁴ η′)]` by adaptive quadrature.
///
/// With `t = γ√η′` the density becomes `A t^v K_v(t)` with
/// `A = 2√(2/π)/((N−1)! 2^N)`, independent of `γ`; the integrand then decays
/// like `e^{−t}` and the range is split at `t = 1`.
pub fn avg_capacity_quadrature(cfg: &CoopConfig, gamma_levy: f64) -> Result<CapacityResult> {
    cfg.validate()?;
    if !(gamma_levy > 0.0 && gamma_levy.is_finite()) {
        return Err(Error::domain(
            "avg_capacity_quadrature",
            gamma_levy,
            "gamma > 0",
        ));
    }
    let v = cfg.v();
    let n = cfg.antennas();
    let a = 2.0 * ratio_norm(cfg);
    let inv = 1.0 / (gamma_levy * gamma_levy * cfg.r_b.powi(4));
    let integrand = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        let k = bessel_k_half_integer_scaled(n - 1, t).unwrap_or(f64::NAN);
        (t * t * inv).ln_1p() / LN_2 * t.powf(v) * k * (-t).exp()
    };
    let est = quad::integrate_positive_axis(integrand, 1.0, CAPACITY_TOL)
        .map_err(|e| annotate(e, cfg, gamma_levy))?;
    Ok(CapacityResult {
        value: a * est.value,
        method: CapacityMethod::Quadrature,
        error_estimate: a * est.error,
    })
}

/// Average capacity from the closed form
/// `(p / 2 ln 2) r_b^{2(v+1)} G_{2,4}^{4,1}(γ² r_b⁴ / 4 | …)`.
pub fn avg_capacity_meijerg(cfg: &CoopConfig, gamma_levy: f64) -> Result<CapacityResult> {
    cfg.validate()?;
    if !(gamma_levy > 0.0 && gamma_levy.is_finite()) {
        return Err(Error::domain(
            "avg_capacity_meijerg",
            gamma_levy,
            "gamma > 0",
        ));
    }
    let v = cfg.v();
    let r2 = cfg.r_b * cfg.r_b;
    let x = 0.25 * (gamma_levy * r2).powi(2);
    let g = meijer_g(&MeijerGSpec::capacity(v)?, x).map_err(|e| annotate(e, cfg, gamma_levy))?;
    // p r_b^{2(v+1)} grouped as (γ r_b²)^{v+1} to stay in range
    let pre = (gamma_levy * r2).powf(v + 1.0) * ratio_norm(cfg) / (2.0 * LN_2);
    let value = pre * g;
    Ok(CapacityResult {
        value,
        method: CapacityMethod::MeijerG,
        error_estimate: value.abs() * 1e-10,
    })
}

/// Closed form with the quadrature as fallback when the contour integral
/// does not converge.
pub fn avg_capacity(cfg: &CoopConfig, gamma_levy: f64) -> Result<CapacityResult> {
    match avg_capacity_meijerg(cfg, gamma_levy) {
        Err(e) if e.is_non_convergence() => avg_capacity_quadrature(cfg, gamma_levy),
        other => other,
    }
}

fn annotate(e: Error, cfg: &CoopConfig, gamma_levy: f64) -> Error {
    match e {
        Error::NonConvergence { what, detail } => Error::NonConvergence {
            what,
            detail: format!(
                "{detail} (n_b={}, n_t_c={}, r_b={}, gamma={gamma_levy:e})",
                cfg.n_b, cfg.n_t_c, cfg.r_b
            ),
        },
        other => other,
    }
}

/// A density of the desired-signal power, with the scale on which it varies.
pub struct DesiredDensity {
    pdf: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    scale: f64,
    rel_tol: f64,
}

impl DesiredDensity {
    /// `scale` should be a typical magnitude of the variable, e.g. its mean.
    pub fn new(pdf: impl Fn(f64) -> f64 + Send + Sync + 'static, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("scale", scale, "must be positive"));
        }
        Ok(Self {
            pdf: Box::new(pdf),
            scale,
            rel_tol: 1e-9,
        })
    }

    /// Relative accuracy requested from the inner quadrature. Tabulated or
    /// otherwise non-smooth densities need a looser value than the default
    /// `1e-9`.
    pub fn with_tolerance(mut self, rel: f64) -> Self {
        self.rel_tol = rel.clamp(1e-13, 1e-2);
        self
    }

    /// The Gamma(N, 2) law of the cooperative desired power.
    pub fn chi_squared(cfg: &CoopConfig) -> Result<Self> {
        cfg.validate()?;
        let c = *cfg;
        Self::new(
            move |x| desired_pdf_chisq(x, &c).unwrap_or(0.0),
            2.0 * cfg.antennas() as f64,
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x > 0.0 {
            (self.pdf)(x)
        } else {
            0.0
        }
    }
}

/// Exact MIMO average capacity with the interference Lévy parameter taken
/// from the network and shadowing parameters. Requires `σ_r = 4`.
pub fn mimo_avg_capacity(
    np: &NetworkParams,
    sp: &ShadowingParams,
    r_b: f64,
    desired: &DesiredDensity,
) -> Result<CapacityResult> {
    if np.sigma_r != 4.0 {
        return Err(Error::domain(
            "mimo_avg_capacity",
            np.sigma_r,
            "sigma_r = 4",
        ));
    }
    let stp = stable_scale(np, sp)?;
    mimo_avg_capacity_with_gamma(stp.gamma, np.sigma_r, r_b, desired)
}

/// `C = √(γ²/2π) ∫ log₂(1 + r_b^{−σ_r} η) ∫ e^{−γ²/2z} z^{−1/2} f_d(ηz) dz dη`.
///
/// The inner integral is taken in `t = γ²/(2z)` and the outer in
/// `s = γ²η/2`, which gives
/// `C = π^{−1/2} ∫ log₂(1 + 2s/(γ² r_b^{σ_r})) ∫ e^{−t} t^{−3/2} f_d(s/t) dt ds`.
pub fn mimo_avg_capacity_with_gamma(
    gamma_levy: f64,
    sigma_r: f64,
    r_b: f64,
    desired: &DesiredDensity,
) -> Result<CapacityResult> {
    if !(gamma_levy > 0.0 && gamma_levy.is_finite()) {
        return Err(Error::domain("mimo_avg_capacity", gamma_levy, "gamma > 0"));
    }
    if !(r_b > 0.0 && r_b.is_finite()) {
        return Err(Error::invalid("r_b", r_b, "must be positive"));
    }
    let inner_tol = Tolerance::new(0.0, desired.rel_tol);
    let outer_tol = Tolerance::new(0.0, 10.0 * desired.rel_tol);
    let gain = 2.0 / (gamma_levy * gamma_levy * r_b.powf(sigma_r));
    let mut failure: Option<Error> = None;
    let mut inner_err = 0.0;
    let outer = |s: f64| {
        if s == 0.0 || failure.is_some() {
            return 0.0;
        }
        let f = |t: f64| {
            if t == 0.0 {
                0.0
            } else {
                (-t).exp() * t.powf(-1.5) * desired.eval(s / t)
            }
        };
        let scale = (s / desired.scale).min(1.0);
        match quad::integrate_positive_axis(f, scale, inner_tol) {
            Ok(est) => {
                inner_err += est.error * (gain * s).ln_1p() / LN_2;
                (gain * s).ln_1p() / LN_2 * est.value
            }
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let est = quad::integrate_positive_axis(outer, 0.5 * desired.scale, outer_tol);
    if let Some(e) = failure {
        return Err(e);
    }
    let est = est?;
    let norm = 1.0 / PI.sqrt();
    Ok(CapacityResult {
        value: norm * est.value,
        method: CapacityMethod::Quadrature,
        error_estimate: norm * est.error,
    })
}

/// Axis of a capacity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityAxis {
    /// Cooperative antennas per base station, `n_t_c ∈ 1..=4`.
    CoopAntennas,
    /// Interfering base-station density `λ_BS` (m⁻²).
    BsDensity,
}

impl CapacityAxis {
    pub fn name(self) -> &'static str {
        match self {
            CapacityAxis::CoopAntennas => "coop_antennas",
            CapacityAxis::BsDensity => "bs_density",
        }
    }
}

impl std::str::FromStr for CapacityAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coop_antennas" => Ok(CapacityAxis::CoopAntennas),
            "bs_density" => Ok(CapacityAxis::BsDensity),
            _ => Err(Error::invalid(
                "axis",
                s,
                "expected coop_antennas or bs_density",
            )),
        }
    }
}

/// Fixed parameters of a capacity study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityScenario {
    pub lambda_bs: f64,
    pub r_b: f64,
    /// Antennas per interfering base station (enters the Lévy parameter).
    pub interferer_n_t: u32,
    /// Cooperative antennas per base station when they are not swept.
    pub n_t_c: u32,
}

impl Default for CapacityScenario {
    fn default() -> Self {
        Self {
            lambda_bs: 1.0 / (PI * 500.0 * 500.0),
            r_b: 500.0,
            interferer_n_t: 2,
            n_t_c: 2,
        }
    }
}

/// Densities covered by the density axis.
pub const BS_DENSITY_RANGE: (f64, f64) = (0.5e-6, 3.5e-6);

impl CapacityScenario {
    pub fn gamma(&self) -> Result<f64> {
        levy_gamma_miso(self.lambda_bs, self.interferer_n_t)
    }

    /// Capacity for `n_b` cooperating base stations at one sweep point.
    pub fn capacity_at(&self, axis: CapacityAxis, n_b: u32, x: f64) -> Result<CapacityResult> {
        let (cfg, gamma) = match axis {
            CapacityAxis::CoopAntennas => {
                if !((1.0..=4.0).contains(&x) && x.fract() == 0.0) {
                    return Err(Error::invalid("n_t_c", x, "must be an integer in 1..=4"));
                }
                (CoopConfig::new(n_b, x as u32, self.r_b)?, self.gamma()?)
            }
            CapacityAxis::BsDensity => {
                let (lo, hi) = BS_DENSITY_RANGE;
                if !(x >= lo * (1.0 - 1e-12) && x <= hi * (1.0 + 1e-12)) {
                    return Err(Error::invalid(
                        "lambda_bs",
                        x,
                        format!("must lie in [{lo:e}, {hi:e}]"),
                    ));
                }
                let cfg = CoopConfig::new(n_b, self.n_t_c, self.r_b)?;
                (cfg, levy_gamma_miso(x, self.interferer_n_t)?)
            }
        };
        avg_capacity(&cfg, gamma)
    }
}

/// One capacity curve per cooperating-BS count in `cbs`, evaluated on `grid`.
pub fn capacity_sweep(
    axis: CapacityAxis,
    scenario: &CapacityScenario,
    cbs: &[u32],
    grid: &[f64],
) -> Result<Vec<CurveData>> {
    if cbs.is_empty() || grid.is_empty() {
        return Err(Error::invalid(
            "grid",
            "empty",
            "sweep grid and CBS list must be non-empty",
        ));
    }
    cbs.iter()
        .map(|&n_b| {
            let y: Vec<f64> = grid
                .par_iter()
                .map(|&x| {
                    scenario
                        .capacity_at(axis, n_b, x)
                        .map(|c| c.value)
                        .map_err(Error::at(axis.name(), x))
                })
                .collect::<Result<_>>()?;
            Ok(CurveData::new(format!("CBS={n_b}"), grid.to_vec(), y)
                .with_meta("axis", axis.name())
                .with_meta("r_b", scenario.r_b)
                .with_meta("interferer_n_t", scenario.interferer_n_t))
        })
        .collect()
}

/// One relative-change figure: `computed` and `reference` are percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentRow {
    pub label: String,
    pub reference: f64,
    pub computed: f64,
}

impl PercentRow {
    /// Absolute gap in percentage points.
    pub fn deviation(&self) -> f64 {
        (self.computed - self.reference).abs()
    }
}

/// Published relative changes for the default scenario, in table order.
pub const REFERENCE_PERCENTAGES: [f64; 14] = [
    209.0, 173.0, 153.0, 80.99, 37.88, 50.9, 27.62, 94.86, 93.40, 92.22, 48.76, 21.99, 90.98, 43.81,
];

/// The fourteen relative capacity changes of the cooperative-antenna and
/// BS-density studies, for interferers with `interferer_n_t` antennas.
pub fn percentage_table(interferer_n_t: u32) -> Result<Vec<PercentRow>> {
    let scenario = CapacityScenario {
        interferer_n_t,
        ..CapacityScenario::default()
    };
    let (lo, hi) = BS_DENSITY_RANGE;
    let c = |n_b: u32, n_t_c: u32| {
        scenario
            .capacity_at(CapacityAxis::CoopAntennas, n_b, n_t_c as f64)
            .map(|r| r.value)
    };
    let d = |n_b: u32, lambda: f64| {
        scenario
            .capacity_at(CapacityAxis::BsDensity, n_b, lambda)
            .map(|r| r.value)
    };
    let gain = |a: f64, b: f64| 100.0 * (a / b - 1.0);
    let loss = |a: f64, b: f64| 100.0 * (1.0 - a / b);
    let mut rows = vec![
        ("CBS=1 n_t_c 1->4", gain(c(1, 4)?, c(1, 1)?)),
        ("CBS=2 n_t_c 1->4", gain(c(2, 4)?, c(2, 1)?)),
        ("CBS=3 n_t_c 1->4", gain(c(3, 4)?, c(3, 1)?)),
        ("n_t_c=1 CBS 1->2", gain(c(2, 1)?, c(1, 1)?)),
        ("n_t_c=1 CBS 2->3", gain(c(3, 1)?, c(2, 1)?)),
        ("n_t_c=4 CBS 1->2", gain(c(2, 4)?, c(1, 4)?)),
        ("n_t_c=4 CBS 2->3", gain(c(3, 4)?, c(2, 4)?)),
    ];
    for n_b in 1..=3 {
        let label = match n_b {
            1 => "CBS=1 lambda_bs low->high (decrease)",
            2 => "CBS=2 lambda_bs low->high (decrease)",
            _ => "CBS=3 lambda_bs low->high (decrease)",
        };
        rows.push((label, loss(d(n_b, hi)?, d(n_b, lo)?)));
    }
    rows.push(("lambda_bs low CBS 1->2", gain(d(2, lo)?, d(1, lo)?)));
    rows.push(("lambda_bs low CBS 2->3", gain(d(3, lo)?, d(2, lo)?)));
    rows.push(("lambda_bs high CBS 1->2", gain(d(2, hi)?, d(1, hi)?)));
    rows.push(("lambda_bs high CBS 2->3", gain(d(3, hi)?, d(2, hi)?)));
    Ok(rows
        .into_iter()
        .zip(REFERENCE_PERCENTAGES)
        .map(|((label, computed), reference)| PercentRow {
            label: label.to_string(),
            reference,
            computed,
        })
        .collect())
}
