//! Poisson-field simulation of the aggregate interference and Monte Carlo
//! capacity estimates, used as the reference for the analytical results.
//!
//! Every batch is cut into fixed-size chunks; chunk `i` draws from the
//! `i`-th jump-ahead stream of the master seed, and chunk results are merged
//! in index order. Output therefore depends on the seed only, never on the
//! number of worker threads.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::capacity::{max_eigen_gain, CapacityMethod, CapacityResult, CoopConfig};
use crate::channel::{generalized_k_mean, InterfererPowerSampler, NetworkParams, ShadowingParams};
use crate::error::{Error, Result};

/// Random stream type used by all simulators.
pub type SimRng = Xoshiro256PlusPlus;

/// Samples per independently seeded chunk.
pub const CHUNK: usize = 2048;

/// How the field beyond `r_max` is accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailMode {
    /// Interferers beyond `r_max` are ignored.
    #[default]
    Truncate,
    /// Their mean contribution `2πλ E[I] r_max^{2−σ_r}/(σ_r−2)` is added to
    /// every draw. Useful when `σ_r` is small and truncation bias is large.
    MeanField,
}

/// Poisson-field simulation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub np: NetworkParams,
    pub sp: ShadowingParams,
    /// Truncation radius (m).
    pub r_max: f64,
    /// Exclusion radius (m).
    pub r_min: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub tail: TailMode,
}

impl SimConfig {
    /// Settings with `r_max` at 100 mean cell radii, `1/√(πλ_BS)` each.
    pub fn new(np: NetworkParams, sp: ShadowingParams) -> Self {
        Self {
            np,
            sp,
            r_max: 100.0 / (PI * np.lambda_bs).sqrt(),
            r_min: 0.0,
            n_samples: 100_000,
            seed: 0,
            tail: TailMode::Truncate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.np.validate()?;
        if !(self.r_min >= 0.0 && self.r_min.is_finite()) {
            return Err(Error::invalid("r_min", self.r_min, "must be non-negative"));
        }
        if !(self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(Error::invalid("r_max", self.r_max, "must exceed r_min"));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples", 0, "must be at least 1"));
        }
        if self.tail == TailMode::MeanField && !(self.np.sigma_r > 2.0) {
            return Err(Error::invalid(
                "sigma_r",
                self.np.sigma_r,
                "mean-field tail needs sigma_r > 2",
            ));
        }
        Ok(())
    }

    /// `λ_BS π (r_max² − r_min²)`.
    pub fn expected_count(&self) -> f64 {
        self.np.lambda_bs * PI * (self.r_max * self.r_max - self.r_min * self.r_min)
    }

    /// A warning when the truncated field holds too few interferers to be
    /// representative.
    pub fn warning(&self) -> Option<String> {
        let n = self.expected_count();
        (n < 10.0).then(|| format!("expected interferer count {n:.3} is below 10; increase r_max"))
    }

    fn tail_mean(&self) -> f64 {
        match self.tail {
            TailMode::Truncate => 0.0,
            TailMode::MeanField => {
                let s = self.np.sigma_r;
                2.0 * PI
                    * self.np.lambda_bs
                    * generalized_k_mean(&self.np, &self.sp)
                    * self.r_max.powf(2.0 - s)
                    / (s - 2.0)
            }
        }
    }
}

/// Sorted finite samples with the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    pub provenance: Option<SimConfig>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("samples", bad, "must be finite"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self {
            samples,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, cfg: SimConfig) -> Self {
        self.provenance = Some(cfg);
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Fraction of samples `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    /// Lower empirical quantile.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.samples.len();
        let i = ((p.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
        self.samples[i - 1]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Density histogram on the given bin edges (counts / (n · width)).
    pub fn histogram(&self, edges: &[f64]) -> Vec<f64> {
        let n = self.samples.len() as f64;
        edges
            .windows(2)
            .map(|w| {
                let lo = self.samples.partition_point(|&s| s < w[0]);
                let hi = self.samples.partition_point(|&s| s < w[1]);
                (hi - lo) as f64 / (n * (w[1] - w[0]))
            })
            .collect()
    }
}

/// Kolmogorov–Smirnov distance between the samples and a CDF.
pub fn ks_distance(emp: &EmpiricalDistribution, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let n = emp.len();
    if n < 2 {
        return Err(Error::EmptySample {
            needed: 2,
            actual: n,
        });
    }
    let nf = n as f64;
    let mut d: f64 = 0.0;
    let s = emp.samples();
    let mut i = 0;
    while i < n {
        // step through ties at once so the empirical CDF is evaluated correctly
        let mut j = i;
        while j + 1 < n && s[j + 1] == s[i] {
            j += 1;
        }
        let f = cdf(s[i]);
        d = d
            .max((f - i as f64 / nf).abs())
            .max(((j + 1) as f64 / nf - f).abs());
        i = j + 1;
    }
    Ok(d.min(1.0))
}

/// Independent streams for `n_chunks` chunks, obtained by jumping the master
/// stream `2^128` steps per chunk.
pub fn chunk_streams(seed: u64, n_chunks: usize) -> Vec<SimRng> {
    let mut base = SimRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_chunks);
    for _ in 0..n_chunks {
        out.push(base.clone());
        base.jump();
    }
    out
}

/// Runs `f(rng, count)` over `n` items split into [`CHUNK`]-sized chunks in
/// parallel and returns the chunk results in chunk order.
pub fn run_chunked<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SimRng, usize) -> T + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    chunk_streams(seed, n_chunks)
        .into_par_iter()
        .enumerate()
        .map(|(i, mut rng)| {
            let count = CHUNK.min(n - i * CHUNK);
            f(&mut rng, count)
        })
        .collect()
}

/// Distances of the interferers in one realization of the truncated field.
pub fn sample_poisson_field<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<Vec<f64>> {
    cfg.validate()?;
    let count = poisson_count(cfg.expected_count(), rng);
    let (a2, b2) = (cfg.r_min * cfg.r_min, cfg.r_max * cfg.r_max);
    Ok((0..count)
        .map(|_| (a2 + (b2 - a2) * rng.random::<f64>()).sqrt())
        .collect())
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng);
    draw as u64
}

/// Reusable sampler for aggregate-interference draws.
#[derive(Debug, Clone, Copy)]
pub struct FieldSampler {
    power: InterfererPowerSampler,
    mean_count: f64,
    r_min2: f64,
    span2: f64,
    half_exponent: f64,
    quartic: bool,
    tail: f64,
}

impl FieldSampler {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            power: InterfererPowerSampler::new(&cfg.np, &cfg.sp)?,
            mean_count: cfg.expected_count(),
            r_min2: cfg.r_min * cfg.r_min,
            span2: cfg.r_max * cfg.r_max - cfg.r_min * cfg.r_min,
            half_exponent: -0.5 * cfg.np.sigma_r,
            quartic: cfg.np.sigma_r == 4.0,
            tail: cfg.tail_mean(),
        })
    }

    /// One draw of `Σ_b r_b^{−σ_r} I_b`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let count = poisson_count(self.mean_count, rng);
        let mut sum = 0.0;
        for _ in 0..count {
            // squared distance is uniform on [r_min², r_max²]
            let r2 = self.r_min2 + self.span2 * rng.random::<f64>();
            let loss = if self.quartic {
                1.0 / (r2 * r2)
            } else {
                r2.powf(self.half_exponent)
            };
            sum += loss * self.power.sample(rng);
        }
        sum + self.tail
    }
}

/// One draw of the aggregate interference power.
pub fn simulate_aggregate_interference<R: Rng + ?Sized>(
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<f64> {
    Ok(FieldSampler::new(cfg)?.sample(rng))
}

/// `cfg.n_samples` aggregate-interference draws, seeded by `cfg.seed`.
pub fn simulate_interference_batch(cfg: &SimConfig) -> Result<EmpiricalDistribution> {
    let sampler = FieldSampler::new(cfg)?;
    let chunks = run_chunked(cfg.seed, cfg.n_samples, |rng, count| {
        (0..count).map(|_| sampler.sample(rng)).collect::<Vec<_>>()
    });
    Ok(EmpiricalDistribution::new(chunks.concat())?.with_provenance(*cfg))
}

/// Lévy variate `γ²/Z²`, `Z` standard normal.
pub fn sample_levy<R: Rng + ?Sized>(gamma_levy: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    gamma_levy * gamma_levy / (z * z)
}

/// Minimum sample count accepted by [`simulate_capacity`].
pub const MIN_CAPACITY_SAMPLES: usize = 10_000;

/// Mean and standard error of per-chunk `(Σx, Σx², n)` sums merged in order.
fn mean_and_se(parts: &[(f64, f64, usize)]) -> (f64, f64) {
    let (s, s2, n) = parts
        .iter()
        .fold((0.0, 0.0, 0usize), |(a, b, c), &(x, y, k)| {
            (a + x, b + y, c + k)
        });
    let nf = n as f64;
    let mean = s / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Monte Carlo estimate of `E[log₂(1 + r_b⁻⁴ S_d′/S_I′)]` with
/// `S_d′ ~ Gamma(N, 2)` and `S_I′` Lévy with parameter `γ`.
pub fn simulate_capacity(
    cfg: &CoopConfig,
    gamma_levy: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CapacityResult> {
    cfg.validate()?;
    if n_samples < MIN_CAPACITY_SAMPLES {
        return Err(Error::invalid(
            "n_samples",
            n_samples,
            format!("must be at least {MIN_CAPACITY_SAMPLES}"),
        ));
    }
    if !(gamma_levy > 0.0 && gamma_levy.is_finite()) {
        return Err(Error::invalid("gamma", gamma_levy, "must be positive"));
    }
    let desired = Gamma::new(cfg.antennas() as f64, 2.0).expect("valid Gamma");
    let inv_r4 = cfg.r_b.powi(-4);
    let parts = run_chunked(seed, n_samples, |rng, count| {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            let sd = desired.sample(rng);
            let si = sample_levy(gamma_levy, rng);
            let c = (inv_r4 * sd / si).ln_1p() / std::f64::consts::LN_2;
            s += c;
            s2 += c * c;
        }
        (s, s2, count)
    });
    let (mean, se) = mean_and_se(&parts);
    Ok(CapacityResult {
        value: mean,
        method: CapacityMethod::MonteCarlo,
        error_estimate: se,
    })
}

/// Matrix of i.i.d. `CN(0, 1)` entries.
pub fn sample_cn_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(s * re, s * im)
    })
}

/// `n` draws of `λ_max(H Hᴴ)` for `rows × cols` i.i.d. `CN(0,1)` matrices.
pub fn sample_max_eigen_gains(rows: usize, cols: usize, n: usize, seed: u64) -> Result<Vec<f64>> {
    let parts = run_chunked(seed, n, |rng, count| {
        (0..count)
            .map(|_| max_eigen_gain(&sample_cn_matrix(rows, cols, rng)))
            .collect::<Result<Vec<_>>>()
    });
    Ok(parts.into_iter().collect::<Result<Vec<_>>>()?.concat())
}

/// Monte Carlo estimate of `E[log₂(1 + r_b^{−σ_r} λ_max / S_I)]` for MRT/MRC
/// over `rows × cols` Rayleigh channels and Lévy interference.
pub fn simulate_mimo_capacity(
    rows: usize,
    cols: usize,
    gamma_levy: f64,
    sigma_r: f64,
    r_b: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CapacityResult> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!(
            "empty {rows}x{cols} channel matrix"
        )));
    }
    let gain = r_b.powf(-sigma_r);
    let parts = run_chunked(seed, n_samples, |rng, count| {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            let h = sample_cn_matrix(rows, cols, rng);
            let sd = max_eigen_gain(&h).expect("non-empty matrix");
            let si = sample_levy(gamma_levy, rng);
            let c = (gain * sd / si).ln_1p() / std::f64::consts::LN_2;
            s += c;
            s2 += c * c;
        }
        (s, s2, count)
    });
    let (mean, se) = mean_and_se(&parts);
    Ok(CapacityResult {
        value: mean,
        method: CapacityMethod::MonteCarlo,
        error_estimate: se,
    })
}

/// Gaussian kernel density estimate of a positive variable, reflected at
/// zero and tabulated on a uniform grid.
#[derive(Debug, Clone)]
pub struct TabulatedDensity {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
    mean: f64,
}

impl TabulatedDensity {
    /// Silverman-bandwidth KDE of `samples` (all must be positive).
    pub fn kde(samples: &[f64], points: usize) -> Result<Self> {
        let emp = EmpiricalDistribution::new(samples.to_vec())?;
        let n = emp.len();
        if n < 2 {
            return Err(Error::EmptySample {
                needed: 2,
                actual: n,
            });
        }
        let s = emp.samples();
        if s[0] <= 0.0 {
            return Err(Error::invalid("samples", s[0], "must be positive"));
        }
        let nf = n as f64;
        let mean = s.iter().sum::<f64>() / nf;
        let sd = (s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
        let iqr = emp.quantile(0.75) - emp.quantile(0.25);
        let h = 0.9 * sd.min(iqr / 1.34) * nf.powf(-0.2);
        let hi = s[n - 1] + 6.0 * h;
        let dx = hi / (points - 1) as f64;
        let norm = 1.0 / (nf * h * (2.0 * PI).sqrt());
        let values = (0..points)
            .into_par_iter()
            .map(|i| {
                let x = i as f64 * dx;
                let lo = s.partition_point(|&v| v < x - 6.0 * h);
                let up = s.partition_point(|&v| v <= x + 6.0 * h);
                let mut acc = 0.0;
                for &v in &s[lo..up] {
                    acc += (-0.5 * ((x - v) / h).powi(2)).exp();
                }
                // reflected mirror samples -v lie within reach only near the origin
                let up_mirror = s.partition_point(|&v| v <= 6.0 * h - x);
                for &v in &s[..up_mirror] {
                    acc += (-0.5 * ((x + v) / h).powi(2)).exp();
                }
                acc * norm
            })
            .collect();
        Ok(Self {
            x0: 0.0,
            dx,
            values,
            mean,
        })
    }

    /// Linear interpolation of the table, zero outside it.
    pub fn pdf(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.dx;
        if !(t >= 0.0) {
            return 0.0;
        }
        let i = t as usize;
        if i + 1 >= self.values.len() {
            return 0.0;
        }
        let w = t - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::levy_cdf;

    fn default_cfg() -> SimConfig {
        let sp = ShadowingParams::from_sigma_db(6.0, 1.0).unwrap();
        SimConfig::new(NetworkParams::default(), sp)
    }

    #[test]
    fn default_truncation_radius() {
        let cfg = default_cfg();
        assert!((cfg.r_max - 50_000.0).abs() < 1e-6);
        assert!(cfg.warning().is_none());
        let small = SimConfig {
            r_max: 1000.0,
            ..cfg
        };
        assert!(small.warning().is_some());
    }

    #[test]
    fn field_count_and_radius_moments() {
        let cfg = SimConfig {
            r_max: 5000.0,
            r_min: 1000.0,
            ..default_cfg()
        };
        let mut rng = SimRng::seed_from_u64(1);
        let (mut count, mut r2, mut total) = (0usize, 0.0, 0usize);
        for _ in 0..10_000 {
            let f = sample_poisson_field(&cfg, &mut rng).unwrap();
            count += f.len();
            total += f.len();
            r2 += f.iter().map(|r| r * r).sum::<f64>();
            assert!(f.iter().all(|&r| (1000.0..=5000.0).contains(&r)));
        }
        let mean_count = count as f64 / 10_000.0;
        assert!((mean_count / cfg.expected_count() - 1.0).abs() < 0.02);
        let want = 0.5 * (5000f64.powi(2) + 1000f64.powi(2));
        assert!((r2 / total as f64 / want - 1.0).abs() < 0.01);
        let thin = SimConfig {
            r_min: 4_999.999_999,
            ..cfg
        };
        assert!(sample_poisson_field(&thin, &mut rng).unwrap().len() <= 1);
    }

    #[test]
    fn empty_field_gives_zero() {
        let cfg = SimConfig {
            r_min: 1000.0,
            r_max: 1_000.000_001,
            ..default_cfg()
        };
        let mut rng = SimRng::seed_from_u64(3);
        assert_eq!(
            simulate_aggregate_interference(&cfg, &mut rng).unwrap(),
            0.0
        );
    }

    #[test]
    fn levy_sampler_matches_cdf() {
        let g = 2.0;
        let mut rng = SimRng::seed_from_u64(9);
        let emp =
            EmpiricalDistribution::new((0..100_000).map(|_| sample_levy(g, &mut rng)).collect())
                .unwrap();
        assert!(ks_distance(&emp, |y| levy_cdf(y, g)).unwrap() < 0.01);
        assert!((levy_cdf(emp.median(), g) - 0.5).abs() < 0.01);
    }

    #[test]
    fn ks_edge_cases() {
        let one = EmpiricalDistribution::new(vec![1.0]).unwrap();
        assert!(matches!(
            ks_distance(&one, |x| x),
            Err(Error::EmptySample { .. })
        ));
        let constant = EmpiricalDistribution::new(vec![0.3; 10]).unwrap();
        let d = ks_distance(&constant, |x: f64| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.7).abs() < 1e-12);
        let uniform =
            EmpiricalDistribution::new((0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect())
                .unwrap();
        let d = ks_distance(&uniform, |x: f64| (x - 0.1).clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.1).abs() < 1e-3);
        assert!(EmpiricalDistribution::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn chunked_runs_are_reproducible() {
        let a = run_chunked(5, 10_000, |rng, n| {
            (0..n).map(|_| rng.random::<u64>()).collect::<Vec<_>>()
        });
        let b = run_chunked(5, 10_000, |rng, n| {
            (0..n).map(|_| rng.random::<u64>()).collect::<Vec<_>>()
        });
        assert_eq!(a, b);
        assert_eq!(a.concat().len(), 10_000);
        let c = run_chunked(6, 10, |rng, _| rng.random::<u64>());
        assert_ne!(a[0][0], c[0]);
    }

    #[test]
    fn capacity_requires_enough_samples() {
        let cfg = CoopConfig::new(1, 1, 500.0).unwrap();
        assert!(simulate_capacity(&cfg, 1e-5, 100, 0).is_err());
        let big = simulate_capacity(&cfg, 1e-5, 20_000, 0).unwrap();
        let tiny = simulate_capacity(&cfg, 1e-2, 20_000, 0).unwrap();
        assert!(tiny.value < 1e-3 * big.value);
    }

    #[test]
    fn kde_integrates_to_one() {
        let mut rng = SimRng::seed_from_u64(11);
        let g = Gamma::new(3.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..20_000).map(|_| g.sample(&mut rng)).collect();
        let d = TabulatedDensity::kde(&xs, 2000).unwrap();
        let mass: f64 = (0..200_000).map(|i| d.pdf(i as f64 * 1e-4) * 1e-4).sum();
        assert!((mass - 1.0).abs() < 0.01, "{mass}");
    }
}
