use std::fmt::Write as _;

use rayon::prelude::*;

use cellcap::capacity::{
    avg_capacity_meijerg, avg_capacity_quadrature, capacity_sweep, percentage_table, CapacityAxis,
    CapacityScenario, CoopConfig, PercentRow, BS_DENSITY_RANGE,
};
use cellcap::channel::{GeneralizedKCdf, InterfererPowerSampler};
use cellcap::curve::{fmt_f64, to_csv, CurveData};
use cellcap::interference::{
    fractional_moment, interference_pdf, levy_cdf, levy_gamma_miso, pdf_sweep, stable_scale,
};
use cellcap::montecarlo::{
    ks_distance, run_chunked, simulate_capacity, simulate_interference_batch,
    EmpiricalDistribution, SimConfig, MIN_CAPACITY_SAMPLES,
};

use crate::config::{ConfigError, Settings};

/// Why a command did not succeed; each maps to one exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    /// Output is still written; the checks it reports did not all pass.
    Validation(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Validation(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Validation(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<cellcap::Error> for Failure {
    fn from(e: cellcap::Error) -> Self {
        let numerical = e.is_non_convergence()
            || matches!(e, cellcap::Error::Overflow { .. })
            || matches!(&e, cellcap::Error::AtPoint { source, .. } if matches!(**source, cellcap::Error::Overflow { .. }));
        if numerical {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

/// Text written to the output plus an optional validation failure.
pub struct Report {
    pub text: String,
    pub failure: Option<Failure>,
}

impl Report {
    fn ok(text: String) -> Self {
        Self {
            text,
            failure: None,
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn interference_pdf_cmd(s: &Settings) -> Result<Report, Failure> {
    let np = s.network();
    let sp = s.shadowing_params()?;
    let grid = log_grid(s.y_min, s.y_max, s.points);
    let curves = match s.vary {
        Some(param) => {
            if s.values.is_empty() {
                return Err(Failure::Config("--vary needs --values".into()));
            }
            pdf_sweep(&np, &sp, param, &s.values, &grid)?
        }
        None => {
            if !s.values.is_empty() {
                return Err(Failure::Config("--values needs --vary".into()));
            }
            let stp = stable_scale(&np, &sp)?;
            let y = grid
                .par_iter()
                .map(|&y| interference_pdf(y, &np, &sp))
                .collect::<cellcap::Result<Vec<_>>>()?;
            vec![CurveData::new("default", grid.clone(), y).with_meta("gamma", fmt_f64(stp.gamma))]
        }
    };
    Ok(Report::ok(to_csv(&s.header("interference-pdf"), &curves)))
}

fn capacity_grid(axis: CapacityAxis, points: usize) -> Vec<f64> {
    match axis {
        CapacityAxis::CoopAntennas => vec![1.0, 2.0, 3.0, 4.0],
        CapacityAxis::BsDensity => {
            let (lo, hi) = BS_DENSITY_RANGE;
            (0..points)
                .map(|i| {
                    if i + 1 == points {
                        hi
                    } else {
                        lo + (hi - lo) * i as f64 / (points - 1) as f64
                    }
                })
                .collect()
        }
    }
}

fn scenario(s: &Settings) -> CapacityScenario {
    CapacityScenario {
        lambda_bs: s.lambda_bs,
        r_b: s.r_b,
        interferer_n_t: s.interferer_n_t,
        n_t_c: s.n_t_c,
    }
}

pub fn capacity_sweep_cmd(s: &Settings, points_given: bool) -> Result<Report, Failure> {
    let points = if points_given { s.points } else { 13 };
    let grid = capacity_grid(s.axis, points);
    let curves = capacity_sweep(s.axis, &scenario(s), &s.cbs, &grid)?;
    Ok(Report::ok(to_csv(&s.header("capacity-sweep"), &curves)))
}

struct Check {
    name: String,
    statistic: f64,
    threshold: f64,
    note: String,
}

impl Check {
    fn passed(&self) -> bool {
        self.statistic <= self.threshold
    }
}

pub fn mc_validate_cmd(s: &Settings) -> Result<Report, Failure> {
    let np = s.network();
    let sp = s.shadowing_params()?;
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let mut cfg = SimConfig::new(np, sp);
    cfg.r_max = s.r_max();
    cfg.n_samples = s.samples;
    cfg.seed = s.seed;
    cfg.validate()?;
    if let Some(w) = cfg.warning() {
        notes.push(w);
    }
    if s.sigma_r == 4.0 {
        let gamma = stable_scale(&np, &sp)?.gamma;
        let emp = simulate_interference_batch(&cfg)?;
        checks.push(Check {
            name: "aggregate_interference_ks_vs_levy".into(),
            statistic: ks_distance(&emp, |y| levy_cdf(y, gamma))?,
            threshold: 0.015,
            note: format!("r_max={}", fmt_f64(cfg.r_max)),
        });
    } else {
        notes
            .push("aggregate interference check skipped: closed-form law needs sigma_r = 4".into());
    }

    let sampler = InterfererPowerSampler::new(&np, &sp)?;
    let alpha = np.alpha();
    let parts = run_chunked(s.seed.wrapping_add(1), s.samples, |rng, count| {
        (0..count).map(|_| sampler.sample(rng)).collect::<Vec<_>>()
    });
    let powers = parts.concat();
    let exact = fractional_moment(alpha, &np, &sp)?;
    let estimate = powers.iter().map(|p| p.powf(alpha)).sum::<f64>() / powers.len() as f64;
    let emp = EmpiricalDistribution::new(powers)?;
    let cdf = GeneralizedKCdf::new(&np, &sp)?;
    checks.push(Check {
        name: "interferer_power_ks_vs_generalized_k".into(),
        statistic: ks_distance(&emp, |y| cdf.cdf(y))?,
        threshold: 0.01,
        note: String::new(),
    });
    checks.push(Check {
        name: "fractional_moment_relative_error".into(),
        statistic: ((estimate - exact) / exact).abs(),
        threshold: 0.01,
        note: format!("alpha={}", fmt_f64(alpha)),
    });

    if s.samples >= MIN_CAPACITY_SAMPLES {
        let gamma = levy_gamma_miso(s.lambda_bs, s.interferer_n_t)?;
        let coop = CoopConfig::new(s.n_b, s.n_t_c, s.r_b)?;
        let mc = simulate_capacity(&coop, gamma, s.samples, s.seed.wrapping_add(2))?;
        let limit = (0.01 * mc.value).max(3.0 * mc.error_estimate);
        for analytic in [
            avg_capacity_meijerg(&coop, gamma)?,
            avg_capacity_quadrature(&coop, gamma)?,
        ] {
            checks.push(Check {
                name: format!("capacity_{}_vs_monte_carlo", analytic.method.name()),
                statistic: (analytic.value - mc.value).abs() / limit,
                threshold: 1.0,
                note: format!(
                    "analytic={} mc={} se={}",
                    fmt_f64(analytic.value),
                    fmt_f64(mc.value),
                    fmt_f64(mc.error_estimate)
                ),
            });
        }
    } else {
        notes.push(format!(
            "capacity check skipped: needs at least {MIN_CAPACITY_SAMPLES} samples"
        ));
    }

    let mut text = String::new();
    for (k, v) in s.header("mc-validate") {
        let _ = writeln!(text, "# {k}={v}");
    }
    for n in &notes {
        let _ = writeln!(text, "# note={n}");
    }
    text.push_str("check,statistic,threshold,status,detail\n");
    for c in &checks {
        let status = if c.passed() { "pass" } else { "fail" };
        let _ = writeln!(
            text,
            "{},{},{},{status},{}",
            c.name,
            fmt_f64(c.statistic),
            fmt_f64(c.threshold),
            c.note
        );
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.as_str())
        .collect();
    let failure = (!failed.is_empty())
        .then(|| Failure::Validation(format!("failed checks: {}", failed.join(", "))));
    Ok(Report { text, failure })
}

pub const RATIO_TOLERANCE_POINTS: f64 = 5.0;

pub fn reproduce_paper_cmd(s: &Settings, strict: bool) -> Result<Report, Failure> {
    let sensitivity = [1, 2, 4];
    let mut tables: Vec<(u32, Vec<PercentRow>)> = Vec::new();
    for n_t in sensitivity {
        tables.push((n_t, percentage_table(n_t)?));
    }
    if !sensitivity.contains(&s.interferer_n_t) {
        tables.push((s.interferer_n_t, percentage_table(s.interferer_n_t)?));
    }
    let within = |rows: &[PercentRow]| {
        rows.iter()
            .filter(|r| r.deviation() <= RATIO_TOLERANCE_POINTS)
            .count()
    };
    let passing: Vec<u32> = tables
        .iter()
        .filter(|(_, rows)| within(rows) == rows.len())
        .map(|(n, _)| *n)
        .collect();
    let (best_n_t, best_rows) = tables
        .iter()
        .max_by_key(|(n, rows)| (within(rows), std::cmp::Reverse(*n)))
        .expect("non-empty sensitivity table");

    let mut text = String::new();
    for (k, v) in s.header("reproduce-paper") {
        let _ = writeln!(text, "# {k}={v}");
    }
    let _ = writeln!(text, "# ratio_tolerance_points={RATIO_TOLERANCE_POINTS}");
    let _ = writeln!(
        text,
        "# passing_interferer_n_t={}",
        if passing.is_empty() {
            "none".to_string()
        } else {
            passing
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(";")
        }
    );
    let _ = writeln!(
        text,
        "# best_interferer_n_t={best_n_t} ({} of {} ratios within tolerance)",
        within(best_rows),
        best_rows.len()
    );
    if passing.is_empty() {
        let _ = writeln!(
            text,
            "# status=discrepancy: no interferer antenna count reproduces every reference ratio; see the sensitivity rows"
        );
    } else {
        let _ = writeln!(text, "# status=reproduced");
    }

    text.push_str(
        "kind,label,interferer_n_t,reference,computed,deviation,relative_deviation,status\n",
    );
    for (n_t, rows) in &tables {
        for r in rows {
            let status = if r.deviation() <= RATIO_TOLERANCE_POINTS {
                "within"
            } else {
                "outside"
            };
            let _ = writeln!(
                text,
                "ratio_pct,{},{n_t},{},{},{},{},{status}",
                r.label,
                fmt_f64(r.reference),
                fmt_f64(r.computed),
                fmt_f64(r.computed - r.reference),
                fmt_f64((r.computed - r.reference) / r.reference)
            );
        }
    }

    let sc = scenario(s);
    let (lo, hi) = BS_DENSITY_RANGE;
    let mut absolute = Vec::new();
    for n_b in 1..=3 {
        for n_t_c in 1..=4 {
            let v = sc
                .capacity_at(CapacityAxis::CoopAntennas, n_b, n_t_c as f64)?
                .value;
            absolute.push((format!("capacity CBS={n_b} n_t_c={n_t_c}"), v));
        }
        for lambda in [lo, hi] {
            let v = sc.capacity_at(CapacityAxis::BsDensity, n_b, lambda)?.value;
            absolute.push((format!("capacity CBS={n_b} lambda_bs={lambda:e}"), v));
        }
    }
    for (label, v) in absolute {
        let _ = writeln!(
            text,
            "absolute_bits_per_hz,{label},{},,{},,,reported",
            s.interferer_n_t,
            fmt_f64(v)
        );
    }

    let failure = (strict && passing.is_empty()).then(|| {
        Failure::Validation(
            "no interferer antenna count reproduces every reference ratio".to_string(),
        )
    });
    Ok(Report { text, failure })
}
