//! Adaptive Gauss–Kronrod integration on finite, semi-infinite and
//! positive-axis domains.
//!
//! The finite-interval driver is a globally adaptive bisection scheme on the
//! 21-point Kronrod extension of the 10-point Gauss rule (the QUADPACK `qk21`
//! tables). Semi-infinite ranges are handled by splitting into intervals whose
//! widths grow geometrically away from a caller-supplied scale, which keeps
//! algebraic end-point singularities and exponential tails cheap.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Requested accuracy: the scheme stops once the error estimate is below
/// `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub const fn rel(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// An integral value with its error estimate and evaluation count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// One application of the 21-point Kronrod rule.
///
/// Returns `(kronrod, error, integral of |f|)`.
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = (fc * WGK[10]).abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let result = res_k * half;
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err, res_abs)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    value_abs: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Default bisection budget for [`integrate`].
pub const MAX_SUBDIVISIONS: usize = 2000;

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    integrate_with_budget(&mut f, a, b, tol, MAX_SUBDIVISIONS)
}

pub fn integrate_with_budget<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: Tolerance,
    max_subdivisions: usize,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error, value_abs) = gk21(f, a, b);
    if !value.is_finite() {
        return Err(non_finite(a, b));
    }
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value,
        value_abs,
        error,
    });
    let mut total = value;
    let mut total_err = error;
    let mut total_abs = value_abs;
    let mut splits = 0;
    // below the rounding floor of the Kronrod sums no refinement can help
    while total_err > tol.target(total).max(100.0 * f64::EPSILON * total_abs) {
        if splits >= max_subdivisions {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                detail: format!(
                    "[{a:e}, {b:e}]: {max_subdivisions} subdivisions, value {total:e}, error {total_err:e}"
                ),
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval exhausted at machine resolution; accept what we have
            heap.push(worst);
            break;
        }
        let (v1, e1, a1) = gk21(f, worst.a, mid);
        let (v2, e2, a2) = gk21(f, mid, worst.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(non_finite(worst.a, worst.b));
        }
        evaluations += 42;
        splits += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        total_abs += a1 + a2 - worst.value_abs;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            value_abs: a1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            value_abs: a2,
            error: e2,
        });
    }
    // re-sum to shed the rounding drift of the running totals
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

fn non_finite(a: f64, b: f64) -> Error {
    Error::NonConvergence {
        what: "adaptive quadrature",
        detail: format!("non-finite integrand on [{a:e}, {b:e}]"),
    }
}

/// Number of consecutive negligible intervals required before a geometric
/// sweep is declared finished.
const QUIET_INTERVALS: usize = 4;
const MAX_GEOMETRIC_INTERVALS: usize = 1500;

/// Integral of `f` over `[a, ∞)`.
///
/// The range is cut into `[a, a+s], [a+s, a+3s], [a+3s, a+7s], …` and the
/// sweep stops once several consecutive pieces are negligible against the
/// running total. `scale` should be the width over which `f` changes
/// appreciably near `a`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain("integrate_to_infinity", scale, "scale > 0"));
    }
    let mut acc = Estimate {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    let mut lo = a;
    let mut width = scale;
    let mut quiet = 0;
    for _ in 0..MAX_GEOMETRIC_INTERVALS {
        let hi = lo + width;
        if !hi.is_finite() {
            break;
        }
        let piece =
            integrate_with_budget(&mut f, lo, hi, piece_tol(tol, acc.value), MAX_SUBDIVISIONS)?;
        accumulate(&mut acc, piece);
        if negligible(piece, acc.value, tol) {
            quiet += 1;
            if quiet >= QUIET_INTERVALS {
                return Ok(acc);
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::NonConvergence {
        what: "semi-infinite quadrature",
        detail: format!("tail from {a:e} (scale {scale:e}) did not become negligible"),
    })
}

/// Integral of `f` over `(0, ∞)` split at `scale`: halving intervals
/// toward the origin and doubling intervals toward infinity.
///
/// Suits integrands with an integrable algebraic singularity at zero.
pub fn integrate_positive_axis<F: FnMut(f64) -> f64>(
    mut f: F,
    scale: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain("integrate_positive_axis", scale, "scale > 0"));
    }
    let upper = integrate_to_infinity(&mut f, scale, scale, tol)?;
    let mut acc = upper;
    let mut hi = scale;
    let mut quiet = 0;
    for _ in 0..MAX_GEOMETRIC_INTERVALS {
        let lo = 0.5 * hi;
        if lo == 0.0 {
            return Ok(acc);
        }
        let piece =
            integrate_with_budget(&mut f, lo, hi, piece_tol(tol, acc.value), MAX_SUBDIVISIONS)?;
        accumulate(&mut acc, piece);
        if negligible(piece, acc.value, tol) {
            quiet += 1;
            if quiet >= QUIET_INTERVALS {
                return Ok(acc);
            }
        } else {
            quiet = 0;
        }
        hi = lo;
    }
    Err(Error::NonConvergence {
        what: "positive-axis quadrature",
        detail: format!("contribution near the origin did not vanish (scale {scale:e})"),
    })
}

fn piece_tol(tol: Tolerance, running: f64) -> Tolerance {
    // absolute floor tied to the running total so tiny tail pieces do not
    // chase relative accuracy they cannot affect
    Tolerance::new(tol.abs.max(1e-3 * tol.rel * running.abs()), tol.rel)
}

fn negligible(piece: Estimate, total: f64, tol: Tolerance) -> bool {
    piece.value.abs() <= 1e-3 * tol.target(total).max(f64::MIN_POSITIVE)
}

fn accumulate(acc: &mut Estimate, piece: Estimate) {
    acc.value += piece.value;
    acc.error += piece.error;
    acc.evaluations += piece.evaluations;
}
