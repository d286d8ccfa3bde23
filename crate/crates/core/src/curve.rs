//! Sampled (x, y) series and their CSV form.

use std::fmt::Write as _;

/// One labelled series on an x grid, with free-form metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveData {
    pub series: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub metadata: Vec<(String, String)>,
}

impl CurveData {
    pub fn new(series: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), y.len());
        Self {
            series: series.into(),
            x,
            y,
            metadata: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    /// Largest `y` value, or `NaN` for an empty curve.
    pub fn peak(&self) -> f64 {
        self.y.iter().copied().fold(f64::NAN, f64::max)
    }
}

/// Formats a float with 17 significant digits, the shortest width that
/// round-trips every `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    format!("{v:.16e}")
}

/// Writes curves as `# key=value` comment lines, an `x,y,series` header and
/// one row per point. The comment block lists `header` followed by the
/// metadata of each curve (deduplicated, first occurrence wins).
pub fn to_csv(header: &[(String, String)], curves: &[CurveData]) -> String {
    let mut out = String::new();
    let mut seen: Vec<&str> = Vec::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k}={v}");
        seen.push(k);
    }
    for curve in curves {
        for (k, v) in &curve.metadata {
            if !seen.contains(&k.as_str()) {
                let _ = writeln!(out, "# {k}={v}");
                seen.push(k);
            }
        }
    }
    out.push_str("x,y,series\n");
    for curve in curves {
        let label = csv_field(&curve.series);
        for (x, y) in curve.x.iter().zip(&curve.y) {
            let _ = writeln!(out, "{},{},{label}", fmt_f64(*x), fmt_f64(*y));
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_full_precision() {
        for v in [0.1, 1.0 / 3.0, 2.5e-10, -7.0e300, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_layout() {
        let c = CurveData::new("a,b", vec![1.0, 2.0], vec![0.5, 0.25]).with_meta("vary", "m");
        let text = to_csv(&[("version".into(), "0.1.0".into())], &[c]);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# version=0.1.0");
        assert_eq!(lines[1], "# vary=m");
        assert_eq!(lines[2], "x,y,series");
        assert!(lines[3].ends_with(",\"a,b\""));
        assert_eq!(lines.len(), 5);
    }
}
