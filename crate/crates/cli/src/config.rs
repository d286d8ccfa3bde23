//! Run settings: defaults, then a flat `key = value` file, then flags.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use cellcap::capacity::CapacityAxis;
use cellcap::channel::{NetworkParams, ShadowingParams};
use cellcap::interference::SweepParam;

/// Problem in the configuration; reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<cellcap::Error> for ConfigError {
    fn from(e: cellcap::Error) -> Self {
        ConfigError(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Every recognised key, in the order written to output headers.
pub const KEYS: &[&str] = &[
    "sigma_db",
    "shadowing",
    "p_r",
    "lambda_bs",
    "sigma_r",
    "n_t",
    "n_r",
    "m",
    "p_ant",
    "vary",
    "values",
    "y_min",
    "y_max",
    "points",
    "axis",
    "cbs",
    "n_b",
    "n_t_c",
    "r_b",
    "interferer_n_t",
    "r_max",
    "seed",
    "samples",
];

/// How `Ω` follows from the shadowing spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shadowing {
    /// `Ω = P_r √((λ+1)/λ)`.
    Standard,
    /// `Ω = P_r`.
    MeanMatched,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub sigma_db: f64,
    pub shadowing: Shadowing,
    pub p_r: f64,
    pub lambda_bs: f64,
    pub sigma_r: f64,
    pub n_t: u32,
    pub n_r: u32,
    pub m: f64,
    pub p_ant: f64,
    pub vary: Option<SweepParam>,
    pub values: Vec<f64>,
    pub y_min: f64,
    pub y_max: f64,
    pub points: usize,
    pub axis: CapacityAxis,
    pub cbs: Vec<u32>,
    pub n_b: u32,
    pub n_t_c: u32,
    pub r_b: f64,
    pub interferer_n_t: u32,
    /// `None` means 100 mean cell radii.
    pub r_max: Option<f64>,
    pub seed: u64,
    pub samples: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            sigma_db: 6.0,
            shadowing: Shadowing::Standard,
            p_r: 1.0,
            lambda_bs: 1.0 / (PI * 500.0 * 500.0),
            sigma_r: 4.0,
            n_t: 4,
            n_r: 2,
            m: 1.0,
            p_ant: 1.0,
            vary: None,
            values: Vec::new(),
            y_min: 1e-12,
            y_max: 1e-8,
            points: 201,
            axis: CapacityAxis::CoopAntennas,
            cbs: vec![1, 2, 3],
            n_b: 2,
            n_t_c: 2,
            r_b: 500.0,
            interferer_n_t: 2,
            r_max: None,
            seed: 0,
            samples: 100_000,
        }
    }
}

/// Reads a `key = value` file. Blank lines and `#` comments are skipped.
pub fn read_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    parse_pairs(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
    }
    Ok(out)
}

fn number(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ConfigError(format!("{key}: expected a number, got {v:?}")))
}

/// Accepts `100000`, `1e5` and the like, as long as the value is integral.
fn count<T: TryFrom<u64>>(key: &str, v: &str) -> Result<T> {
    let bad = || ConfigError(format!("{key}: expected a non-negative integer, got {v:?}"));
    let n = match v.parse::<u64>() {
        Ok(n) => n,
        Err(_) => {
            let x = v.parse::<f64>().map_err(|_| bad())?;
            if !(x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64) {
                return Err(bad());
            }
            x as u64
        }
    };
    T::try_from(n).map_err(|_| bad())
}

fn list<T>(key: &str, v: &str, item: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect::<Result<Vec<_>>>()
        .and_then(|l| {
            if l.is_empty() {
                Err(ConfigError(format!("{key}: empty list")))
            } else {
                Ok(l)
            }
        })
}

impl Settings {
    /// Applies one key, rejecting unknown keys and malformed values.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "sigma_db" => self.sigma_db = number(key, v)?,
            "shadowing" => {
                self.shadowing = match v.to_ascii_lowercase().as_str() {
                    "standard" => Shadowing::Standard,
                    "mean_matched" => Shadowing::MeanMatched,
                    _ => {
                        return Err(ConfigError(format!(
                            "shadowing: expected standard or mean_matched, got {v:?}"
                        )))
                    }
                }
            }
            "p_r" => self.p_r = number(key, v)?,
            "lambda_bs" => self.lambda_bs = number(key, v)?,
            "sigma_r" => self.sigma_r = number(key, v)?,
            "n_t" => self.n_t = count(key, v)?,
            "n_r" => self.n_r = count(key, v)?,
            "m" => self.m = number(key, v)?,
            "p_ant" => self.p_ant = number(key, v)?,
            "vary" => self.vary = Some(v.parse()?),
            "values" => self.values = list(key, v, number)?,
            "y_min" => self.y_min = number(key, v)?,
            "y_max" => self.y_max = number(key, v)?,
            "points" => self.points = count(key, v)?,
            "axis" => self.axis = v.parse()?,
            "cbs" => self.cbs = list(key, v, count)?,
            "n_b" => self.n_b = count(key, v)?,
            "n_t_c" => self.n_t_c = count(key, v)?,
            "r_b" => self.r_b = number(key, v)?,
            "interferer_n_t" => self.interferer_n_t = count(key, v)?,
            "r_max" => self.r_max = Some(number(key, v)?),
            "seed" => self.seed = count(key, v)?,
            "samples" => self.samples = count(key, v)?,
            _ => return Err(ConfigError(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    pub fn network(&self) -> NetworkParams {
        NetworkParams {
            lambda_bs: self.lambda_bs,
            sigma_r: self.sigma_r,
            n_t: self.n_t,
            n_r: self.n_r,
            m: self.m,
            p_ant: self.p_ant,
        }
    }

    pub fn shadowing_params(&self) -> Result<ShadowingParams> {
        Ok(match self.shadowing {
            Shadowing::Standard => ShadowingParams::from_sigma_db(self.sigma_db, self.p_r)?,
            Shadowing::MeanMatched => ShadowingParams::mean_matched(self.sigma_db, self.p_r)?,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max.unwrap_or(100.0 / (PI * self.lambda_bs).sqrt())
    }

    /// Checks the physical parameters shared by every command.
    pub fn validate(&self) -> Result<()> {
        self.network().validate()?;
        self.shadowing_params()?;
        if !(self.y_min > 0.0 && self.y_max > self.y_min) {
            return Err(ConfigError(
                "y_min and y_max must satisfy 0 < y_min < y_max".into(),
            ));
        }
        if self.points < 2 {
            return Err(ConfigError("points must be at least 2".into()));
        }
        if !(self.r_b > 0.0) {
            return Err(ConfigError("r_b must be positive".into()));
        }
        if !(self.r_max() > 0.0) {
            return Err(ConfigError("r_max must be positive".into()));
        }
        if self.interferer_n_t == 0 {
            return Err(ConfigError("interferer_n_t must be at least 1".into()));
        }
        Ok(())
    }

    fn value_of(&self, key: &str) -> String {
        let join = |v: Vec<String>| v.join(";");
        let num = num_text;
        match key {
            "sigma_db" => num(self.sigma_db),
            "shadowing" => match self.shadowing {
                Shadowing::Standard => "standard".into(),
                Shadowing::MeanMatched => "mean_matched".into(),
            },
            "p_r" => num(self.p_r),
            "lambda_bs" => num(self.lambda_bs),
            "sigma_r" => num(self.sigma_r),
            "n_t" => self.n_t.to_string(),
            "n_r" => self.n_r.to_string(),
            "m" => num(self.m),
            "p_ant" => num(self.p_ant),
            "vary" => self.vary.map_or("none".into(), |p| p.name().into()),
            "values" => join(self.values.iter().copied().map(num_text).collect()),
            "y_min" => num(self.y_min),
            "y_max" => num(self.y_max),
            "points" => self.points.to_string(),
            "axis" => self.axis.name().into(),
            "cbs" => join(self.cbs.iter().map(u32::to_string).collect()),
            "n_b" => self.n_b.to_string(),
            "n_t_c" => self.n_t_c.to_string(),
            "r_b" => num(self.r_b),
            "interferer_n_t" => self.interferer_n_t.to_string(),
            "r_max" => num(self.r_max()),
            "seed" => self.seed.to_string(),
            "samples" => self.samples.to_string(),
            _ => unreachable!("unlisted key {key}"),
        }
    }

    /// The full resolved parameter set, headed by command and version.
    pub fn header(&self, command: &str) -> Vec<(String, String)> {
        let mut out = vec![
            ("command".to_string(), command.to_string()),
            ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ];
        out.extend(KEYS.iter().map(|k| (k.to_string(), self.value_of(k))));
        out
    }
}

/// Shortest round-trip text, in exponent form for very small or large values.
fn num_text(x: f64) -> String {
    if x != 0.0 && !(1e-3..1e7).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Defaults, overlaid by `file` pairs and then by `flags`, in order.
pub fn resolve(file: &[(String, String)], flags: &[(String, String)]) -> Result<Settings> {
    let mut s = Settings::default();
    for (k, v) in file.iter().chain(flags) {
        s.set(k, v)?;
    }
    Ok(s)
}
