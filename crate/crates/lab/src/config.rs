//! Flat `key = value` experiment configuration.
//!
//! One key per line, `#` starts a comment, blank lines are ignored and
//! unknown or repeated keys are rejected. Lists are comma-separated.
//!
//! ```text
//! experiment_id = rademacher-rate
//! model = iid_rademacher
//! n_grid = 16, 64, 256, 1024
//! p = 1.5
//! m = 200000
//! seed = 0x5EED
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use selfnorm_core::path::check_compatible;
use selfnorm_core::{BaseDistribution, Family, Model, ModelSpec, Statistic, TwoPoint};

use crate::error::{LabError, Result};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_DELTA: f64 = 0.01;

const KEYS: &[&str] = &[
    "experiment_id",
    "model",
    "base",
    "statistic",
    "n_grid",
    "alpha",
    "p",
    "m",
    "plug_in_m",
    "seed",
    "delta",
    "output",
    "two_point_a",
    "two_point_q",
    "student_nu",
    "theta",
    "sigma",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelChoice {
    Iid(BaseDistribution),
    Stationary(BaseDistribution),
    Sharpness,
    Ar1 {
        base: BaseDistribution,
        theta: f64,
        sigma: f64,
    },
}

impl ModelChoice {
    fn family(&self, alpha: Option<f64>) -> Family {
        match *self {
            ModelChoice::Iid(base) => Family::IidScaled { base },
            ModelChoice::Stationary(base) => Family::MultiplicativeStationary { base },
            ModelChoice::Sharpness => Family::Sharpness {
                alpha: alpha.unwrap_or(f64::NAN),
            },
            ModelChoice::Ar1 { base, theta, sigma } => Family::Ar1Noise { base, theta, sigma },
        }
    }

    fn default_statistic(&self) -> Statistic {
        match self {
            ModelChoice::Ar1 { .. } => Statistic::Ar1SelfNormalized,
            _ => Statistic::SelfNormalized,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub model: ModelChoice,
    pub statistic: Statistic,
    pub n_grid: Vec<usize>,
    /// Sharpness only: one value for every n, one per n, or an α-grid
    /// when `n_grid` has a single entry.
    pub alpha: Vec<f64>,
    pub p: f64,
    pub m: usize,
    pub plug_in_m: usize,
    pub seed: u64,
    pub delta: f64,
    pub output: Option<PathBuf>,
}

/// One grid point of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub alpha: Option<f64>,
    pub spec: ModelSpec,
}

impl Cell {
    pub fn describe(&self) -> String {
        match self.alpha {
            Some(a) => format!("n={} alpha={a}", self.n),
            None => format!("n={}", self.n),
        }
    }
}

impl ExperimentConfig {
    /// A config with defaults for everything but the model and grid.
    pub fn new(model: ModelChoice, n_grid: Vec<usize>, p: f64, m: usize) -> Self {
        Self {
            experiment_id: String::from("experiment"),
            model,
            statistic: model.default_statistic(),
            n_grid,
            alpha: Vec::new(),
            p,
            m,
            plug_in_m: m,
            seed: DEFAULT_SEED,
            delta: DEFAULT_DELTA,
            output: None,
        }
    }

    /// Grid cells in row order.
    pub fn cells(&self) -> Vec<Cell> {
        let mk = |n: usize, alpha: Option<f64>| Cell {
            n,
            alpha,
            spec: ModelSpec::new(self.model.family(alpha), n),
        };
        if self.model != ModelChoice::Sharpness {
            return self.n_grid.iter().map(|&n| mk(n, None)).collect();
        }
        match (self.n_grid.len(), self.alpha.len()) {
            (_, 1) => self.n_grid.iter().map(|&n| mk(n, Some(self.alpha[0]))).collect(),
            (1, _) => self.alpha.iter().map(|&a| mk(self.n_grid[0], Some(a))).collect(),
            _ => self
                .n_grid
                .iter()
                .zip(&self.alpha)
                .map(|(&n, &a)| mk(n, Some(a)))
                .collect(),
        }
    }

    /// Checks every field and builds each cell's model once.
    pub fn validate(&self) -> Result<()> {
        if self.experiment_id.is_empty() || self.experiment_id.contains(['\n', '\r']) {
            return Err(LabError::config("experiment_id", "must be a non-empty single line"));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(LabError::config("p", "p must exceed 1"));
        }
        if self.m == 0 {
            return Err(LabError::config("m", "must be at least 1"));
        }
        if self.plug_in_m == 0 {
            return Err(LabError::config("plug_in_m", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(LabError::config("delta", "must lie in (0, 1)"));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(LabError::config("n_grid", "expected a list of positive integers"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::config("n_grid", "n_grid must be strictly increasing"));
        }
        if self.model == ModelChoice::Sharpness {
            let (k, a) = (self.n_grid.len(), self.alpha.len());
            if a == 0 {
                return Err(LabError::config("alpha", "required for the sharpness model"));
            }
            if !(a == 1 || a == k || k == 1) {
                return Err(LabError::config(
                    "alpha",
                    "give one value, one per n, or use a single n",
                ));
            }
        } else if !self.alpha.is_empty() {
            return Err(LabError::config("alpha", "only applies to the sharpness model"));
        }
        for cell in self.cells() {
            let model = Model::new(cell.spec).map_err(core_config)?;
            check_compatible(&model, self.statistic).map_err(core_config)?;
        }
        Ok(())
    }

    /// Canonical `key = value` form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("experiment_id", self.experiment_id.clone());
        let (family, base) = match self.model {
            ModelChoice::Iid(b) => ("iid", Some(b)),
            ModelChoice::Stationary(b) => ("stationary", Some(b)),
            ModelChoice::Sharpness => ("sharpness", None),
            ModelChoice::Ar1 { base, .. } => ("ar1", Some(base)),
        };
        put("model", family.to_string());
        if let Some(b) = base {
            put("base", base_name(&b).to_string());
            match b {
                BaseDistribution::TwoPointAsymmetric(tp) => {
                    put("two_point_a", format!("{:?}", tp.atoms().0.signum()));
                    put("two_point_q", format!("{:?}", tp.q()));
                }
                BaseDistribution::StudentLike { nu } => put("student_nu", nu.to_string()),
                _ => {}
            }
        }
        if let ModelChoice::Ar1 { theta, sigma, .. } = self.model {
            put("theta", format!("{theta:?}"));
            put("sigma", format!("{sigma:?}"));
        }
        put("statistic", self.statistic.name().to_string());
        put("n_grid", join(&self.n_grid));
        if !self.alpha.is_empty() {
            put(
                "alpha",
                self.alpha
                    .iter()
                    .map(|a| format!("{a:?}"))
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        put("p", format!("{:?}", self.p));
        put("m", self.m.to_string());
        put("plug_in_m", self.plug_in_m.to_string());
        put("seed", format!("{:#x}", self.seed));
        put("delta", format!("{:?}", self.delta));
        if let Some(o) = &self.output {
            put("output", o.display().to_string());
        }
        out
    }
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn core_config(e: selfnorm_core::Error) -> LabError {
    match e {
        selfnorm_core::Error::Config { field, reason } => LabError::config(field, reason),
        other => LabError::config("model", other.to_string()),
    }
}

pub fn base_name(b: &BaseDistribution) -> &'static str {
    match b {
        BaseDistribution::StandardNormal => "normal",
        BaseDistribution::Rademacher => "rademacher",
        BaseDistribution::TwoPointAsymmetric(_) => "two_point",
        BaseDistribution::StudentLike { .. } => "student",
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(LabError::config(format!("line {}", i + 1), "expected `key = value`"));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(LabError::config(k, "unknown key"));
        }
        if kv.insert(k, v).is_some() {
            return Err(LabError::config(k, "given more than once"));
        }
    }
    let mut fields = Fields(kv);

    let model_text = fields
        .take("model")
        .ok_or_else(|| LabError::config("model", "required"))?;
    let (family, suffix) = match model_text.split_once('_') {
        Some((f, b)) => (f, Some(b)),
        None => (model_text, None),
    };
    let base_text = match (suffix, fields.take("base")) {
        (Some(a), Some(b)) if a != b => {
            return Err(LabError::config("base", format!("conflicts with model `{model_text}`")));
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => "normal",
    };
    let two_point_a = fields.parse::<f64>("two_point_a", "a real number")?;
    let two_point_q = fields.parse::<f64>("two_point_q", "a real number in (0, 1)")?;
    let student_nu = fields.parse::<u32>("student_nu", "an integer >= 3")?;
    let base = match base_text {
        "normal" | "standard_normal" | "gaussian" => BaseDistribution::StandardNormal,
        "rademacher" => BaseDistribution::Rademacher,
        "two_point" => {
            let q = two_point_q.ok_or_else(|| LabError::config("two_point_q", "required for base two_point"))?;
            let tp = TwoPoint::new(two_point_a.unwrap_or(1.0), q).map_err(core_config)?;
            BaseDistribution::TwoPointAsymmetric(tp)
        }
        "student" => BaseDistribution::StudentLike {
            nu: student_nu.ok_or_else(|| LabError::config("student_nu", "required for base student"))?,
        },
        other => {
            return Err(LabError::config(
                "base",
                format!("expected normal, rademacher, two_point or student, got `{other}`"),
            ));
        }
    };
    if base_text != "two_point" && (two_point_a.is_some() || two_point_q.is_some()) {
        return Err(LabError::config("two_point_q", "only applies to base two_point"));
    }
    if base_text != "student" && student_nu.is_some() {
        return Err(LabError::config("student_nu", "only applies to base student"));
    }
    let theta = fields.parse::<f64>("theta", "a real number")?;
    let sigma = fields.parse::<f64>("sigma", "a positive real number")?;
    let model = match family {
        "iid" => ModelChoice::Iid(base),
        "stationary" => ModelChoice::Stationary(base),
        "sharpness" if suffix.is_none() => ModelChoice::Sharpness,
        "ar1" => ModelChoice::Ar1 {
            base,
            theta: theta.ok_or_else(|| LabError::config("theta", "required for the ar1 model"))?,
            sigma: sigma.unwrap_or(1.0),
        },
        _ => {
            return Err(LabError::config(
                "model",
                format!("expected iid_<base>, stationary_<base>, sharpness or ar1_<base>, got `{model_text}`"),
            ));
        }
    };
    if !matches!(model, ModelChoice::Ar1 { .. }) && (theta.is_some() || sigma.is_some()) {
        return Err(LabError::config("theta", "theta and sigma only apply to the ar1 model"));
    }

    let n_grid = fields
        .list::<usize>("n_grid", "comma-separated positive integers")?
        .ok_or_else(|| LabError::config("n_grid", "required"))?;
    let p = fields
        .parse::<f64>("p", "a real number > 1")?
        .ok_or_else(|| LabError::config("p", "required"))?;
    let m = fields
        .parse::<usize>("m", "a positive integer")?
        .ok_or_else(|| LabError::config("m", "required"))?;
    let mut cfg = ExperimentConfig::new(model, n_grid, p, m);
    cfg.experiment_id = fields
        .take("experiment_id")
        .map(String::from)
        .unwrap_or_else(|| model_text.to_string());
    if let Some(s) = fields.take("statistic") {
        cfg.statistic = Statistic::from_name(s).ok_or_else(|| {
            LabError::config(
                "statistic",
                "expected self_normalized, variance_normalized, student_t or ar1_self_normalized",
            )
        })?;
    }
    cfg.alpha = fields
        .list::<f64>("alpha", "comma-separated reals in (0, 1]")?
        .unwrap_or_default();
    if let Some(v) = fields.parse::<usize>("plug_in_m", "a positive integer")? {
        cfg.plug_in_m = v;
    }
    if let Some(s) = fields.take("seed") {
        cfg.seed = parse_seed(s)?;
    }
    if let Some(d) = fields.parse::<f64>("delta", "a real number in (0, 1)")? {
        cfg.delta = d;
    }
    cfg.output = fields.take("output").map(PathBuf::from);
    cfg.validate()?;
    Ok(cfg)
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| LabError::config("seed", "expected a 64-bit unsigned integer (decimal or 0x hex)"))
}

struct Fields<'a>(BTreeMap<&'a str, &'a str>);

impl<'a> Fields<'a> {
    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.0.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, expected: &str) -> Result<Option<T>> {
        self.take(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| LabError::config(key, format!("expected {expected}, got `{v}`")))
            })
            .transpose()
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str, expected: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.take(key) else { return Ok(None) };
        v.split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| LabError::config(key, format!("expected {expected}, got `{v}`")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }
}
