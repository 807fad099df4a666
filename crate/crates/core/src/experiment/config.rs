use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::ExperimentError;
use crate::mean::Mode;

/// Settings of a convergence, comparison or cost run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub d: usize,
    pub r: usize,
    pub p: f64,
    /// Target budgets, strictly ascending.
    pub grid: Vec<u64>,
    pub trials: usize,
    pub mode: Mode,
    pub seed: u64,
    pub delta: Option<f64>,
    pub c0: Option<f64>,
    pub out: Option<PathBuf>,
    /// Smooth-family member (`sin`, `exp`, `prod`) or `const` for `f ≡ 1`.
    pub function: String,
    /// Record wall-clock milliseconds per trial (breaks bit-reproducibility of the CSV).
    pub wall_time: bool,
    pub dither: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d: 1,
            r: 1,
            p: 2.0,
            grid: (7..=12).map(|e| 1u64 << e).collect(),
            trials: 100,
            mode: Mode::Semantic,
            seed: 0,
            delta: None,
            c0: None,
            out: None,
            function: "exp".into(),
            wall_time: false,
            dither: true,
        }
    }
}

const KEYS: &[&str] = &["d", "r", "p", "grid", "trials", "mode", "seed", "delta", "c0", "out", "function", "wall_time", "dither"];

impl ExperimentConfig {
    /// Parses flat `key = value` lines; `#` starts a comment. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| config_err(format!("line {}: expected key=value, got '{line}'", no + 1)))?;
            let ctx = |e: String| config_err(format!("line {}: {key}: {e}", no + 1));
            match key {
                "d" => cfg.d = parse_num(value).map_err(ctx)?,
                "r" => cfg.r = parse_num(value).map_err(ctx)?,
                "p" => cfg.p = parse_num(value).map_err(ctx)?,
                "grid" => cfg.grid = parse_grid(value).map_err(ctx)?,
                "trials" => cfg.trials = parse_num(value).map_err(ctx)?,
                "mode" => cfg.mode = value.parse().map_err(|e: crate::Error| ctx(e.to_string()))?,
                "seed" => cfg.seed = parse_num(value).map_err(ctx)?,
                "delta" => cfg.delta = Some(parse_num(value).map_err(ctx)?),
                "c0" => cfg.c0 = Some(parse_num(value).map_err(ctx)?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "function" => cfg.function = value.to_string(),
                "wall_time" => cfg.wall_time = parse_num(value).map_err(ctx)?,
                "dither" => cfg.dither = parse_num(value).map_err(ctx)?,
                other => {
                    return Err(config_err(format!(
                        "line {}: unknown key '{other}' (known: {})",
                        no + 1,
                        KEYS.join(", ")
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.d == 0 || self.d > 3 {
            return Err(config_err(format!("d = {} outside [1, 3]", self.d)));
        }
        if self.r == 0 || self.r > 8 {
            return Err(config_err(format!("r = {} outside [1, 8]", self.r)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(config_err(format!("p = {} must be finite and ≥ 1", self.p)));
        }
        if self.grid.is_empty() {
            return Err(config_err("grid is empty".into()));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("grid must be strictly ascending".into()));
        }
        if self.grid[0] < 2 {
            return Err(config_err("grid budgets must be at least 2".into()));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1".into()));
        }
        if self.mode == Mode::Statevec && self.d != 1 {
            return Err(config_err("state-vector mode supports d = 1 only".into()));
        }
        if !["sin", "exp", "prod", "const"].contains(&self.function.as_str()) {
            return Err(config_err(format!("function '{}' is not one of sin, exp, prod, const", self.function)));
        }
        Ok(())
    }
}

fn config_err(msg: String) -> ExperimentError {
    ExperimentError::Config(msg)
}

fn parse_num<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("'{v}': {e}"))
}

fn parse_budget(v: &str) -> Result<u64, String> {
    match v.split_once('^') {
        Some((b, e)) => {
            let (b, e): (u64, u32) = (parse_num(b.trim())?, parse_num(e.trim())?);
            b.checked_pow(e).ok_or_else(|| format!("'{v}' overflows"))
        }
        None => parse_num(v),
    }
}

/// `128, 256, 512` or `2^7..2^13` (powers of two, inclusive).
fn parse_grid(v: &str) -> Result<Vec<u64>, String> {
    if let Some((lo, hi)) = v.split_once("..") {
        let (lo, hi) = (parse_budget(lo.trim())?, parse_budget(hi.trim())?);
        if !lo.is_power_of_two() || !hi.is_power_of_two() || lo > hi {
            return Err(format!("range '{v}' needs powers of two with lo ≤ hi"));
        }
        let mut out = vec![lo];
        while *out.last().expect("nonempty") < hi {
            out.push(out.last().expect("nonempty") * 2);
        }
        return Ok(out);
    }
    v.split(',').map(|s| parse_budget(s.trim())).collect()
}
