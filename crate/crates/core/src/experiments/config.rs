//! Experiment configuration, presets and the flat `key = value` file format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "split")]
    Split,
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "jackknife+")]
    JackknifePlus,
    #[serde(rename = "cv+")]
    CvPlus,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Split,
        Method::Full,
        Method::JackknifePlus,
        Method::CvPlus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Split => "split",
            Method::Full => "full",
            Method::JackknifePlus => "jackknife+",
            Method::CvPlus => "cv+",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "split" => Ok(Method::Split),
            "full" => Ok(Method::Full),
            "jackknife+" | "jackknife" | "jk" | "jk+" => Ok(Method::JackknifePlus),
            "cv+" | "cv" | "cvplus" => Ok(Method::CvPlus),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Linear-Gaussian data with ridge regression.
    RidgeSim,
    /// Clock adversary against full conformal.
    AdversaryFull,
    /// Clock adversary against jackknife+.
    AdversaryJk,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::RidgeSim => "ridge_sim",
            Mode::AdversaryFull => "adversary_full",
            Mode::AdversaryJk => "adversary_jk",
        }
    }

    pub fn is_adversary(self) -> bool {
        self != Mode::RidgeSim
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ridge_sim" | "ridge" => Ok(Mode::RidgeSim),
            "adversary_full" => Ok(Mode::AdversaryFull),
            "adversary_jk" | "adversary_jackknife" => Ok(Mode::AdversaryJk),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// How full conformal is computed in ridge simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FullRoute {
    /// Closed-form exact set.
    Exact,
    /// Refit on a label grid around the training labels.
    Grid,
}

impl FromStr for FullRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(FullRoute::Exact),
            "grid" => Ok(FullRoute::Grid),
            other => Err(Error::Config(format!(
                "unknown full_route `{other}` (expected exact or grid)"
            ))),
        }
    }
}

/// Above this many ridge refits, the grid route needs `allow_expensive`.
pub const GRID_REFIT_BUDGET: f64 = 1e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n: usize,
    pub n_test: usize,
    /// Feature dimensions to sweep (ridge mode only).
    pub dims: Vec<usize>,
    pub alpha: f64,
    pub trials: usize,
    /// Methods to run (ridge mode only; adversary modes imply their method).
    pub methods: Vec<Method>,
    pub lambda: f64,
    /// Number of CV+ folds.
    pub folds: usize,
    pub seed: u64,
    /// Draw the coefficient vector once per dimension instead of once per trial.
    pub fixed_beta: bool,
    /// Partition size `M` for the adversaries; defaults to `n`.
    pub clock_cells: Option<usize>,
    pub full_route: FullRoute,
    /// Grid size for the grid route.
    pub grid_points: usize,
    pub allow_expensive: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::preset("smoke").expect("built-in preset")
    }
}

impl ExperimentConfig {
    pub const PRESETS: [&'static str; 3] = ["paper", "smoke", "adversary-demo"];

    pub fn preset(name: &str) -> Result<Self> {
        let ridge = |n, n_test, dims: Vec<usize>, trials, folds| Self {
            mode: Mode::RidgeSim,
            n,
            n_test,
            dims,
            alpha: 0.1,
            trials,
            methods: Method::ALL.to_vec(),
            lambda: 1e-4,
            folds,
            seed: 20_210_601,
            fixed_beta: false,
            clock_cells: None,
            full_route: FullRoute::Exact,
            grid_points: 2000,
            allow_expensive: false,
        };
        match name {
            "paper" => Ok(ridge(500, 1000, vec![125, 250, 500, 1000], 200, 20)),
            "smoke" => Ok(ridge(40, 200, vec![10], 20, 5)),
            "adversary-demo" => Ok(Self {
                mode: Mode::AdversaryJk,
                dims: vec![1],
                methods: vec![Method::JackknifePlus],
                clock_cells: Some(5000),
                ..ridge(5000, 1000, vec![1], 500, 20)
            }),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected one of {})",
                Self::PRESETS.join(", ")
            ))),
        }
    }

    pub fn clock_cells(&self) -> usize {
        self.clock_cells.unwrap_or(self.n)
    }

    /// Methods actually evaluated, in output order.
    pub fn active_methods(&self) -> Vec<Method> {
        match self.mode {
            Mode::RidgeSim => {
                let mut m = self.methods.clone();
                m.sort();
                m.dedup();
                m
            }
            Mode::AdversaryFull => vec![Method::Full],
            Mode::AdversaryJk => vec![Method::JackknifePlus],
        }
    }

    /// Dimensions actually swept.
    pub fn active_dims(&self) -> Vec<usize> {
        if self.mode.is_adversary() {
            vec![1]
        } else {
            self.dims.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.n_test == 0 || self.trials == 0 {
            return bad("n_test and trials must be positive".into());
        }
        if self.mode.is_adversary() {
            if self.clock_cells() < 2 {
                return bad(format!(
                    "clock_cells must be at least 2, got {}",
                    self.clock_cells()
                ));
            }
            return Ok(());
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dims must be a nonempty list of positive integers".into());
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            ));
        }
        let methods = self.active_methods();
        let needs_dual = methods
            .iter()
            .any(|m| matches!(m, Method::JackknifePlus | Method::CvPlus))
            || (methods.contains(&Method::Full) && self.full_route == FullRoute::Exact);
        if needs_dual && self.lambda == 0.0 {
            return bad("full conformal, jackknife+ and CV+ simulations need lambda > 0".into());
        }
        if methods.contains(&Method::CvPlus)
            && (self.folds < 2 || !self.n.is_multiple_of(self.folds))
        {
            return bad(format!(
                "CV+ needs 2 <= folds dividing n, got folds={} n={}",
                self.folds, self.n
            ));
        }
        if methods.contains(&Method::Full) && self.full_route == FullRoute::Grid {
            if self.grid_points < 2 {
                return bad("grid_points must be at least 2".into());
            }
            let refits = self.trials as f64
                * self.dims.len() as f64
                * self.n_test as f64
                * self.grid_points as f64;
            if refits > GRID_REFIT_BUDGET && !self.allow_expensive {
                return bad(format!(
                    "grid full conformal would need {refits:.3e} ridge refits; use full_route = exact or set allow_expensive = true"
                ));
            }
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
        }
        fn list<T: FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
            value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect()
        }
        match key.trim() {
            "mode" => self.mode = value.parse()?,
            "n" => self.n = num(key, value)?,
            "n_test" => self.n_test = num(key, value)?,
            "dims" | "d" => {
                self.dims = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| num(key, s))
                    .collect::<Result<_>>()?
            }
            "alpha" => self.alpha = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "methods" => self.methods = list(value)?,
            "lambda" => self.lambda = num(key, value)?,
            "folds" | "K" => self.folds = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "fixed_beta" => self.fixed_beta = num(key, value)?,
            "clock_cells" | "M" => {
                self.clock_cells = if value.is_empty() || value == "auto" {
                    None
                } else {
                    Some(num(key, value)?)
                }
            }
            "full_route" => self.full_route = value.parse()?,
            "grid_points" => self.grid_points = num(key, value)?,
            "allow_expensive" => self.allow_expensive = num(key, value)?,
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a flat config file: one `key = value` per line, `#` comments.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Renders the config in the flat file format.
    pub fn to_kv(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("mode", self.mode.to_string());
        put("n", self.n.to_string());
        put("n_test", self.n_test.to_string());
        put(
            "dims",
            join(self.dims.iter().map(|d| d.to_string()).collect()),
        );
        put("alpha", self.alpha.to_string());
        put("trials", self.trials.to_string());
        put(
            "methods",
            join(self.methods.iter().map(|m| m.to_string()).collect()),
        );
        put("lambda", self.lambda.to_string());
        put("folds", self.folds.to_string());
        put("seed", self.seed.to_string());
        put("fixed_beta", self.fixed_beta.to_string());
        put(
            "clock_cells",
            self.clock_cells.map_or("auto".into(), |m| m.to_string()),
        );
        put(
            "full_route",
            if self.full_route == FullRoute::Exact {
                "exact".into()
            } else {
                "grid".into()
            },
        );
        put("grid_points", self.grid_points.to_string());
        put("allow_expensive", self.allow_expensive.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in ExperimentConfig::PRESETS {
            ExperimentConfig::preset(name).unwrap().validate().unwrap();
        }
        let paper = ExperimentConfig::preset("paper").unwrap();
        assert_eq!(
            (paper.n, paper.n_test, paper.trials, paper.folds),
            (500, 1000, 200, 20)
        );
        assert_eq!(paper.dims, vec![125, 250, 500, 1000]);
        assert_eq!(paper.lambda, 1e-4);
        assert!(ExperimentConfig::preset("nope").is_err());
    }

    #[test]
    fn kv_round_trip() {
        let mut cfg = ExperimentConfig::preset("paper").unwrap();
        cfg.methods = vec![Method::CvPlus, Method::Split];
        cfg.clock_cells = Some(77);
        let mut back = ExperimentConfig::preset("smoke").unwrap();
        back.apply_kv(&cfg.to_kv()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn kv_parsing_and_errors() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_kv("# comment\nn = 60\n\nmethods = split, jk # trailing\nK = 4\n")
            .unwrap();
        assert_eq!(cfg.n, 60);
        assert_eq!(cfg.methods, vec![Method::Split, Method::JackknifePlus]);
        assert_eq!(cfg.folds, 4);
        assert!(cfg.apply_kv("n 60").is_err());
        assert!(cfg.apply_kv("colour = red").is_err());
        assert!(cfg.apply_kv("alpha = abc").is_err());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let cfg = ExperimentConfig {
            folds: 7,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig {
            lambda: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.methods = vec![Method::Split];
        assert!(cfg.validate().is_ok());
        let mut cfg = ExperimentConfig::preset("paper").unwrap();
        cfg.full_route = FullRoute::Grid;
        assert!(cfg.validate().is_err());
        cfg.allow_expensive = true;
        assert!(cfg.validate().is_ok());
        let cfg = ExperimentConfig {
            alpha: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
