//! JSON run configuration for the command-line front end.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "system": "custom",
//!   "lagrangian": "0.5*q1^2 - 0.5*w^2*q0^2",
//!   "params": { "w": 1.0 },
//!   "grid": { "a": 0.0, "b": 6.0, "n": 1001 },
//!   "boundary": { "left": [[0, 0.0]], "right": [[0, -0.279415498198926]] }
//! }
//! ```
//!
//! Unknown keys are rejected at every level. Complex values are written as
//! `[re, im]`.

use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::dsl::{parse_with, ParseOptions, Params, Var};
use crate::error::{Error, Result};
use crate::fracops::UniformGrid;
use crate::lagrangian::{uniform_ladder, Convention, LagrangianSpec, DAMPED, PAIS_UHLENBECK};
use crate::pathint::CorrelatorOptions;
use crate::solver::{BoundaryData, SolverOptions};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    /// Pais-Uhlenbeck oscillator; parameters `eps`, `w`.
    Pu,
    /// Half-order damped oscillator; parameters `m`, `g`, `k`.
    Damped,
    /// Lagrangian given as DSL text.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Number> for Complex64 {
    fn from(n: Number) -> Self {
        match n {
            Number::Real(x) => Complex64::new(x, 0.0),
            Number::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(default)]
    pub left: Vec<(usize, Number)>,
    #[serde(default)]
    pub right: Vec<(usize, Number)>,
    #[serde(default)]
    pub left_momentum: Vec<(usize, Number)>,
    #[serde(default)]
    pub right_momentum: Vec<(usize, Number)>,
}

impl From<&BoundaryConfig> for BoundaryData {
    fn from(b: &BoundaryConfig) -> Self {
        let conv = |v: &[(usize, Number)]| v.iter().map(|&(l, x)| (l, x.into())).collect();
        BoundaryData::new(conv(&b.left), conv(&b.right)).with_momenta(conv(&b.left_momentum), conv(&b.right_momentum))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    /// Mode split for `pu`, marginalisation for `damped`, direct otherwise.
    #[default]
    Auto,
    /// Correlator of the Euclidean form itself.
    Direct,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub mode: KernelMode,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    /// Solution the others are measured against; defaults to the first alpha.
    #[serde(default)]
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub system: SystemKind,
    #[serde(default)]
    pub lagrangian: Option<String>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub ladder: Option<Vec<f64>>,
    #[serde(default)]
    pub params: BTreeMap<String, Number>,
    #[serde(default)]
    pub convention: Option<Convention>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub correlator: CorrelatorOptions,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub grid_n: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema {}; expected {SCHEMA_VERSION}", self.schema)));
        }
        match (self.system, &self.lagrangian) {
            (SystemKind::Custom, None) => return Err(Error::Config("system \"custom\" needs a \"lagrangian\"".into())),
            (SystemKind::Pu | SystemKind::Damped, Some(_)) => {
                return Err(Error::Config("\"lagrangian\" is only allowed with system \"custom\"".into()))
            }
            _ => {}
        }
        if self.system == SystemKind::Damped && (self.alpha.is_some_and(|a| a != 0.5) || self.ladder.is_some()) {
            return Err(Error::Config("the damped system has fixed alpha 0.5 and ladder [0, 0.5, 1]".into()));
        }
        if let Some(s) = &self.sweep {
            if s.alphas.is_empty() {
                return Err(Error::Config("sweep.alphas is empty".into()));
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, o: Overrides) -> Result<()> {
        if let Some(a) = o.alpha {
            if self.system == SystemKind::Damped && a != 0.5 {
                return Err(Error::Config("the damped system has fixed alpha 0.5".into()));
            }
            self.alpha = Some(a);
            if self.system == SystemKind::Custom {
                // an explicit ladder was built for the old alpha
                self.ladder = None;
            }
        }
        if let Some(n) = o.grid_n {
            let g = self.grid.as_mut().ok_or_else(|| Error::Config("--grid-n needs a \"grid\" section".into()))?;
            g.n = n;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<UniformGrid> {
        let g = self.grid.ok_or_else(|| Error::Config("missing \"grid\"".into()))?;
        UniformGrid::new(g.a, g.b, g.n).map_err(|e| Error::Config(e.to_string()))
    }

    fn params(&self, defaults: &[(&str, f64)]) -> Params {
        let mut p: Params = defaults.iter().map(|&(k, v)| (k.to_string(), Complex64::new(v, 0.0))).collect();
        p.extend(self.params.iter().map(|(k, v)| (k.clone(), Complex64::from(*v))));
        p
    }

    /// The configured system with `alpha` in place of the configured value.
    pub fn lagrangian_at(&self, alpha: f64) -> Result<LagrangianSpec> {
        let spec = match self.system {
            SystemKind::Pu => {
                let ladder = self.ladder.clone().unwrap_or_else(|| uniform_ladder(alpha, 2));
                LagrangianSpec::from_text(PAIS_UHLENBECK, alpha, ladder, self.params(&[("eps", 0.1), ("w", 1.0)]))?
            }
            SystemKind::Damped => LagrangianSpec::from_text(
                DAMPED,
                0.5,
                vec![0.0, 0.5, 1.0],
                self.params(&[("m", 1.0), ("g", 0.5), ("k", 4.0)]),
            )?
            .with_convention(Convention::Riewe),
            SystemKind::Custom => {
                let text = self.lagrangian.as_deref().unwrap_or_default();
                let params = self.params(&[]);
                let ladder = match &self.ladder {
                    Some(l) => l.clone(),
                    None => {
                        let opts = ParseOptions::default().params(params.keys().cloned());
                        let top = parse_with(text, &opts)?
                            .vars()
                            .into_iter()
                            .filter_map(|v| if let Var::Coord(l) = v { Some(l) } else { None })
                            .max()
                            .unwrap_or(0)
                            .max(1);
                        uniform_ladder(alpha, top)
                    }
                };
                LagrangianSpec::from_text(text, alpha, ladder, params)?
            }
        };
        Ok(match self.convention {
            Some(c) => spec.with_convention(c),
            None => spec,
        })
    }

    pub fn lagrangian(&self) -> Result<LagrangianSpec> {
        let default = if self.system == SystemKind::Damped { 0.5 } else { 1.0 };
        self.lagrangian_at(self.alpha.unwrap_or(default))
    }

    pub fn boundary(&self) -> Option<BoundaryData> {
        self.boundary.as_ref().map(BoundaryData::from)
    }

    /// Real parameter value, for the builtin systems' closed forms.
    pub fn real_param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).map_or(default, |v| Complex64::from(*v).re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHO: &str = r#"{"schema": 1, "system": "custom", "lagrangian": "0.5*q1^2 - 0.5*q0^2",
        "grid": {"a": 0, "b": 1, "n": 11}, "boundary": {"left": [[0, 0]], "right": [[0, [1, 0]]]}}"#;

    #[test]
    fn parses_and_builds() {
        let cfg = RunConfig::from_json(SHO).unwrap();
        let lag = cfg.lagrangian().unwrap();
        assert_eq!(lag.ladder(), &[0.0, 1.0]);
        assert_eq!(cfg.grid().unwrap().len(), 11);
        assert_eq!(cfg.boundary().unwrap(), BoundaryData::dirichlet(0.0, 1.0));
    }

    #[test]
    fn rejects_bad_configs() {
        let unknown = SHO.replacen("\"schema\": 1,", "\"schema\": 1, \"colour\": 3,", 1);
        assert!(matches!(RunConfig::from_json(&unknown), Err(Error::Config(_))));
        let nested = SHO.replacen("\"n\": 11", "\"n\": 11, \"dt\": 0.1", 1);
        assert!(matches!(RunConfig::from_json(&nested), Err(Error::Config(_))));
        let version = SHO.replacen("\"schema\": 1", "\"schema\": 2", 1);
        assert!(matches!(RunConfig::from_json(&version), Err(Error::Config(_))));
        assert!(RunConfig::from_json(r#"{"schema": 1, "system": "custom"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema": 1, "system": "damped", "alpha": 0.7}"#).is_err());
        assert!(RunConfig::from_json(r#"{"system": "pu"}"#).is_err());
    }

    #[test]
    fn overrides() {
        let mut cfg = RunConfig::from_json(SHO).unwrap();
        cfg.apply(Overrides { alpha: Some(0.75), grid_n: Some(21) }).unwrap();
        assert_eq!(cfg.lagrangian().unwrap().ladder(), &[0.0, 0.75]);
        assert_eq!(cfg.grid().unwrap().len(), 21);
        let pu = RunConfig::from_json(r#"{"schema": 1, "system": "pu", "params": {"eps": 0.2}}"#).unwrap();
        let lag = pu.lagrangian().unwrap();
        assert_eq!(lag.params()["eps"], Complex64::new(0.2, 0.0));
        assert_eq!(lag.params()["w"], Complex64::new(1.0, 0.0));
    }
}
