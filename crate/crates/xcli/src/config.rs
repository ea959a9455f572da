//! Experiment configuration: a TOML file, overridden by command-line flags,
//! resolved into field, map and domain objects.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use fqapprox::dioph::ApproxFn;
use fqapprox::ffield::{GridSpec, QExp};
use fqapprox::ultracalc::{AnalyticMap, MultiPoly};
use fqapprox::{Ball, FieldSpec, Laurent};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A polynomial map `F^d → F^n` with optional shift θ, in the `MultiPoly`
/// text syntax (`x` when d = 1, `x1, x2, …` otherwise).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default = "one")]
    pub d: usize,
    pub components: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
}

fn one() -> usize {
    1
}

impl MapSpec {
    pub fn veronese(n: usize) -> Self {
        let components = (1..=n).map(|k| if k == 1 { "x".to_string() } else { format!("x^{k}") }).collect();
        MapSpec { d: 1, components, theta: None }
    }

    pub fn build(&self, spec: &Arc<FieldSpec>) -> Result<AnalyticMap, CliError> {
        let comps =
            self.components.iter().map(|s| MultiPoly::parse(spec, self.d, s)).collect::<fqapprox::Result<Vec<_>>>()?;
        let theta = self.theta.as_deref().map(|s| MultiPoly::parse(spec, self.d, s)).transpose()?;
        Ok(AnalyticMap::new(comps, theta)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QnConfig {
    /// `D = diag(X^{-e0}, X^{-estar}…, X^{-e_i}…)`; ignored when `tvec` is set.
    pub e0: i64,
    pub estar: i64,
    pub e: Vec<i64>,
    /// Small-gradient parameters; when `tvec` is nonempty D comes from them.
    pub t: i64,
    pub t_prime: i64,
    pub tvec: Vec<i64>,
    pub eps_exps: Vec<i64>,
    pub max_depth: i64,
    /// Hermite height of the primitive submodules used for the empirical ρ.
    pub rho_height: i64,
}

impl Default for QnConfig {
    fn default() -> Self {
        QnConfig {
            e0: -10,
            estar: 0,
            e: vec![5, 5],
            t: 0,
            t_prime: 0,
            tvec: vec![],
            eps_exps: vec![-1, -2, -3, -4, -5],
            max_depth: 40,
            rho_height: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UbiquityConfig {
    pub ts: Vec<i64>,
    pub delta_exp: String,
    /// Hausdorff exponent s of the divergence sum; defaults to d.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    /// Upper index T of the divergence sum and of the φ-hit count.
    pub big_t: i64,
    pub audit_witnesses: bool,
}

impl Default for UbiquityConfig {
    fn default() -> Self {
        UbiquityConfig { ts: vec![1, 2], delta_exp: "-1".into(), s: None, big_t: 2, audit_witnesses: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Field order q.
    pub field: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_file: Option<PathBuf>,
    /// Inline map; takes the map file's content once resolved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    /// Shorthand for the Veronese curve of this dimension (default 2).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub veronese: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    /// Apply θ where the experiment allows either.
    pub theta: bool,
    pub grid: i64,
    /// Domain ball; an empty center means the origin.
    pub domain_center: Vec<String>,
    pub domain_radius: i64,
    pub shells: [i64; 2],
    pub delta_exps: Vec<String>,
    pub eps: String,
    /// Explicit t-vectors for the big-gradient sweep; empty means every
    /// vector with entries in `0..=tmax`.
    pub tvecs: Vec<Vec<i64>>,
    pub tmax: i64,
    /// Sweep adaptively to this radius exponent instead of sampling cell centers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_depth: Option<i64>,
    pub qn: QnConfig,
    pub ubiquity: UbiquityConfig,
    pub seed: u64,
    pub max_cells: u64,
    pub max_tuples: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            field: 3,
            map_file: None,
            map: None,
            veronese: None,
            psi: None,
            theta: true,
            grid: 4,
            domain_center: vec![],
            domain_radius: 1,
            shells: [0, 2],
            delta_exps: vec!["-1".into(), "-2".into(), "-3".into()],
            eps: "1/4".into(),
            tvecs: vec![],
            tmax: 2,
            sweep_depth: None,
            qn: QnConfig::default(),
            ubiquity: UbiquityConfig::default(),
            seed: 0,
            max_cells: 1_000_000,
            max_tuples: 100_000,
            out: None,
        }
    }
}

/// Flags that override the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub field: Option<u32>,
    pub map: Option<PathBuf>,
    pub psi: Option<String>,
    pub grid: Option<i64>,
    pub shells: Option<[i64; 2]>,
    pub out: Option<PathBuf>,
    pub max_cells: Option<u64>,
    pub max_tuples: Option<u64>,
}

pub fn parse_shells(s: &str) -> Result<[i64; 2], CliError> {
    let bad = || CliError::Config(format!("shell range {s:?} is not T0:T1"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok([a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?])
}

pub fn parse_qexp(s: &str) -> Result<QExp, CliError> {
    s.trim().parse::<QExp>().map_err(|_| CliError::Config(format!("bad exponent {s:?}")))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: ExperimentConfig = toml::from_str(&text)?;
        // Relative map paths are relative to the config file.
        if let (Some(m), Some(dir)) = (&cfg.map_file, path.parent()) {
            if m.is_relative() {
                cfg.map_file = Some(dir.join(m));
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(q) = o.field {
            self.field = q;
        }
        if let Some(m) = &o.map {
            self.map_file = Some(m.clone());
            self.map = None;
        }
        if let Some(p) = &o.psi {
            self.psi = Some(p.clone());
        }
        if let Some(n) = o.grid {
            self.grid = n;
        }
        if let Some(s) = o.shells {
            self.shells = s;
        }
        if let Some(d) = &o.out {
            self.out = Some(d.clone());
        }
        if let Some(c) = o.max_cells {
            self.max_cells = c;
        }
        if let Some(t) = o.max_tuples {
            self.max_tuples = t;
        }
    }

    /// Inline the map file so that the serialized config replays on its own.
    pub fn resolve_map(&mut self) -> Result<(), CliError> {
        if self.map.is_none() {
            self.map = Some(match &self.map_file {
                Some(p) => toml::from_str(&std::fs::read_to_string(p)?)?,
                None => MapSpec::veronese(self.veronese.unwrap_or(2)),
            });
        }
        Ok(())
    }

    pub fn setup(&mut self) -> Result<Setup, CliError> {
        self.resolve_map()?;
        let spec = FieldSpec::with_order(self.field)?;
        let map = self.map.as_ref().expect("resolved above").build(&spec)?;
        let d = map.d();
        let center = if self.domain_center.is_empty() {
            vec![Laurent::zero(&spec); d]
        } else {
            self.domain_center.iter().map(|s| Laurent::parse_body(&spec, s)).collect::<Result<Vec<_>, _>>()?
        };
        if center.len() != d {
            return Err(CliError::Config(format!("domain center has {} coordinates, map has d = {d}", center.len())));
        }
        let domain = Ball::new(center, self.domain_radius)?;
        let psi = self.psi.as_deref().map(str::parse::<ApproxFn>).transpose()?;
        Ok(Setup { spec, map, domain, psi, max_cells: self.max_cells as u128, max_tuples: self.max_tuples as u128 })
    }
}

pub struct Setup {
    pub spec: Arc<FieldSpec>,
    pub map: AnalyticMap,
    pub domain: Ball,
    pub psi: Option<ApproxFn>,
    pub max_cells: u128,
    pub max_tuples: u128,
}

impl Setup {
    /// The resolution-N grid on the domain, within the cell budget.
    pub fn grid(&self, n: i64) -> Result<GridSpec, CliError> {
        let g = GridSpec::new(self.domain.clone(), n)?;
        if g.cell_count() > self.max_cells {
            return Err(CliError::Budget(format!("{} cells exceed the cap of {}", g.cell_count(), self.max_cells)));
        }
        Ok(g)
    }

    pub fn require_psi(&self) -> Result<&ApproxFn, CliError> {
        self.psi.as_ref().ok_or_else(|| CliError::Config("this experiment needs psi".into()))
    }

    pub fn check_tuples(&self, count: u128, what: &str) -> Result<(), CliError> {
        if count > self.max_tuples {
            return Err(CliError::Budget(format!("{what}: {count} tuples exceed the cap of {}", self.max_tuples)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn overrides_win() {
        let mut cfg: ExperimentConfig = toml::from_str("field = 2\ngrid = 3\nshells = [1, 2]").unwrap();
        cfg.apply(&Overrides { grid: Some(5), shells: Some([0, 4]), ..Default::default() });
        assert_eq!((cfg.field, cfg.grid, cfg.shells), (2, 5, [0, 4]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("gird = 3").is_err());
    }

    #[test]
    fn shells_parse() {
        assert_eq!(parse_shells("1:3").unwrap(), [1, 3]);
        assert!(parse_shells("13").is_err());
    }

    #[test]
    fn setup_builds_veronese_on_default_domain() {
        let mut cfg = ExperimentConfig::default();
        let s = cfg.setup().unwrap();
        assert_eq!((s.map.d(), s.map.n()), (1, 2));
        assert_eq!(cfg.map, Some(MapSpec::veronese(2)));
        assert_eq!(s.grid(4).unwrap().cell_count(), 27);
        cfg.max_cells = 10;
        assert!(matches!(cfg.setup().unwrap().grid(4), Err(CliError::Budget(_))));
    }
}
