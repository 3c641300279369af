//! Run configuration read from `--config path.json`.

use magthresh::expansion::RadialGrid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Every field is optional in the file; missing fields take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Absolute tolerance for adaptive quadrature. Validated and echoed; the
    /// library paths behind the subcommands use fixed composite rules.
    pub abs_tol: f64,
    /// Relative tolerance for adaptive quadrature, handled like `abs_tol`.
    pub rel_tol: f64,
    /// Channel cutoff for full-kernel sums.
    pub m_max: i64,
    /// Radial grid for weighted norms and Nyström systems.
    pub grid: GridConfig,
    /// Outer radius of the radial grid.
    pub r_cut: f64,
    /// Energy cutoff `Λ` of the time-decay quadrature.
    pub energy_cutoff: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub r_min: f64,
    pub panels_per_decade: usize,
    pub order: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { r_min: 1e-3, panels_per_decade: 12, order: 8 }
    }
}

impl Default for Config {
    fn default() -> Self {
        Config { abs_tol: 1e-10, rel_tol: 1e-8, m_max: 40, grid: GridConfig::default(), r_cut: 50.0, energy_cutoff: 20.0, seed: 1 }
    }
}

impl Config {
    pub fn load(path: Option<&str>) -> Result<Self, String> {
        let cfg = match path {
            None => Config::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read config {p}: {e}"))?;
                serde_json::from_str(&text).map_err(|e| format!("bad config {p}: {e}"))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        let pos = |name: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(format!("{name} must be positive, got {v}")) };
        pos("abs_tol", self.abs_tol)?;
        pos("rel_tol", self.rel_tol)?;
        pos("grid.r_min", self.grid.r_min)?;
        pos("r_cut", self.r_cut)?;
        pos("energy_cutoff", self.energy_cutoff)?;
        if self.m_max < 5 {
            return Err(format!("m_max must be at least 5, got {}", self.m_max));
        }
        if self.r_cut <= self.grid.r_min {
            return Err("r_cut must exceed grid.r_min".into());
        }
        if self.grid.panels_per_decade == 0 || self.grid.order < 2 {
            return Err("grid needs at least one panel per decade and order >= 2".into());
        }
        Ok(())
    }

    pub fn radial_grid(&self) -> Result<RadialGrid, magthresh::Error> {
        RadialGrid::new(self.grid.r_min, self.r_cut, self.grid.panels_per_decade, self.grid.order)
    }

    /// SHA-256 of the compact JSON form with sorted keys (the form echoed in
    /// JSON output), hex encoded.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let bytes = serde_json::to_vec(&value).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_hash_is_stable() {
        let c = Config::default();
        assert!(c.validate().is_ok());
        assert_eq!(c.hash(), Config::default().hash());
        assert_eq!(c.hash().len(), 64);
        let mut d = c.clone();
        d.seed = 2;
        assert_ne!(c.hash(), d.hash());
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c: Config = serde_json::from_str(r#"{"m_max": 10, "grid": {"order": 6}}"#).unwrap();
        assert_eq!(c.m_max, 10);
        assert_eq!(c.grid.order, 6);
        assert_eq!(c.grid.r_min, 1e-3);
        let bad = Config { abs_tol: 0.0, ..Config::default() };
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<Config>(r#"{"typo": 1}"#).is_err());
    }
}
