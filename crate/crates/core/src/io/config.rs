//! TOML run configuration.
//!
//! ```toml
//! [experiment]
//! tx_counts = [1, 2, 4]
//! rx_counts = [1, 2, 4]
//! diagonal = true
//! realizations = 200
//! transmit_power_dbm = 36.0
//! path_loss_db = 66.0
//! schemes = ["opt-pixel", "svd-pixel", "opt-fixed", "svd-fixed"]
//! base_seed = 0
//! fixed_baseline = { kind = "all-short" }
//!
//! [antenna]
//! synthetic = { q_switches = 16, k_angles = 72, target_n_eff = 4, seed = 1 }
//! # dataset = "antenna.json"
//!
//! [rectenna]
//! taylor_order = 4
//!
//! [optimizer]
//! sebo_block_size = 4
//! ao_max_iters = 20
//! ```
//!
//! Every section and field is optional. A relative dataset path is resolved
//! against the directory holding the configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::synthetic::SyntheticAntennaSpec;
use crate::optimizer::OptimizerConfig;
use crate::rectenna::RectennaParams;
use crate::simulation::{AntennaSource, ExperimentConfig, FixedBaseline, Scheme};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentSection,
    pub antenna: AntennaSection,
    pub rectenna: RectennaSection,
    pub optimizer: OptimizerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub tx_counts: Vec<usize>,
    pub rx_counts: Vec<usize>,
    pub diagonal: bool,
    pub realizations: usize,
    pub transmit_power_dbm: f64,
    pub path_loss_db: f64,
    pub schemes: Vec<Scheme>,
    pub base_seed: u64,
    pub energy_fraction: f64,
    pub fixed_baseline: FixedBaseline,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let d = ExperimentConfig::default();
        Self {
            tx_counts: d.tx_counts,
            rx_counts: d.rx_counts,
            diagonal: d.diagonal,
            realizations: d.realizations,
            transmit_power_dbm: d.transmit_power_dbm,
            path_loss_db: d.path_loss_db,
            schemes: d.schemes,
            base_seed: d.base_seed,
            energy_fraction: d.energy_fraction,
            fixed_baseline: d.fixed_baseline,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaSection {
    pub dataset: Option<PathBuf>,
    pub synthetic: Option<SyntheticAntennaSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RectennaSection {
    pub r_ant: f64,
    pub r_load: f64,
    pub ideality: f64,
    pub thermal_voltage: f64,
    pub taylor_order: usize,
}

impl Default for RectennaSection {
    fn default() -> Self {
        Self::from(RectennaParams::default())
    }
}

impl From<RectennaParams<f64>> for RectennaSection {
    fn from(p: RectennaParams<f64>) -> Self {
        Self {
            r_ant: p.r_ant,
            r_load: p.r_load,
            ideality: p.ideality,
            thermal_voltage: p.thermal_voltage,
            taylor_order: p.taylor_order,
        }
    }
}

impl From<&RectennaSection> for RectennaParams<f64> {
    fn from(s: &RectennaSection) -> Self {
        Self {
            r_ant: s.r_ant,
            r_load: s.r_load,
            ideality: s.ideality,
            thermal_voltage: s.thermal_voltage,
            taylor_order: s.taylor_order,
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut file = Self::parse(&text, path)?;
        if let (Some(dataset), Some(dir)) = (&file.antenna.dataset, path.parent()) {
            if dataset.is_relative() {
                file.antenna.dataset = Some(dir.join(dataset));
            }
        }
        Ok(file)
    }

    /// Experiment configuration; `path` labels errors.
    pub fn experiment_config(&self, path: &Path) -> Result<ExperimentConfig> {
        let e = &self.experiment;
        let antenna_source = match (&self.antenna.dataset, &self.antenna.synthetic) {
            (Some(_), Some(_)) => {
                return Err(Error::Schema {
                    path: path.to_path_buf(),
                    message: "section `antenna`: give either `dataset` or `synthetic`, not both".into(),
                })
            }
            (Some(p), None) => AntennaSource::Dataset(p.clone()),
            (None, Some(spec)) => AntennaSource::Synthetic(spec.clone()),
            (None, None) => AntennaSource::default(),
        };
        let config = ExperimentConfig {
            tx_counts: e.tx_counts.clone(),
            rx_counts: e.rx_counts.clone(),
            diagonal: e.diagonal,
            realizations: e.realizations,
            transmit_power_dbm: e.transmit_power_dbm,
            path_loss_db: e.path_loss_db,
            schemes: e.schemes.clone(),
            base_seed: e.base_seed,
            antenna_source,
            energy_fraction: e.energy_fraction,
            fixed_baseline: e.fixed_baseline,
            rectenna: (&self.rectenna).into(),
            optimizer: self.optimizer,
        };
        config.validate().map_err(|err| Error::Schema {
            path: path.to_path_buf(),
            message: err.to_string(),
        })?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let file = ConfigFile::parse("", Path::new("c.toml")).unwrap();
        let cfg = file.experiment_config(Path::new("c.toml")).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn sections_override_defaults() {
        let text = r#"
            [experiment]
            tx_counts = [2]
            rx_counts = [3]
            realizations = 5
            schemes = ["svd-fixed"]
            fixed_baseline = { kind = "random", seed = 9 }

            [antenna]
            synthetic = { q_switches = 16, k_angles = 12, target_n_eff = 4, seed = 2 }

            [rectenna]
            taylor_order = 2

            [optimizer]
            sebo_block_size = 2
            gradient = "finite-difference"
        "#;
        let cfg = ConfigFile::parse(text, Path::new("c.toml"))
            .unwrap()
            .experiment_config(Path::new("c.toml"))
            .unwrap();
        assert_eq!(cfg.grid(), vec![(2, 3)]);
        assert_eq!(cfg.schemes, vec![Scheme::SVD_FIXED]);
        assert_eq!(cfg.fixed_baseline, FixedBaseline::Random { seed: 9 });
        assert_eq!(cfg.rectenna.taylor_order, 2);
        assert_eq!(cfg.optimizer.sebo_block_size, 2);
        match cfg.antenna_source {
            AntennaSource::Synthetic(s) => assert_eq!((s.q_switches, s.target_n_eff), (16, 4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_reports_location() {
        let err = ConfigFile::parse("[experiment]\nrealisations = 3\n", Path::new("c.toml")).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }));
        let text = err.to_string();
        assert!(text.contains("realisations") && text.contains("line 2"), "{text}");
    }

    #[test]
    fn invalid_values_are_schema_errors() {
        let file = ConfigFile::parse("[experiment]\nrealizations = 0\n", Path::new("c.toml")).unwrap();
        assert!(matches!(file.experiment_config(Path::new("c.toml")), Err(Error::Schema { .. })));
        let bad_scheme = ConfigFile::parse("[experiment]\nschemes = [\"opt-dish\"]\n", Path::new("c.toml"));
        assert!(bad_scheme.is_err());
    }
}
