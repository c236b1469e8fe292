//! JSON antenna dataset: impedance matrix and open-circuit patterns.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "q_switches": 2,
//!   "k_angles": 1,
//!   "frequency_hz": 2.4e9,
//!   "z_aa": [50.0, 0.0],
//!   "z_ap": [[1.0, 0.0], [1.0, 0.0]],
//!   "z_pp": [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [2.0, 0.0]]],
//!   "e_oc": [[[1.0, 0.0], [0.5, 0.0], [0.0, 1.0]], [[0.2, 0.0], [0.0, 0.0], [1.0, 0.0]]]
//! }
//! ```
//!
//! Complex values are `[re, im]`. `e_oc` is row-major with 2K rows (all θ
//! samples, then all φ samples) of Q+1 entries each.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::multiport::MultiportNetwork;
use crate::scalar::{cx, CMatrix, CVector, Cx, Real};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_FREQUENCY_HZ: f64 = 2.4e9;

type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaDataset {
    pub schema_version: u32,
    pub q_switches: usize,
    pub k_angles: usize,
    pub frequency_hz: f64,
    pub z_aa: Pair,
    pub z_ap: Vec<Pair>,
    pub z_pp: Vec<Vec<Pair>>,
    pub e_oc: Vec<Vec<Pair>>,
}

fn pair<T: Real>(z: Cx<T>) -> Pair {
    [z.re.as_f64(), z.im.as_f64()]
}

fn complex<T: Real>(p: &Pair) -> Cx<T> {
    cx(T::lit(p[0]), T::lit(p[1]))
}

fn rows<T: Real>(m: &CMatrix<T>) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| pair(m[(r, c)])).collect())
        .collect()
}

impl AntennaDataset {
    pub fn from_network<T: Real>(net: &MultiportNetwork<T>, frequency_hz: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            q_switches: net.q_switches(),
            k_angles: net.k_angles(),
            frequency_hz,
            z_aa: pair(net.z_aa()),
            z_ap: net.z_ap().iter().map(|z| pair(*z)).collect(),
            z_pp: rows(net.z_pp()),
            e_oc: rows(net.e_oc()),
        }
    }

    /// Check declared sizes against the arrays; `path` only labels errors.
    pub fn check_dimensions(&self, path: &Path) -> Result<()> {
        let err = |message: String| Error::Dimension {
            path: path.to_path_buf(),
            message,
        };
        let q = self.q_switches;
        if self.z_ap.len() != q {
            return Err(err(format!("z_ap has {} entries, expected q_switches = {q}", self.z_ap.len())));
        }
        if self.z_pp.len() != q {
            return Err(err(format!("z_pp has {} rows, expected {q}", self.z_pp.len())));
        }
        if let Some((r, row)) = self.z_pp.iter().enumerate().find(|(_, row)| row.len() != q) {
            return Err(err(format!("z_pp row {r} has {} entries, expected {q}", row.len())));
        }
        let k2 = 2 * self.k_angles;
        if self.e_oc.len() != k2 {
            return Err(err(format!(
                "e_oc has {} rows, expected 2 * k_angles = {k2}",
                self.e_oc.len()
            )));
        }
        if let Some((r, row)) = self.e_oc.iter().enumerate().find(|(_, row)| row.len() != q + 1) {
            return Err(err(format!("e_oc row {r} has {} entries, expected {}", row.len(), q + 1)));
        }
        Ok(())
    }

    pub fn to_network<T: Real>(&self) -> Result<MultiportNetwork<T>> {
        self.check_dimensions(Path::new("<dataset>"))?;
        let q = self.q_switches;
        let z_ap = CVector::from_fn(q, |r, _| complex(&self.z_ap[r]));
        let z_pp = CMatrix::from_fn(q, q, |r, c| complex(&self.z_pp[r][c]));
        let e_oc = CMatrix::from_fn(2 * self.k_angles, q + 1, |r, c| complex(&self.e_oc[r][c]));
        MultiportNetwork::new(complex(&self.z_aa), z_ap, z_pp, e_oc)
    }
}

pub fn load_dataset(path: &Path) -> Result<AntennaDataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let dataset: AntennaDataset = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if dataset.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            message: format!(
                "field `schema_version`: unsupported version {} (expected {SCHEMA_VERSION})",
                dataset.schema_version
            ),
        });
    }
    dataset.check_dimensions(path)?;
    Ok(dataset)
}

pub fn save_dataset(dataset: &AntennaDataset, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(dataset).expect("dataset serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn load_antenna(path: &Path) -> Result<MultiportNetwork<f64>> {
    load_dataset(path)?.to_network().map_err(|e| match e {
        Error::InvalidParameter(message) => Error::Schema {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

pub fn save_antenna<T: Real>(net: &MultiportNetwork<T>, path: &Path) -> Result<()> {
    save_dataset(&AntennaDataset::from_network(net, DEFAULT_FREQUENCY_HZ), path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::synthetic::{generate_synthetic_antenna, SyntheticAntennaSpec};

    #[test]
    fn save_load_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("antenna.json");
        let net = generate_synthetic_antenna::<f64>(&SyntheticAntennaSpec::new(5, 4, 3, 9)).unwrap();
        save_antenna(&net, &path).unwrap();
        let back = load_antenna(&path).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn truncated_file_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("antenna.json");
        let net = generate_synthetic_antenna::<f64>(&SyntheticAntennaSpec::new(3, 2, 2, 1)).unwrap();
        save_antenna(&net, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        let err = load_antenna(&path).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }), "{err}");
        assert!(err.to_string().contains("line"));
    }

    #[test]
    fn row_count_mismatch_is_dimension_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("antenna.json");
        let net = generate_synthetic_antenna::<f64>(&SyntheticAntennaSpec::new(3, 2, 2, 1)).unwrap();
        let mut ds = AntennaDataset::from_network(&net, DEFAULT_FREQUENCY_HZ);
        ds.k_angles = 3;
        save_dataset(&ds, &path).unwrap();
        assert!(matches!(load_antenna(&path), Err(Error::Dimension { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_antenna(Path::new("/nonexistent/antenna.json")), Err(Error::Io { .. })));
    }
}
