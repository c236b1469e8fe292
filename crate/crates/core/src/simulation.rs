//! Monte Carlo harness: sweep array sizes and compare beamforming and
//! antenna schemes by mean DC output power.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{path_loss_amplitude, sample_compact_channel_with};
use crate::error::{Error, Result};
use crate::io::synthetic::{generate_synthetic_antenna, SyntheticAntennaSpec};
use crate::multiport::{beamspace_decompose, AntennaCoder, BeamspaceBasis, MultiportNetwork};
use crate::optimizer::{alternating_optimize, init_beamformer_svd, optimize_beamformer, LinkModel, OptimizerConfig};
use crate::rectenna::RectennaParams;
use crate::scalar::compensated_sum;

pub const DEFAULT_REALIZATIONS: usize = 200;
pub const DEFAULT_TRANSMIT_POWER_DBM: f64 = 36.0;
pub const DEFAULT_PATH_LOSS_DB: f64 = 66.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Beamforming {
    Opt,
    Svd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AntennaKind {
    Pixel,
    Fixed,
}

/// Beamforming method paired with antenna type, written `opt-pixel` etc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scheme {
    pub beamforming: Beamforming,
    pub antenna: AntennaKind,
}

impl Scheme {
    pub const OPT_PIXEL: Scheme = Scheme::new(Beamforming::Opt, AntennaKind::Pixel);
    pub const SVD_PIXEL: Scheme = Scheme::new(Beamforming::Svd, AntennaKind::Pixel);
    pub const OPT_FIXED: Scheme = Scheme::new(Beamforming::Opt, AntennaKind::Fixed);
    pub const SVD_FIXED: Scheme = Scheme::new(Beamforming::Svd, AntennaKind::Fixed);
    pub const ALL: [Scheme; 4] = [Self::OPT_PIXEL, Self::SVD_PIXEL, Self::OPT_FIXED, Self::SVD_FIXED];

    pub const fn new(beamforming: Beamforming, antenna: AntennaKind) -> Self {
        Self { beamforming, antenna }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bf = match self.beamforming {
            Beamforming::Opt => "opt",
            Beamforming::Svd => "svd",
        };
        let ant = match self.antenna {
            AntennaKind::Pixel => "pixel",
            AntennaKind::Fixed => "fixed",
        };
        write!(f, "{bf}-{ant}")
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (bf, ant) = s
            .split_once(['-', ','])
            .ok_or_else(|| Error::InvalidParameter(format!("scheme `{s}` is not of the form opt|svd-pixel|fixed")))?;
        let beamforming = match bf.trim().to_ascii_lowercase().as_str() {
            "opt" => Beamforming::Opt,
            "svd" => Beamforming::Svd,
            other => return Err(Error::InvalidParameter(format!("unknown beamforming `{other}`"))),
        };
        let antenna = match ant.trim().to_ascii_lowercase().as_str() {
            "pixel" => AntennaKind::Pixel,
            "fixed" => AntennaKind::Fixed,
            other => return Err(Error::InvalidParameter(format!("unknown antenna kind `{other}`"))),
        };
        Ok(Self::new(beamforming, antenna))
    }
}

impl Serialize for Scheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Coder used by every element of the conventional (non-reconfigurable) array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FixedBaseline {
    /// All switches short.
    #[default]
    AllShort,
    /// One random coder drawn once from `seed`.
    Random { seed: u64 },
}

impl FixedBaseline {
    pub fn coder(&self, q: usize) -> AntennaCoder {
        match *self {
            FixedBaseline::AllShort => AntennaCoder::all_short(q),
            FixedBaseline::Random { seed } => AntennaCoder::random(q, &mut ChaCha8Rng::seed_from_u64(seed)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AntennaSource {
    Synthetic(SyntheticAntennaSpec),
    Dataset(PathBuf),
}

impl Default for AntennaSource {
    fn default() -> Self {
        AntennaSource::Synthetic(SyntheticAntennaSpec::default())
    }
}

impl AntennaSource {
    pub fn load(&self) -> Result<MultiportNetwork<f64>> {
        match self {
            AntennaSource::Synthetic(spec) => generate_synthetic_antenna(spec),
            AntennaSource::Dataset(path) => crate::io::dataset::load_antenna(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub tx_counts: Vec<usize>,
    pub rx_counts: Vec<usize>,
    /// Pair `tx_counts[i]` with `rx_counts[i]` instead of the full grid.
    pub diagonal: bool,
    pub realizations: usize,
    pub transmit_power_dbm: f64,
    pub path_loss_db: f64,
    pub schemes: Vec<Scheme>,
    pub base_seed: u64,
    pub antenna_source: AntennaSource,
    pub energy_fraction: f64,
    pub fixed_baseline: FixedBaseline,
    pub rectenna: RectennaParams<f64>,
    pub optimizer: OptimizerConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tx_counts: vec![1, 2, 4],
            rx_counts: vec![1, 2, 4],
            diagonal: false,
            realizations: DEFAULT_REALIZATIONS,
            transmit_power_dbm: DEFAULT_TRANSMIT_POWER_DBM,
            path_loss_db: DEFAULT_PATH_LOSS_DB,
            schemes: Scheme::ALL.to_vec(),
            base_seed: 0,
            antenna_source: AntennaSource::default(),
            energy_fraction: crate::io::synthetic::DEFAULT_ENERGY_FRACTION,
            fixed_baseline: FixedBaseline::default(),
            rectenna: RectennaParams::default(),
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidParameter("realizations must be at least 1".into()));
        }
        if !self.transmit_power_dbm.is_finite() || !self.path_loss_db.is_finite() {
            return Err(Error::InvalidParameter("transmit power and path loss must be finite".into()));
        }
        if self.tx_counts.contains(&0) || self.rx_counts.contains(&0) {
            return Err(Error::InvalidParameter("antenna counts must be positive".into()));
        }
        if self.diagonal && self.tx_counts.len() != self.rx_counts.len() {
            return Err(Error::InvalidParameter(
                "diagonal sweeps need as many transmit as receive counts".into(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidParameter("no schemes selected".into()));
        }
        if !(self.energy_fraction > 0.0 && self.energy_fraction <= 1.0) {
            return Err(Error::InvalidParameter("energy_fraction must lie in (0, 1]".into()));
        }
        self.rectenna.validate()?;
        self.optimizer.validate()
    }

    pub fn power_budget_w(&self) -> f64 {
        dbm_to_watts(self.transmit_power_dbm)
    }

    /// (M, N) points in sweep order.
    pub fn grid(&self) -> Vec<(usize, usize)> {
        if self.diagonal {
            self.tx_counts.iter().copied().zip(self.rx_counts.iter().copied()).collect()
        } else {
            self.tx_counts
                .iter()
                .flat_map(|&m| self.rx_counts.iter().map(move |&n| (m, n)))
                .collect()
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}

/// `10·log10(a/b)`.
pub fn db_gain(a_watts: f64, b_watts: f64) -> Result<f64> {
    for x in [a_watts, b_watts] {
        if !(x > 0.0) {
            return Err(Error::NonPositivePower(x));
        }
    }
    Ok(10.0 * (a_watts / b_watts).log10())
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one channel realization. Independent of the scheme, so every
/// scheme sees the same channels.
pub fn realization_seed(base_seed: u64, m: usize, n: usize, index: usize) -> u64 {
    [m as u64, n as u64, index as u64]
        .into_iter()
        .fold(mix(base_seed), |acc, x| mix(acc ^ x))
}

/// Loaded antenna plus its beamspace basis, shared by all realizations.
#[derive(Debug, Clone)]
pub struct Testbed {
    pub config: ExperimentConfig,
    pub net: MultiportNetwork<f64>,
    pub basis: BeamspaceBasis<f64>,
}

impl Testbed {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let net = config.antenna_source.load()?;
        Self::with_network(config, net)
    }

    pub fn with_network(config: ExperimentConfig, net: MultiportNetwork<f64>) -> Result<Self> {
        config.validate()?;
        let basis = beamspace_decompose(&net, config.energy_fraction)?;
        Ok(Self { config, net, basis })
    }

    /// DC power of one scheme on realization `index`.
    pub fn run_realization(&self, m: usize, n: usize, scheme: Scheme, index: usize) -> Result<f64> {
        Ok(self.run_schemes(m, n, &[scheme], index)?[0])
    }

    /// DC power of each requested scheme on one shared channel realization.
    pub fn run_schemes(&self, m: usize, n: usize, schemes: &[Scheme], index: usize) -> Result<Vec<f64>> {
        let seed = realization_seed(self.config.base_seed, m, n, index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_eff = self.basis.n_eff;
        let q = self.net.q_switches();
        let h_c = sample_compact_channel_with::<f64, _>(n * n_eff, m * n_eff, &mut rng);
        let initial_tx: Vec<AntennaCoder> = (0..m).map(|_| AntennaCoder::random(q, &mut rng)).collect();
        let initial_rx: Vec<AntennaCoder> = (0..n).map(|_| AntennaCoder::random(q, &mut rng)).collect();
        let power = self.config.power_budget_w();
        let mut link = LinkModel::new(
            &self.net,
            &self.basis,
            &h_c,
            path_loss_amplitude(self.config.path_loss_db),
            self.config.rectenna,
            power,
            m,
            n,
        )?;
        let optimizer = OptimizerConfig {
            rng_seed: mix(seed ^ 0x5eb0),
            ..self.config.optimizer
        };

        let fixed = self.config.fixed_baseline.coder(q);
        let (fixed_tx, fixed_rx) = (vec![fixed.clone(); m], vec![fixed; n]);
        let mut fixed_svd = None;
        let mut pixel_svd = None;
        let mut out = Vec::with_capacity(schemes.len());
        for scheme in schemes {
            let value = match (scheme.antenna, scheme.beamforming) {
                (AntennaKind::Fixed, bf) => {
                    let h = link.channel(&fixed_tx, &fixed_rx)?;
                    let p = match &fixed_svd {
                        Some(p) => p,
                        None => fixed_svd.insert(init_beamformer_svd(&h, power)?),
                    };
                    match bf {
                        Beamforming::Svd => link.dc_power(&fixed_tx, &fixed_rx, &p.weights)?,
                        Beamforming::Opt => {
                            optimize_beamformer(&h, &self.config.rectenna, power, p, &optimizer)?.objective
                        }
                    }
                }
                (AntennaKind::Pixel, bf) => {
                    let (search, p) = match &pixel_svd {
                        Some(found) => found,
                        None => {
                            let p = init_beamformer_svd(&link.channel(&initial_tx, &initial_rx)?, power)?;
                            let mut coder_rng = ChaCha8Rng::seed_from_u64(optimizer.rng_seed);
                            let search =
                                link.optimize_coders(&initial_tx, &initial_rx, &p.weights, &optimizer, &mut coder_rng)?;
                            pixel_svd.insert((search, p))
                        }
                    };
                    match bf {
                        Beamforming::Svd => search.value,
                        Beamforming::Opt => {
                            let start = (search.tx.clone(), search.rx.clone());
                            alternating_optimize(&mut link, start, Some(p.clone()), &optimizer)?.objective()
                        }
                    }
                }
            };
            out.push(value);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    pub n: usize,
    pub scheme: Scheme,
    pub mean_dc_power_w: f64,
    pub mean_dc_power_dbm: f64,
    pub std_error: f64,
    pub realizations: usize,
    pub seed: u64,
    /// Per-realization DC power in realization order.
    pub samples: Vec<f64>,
}

impl SweepRow {
    pub fn from_samples(m: usize, n: usize, scheme: Scheme, seed: u64, samples: Vec<f64>) -> Self {
        let count = samples.len();
        let mean = compensated_sum(samples.iter().copied()) / count as f64;
        let std_error = if count > 1 {
            let var = compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean))) / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Self {
            m,
            n,
            scheme,
            mean_dc_power_w: mean,
            mean_dc_power_dbm: watts_to_dbm(mean),
            std_error,
            realizations: count,
            seed,
            samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, m: usize, n: usize, scheme: Scheme) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.m == m && r.n == n && r.scheme == scheme)
    }
}

/// Run every (M, N) point of the configuration. `on_row` sees the partial
/// result after each completed row, which lets callers flush progress.
pub fn run_sweep_with(testbed: &Testbed, mut on_row: impl FnMut(&SweepResult) -> Result<()>) -> Result<SweepResult> {
    let config = &testbed.config;
    let mut result = SweepResult::default();
    for (m, n) in config.grid() {
        let mut samples = vec![Vec::with_capacity(config.realizations); config.schemes.len()];
        for index in 0..config.realizations {
            let values = testbed.run_schemes(m, n, &config.schemes, index)?;
            for (acc, v) in samples.iter_mut().zip(values) {
                acc.push(v);
            }
        }
        for (scheme, s) in config.schemes.iter().zip(samples) {
            result
                .rows
                .push(SweepRow::from_samples(m, n, *scheme, config.base_seed, s));
            on_row(&result)?;
        }
    }
    Ok(result)
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep_with(&Testbed::new(config.clone())?, |_| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            tx_counts: vec![1, 2],
            rx_counts: vec![1, 2],
            diagonal: true,
            realizations: 3,
            antenna_source: AntennaSource::Synthetic(SyntheticAntennaSpec::new(6, 8, 2, 4)),
            optimizer: OptimizerConfig {
                ao_max_iters: 3,
                sebo_restarts: 1,
                ..OptimizerConfig::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn scheme_text_roundtrip() {
        for s in Scheme::ALL {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("opt-bogus".parse::<Scheme>().is_err());
        assert!("opt".parse::<Scheme>().is_err());
    }

    #[test]
    fn db_gain_values() {
        assert!((db_gain(2.0, 1.0).unwrap() - 3.010_299_956_639_812).abs() < 1e-12);
        assert_eq!(db_gain(0.7, 0.7).unwrap(), 0.0);
        assert!((db_gain(31.62, 1.0).unwrap() - 15.0).abs() < 1e-3);
        assert!(matches!(db_gain(0.0, 1.0), Err(Error::NonPositivePower(_))));
        assert!(db_gain(1.0, -1.0).is_err());
    }

    #[test]
    fn power_conversions() {
        assert!((dbm_to_watts(36.0) - 3.981_071_705_534_972).abs() < 1e-12);
        assert!((watts_to_dbm(1.0) - 30.0).abs() < 1e-12);
    }

    #[test]
    fn seeds_differ_across_points() {
        let a = realization_seed(0, 1, 1, 0);
        assert_ne!(a, realization_seed(0, 1, 1, 1));
        assert_ne!(a, realization_seed(0, 1, 2, 0));
        assert_ne!(a, realization_seed(1, 1, 1, 0));
        assert_eq!(a, realization_seed(0, 1, 1, 0));
    }

    #[test]
    fn grid_shapes() {
        let mut c = small_config();
        assert_eq!(c.grid(), vec![(1, 1), (2, 2)]);
        c.diagonal = false;
        assert_eq!(c.grid().len(), 4);
    }

    #[test]
    fn single_realization_mean_is_the_sample() {
        let cfg = ExperimentConfig {
            realizations: 1,
            tx_counts: vec![2],
            rx_counts: vec![1],
            ..small_config()
        };
        let bed = Testbed::new(cfg).unwrap();
        let res = run_sweep_with(&bed, |_| Ok(())).unwrap();
        for row in &res.rows {
            assert_eq!(row.samples.len(), 1);
            assert_eq!(row.mean_dc_power_w, row.samples[0]);
            assert_eq!(row.std_error, 0.0);
        }
    }

    #[test]
    fn opt_dominates_svd_per_seed() {
        let bed = Testbed::new(small_config()).unwrap();
        for idx in 0..3 {
            let v = bed.run_schemes(2, 2, &Scheme::ALL, idx).unwrap();
            assert!(v[0] >= v[1], "pixel: {v:?}");
            assert!(v[2] >= v[3], "fixed: {v:?}");
        }
    }

    #[test]
    fn scheme_subset_matches_full_run() {
        let bed = Testbed::new(small_config()).unwrap();
        let all = bed.run_schemes(2, 1, &Scheme::ALL, 0).unwrap();
        for (i, s) in Scheme::ALL.iter().enumerate() {
            assert_eq!(bed.run_realization(2, 1, *s, 0).unwrap(), all[i]);
        }
    }

    #[test]
    fn vanishing_power_gives_vanishing_output() {
        let cfg = ExperimentConfig {
            transmit_power_dbm: -200.0,
            ..small_config()
        };
        let bed = Testbed::new(cfg).unwrap();
        for s in Scheme::ALL {
            assert!(bed.run_realization(1, 1, s, 0).unwrap() < 1e-30);
        }
    }

    #[test]
    fn doubling_realizations_keeps_prefix() {
        let cfg = small_config();
        let short = run_sweep(&cfg).unwrap();
        let long = run_sweep(&ExperimentConfig {
            realizations: 6,
            ..cfg
        })
        .unwrap();
        for (a, b) in short.rows.iter().zip(&long.rows) {
            assert_eq!(a.samples[..], b.samples[..3]);
        }
    }
}
