//! Synthetic pixel antennas standing in for full-wave solver exports.
//!
//! The impedance matrix is reciprocal and strictly diagonally dominant, so
//! every principal submatrix (every switch setting) is invertible. The
//! pattern matrix is built as `U diag(s) Vᴴ` with random orthonormal
//! factors and a spectrum whose cumulative-energy knee sits exactly at
//! `target_n_eff`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::sample_compact_channel_with;
use crate::error::{Error, Result};
use crate::multiport::MultiportNetwork;
use crate::scalar::{cx, CMatrix, CVector, Real};

/// Cumulative energy fraction used to define the knee.
pub const DEFAULT_ENERGY_FRACTION: f64 = 0.998;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticAntennaSpec {
    pub q_switches: usize,
    pub k_angles: usize,
    pub target_n_eff: usize,
    pub seed: u64,
    /// Typical self-impedance magnitude, Ω.
    pub impedance_scale: f64,
    /// Share of pattern energy placed beyond the knee (0 gives exact rank).
    pub residual_energy: f64,
    pub energy_fraction: f64,
}

impl Default for SyntheticAntennaSpec {
    fn default() -> Self {
        Self {
            q_switches: 39,
            k_angles: 72,
            target_n_eff: 7,
            seed: 1,
            impedance_scale: 50.0,
            residual_energy: 1e-4,
            energy_fraction: DEFAULT_ENERGY_FRACTION,
        }
    }
}

impl SyntheticAntennaSpec {
    pub fn new(q_switches: usize, k_angles: usize, target_n_eff: usize, seed: u64) -> Self {
        Self {
            q_switches,
            k_angles,
            target_n_eff,
            seed,
            ..Self::default()
        }
    }

    /// Same spec with the pattern matrix of exact rank `target_n_eff`.
    pub fn exact_rank(mut self) -> Self {
        self.residual_energy = 0.0;
        self
    }

    fn validate(&self) -> Result<()> {
        let max_rank = (2 * self.k_angles).min(self.q_switches + 1);
        if self.q_switches == 0 || self.k_angles == 0 {
            return Err(Error::InfeasibleSpec("Q and K must be positive".into()));
        }
        if self.target_n_eff == 0 || self.target_n_eff > max_rank {
            return Err(Error::InfeasibleSpec(format!(
                "target_n_eff {} must lie in 1..={max_rank}",
                self.target_n_eff
            )));
        }
        if !(self.energy_fraction > 0.0 && self.energy_fraction <= 1.0) {
            return Err(Error::InfeasibleSpec("energy_fraction must lie in (0, 1]".into()));
        }
        let headroom = 1.0 - self.energy_fraction;
        if !(self.residual_energy >= 0.0) || (self.residual_energy > 0.0 && self.residual_energy >= headroom) {
            return Err(Error::InfeasibleSpec(format!(
                "residual_energy {} must be in [0, {headroom})",
                self.residual_energy
            )));
        }
        if self.residual_energy > 0.0 && self.target_n_eff == max_rank {
            return Err(Error::InfeasibleSpec("no room for residual energy beyond the knee".into()));
        }
        if !(self.impedance_scale > 0.0) {
            return Err(Error::InfeasibleSpec("impedance_scale must be positive".into()));
        }
        Ok(())
    }

    /// Singular values: a geometric head of `target_n_eff` values whose last
    /// term holds 10% of the first's energy, then an even residual tail.
    pub fn spectrum(&self) -> Vec<f64> {
        let n = self.target_n_eff;
        let ratio = if n > 1 { 0.1f64.powf(1.0 / (2.0 * (n as f64 - 1.0))) } else { 1.0 };
        let mut s: Vec<f64> = (0..n).map(|i| ratio.powi(i as i32)).collect();
        let tail = (2 * self.k_angles).min(self.q_switches + 1) - n;
        if self.residual_energy > 0.0 && tail > 0 {
            let head: f64 = s.iter().map(|x| x * x).sum();
            let tail_energy = self.residual_energy * head / (1.0 - self.residual_energy);
            let value = (tail_energy / tail as f64).sqrt();
            s.extend(std::iter::repeat_n(value, tail));
        }
        s
    }
}

/// Orthonormal columns from the QR factor of a Gaussian matrix.
fn random_orthonormal<T: Real>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix<T> {
    let g: CMatrix<T> = sample_compact_channel_with(rows, cols, rng);
    g.qr().q().columns(0, cols).into_owned()
}

pub fn generate_synthetic_antenna<T: Real>(spec: &SyntheticAntennaSpec) -> Result<MultiportNetwork<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let q = spec.q_switches;
    let scale = spec.impedance_scale;

    let mut z_pp = DMatrix::from_element(q, q, cx(T::zero(), T::zero()));
    let coupling = 0.5 * scale / q as f64;
    for r in 0..q {
        for c in (r + 1)..q {
            let mag = coupling * rng.random::<f64>();
            let phase = std::f64::consts::TAU * rng.random::<f64>();
            let z = cx(T::lit(mag * phase.cos()), T::lit(mag * phase.sin()));
            z_pp[(r, c)] = z;
            z_pp[(c, r)] = z;
        }
        let resistance = scale * (1.0 + 0.5 * rng.random::<f64>());
        let reactance = scale * (2.0 * rng.random::<f64>() - 1.0);
        z_pp[(r, r)] = cx(T::lit(resistance), T::lit(reactance));
    }
    let z_ap = CVector::from_fn(q, |_, _| {
        let mag = 0.5 * scale * rng.random::<f64>();
        let phase = std::f64::consts::TAU * rng.random::<f64>();
        cx(T::lit(mag * phase.cos()), T::lit(mag * phase.sin()))
    });
    let z_aa = cx(T::lit(scale), T::lit(scale * (2.0 * rng.random::<f64>() - 1.0)));

    let spectrum = spec.spectrum();
    let rank = spectrum.len();
    let u: CMatrix<T> = random_orthonormal(2 * spec.k_angles, rank, &mut rng);
    let v: CMatrix<T> = random_orthonormal(q + 1, rank, &mut rng);
    let mut us = u;
    for (c, s) in spectrum.iter().enumerate() {
        us.column_mut(c).scale_mut(T::lit(*s));
    }
    let e_oc = us * v.adjoint();
    MultiportNetwork::new(z_aa, z_ap, z_pp, e_oc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiport::{beamspace_decompose, coder_pattern, AntennaCoder, Side};

    #[test]
    fn knee_sits_at_target() {
        for n in [1, 2, 4, 7, 12] {
            let spec = SyntheticAntennaSpec::new(16, 12, n, 3);
            let net = generate_synthetic_antenna::<f64>(&spec).unwrap();
            let basis = beamspace_decompose(&net, 0.998).unwrap();
            assert_eq!(basis.n_eff, n, "target {n}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SyntheticAntennaSpec::new(8, 6, 3, 17);
        let a = generate_synthetic_antenna::<f64>(&spec).unwrap();
        let b = generate_synthetic_antenna::<f64>(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_antenna::<f64>(&SyntheticAntennaSpec { seed: 18, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn infeasible_specs_rejected() {
        let too_many = SyntheticAntennaSpec::new(4, 2, 6, 0);
        assert!(matches!(generate_synthetic_antenna::<f64>(&too_many), Err(Error::InfeasibleSpec(_))));
        let zero = SyntheticAntennaSpec::new(4, 2, 0, 0);
        assert!(generate_synthetic_antenna::<f64>(&zero).is_err());
        let heavy_tail = SyntheticAntennaSpec {
            residual_energy: 0.01,
            ..SyntheticAntennaSpec::new(8, 8, 3, 0)
        };
        assert!(generate_synthetic_antenna::<f64>(&heavy_tail).is_err());
    }

    #[test]
    fn rank_one_antenna_gives_parallel_coders() {
        let spec = SyntheticAntennaSpec::new(6, 4, 1, 5);
        let net = generate_synthetic_antenna::<f64>(&spec).unwrap();
        let basis = beamspace_decompose(&net, 0.998).unwrap();
        assert_eq!(basis.n_eff, 1);
        for bits in [[0u8, 0, 0, 0, 0, 0], [1, 0, 1, 1, 0, 0], [1, 1, 1, 1, 1, 1]] {
            let w = coder_pattern(&net, &basis, &AntennaCoder::from_bits(&bits).unwrap(), Side::Transmit).unwrap();
            assert_eq!(w.len(), 1);
            assert!((w[0].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn impedance_is_reciprocal() {
        let net = generate_synthetic_antenna::<f64>(&SyntheticAntennaSpec::new(10, 8, 4, 2)).unwrap();
        let z = net.z_pp();
        assert_eq!(z, &z.transpose());
    }
}
