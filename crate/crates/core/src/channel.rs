//! Beamspace MIMO channel construction.
//!
//! Each pixel antenna contributes `N_eff` orthogonal basis patterns, so an
//! M×N link behaves like an `M·N_eff` × `N·N_eff` conventional MIMO channel
//! (the compact channel `H_C`). Antenna coders select a unit-norm pattern
//! coder per element; the effective N×M channel is `W_Rᴴ H_C W_T`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::multiport::{coder_pattern, radiation_pattern, AntennaCoder, BeamspaceBasis, MultiportNetwork, Side};
use crate::scalar::{cis, cone, cx, czero, vnorm, CMatrix, CVector, Cx, Real};

/// Default number of azimuth samples.
pub const DEFAULT_K_ANGLES: usize = 72;
/// Default element spacing in wavelengths.
pub const DEFAULT_SPACING: f64 = 0.5;
/// Wavelength at 2.4 GHz, metres.
pub const DEFAULT_WAVELENGTH: f64 = 0.125;

/// Linear array of identical pixel antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry<T: Real> {
    pub n_elements: usize,
    /// Element spacing in wavelengths.
    pub spacing: T,
    /// Carrier wavelength in metres.
    pub wavelength: T,
    /// Azimuth sample angles in radians, one per pattern row pair.
    pub azimuth_samples: Vec<T>,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn new(n_elements: usize, spacing: T, wavelength: T, azimuth_samples: Vec<T>) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::InvalidParameter("array needs at least one element".into()));
        }
        if !(spacing > T::zero()) || !(wavelength > T::zero()) {
            return Err(Error::InvalidParameter(
                "array spacing and wavelength must be positive".into(),
            ));
        }
        if azimuth_samples.is_empty() {
            return Err(Error::InvalidParameter("no azimuth samples".into()));
        }
        Ok(Self {
            n_elements,
            spacing,
            wavelength,
            azimuth_samples,
        })
    }

    /// `k` uniformly spaced azimuths over [0, 2π) with default spacing.
    pub fn uniform(n_elements: usize, k: usize) -> Result<Self> {
        Self::new(
            n_elements,
            T::lit(DEFAULT_SPACING),
            T::lit(DEFAULT_WAVELENGTH),
            uniform_azimuths(k),
        )
    }

    pub fn k_angles(&self) -> usize {
        self.azimuth_samples.len()
    }

    /// Physical spacing in metres.
    pub fn spacing_metres(&self) -> T {
        self.spacing * self.wavelength
    }
}

pub fn uniform_azimuths<T: Real>(k: usize) -> Vec<T> {
    let step = T::two_pi() / T::from_count(k.max(1));
    (0..k).map(|i| T::from_count(i) * step).collect()
}

/// Per-row phase progression `Φ_m` for element `m` (0-based), length 2K.
///
/// Both polarization halves carry the same azimuth phase. Element 0 is
/// the phase reference and yields all ones.
pub fn array_phase_shifts<T: Real>(geom: &ArrayGeometry<T>, element: usize) -> Result<CVector<T>> {
    if element >= geom.n_elements {
        return Err(Error::dims("array element index", geom.n_elements, element));
    }
    let k = geom.k_angles();
    let step = T::two_pi() * T::from_count(element) * geom.spacing;
    Ok(CVector::from_fn(2 * k, |r, _| {
        if element == 0 {
            cone()
        } else {
            cis(step * geom.azimuth_samples[r % k].sin())
        }
    }))
}

/// Phase-shifted copies of the base pattern basis, one per element.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayBasis<T: Real> {
    pub per_element: Vec<CMatrix<T>>,
    /// Column-wise concatenation, 2K × (elements · N_eff).
    pub stacked: CMatrix<T>,
}

pub fn build_array_basis<T: Real>(base: &BeamspaceBasis<T>, geom: &ArrayGeometry<T>) -> Result<ArrayBasis<T>> {
    let rows = base.u.nrows();
    if rows != 2 * geom.k_angles() {
        return Err(Error::dims("basis rows vs 2K", 2 * geom.k_angles(), rows));
    }
    let n_eff = base.n_eff;
    let mut stacked = CMatrix::zeros(rows, geom.n_elements * n_eff);
    let mut per_element = Vec::with_capacity(geom.n_elements);
    for m in 0..geom.n_elements {
        let phi = array_phase_shifts(geom, m)?;
        let mut u_m = base.u.clone();
        for (r, mut row) in u_m.row_iter_mut().enumerate() {
            row *= phi[r];
        }
        stacked.columns_mut(m * n_eff, n_eff).copy_from(&u_m);
        per_element.push(u_m);
    }
    Ok(ArrayBasis { per_element, stacked })
}

/// Antenna coders of one array and their unit-norm pattern coders.
#[derive(Debug, Clone, PartialEq)]
pub struct CoderBank<T: Real> {
    pub side: Side,
    pub coders: Vec<AntennaCoder>,
    /// Pattern coder of each element (length N_eff each).
    pub blocks: Vec<CVector<T>>,
}

impl<T: Real> CoderBank<T> {
    /// Assemble from precomputed pattern coders.
    pub fn from_blocks(side: Side, coders: Vec<AntennaCoder>, blocks: Vec<CVector<T>>) -> Result<Self> {
        if coders.len() != blocks.len() {
            return Err(Error::dims("coder bank blocks", coders.len(), blocks.len()));
        }
        if let Some(first) = blocks.first() {
            if let Some(bad) = blocks.iter().find(|b| b.len() != first.len()) {
                return Err(Error::dims("pattern coder length", first.len(), bad.len()));
            }
        }
        Ok(Self { side, coders, blocks })
    }

    pub fn n_elements(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_eff(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.len())
    }

    /// Block-diagonal pattern bank, (elements·N_eff) × elements.
    pub fn matrix(&self) -> CMatrix<T> {
        let n_eff = self.n_eff();
        let mut w = CMatrix::zeros(self.n_elements() * n_eff, self.n_elements());
        for (m, block) in self.blocks.iter().enumerate() {
            w.view_mut((m * n_eff, m), (n_eff, 1)).copy_from(block);
        }
        w
    }
}

pub fn build_coder_bank<T: Real>(
    net: &MultiportNetwork<T>,
    basis: &BeamspaceBasis<T>,
    coders: &[AntennaCoder],
    side: Side,
) -> Result<CoderBank<T>> {
    let blocks = coders
        .iter()
        .enumerate()
        .map(|(m, coder)| {
            coder_pattern(net, basis, coder, side).map_err(|e| match e {
                Error::ZeroPattern { .. } => Error::ZeroPattern { element: Some(m) },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CoderBank::from_blocks(side, coders.to_vec(), blocks)
}

/// I.i.d. CN(0, 1) matrix drawn from `rng`.
pub fn sample_compact_channel_with<T: Real, R: Rng + ?Sized>(n_r: usize, n_t: usize, rng: &mut R) -> CMatrix<T> {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(n_r, n_t, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        cx(T::lit(re * half), T::lit(im * half))
    })
}

/// I.i.d. CN(0, 1) matrix, deterministic in `seed`.
pub fn sample_compact_channel<T: Real>(n_r: usize, n_t: usize, seed: u64) -> CMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_compact_channel_with(n_r, n_t, &mut rng)
}

/// Amplitude factor for a path loss in dB.
pub fn path_loss_amplitude<T: Real>(path_loss_db: T) -> T {
    T::lit(10.0).powf(-path_loss_db / T::lit(20.0))
}

/// Compact channel, its path-loss scale, and the resulting effective channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T: Real> {
    pub h_compact: CMatrix<T>,
    pub amplitude_scale: T,
    pub h_effective: CMatrix<T>,
}

impl<T: Real> ChannelSet<T> {
    pub fn new(h_compact: CMatrix<T>, amplitude_scale: T, bank_t: &CoderBank<T>, bank_r: &CoderBank<T>) -> Result<Self> {
        let h_effective = effective_channel(&h_compact, amplitude_scale, bank_t, bank_r)?;
        Ok(Self {
            h_compact,
            amplitude_scale,
            h_effective,
        })
    }
}

/// `W_Rᴴ (g·H_C) W_T`, evaluated block by block.
pub fn effective_channel<T: Real>(
    h_compact: &CMatrix<T>,
    amplitude_scale: T,
    bank_t: &CoderBank<T>,
    bank_r: &CoderBank<T>,
) -> Result<CMatrix<T>> {
    let (m, nt) = (bank_t.n_elements(), bank_t.n_eff());
    let (n, nr) = (bank_r.n_elements(), bank_r.n_eff());
    if h_compact.ncols() != m * nt {
        return Err(Error::dims("compact channel columns", m * nt, h_compact.ncols()));
    }
    if h_compact.nrows() != n * nr {
        return Err(Error::dims("compact channel rows", n * nr, h_compact.nrows()));
    }
    let g = cx(amplitude_scale, T::zero());
    let mut h = CMatrix::zeros(n, m);
    for (col, wt) in bank_t.blocks.iter().enumerate() {
        for (row, wr) in bank_r.blocks.iter().enumerate() {
            let mut acc = czero::<T>();
            for a in 0..nr {
                let mut inner = czero::<T>();
                for b in 0..nt {
                    inner += h_compact[(row * nr + a, col * nt + b)] * wt[b];
                }
                acc += wr[a].conj() * inner;
            }
            h[(row, col)] = acc * g;
        }
    }
    Ok(h)
}

/// Compact channel `E_bs,Rᵀ H_V E_bs,T` from a 2K×2K virtual channel.
pub fn compact_from_virtual<T: Real>(h_v: &CMatrix<T>, array_t: &ArrayBasis<T>, array_r: &ArrayBasis<T>) -> Result<CMatrix<T>> {
    let k2 = array_t.stacked.nrows();
    if h_v.nrows() != array_r.stacked.nrows() || h_v.ncols() != k2 {
        return Err(Error::dims("virtual channel size", k2, h_v.nrows()));
    }
    Ok(array_r.stacked.transpose() * h_v * &array_t.stacked)
}

/// Everything needed to evaluate one array's side of the link.
#[derive(Debug, Clone, Copy)]
pub struct ArraySide<'a, T: Real> {
    pub net: &'a MultiportNetwork<T>,
    pub basis: &'a BeamspaceBasis<T>,
    pub geometry: &'a ArrayGeometry<T>,
    pub coders: &'a [AntennaCoder],
}

/// Normalized, phase-shifted element patterns `Φ_m ⊙ e(b_m)/‖e(b_m)‖` as columns.
pub fn element_patterns<T: Real>(side: &ArraySide<'_, T>) -> Result<CMatrix<T>> {
    if side.coders.len() != side.geometry.n_elements {
        return Err(Error::dims("coders per array", side.geometry.n_elements, side.coders.len()));
    }
    let rows = side.net.e_oc().nrows();
    let mut e = CMatrix::zeros(rows, side.coders.len());
    for (m, coder) in side.coders.iter().enumerate() {
        let pattern = radiation_pattern(side.net, coder, cone())?;
        let norm = vnorm(&pattern);
        if !(norm > T::zero()) {
            return Err(Error::ZeroPattern { element: Some(m) });
        }
        let phi = array_phase_shifts(side.geometry, m)?;
        if phi.len() != rows {
            return Err(Error::dims("pattern rows vs 2K", phi.len(), rows));
        }
        e.set_column(m, &pattern.component_mul(&phi).unscale(norm));
    }
    Ok(e)
}

/// The same effective channel evaluated two ways.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPaths<T: Real> {
    /// `E_Rᵀ H_V E_T` over full element patterns.
    pub pattern_domain: CMatrix<T>,
    /// `W_Rᴴ H_C W_T` with `H_C` projected from the same `H_V`.
    pub beamspace: CMatrix<T>,
}

/// Evaluate the channel through the pattern domain and through the
/// compact beamspace form. They agree whenever every element pattern lies
/// in the retained basis span.
pub fn virtual_channel_consistency<T: Real>(
    h_v: &CMatrix<T>,
    tx: ArraySide<'_, T>,
    rx: ArraySide<'_, T>,
) -> Result<ChannelPaths<T>> {
    let e_t = element_patterns(&tx)?;
    let e_r = element_patterns(&rx)?;
    if h_v.nrows() != e_r.nrows() || h_v.ncols() != e_t.nrows() {
        return Err(Error::dims("virtual channel size", e_t.nrows(), h_v.ncols()));
    }
    let pattern_domain = e_r.transpose() * h_v * &e_t;

    let array_t = build_array_basis(tx.basis, tx.geometry)?;
    let array_r = build_array_basis(rx.basis, rx.geometry)?;
    let h_c = compact_from_virtual(h_v, &array_t, &array_r)?;
    let bank_t = build_coder_bank(tx.net, tx.basis, tx.coders, Side::Transmit)?;
    let bank_r = build_coder_bank(rx.net, rx.basis, rx.coders, Side::Receive)?;
    let beamspace = effective_channel(&h_c, T::one(), &bank_t, &bank_r)?;
    Ok(ChannelPaths {
        pattern_domain,
        beamspace,
    })
}

/// Mean squared magnitude of the entries.
pub fn mean_entry_power<T: Real>(h: &CMatrix<T>) -> T {
    let n = T::from_count(h.len().max(1));
    h.iter().fold(T::zero(), |a, z: &Cx<T>| a + z.norm_sqr()) / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{fnorm, modulus};

    fn bank(blocks: Vec<CVector<f64>>, side: Side) -> CoderBank<f64> {
        let coders = vec![AntennaCoder::all_short(1); blocks.len()];
        CoderBank::from_blocks(side, coders, blocks).unwrap()
    }

    #[test]
    fn reference_element_has_unit_phase() {
        let geom = ArrayGeometry::<f64>::uniform(3, 8).unwrap();
        let phi = array_phase_shifts(&geom, 0).unwrap();
        assert!(phi.iter().all(|z| *z == cone()));
        for m in 0..3 {
            let phi = array_phase_shifts(&geom, m).unwrap();
            assert_eq!(phi.len(), 16);
            assert!(phi.iter().all(|z| (modulus(*z) - 1.0).abs() < 1e-15));
        }
        assert!(array_phase_shifts(&geom, 3).is_err());
    }

    #[test]
    fn half_wave_broadside_phase_is_minus_one() {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let geom = ArrayGeometry::new(2, 0.5, 0.125, vec![half_pi]).unwrap();
        let phi = array_phase_shifts(&geom, 1).unwrap();
        assert!((phi[0] - cx(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(phi[0], phi[1]);
    }

    #[test]
    fn effective_channel_scalar_reduction_and_zero_scale() {
        let h_c = CMatrix::from_element(1, 1, cx(0.3, -1.2));
        let wt = CVector::from_element(1, cx(0.6, 0.8));
        let wr = CVector::from_element(1, cx(0.0, 1.0));
        let bt = bank(vec![wt.clone()], Side::Transmit);
        let br = bank(vec![wr.clone()], Side::Receive);
        let h = effective_channel(&h_c, 2.0, &bt, &br).unwrap();
        let expected = wr[0].conj() * cx(2.0, 0.0) * h_c[(0, 0)] * wt[0];
        assert!((h[(0, 0)] - expected).norm() < 1e-15);
        let h0 = effective_channel(&h_c, 0.0, &bt, &br).unwrap();
        assert_eq!(h0[(0, 0)], czero());
    }

    #[test]
    fn effective_channel_matches_dense_product() {
        let h_c = sample_compact_channel::<f64>(6, 4, 11);
        let wt: Vec<_> = (0..2)
            .map(|m| CVector::from_fn(2, |r, _| cx((r + m) as f64, 1.0 - m as f64)).normalize())
            .collect();
        let wr: Vec<_> = (0..3)
            .map(|n| CVector::from_fn(2, |r, _| cx(1.0, (r * n) as f64 - 0.5)).normalize())
            .collect();
        let bt = bank(wt, Side::Transmit);
        let br = bank(wr, Side::Receive);
        let fast = effective_channel(&h_c, 0.7, &bt, &br).unwrap();
        let dense = br.matrix().adjoint() * (&h_c * cx(0.7, 0.0)) * bt.matrix();
        assert!((fast - &dense).norm() < 1e-12);
        // coder banks have orthonormal columns
        let gram = bt.matrix().adjoint() * bt.matrix();
        assert!((gram - CMatrix::identity(2, 2)).norm() < 1e-12);
        assert!(fnorm(&dense) <= 0.7 * fnorm(&h_c) + 1e-12);
        assert!(effective_channel(&h_c.transpose(), 0.7, &bt, &br).is_err());
    }

    #[test]
    fn channel_sampling_is_seeded() {
        let a = sample_compact_channel::<f64>(3, 5, 42);
        let b = sample_compact_channel::<f64>(3, 5, 42);
        let c = sample_compact_channel::<f64>(3, 5, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn path_loss_amplitude_matches_power_ratio() {
        let g: f64 = path_loss_amplitude(66.0);
        assert!((g * g - 10f64.powf(-6.6)).abs() < 1e-20);
    }
}
