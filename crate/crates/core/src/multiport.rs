//! Pixel antenna as a (Q+1)-port network.
//!
//! Port 0 is the fed antenna port, ports 1..=Q sit across the pixel
//! switches. A closed switch (`b_q = 0`) shorts its port; an open switch
//! (`b_q = 1`) leaves it open, which forces its current to zero. Only the
//! shorted ports enter the linear solve.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{cone, modulus, vnorm, CMatrix, CVector, Cx, Real};

/// Singular values below this fraction of the largest are treated as noise.
pub const SVD_DROP_TOLERANCE: f64 = 1e-12;
/// Reduced systems with a reciprocal 1-norm condition number below this are rejected.
pub const RCOND_THRESHOLD: f64 = 1e-12;

/// Which end of the link an antenna sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Transmit,
    Receive,
}

/// Impedance matrix and open-circuit port patterns of one pixel antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiportNetwork<T: Real> {
    z_aa: Cx<T>,
    z_ap: CVector<T>,
    z_pp: CMatrix<T>,
    e_oc: CMatrix<T>,
}

impl<T: Real> MultiportNetwork<T> {
    /// Assemble a network, checking shapes and reciprocity of `z_pp`.
    ///
    /// `e_oc` stacks θ-polarized samples over K azimuths followed by the
    /// φ-polarized samples; column 0 is the antenna port.
    pub fn new(z_aa: Cx<T>, z_ap: CVector<T>, z_pp: CMatrix<T>, e_oc: CMatrix<T>) -> Result<Self> {
        let q = z_ap.len();
        if z_pp.nrows() != q || z_pp.ncols() != q {
            return Err(Error::dims("z_pp size", q, z_pp.nrows().max(z_pp.ncols())));
        }
        if e_oc.ncols() != q + 1 {
            return Err(Error::dims("e_oc columns", q + 1, e_oc.ncols()));
        }
        if e_oc.nrows() == 0 || e_oc.nrows() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "e_oc must have 2K rows with K >= 1, found {}",
                e_oc.nrows()
            )));
        }
        let scale = z_pp.iter().fold(T::zero(), |m, z| m.max(modulus(*z)));
        let tol = T::lit(1e-9) * scale;
        for r in 0..q {
            for c in (r + 1)..q {
                if modulus(z_pp[(r, c)] - z_pp[(c, r)]) > tol {
                    return Err(Error::InvalidParameter(format!(
                        "z_pp is not symmetric at ({r}, {c})"
                    )));
                }
            }
        }
        Ok(Self {
            z_aa,
            z_ap,
            z_pp,
            e_oc,
        })
    }

    pub fn q_switches(&self) -> usize {
        self.z_ap.len()
    }

    /// Number of azimuth samples K (the pattern has 2K rows).
    pub fn k_angles(&self) -> usize {
        self.e_oc.nrows() / 2
    }

    pub fn z_aa(&self) -> Cx<T> {
        self.z_aa
    }

    pub fn z_ap(&self) -> &CVector<T> {
        &self.z_ap
    }

    pub fn z_pp(&self) -> &CMatrix<T> {
        &self.z_pp
    }

    pub fn e_oc(&self) -> &CMatrix<T> {
        &self.e_oc
    }

    /// Full (Q+1)×(Q+1) impedance matrix.
    pub fn impedance_matrix(&self) -> CMatrix<T> {
        let q = self.q_switches();
        let mut z = CMatrix::zeros(q + 1, q + 1);
        z[(0, 0)] = self.z_aa;
        for p in 0..q {
            z[(0, p + 1)] = self.z_ap[p];
            z[(p + 1, 0)] = self.z_ap[p];
        }
        z.view_mut((1, 1), (q, q)).copy_from(&self.z_pp);
        z
    }
}

/// Switch states of one pixel antenna; `true` means the switch is open.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AntennaCoder {
    bits: Vec<bool>,
}

impl AntennaCoder {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Build from 0/1 integers, rejecting anything else.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .enumerate()
            .map(|(q, &b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "coder bit {q} must be 0 or 1, found {other}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Every switch closed (all pixel ports shorted).
    pub fn all_short(q: usize) -> Self {
        Self::new(vec![false; q])
    }

    pub fn all_open(q: usize) -> Self {
        Self::new(vec![true; q])
    }

    pub fn random<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Self {
        Self::new((0..q).map(|_| rng.random::<bool>()).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_open(&self, q: usize) -> bool {
        self.bits[q]
    }

    pub fn set(&mut self, q: usize, open: bool) {
        self.bits[q] = open;
    }

    pub fn flip(&mut self, q: usize) {
        self.bits[q] = !self.bits[q];
    }
}

impl fmt::Display for AntennaCoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Pixel port indices grouped by switch state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchLoad {
    pub open: Vec<usize>,
    pub short: Vec<usize>,
}

pub fn switch_load(coder: &AntennaCoder) -> SwitchLoad {
    let (open, short): (Vec<usize>, Vec<usize>) = (0..coder.len()).partition(|&q| coder.is_open(q));
    SwitchLoad { open, short }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortCurrents<T: Real> {
    pub i_antenna: Cx<T>,
    pub i_pixels: CVector<T>,
}

impl<T: Real> PortCurrents<T> {
    /// Stacked current vector `[i_A; i_P]` of length Q+1.
    pub fn stacked(&self) -> CVector<T> {
        let q = self.i_pixels.len();
        CVector::from_fn(q + 1, |r, _| {
            if r == 0 {
                self.i_antenna
            } else {
                self.i_pixels[r - 1]
            }
        })
    }
}

/// Reciprocal 1-norm condition number of `a` given its inverse.
fn rcond_1<T: Real>(a: &CMatrix<T>, inv: &CMatrix<T>) -> T {
    let norm1 = |m: &CMatrix<T>| {
        (0..m.ncols())
            .map(|c| m.column(c).iter().fold(T::zero(), |s, z| s + modulus(*z)))
            .fold(T::zero(), |mx, v| mx.max(v))
    };
    let denom = norm1(a) * norm1(inv);
    if denom > T::zero() {
        T::one() / denom
    } else {
        T::zero()
    }
}

/// Pixel port currents for antenna-port excitation `i_antenna`.
///
/// Open ports carry exactly zero current. Shorted ports solve
/// `Z_ss i_s = -z_ap[s] i_A` on the shorted subset `s`.
pub fn pixel_currents<T: Real>(
    net: &MultiportNetwork<T>,
    coder: &AntennaCoder,
    i_antenna: Cx<T>,
) -> Result<PortCurrents<T>> {
    let q = net.q_switches();
    if coder.len() != q {
        return Err(Error::dims("coder length", q, coder.len()));
    }
    let SwitchLoad { short, .. } = switch_load(coder);
    let mut i_pixels = CVector::zeros(q);
    if !short.is_empty() {
        let n = short.len();
        let reduced = DMatrix::from_fn(n, n, |r, c| net.z_pp[(short[r], short[c])]);
        let inv = reduced
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::SingularSystem { rcond: 0.0 })?;
        let rcond = rcond_1(&reduced, &inv);
        if !(rcond >= T::lit(RCOND_THRESHOLD)) {
            return Err(Error::SingularSystem {
                rcond: rcond.as_f64(),
            });
        }
        let rhs = CVector::from_fn(n, |r, _| -net.z_ap[short[r]] * i_antenna);
        let sol = inv * rhs;
        for (k, &p) in short.iter().enumerate() {
            i_pixels[p] = sol[k];
        }
    }
    Ok(PortCurrents {
        i_antenna,
        i_pixels,
    })
}

/// Far-field pattern `E_oc · i(b)` (length 2K).
pub fn radiation_pattern<T: Real>(
    net: &MultiportNetwork<T>,
    coder: &AntennaCoder,
    i_antenna: Cx<T>,
) -> Result<CVector<T>> {
    let currents = pixel_currents(net, coder, i_antenna)?;
    Ok(&net.e_oc * currents.stacked())
}

/// Truncated SVD of the open-circuit pattern matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamspaceBasis<T: Real> {
    /// 2K × N_eff orthonormal pattern basis.
    pub u: CMatrix<T>,
    /// Retained singular values, descending.
    pub s: nalgebra::DVector<T>,
    /// (Q+1) × N_eff right factor.
    pub v: CMatrix<T>,
    pub n_eff: usize,
    /// Requested cumulative energy fraction.
    pub energy_fraction: T,
    /// Fraction of ‖E_oc‖_F² actually captured by the retained values.
    pub captured_energy: T,
    /// Full descending spectrum of E_oc (diagnostic).
    pub spectrum: Vec<T>,
}

impl<T: Real> BeamspaceBasis<T> {
    pub fn n_eff(&self) -> usize {
        self.n_eff
    }

    /// Number of pattern rows (2K).
    pub fn pattern_len(&self) -> usize {
        self.u.nrows()
    }
}

/// Smallest count of leading singular values whose squared sum reaches
/// `energy_fraction` of the total. `spectrum` must be sorted descending.
///
/// Values below `SVD_DROP_TOLERANCE · s_max` are never counted.
pub fn eadof<T: Real>(spectrum: &[T], energy_fraction: T) -> Result<usize> {
    if !(energy_fraction > T::zero() && energy_fraction <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "energy fraction must lie in (0, 1], got {energy_fraction}"
        )));
    }
    let s_max = spectrum.first().copied().unwrap_or_else(T::zero);
    let total = spectrum.iter().fold(T::zero(), |a, s| a + *s * *s);
    if !(total > T::zero()) {
        return Err(Error::EmptyPattern);
    }
    let floor = T::lit(SVD_DROP_TOLERANCE) * s_max;
    let retained = spectrum.iter().take_while(|s| **s >= floor).count();
    let target = energy_fraction * total;
    let mut cum = T::zero();
    for (k, s) in spectrum.iter().take(retained).enumerate() {
        cum += *s * *s;
        if cum >= target {
            return Ok(k + 1);
        }
    }
    Ok(retained)
}

/// Truncated beamspace basis retaining `energy_fraction` of pattern energy.
pub fn beamspace_decompose<T: Real>(
    net: &MultiportNetwork<T>,
    energy_fraction: T,
) -> Result<BeamspaceBasis<T>> {
    let svd = net.e_oc.clone().svd(true, true);
    let u_full = svd.u.expect("left singular vectors requested");
    let vt_full = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let spectrum: Vec<T> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let n_eff = eadof(&spectrum, energy_fraction)?;

    let rows = net.e_oc.nrows();
    let cols = net.e_oc.ncols();
    let u = CMatrix::from_fn(rows, n_eff, |r, c| u_full[(r, order[c])]);
    let v = CMatrix::from_fn(cols, n_eff, |r, c| vt_full[(order[c], r)].conj());
    let s = nalgebra::DVector::from_fn(n_eff, |r, _| spectrum[r]);
    let total = spectrum.iter().fold(T::zero(), |a, x| a + *x * *x);
    let kept = s.iter().fold(T::zero(), |a, x| a + *x * *x);
    Ok(BeamspaceBasis {
        u,
        s,
        v,
        n_eff,
        energy_fraction,
        captured_energy: kept / total,
        spectrum,
    })
}

/// Unit-norm pattern coder: `S Vᴴ i` (transmit) or `S Vᵀ i*` (receive).
pub fn pattern_coder<T: Real>(
    basis: &BeamspaceBasis<T>,
    currents: &PortCurrents<T>,
    side: Side,
) -> Result<CVector<T>> {
    let i = currents.stacked();
    if i.len() != basis.v.nrows() {
        return Err(Error::dims("port current length", basis.v.nrows(), i.len()));
    }
    let projected = match side {
        Side::Transmit => basis.v.adjoint() * &i,
        Side::Receive => basis.v.transpose() * i.map(|z| z.conj()),
    };
    let w = CVector::from_fn(basis.n_eff, |r, _| projected[r] * basis.s[r]);
    let norm = vnorm(&w);
    let s_max = basis.s.iter().fold(T::zero(), |m, x| m.max(*x));
    if !(norm > T::default_epsilon() * s_max * vnorm(&i)) {
        return Err(Error::ZeroPattern { element: None });
    }
    Ok(w.unscale(norm))
}

/// Pattern coder of `coder` under unit antenna-port excitation.
pub fn coder_pattern<T: Real>(
    net: &MultiportNetwork<T>,
    basis: &BeamspaceBasis<T>,
    coder: &AntennaCoder,
    side: Side,
) -> Result<CVector<T>> {
    let currents = pixel_currents(net, coder, cone())?;
    pattern_coder(basis, &currents, side)
}
