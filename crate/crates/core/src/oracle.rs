//! Slow, independent reference computations used to cross-check the
//! production paths.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::multiport::{AntennaCoder, MultiportNetwork, PortCurrents};
use crate::optimizer::Beamformer;
use crate::scalar::{cx, modulus, vnorm, CMatrix, CVector, Cx, Real};

/// Load impedance standing in for an open switch.
pub const OPEN_LOAD_OHMS: f64 = 1e12;

/// Port currents from the full system `i_P = -(Z_PP + Z_L)⁻¹ z_ap i_A`,
/// with a large finite load on open switches.
pub fn large_load_currents<T: Real>(
    net: &MultiportNetwork<T>,
    coder: &AntennaCoder,
    i_antenna: Cx<T>,
    open_load: T,
) -> Result<PortCurrents<T>> {
    let q = net.q_switches();
    if coder.len() != q {
        return Err(Error::dims("coder length", q, coder.len()));
    }
    let mut z = net.z_pp().clone();
    for p in 0..q {
        if coder.is_open(p) {
            z[(p, p)] += cx(open_load, T::zero());
        }
    }
    let rhs: CVector<T> = net.z_ap().map(|x| -x * i_antenna);
    let i_pixels = z.lu().solve(&rhs).ok_or(Error::SingularSystem { rcond: 0.0 })?;
    Ok(PortCurrents { i_antenna, i_pixels })
}

/// `(1/2π) ∫₀^{2π} sinⁱ t dt` by the trapezoid rule on `samples` points.
/// The integrand is periodic and smooth, so the rule converges
/// geometrically.
pub fn sine_moment_quadrature(order: usize, samples: usize) -> f64 {
    let h = std::f64::consts::TAU / samples as f64;
    let sum: f64 = (0..samples).map(|k| (k as f64 * h).sin().powi(order as i32)).sum();
    sum / samples as f64
}

/// Every coder of length `q`, in lexicographic order (first bit most
/// significant).
pub fn all_coders(q: usize) -> impl Iterator<Item = AntennaCoder> {
    assert!(q < 32, "exhaustive enumeration limited to 31 bits");
    (0u32..(1 << q)).map(move |mask| AntennaCoder::new((0..q).map(|j| (mask >> (q - 1 - j)) & 1 == 1).collect()))
}

/// Exhaustive maximum over all joint settings of `count` coders of length
/// `q`. Infeasible settings (zero pattern, singular system) are skipped.
pub fn brute_force_coders<T: Real>(
    q: usize,
    count: usize,
    mut objective: impl FnMut(&[AntennaCoder]) -> Result<T>,
) -> Result<Option<(Vec<AntennaCoder>, T)>> {
    let total = q * count;
    assert!(total < 32, "exhaustive enumeration limited to 31 bits");
    let mut best: Option<(Vec<AntennaCoder>, T)> = None;
    for mask in 0u32..(1 << total) {
        let coders: Vec<AntennaCoder> = (0..count)
            .map(|a| AntennaCoder::new((0..q).map(|j| (mask >> (total - 1 - (a * q + j))) & 1 == 1).collect()))
            .collect();
        match objective(&coders) {
            Ok(v) => {
                if best.as_ref().is_none_or(|(_, b)| v > *b) {
                    best = Some((coders, v));
                }
            }
            Err(Error::ZeroPattern { .. } | Error::SingularSystem { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// Maximum ratio transmission `√(2P)·h*/‖h‖` for a single-output channel.
pub fn mrt_beamformer<T: Real>(h_row: &CMatrix<T>, power_budget: T) -> Result<Beamformer<T>> {
    if h_row.nrows() != 1 {
        return Err(Error::dims("MRT channel rows", 1, h_row.nrows()));
    }
    let direction = CVector::from_fn(h_row.ncols(), |c, _| h_row[(0, c)].conj());
    if !(vnorm(&direction) > T::zero()) {
        return Err(Error::ZeroChannel);
    }
    Beamformer::on_power_sphere(&direction, power_budget)
}

/// `|aᴴb| / (‖a‖‖b‖)`.
pub fn normalized_inner_product<T: Real>(a: &CVector<T>, b: &CVector<T>) -> T {
    modulus(a.dotc(b)) / (vnorm(a) * vnorm(b))
}

/// Largest absolute entry difference relative to the largest entry of `reference`.
pub fn max_relative_deviation<T: Real>(value: &CVector<T>, reference: &CVector<T>) -> T {
    let scale = reference.iter().fold(T::zero(), |m, z| m.max(modulus(*z)));
    let diff = value
        .iter()
        .zip(reference.iter())
        .fold(T::zero(), |m, (a, b)| m.max(modulus(*a - *b)));
    if scale > T::zero() {
        diff / scale
    } else {
        diff
    }
}

/// Dense block-diagonal coder matrix product `W_Rᴴ (g H_C) W_T`.
pub fn dense_effective_channel<T: Real>(
    h_compact: &CMatrix<T>,
    amplitude_scale: T,
    w_t: &CMatrix<T>,
    w_r: &CMatrix<T>,
) -> CMatrix<T> {
    let scaled: DMatrix<Cx<T>> = h_compact.map(|z| z * cx(amplitude_scale, T::zero()));
    w_r.adjoint() * scaled * w_t
}
