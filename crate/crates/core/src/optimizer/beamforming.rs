//! Transmit beamforming for DC-combined output power.
//!
//! The power constraint is removed by writing `p = √(2P)·p₀/‖p₀‖` and
//! optimizing over the 2M real components of `p₀` with BFGS.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::optimizer::quasi_newton::{minimize, BfgsOptions, BfgsStatus};
use crate::optimizer::OptimizerConfig;
use crate::rectenna::{DcModel, RectennaParams};
use crate::scalar::{cx, fnorm, vnorm, CMatrix, CVector, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer<T: Real> {
    pub weights: CVector<T>,
    /// Transmit power P, W; feasible beamformers satisfy ½‖p‖² ≤ P.
    pub power_budget: T,
}

impl<T: Real> Beamformer<T> {
    /// Scale `direction` onto the power sphere ½‖p‖² = P.
    pub fn on_power_sphere(direction: &CVector<T>, power_budget: T) -> Result<Self> {
        let norm = vnorm(direction);
        if !(norm > T::zero()) {
            return Err(Error::InvalidParameter("beamformer direction is zero".into()));
        }
        let amp = (T::lit(2.0) * power_budget).sqrt();
        Ok(Self {
            weights: direction * cx(amp / norm, T::zero()),
            power_budget,
        })
    }

    /// ½‖p‖².
    pub fn radiated_power(&self) -> T {
        let n = vnorm(&self.weights);
        T::lit(0.5) * n * n
    }
}

/// Dominant right singular vector of `h`, scaled to ½‖p‖² = P.
pub fn init_beamformer_svd<T: Real>(h_effective: &CMatrix<T>, power_budget: T) -> Result<Beamformer<T>> {
    if !(fnorm(h_effective) > T::zero()) {
        return Err(Error::ZeroChannel);
    }
    let svd = h_effective.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (best, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, T::zero()), |(bi, bs), (i, s)| if *s > bs { (i, *s) } else { (bi, bs) });
    let v1 = v_t.row(best).adjoint();
    Beamformer::on_power_sphere(&v1, power_budget)
}

/// DC output power as a function of the beamformer, with gradients.
#[derive(Debug, Clone)]
pub struct BeamformingObjective<'a, T: Real> {
    h: &'a CMatrix<T>,
    model: DcModel<T>,
    amplitude: T,
}

impl<'a, T: Real> BeamformingObjective<'a, T> {
    pub fn new(h: &'a CMatrix<T>, params: &RectennaParams<T>, power_budget: T) -> Result<Self> {
        if !(power_budget > T::zero()) {
            return Err(Error::NonPositivePower(power_budget.as_f64()));
        }
        Ok(Self {
            h,
            model: DcModel::new(params)?,
            amplitude: (T::lit(2.0) * power_budget).sqrt(),
        })
    }

    pub fn n_tx(&self) -> usize {
        self.h.ncols()
    }

    /// Total DC power for beamformer `p`.
    pub fn power(&self, p: &CVector<T>) -> T {
        self.model.combined_power(&(self.h * p))
    }

    /// Value and real gradient with respect to `(Re p, Im p)`, returned as a
    /// complex vector whose real/imaginary parts are the two partials.
    pub fn power_and_gradient(&self, p: &CVector<T>) -> (T, CVector<T>) {
        let y = self.h * p;
        let r_load = self.model.r_load();
        let two = T::lit(2.0);
        let mut weighted = CVector::zeros(y.len());
        let mut total = T::zero();
        for (n, yn) in y.iter().enumerate() {
            let s = yn.norm_sqr();
            let v = self.model.voltage_sq(s);
            total += v * v;
            // dF/ds_n = 2 v dv/ds / R_L; ∂s/∂p* = Hᴴ y
            let g = two * v * self.model.dvoltage_dsq(s) / r_load;
            weighted[n] = *yn * cx(g, T::zero());
        }
        let grad = self.h.adjoint() * weighted * cx(two, T::zero());
        (total / r_load, grad)
    }

    /// Map the unconstrained real vector `[Re p₀; Im p₀]` onto the power sphere.
    pub fn to_beamformer(&self, x: &DVector<T>) -> CVector<T> {
        let m = self.n_tx();
        let norm = x.norm();
        let scale = self.amplitude / norm;
        CVector::from_fn(m, |i, _| cx(x[i] * scale, x[m + i] * scale))
    }

    /// Objective and gradient in the unconstrained variable.
    pub fn reparametrized(&self, x: &DVector<T>) -> (T, DVector<T>) {
        let m = self.n_tx();
        let norm = x.norm();
        let p = self.to_beamformer(x);
        let (value, gp) = self.power_and_gradient(&p);
        // dp = (c/‖x‖)(dx − u uᵀdx) in real coordinates, u = x/‖x‖.
        let gp_real = DVector::from_fn(2 * m, |i, _| if i < m { gp[i].re } else { gp[i - m].im });
        let u = x / norm;
        let radial = u.dot(&gp_real);
        let grad = (gp_real - u * radial) * (self.amplitude / norm);
        (value, grad)
    }
}

/// Real unconstrained coordinates `[Re p; Im p]`.
pub fn to_real_coordinates<T: Real>(p: &CVector<T>) -> DVector<T> {
    let m = p.len();
    DVector::from_fn(2 * m, |i, _| if i < m { p[i].re } else { p[i - m].im })
}

/// Central finite-difference gradient of a real function.
pub fn finite_difference_gradient<T: Real, F: FnMut(&DVector<T>) -> T>(mut f: F, x: &DVector<T>, relative_step: T) -> DVector<T> {
    let scale = x.norm().max(T::one());
    let h = relative_step * scale;
    DVector::from_fn(x.len(), |i, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        (f(&xp) - f(&xm)) / (h + h)
    })
}

/// How the quasi-Newton step obtains gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSolution<T: Real> {
    pub beamformer: Beamformer<T>,
    /// DC power at the returned beamformer, W.
    pub objective: T,
    pub initial_objective: T,
    pub iterations: usize,
    /// Gradient norm of the normalized objective at exit.
    pub gradient_norm: T,
    pub status: BfgsStatus,
}

/// Quasi-Newton beamformer refinement starting from `init`.
///
/// The objective is divided by its starting value so tolerances are
/// relative. The returned beamformer never has lower DC power than `init`.
pub fn optimize_beamformer<T: Real>(
    h_effective: &CMatrix<T>,
    params: &RectennaParams<T>,
    power_budget: T,
    init: &Beamformer<T>,
    config: &OptimizerConfig,
) -> Result<BeamformerSolution<T>> {
    if !(fnorm(h_effective) > T::zero()) {
        return Err(Error::ZeroChannel);
    }
    if init.weights.len() != h_effective.ncols() {
        return Err(Error::dims("initial beamformer length", h_effective.ncols(), init.weights.len()));
    }
    let objective = BeamformingObjective::new(h_effective, params, power_budget)?;
    let start = Beamformer::on_power_sphere(&init.weights, power_budget)?;
    let initial_objective = objective.power(&start.weights);
    let reference = if initial_objective > T::zero() {
        initial_objective
    } else {
        objective.power(&init_beamformer_svd(h_effective, power_budget)?.weights)
    };
    if !(reference > T::zero()) {
        return Err(Error::ZeroChannel);
    }

    let x0 = to_real_coordinates(&start.weights) / (T::lit(2.0) * power_budget).sqrt();
    let opts = BfgsOptions {
        gradient_tolerance: T::lit(config.qn_gradient_tolerance),
        max_iterations: config.qn_max_iters,
        ..BfgsOptions::default()
    };
    let outcome = match config.gradient {
        GradientMode::Analytic => minimize(
            |x| {
                let (v, g) = objective.reparametrized(x);
                (-v / reference, -g / reference)
            },
            x0,
            &opts,
        ),
        GradientMode::FiniteDifference => minimize(
            |x| {
                let value = |z: &DVector<T>| -objective.power(&objective.to_beamformer(z)) / reference;
                (value(x), finite_difference_gradient(value, x, T::lit(1e-6)))
            },
            x0,
            &opts,
        ),
    };

    let candidate = objective.to_beamformer(&outcome.x);
    let candidate_objective = objective.power(&candidate);
    let (weights, value) = if candidate_objective >= initial_objective {
        (candidate, candidate_objective)
    } else {
        (start.weights, initial_objective)
    };
    Ok(BeamformerSolution {
        beamformer: Beamformer::on_power_sphere(&weights, power_budget)?,
        objective: value,
        initial_objective,
        iterations: outcome.iterations,
        gradient_norm: outcome.gradient_norm,
        status: outcome.status,
    })
}
