//! Truncated Taylor model of a single-diode rectenna and DC combining.
//!
//! With the input signal `y(t) = a·sin(ωt + θ)`, the output voltage is
//! `Σ_{i even} β_i ζ_i a^i`, where `ζ_i` is the i-th moment of a unit sine.
//! DC combining sums the per-branch powers `v_n² / R_L`.

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, modulus, CMatrix, CVector, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectennaParams<T: Real> {
    /// Antenna resistance, Ω.
    pub r_ant: T,
    /// Load resistance, Ω.
    pub r_load: T,
    /// Diode ideality factor.
    pub ideality: T,
    /// Thermal voltage, V.
    pub thermal_voltage: T,
    /// Highest (even) Taylor order kept.
    pub taylor_order: usize,
}

impl<T: Real> Default for RectennaParams<T> {
    /// 50 Ω antenna, 5 kΩ load, ideality 1.05, 25 mV, fourth order.
    fn default() -> Self {
        Self {
            r_ant: T::lit(50.0),
            r_load: T::lit(5000.0),
            ideality: T::lit(1.05),
            thermal_voltage: T::lit(0.025),
            taylor_order: 4,
        }
    }
}

impl<T: Real> RectennaParams<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.r_ant, self.r_load, self.ideality, self.thermal_voltage];
        if positive.iter().any(|x| !(*x > T::zero())) {
            return Err(Error::InvalidParameter(
                "rectenna resistances, ideality and thermal voltage must be positive".into(),
            ));
        }
        if self.taylor_order < 2 || self.taylor_order % 2 != 0 {
            return Err(Error::UnsupportedOrder {
                order: self.taylor_order,
                max: self.taylor_order,
            });
        }
        Ok(())
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.taylor_order = order;
        self
    }

    /// `ζ_i` restricted to the orders this model keeps.
    pub fn moment_weight(&self, order: usize) -> Result<T> {
        if order > self.taylor_order {
            return Err(Error::UnsupportedOrder {
                order,
                max: self.taylor_order,
            });
        }
        moment_weight(order)
    }
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_count(k))
}

/// `(i, β_i)` for every even `i` from 2 to the Taylor order.
pub fn taylor_coefficients<T: Real>(params: &RectennaParams<T>) -> Vec<(usize, T)> {
    let idvt = params.ideality * params.thermal_voltage;
    (2..=params.taylor_order)
        .step_by(2)
        .map(|i| {
            let num = params.r_ant.powi((i / 2) as i32);
            let den = factorial::<T>(i) * idvt.powi((i - 1) as i32);
            (i, num / den)
        })
        .collect()
}

/// Mean of `sin^i` over one period: `C(i, i/2) / 2^i` for even `i`.
pub fn moment_weight<T: Real>(order: usize) -> Result<T> {
    if order < 2 || order % 2 != 0 {
        return Err(Error::UnsupportedOrder { order, max: order.max(2) & !1 });
    }
    // (i-1)!! / i!!
    let mut w = T::one();
    let mut k = 1;
    while k < order {
        w = w * T::from_count(k) / T::from_count(k + 1);
        k += 2;
    }
    Ok(w)
}

/// Precomputed `β_i ζ_i` products; evaluates voltages quickly.
#[derive(Debug, Clone, PartialEq)]
pub struct DcModel<T: Real> {
    /// `(i/2, β_i ζ_i)`: power of `a²` and its coefficient.
    terms: Vec<(i32, T)>,
    r_load: T,
}

impl<T: Real> DcModel<T> {
    pub fn new(params: &RectennaParams<T>) -> Result<Self> {
        params.validate()?;
        let terms = taylor_coefficients(params)
            .into_iter()
            .map(|(i, beta)| Ok(((i / 2) as i32, beta * moment_weight::<T>(i)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            terms,
            r_load: params.r_load,
        })
    }

    pub fn r_load(&self) -> T {
        self.r_load
    }

    /// Output voltage for squared input amplitude `s = a²`.
    #[inline]
    pub fn voltage_sq(&self, s: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, &(p, c)| acc + c * s.powi(p))
    }

    /// `dv/ds` at squared amplitude `s`.
    #[inline]
    pub fn dvoltage_dsq(&self, s: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, &(p, c)| {
            acc + c * T::from_count(p as usize) * s.powi(p - 1)
        })
    }

    pub fn voltage(&self, amplitude: T) -> T {
        self.voltage_sq(amplitude * amplitude)
    }

    /// Combined DC power for the received complex amplitudes `y = Hp`.
    pub fn combined_power(&self, y: &CVector<T>) -> T {
        compensated_sum(y.iter().map(|z| {
            let v = self.voltage_sq(z.norm_sqr());
            v * v
        })) / self.r_load
    }
}

/// Output DC voltage for received amplitude `a = |[Hp]_n|`.
pub fn output_dc_voltage<T: Real>(params: &RectennaParams<T>, amplitude: T) -> Result<T> {
    if amplitude < T::zero() {
        return Err(Error::InvalidParameter("amplitude must be non-negative".into()));
    }
    Ok(DcModel::new(params)?.voltage(amplitude))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarvestResult<T: Real> {
    /// Rectifier output voltage per receive antenna, V.
    pub per_antenna_voltage: Vec<T>,
    /// `Σ v_n² / R_L`, W.
    pub total_dc_power: T,
    /// Average RF input power `ζ₂ a²` per branch (diagnostic).
    pub input_power: Vec<T>,
}

/// DC-combined output power for beamformer `p` over channel `h` (N×M).
pub fn total_dc_power<T: Real>(
    params: &RectennaParams<T>,
    h_effective: &CMatrix<T>,
    beamformer: &CVector<T>,
) -> Result<HarvestResult<T>> {
    if h_effective.ncols() != beamformer.len() {
        return Err(Error::dims("beamformer length", h_effective.ncols(), beamformer.len()));
    }
    let model = DcModel::new(params)?;
    let y = h_effective * beamformer;
    let half = T::lit(0.5);
    let per_antenna_voltage: Vec<T> = y.iter().map(|z| model.voltage(modulus(*z))).collect();
    let input_power = y.iter().map(|z| half * z.norm_sqr()).collect();
    let total_dc_power =
        compensated_sum(per_antenna_voltage.iter().map(|v| *v * *v)) / params.r_load;
    Ok(HarvestResult {
        per_antenna_voltage,
        total_dc_power,
        input_power,
    })
}
