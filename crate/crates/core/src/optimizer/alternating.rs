//! Alternating optimization of the transmit beamformer and antenna coders.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{effective_channel, CoderBank};
use crate::error::{Error, Result};
use crate::multiport::{coder_pattern, AntennaCoder, BeamspaceBasis, MultiportNetwork, Side};
use crate::optimizer::beamforming::{init_beamformer_svd, optimize_beamformer, Beamformer};
use crate::optimizer::sebo::sebo;
use crate::optimizer::OptimizerConfig;
use crate::rectenna::{DcModel, RectennaParams};
use crate::scalar::{CMatrix, CVector, Real};

const PATTERN_CACHE_LIMIT: usize = 1 << 16;

/// One channel realization between two arrays of identical pixel antennas.
///
/// Pattern coders depend only on the coder bits and the side, so they are
/// memoized across the many objective evaluations of a coder search.
#[derive(Debug, Clone)]
pub struct LinkModel<'a, T: Real> {
    net: &'a MultiportNetwork<T>,
    basis: &'a BeamspaceBasis<T>,
    h_compact: &'a CMatrix<T>,
    amplitude_scale: T,
    params: RectennaParams<T>,
    model: DcModel<T>,
    power_budget: T,
    n_tx: usize,
    n_rx: usize,
    cache: HashMap<(Side, AntennaCoder), CVector<T>>,
}

impl<'a, T: Real> LinkModel<'a, T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        net: &'a MultiportNetwork<T>,
        basis: &'a BeamspaceBasis<T>,
        h_compact: &'a CMatrix<T>,
        amplitude_scale: T,
        params: RectennaParams<T>,
        power_budget: T,
        n_tx: usize,
        n_rx: usize,
    ) -> Result<Self> {
        if n_tx == 0 || n_rx == 0 {
            return Err(Error::InvalidParameter("array sizes must be positive".into()));
        }
        if !(power_budget > T::zero()) {
            return Err(Error::NonPositivePower(power_budget.as_f64()));
        }
        let n_eff = basis.n_eff;
        if h_compact.ncols() != n_tx * n_eff {
            return Err(Error::dims("compact channel columns", n_tx * n_eff, h_compact.ncols()));
        }
        if h_compact.nrows() != n_rx * n_eff {
            return Err(Error::dims("compact channel rows", n_rx * n_eff, h_compact.nrows()));
        }
        Ok(Self {
            net,
            basis,
            h_compact,
            amplitude_scale,
            model: DcModel::new(&params)?,
            params,
            power_budget,
            n_tx,
            n_rx,
            cache: HashMap::new(),
        })
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn q_switches(&self) -> usize {
        self.net.q_switches()
    }

    pub fn params(&self) -> &RectennaParams<T> {
        &self.params
    }

    pub fn power_budget(&self) -> T {
        self.power_budget
    }

    fn pattern(&mut self, side: Side, coder: &AntennaCoder) -> Result<CVector<T>> {
        if let Some(w) = self.cache.get(&(side, coder.clone())) {
            return Ok(w.clone());
        }
        let w = coder_pattern(self.net, self.basis, coder, side)?;
        if self.cache.len() >= PATTERN_CACHE_LIMIT {
            self.cache.clear();
        }
        self.cache.insert((side, coder.clone()), w.clone());
        Ok(w)
    }

    fn bank(&mut self, side: Side, coders: &[AntennaCoder]) -> Result<CoderBank<T>> {
        let blocks = coders
            .iter()
            .enumerate()
            .map(|(m, c)| {
                self.pattern(side, c).map_err(|e| match e {
                    Error::ZeroPattern { .. } => Error::ZeroPattern { element: Some(m) },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CoderBank::from_blocks(side, coders.to_vec(), blocks)
    }

    pub fn banks(&mut self, tx: &[AntennaCoder], rx: &[AntennaCoder]) -> Result<(CoderBank<T>, CoderBank<T>)> {
        if tx.len() != self.n_tx {
            return Err(Error::dims("transmit coders", self.n_tx, tx.len()));
        }
        if rx.len() != self.n_rx {
            return Err(Error::dims("receive coders", self.n_rx, rx.len()));
        }
        Ok((self.bank(Side::Transmit, tx)?, self.bank(Side::Receive, rx)?))
    }

    /// Effective N×M channel for the given coders.
    pub fn channel(&mut self, tx: &[AntennaCoder], rx: &[AntennaCoder]) -> Result<CMatrix<T>> {
        let (bt, br) = self.banks(tx, rx)?;
        effective_channel(self.h_compact, self.amplitude_scale, &bt, &br)
    }

    /// DC-combined output power for coders and beamformer.
    pub fn dc_power(&mut self, tx: &[AntennaCoder], rx: &[AntennaCoder], p: &CVector<T>) -> Result<T> {
        let h = self.channel(tx, rx)?;
        if h.ncols() != p.len() {
            return Err(Error::dims("beamformer length", h.ncols(), p.len()));
        }
        Ok(self.model.combined_power(&(h * p)))
    }

    /// SEBO over all coders (transmit first) with the beamformer fixed.
    pub fn optimize_coders(
        &mut self,
        tx: &[AntennaCoder],
        rx: &[AntennaCoder],
        p: &CVector<T>,
        config: &OptimizerConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<CoderSearch<T>> {
        let n_tx = self.n_tx;
        let opts = config.sebo_options(self.q_switches());
        let initial: Vec<AntennaCoder> = tx.iter().chain(rx).cloned().collect();
        let mut objective = |coders: &[AntennaCoder]| {
            let (t, r) = coders.split_at(n_tx);
            self.dc_power(t, r, p)
        };
        let outcome = sebo(&mut objective, initial, &opts, rng)?;
        let mut coders = outcome.coders;
        let rx_out = coders.split_off(n_tx);
        Ok(CoderSearch {
            tx: coders,
            rx: rx_out,
            value: outcome.value,
            evaluations: outcome.evaluations,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoderSearch<T: Real> {
    pub tx: Vec<AntennaCoder>,
    pub rx: Vec<AntennaCoder>,
    pub value: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T: Real> {
    /// DC power before the first iteration, then after each iteration.
    pub objective_trace: Vec<T>,
    pub final_beamformer: Beamformer<T>,
    pub final_coders: (CoderBank<T>, CoderBank<T>),
    pub iterations: usize,
    pub converged: bool,
    pub coder_evaluations: usize,
}

impl<T: Real> SolveReport<T> {
    pub fn objective(&self) -> T {
        *self.objective_trace.last().expect("trace holds the initial objective")
    }
}

/// Alternate quasi-Newton beamforming and SEBO coder updates.
///
/// Each iteration rebuilds the effective channel from the current coders,
/// refines the beamformer (starting from the better of the previous
/// beamformer and the channel's SVD direction), then searches the coders
/// with the beamformer fixed. Stops once the relative objective change drops
/// below `ao_tolerance` or after `ao_max_iters` iterations. When
/// `initial_beamformer` is `None`, the SVD beamformer of the initial channel
/// is used.
pub fn alternating_optimize<T: Real>(
    link: &mut LinkModel<'_, T>,
    initial_coders: (Vec<AntennaCoder>, Vec<AntennaCoder>),
    initial_beamformer: Option<Beamformer<T>>,
    config: &OptimizerConfig,
) -> Result<SolveReport<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let power_budget = link.power_budget();
    let params = *link.params();
    let (mut tx, mut rx) = initial_coders;

    let mut p = match initial_beamformer {
        Some(bf) => Beamformer::on_power_sphere(&bf.weights, power_budget)?,
        None => init_beamformer_svd(&link.channel(&tx, &rx)?, power_budget)?,
    };
    let mut trace = vec![link.dc_power(&tx, &rx, &p.weights)?];
    let mut converged = false;
    let mut iterations = 0;
    let mut coder_evaluations = 0;
    let tol = T::lit(config.ao_tolerance);

    while iterations < config.ao_max_iters {
        iterations += 1;
        let previous = *trace.last().expect("non-empty trace");

        let h = link.channel(&tx, &rx)?;
        let svd = init_beamformer_svd(&h, power_budget)?;
        let warm = link.dc_power(&tx, &rx, &p.weights)?;
        let start = if link.dc_power(&tx, &rx, &svd.weights)? > warm { svd } else { p.clone() };
        let solution = optimize_beamformer(&h, &params, power_budget, &start, config)?;

        let search = link.optimize_coders(&tx, &rx, &solution.beamformer.weights, config, &mut rng)?;
        coder_evaluations += search.evaluations;

        if search.value < previous {
            // Both half-steps are ascent steps; a drop means round-off made
            // the candidate indistinguishable from the incumbent.
            trace.push(previous);
            converged = true;
            break;
        }
        p = solution.beamformer;
        tx = search.tx;
        rx = search.rx;
        trace.push(search.value);

        let change = search.value - previous;
        let scale = if previous > T::zero() { previous } else { T::one() };
        if change / scale < tol {
            converged = true;
            break;
        }
    }

    let final_coders = link.banks(&tx, &rx)?;
    Ok(SolveReport {
        objective_trace: trace,
        final_beamformer: p,
        final_coders,
        iterations,
        converged,
        coder_evaluations,
    })
}
