//! Quick oracle suite behind the `selftest` command.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    sample_compact_channel, sample_compact_channel_with, virtual_channel_consistency, ArrayGeometry, ArraySide,
};
use crate::error::Result;
use crate::io::synthetic::{generate_synthetic_antenna, SyntheticAntennaSpec};
use crate::multiport::{beamspace_decompose, pixel_currents, AntennaCoder};
use crate::optimizer::{
    finite_difference_gradient, init_beamformer_svd, optimize_beamformer, BeamformingObjective, LinkModel,
    OptimizerConfig,
};
use crate::oracle::{
    brute_force_coders, large_load_currents, max_relative_deviation, mrt_beamformer, sine_moment_quadrature,
    OPEN_LOAD_OHMS,
};
use crate::rectenna::{moment_weight, RectennaParams};
use crate::scalar::{cone, relative_frobenius_error, CMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn switch_semantics(seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut open_exact = true;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..10 {
        let net = generate_synthetic_antenna::<f64>(&SyntheticAntennaSpec::new(3, 4, 2, seed + trial))?;
        for _ in 0..5 {
            let coder = AntennaCoder::random(3, &mut rng);
            let fast = pixel_currents(&net, &coder, cone())?;
            let slow = large_load_currents(&net, &coder, cone(), OPEN_LOAD_OHMS)?;
            open_exact &= (0..3).all(|q| !coder.is_open(q) || fast.i_pixels[q] == crate::scalar::czero());
            worst = worst.max(max_relative_deviation(&fast.stacked(), &slow.stacked()));
        }
    }
    Ok(check(
        "switch semantics vs large-load oracle",
        open_exact && worst < 1e-6,
        format!("open currents exact: {open_exact}, max deviation {worst:.2e}"),
    ))
}

fn channel_paths(seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..5 {
        let spec = SyntheticAntennaSpec::new(2, 4, 3, seed + trial).exact_rank();
        let net = generate_synthetic_antenna::<f64>(&spec)?;
        let basis = beamspace_decompose(&net, 0.998)?;
        let (m, n) = (rng.random_range(1..=2), rng.random_range(1..=2));
        let geom_t = ArrayGeometry::uniform(m, 4)?;
        let geom_r = ArrayGeometry::uniform(n, 4)?;
        let tx: Vec<AntennaCoder> = (0..m).map(|_| AntennaCoder::random(2, &mut rng)).collect();
        let rx: Vec<AntennaCoder> = (0..n).map(|_| AntennaCoder::random(2, &mut rng)).collect();
        let h_v: CMatrix<f64> = sample_compact_channel_with(8, 8, &mut rng);
        let side = |geometry, coders| ArraySide {
            net: &net,
            basis: &basis,
            geometry,
            coders,
        };
        let paths = virtual_channel_consistency(&h_v, side(&geom_t, &tx), side(&geom_r, &rx))?;
        worst = worst.max(relative_frobenius_error(&paths.beamspace, &paths.pattern_domain));
    }
    Ok(check(
        "pattern-domain vs beamspace channel",
        worst < 1e-10,
        format!("max relative error {worst:.2e}"),
    ))
}

fn moments() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for order in [2, 4] {
        worst = worst.max((moment_weight::<f64>(order)? - sine_moment_quadrature(order, 256)).abs());
    }
    Ok(check("sine moments vs quadrature", worst < 1e-9, format!("max deviation {worst:.2e}")))
}

fn gradient(seed: u64) -> Result<CheckResult> {
    let params = RectennaParams::<f64>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for trial in 0..5 {
        let h: CMatrix<f64> = sample_compact_channel(3, 4, seed + trial) * crate::scalar::cx(1e-3, 0.0);
        let obj = BeamformingObjective::new(&h, &params, 1.0)?;
        let x = DVector::from_fn(8, |_, _| rng.random::<f64>() - 0.5);
        let (_, g) = obj.reparametrized(&x);
        let fd = finite_difference_gradient(|z| obj.reparametrized(z).0, &x, 1e-6);
        worst = worst.max((&g - &fd).norm() / fd.norm());
    }
    Ok(check("analytic vs finite-difference gradient", worst < 1e-5, format!("max relative error {worst:.2e}")))
}

fn miso(seed: u64) -> Result<CheckResult> {
    let params = RectennaParams::<f64>::default();
    let config = OptimizerConfig::default();
    let mut worst = 0.0f64;
    for trial in 0..5 {
        let h: CMatrix<f64> = sample_compact_channel(1, 4, seed + trial) * crate::scalar::cx(1e-3, 0.0);
        let start = crate::optimizer::Beamformer::on_power_sphere(
            &to_complex(&DVector::from_fn(8, |i, _| ((i * 7 + trial as usize) % 5) as f64 - 2.0)),
            1.0,
        )?;
        let sol = optimize_beamformer(&h, &params, 1.0, &start, &config)?;
        let mrt = BeamformingObjective::new(&h, &params, 1.0)?.power(&mrt_beamformer(&h, 1.0)?.weights);
        worst = worst.max((mrt - sol.objective).abs() / mrt);
    }
    Ok(check("MISO optimum equals MRT", worst < 1e-9, format!("max relative gap {worst:.2e}")))
}

fn to_complex(x: &DVector<f64>) -> crate::scalar::CVector<f64> {
    let m = x.len() / 2;
    crate::scalar::CVector::from_fn(m, |i, _| crate::scalar::cx(x[i], x[m + i]))
}

fn sebo_small(seed: u64) -> Result<CheckResult> {
    let params = RectennaParams::<f64>::default();
    let config = OptimizerConfig::default();
    let mut hits = 0;
    let trials = 5;
    for trial in 0..trials {
        let net = generate_synthetic_antenna::<f64>(&SyntheticAntennaSpec::new(4, 8, 3, seed + trial))?;
        let basis = beamspace_decompose(&net, 0.998)?;
        let h_c: CMatrix<f64> = sample_compact_channel(basis.n_eff, basis.n_eff, seed + 100 + trial);
        let mut link = LinkModel::new(&net, &basis, &h_c, 1e-3, params, 1.0, 1, 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed + trial);
        let tx = vec![AntennaCoder::random(4, &mut rng)];
        let rx = vec![AntennaCoder::random(4, &mut rng)];
        let p = init_beamformer_svd(&link.channel(&tx, &rx)?, 1.0)?;
        let found = link.optimize_coders(&tx, &rx, &p.weights, &config, &mut rng)?;
        let best = brute_force_coders(4, 2, |cs| link.dc_power(&cs[..1], &cs[1..], &p.weights))?
            .map_or(0.0, |(_, v)| v);
        if found.value >= 0.99 * best {
            hits += 1;
        }
    }
    Ok(check(
        "SEBO vs exhaustive search",
        hits == trials,
        format!("{hits}/{trials} instances within 1%"),
    ))
}

/// Run every check; `seed` varies the random instances.
pub fn run_selftest(seed: u64) -> Result<Vec<CheckResult>> {
    Ok(vec![
        switch_semantics(seed)?,
        channel_paths(seed)?,
        moments()?,
        gradient(seed)?,
        miso(seed)?,
        sebo_small(seed)?,
    ])
}
