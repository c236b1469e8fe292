//! Property tests over randomly generated antennas, channels and coders.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pixel_wpt::channel::{
    build_array_basis, build_coder_bank, effective_channel, sample_compact_channel, ArrayGeometry,
};
use pixel_wpt::io::synthetic::{generate_synthetic_antenna, SyntheticAntennaSpec};
use pixel_wpt::multiport::{beamspace_decompose, coder_pattern, pixel_currents, pattern_coder, radiation_pattern, Side};
use pixel_wpt::optimizer::{
    alternating_optimize, init_beamformer_svd, optimize_beamformer, sebo, Beamformer, LinkModel, OptimizerConfig,
};
use pixel_wpt::rectenna::{output_dc_voltage, total_dc_power, RectennaParams};
use pixel_wpt::scalar::{cis, cx, fnorm, vnorm, CMatrix, CVector};
use pixel_wpt::AntennaCoder;

const LINK: f64 = 5e-4;

/// (Q, K, N_eff, seed) with N_eff feasible.
fn antenna_strategy() -> impl Strategy<Value = SyntheticAntennaSpec> {
    (2usize..10, 2usize..8, any::<u64>()).prop_flat_map(|(q, k, seed)| {
        let max = (2 * k).min(q + 1) - 1;
        (1..=max).prop_map(move |n| SyntheticAntennaSpec::new(q, k, n, seed))
    })
}

fn complex_vec(len: usize) -> impl Strategy<Value = CVector<f64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_map(|v| CVector::from_iterator(v.len(), v.into_iter().map(|(re, im)| cx(re, im))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn open_ports_carry_no_current(spec in antenna_strategy(), bits in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let net = generate_synthetic_antenna::<f64>(&spec).unwrap();
        let q = spec.q_switches;
        let coder = AntennaCoder::new((0..q).map(|i| bits >> i & 1 == 1).collect());
        let c = pixel_currents(&net, &coder, cx(re, im)).unwrap();
        for p in 0..q {
            if coder.is_open(p) {
                prop_assert_eq!(c.i_pixels[p], cx(0.0, 0.0));
            }
        }
    }

    #[test]
    fn currents_are_linear_in_excitation(spec in antenna_strategy(), bits in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let net = generate_synthetic_antenna::<f64>(&spec).unwrap();
        let coder = AntennaCoder::new((0..spec.q_switches).map(|i| bits >> i & 1 == 1).collect());
        let alpha = cx(re, im);
        let unit = pixel_currents(&net, &coder, cx(1.0, 0.0)).unwrap().i_pixels;
        let scaled = pixel_currents(&net, &coder, alpha).unwrap().i_pixels;
        let diff = vnorm(&(scaled - &unit * alpha));
        prop_assert!(diff <= 1e-12 * (1.0 + alpha.norm() * vnorm(&unit)));
    }

    #[test]
    fn pattern_coders_have_unit_norm(spec in antenna_strategy(), bits in any::<u64>()) {
        let net = generate_synthetic_antenna::<f64>(&spec).unwrap();
        let basis = beamspace_decompose(&net, 0.998).unwrap();
        let coder = AntennaCoder::new((0..spec.q_switches).map(|i| bits >> i & 1 == 1).collect());
        for side in [Side::Transmit, Side::Receive] {
            let w = coder_pattern(&net, &basis, &coder, side).unwrap();
            prop_assert!((vnorm(&w) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_error_within_energy_budget(spec in antenna_strategy()) {
        let net = generate_synthetic_antenna::<f64>(&spec).unwrap();
        let basis = beamspace_decompose(&net, 0.998).unwrap();
        let mut us = basis.u.clone();
        for (c, s) in basis.s.iter().enumerate() {
            us.column_mut(c).scale_mut(*s);
        }
        let residual = fnorm(&(net.e_oc() - us * basis.v.adjoint()));
        let total = fnorm(net.e_oc());
        prop_assert!(residual * residual <= (1.0 - 0.998) * total * total * (1.0 + 1e-9));
    }

    #[test]
    fn projection_matches_coder_on_exact_rank(spec in antenna_strategy(), bits in any::<u64>()) {
        let net = generate_synthetic_antenna::<f64>(&spec.exact_rank()).unwrap();
        let basis = beamspace_decompose(&net, 0.998).unwrap();
        let coder = AntennaCoder::new((0..net.q_switches()).map(|i| bits >> i & 1 == 1).collect());
        let e = radiation_pattern(&net, &coder, cx(1.0, 0.0)).unwrap();
        let projected = basis.u.adjoint() * e;
        let projected = projected.unscale(vnorm(&projected));
        let currents = pixel_currents(&net, &coder, cx(1.0, 0.0)).unwrap();
        let w = pattern_coder(&basis, &currents, Side::Transmit).unwrap();
        prop_assert!(vnorm(&(projected - w)) < 1e-9);
    }

    #[test]
    fn coder_banks_are_semi_unitary_and_non_expansive(
        spec in antenna_strategy(),
        m in 1usize..4,
        n in 1usize..4,
        seed in any::<u64>(),
    ) {
        let net = generate_synthetic_antenna::<f64>(&spec).unwrap();
        let basis = beamspace_decompose(&net, 0.998).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = spec.q_switches;
        let tx: Vec<AntennaCoder> = (0..m).map(|_| AntennaCoder::random(q, &mut rng)).collect();
        let rx: Vec<AntennaCoder> = (0..n).map(|_| AntennaCoder::random(q, &mut rng)).collect();
        let bt = build_coder_bank(&net, &basis, &tx, Side::Transmit).unwrap();
        let br = build_coder_bank(&net, &basis, &rx, Side::Receive).unwrap();
        let wt = bt.matrix();
        let gram = wt.adjoint() * &wt;
        prop_assert!(fnorm(&(gram - CMatrix::identity(m, m))) < 1e-12);
        let h_c = sample_compact_channel::<f64>(n * basis.n_eff, m * basis.n_eff, seed);
        let h = effective_channel(&h_c, 0.3, &bt, &br).unwrap();
        prop_assert!(fnorm(&h) <= 0.3 * fnorm(&h_c) * (1.0 + 1e-12));
    }

    #[test]
    fn array_basis_preserves_column_norms(spec in antenna_strategy(), m in 1usize..5) {
        let net = generate_synthetic_antenna::<f64>(&spec).unwrap();
        let basis = beamspace_decompose(&net, 0.998).unwrap();
        let geom = ArrayGeometry::uniform(m, spec.k_angles).unwrap();
        let array = build_array_basis(&basis, &geom).unwrap();
        prop_assert_eq!(array.stacked.ncols(), m * basis.n_eff);
        for u in &array.per_element {
            for c in 0..basis.n_eff {
                prop_assert!((u.column(c).norm() - basis.u.column(c).norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dc_power_depends_only_on_amplitudes(h_seed in any::<u64>(), p in complex_vec(3), phases in proptest::collection::vec(0.0f64..6.3, 3)) {
        let params = RectennaParams::<f64>::default();
        let h = sample_compact_channel::<f64>(3, 3, h_seed) * cx(LINK, 0.0);
        let base = total_dc_power(&params, &h, &p).unwrap().total_dc_power;
        let global = total_dc_power(&params, &h, &(&p * cis(phases[0]))).unwrap().total_dc_power;
        let mut rotated = h.clone();
        for (r, phi) in phases.iter().enumerate() {
            let mut row = rotated.row_mut(r);
            row *= cis(*phi);
        }
        let rows = total_dc_power(&params, &rotated, &p).unwrap().total_dc_power;
        prop_assert!((global - base).abs() <= 1e-12 * base.max(1e-300));
        prop_assert!((rows - base).abs() <= 1e-12 * base.max(1e-300));
    }

    #[test]
    fn voltage_increases_with_amplitude(a in 0.0f64..0.05, delta in 1e-6f64..0.01) {
        let params = RectennaParams::<f64>::default();
        prop_assert!(output_dc_voltage(&params, a + delta).unwrap() > output_dc_voltage(&params, a).unwrap());
    }

    #[test]
    fn fourth_to_second_order_ratio(a in 1e-4f64..0.1) {
        let params = RectennaParams::<f64>::default();
        let second = output_dc_voltage(&params.with_order(2), a).unwrap();
        let full = output_dc_voltage(&params, a).unwrap();
        let beta2 = 50.0 / (2.0 * 1.05 * 0.025);
        let beta4 = 2500.0 / (24.0 * (1.05f64 * 0.025).powi(3));
        let expected = (beta4 * 0.375) / (beta2 * 0.5) * a * a;
        prop_assert!(((full - second) / second - expected).abs() <= 1e-9 * expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn optimized_beamformer_is_feasible_and_no_worse(n in 1usize..4, m in 1usize..5, seed in any::<u64>(), start in complex_vec(4)) {
        prop_assume!(vnorm(&start.rows(0, m).into_owned()) > 1e-3);
        let params = RectennaParams::<f64>::default();
        let h = sample_compact_channel::<f64>(n, m, seed) * cx(LINK, 0.0);
        let init = Beamformer::on_power_sphere(&start.rows(0, m).into_owned(), 4.0).unwrap();
        let sol = optimize_beamformer(&h, &params, 4.0, &init, &OptimizerConfig::default()).unwrap();
        prop_assert!((sol.beamformer.radiated_power() - 4.0).abs() <= 1e-9 * 4.0);
        prop_assert!(sol.objective >= sol.initial_objective - 1e-12 * sol.initial_objective);
    }

    #[test]
    fn sebo_never_worse_than_start(spec in antenna_strategy(), seed in any::<u64>()) {
        let net = generate_synthetic_antenna::<f64>(&spec).unwrap();
        let basis = beamspace_decompose(&net, 0.998).unwrap();
        let h_c = sample_compact_channel::<f64>(basis.n_eff, basis.n_eff, seed);
        let mut link = LinkModel::new(&net, &basis, &h_c, LINK, RectennaParams::default(), 4.0, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = spec.q_switches;
        let init = vec![AntennaCoder::random(q, &mut rng), AntennaCoder::random(q, &mut rng)];
        let p = init_beamformer_svd(&link.channel(&init[..1], &init[1..]).unwrap(), 4.0).unwrap();
        let opts = OptimizerConfig::default().sebo_options(q);
        let mut objective = |cs: &[AntennaCoder]| link.dc_power(&cs[..1], &cs[1..], &p.weights);
        let out = sebo(&mut objective, init, &opts, &mut rng).unwrap();
        prop_assert!(out.value >= out.initial_value);
    }

    #[test]
    fn alternating_trace_never_decreases(q in 3usize..8, m in 1usize..3, n in 1usize..3, seed in any::<u64>(), iters in 1usize..5) {
        let net = generate_synthetic_antenna::<f64>(&SyntheticAntennaSpec::new(q, 6, 2, seed)).unwrap();
        let basis = beamspace_decompose(&net, 0.998).unwrap();
        let h_c = sample_compact_channel::<f64>(n * basis.n_eff, m * basis.n_eff, seed);
        let mut link = LinkModel::new(&net, &basis, &h_c, LINK, RectennaParams::default(), 4.0, m, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tx = (0..m).map(|_| AntennaCoder::random(q, &mut rng)).collect();
        let rx = (0..n).map(|_| AntennaCoder::random(q, &mut rng)).collect();
        let config = OptimizerConfig { ao_max_iters: iters, rng_seed: seed, ..OptimizerConfig::default() };
        let report = alternating_optimize(&mut link, (tx, rx), None, &config).unwrap();
        prop_assert!(report.iterations <= iters);
        prop_assert_eq!(report.objective_trace.len(), report.iterations + 1);
        for w in report.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        prop_assert!((report.final_beamformer.radiated_power() - 4.0).abs() <= 1e-9 * 4.0);
    }
}

#[test]
fn single_precision_pipeline_runs() {
    let net = generate_synthetic_antenna::<f32>(&SyntheticAntennaSpec::new(6, 8, 3, 1)).unwrap();
    let basis = beamspace_decompose(&net, 0.998f32).unwrap();
    assert_eq!(basis.n_eff, 3);
    let coder = AntennaCoder::from_bits(&[1, 0, 1, 0, 0, 1]).unwrap();
    let w = coder_pattern(&net, &basis, &coder, Side::Transmit).unwrap();
    assert!((vnorm(&w) - 1.0).abs() < 1e-5);
}

#[test]
fn compact_channel_entries_are_unit_circular_gaussian() {
    let h = sample_compact_channel::<f64>(400, 250, 3);
    let n = (h.nrows() * h.ncols()) as f64;
    let mean = h.iter().fold(cx(0.0, 0.0), |a, z| a + z) / n;
    let power = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
    let pseudo = h.iter().fold(cx(0.0, 0.0), |a, z| a + z * z) / n;
    assert!(mean.norm() < 0.02, "mean {mean}");
    assert!((power - 1.0).abs() < 0.02, "variance {power}");
    assert!(pseudo.norm() < 0.02, "pseudo-variance {pseudo}");
}
