use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pixel_wpt::channel::{path_loss_amplitude, sample_compact_channel_with};
use pixel_wpt::io::config::ConfigFile;
use pixel_wpt::io::csv::emit_csv;
use pixel_wpt::io::dataset::save_antenna;
use pixel_wpt::io::synthetic::{generate_synthetic_antenna, SyntheticAntennaSpec};
use pixel_wpt::multiport::beamspace_decompose;
use pixel_wpt::optimizer::{alternating_optimize, LinkModel};
use pixel_wpt::selftest::run_selftest;
use pixel_wpt::simulation::{realization_seed, run_sweep_with, AntennaSource, ExperimentConfig, Scheme, Testbed};
use pixel_wpt::{AntennaCoder, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "pixel-wpt", version, about = "Pixel-antenna MIMO wireless power transfer optimizer")]
struct Cli {
    /// Base random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Antenna dataset (JSON); a synthetic antenna is used otherwise.
    #[arg(long, global = true)]
    antenna: Option<PathBuf>,
    /// Transmit antenna counts (comma separated for sweeps).
    #[arg(long, global = true, value_delimiter = ',')]
    tx: Option<Vec<usize>>,
    /// Receive antenna counts (comma separated for sweeps).
    #[arg(long, global = true, value_delimiter = ',')]
    rx: Option<Vec<usize>>,
    #[arg(long, global = true)]
    realizations: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    power_dbm: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    path_loss_db: Option<f64>,
    /// Schemes such as `opt-pixel,svd-fixed`.
    #[arg(long, global = true, value_delimiter = ',')]
    scheme: Option<Vec<Scheme>>,
    /// Output file (CSV for sweeps, JSON for gen-antenna).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic antenna dataset.
    GenAntenna {
        #[arg(long, default_value_t = 39)]
        q: usize,
        #[arg(long, default_value_t = 72)]
        k: usize,
        #[arg(long, default_value_t = 7)]
        n_eff: usize,
        #[arg(long, default_value_t = 50.0)]
        impedance_scale: f64,
        /// Place no energy beyond the knee.
        #[arg(long)]
        exact_rank: bool,
    },
    /// Print the singular spectrum and the number of retained patterns.
    Decompose {
        #[arg(long, default_value_t = 0.998)]
        energy_fraction: f64,
    },
    /// Solve one channel realization and print the objective trace.
    Optimize {
        /// Realization index within the seed sequence.
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Monte Carlo sweep over array sizes, written as CSV.
    Sweep {
        /// Pair tx and rx counts element-wise instead of the full grid.
        #[arg(long)]
        diagonal: bool,
    },
    /// Run the oracle cross-checks.
    Selftest,
}

fn experiment_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ConfigFile::load(path)?.experiment_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.base_seed = seed;
    }
    if let Some(path) = &cli.antenna {
        config.antenna_source = AntennaSource::Dataset(path.clone());
    }
    if let Some(tx) = &cli.tx {
        config.tx_counts = tx.clone();
    }
    if let Some(rx) = &cli.rx {
        config.rx_counts = rx.clone();
    }
    if let Some(r) = cli.realizations {
        config.realizations = r;
    }
    if let Some(p) = cli.power_dbm {
        config.transmit_power_dbm = p;
    }
    if let Some(pl) = cli.path_loss_db {
        config.path_loss_db = pl;
    }
    if let Some(s) = &cli.scheme {
        config.schemes = s.clone();
    }
    Ok(config)
}

fn gen_antenna(cli: &Cli, spec: SyntheticAntennaSpec) -> Result<()> {
    let net = generate_synthetic_antenna::<f64>(&spec)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("antenna.json"));
    save_antenna(&net, &out)?;
    let basis = beamspace_decompose(&net, spec.energy_fraction)?;
    println!(
        "wrote {} (Q = {}, K = {}, N_eff = {})",
        out.display(),
        net.q_switches(),
        net.k_angles(),
        basis.n_eff
    );
    Ok(())
}

fn decompose(cli: &Cli, energy_fraction: f64) -> Result<()> {
    let net = experiment_config(cli)?.antenna_source.load()?;
    let basis = beamspace_decompose(&net, energy_fraction)?;
    let total: f64 = basis.spectrum.iter().map(|s| s * s).sum();
    let mut cum = 0.0;
    println!("index,singular_value,cumulative_energy");
    for (i, s) in basis.spectrum.iter().enumerate() {
        cum += s * s;
        println!("{},{:e},{:.6}", i + 1, s, cum / total);
    }
    println!("N_eff = {} at energy fraction {}", basis.n_eff, energy_fraction);
    Ok(())
}

fn optimize(cli: &Cli, index: usize) -> Result<()> {
    let config = experiment_config(cli)?;
    let testbed = Testbed::new(config)?;
    let config = &testbed.config;
    let (m, n) = (config.tx_counts[0], config.rx_counts[0]);
    let seed = realization_seed(config.base_seed, m, n, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_eff = testbed.basis.n_eff;
    let q = testbed.net.q_switches();
    let h_c = sample_compact_channel_with::<f64, _>(n * n_eff, m * n_eff, &mut rng);
    let tx: Vec<AntennaCoder> = (0..m).map(|_| AntennaCoder::random(q, &mut rng)).collect();
    let rx: Vec<AntennaCoder> = (0..n).map(|_| AntennaCoder::random(q, &mut rng)).collect();
    let mut link = LinkModel::new(
        &testbed.net,
        &testbed.basis,
        &h_c,
        path_loss_amplitude(config.path_loss_db),
        config.rectenna,
        config.power_budget_w(),
        m,
        n,
    )?;
    let optimizer = pixel_wpt::optimizer::OptimizerConfig {
        rng_seed: seed,
        ..config.optimizer
    };
    let report = alternating_optimize(&mut link, (tx, rx), None, &optimizer)?;
    println!("M = {m}, N = {n}, N_eff = {n_eff}, realization seed {seed}");
    println!("iteration,dc_power_w");
    for (i, v) in report.objective_trace.iter().enumerate() {
        println!("{i},{v:e}");
    }
    println!("converged: {} after {} iterations", report.converged, report.iterations);
    for (side, bank) in [("tx", &report.final_coders.0), ("rx", &report.final_coders.1)] {
        for (k, c) in bank.coders.iter().enumerate() {
            println!("{side}[{k}] coder {c}");
        }
    }
    let w: Vec<String> = report
        .final_beamformer
        .weights
        .iter()
        .map(|z| format!("{:e}{:+e}j", z.re, z.im))
        .collect();
    println!("beamformer [{}]", w.join(", "));
    Ok(())
}

fn sweep(cli: &Cli, diagonal: bool) -> Result<()> {
    let mut config = experiment_config(cli)?;
    config.diagonal |= diagonal;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
    let testbed = Testbed::new(config)?;
    let result = run_sweep_with(&testbed, |partial| {
        let row = partial.rows.last().expect("callback follows a new row");
        eprintln!(
            "M={} N={} {}: {:.4} dBm (± {:.2e} W)",
            row.m, row.n, row.scheme, row.mean_dc_power_dbm, row.std_error
        );
        emit_csv(partial, &out)
    })?;
    emit_csv(&result, &out)?;
    println!("wrote {} ({} rows)", out.display(), result.rows.len());
    Ok(())
}

fn selftest(cli: &Cli) -> Result<()> {
    let results = run_selftest(cli.seed.unwrap_or(1))?;
    let mut failed = 0;
    for r in &results {
        println!("[{}] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        return Err(Error::InvalidParameter(format!("{failed} self-test check(s) failed")));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenAntenna {
            q,
            k,
            n_eff,
            impedance_scale,
            exact_rank,
        } => {
            let mut spec = SyntheticAntennaSpec::new(*q, *k, *n_eff, cli.seed.unwrap_or(1));
            spec.impedance_scale = *impedance_scale;
            if *exact_rank {
                spec = spec.exact_rank();
            }
            gen_antenna(cli, spec)
        }
        Command::Decompose { energy_fraction } => decompose(cli, *energy_fraction),
        Command::Optimize { index } => optimize(cli, *index),
        Command::Sweep { diagonal } => sweep(cli, *diagonal),
        Command::Selftest => selftest(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
