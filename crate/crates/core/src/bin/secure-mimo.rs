use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use secure_mimo::config::{db_to_linear, order_powers_at};
use secure_mimo::harness::{
    point_label, point_rows, realize, run_point_with, run_sweep, run_trials, write_rows, Axis, Scheme, SweepSpec,
    TrialOptions,
};
use secure_mimo::mfan::default_phi_grid;
use secure_mimo::{asymptotic_rate, io as dump, Error, Result, SystemConfig, ValidatedConfig};

#[derive(Parser)]
#[command(name = "secure-mimo", version, about = "Secure multi-cell massive MIMO downlink under pilot attack")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration (defaults to the reference scenario).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the downlink SNR, in dB.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Override the attack power ratio, in dB.
    #[arg(long)]
    rho_db: Option<f64>,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Run {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one operating point.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: Run,
        /// Also write every trial's gains to this CSV.
        #[arg(long)]
        dump_gains: Option<PathBuf>,
    },
    /// Closed-form per-user rates.
    Asymptotic {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one parameter over a grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: Run,
        /// snr (dB), rho (linear), T or Nt.
        #[arg(long)]
        axis: Axis,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "proposed,asymptotic")]
        schemes: Vec<Scheme>,
    },
    /// Proposed scheme and MF-AN at the same operating point.
    CompareMfan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: Run,
        /// Candidate power splits for MF-AN.
        #[arg(long, value_delimiter = ',')]
        phi: Option<Vec<f64>>,
    },
    /// Eigenvalue spectrum of one trial's uplink Gram matrix.
    SpectrumDump {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long, default_value_t = 0)]
        bs: usize,
        /// Also dump the observation and channels of this BS as matrix files.
        #[arg(long)]
        matrix_dir: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<SystemConfig> {
    let mut cfg = match &common.config {
        Some(path) => SystemConfig::from_json_file(path)?,
        None => SystemConfig::reference(),
    };
    if let Some(snr) = common.snr_db {
        cfg.set_snr_db(snr);
    }
    if let Some(rho) = common.rho_db {
        cfg.set_rho(db_to_linear(rho));
    }
    Ok(cfg)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn simulate(cfg: &ValidatedConfig, run: &Run, out: &Option<PathBuf>, dump_gains: &Option<PathBuf>) -> Result<()> {
    let trials = run_trials(cfg, run.trials, run.seed, run.workers, TrialOptions::default())?;
    if let Some(path) = dump_gains {
        let gains: Vec<_> = trials.iter().map(|t| t.gains.clone()).collect();
        dump::write_gains(&gains, BufWriter::new(File::create(path)?))?;
    }
    let point = secure_mimo::harness::summarize(cfg, &trials, 1.0, None, run.seed)?;
    eprintln!(
        "sum secrecy rate {:.3} +/- {:.3} bits (closed form {:.3})",
        point.secrecy.sum_secrecy_bits, point.secrecy.sum_stderr, point.asymptotic.sum_rate_bits
    );
    let rows = point_rows(point_label(cfg), &point, &[Scheme::Proposed, Scheme::Asymptotic]);
    write_rows(&rows, output(out)?)
}

fn asymptotic(cfg: &SystemConfig, out: &Option<PathBuf>) -> Result<()> {
    let report = asymptotic_rate(cfg);
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record(["k", "a1", "a2", "gamma_bar", "rate_bits"])?;
    for (k, u) in report.users.iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            u.a1.to_string(),
            u.a2.to_string(),
            u.gamma_bar.to_string(),
            u.rate_bits.to_string(),
        ])?;
    }
    w.flush()?;
    eprintln!("sum rate {:.3} bits", report.sum_rate_bits);
    Ok(())
}

fn compare_mfan(cfg: &ValidatedConfig, run: &Run, phis: &[f64], out: &Option<PathBuf>) -> Result<()> {
    let point = run_point_with(cfg, run.trials, run.seed, run.workers, Some(phis))?;
    if let Some((m, r)) = &point.mfan {
        eprintln!(
            "proposed {:.3} +/- {:.3} bits, {} best phi {:.2}: {:.3} +/- {:.3} bits",
            point.secrecy.sum_secrecy_bits,
            point.secrecy.sum_stderr,
            secure_mimo::mfan::SCHEME_LABEL,
            m.phi(),
            r.sum_secrecy_bits,
            r.sum_stderr
        );
    }
    let rows = point_rows(point_label(cfg), &point, &[Scheme::Proposed, Scheme::Mfan]);
    write_rows(&rows, output(out)?)
}

fn spectrum(cfg: &ValidatedConfig, seed: u64, trial: usize, bs: usize, out: &Option<PathBuf>, dir: &Option<PathBuf>) -> Result<()> {
    if bs >= cfg.cells() {
        return Err(Error::InvalidConfig(format!("bs {bs} out of range (0..{})", cfg.cells())));
    }
    let real = realize(cfg, secure_mimo::rng::trial_seed(seed, trial))?;
    let est = secure_mimo::harness::estimate_at_bs(cfg, &real.observations[bs], &real.sources.pilots, bs)?;
    dump::write_spectrum(&est.eigen, &order_powers_at(cfg, bs), output(out)?)?;
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        let write = |name: &str, m: &secure_mimo::linalg::CMatrix| -> Result<()> {
            dump::write_matrix(m, BufWriter::new(File::create(Path::new(dir).join(name))?))
        };
        write(&format!("y0_bs{bs}.csv"), real.observations[bs].y0())?;
        write(&format!("channels_bs{bs}.csv"), &real.channels.users[bs])?;
        write(&format!("eve_bs{bs}.csv"), real.channels.eve(bs))?;
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate { common, run, dump_gains } => {
            simulate(&load(&common)?.validate()?, &run, &common.out, &dump_gains)
        }
        Command::Asymptotic { common } => asymptotic(load(&common)?.validate()?.config(), &common.out),
        Command::Sweep {
            common,
            run,
            axis,
            values,
            schemes,
        } => {
            let spec = SweepSpec {
                trials: run.trials,
                seed: run.seed,
                workers: run.workers,
                schemes,
                ..SweepSpec::new(axis, values)
            };
            let result = run_sweep(&load(&common)?, &spec)?;
            write_rows(&result.rows(), output(&common.out)?)
        }
        Command::CompareMfan { common, run, phi } => {
            let phis = phi.unwrap_or_else(default_phi_grid);
            compare_mfan(&load(&common)?.validate()?, &run, &phis, &common.out)
        }
        Command::SpectrumDump {
            common,
            seed,
            trial,
            bs,
            matrix_dir,
        } => spectrum(&load(&common)?.validate()?, seed, trial, bs, &common.out, &matrix_dir),
    }
}
