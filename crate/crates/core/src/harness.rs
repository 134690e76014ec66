//! Trial scheduling, operating points and parameter sweeps.
//!
//! Trials run in parallel, each from its own derived seed; results are
//! collected in trial order and reduced sequentially, so every number is
//! independent of the worker count. All grid points of a sweep reuse the
//! same trial seeds (common random numbers), which makes trends along the
//! sweep axis paired comparisons rather than differences of independent
//! Monte Carlo runs.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{asymptotic_rate, AsymptoticReport};
use crate::config::{linear_to_db, order_powers_at, SystemConfig, ValidatedConfig};
use crate::downlink::{build_precoders, compute_gains, evaluate_secrecy, GainSamples, SecrecyReport, UserLink};
use crate::error::{Error, Result};
use crate::estimator::{
    despread_and_estimate, eigendecompose_ascending, eigenvalues_layered, sample_gram, select_desired_subspace,
    subspace_alignment, EigenBasis, SubspaceEstimate,
};
use crate::linalg::norm_sqr;
use crate::mfan::{best_phi, mfan_trial, MfanConfig, MfanTrial};
use crate::rng::trial_seed;
use crate::signal::{assemble_uplink, build_pilots, sample_channels, ChannelSet, UplinkObservation, UplinkSources};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything the estimator produced at one BS.
#[derive(Debug, Clone)]
pub struct BsEstimate {
    pub eigen: EigenBasis,
    pub estimate: SubspaceEstimate,
    pub layered: bool,
}

/// Run the eigenspace estimator at the BS of cell `bs`.
pub fn estimate_at_bs(
    cfg: &SystemConfig,
    obs: &UplinkObservation,
    pilots: &crate::signal::PilotMatrix,
    bs: usize,
) -> Result<BsEstimate> {
    let profile = order_powers_at(cfg, bs);
    let eigen = eigendecompose_ascending(&sample_gram(obs.y0()))?;
    let v_eq = select_desired_subspace(&eigen, &profile)?;
    let estimate = despread_and_estimate(&v_eq, obs.yp(), pilots, &cfg.uplink_power[bs], cfg.noise_uplink)?;
    let layered = eigenvalues_layered(&eigen, &profile);
    Ok(BsEstimate {
        eigen,
        estimate,
        layered,
    })
}

/// One coherence block: channels, the uplink at every BS and the sources.
#[derive(Debug, Clone)]
pub struct Realization {
    pub seed: u64,
    pub channels: ChannelSet,
    pub sources: UplinkSources,
    pub observations: Vec<UplinkObservation>,
}

pub fn realize(cfg: &SystemConfig, seed: u64) -> Result<Realization> {
    let channels = sample_channels(cfg, seed);
    let sources = UplinkSources::sample(cfg, build_pilots(cfg.users, cfg.pilot_len)?, seed);
    let observations = (0..cfg.cells())
        .map(|bs| assemble_uplink(cfg, &channels, &sources, bs, seed))
        .collect::<Result<_>>()?;
    Ok(Realization {
        seed,
        channels,
        sources,
        observations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialDiagnostics {
    /// `‖h_hat_0k‖²` per cell-0 user.
    pub h_hat_energy: Vec<f64>,
    /// Mean energy fraction of the cell-0 channels inside `V_eq^0`.
    pub desired_alignment: f64,
    /// Mean energy fraction of the eavesdropper's channel columns inside `V_eq^0`.
    pub eve_alignment: f64,
    /// Eigenvalue blocks at BS 0 ordered like the power profile.
    pub layered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    /// Proposed scheme at the configured downlink power.
    pub gains: GainSamples,
    pub mfan: Option<MfanTrial>,
    pub diagnostics: TrialDiagnostics,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrialOptions {
    pub mfan: bool,
}

pub fn run_trial(cfg: &ValidatedConfig, root_seed: u64, trial: usize, opts: TrialOptions) -> Result<TrialOutcome> {
    let real = realize(cfg, trial_seed(root_seed, trial))?;
    let pilots = &real.sources.pilots;
    let per_bs = (0..cfg.cells())
        .map(|bs| estimate_at_bs(cfg, &real.observations[bs], pilots, bs))
        .collect::<Result<Vec<_>>>()?;
    let estimates: Vec<SubspaceEstimate> = per_bs.iter().map(|b| b.estimate.clone()).collect();
    let precoders = build_precoders(&estimates)?;
    let gains = compute_gains(&real.channels, &precoders, cfg.downlink_power);

    let v0 = &estimates[0].v_eq;
    let desired_alignment = (0..cfg.users)
        .map(|k| subspace_alignment(v0, &real.channels.user(0, k, 0).into_owned()))
        .sum::<Result<f64>>()?
        / cfg.users as f64;
    let he = real.channels.eve(0);
    let eve_alignment = (0..he.ncols())
        .map(|j| subspace_alignment(v0, &he.column(j).into_owned()))
        .sum::<Result<f64>>()?
        / he.ncols() as f64;
    let diagnostics = TrialDiagnostics {
        h_hat_energy: estimates[0].h_hat.iter().map(norm_sqr).collect(),
        desired_alignment,
        eve_alignment,
        layered: per_bs[0].layered,
    };
    let mfan = if opts.mfan {
        Some(mfan_trial(cfg, &real.channels, &real.observations, pilots)?)
    } else {
        None
    };
    Ok(TrialOutcome {
        trial,
        gains,
        mfan,
        diagnostics,
    })
}

/// Run `trials` independent trials on `workers` threads (0 = rayon default).
/// The output is in trial order; any failed trial fails the whole batch.
pub fn run_trials(
    cfg: &ValidatedConfig,
    trials: usize,
    root_seed: u64,
    workers: usize,
    opts: TrialOptions,
) -> Result<Vec<TrialOutcome>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidSweep(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                run_trial(cfg, root_seed, t, opts).map_err(|e| Error::Trial {
                    trial: t,
                    source: Box::new(e),
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointDiagnostics {
    pub h_hat_energy: Vec<f64>,
    pub desired_alignment: f64,
    pub eve_alignment: f64,
    pub layered_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub secrecy: SecrecyReport,
    pub links: Vec<UserLink>,
    pub asymptotic: AsymptoticReport,
    pub diagnostics: PointDiagnostics,
    /// Best power split and its report, when the baseline was run.
    pub mfan: Option<(MfanConfig, SecrecyReport)>,
    pub trials: usize,
    pub seed: u64,
    pub wall_clock_s: f64,
}

/// Reduce trial outcomes into a point result. `power_scale` rescales the
/// downlink power the trials were run at (the uplink does not depend on it).
pub fn summarize(
    cfg: &SystemConfig,
    outcomes: &[TrialOutcome],
    power_scale: f64,
    phis: Option<&[f64]>,
    seed: u64,
) -> Result<PointResult> {
    let gains: Vec<GainSamples> = outcomes.iter().map(|o| o.gains.rescaled(power_scale)).collect();
    let (secrecy, links) = evaluate_secrecy(&gains, cfg.downlink_power, cfg.noise_downlink, cfg.noise_eve)?;
    let n = outcomes.len() as f64;
    let diagnostics = PointDiagnostics {
        h_hat_energy: (0..cfg.users)
            .map(|k| outcomes.iter().map(|o| o.diagnostics.h_hat_energy[k]).sum::<f64>() / n)
            .collect(),
        desired_alignment: outcomes.iter().map(|o| o.diagnostics.desired_alignment).sum::<f64>() / n,
        eve_alignment: outcomes.iter().map(|o| o.diagnostics.eve_alignment).sum::<f64>() / n,
        layered_fraction: outcomes.iter().filter(|o| o.diagnostics.layered).count() as f64 / n,
    };
    let mfan = match phis {
        Some(phis) => {
            let trials: Vec<MfanTrial> = outcomes
                .iter()
                .map(|o| o.mfan.clone().ok_or_else(|| Error::InvalidSweep("baseline was not simulated".into())))
                .collect::<Result<_>>()?;
            Some(best_phi(&trials, phis, cfg.downlink_power, cfg.noise_downlink, cfg.noise_eve)?)
        }
        None => None,
    };
    Ok(PointResult {
        secrecy,
        links,
        asymptotic: asymptotic_rate(cfg),
        diagnostics,
        mfan,
        trials: outcomes.len(),
        seed,
        wall_clock_s: 0.0,
    })
}

/// Simulate one operating point with the proposed scheme.
pub fn run_point(cfg: &ValidatedConfig, trials: usize, seed: u64, workers: usize) -> Result<PointResult> {
    run_point_with(cfg, trials, seed, workers, None)
}

/// Simulate one operating point; with `phis`, also run the MF-AN baseline
/// and keep its best power split.
pub fn run_point_with(
    cfg: &ValidatedConfig,
    trials: usize,
    seed: u64,
    workers: usize,
    phis: Option<&[f64]>,
) -> Result<PointResult> {
    if trials < 2 {
        return Err(Error::TooFewTrials { needed: 2, got: trials });
    }
    let start = Instant::now();
    let outcomes = run_trials(cfg, trials, seed, workers, TrialOptions { mfan: phis.is_some() })?;
    let mut result = summarize(cfg, &outcomes, 1.0, phis, seed)?;
    result.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    SnrDb,
    Rho,
    CoherenceLen,
    Antennas,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::Rho => "rho",
            Axis::CoherenceLen => "T",
            Axis::Antennas => "Nt",
        }
    }

    /// Apply a grid value to a base configuration. For `rho`, the users'
    /// powers stay fixed and the eavesdropper power moves.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut cfg = base.clone();
        let as_count = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidSweep(format!("{} must be a positive integer, got {v}", self.name())))
            }
        };
        match self {
            Axis::SnrDb => cfg.set_snr_db(value),
            Axis::Rho => cfg.set_rho(value),
            Axis::CoherenceLen => cfg.coherence_len = as_count(value)?,
            Axis::Antennas => cfg.bs_antennas = as_count(value)?,
        }
        Ok(cfg)
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr" | "snr_db" => Ok(Axis::SnrDb),
            "rho" => Ok(Axis::Rho),
            "T" | "t" | "coherence" => Ok(Axis::CoherenceLen),
            "Nt" | "nt" | "antennas" => Ok(Axis::Antennas),
            other => Err(Error::InvalidSweep(format!("unknown axis `{other}` (snr|rho|T|Nt)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Proposed,
    Asymptotic,
    Mfan,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Asymptotic => "asymptotic",
            Scheme::Mfan => "mfan",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Scheme::Proposed),
            "asymptotic" => Ok(Scheme::Asymptotic),
            "mfan" | "mf-an" => Ok(Scheme::Mfan),
            other => Err(Error::InvalidSweep(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub workers: usize,
    pub phi_grid: Vec<f64>,
}

impl SweepSpec {
    pub fn new(axis: Axis, grid: Vec<f64>) -> Self {
        SweepSpec {
            axis,
            grid,
            trials: 200,
            seed: 1,
            schemes: vec![Scheme::Proposed, Scheme::Asymptotic],
            workers: 0,
            phi_grid: crate::mfan::default_phi_grid(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidSweep("empty grid".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) || self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSweep("grid must be finite and strictly increasing".into()));
        }
        if self.trials < 2 {
            return Err(Error::TooFewTrials {
                needed: 2,
                got: self.trials,
            });
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidSweep("no scheme selected".into()));
        }
        if self.schemes.contains(&Scheme::Mfan) && self.phi_grid.is_empty() {
            return Err(Error::InvalidSweep("empty phi grid".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub config: SystemConfig,
    /// Monte Carlo result (proposed and, if requested, MF-AN).
    pub result: Option<PointResult>,
    pub asymptotic: AsymptoticReport,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: Axis,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub points: Vec<SweepPoint>,
}

pub fn run_sweep(base: &SystemConfig, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let configs = spec
        .grid
        .iter()
        .map(|&v| spec.axis.apply(base, v).and_then(crate::config::validate_config))
        .collect::<Result<Vec<_>>>()?;
    let monte_carlo = spec.schemes.iter().any(|s| *s != Scheme::Asymptotic);
    let with_mfan = spec.schemes.contains(&Scheme::Mfan);
    let phis = with_mfan.then_some(spec.phi_grid.as_slice());
    let opts = TrialOptions { mfan: with_mfan };

    // the SNR axis leaves the uplink untouched: simulate once, rescale per point
    let shared = if monte_carlo && spec.axis == Axis::SnrDb {
        let start = Instant::now();
        let outcomes = run_trials(&configs[0], spec.trials, spec.seed, spec.workers, opts)?;
        Some((outcomes, start.elapsed().as_secs_f64()))
    } else {
        None
    };

    let mut points = Vec::with_capacity(configs.len());
    for (i, cfg) in configs.iter().enumerate() {
        let start = Instant::now();
        let result = if !monte_carlo {
            None
        } else if let Some((outcomes, sim_time)) = &shared {
            let scale = cfg.downlink_power / configs[0].downlink_power;
            let mut r = summarize(cfg, outcomes, scale, phis, spec.seed)?;
            r.wall_clock_s = start.elapsed().as_secs_f64() + if i == 0 { *sim_time } else { 0.0 };
            Some(r)
        } else {
            Some(run_point_with(cfg, spec.trials, spec.seed, spec.workers, phis)?)
        };
        log::info!("{} = {} done in {:.1}s", spec.axis.name(), spec.grid[i], start.elapsed().as_secs_f64());
        points.push(SweepPoint {
            value: spec.grid[i],
            config: cfg.config().clone(),
            result,
            asymptotic: asymptotic_rate(cfg),
            wall_clock_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(SweepResult {
        axis: spec.axis,
        seed: spec.seed,
        schemes: spec.schemes.clone(),
        points,
    })
}

/// One CSV row: a user of one scheme at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ResultRow {
    pub axis_value: f64,
    pub scheme: String,
    /// 1-based user index.
    pub k: usize,
    pub rate_bits: f64,
    pub c_eve_bits: f64,
    pub secrecy_bits: f64,
    pub sum_secrecy_bits: f64,
    /// Standard error of `secrecy_bits`.
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
    pub schema_version: u32,
}

fn report_rows(axis_value: f64, scheme: &str, report: &SecrecyReport, seed: u64) -> Vec<ResultRow> {
    report
        .users
        .iter()
        .enumerate()
        .map(|(k, u)| ResultRow {
            axis_value,
            scheme: scheme.to_string(),
            k: k + 1,
            rate_bits: u.rate_bits,
            c_eve_bits: u.eve_bits,
            secrecy_bits: u.secrecy_bits,
            sum_secrecy_bits: report.sum_secrecy_bits,
            stderr: u.secrecy_stderr,
            trials: report.trials,
            seed,
            schema_version: SCHEMA_VERSION,
        })
        .collect()
}

fn asymptotic_rows(axis_value: f64, report: &AsymptoticReport, seed: u64) -> Vec<ResultRow> {
    report
        .users
        .iter()
        .enumerate()
        .map(|(k, u)| ResultRow {
            axis_value,
            scheme: Scheme::Asymptotic.name().to_string(),
            k: k + 1,
            rate_bits: u.rate_bits,
            c_eve_bits: 0.0,
            secrecy_bits: u.rate_bits,
            sum_secrecy_bits: report.sum_rate_bits,
            stderr: 0.0,
            trials: 0,
            seed,
            schema_version: SCHEMA_VERSION,
        })
        .collect()
}

/// Rows of a single operating point, labelled with `axis_value`.
pub fn point_rows(axis_value: f64, point: &PointResult, schemes: &[Scheme]) -> Vec<ResultRow> {
    let mut rows = Vec::new();
    for s in schemes {
        match s {
            Scheme::Proposed => rows.extend(report_rows(axis_value, s.name(), &point.secrecy, point.seed)),
            Scheme::Asymptotic => rows.extend(asymptotic_rows(axis_value, &point.asymptotic, point.seed)),
            Scheme::Mfan => {
                if let Some((_, r)) = &point.mfan {
                    rows.extend(report_rows(axis_value, s.name(), r, point.seed));
                }
            }
        }
    }
    rows
}

impl SweepResult {
    pub fn rows(&self) -> Vec<ResultRow> {
        let mut rows = Vec::new();
        for p in &self.points {
            match &p.result {
                Some(r) => rows.extend(point_rows(p.value, r, &self.schemes)),
                None => rows.extend(asymptotic_rows(p.value, &p.asymptotic, self.seed)),
            }
        }
        rows
    }

    /// Sum secrecy rate of `scheme` at each grid point.
    pub fn sum_secrecy(&self, scheme: Scheme) -> Vec<f64> {
        self.points
            .iter()
            .filter_map(|p| match scheme {
                Scheme::Asymptotic => Some(p.asymptotic.sum_rate_bits),
                Scheme::Proposed => p.result.as_ref().map(|r| r.secrecy.sum_secrecy_bits),
                Scheme::Mfan => p.result.as_ref().and_then(|r| r.mfan.as_ref()).map(|m| m.1.sum_secrecy_bits),
            })
            .collect()
    }
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Axis value under which a single-point run is reported.
pub fn point_label(cfg: &SystemConfig) -> f64 {
    linear_to_db(cfg.snr())
}
