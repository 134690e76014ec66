//! Matched-filter precoding with artificial noise (MF-AN), reconstructed as
//! the comparison baseline.
//!
//! Each BS despreads its pilot block directly (least squares), so its
//! estimate is contaminated by the eavesdropper's pilot attack. Information
//! beams are matched filters of those estimates with power `phi P / K` each;
//! artificial noise of total power `(1 - phi) P` is spread evenly over an
//! orthonormal basis of the null space of the estimated channels.

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::downlink::{evaluate_secrecy, GainSamples, PrecoderSet, SecrecyReport};
use crate::error::{Error, Result};
use crate::estimator::{eigendecompose_ascending, GramMatrix};
use crate::linalg::{frobenius, norm_sqr, orthonormal_columns, CMatrix, CVector};
use crate::signal::{ChannelSet, PilotMatrix, UplinkObservation};
use nalgebra::DMatrixView;

/// Label used in reports for this scheme.
pub const SCHEME_LABEL: &str = "MF-AN (reconstructed)";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfanConfig {
    phi: f64,
}

impl MfanConfig {
    pub fn new(phi: f64) -> Result<Self> {
        if phi > 0.0 && phi <= 1.0 {
            Ok(MfanConfig { phi })
        } else {
            Err(Error::InvalidPhi(phi))
        }
    }

    /// Fraction of the downlink power carried by the information beams.
    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// `h_hat_k = Yp conj(omega_k) / (sqrt(P0) tau)` for every user.
pub fn conventional_estimate(
    yp: DMatrixView<'_, Complex64>,
    pilots: &PilotMatrix,
    user_power: &[f64],
) -> Result<Vec<CVector>> {
    if yp.ncols() != pilots.len() || user_power.len() != pilots.users() {
        return Err(Error::DimensionMismatch {
            what: "least-squares despreading",
            expected: format!("{} symbols, {} users", pilots.len(), pilots.users()),
            found: format!("{} symbols, {} powers", yp.ncols(), user_power.len()),
        });
    }
    let tau = pilots.len() as f64;
    Ok((0..pilots.users())
        .map(|k| {
            let despread: CVector = yp * pilots.pilot(k).map(|z| z.conj());
            despread / Complex64::new(user_power[k].sqrt() * tau, 0.0)
        })
        .collect())
}

/// Orthonormal basis of the orthogonal complement of the span of
/// `estimates`, `N_t x (N_t - K)`.
pub fn an_basis(estimates: &[CVector]) -> Result<CMatrix> {
    let k = estimates.len();
    let n = estimates.first().map(|v| v.len()).unwrap_or(0);
    if k >= n {
        return Err(Error::NoNullSpace { users: k, antennas: n });
    }
    let q = orthonormal_columns(&CMatrix::from_columns(estimates));
    let mut proj = CMatrix::identity(n, n) - &q * q.adjoint();
    crate::linalg::hermitize(&mut proj);
    let eig = eigendecompose_ascending(&GramMatrix(proj))?;
    Ok(eig.eigenvectors.columns(k, n - k).into_owned())
}

/// Power-independent MF-AN quantities of one trial; [`MfanTrial::gains`]
/// turns them into gains for a given `phi` and `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct MfanTrial {
    /// Per cell, `(t, k)` = `(h_0k^l)^H w_lt` for unit beams.
    pub info: Vec<CMatrix>,
    /// `Σ_l ‖(h_0k^l)^H Z_l‖² / (N_t - K)` per cell-0 user.
    pub an_leak_unit: Vec<f64>,
    /// `‖(He^0)^H w_0k‖²`.
    pub g_eve: Vec<f64>,
    /// `‖(He^0)^H Z_0‖_F² / (N_e (N_t - K))`.
    pub eve_an_unit: f64,
}

impl MfanTrial {
    pub fn gains(&self, cfg: &MfanConfig, power: f64) -> GainSamples {
        let users = self.g_eve.len() as f64;
        let amp = Complex64::new((cfg.phi * power / users).sqrt(), 0.0);
        let an = (1.0 - cfg.phi) * power;
        GainSamples {
            g: self.info.iter().map(|m| m * amp).collect(),
            an_leak: self.an_leak_unit.iter().map(|x| x * an).collect(),
            g_eve: self.g_eve.clone(),
            eve_an: self.eve_an_unit * an,
        }
    }
}

/// Run the baseline at every BS on the same uplink observations as the
/// proposed scheme.
pub fn mfan_trial(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    observations: &[UplinkObservation],
    pilots: &PilotMatrix,
) -> Result<MfanTrial> {
    let k = cfg.users;
    let n = cfg.bs_antennas;
    let mut dirs = Vec::with_capacity(cfg.cells());
    let mut an = Vec::with_capacity(cfg.cells());
    for (l, obs) in observations.iter().enumerate() {
        let est = conventional_estimate(obs.yp(), pilots, &cfg.uplink_power[l])?;
        an.push(an_basis(&est)?);
        dirs.push(CMatrix::from_columns(&est));
    }
    let beams = PrecoderSet::from_directions(dirs, "MF beam (zero channel estimate)")?;

    let info = beams
        .beams
        .iter()
        .enumerate()
        .map(|(l, w)| (channels.cell_block(0, l).adjoint() * w).transpose())
        .collect();
    let null_dim = (n - k) as f64;
    let an_leak_unit = (0..k)
        .map(|u| {
            an.iter()
                .enumerate()
                .map(|(l, z)| norm_sqr(&(z.adjoint() * channels.user(0, u, l))))
                .sum::<f64>()
                / null_dim
        })
        .collect();
    let he = channels.eve(0);
    let g_eve = (0..k)
        .map(|u| norm_sqr(&(he.adjoint() * beams.beams[0].column(u))))
        .collect();
    let eve_an_unit = frobenius(&(he.adjoint() * &an[0])).powi(2) / (cfg.eve_antennas as f64 * null_dim);
    Ok(MfanTrial {
        info,
        an_leak_unit,
        g_eve,
        eve_an_unit,
    })
}

/// MF-AN secrecy report for one power split.
pub fn mfan_precode_and_rate(
    trials: &[MfanTrial],
    mfan: &MfanConfig,
    power: f64,
    n0d: f64,
    n0e: f64,
) -> Result<SecrecyReport> {
    let gains: Vec<GainSamples> = trials.iter().map(|t| t.gains(mfan, power)).collect();
    let users = trials.first().map(|t| t.g_eve.len()).unwrap_or(1) as f64;
    Ok(evaluate_secrecy(&gains, mfan.phi * power / users, n0d, n0e)?.0)
}

/// Sweep `phi` and keep the split with the largest secrecy sum-rate (ties
/// keep the smallest `phi`).
pub fn best_phi(
    trials: &[MfanTrial],
    phis: &[f64],
    power: f64,
    n0d: f64,
    n0e: f64,
) -> Result<(MfanConfig, SecrecyReport)> {
    let mut best: Option<(MfanConfig, SecrecyReport)> = None;
    for &phi in phis {
        let cfg = MfanConfig::new(phi)?;
        let report = mfan_precode_and_rate(trials, &cfg, power, n0d, n0e)?;
        if best.as_ref().is_none_or(|(_, b)| report.sum_secrecy_bits > b.sum_secrecy_bits) {
            best = Some((cfg, report));
        }
    }
    best.ok_or_else(|| Error::InvalidSweep("empty phi grid".into()))
}

/// `{0.1, 0.2, ..., 0.9}`.
pub fn default_phi_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}
