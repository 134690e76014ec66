//! Channel, pilot, attack and noise sampling, and assembly of the uplink
//! pilot and data blocks received at each base station.

use nalgebra::{DMatrixView, DVectorView};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{cmul, CMatrix, ZERO};
use crate::rng::{complex_normal_matrix, stream_rng, Stream};

/// `K` orthogonal pilots of length `tau`, stored as the columns of a
/// `tau x K` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    omega: CMatrix,
}

impl PilotMatrix {
    pub fn users(&self) -> usize {
        self.omega.ncols()
    }

    pub fn len(&self) -> usize {
        self.omega.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.nrows() == 0
    }

    pub fn pilot(&self, k: usize) -> DVectorView<'_, Complex64> {
        self.omega.column(k)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.omega
    }

    /// `Omega^H Omega`, equal to `tau I`.
    pub fn gram(&self) -> CMatrix {
        self.omega.adjoint() * &self.omega
    }
}

/// First `users` columns of the `pilot_len`-point DFT basis, scaled so that
/// every entry has unit modulus.
pub fn build_pilots(users: usize, pilot_len: usize) -> Result<PilotMatrix> {
    if users > pilot_len {
        return Err(Error::PilotsNotOrthogonal { users, pilot_len });
    }
    let omega = CMatrix::from_fn(pilot_len, users, |t, k| {
        let phase = -2.0 * PI * ((t * k) % pilot_len) as f64 / pilot_len as f64;
        Complex64::from_polar(1.0, phase)
    });
    Ok(PilotMatrix { omega })
}

/// One realization of every uplink channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    users_per_cell: usize,
    /// Per BS, an `N_t x (L+1)K` matrix whose column `l K + k` is the channel
    /// from user `k` of cell `l`.
    pub users: Vec<CMatrix>,
    /// Per BS, the `N_t x N_e` eavesdropper channel.
    pub eve: Vec<CMatrix>,
}

impl ChannelSet {
    /// Channel from user `k` of cell `cell` to the BS of cell `bs`.
    pub fn user(&self, cell: usize, k: usize, bs: usize) -> DVectorView<'_, Complex64> {
        self.users[bs].column(cell * self.users_per_cell + k)
    }

    /// All channels from the users of cell `cell` to BS `bs`, `N_t x K`.
    pub fn cell_block(&self, cell: usize, bs: usize) -> DMatrixView<'_, Complex64> {
        let k = self.users_per_cell;
        self.users[bs].columns(cell * k, k)
    }

    pub fn eve(&self, bs: usize) -> &CMatrix {
        &self.eve[bs]
    }

    pub fn users_per_cell(&self) -> usize {
        self.users_per_cell
    }

    pub fn from_parts(users_per_cell: usize, users: Vec<CMatrix>, eve: Vec<CMatrix>) -> Self {
        ChannelSet {
            users_per_cell,
            users,
            eve,
        }
    }
}

/// Draw every channel of a trial: `h_lk^p ~ CN(0, beta_lk^p I)` and
/// eavesdropper columns `~ CN(0, beta_e^p I)`.
pub fn sample_channels(cfg: &SystemConfig, trial_seed: u64) -> ChannelSet {
    let mut rng = stream_rng(trial_seed, Stream::Channels);
    let n = cfg.bs_antennas;
    let k = cfg.users;
    let cells = cfg.cells();
    let mut users = Vec::with_capacity(cells);
    for bs in 0..cells {
        let mut m = CMatrix::from_element(n, cells * k, ZERO);
        for l in 0..cells {
            for u in 0..k {
                let col = complex_normal_matrix(&mut rng, n, 1, cfg.beta[l][u][bs]);
                m.set_column(l * k + u, &col.column(0));
            }
        }
        users.push(m);
    }
    let eve = (0..cells)
        .map(|bs| complex_normal_matrix(&mut rng, n, cfg.eve_antennas, cfg.beta_eve[bs]))
        .collect();
    ChannelSet {
        users_per_cell: k,
        users,
        eve,
    }
}

/// The eavesdropper's transmitted blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSignals {
    /// `N_e x tau`; every row equals the sum of all pilots.
    pub w_sum: CMatrix,
    /// `N_e x (T - tau)` artificial noise, unit-variance entries.
    pub artificial_noise: CMatrix,
}

pub fn build_attack(cfg: &SystemConfig, pilots: &PilotMatrix, trial_seed: u64) -> AttackSignals {
    let tau = pilots.len();
    let row_sum: Vec<Complex64> = (0..tau).map(|t| pilots.matrix().row(t).sum()).collect();
    let w_sum = CMatrix::from_fn(cfg.eve_antennas, tau, |_, t| row_sum[t]);
    let mut rng = stream_rng(trial_seed, Stream::Attack);
    let artificial_noise = complex_normal_matrix(&mut rng, cfg.eve_antennas, cfg.data_len(), 1.0);
    AttackSignals {
        w_sum,
        artificial_noise,
    }
}

/// Everything transmitted in the uplink of one coherence block. Shared by
/// all base stations; only the receiver noise differs between them.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkSources {
    pub pilots: PilotMatrix,
    /// `(L+1)K x (T - tau)` unit-variance data symbols, row `l K + k`.
    pub data: CMatrix,
    pub attack: AttackSignals,
}

impl UplinkSources {
    pub fn sample(cfg: &SystemConfig, pilots: PilotMatrix, trial_seed: u64) -> Self {
        let mut rng = stream_rng(trial_seed, Stream::Data);
        let data = complex_normal_matrix(&mut rng, cfg.cells() * cfg.users, cfg.data_len(), 1.0);
        let attack = build_attack(cfg, &pilots, trial_seed);
        UplinkSources { pilots, data, attack }
    }
}

/// Received uplink block `Y0 = [Yp Yd]` at one BS.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkObservation {
    y0: CMatrix,
    pilot_len: usize,
}

impl UplinkObservation {
    pub fn from_blocks(yp: &CMatrix, yd: &CMatrix) -> Result<Self> {
        if yp.nrows() != yd.nrows() {
            return Err(Error::DimensionMismatch {
                what: "pilot/data block rows",
                expected: yp.nrows().to_string(),
                found: yd.nrows().to_string(),
            });
        }
        let mut y0 = CMatrix::from_element(yp.nrows(), yp.ncols() + yd.ncols(), ZERO);
        y0.columns_mut(0, yp.ncols()).copy_from(yp);
        y0.columns_mut(yp.ncols(), yd.ncols()).copy_from(yd);
        Ok(UplinkObservation {
            y0,
            pilot_len: yp.ncols(),
        })
    }

    pub fn y0(&self) -> &CMatrix {
        &self.y0
    }

    pub fn yp(&self) -> DMatrixView<'_, Complex64> {
        self.y0.columns(0, self.pilot_len)
    }

    pub fn yd(&self) -> DMatrixView<'_, Complex64> {
        self.y0.columns(self.pilot_len, self.y0.ncols() - self.pilot_len)
    }

    pub fn pilot_len(&self) -> usize {
        self.pilot_len
    }
}

/// Selects which terms of the received signal are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UplinkTerms {
    pub desired: bool,
    pub interference: bool,
    pub attack: bool,
    pub noise: bool,
}

impl UplinkTerms {
    pub const ALL: UplinkTerms = UplinkTerms {
        desired: true,
        interference: true,
        attack: true,
        noise: true,
    };
    pub const NONE: UplinkTerms = UplinkTerms {
        desired: false,
        interference: false,
        attack: false,
        noise: false,
    };
}

/// Assemble `Y0` at the BS of cell `bs`.
pub fn assemble_uplink(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    sources: &UplinkSources,
    bs: usize,
    trial_seed: u64,
) -> Result<UplinkObservation> {
    assemble_terms(cfg, channels, sources, bs, trial_seed, UplinkTerms::ALL)
}

/// Assemble a subset of the received terms. Terms are summed in the fixed
/// order desired, interference, attack, noise; disabled terms contribute
/// exact zeros, so partial assemblies add up bit-for-bit to the full one.
pub fn assemble_terms(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    sources: &UplinkSources,
    bs: usize,
    trial_seed: u64,
    terms: UplinkTerms,
) -> Result<UplinkObservation> {
    let n = cfg.bs_antennas;
    let k = cfg.users;
    let tau = sources.pilots.len();
    let data_len = sources.data.ncols();
    let t_total = tau + data_len;
    check_dims(cfg, channels, sources, bs)?;

    // transmitted row of user (l, u): [omega_u^T  d_lu^T]
    let user_rows = |cells: &[usize]| {
        let mut x = CMatrix::from_element(cells.len() * k, t_total, ZERO);
        let mut h = CMatrix::from_element(n, cells.len() * k, ZERO);
        for (i, &l) in cells.iter().enumerate() {
            for u in 0..k {
                let r = i * k + u;
                for t in 0..tau {
                    x[(r, t)] = sources.pilots.pilot(u)[t];
                }
                for t in 0..data_len {
                    x[(r, tau + t)] = sources.data[(l * k + u, t)];
                }
                let amp = cfg.uplink_power[l][u].sqrt();
                h.set_column(r, &(channels.user(l, u, bs) * Complex64::new(amp, 0.0)));
            }
        }
        cmul(&h, &x)
    };
    let zero = || CMatrix::from_element(n, t_total, ZERO);

    let desired = if terms.desired { user_rows(&[bs]) } else { zero() };
    let others: Vec<usize> = (0..cfg.cells()).filter(|&l| l != bs).collect();
    let interference = if terms.interference && !others.is_empty() {
        user_rows(&others)
    } else {
        zero()
    };
    let attack = if terms.attack {
        let ne = cfg.eve_antennas as f64;
        let pilot_amp = (cfg.eve_power / (k as f64 * ne)).sqrt();
        let data_amp = (cfg.eve_power / ne).sqrt();
        let mut xe = CMatrix::from_element(cfg.eve_antennas, t_total, ZERO);
        xe.columns_mut(0, tau)
            .copy_from(&(&sources.attack.w_sum * Complex64::new(pilot_amp, 0.0)));
        xe.columns_mut(tau, data_len)
            .copy_from(&(&sources.attack.artificial_noise * Complex64::new(data_amp, 0.0)));
        cmul(channels.eve(bs), &xe)
    } else {
        zero()
    };
    let noise = {
        let mut rng = stream_rng(trial_seed, Stream::Noise(bs));
        let m = complex_normal_matrix(&mut rng, n, t_total, cfg.noise_uplink);
        if terms.noise {
            m
        } else {
            zero()
        }
    };

    let y0 = desired + interference + attack + noise;
    Ok(UplinkObservation { y0, pilot_len: tau })
}

fn check_dims(cfg: &SystemConfig, channels: &ChannelSet, sources: &UplinkSources, bs: usize) -> Result<()> {
    let mismatch = |what, expected: usize, found: usize| {
        Err(Error::DimensionMismatch {
            what,
            expected: expected.to_string(),
            found: found.to_string(),
        })
    };
    if bs >= cfg.cells() || channels.users.len() != cfg.cells() {
        return mismatch("base station index", cfg.cells(), channels.users.len().max(bs + 1));
    }
    if channels.users[bs].nrows() != cfg.bs_antennas {
        return mismatch("channel length", cfg.bs_antennas, channels.users[bs].nrows());
    }
    if channels.users[bs].ncols() != cfg.cells() * cfg.users {
        return mismatch("user channel count", cfg.cells() * cfg.users, channels.users[bs].ncols());
    }
    if channels.eve(bs).ncols() != cfg.eve_antennas {
        return mismatch("eavesdropper antennas", cfg.eve_antennas, channels.eve(bs).ncols());
    }
    if sources.pilots.users() != cfg.users {
        return mismatch("pilot count", cfg.users, sources.pilots.users());
    }
    if sources.data.nrows() != cfg.cells() * cfg.users {
        return mismatch("data streams", cfg.cells() * cfg.users, sources.data.nrows());
    }
    if sources.attack.w_sum.nrows() != cfg.eve_antennas
        || sources.attack.artificial_noise.ncols() != sources.data.ncols()
    {
        return mismatch("attack block", cfg.eve_antennas, sources.attack.w_sum.nrows());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scenario;
    use crate::linalg::frobenius;

    fn small() -> SystemConfig {
        Scenario {
            interfering_cells: 1,
            users: 2,
            bs_antennas: 16,
            eve_antennas: 2,
            coherence_len: 64,
            pilot_len: 3,
            ..Scenario::default()
        }
        .build()
    }

    fn gram_error(p: &PilotMatrix) -> f64 {
        let tau = p.len() as f64;
        let g = p.gram();
        let mut worst = 0.0f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { tau } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    #[test]
    fn single_pilot() {
        let p = build_pilots(1, 1).unwrap();
        assert_eq!(p.matrix()[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(gram_error(&p), 0.0);
    }

    #[test]
    fn pilot_gram_is_scaled_identity() {
        for (k, tau) in [(5, 5), (5, 8), (3, 7), (16, 16)] {
            let p = build_pilots(k, tau).unwrap();
            assert!(gram_error(&p) < 1e-12 * tau as f64, "K={k} tau={tau}");
        }
    }

    #[test]
    fn pilots_reject_k_above_tau() {
        assert!(matches!(build_pilots(5, 4), Err(Error::PilotsNotOrthogonal { .. })));
    }

    #[test]
    fn channels_are_deterministic() {
        let cfg = small();
        assert_eq!(sample_channels(&cfg, 42), sample_channels(&cfg, 42));
        assert_ne!(sample_channels(&cfg, 42), sample_channels(&cfg, 43));
    }

    #[test]
    fn zero_eve_gain_gives_zero_channel() {
        let mut cfg = small();
        cfg.beta_eve[0] = 0.0;
        let ch = sample_channels(&cfg, 5);
        assert_eq!(frobenius(ch.eve(0)), 0.0);
        assert!(frobenius(ch.eve(1)) > 0.0);
    }

    #[test]
    fn channel_variance_concentrates() {
        // 10^4 entries of a unit-gain channel; the sample mean of |h|^2 has
        // standard deviation 0.01, so [0.95, 1.05] is a 5-sigma band.
        let mut cfg = small();
        cfg.bs_antennas = 10_000;
        let ch = sample_channels(&cfg, 3);
        let m = ch.user(0, 1, 0).iter().map(|z| z.norm_sqr()).sum::<f64>() / 10_000.0;
        assert!((0.95..=1.05).contains(&m), "{m}");
    }

    #[test]
    fn attack_rows_sum_pilots() {
        let cfg = small();
        let pilots = build_pilots(cfg.users, cfg.pilot_len).unwrap();
        let a = build_attack(&cfg, &pilots, 1);
        for r in 0..cfg.eve_antennas {
            for t in 0..cfg.pilot_len {
                let expect: Complex64 = (0..cfg.users).map(|k| pilots.pilot(k)[t]).sum();
                assert!((a.w_sum[(r, t)] - expect).norm() < 1e-15);
            }
        }
        assert_eq!(a.artificial_noise.shape(), (cfg.eve_antennas, cfg.data_len()));
    }

    #[test]
    fn single_noiseless_user_is_rank_one() {
        let mut cfg = Scenario {
            interfering_cells: 0,
            users: 1,
            bs_antennas: 8,
            eve_antennas: 1,
            coherence_len: 16,
            pilot_len: 1,
            ..Scenario::default()
        }
        .build();
        cfg.eve_power = 0.0;
        cfg.noise_uplink = 0.0;
        let ch = sample_channels(&cfg, 9);
        let src = UplinkSources::sample(&cfg, build_pilots(1, 1).unwrap(), 9);
        let obs = assemble_uplink(&cfg, &ch, &src, 0, 9).unwrap();
        let p0 = cfg.uplink_power[0][0];
        for i in 0..8 {
            let expect = ch.user(0, 0, 0)[i] * p0.sqrt();
            assert!((obs.yp()[(i, 0)] - expect).norm() < 1e-14);
        }
        let sv = obs.yp().into_owned().singular_values();
        assert_eq!(sv.iter().filter(|&&s| s > 1e-10).count(), 1);
    }

    #[test]
    fn zero_channels_leave_pure_noise() {
        let mut cfg = small();
        cfg.eve_power = 0.0;
        cfg.noise_uplink = 2.0;
        cfg.bs_antennas = 64;
        let mut ch = sample_channels(&cfg, 4);
        for m in ch.users.iter_mut().chain(ch.eve.iter_mut()) {
            m.fill(ZERO);
        }
        let src = UplinkSources::sample(&cfg, build_pilots(2, 3).unwrap(), 4);
        let obs = assemble_uplink(&cfg, &ch, &src, 0, 4).unwrap();
        let n = (obs.y0().nrows() * obs.y0().ncols()) as f64;
        let m = obs.y0().iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        assert!((m - 2.0).abs() < 0.1, "{m}");
    }

    #[test]
    fn superposition_is_exact() {
        let cfg = small();
        let ch = sample_channels(&cfg, 21);
        let src = UplinkSources::sample(&cfg, build_pilots(2, 3).unwrap(), 21);
        for bs in 0..cfg.cells() {
            let full = assemble_uplink(&cfg, &ch, &src, bs, 21).unwrap();
            let only = |f: fn(&mut UplinkTerms)| {
                let mut t = UplinkTerms::NONE;
                f(&mut t);
                assemble_terms(&cfg, &ch, &src, bs, 21, t).unwrap().y0().clone()
            };
            let d = only(|t| t.desired = true);
            let i = only(|t| t.interference = true);
            let a = only(|t| t.attack = true);
            let n = only(|t| t.noise = true);
            assert_eq!(&(d + i + a + n), full.y0());
        }
    }

    #[test]
    fn blocks_concatenate() {
        let cfg = small();
        let ch = sample_channels(&cfg, 2);
        let src = UplinkSources::sample(&cfg, build_pilots(2, 3).unwrap(), 2);
        let obs = assemble_uplink(&cfg, &ch, &src, 0, 2).unwrap();
        let again = UplinkObservation::from_blocks(&obs.yp().into_owned(), &obs.yd().into_owned()).unwrap();
        assert_eq!(obs, again);
        assert_eq!(obs.yd().ncols(), cfg.data_len());
    }

    #[test]
    fn attack_despreads_to_all_ones_combination() {
        // (He W_sum) conj(omega_k) = tau He 1 for every k
        let cfg = small();
        let pilots = build_pilots(cfg.users, cfg.pilot_len).unwrap();
        let ch = sample_channels(&cfg, 8);
        let a = build_attack(&cfg, &pilots, 8);
        let hw = ch.eve(0) * &a.w_sum;
        let ones = CMatrix::from_element(cfg.eve_antennas, 1, Complex64::new(1.0, 0.0));
        let expect = ch.eve(0) * ones * Complex64::new(cfg.pilot_len as f64, 0.0);
        for k in 0..cfg.users {
            let got = &hw * pilots.pilot(k).map(|z| z.conj());
            assert!((got - expect.column(0)).norm() < 1e-12);
        }
        let rank = hw.singular_values().iter().filter(|&&s| s > 1e-9).count();
        assert!(rank <= cfg.eve_antennas.min(cfg.pilot_len));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let cfg = small();
        let ch = sample_channels(&cfg, 1);
        let src = UplinkSources::sample(&cfg, build_pilots(2, 3).unwrap(), 1);
        let mut bigger = cfg.clone();
        bigger.bs_antennas = 32;
        assert!(matches!(
            assemble_uplink(&bigger, &ch, &src, 0, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
