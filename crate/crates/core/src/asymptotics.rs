//! Large-array closed forms for the proposed scheme: the equivalent-channel
//! estimate energy `a1`, the second-moment term `a2`, the deterministic SINR
//! and the resulting secrecy sum-rate (with zero eavesdropper leakage).

use crate::config::SystemConfig;

/// Parameters of the per-user closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub p0: f64,
    pub tau: f64,
    pub n0: f64,
    pub beta: f64,
    pub antennas: f64,
    pub users: f64,
}

impl LinkParams {
    /// Parameters of user `k` of cell 0.
    pub fn for_user(cfg: &SystemConfig, k: usize) -> Self {
        LinkParams {
            p0: cfg.uplink_power[0][k],
            tau: cfg.pilot_len as f64,
            n0: cfg.noise_uplink,
            beta: cfg.beta[0][k][0],
            antennas: cfg.bs_antennas as f64,
            users: cfg.users as f64,
        }
    }
}

/// `a1 = P0 tau (P0 tau beta (N_t + K - 1) + K N0) / (P0 tau + N0)^2`.
pub fn a1(p: &LinkParams) -> f64 {
    let pt = p.p0 * p.tau;
    pt * (pt * p.beta * (p.antennas + p.users - 1.0) + p.users * p.n0) / (pt + p.n0).powi(2)
}

/// `a2 = [P0 tau beta^2 (N_t + K - 1)^2 + N0 beta (N_t + 3(K - 1))]
///       / [P0 tau beta (N_t + K - 1) + N0]`.
pub fn a2(p: &LinkParams) -> f64 {
    let pt = p.p0 * p.tau;
    let span = p.beta * p.antennas + p.beta * (p.users - 1.0);
    let num = pt * span.powi(2) + p.n0 * (p.antennas * p.beta + 3.0 * (p.users - 1.0) * p.beta);
    let den = pt * p.beta * (p.antennas + p.users - 1.0) + p.n0;
    num / den
}

/// `a2 - a1`, factored so that it is exactly zero when `N0 = 0`:
/// `N0 [2 beta (K - 1) / (P0 tau s + N0) - (P0 tau K - 2 P0 tau s - N0 s) / (P0 tau + N0)^2]`
/// with `s = beta (N_t + K - 1)`. Negative when `beta` is small (the `K N0`
/// term of `a1` is not scaled by `beta`).
pub fn variance_term(p: &LinkParams) -> f64 {
    let pt = p.p0 * p.tau;
    let s = p.beta * (p.antennas + p.users - 1.0);
    let from_a2 = 2.0 * p.beta * (p.users - 1.0) / (pt * s + p.n0);
    let from_a1 = (pt * p.users - 2.0 * pt * s - p.n0 * s) / (pt + p.n0).powi(2);
    p.n0 * (from_a2 - from_a1)
}

/// Deterministic SINR of user `k` of cell 0:
/// `P a1 / (N0d + P (a2 - a1) + P (K - 1) beta_0k + P K Σ_l beta_lk)`.
pub fn gamma_bar(cfg: &SystemConfig, k: usize) -> f64 {
    let p = LinkParams::for_user(cfg, k);
    let power = cfg.downlink_power;
    let inter: f64 = (1..cfg.cells()).map(|l| cfg.beta[l][k][0]).sum();
    let den = cfg.noise_downlink
        + power * variance_term(&p)
        + power * (p.users - 1.0) * p.beta
        + power * p.users * inter;
    power * a1(&p) / den
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticUser {
    pub a1: f64,
    pub a2: f64,
    pub gamma_bar: f64,
    pub rate_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub users: Vec<AsymptoticUser>,
    pub sum_rate_bits: f64,
}

pub fn asymptotic_rate(cfg: &SystemConfig) -> AsymptoticReport {
    let users: Vec<AsymptoticUser> = (0..cfg.users)
        .map(|k| {
            let p = LinkParams::for_user(cfg, k);
            let g = gamma_bar(cfg, k);
            AsymptoticUser {
                a1: a1(&p),
                a2: a2(&p),
                gamma_bar: g,
                rate_bits: (1.0 + g).log2(),
            }
        })
        .collect();
    AsymptoticReport {
        sum_rate_bits: users.iter().map(|u| u.rate_bits).sum(),
        users,
    }
}
