//! Downlink precoding and Monte Carlo secrecy-rate evaluation.
//!
//! User rates use the use-and-forget bound: the mean effective gain is the
//! useful signal; gain fluctuation, every other stream and any artificial
//! noise count as Gaussian interference. Eavesdropper capacity is the
//! interference-free upper bound. All rates are in bits per channel use.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimator::SubspaceEstimate;
use crate::linalg::{norm_sqr, CMatrix, CVector};
use crate::signal::ChannelSet;

/// Unit-norm beams, one `N_t x K` matrix per cell; column `k` serves user
/// `k` of that cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub beams: Vec<CMatrix>,
}

impl PrecoderSet {
    pub fn beam(&self, cell: usize, k: usize) -> CVector {
        self.beams[cell].column(k).into_owned()
    }

    /// Normalize the columns of each direction matrix.
    pub fn from_directions(directions: Vec<CMatrix>, context: &'static str) -> Result<Self> {
        let mut beams = directions;
        for m in beams.iter_mut() {
            for mut col in m.column_iter_mut() {
                let norm = col.norm();
                if norm == 0.0 || !norm.is_finite() {
                    return Err(Error::ZeroVector(context));
                }
                col.unscale_mut(norm);
            }
        }
        Ok(PrecoderSet { beams })
    }
}

/// `t_lk = V_eq^l h_hat_lk / ‖h_hat_lk‖` for every cell.
pub fn build_precoders(estimates: &[SubspaceEstimate]) -> Result<PrecoderSet> {
    let dirs = estimates
        .iter()
        .map(|e| {
            let cols: Vec<CVector> = (0..e.h_hat.len()).map(|k| e.antenna_domain(k)).collect();
            CMatrix::from_columns(&cols)
        })
        .collect();
    PrecoderSet::from_directions(dirs, "precoder (zero channel estimate)")
}

/// Effective downlink gains at the users of cell 0 for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSamples {
    /// Per cell `l`, a `K x K` matrix whose `(t, k)` entry is the gain of
    /// BS `l`'s stream `t` at user `k` of cell 0.
    pub g: Vec<CMatrix>,
    /// Artificial-noise power reaching each cell-0 user (zero without AN).
    pub an_leak: Vec<f64>,
    /// `‖(He^0)^H t_0k‖²` for the unit-norm beam of user `k`.
    pub g_eve: Vec<f64>,
    /// Artificial-noise power per eavesdropper antenna (zero without AN).
    pub eve_an: f64,
}

impl GainSamples {
    pub fn users(&self) -> usize {
        self.g_eve.len()
    }

    pub fn gain(&self, cell: usize, stream: usize, user: usize) -> Complex64 {
        self.g[cell][(stream, user)]
    }

    /// Gains under a downlink power scaled by `factor`.
    pub fn rescaled(&self, factor: f64) -> GainSamples {
        let amp = Complex64::new(factor.sqrt(), 0.0);
        GainSamples {
            g: self.g.iter().map(|m| m * amp).collect(),
            an_leak: self.an_leak.iter().map(|x| x * factor).collect(),
            g_eve: self.g_eve.clone(),
            eve_an: self.eve_an * factor,
        }
    }

    /// Interference power at user `k` in this trial: every stream except
    /// its own plus artificial noise.
    fn interference(&self, k: usize) -> f64 {
        let mut s = self.an_leak[k];
        for (l, m) in self.g.iter().enumerate() {
            for t in 0..m.nrows() {
                if l == 0 && t == k {
                    continue;
                }
                s += m[(t, k)].norm_sqr();
            }
        }
        s
    }
}

/// `g_lt,k = sqrt(P) (h_0k^l)^H t_lt`, where `h_0k^l` is the channel between
/// user `k` of cell 0 and BS `l`, and `g_eve,k = ‖(He^0)^H t_0k‖²`.
pub fn compute_gains(channels: &ChannelSet, precoders: &PrecoderSet, power: f64) -> GainSamples {
    let amp = Complex64::new(power.sqrt(), 0.0);
    let g = precoders
        .beams
        .iter()
        .enumerate()
        .map(|(l, beams)| {
            // (k, t) -> transpose to (t, k)
            let m = channels.cell_block(0, l).adjoint() * beams;
            m.transpose() * amp
        })
        .collect();
    let he = channels.eve(0);
    let g_eve = (0..precoders.beams[0].ncols())
        .map(|k| norm_sqr(&(he.adjoint() * precoders.beams[0].column(k))))
        .collect();
    GainSamples {
        g,
        an_leak: vec![0.0; precoders.beams[0].ncols()],
        g_eve,
        eve_an: 0.0,
    }
}

/// Sample moments behind one user's SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMoments {
    /// `Ê[g_0k,k]`.
    pub mean_gain: Complex64,
    /// Standard error of the mean gain (per complex sample).
    pub mean_gain_stderr: f64,
    /// Unbiased sample variance of `g_0k,k`.
    pub gain_var: f64,
    pub gain_var_stderr: f64,
    /// `Σ_{t≠k} Ê|g_0t,k|²`.
    pub intra: f64,
    pub intra_stderr: f64,
    /// `Σ_{l≥1} Σ_t Ê|g_lt,k|²`.
    pub inter: f64,
    pub inter_stderr: f64,
    pub an_leak: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLink {
    pub gamma: f64,
    pub rate_bits: f64,
    /// Jackknife standard error of `rate_bits`.
    pub rate_stderr: f64,
    pub moments: GainMoments,
}

fn mean_and_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn jackknife_stderr(loo: &[f64]) -> f64 {
    let n = loo.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mean = loo.iter().sum::<f64>() / n;
    ((n - 1.0) / n * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt()
}

/// Running sums for one user, enough to evaluate the SINR with any single
/// trial left out.
struct UserSums {
    n: usize,
    g: Complex64,
    g2: f64,
    interference: f64,
}

impl UserSums {
    fn gamma(&self, n0d: f64) -> f64 {
        let n = self.n as f64;
        let mean = self.g / n;
        let var = if self.n > 1 {
            ((self.g2 - n * mean.norm_sqr()) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        mean.norm_sqr() / (n0d + var + self.interference / n)
    }

    fn without(&self, g: Complex64, interference: f64) -> UserSums {
        UserSums {
            n: self.n - 1,
            g: self.g - g,
            g2: self.g2 - g.norm_sqr(),
            interference: self.interference - interference,
        }
    }
}

/// Use-and-forget SINR and rate of every cell-0 user from per-trial gains.
pub fn estimate_sinr(trials: &[GainSamples], n0d: f64) -> Result<Vec<UserLink>> {
    if trials.len() < 2 {
        return Err(Error::TooFewTrials {
            needed: 2,
            got: trials.len(),
        });
    }
    let users = trials[0].users();
    let n = trials.len() as f64;
    let mut out = Vec::with_capacity(users);
    for k in 0..users {
        let gains: Vec<Complex64> = trials.iter().map(|s| s.gain(0, k, k)).collect();
        let interference: Vec<f64> = trials.iter().map(|s| s.interference(k)).collect();
        let sums = UserSums {
            n: trials.len(),
            g: gains.iter().sum(),
            g2: gains.iter().map(|g| g.norm_sqr()).sum(),
            interference: interference.iter().sum(),
        };
        let gamma = sums.gamma(n0d);
        let loo: Vec<f64> = gains
            .iter()
            .zip(&interference)
            .map(|(&g, &i)| (1.0 + sums.without(g, i).gamma(n0d)).log2())
            .collect();

        let mean_gain = sums.g / n;
        let dev2: Vec<f64> = gains.iter().map(|g| (g - mean_gain).norm_sqr()).collect();
        let (gain_var_biased, gain_var_se) = mean_and_stderr(dev2.iter().copied());
        let intra_of = |s: &GainSamples| (0..users).filter(|&t| t != k).map(|t| s.gain(0, t, k).norm_sqr()).sum::<f64>();
        let inter_of = |s: &GainSamples| {
            (1..s.g.len())
                .map(|l| (0..users).map(|t| s.gain(l, t, k).norm_sqr()).sum::<f64>())
                .sum::<f64>()
        };
        let (intra, intra_stderr) = mean_and_stderr(trials.iter().map(intra_of));
        let (inter, inter_stderr) = mean_and_stderr(trials.iter().map(inter_of));
        let an_leak = trials.iter().map(|s| s.an_leak[k]).sum::<f64>() / n;

        out.push(UserLink {
            gamma,
            rate_bits: (1.0 + gamma).log2(),
            rate_stderr: jackknife_stderr(&loo),
            moments: GainMoments {
                mean_gain,
                mean_gain_stderr: (gain_var_biased * n / (n - 1.0) / n).sqrt(),
                gain_var: gain_var_biased * n / (n - 1.0),
                gain_var_stderr: gain_var_se,
                intra,
                intra_stderr,
                inter,
                inter_stderr,
                an_leak,
            },
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveCapacity {
    pub bits: f64,
    pub stderr: f64,
}

fn eve_bits(s: &GainSamples, k: usize, beam_power: f64, n0e: f64) -> f64 {
    (1.0 + beam_power * s.g_eve[k] / (s.eve_an + n0e)).log2()
}

/// Mean over trials of `log2(1 + beam_power g_eve / (AN + N0e))`.
pub fn estimate_eve_capacity(trials: &[GainSamples], beam_power: f64, n0e: f64) -> Result<Vec<EveCapacity>> {
    if trials.is_empty() {
        return Err(Error::TooFewTrials { needed: 1, got: 0 });
    }
    Ok((0..trials[0].users())
        .map(|k| {
            let (bits, stderr) = mean_and_stderr(trials.iter().map(|s| eve_bits(s, k, beam_power, n0e)));
            EveCapacity { bits, stderr }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserSecrecy {
    pub rate_bits: f64,
    pub rate_stderr: f64,
    pub eve_bits: f64,
    pub eve_stderr: f64,
    /// `max(0, rate - eve)`.
    pub secrecy_bits: f64,
    pub secrecy_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyReport {
    pub users: Vec<UserSecrecy>,
    pub sum_secrecy_bits: f64,
    pub sum_stderr: f64,
    pub trials: usize,
}

impl SecrecyReport {
    pub fn sum_rate_bits(&self) -> f64 {
        self.users.iter().map(|u| u.rate_bits).sum()
    }

    pub fn sum_eve_bits(&self) -> f64 {
        self.users.iter().map(|u| u.eve_bits).sum()
    }
}

/// `Σ_k max(0, R_k - C_k)` from per-user rates and eavesdropper capacities.
pub fn secrecy_sum_rate(rates: &[f64], eve: &[f64]) -> Result<SecrecyReport> {
    if rates.len() != eve.len() {
        return Err(Error::DimensionMismatch {
            what: "secrecy rate inputs",
            expected: rates.len().to_string(),
            found: eve.len().to_string(),
        });
    }
    let users: Vec<UserSecrecy> = rates
        .iter()
        .zip(eve)
        .map(|(&r, &c)| UserSecrecy {
            rate_bits: r,
            rate_stderr: 0.0,
            eve_bits: c,
            eve_stderr: 0.0,
            secrecy_bits: (r - c).max(0.0),
            secrecy_stderr: 0.0,
        })
        .collect();
    Ok(SecrecyReport {
        sum_secrecy_bits: users.iter().map(|u| u.secrecy_bits).sum(),
        users,
        sum_stderr: 0.0,
        trials: 0,
    })
}

/// Full Monte Carlo report: rates, eavesdropper capacities and the secrecy
/// sum-rate, with jackknife standard errors over trials.
pub fn evaluate_secrecy(trials: &[GainSamples], beam_power: f64, n0d: f64, n0e: f64) -> Result<(SecrecyReport, Vec<UserLink>)> {
    let links = estimate_sinr(trials, n0d)?;
    let eve = estimate_eve_capacity(trials, beam_power, n0e)?;
    let rates: Vec<f64> = links.iter().map(|l| l.rate_bits).collect();
    let caps: Vec<f64> = eve.iter().map(|c| c.bits).collect();
    let mut report = secrecy_sum_rate(&rates, &caps)?;
    report.trials = trials.len();

    let n = trials.len();
    let users = links.len();
    let mut loo_user = vec![Vec::with_capacity(n); users];
    let mut loo_sum = vec![0.0; n];
    for k in 0..users {
        let gains: Vec<Complex64> = trials.iter().map(|s| s.gain(0, k, k)).collect();
        let interference: Vec<f64> = trials.iter().map(|s| s.interference(k)).collect();
        let eve_k: Vec<f64> = trials.iter().map(|s| eve_bits(s, k, beam_power, n0e)).collect();
        let sums = UserSums {
            n,
            g: gains.iter().sum(),
            g2: gains.iter().map(|g| g.norm_sqr()).sum(),
            interference: interference.iter().sum(),
        };
        let eve_total: f64 = eve_k.iter().sum();
        for i in 0..n {
            let r = (1.0 + sums.without(gains[i], interference[i]).gamma(n0d)).log2();
            let c = (eve_total - eve_k[i]) / (n - 1) as f64;
            let s = (r - c).max(0.0);
            loo_user[k].push(s);
            loo_sum[i] += s;
        }
    }
    for (k, u) in report.users.iter_mut().enumerate() {
        u.rate_stderr = links[k].rate_stderr;
        u.eve_stderr = eve[k].stderr;
        u.secrecy_stderr = jackknife_stderr(&loo_user[k]);
    }
    report.sum_stderr = jackknife_stderr(&loo_sum);
    Ok((report, links))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn sample(users: usize, cells: usize) -> GainSamples {
        GainSamples {
            g: vec![CMatrix::from_element(users, users, ZERO); cells],
            an_leak: vec![0.0; users],
            g_eve: vec![0.0; users],
            eve_an: 0.0,
        }
    }

    #[test]
    fn unit_estimate_selects_basis_column() {
        let v = CMatrix::from_fn(4, 1, |i, _| Complex64::new(if i == 2 { 1.0 } else { 0.0 }, 0.0));
        let est = SubspaceEstimate {
            v_eq: v.clone(),
            z0p: CMatrix::from_element(1, 1, ZERO),
            h_hat: vec![CVector::from_element(1, Complex64::new(1.0, 0.0))],
        };
        let p = build_precoders(&[est.clone()]).unwrap();
        assert_eq!(p.beam(0, 0), v.column(0).into_owned());

        let mut scaled = est;
        scaled.h_hat[0] *= Complex64::new(7.5, 0.0);
        assert_eq!(build_precoders(&[scaled]).unwrap(), p);
    }

    #[test]
    fn zero_estimate_is_rejected() {
        let est = SubspaceEstimate {
            v_eq: CMatrix::identity(3, 1),
            z0p: CMatrix::from_element(1, 1, ZERO),
            h_hat: vec![CVector::from_element(1, ZERO)],
        };
        assert!(matches!(build_precoders(&[est]), Err(Error::ZeroVector(_))));
    }

    #[test]
    fn constant_gain_no_interference() {
        let c = Complex64::new(1.5, -0.5);
        let mut s = sample(1, 1);
        s.g[0][(0, 0)] = c;
        let links = estimate_sinr(&[s.clone(), s.clone(), s], 1.0).unwrap();
        assert!((links[0].gamma - c.norm_sqr()).abs() < 1e-12);
        assert_eq!(links[0].moments.gain_var, 0.0);
    }

    #[test]
    fn single_interferer_closed_form() {
        let c = Complex64::new(2.0, 0.0);
        let mut s = sample(2, 1);
        s.g[0][(0, 0)] = c;
        s.g[0][(1, 0)] = Complex64::new(0.0, 2.0);
        let links = estimate_sinr(&[s.clone(), s], 1.0).unwrap();
        assert!((links[0].gamma - 4.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn sinr_needs_two_trials() {
        assert!(matches!(estimate_sinr(&[sample(1, 1)], 1.0), Err(Error::TooFewTrials { .. })));
    }

    #[test]
    fn eve_capacity_cases() {
        let s = sample(2, 1);
        let c = estimate_eve_capacity(&[s.clone()], 4.0, 1.0).unwrap();
        assert_eq!(c[0].bits, 0.0);
        let mut s = s;
        s.g_eve = vec![0.25, 0.25];
        let c = estimate_eve_capacity(&[s.clone(), s], 4.0, 1.0).unwrap();
        assert!((c[1].bits - 1.0).abs() < 1e-15);
    }

    #[test]
    fn secrecy_clamps_per_user() {
        assert_eq!(secrecy_sum_rate(&[2.0, 2.0], &[0.0, 0.0]).unwrap().sum_secrecy_bits, 4.0);
        assert_eq!(secrecy_sum_rate(&[1.0, 3.0], &[2.0, 1.0]).unwrap().sum_secrecy_bits, 2.0);
        assert_eq!(secrecy_sum_rate(&[0.0, 0.0], &[5.0, 5.0]).unwrap().sum_secrecy_bits, 0.0);
        assert!(secrecy_sum_rate(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rescale_scales_power_terms() {
        let mut s = sample(1, 2);
        s.g[1][(0, 0)] = Complex64::new(1.0, 1.0);
        s.an_leak[0] = 2.0;
        s.eve_an = 3.0;
        let r = s.rescaled(4.0);
        assert_eq!(r.g[1][(0, 0)], Complex64::new(2.0, 2.0));
        assert_eq!(r.an_leak[0], 8.0);
        assert_eq!(r.eve_an, 12.0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn secrecy_monotone(rates in prop::collection::vec(0.0f64..10.0, 1..6),
                                caps in prop::collection::vec(0.0f64..10.0, 6),
                                bump in 0.0f64..5.0, which in 0usize..6) {
                let caps = &caps[..rates.len()];
                let i = which % rates.len();
                let base = secrecy_sum_rate(&rates, caps).unwrap().sum_secrecy_bits;
                prop_assert!(base >= 0.0);

                let mut more_leak = caps.to_vec();
                more_leak[i] += bump;
                prop_assert!(secrecy_sum_rate(&rates, &more_leak).unwrap().sum_secrecy_bits <= base);

                let mut more_rate = rates.clone();
                more_rate[i] += bump;
                prop_assert!(secrecy_sum_rate(&more_rate, caps).unwrap().sum_secrecy_bits >= base);
            }
        }
    }
}
