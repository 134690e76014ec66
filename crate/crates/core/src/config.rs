//! Scenario parameters, validation, and the power-ordering construction
//! that decides which eigenvectors of the uplink Gram belong to the desired
//! users.
//!
//! Cells are indexed `0..=L`; cell 0 hosts the eavesdropper and is the cell
//! whose secrecy rate is evaluated. All powers are linear.

use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Number of interfering cells `L`.
    pub interfering_cells: usize,
    /// Users per cell `K`.
    pub users: usize,
    pub bs_antennas: usize,
    pub eve_antennas: usize,
    /// Coherence interval `T` in symbols.
    pub coherence_len: usize,
    /// Pilot length `tau` in symbols.
    pub pilot_len: usize,
    /// Uplink transmit power, `[cell][user]`.
    pub uplink_power: Vec<Vec<f64>>,
    /// Total eavesdropper transmit power `Pe`.
    pub eve_power: f64,
    /// Downlink power per user stream `P`.
    pub downlink_power: f64,
    pub noise_uplink: f64,
    pub noise_downlink: f64,
    /// Receiver noise of the eavesdropper in the downlink.
    pub noise_eve: f64,
    /// Large-scale gain, `[cell][user][bs]`.
    pub beta: Vec<Vec<Vec<f64>>>,
    /// Large-scale gain eavesdropper to each BS, `[bs]`.
    pub beta_eve: Vec<f64>,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// The evaluation scenario used throughout the experiments: three
/// interfering cells, 128 BS antennas, unit own-cell gain and 0.2 cross-cell
/// gain, equal uplink powers in every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub interfering_cells: usize,
    pub users: usize,
    pub bs_antennas: usize,
    pub eve_antennas: usize,
    pub coherence_len: usize,
    pub pilot_len: usize,
    pub p0_over_n0_db: f64,
    /// `Pe / (P0 K)`, linear.
    pub rho: f64,
    /// `P / N0d` in dB.
    pub snr_db: f64,
    pub noise_uplink: f64,
    pub noise_downlink: f64,
    pub beta_own: f64,
    pub beta_cross: f64,
    pub beta_eve_own: f64,
    pub beta_eve_cross: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            interfering_cells: 3,
            users: 5,
            bs_antennas: 128,
            eve_antennas: 4,
            coherence_len: 1024,
            pilot_len: 5,
            p0_over_n0_db: 5.0,
            rho: 30.0,
            snr_db: 5.0,
            noise_uplink: 1.0,
            noise_downlink: 1.0,
            beta_own: 1.0,
            beta_cross: 0.2,
            beta_eve_own: 1.0,
            beta_eve_cross: 0.2,
        }
    }
}

impl Scenario {
    pub fn build(&self) -> SystemConfig {
        let cells = self.interfering_cells + 1;
        let k = self.users;
        let p0 = self.noise_uplink * db_to_linear(self.p0_over_n0_db);
        let beta = (0..cells)
            .map(|l| {
                (0..k)
                    .map(|_| {
                        (0..cells)
                            .map(|p| if p == l { self.beta_own } else { self.beta_cross })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let beta_eve = (0..cells)
            .map(|p| if p == 0 { self.beta_eve_own } else { self.beta_eve_cross })
            .collect();
        SystemConfig {
            interfering_cells: self.interfering_cells,
            users: k,
            bs_antennas: self.bs_antennas,
            eve_antennas: self.eve_antennas,
            coherence_len: self.coherence_len,
            pilot_len: self.pilot_len,
            uplink_power: vec![vec![p0; k]; cells],
            eve_power: self.rho * p0 * k as f64,
            downlink_power: self.noise_downlink * db_to_linear(self.snr_db),
            noise_uplink: self.noise_uplink,
            noise_downlink: self.noise_downlink,
            noise_eve: self.noise_uplink,
            beta,
            beta_eve,
        }
    }
}

impl SystemConfig {
    /// The default evaluation scenario.
    pub fn reference() -> Self {
        Scenario::default().build()
    }

    pub fn cells(&self) -> usize {
        self.interfering_cells + 1
    }

    /// Number of uplink sources seen by each BS, `M = (L + 1) K + N_e`.
    pub fn sources(&self) -> usize {
        self.cells() * self.users + self.eve_antennas
    }

    pub fn data_len(&self) -> usize {
        self.coherence_len.saturating_sub(self.pilot_len)
    }

    /// Total uplink power of the cell-0 users.
    pub fn desired_power_sum(&self) -> f64 {
        self.uplink_power.first().map(|p| p.iter().sum()).unwrap_or(0.0)
    }

    /// `P / N0d`.
    pub fn snr(&self) -> f64 {
        self.downlink_power / self.noise_downlink
    }

    /// `Pe / (P0 K)`.
    pub fn rho(&self) -> f64 {
        self.eve_power / self.desired_power_sum()
    }

    /// Set `P` from an SNR in dB, keeping `N0d`.
    pub fn set_snr_db(&mut self, snr_db: f64) {
        self.downlink_power = self.noise_downlink * db_to_linear(snr_db);
    }

    /// Set `Pe` from `rho`, keeping the users' powers.
    pub fn set_rho(&mut self, rho: f64) {
        self.eve_power = rho * self.desired_power_sum();
    }

    /// `Pe βe` against `P0 β_0k` against `P_l β_lk` at BS 0, strictly
    /// decreasing for every user.
    pub fn power_separated(&self) -> bool {
        let eve = self.eve_power * self.beta_eve[0];
        (0..self.users).all(|k| {
            let desired = self.uplink_power[0][k] * self.beta[0][k][0];
            eve > desired
                && (1..self.cells()).all(|l| {
                    (0..self.users).all(|j| desired > self.uplink_power[l][j] * self.beta[l][j][0])
                })
        })
    }

    fn check_shapes(&self) -> Result<()> {
        let cells = self.cells();
        let mismatch = |what, expected: String, found: String| Error::DimensionMismatch {
            what,
            expected,
            found,
        };
        if self.uplink_power.len() != cells || self.uplink_power.iter().any(|p| p.len() != self.users) {
            return Err(mismatch(
                "uplink_power",
                format!("{cells} x {}", self.users),
                format!("{} rows", self.uplink_power.len()),
            ));
        }
        let beta_ok = self.beta.len() == cells
            && self
                .beta
                .iter()
                .all(|cell| cell.len() == self.users && cell.iter().all(|u| u.len() == cells));
        if !beta_ok {
            return Err(mismatch(
                "beta",
                format!("{cells} x {} x {cells}", self.users),
                format!("{} cells", self.beta.len()),
            ));
        }
        if self.beta_eve.len() != cells {
            return Err(mismatch("beta_eve", cells.to_string(), self.beta_eve.len().to_string()));
        }
        Ok(())
    }

    pub fn validate(self) -> Result<ValidatedConfig> {
        validate_config(self)
    }

    /// Load a JSON config file. See [`ConfigFile`] for the accepted keys.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let value = convert_db_keys(value)?;
        let file: ConfigFile = serde_json::from_value(value)?;
        file.resolve()
    }
}

/// A configuration that passed [`validate_config`], with derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    cfg: SystemConfig,
    pub sources: usize,
    pub data_len: usize,
    pub snr: f64,
    pub rho: f64,
    /// Whether `Pe βe > P0 β_0k > P_l β_lk` holds at BS 0. Diagnostic only.
    pub power_separated: bool,
}

impl ValidatedConfig {
    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn into_inner(self) -> SystemConfig {
        self.cfg
    }
}

impl Deref for ValidatedConfig {
    type Target = SystemConfig;
    fn deref(&self) -> &SystemConfig {
        &self.cfg
    }
}

pub fn validate_config(cfg: SystemConfig) -> Result<ValidatedConfig> {
    if cfg.users == 0 {
        return Err(Error::InvalidConfig("at least one user per cell is required".into()));
    }
    if cfg.pilot_len < cfg.users {
        return Err(Error::PilotsNotOrthogonal {
            users: cfg.users,
            pilot_len: cfg.pilot_len,
        });
    }
    if cfg.coherence_len <= cfg.pilot_len {
        return Err(Error::EmptyDataPhase {
            coherence_len: cfg.coherence_len,
            pilot_len: cfg.pilot_len,
        });
    }
    cfg.check_shapes()?;
    if cfg.bs_antennas < cfg.sources() {
        return Err(Error::TooFewAntennas {
            antennas: cfg.bs_antennas,
            required: cfg.sources(),
        });
    }
    let positive = |field: String, value: f64| {
        if value > 0.0 && value.is_finite() {
            Ok(())
        } else {
            Err(Error::NonPositive { field, value })
        }
    };
    for (l, cell) in cfg.uplink_power.iter().enumerate() {
        for (k, &p) in cell.iter().enumerate() {
            positive(format!("uplink_power[{l}][{k}]"), p)?;
        }
    }
    for (l, cell) in cfg.beta.iter().enumerate() {
        for (k, user) in cell.iter().enumerate() {
            for (p, &b) in user.iter().enumerate() {
                positive(format!("beta[{l}][{k}][{p}]"), b)?;
            }
        }
    }
    for (p, &b) in cfg.beta_eve.iter().enumerate() {
        positive(format!("beta_eve[{p}]"), b)?;
    }
    positive("eve_power".into(), cfg.eve_power)?;
    positive("downlink_power".into(), cfg.downlink_power)?;
    positive("noise_uplink".into(), cfg.noise_uplink)?;
    positive("noise_downlink".into(), cfg.noise_downlink)?;
    positive("noise_eve".into(), cfg.noise_eve)?;

    Ok(ValidatedConfig {
        sources: cfg.sources(),
        data_len: cfg.data_len(),
        snr: cfg.snr(),
        rho: cfg.rho(),
        power_separated: cfg.power_separated(),
        cfg,
    })
}

/// Which kind of uplink source a power level belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceClass {
    Interferer,
    Desired,
    Eavesdropper,
}

impl SourceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceClass::Interferer => "interferer",
            SourceClass::Desired => "desired",
            SourceClass::Eavesdropper => "eavesdropper",
        }
    }
}

/// Received power levels at one BS sorted ascending, with the positions of
/// the desired users. Positions are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedPowerProfile {
    pub bs: usize,
    pub theta: Vec<f64>,
    pub labels: Vec<SourceClass>,
    /// Sorted positions in `theta` that carry a desired user's level.
    pub desired_indices: Vec<usize>,
    /// Which user (of the BS's own cell) sits at each desired position.
    pub desired_users: Vec<usize>,
    /// Some desired level equals an interferer or eavesdropper level.
    pub ambiguous: bool,
}

impl OrderedPowerProfile {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Power ordering at BS 0.
pub fn order_powers(cfg: &SystemConfig) -> OrderedPowerProfile {
    order_powers_at(cfg, 0)
}

/// Power ordering at the BS of cell `bs`: its own users are desired, the
/// other cells' users interfere.
///
/// Ties are broken by class (interferer, desired, eavesdropper) and then by
/// source order, so the result is deterministic.
pub fn order_powers_at(cfg: &SystemConfig, bs: usize) -> OrderedPowerProfile {
    // (level, class, user index within own cell or usize::MAX)
    let mut levels: Vec<(f64, SourceClass, usize)> = Vec::with_capacity(cfg.sources());
    for l in (0..cfg.cells()).filter(|&l| l != bs) {
        for k in 0..cfg.users {
            levels.push((cfg.uplink_power[l][k] * cfg.beta[l][k][bs], SourceClass::Interferer, usize::MAX));
        }
    }
    for k in 0..cfg.users {
        levels.push((cfg.uplink_power[bs][k] * cfg.beta[bs][k][bs], SourceClass::Desired, k));
    }
    let eve = cfg.eve_power * cfg.beta_eve[bs];
    for _ in 0..cfg.eve_antennas {
        levels.push((eve, SourceClass::Eavesdropper, usize::MAX));
    }

    levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut desired_indices = Vec::with_capacity(cfg.users);
    let mut desired_users = Vec::with_capacity(cfg.users);
    for (i, &(_, class, user)) in levels.iter().enumerate() {
        if class == SourceClass::Desired {
            desired_indices.push(i);
            desired_users.push(user);
        }
    }
    let ambiguous = levels.iter().any(|&(v, c, _)| {
        c == SourceClass::Desired
            && levels.iter().any(|&(w, d, _)| d != SourceClass::Desired && w == v)
    });
    if ambiguous {
        log::warn!("BS {bs}: a desired power level coincides with a non-desired level; subspace separation is ambiguous");
    }

    OrderedPowerProfile {
        bs,
        theta: levels.iter().map(|x| x.0).collect(),
        labels: levels.iter().map(|x| x.1).collect(),
        desired_indices,
        desired_users,
        ambiguous,
    }
}

/// JSON configuration file. Every key is optional; missing keys fall back to
/// the default scenario. Any numeric key may instead be given in dB with a
/// `_db` suffix (`"snr_db": 5` is `"snr": 3.162...`).
///
/// `snr` sets `downlink_power` relative to `noise_downlink`, `rho` sets
/// `eve_power` relative to the cell-0 users, `p0_over_n0` sets every uplink
/// power relative to `noise_uplink`. Explicit `downlink_power`, `eve_power`
/// and `uplink_power` take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub interfering_cells: Option<usize>,
    pub users: Option<usize>,
    pub bs_antennas: Option<usize>,
    pub eve_antennas: Option<usize>,
    pub coherence_len: Option<usize>,
    pub pilot_len: Option<usize>,
    pub uplink_power: Option<PowerSpec>,
    pub p0_over_n0: Option<f64>,
    pub eve_power: Option<f64>,
    pub rho: Option<f64>,
    pub downlink_power: Option<f64>,
    pub snr: Option<f64>,
    pub noise_uplink: Option<f64>,
    pub noise_downlink: Option<f64>,
    pub noise_eve: Option<f64>,
    pub beta: Option<Vec<Vec<Vec<f64>>>>,
    pub beta_own: Option<f64>,
    pub beta_cross: Option<f64>,
    pub beta_eve: Option<Vec<f64>>,
    pub beta_eve_own: Option<f64>,
    pub beta_eve_cross: Option<f64>,
}

/// Uplink powers: one value per cell, or one per user of every cell.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PowerSpec {
    PerCell(Vec<f64>),
    PerUser(Vec<Vec<f64>>),
}

impl ConfigFile {
    pub fn resolve(self) -> Result<SystemConfig> {
        let d = Scenario::default();
        let users = self.users.unwrap_or(d.users);
        let scenario = Scenario {
            interfering_cells: self.interfering_cells.unwrap_or(d.interfering_cells),
            users,
            bs_antennas: self.bs_antennas.unwrap_or(d.bs_antennas),
            eve_antennas: self.eve_antennas.unwrap_or(d.eve_antennas),
            coherence_len: self.coherence_len.unwrap_or(d.coherence_len),
            pilot_len: self.pilot_len.unwrap_or(users.max(1)),
            p0_over_n0_db: self.p0_over_n0.map(linear_to_db).unwrap_or(d.p0_over_n0_db),
            rho: self.rho.unwrap_or(d.rho),
            snr_db: self.snr.map(linear_to_db).unwrap_or(d.snr_db),
            noise_uplink: self.noise_uplink.unwrap_or(d.noise_uplink),
            noise_downlink: self.noise_downlink.unwrap_or(d.noise_downlink),
            beta_own: self.beta_own.unwrap_or(d.beta_own),
            beta_cross: self.beta_cross.unwrap_or(d.beta_cross),
            beta_eve_own: self.beta_eve_own.unwrap_or(d.beta_eve_own),
            beta_eve_cross: self.beta_eve_cross.unwrap_or(d.beta_eve_cross),
        };
        let mut cfg = scenario.build();
        let cells = cfg.cells();
        if let Some(p) = self.uplink_power {
            cfg.uplink_power = match p {
                PowerSpec::PerCell(v) => {
                    if v.len() != cells {
                        return Err(Error::DimensionMismatch {
                            what: "uplink_power",
                            expected: cells.to_string(),
                            found: v.len().to_string(),
                        });
                    }
                    v.iter().map(|&x| vec![x; users]).collect()
                }
                PowerSpec::PerUser(v) => v,
            };
            if self.eve_power.is_none() {
                cfg.set_rho(scenario.rho);
            }
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        if let Some(b) = self.beta_eve {
            cfg.beta_eve = b;
        }
        if let Some(pe) = self.eve_power {
            cfg.eve_power = pe;
        }
        if let Some(p) = self.downlink_power {
            cfg.downlink_power = p;
        }
        cfg.noise_eve = self.noise_eve.unwrap_or(cfg.noise_uplink);
        cfg.check_shapes()?;
        Ok(cfg)
    }
}

/// Rename top-level `<key>_db` entries to `<key>` with values converted to
/// linear scale. Arrays are converted element-wise.
fn convert_db_keys(value: serde_json::Value) -> Result<serde_json::Value> {
    use serde_json::Value;
    fn to_linear(v: &Value, key: &str) -> Result<Value> {
        match v {
            Value::Number(n) => {
                let db = n.as_f64().ok_or_else(|| Error::Parse(format!("`{key}` is not a number")))?;
                Ok(serde_json::json!(db_to_linear(db)))
            }
            Value::Array(items) => Ok(Value::Array(
                items.iter().map(|x| to_linear(x, key)).collect::<Result<_>>()?,
            )),
            _ => Err(Error::Parse(format!("`{key}` must be numeric"))),
        }
    }
    let Value::Object(map) = value else {
        return Err(Error::Parse("config must be a JSON object".into()));
    };
    let mut out = serde_json::Map::with_capacity(map.len());
    for (key, v) in map {
        if let Some(base) = key.strip_suffix("_db") {
            if out.contains_key(base) {
                return Err(Error::Parse(format!("both `{base}` and `{key}` given")));
            }
            out.insert(base.to_string(), to_linear(&v, &key)?);
        } else {
            if out.contains_key(&key) {
                return Err(Error::Parse(format!("both `{key}` and `{key}_db` given")));
            }
            out.insert(key, v);
        }
    }
    Ok(Value::Object(out))
}
