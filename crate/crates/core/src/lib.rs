//! Monte Carlo simulator for secure multi-cell massive MIMO downlink when an
//! active eavesdropper contaminates the uplink pilots.
//!
//! The proposed scheme estimates each user's channel inside the signal
//! eigenspace of the received uplink block (pilots and data together),
//! precodes inside that subspace and is compared against closed-form
//! large-array rates and a matched-filter artificial-noise baseline.
//!
//! ```no_run
//! use secure_mimo::{run_point, SystemConfig};
//!
//! let cfg = SystemConfig::reference().validate()?;
//! let point = run_point(&cfg, 200, 7, 0)?;
//! println!("{:.2} bits", point.secrecy.sum_secrecy_bits);
//! # Ok::<(), secure_mimo::Error>(())
//! ```

pub mod asymptotics;
pub mod config;
pub mod downlink;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod mfan;
pub mod rng;
pub mod signal;

pub use asymptotics::{asymptotic_rate, AsymptoticReport};
pub use config::{order_powers, validate_config, Scenario, SystemConfig, ValidatedConfig};
pub use downlink::{evaluate_secrecy, SecrecyReport};
pub use error::{Error, Result};
pub use harness::{run_point, run_sweep, Axis, PointResult, Scheme, SweepResult, SweepSpec};
pub use mfan::MfanConfig;
