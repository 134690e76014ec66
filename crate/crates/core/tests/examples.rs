//! Runs the examples at reduced size so they stay in sync with the library.

use secure_mimo::{Scenario, SystemConfig};

mod asymptotic_rate {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/asymptotic_rate.rs"));
}

mod subspace_spectrum {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/subspace_spectrum.rs"));
}

mod secrecy_point {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/secrecy_point.rs"));
}

mod mfan_comparison {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/mfan_comparison.rs"));
}

mod coherence_sweep {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/coherence_sweep.rs"));
}

fn small() -> SystemConfig {
    Scenario {
        interfering_cells: 1,
        users: 2,
        bs_antennas: 32,
        eve_antennas: 2,
        coherence_len: 128,
        pilot_len: 2,
        ..Scenario::default()
    }
    .build()
}

#[test]
fn asymptotic_rate_grows_with_array() {
    let sums = asymptotic_rate::run_example().unwrap();
    assert!(sums.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn subspace_spectrum_runs() {
    let (users, eve) = subspace_spectrum::run_example(64, 512).unwrap();
    assert!(users > eve);
}

#[test]
fn secrecy_point_runs() {
    secrecy_point::run_example(2).unwrap();
}

#[test]
fn mfan_comparison_runs() {
    let (proposed, mfan) = mfan_comparison::run_example(&small(), 3).unwrap();
    assert_eq!(proposed.len(), 3);
    assert_eq!(mfan.len(), 3);
}

#[test]
fn coherence_sweep_writes_csv() {
    let mut out = Vec::new();
    let sums = coherence_sweep::run_example(&small(), vec![64.0, 128.0], 3, &mut out).unwrap();
    assert_eq!(sums.len(), 2);
    assert!(String::from_utf8(out).unwrap().starts_with("axis_value,scheme,k"));
}
