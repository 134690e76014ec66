// Eigenvalue layering of one uplink block and how well the selected
// subspace captures the users while rejecting the eavesdropper.
//
// ```bash
// cargo run --release --example subspace_spectrum
// ```

use secure_mimo::config::order_powers_at;
use secure_mimo::estimator::{position_labels, subspace_alignment};
use secure_mimo::harness::{estimate_at_bs, realize};
use secure_mimo::{Result, Scenario};

pub fn run_example(bs_antennas: usize, coherence_len: usize) -> Result<(f64, f64)> {
    let cfg = Scenario {
        bs_antennas,
        coherence_len,
        ..Scenario::default()
    }
    .build()
    .validate()?;
    let real = realize(&cfg, 11)?;
    let est = estimate_at_bs(&cfg, &real.observations[0], &real.sources.pilots, 0)?;
    let profile = order_powers_at(&cfg, 0);

    // print the top of the spectrum and the edge of the noise bulk
    let labels = position_labels(est.eigen.dim(), &profile);
    let first = est.eigen.dim() - profile.len() - 3;
    for j in first..est.eigen.dim() {
        let class = labels[j].map_or("noise", |c| c.as_str());
        println!("{j:>4}  {:>10.4}  {class}", est.eigen.eigenvalues[j]);
    }

    let v = &est.estimate.v_eq;
    let users = (0..cfg.users)
        .map(|k| subspace_alignment(v, &real.channels.user(0, k, 0).into_owned()))
        .sum::<Result<f64>>()?
        / cfg.users as f64;
    let he = real.channels.eve(0);
    let eve = (0..he.ncols())
        .map(|j| subspace_alignment(v, &he.column(j).into_owned()))
        .sum::<Result<f64>>()?
        / he.ncols() as f64;
    println!("layered: {}, user alignment {users:.4}, eavesdropper alignment {eve:.5}", est.layered);
    Ok((users, eve))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example(128, 1024).map(|_| ())
}
