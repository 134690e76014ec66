// Secrecy sum-rate against the coherence length, written as plot-ready CSV.
//
// ```bash
// cargo run --release --example coherence_sweep -- 100 > coherence.csv
// ```

use secure_mimo::harness::{run_sweep, write_rows, Axis, SweepSpec};
use secure_mimo::{Result, SystemConfig};

pub fn run_example<W: std::io::Write>(base: &SystemConfig, grid: Vec<f64>, trials: usize, out: W) -> Result<Vec<f64>> {
    let spec = SweepSpec {
        trials,
        seed: 3,
        ..SweepSpec::new(Axis::CoherenceLen, grid)
    };
    let sweep = run_sweep(base, &spec)?;
    write_rows(&sweep.rows(), out)?;
    Ok(sweep.sum_secrecy(secure_mimo::Scheme::Proposed))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let sums = run_example(&SystemConfig::reference(), vec![512.0, 1024.0, 2048.0], trials, std::io::stdout().lock())?;
    eprintln!("sum secrecy rate per T: {sums:?}");
    Ok(())
}
