// Proposed scheme against matched filtering with artificial noise as the
// attack grows stronger.
//
// ```bash
// cargo run --release --example mfan_comparison -- 100
// ```

use secure_mimo::harness::{run_sweep, Axis, Scheme, SweepSpec};
use secure_mimo::{Result, SystemConfig};

pub fn run_example(base: &SystemConfig, trials: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let spec = SweepSpec {
        trials,
        seed: 5,
        schemes: vec![Scheme::Proposed, Scheme::Mfan],
        ..SweepSpec::new(Axis::Rho, vec![10.0, 30.0, 100.0])
    };
    let sweep = run_sweep(base, &spec)?;
    let proposed = sweep.sum_secrecy(Scheme::Proposed);
    let mfan = sweep.sum_secrecy(Scheme::Mfan);
    println!("{:>6}  {:>9}  {:>9}", "rho", "proposed", "MF-AN");
    for (i, p) in sweep.points.iter().enumerate() {
        println!("{:>6}  {:>9.3}  {:>9.3}", p.value, proposed[i], mfan[i]);
    }
    Ok((proposed, mfan))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    run_example(&SystemConfig::reference(), trials).map(|_| ())
}
