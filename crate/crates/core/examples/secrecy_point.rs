// Simulate the reference operating point and print per-user rates, the
// eavesdropper's capacity and the estimator diagnostics.
//
// ```bash
// cargo run --release --example secrecy_point -- 200
// ```

use secure_mimo::harness::run_point_with;
use secure_mimo::mfan::default_phi_grid;
use secure_mimo::{Result, SystemConfig};

pub fn run_example(trials: usize) -> Result<()> {
    let cfg = SystemConfig::reference().validate()?;
    let phis = default_phi_grid();
    let point = run_point_with(&cfg, trials, 7, 0, Some(&phis))?;
    println!("user  rate   c_eve  secrecy  gamma  gamma_bar  |Eg|^2/P  var/P  a1  a2");
    for (k, (u, link)) in point.secrecy.users.iter().zip(&point.links).enumerate() {
        let a = &point.asymptotic.users[k];
        let m = &link.moments;
        println!(
            "{:>4}  {:.3}  {:.3}  {:.3}    {:.3}  {:.3}      {:.2}    {:.3}  {:.2}  {:.2}",
            k + 1,
            u.rate_bits,
            u.eve_bits,
            u.secrecy_bits,
            link.gamma,
            a.gamma_bar,
            m.mean_gain.norm_sqr() / cfg.downlink_power,
            m.gain_var / cfg.downlink_power,
            a.a1,
            a.a2
        );
        println!("      intra/P {:.3}  inter/P {:.3}  an_leak {:.3}", m.intra / cfg.downlink_power, m.inter / cfg.downlink_power, m.an_leak);
    }
    let d = &point.diagnostics;
    println!(
        "sum secrecy {:.3} +/- {:.3} bits (asymptotic {:.3})",
        point.secrecy.sum_secrecy_bits, point.secrecy.sum_stderr, point.asymptotic.sum_rate_bits
    );
    println!(
        "|h_hat|^2 {:?}\ndesired alignment {:.4}, eavesdropper alignment {:.4}, layered {:.3}",
        d.h_hat_energy, d.desired_alignment, d.eve_alignment, d.layered_fraction
    );
    if let Some((m, r)) = &point.mfan {
        println!("MF-AN best phi {:.1}: sum secrecy {:.3} bits", m.phi(), r.sum_secrecy_bits);
    }
    println!("{} trials in {:.1}s", point.trials, point.wall_clock_s);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    run_example(trials)
}
