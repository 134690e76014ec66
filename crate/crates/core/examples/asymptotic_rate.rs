// Closed-form per-user SINR and rate of the proposed scheme as the array
// grows.
//
// ```bash
// cargo run --example asymptotic_rate
// ```

use secure_mimo::{asymptotic_rate, Result, Scenario};

pub fn run_example() -> Result<Vec<f64>> {
    println!("{:>5}  {:>8}  {:>8}  {:>7}  {:>9}", "Nt", "a1", "a2", "gamma", "sum bits");
    let mut sums = Vec::new();
    for nt in [32, 64, 128, 256, 512] {
        let cfg = Scenario {
            bs_antennas: nt,
            ..Scenario::default()
        }
        .build()
        .validate()?;
        let r = asymptotic_rate(&cfg);
        let u = &r.users[0];
        println!("{nt:>5}  {:>8.2}  {:>8.2}  {:>7.3}  {:>9.3}", u.a1, u.a2, u.gamma_bar, r.sum_rate_bits);
        sums.push(r.sum_rate_bits);
    }
    Ok(sums)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
