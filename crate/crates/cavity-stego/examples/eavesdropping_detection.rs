//! Protocol-level detection: with an intercept-resend attacker on the D
//! line, rounds abort at the first check with high probability, and the
//! abort probability grows with the checked fraction.
//!
//! ```bash
//! cargo run -p cavity-stego --example eavesdropping_detection
//! ```

use cavity_stego::adversary::{BasisPolicy, EveModel, TargetLine};
use cavity_stego::codec::Payload;
use cavity_stego::protocol::{run_round, InfoSpec, RoundConfig};

fn main() {
    let rounds = 200;
    println!("{rounds} rounds against an intercept-resend attacker on the D line:");
    for check_fraction in [0.1, 0.2, 0.4] {
        let mut aborted = 0;
        for seed in 0..rounds {
            let config = RoundConfig {
                n: 20,
                check_fraction,
                abort_threshold: 0.0,
                secret: Payload::from_bits("11100").expect("five bits"),
                info: InfoSpec::RandomWithPattern,
                seed,
                eve: EveModel::measure_resend(BasisPolicy::RandomZX, TargetLine::DLine),
            };
            if run_round(&config).expect("valid configuration").aborted() {
                aborted += 1;
            }
        }
        let checks = (check_fraction * 20.0).ceil() as u32;
        let predicted = 1.0 - 0.75f64.powi(checks as i32);
        println!(
            "  check fraction {check_fraction:.1} ({checks} checks/line): aborted {aborted}/{rounds}, predicted {:.2}",
            predicted
        );
    }
    println!();
    println!("per-check error rate is 1/4, so surviving k checks has probability (3/4)^k.");
}
