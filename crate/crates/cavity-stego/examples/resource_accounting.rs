//! Resource accounting of a finished round: three communicated qubits, five
//! normal plus three auxiliary resource qubits, five Z readouts and one
//! entangled-basis readout move five secret bits and four information bits.
//!
//! ```bash
//! cargo run -p cavity-stego --example resource_accounting
//! ```

use cavity_stego::codec::Payload;
use cavity_stego::harness::{cmd_account, cmd_run};
use cavity_stego::protocol::RoundConfig;

fn main() {
    let config = RoundConfig::new(Payload::from_bits("10110").expect("five bits"), 12, 314);
    let (run_report, transcript) = cmd_run(&config).expect("valid configuration");
    print!("{}", run_report.to_human());
    println!();

    let report = cmd_account(&transcript);
    print!("{}", report.to_human());
}
