//! Verify the cavity gate and the four closed-form evolutions.
//!
//! Builds the two-atom gate by exponentiating the driving and effective
//! Hamiltonians at the working point, checks it against the closed-form
//! gate, and compares the four entanglement-swapping evolutions against
//! their golden transcriptions. The two known transcription defects show up
//! as diffs.
//!
//! ```bash
//! cargo run -p cavity-stego --example evolution_verification
//! ```

use cavity_stego::cavity::{evolution_gate, reference_gate, CavityParams};
use cavity_stego::harness::cmd_verify_evolution;

fn main() {
    let params = CavityParams::protocol_default();
    println!(
        "working point: Omega*t = {:.6}, lambda*t = {:.6} (protocol point: {})",
        params.omega_rabi * params.t,
        params.lambda * params.t,
        params.is_protocol_point()
    );

    let gate = evolution_gate(&params).expect("valid parameters");
    println!(
        "gate from Hamiltonians matches the closed form up to a phase: {}",
        gate.equal_up_to_global_phase(&reference_gate(), 1e-9)
    );
    println!();

    let report = cmd_verify_evolution(1e-10, 0);
    print!("{}", report.to_human());
}
