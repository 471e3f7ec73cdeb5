//! How much an eavesdropper learns about the two hidden "behind" bits at
//! different leak levels: nothing and the two captured transit atoms both
//! sit at the 1/4 chance level, while the full set of readouts is exactly
//! the receiver's own decoder.
//!
//! ```bash
//! cargo run -p cavity-stego --example secrecy_probe
//! ```

use cavity_stego::adversary::{secrecy_probe, EveLeak};
use cavity_stego::cavity::reference_gate;
use cavity_stego::codec::tables;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let gate = reference_gate();
    let mut rng = ChaCha12Rng::seed_from_u64(55);
    for leak in [
        EveLeak::Nothing,
        EveLeak::TransitAtoms,
        EveLeak::FullOutcomes,
    ] {
        let report = secrecy_probe(leak, 10_000, tables(), &gate, &mut rng);
        println!(
            "leak {:13} -> guessing success {:.4} over {} trials",
            report.leak, report.success_rate, report.trials
        );
    }
    println!();
    println!("chance level for two bits is 0.25; only the full readout set decodes.");
}
