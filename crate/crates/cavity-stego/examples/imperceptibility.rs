//! Hiding-pattern statistics: with uniformly random information bits, each
//! of the four consistent patterns occurs at 1/16 per position, a quarter
//! of all positions can hide the secret, and the smallest-index rule gives
//! a geometric-looking distribution of the hidden position m.
//!
//! ```bash
//! cargo run -p cavity-stego --example imperceptibility
//! ```

use cavity_stego::harness::cmd_stats_m;

fn main() {
    let report = cmd_stats_m(4000, 64, 99);
    print!("{}", report.to_human());
}
