//! Monte Carlo per-check error rates for the modeled attacks, next to their
//! analytic predictions.
//!
//! Covers intercept-resend on both lines (including the strict transit-only
//! collapse variant) and the unitary probe over a grid of flip
//! probabilities under computational-basis checks.
//!
//! ```bash
//! cargo run --release -p cavity-stego --example attack_rates
//! ```

use cavity_stego::adversary::{
    BasisPolicy, CollapseScope, EveModel, Line, ProbeParams, TargetLine,
};
use cavity_stego::harness::{cmd_attack, AttackSpec};
use cavity_stego::state::GhzFamily;

fn show(name: &str, spec: &AttackSpec) {
    let report = cmd_attack(spec);
    let empirical = report.results["empirical_rate"].as_f64().unwrap();
    let analytic = report.results["analytic_rate"].as_f64();
    match analytic {
        Some(p) => println!("{name:46} empirical {empirical:.4}  analytic {p:.4}"),
        None => println!("{name:46} empirical {empirical:.4}  (no closed form)"),
    }
}

fn main() {
    let trials = 50_000;
    let base = |model, line| AttackSpec {
        model,
        line,
        family: GhzFamily::SP,
        checks: BasisPolicy::RandomZX,
        trials,
        seed: 2024,
    };

    println!("intercept-resend, random checking bases, {trials} trials each:");
    show(
        "  D line, random basis",
        &base(
            EveModel::measure_resend(BasisPolicy::RandomZX, TargetLine::DLine),
            Line::D,
        ),
    );
    show(
        "  A line, fixed Z",
        &base(
            EveModel::measure_resend(BasisPolicy::FixedZ, TargetLine::ALine),
            Line::A,
        ),
    );
    show(
        "  A line, fixed X (whole-carrier collapse)",
        &base(
            EveModel::measure_resend(BasisPolicy::FixedX, TargetLine::ALine),
            Line::A,
        ),
    );
    show(
        "  A line, fixed X (transit-only collapse)",
        &base(
            EveModel::MeasureResend {
                basis_policy: BasisPolicy::FixedX,
                target: TargetLine::ALine,
                scope: CollapseScope::TransitOnly,
            },
            Line::A,
        ),
    );
    show(
        "  A line, random basis",
        &base(
            EveModel::measure_resend(BasisPolicy::RandomZX, TargetLine::ALine),
            Line::A,
        ),
    );

    println!();
    println!("unitary probe, Z-basis checks:");
    for beta_sq in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let mut spec = base(
            EveModel::Probe {
                params: ProbeParams::from_flip_probability(beta_sq).unwrap(),
                target: TargetLine::DLine,
            },
            Line::D,
        );
        spec.checks = BasisPolicy::FixedZ;
        show(&format!("  flip probability {beta_sq:.1}"), &spec);
    }

    println!();
    println!("unitary probe, mixed Z/X checks (estimated only):");
    for beta_sq in [0.1, 0.3, 0.5] {
        let spec = base(
            EveModel::Probe {
                params: ProbeParams::from_flip_probability(beta_sq).unwrap(),
                target: TargetLine::DLine,
            },
            Line::D,
        );
        show(&format!("  flip probability {beta_sq:.1}"), &spec);
    }
}
