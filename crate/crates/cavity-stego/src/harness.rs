//! Command implementations behind the CLI: evolution verification, table
//! derivation and export, end-to-end rounds, Monte Carlo attack studies,
//! hiding statistics and resource accounting. Every command returns a
//! [`Report`] that serializes deterministically for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adversary::{analytic_error_rate, intercept, BasisPolicy, EveActivity, EveModel, Line};
use crate::cavity::{evolution_gate, reference_gate, CavityParams, TwoAtomGate};
use crate::codec::{collections_json, swap_table_csv, InfoGroup, Payload, Tables};
use crate::golden::{collection_diffs, compare_evolution, swap_table_diffs};
use crate::protocol::{check_passes, run_round, RoundConfig, Transcript};
use crate::state::{make_bell_on, make_ghz_on, q, BellKind, Code2, GhzFamily, GhzKind, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

/// Machine-readable result of one command invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub diffs: Vec<String>,
    pub status: Status,
}

impl Report {
    /// Builds a report, stamping the tool version into the inputs echo.
    /// Callers include the seed in effect in `inputs`.
    fn build(
        command: &str,
        mut inputs: Value,
        results: Value,
        diffs: Vec<String>,
        status: Status,
    ) -> Report {
        if let Value::Object(map) = &mut inputs {
            map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        }
        Report {
            command: command.into(),
            inputs,
            results,
            diffs,
            status,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{}: {}\n",
            self.command,
            match self.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Info => "INFO",
            }
        ));
        out.push_str(&format!(
            "inputs: {}\n",
            serde_json::to_string(&self.inputs).unwrap()
        ));
        out.push_str(&format!(
            "results: {}\n",
            serde_json::to_string_pretty(&self.results).unwrap()
        ));
        if !self.diffs.is_empty() {
            out.push_str("diffs:\n");
            for diff in &self.diffs {
                out.push_str(&format!("  - {diff}\n"));
            }
        }
        out
    }
}

/// Three binomial standard deviations around probability `p` over `n` draws.
pub fn three_sigma(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

/// 95% normal-approximation confidence interval for an empirical rate.
pub fn binomial_ci95(successes: u64, n: u64) -> (f64, f64) {
    let p = successes as f64 / n as f64;
    let half = 1.96 * (p * (1.0 - p) / n as f64).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

/// Verifies the cavity gate and the four closed-form evolutions: the gate
/// built from the Hamiltonians must match the closed-form gate up to a
/// global phase, and the pipeline outputs must match the golden states with
/// only the transcription's known defects reported as diffs.
pub fn cmd_verify_evolution(tol: f64, seed: u64) -> Report {
    verify_evolution_with(tol, &reference_gate(), seed)
}

/// Same checks with an arbitrary pipeline gate; used as a negative control.
pub fn verify_evolution_with(tol: f64, pipeline_gate: &TwoAtomGate, seed: u64) -> Report {
    let mut diffs = Vec::new();
    let mut pass = true;
    let mut results = serde_json::Map::new();

    let params = CavityParams::protocol_default();
    let evolved = evolution_gate(&params);
    let gate_ok = match &evolved {
        Ok(gate) => gate.equal_up_to_global_phase(&reference_gate(), 1e-9),
        Err(_) => false,
    };
    if !gate_ok {
        pass = false;
        diffs.push(
            "gate from the effective Hamiltonian does not match the closed-form gate".to_string(),
        );
    }
    results.insert(
        "gate_from_hamiltonian".into(),
        json!({
            "matches_reference_up_to_phase": gate_ok,
            "tolerance": 1e-9,
            "large_detuning": params.large_detuning(),
            "strong_driving": params.strong_driving(),
        }),
    );

    let tables = crate::codec::tables();
    let mut per_state = Vec::new();
    for bell in [
        BellKind::PsiMinus,
        BellKind::PsiPlus,
        BellKind::PhiMinus,
        BellKind::PhiPlus,
    ] {
        let derived = crate::cavity::pipeline(GhzKind::SMinus, bell, pipeline_gate);
        let cmp = compare_evolution(bell, &derived);
        let state_ok = cmp.max_common_deviation <= tol
            && if bell == BellKind::PsiMinus {
                cmp.is_clean()
            } else {
                true
            };
        // Terms carried by only one side are reported, never reconciled.
        for t in &cmp.golden_only {
            let assigned = tables.collection_code(*t);
            diffs.push(format!(
                "golden (S-, {bell}) state lists outcome {t}, which the derived \
                 partition assigns to collection {assigned}"
            ));
        }
        for t in &cmp.derived_only {
            diffs.push(format!(
                "derived (S-, {bell}) state carries outcome {t}, absent from the \
                 golden transcription"
            ));
        }
        if !state_ok {
            pass = false;
            diffs.push(format!(
                "(S-, {bell}) evolution deviates from the golden form by {:.3e} (tol {tol:.1e})",
                cmp.max_common_deviation
            ));
        }
        per_state.push(json!({
            "bell": bell.name(),
            "comparison": if cmp.exact { "exact" } else { "up-to-global-phase" },
            "max_common_deviation": cmp.max_common_deviation,
            "tolerance": tol,
            "golden_only_terms": cmp.golden_only.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            "derived_only_terms": cmp.derived_only.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            "pass": state_ok,
        }));
    }
    results.insert("evolutions".into(), Value::Array(per_state));

    Report::build(
        "verify-evolution",
        json!({ "tol": tol, "seed": seed }),
        Value::Object(results),
        diffs,
        if pass { Status::Pass } else { Status::Fail },
    )
}

/// Exported table files produced by `derive-table`.
#[derive(Debug, Clone)]
pub struct TableExport {
    pub swap_csv: String,
    pub collections_json: String,
}

/// Derives the code tables by brute force and optionally compares them
/// against the golden transcriptions.
pub fn cmd_derive_table(compare: bool, seed: u64) -> (Report, Option<TableExport>) {
    let tables = match Tables::derive(&reference_gate()) {
        Ok(t) => t,
        Err(e) => {
            return (
                Report::build(
                    "derive-table",
                    json!({ "compare": compare, "seed": seed }),
                    json!({ "error": e.to_string() }),
                    vec![],
                    Status::Fail,
                ),
                None,
            )
        }
    };

    let mut diffs = Vec::new();
    let mut pass = true;
    let mut results = serde_json::Map::new();
    results.insert(
        "partition".into(),
        json!({
            "codes": 4,
            "members_per_code": 8,
            "rows_and_columns_are_permutations": tables.swap.rows_and_columns_are_permutations(),
        }),
    );

    if compare {
        let table_diffs = swap_table_diffs(&tables.swap);
        for d in &table_diffs {
            diffs.push(format!(
                "swap cell ({}, {}): golden {} vs derived {}",
                d.ghz, d.bell, d.golden, d.derived
            ));
        }
        if !table_diffs.is_empty() {
            pass = false;
        }
        let coll_diffs = collection_diffs(&tables.collections);
        for d in &coll_diffs {
            let listed: Vec<&str> = d.golden_codes.iter().map(|c| c.as_str()).collect();
            diffs.push(format!(
                "outcome {} listed under golden collections [{}], derived to belong to {}",
                d.triple,
                listed.join(", "),
                d.derived_code
            ));
        }
        // The transcription is known to carry exactly one surplus listing.
        if coll_diffs.len() != 1 {
            pass = false;
        }
        results.insert(
            "compare".into(),
            json!({
                "swap_cells_checked": 32,
                "swap_cell_diffs": table_diffs.len(),
                "collection_diffs": coll_diffs.len(),
                "expected_collection_diffs": 1,
            }),
        );
    }

    let export = TableExport {
        swap_csv: swap_table_csv(&tables),
        collections_json: format!(
            "{}\n",
            serde_json::to_string_pretty(&collections_json(&tables)).unwrap()
        ),
    };
    results.insert(
        "export".into(),
        json!({
            "swap_csv_rows": export.swap_csv.lines().count() - 1,
            "collection_codes": 4,
        }),
    );

    (
        Report::build(
            "derive-table",
            json!({ "compare": compare, "seed": seed }),
            Value::Object(results),
            diffs,
            if pass { Status::Pass } else { Status::Fail },
        ),
        Some(export),
    )
}

/// Runs one protocol round and summarizes the transcript.
pub fn cmd_run(
    config: &RoundConfig,
) -> Result<(Report, Transcript), crate::protocol::ProtocolError> {
    let transcript = run_round(config)?;
    let decoded_ok = crate::protocol::decoding_is_exact(&transcript);
    let status = if transcript.aborted() {
        Status::Info
    } else if decoded_ok {
        Status::Pass
    } else {
        Status::Fail
    };
    let results = json!({
        "aborted": transcript.aborted(),
        "abort": transcript.abort,
        "m": transcript.m,
        "decoded_payload": transcript.decoded.as_ref().map(|d| d.payload.clone()),
        "decoded_info_at_m": transcript.decoded.as_ref().map(|d| d.info_at_m.clone()),
        "decoding_exact": decoded_ok,
        "d_line_error_rate": transcript.checks.d_line.as_ref().map(|c| c.error_rate),
        "a_line_error_rate": transcript.checks.a_line.as_ref().map(|c| c.error_rate),
    });
    let report = Report::build(
        "run",
        json!({
            "secret": config.secret.as_bits(),
            "n": config.n,
            "info": config.info.name(),
            "check_fraction": config.check_fraction,
            "abort_threshold": config.abort_threshold,
            "eve": config.eve.describe(),
            "seed": config.seed,
        }),
        results,
        vec![],
        status,
    );
    Ok((report, transcript))
}

/// One intercepted transmission followed by one eavesdropping check.
/// Returns true when the check fails (an error is observed).
pub fn attack_error_trial<R: Rng + ?Sized>(
    model: &EveModel,
    line: Line,
    family: GhzFamily,
    check_policy: BasisPolicy,
    rng: &mut R,
) -> bool {
    let mut activity = EveActivity::default();
    let basis = check_policy.pick(rng);
    match line {
        Line::D => {
            let d = q(Role::D, 1);
            let e = q(Role::E, 1);
            let state = make_bell_on(BellKind::PsiMinus, d, e);
            let state = intercept(model, line, d, &[e], &state, rng, &mut activity)
                .expect("validated adversary");
            let (alice, rest) = state.measure(d, basis, rng).expect("D present");
            let (bob, _) = rest.measure(e, basis, rng).expect("E present");
            !check_passes(line, family, basis, alice, &[bob])
        }
        Line::A => {
            let a = q(Role::A, 1);
            let b = q(Role::B, 1);
            let c = q(Role::C, 1);
            let state = make_ghz_on(family.reference(), a, b, c);
            let state = intercept(model, line, a, &[b, c], &state, rng, &mut activity)
                .expect("validated adversary");
            let (alice, rest) = state.measure(a, basis, rng).expect("A present");
            let (bob_b, rest) = rest.measure(b, basis, rng).expect("B present");
            let (bob_c, _) = rest.measure(c, basis, rng).expect("C present");
            !check_passes(line, family, basis, alice, &[bob_b, bob_c])
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttackSpec {
    pub model: EveModel,
    pub line: Line,
    pub family: GhzFamily,
    pub checks: BasisPolicy,
    pub trials: u32,
    pub seed: u64,
}

/// Monte Carlo estimate of the per-check error rate under an attack,
/// compared against the analytic prediction where one exists. The pass
/// criterion is the analytic rate lying within three binomial standard
/// deviations of the estimate (exact zero expected for a flip-free probe).
pub fn cmd_attack(spec: &AttackSpec) -> Report {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut errors = 0u64;
    for _ in 0..spec.trials {
        if attack_error_trial(&spec.model, spec.line, spec.family, spec.checks, &mut rng) {
            errors += 1;
        }
    }
    let n = spec.trials as u64;
    let empirical = errors as f64 / n as f64;
    let (lo, hi) = binomial_ci95(errors, n);
    let analytic = analytic_error_rate(&spec.model, spec.line, spec.checks).ok();

    let (status, tolerance) = match analytic {
        Some(p) => {
            if p == 0.0 {
                // A disturbance-free attack must produce literally no errors.
                let ok = errors == 0;
                (if ok { Status::Pass } else { Status::Fail }, Some(0.0))
            } else {
                let tol = three_sigma(p, n);
                let ok = (empirical - p).abs() <= tol;
                (if ok { Status::Pass } else { Status::Fail }, Some(tol))
            }
        }
        None => (Status::Info, None),
    };

    Report::build(
        "attack",
        json!({
            "model": spec.model.describe(),
            "line": spec.line.name(),
            "family": spec.family.name(),
            "checks": spec.checks.name(),
            "trials": spec.trials,
            "seed": spec.seed,
        }),
        json!({
            "errors": errors,
            "empirical_rate": empirical,
            "ci95": [lo, hi],
            "analytic_rate": analytic,
            "three_sigma": tolerance,
        }),
        vec![],
        status,
    )
}

/// The four information patterns consistent with a payload's family and
/// behind bits, in pair-code order.
pub fn consistent_patterns(tables: &Tables, family: GhzFamily, behind: Code2) -> [InfoGroup; 4] {
    let mut out = [InfoGroup::new(0); 4];
    for (slot, ghz) in family.kinds().iter().enumerate() {
        let bell = tables.swap.bell_for(*ghz, behind);
        out[slot] = InfoGroup::from_codes(ghz.code(), bell.code());
    }
    out
}

/// Hiding statistics over random secrets and uniformly random information:
/// each of the four consistent patterns should occur at 1/16 per position,
/// a quarter of all positions should be usable, and the smallest-index rule
/// yields the reported distribution of m.
pub fn cmd_stats_m(trials: u32, n: u32, seed: u64) -> Report {
    let tables = crate::codec::tables();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut slot_hits = [0u64; 4];
    let mut usable = 0u64;
    let mut m_histogram = vec![0u64; n as usize + 1];
    let mut no_valid = 0u64;
    let total_positions = trials as u64 * n as u64;

    for _ in 0..trials {
        let payload = Payload::new(rng.gen_range(0..32));
        let patterns = consistent_patterns(tables, payload.family(), payload.behind());
        let chosen = patterns[payload.pair().value() as usize];
        let groups: Vec<InfoGroup> = (0..n)
            .map(|_| InfoGroup::new(rng.gen_range(0..16)))
            .collect();
        for group in &groups {
            for (slot, pattern) in patterns.iter().enumerate() {
                if group == pattern {
                    slot_hits[slot] += 1;
                }
            }
            if patterns.contains(group) {
                usable += 1;
            }
        }
        // Smallest index carrying the plan's own pattern, with room for m+1.
        match groups[..n.saturating_sub(1) as usize]
            .iter()
            .position(|g| *g == chosen)
        {
            Some(i) => m_histogram[i + 1] += 1,
            None => no_valid += 1,
        }
    }

    let pattern_tol = three_sigma(1.0 / 16.0, total_positions);
    let usable_tol = three_sigma(0.25, total_positions);
    let freqs: Vec<f64> = slot_hits
        .iter()
        .map(|h| *h as f64 / total_positions as f64)
        .collect();
    let usable_fraction = usable as f64 / total_positions as f64;
    let hiding_impossible = n < 2;
    let mut pass = !hiding_impossible;
    for f in &freqs {
        if (f - 1.0 / 16.0).abs() > pattern_tol {
            pass = false;
        }
    }
    if (usable_fraction - 0.25).abs() > usable_tol {
        pass = false;
    }

    let histogram: Vec<Value> = m_histogram
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, count)| **count > 0)
        .map(|(m, count)| json!({ "m": m, "count": count }))
        .collect();

    Report::build(
        "stats-m",
        json!({ "trials": trials, "n": n, "seed": seed }),
        json!({
            "positions": total_positions,
            "pattern_frequencies": freqs,
            "expected_pattern_frequency": 1.0 / 16.0,
            "pattern_tolerance": pattern_tol,
            "usable_fraction": usable_fraction,
            "expected_usable_fraction": 0.25,
            "usable_tolerance": usable_tol,
            "m_histogram": histogram,
            "no_valid_position_fraction": no_valid as f64 / trials as f64,
            "hiding_impossible": hiding_impossible,
        }),
        vec![],
        if hiding_impossible {
            Status::Info
        } else if pass {
            Status::Pass
        } else {
            Status::Fail
        },
    )
}

/// Expected hiding-machinery figures for one successful round.
pub const EXPECTED_ACCOUNT: [(&str, u32); 8] = [
    ("qubits_communicated", 3),
    ("normal_resource_qubits", 5),
    ("auxiliary_qubits", 3),
    ("z_measurements", 5),
    ("ghz_measurements", 1),
    ("bell_measurements", 0),
    ("secret_bits", 5),
    ("info_bits", 4),
];

/// Recomputes the resource account from a transcript's hiding records and
/// asserts the fixed per-round figures.
pub fn cmd_account(transcript: &Transcript) -> Report {
    let inputs = json!({
        "transcript_version": transcript.version,
        "seed": transcript.config.seed,
    });
    if transcript.aborted() {
        return Report::build(
            "account",
            inputs,
            json!({
                "applicable": false,
                "abort_stage": transcript.abort.as_ref().map(|a| a.stage.clone()),
            }),
            vec![],
            Status::Info,
        );
    }

    let mut diffs = Vec::new();
    let (Some(decoded), Some(cavity), Some(triple), Some(hiding)) = (
        transcript.decoded.as_ref(),
        transcript.cavity.as_ref(),
        transcript.outcome_triple.as_ref(),
        transcript.resources.hiding.as_ref(),
    ) else {
        return Report::build(
            "account",
            inputs,
            json!({ "error": "transcript lacks hiding records" }),
            vec![],
            Status::Fail,
        );
    };

    // Recompute from the records themselves.
    let z_measurements = (triple.ad.len() + triple.be.len() + triple.c.len()) as u32;
    let ghz_measurements = 1u32; // the readout that produced decoded.ghz_at_m
    let communicated = {
        let m = transcript.m.expect("finished round");
        let expected = [format!("A{m}"), format!("A{}", m + 1), format!("D{m}")];
        let mut count = 0;
        for atom in cavity.first_pair.iter().chain(cavity.second_pair.iter()) {
            if expected.contains(atom) {
                count += 1;
            }
        }
        // A_m never enters a cavity; it is consumed by the entangled readout.
        count + 1
    };
    let recomputed = [
        ("qubits_communicated", communicated),
        ("normal_resource_qubits", 3 + 2),
        ("auxiliary_qubits", 3),
        ("z_measurements", z_measurements),
        ("ghz_measurements", ghz_measurements),
        ("bell_measurements", 0),
        ("secret_bits", decoded.payload.len() as u32),
        ("info_bits", decoded.info_at_m.len() as u32),
    ];

    let embedded = [
        ("qubits_communicated", hiding.qubits_communicated),
        ("normal_resource_qubits", hiding.normal_resource_qubits),
        ("auxiliary_qubits", hiding.auxiliary_qubits),
        ("z_measurements", hiding.z_measurements),
        ("ghz_measurements", hiding.ghz_measurements),
        ("bell_measurements", hiding.bell_measurements),
        ("secret_bits", hiding.secret_bits),
        ("info_bits", hiding.info_bits),
    ];

    let mut pass = true;
    for ((name, expected), (recomputed_pair, embedded_pair)) in EXPECTED_ACCOUNT
        .iter()
        .zip(recomputed.iter().zip(embedded.iter()))
    {
        if recomputed_pair.1 != *expected {
            pass = false;
            diffs.push(format!(
                "{name}: recomputed {} differs from the expected {expected}",
                recomputed_pair.1
            ));
        }
        if embedded_pair.1 != *expected {
            pass = false;
            diffs.push(format!(
                "{name}: transcript records {} instead of {expected}",
                embedded_pair.1
            ));
        }
    }

    let account: serde_json::Map<String, Value> = recomputed
        .iter()
        .map(|(name, v)| (name.to_string(), json!(v)))
        .collect();

    Report::build(
        "account",
        inputs,
        json!({
            "applicable": true,
            "account": account,
            "hidden_capacity_bits_per_round": 5,
            "capacity_notes": [
                "five hidden bits per round: five times the single-bit schemes",
                "1.25 times the four-bit swap-based scheme",
                "the eight-bit swap-based scheme reaches 1.6 times this capacity at a higher quantum cost",
            ],
        }),
        diffs,
        if pass { Status::Pass } else { Status::Fail },
    )
}
