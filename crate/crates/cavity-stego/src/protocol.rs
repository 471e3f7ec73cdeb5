//! One full hide/decode round between the two role state machines.
//!
//! The round follows the protocol's causal order: prepare all positions,
//! transmit the D atoms and check, transmit the A atoms and check, apply the
//! information unitaries (with the auxiliary copy at position m+1), return
//! the traveling atoms, then run the two cavity interactions and decode.
//! Everything an auditor needs is recorded in a [`Transcript`], which is a
//! pure function of the [`RoundConfig`]: the same seed always yields a
//! byte-identical transcript.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{intercept, EveActivity, EveModel, Line};
use crate::cavity::{reference_gate, TwoAtomGate};
use crate::codec::{
    choose_m, decode_payload, encode_payload, tables, CodecError, InfoGroup, OutcomeTriple,
    Payload, Tables,
};
use crate::state::{
    bell_basis_on, ghz_basis_on, hadamard, make_bell_on, make_ghz_on, pauli_gate, q, BellKind,
    GhzFamily, GhzKind, MeasBasis, QubitLabel, Role, StateVector,
};

pub const TRANSCRIPT_VERSION: &str = "cavity-stego-transcript/1";

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("invalid round configuration: {0}")]
    InvalidConfig(String),
}

/// Where the information bits of a round come from.
#[derive(Debug, Clone, PartialEq)]
pub enum InfoSpec {
    /// Uniformly random groups.
    Random,
    /// Uniformly random groups with the plan's pattern planted at a random
    /// eligible position, so a hiding position always exists.
    RandomWithPattern,
    /// Caller-supplied groups, one per position.
    Explicit(Vec<InfoGroup>),
}

impl InfoSpec {
    pub fn name(&self) -> &'static str {
        match self {
            InfoSpec::Random => "random",
            InfoSpec::RandomWithPattern => "random-with-pattern",
            InfoSpec::Explicit(_) => "explicit",
        }
    }
}

/// Full configuration of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundConfig {
    pub n: u32,
    pub check_fraction: f64,
    pub abort_threshold: f64,
    pub secret: Payload,
    pub info: InfoSpec,
    pub seed: u64,
    pub eve: EveModel,
}

impl RoundConfig {
    pub fn new(secret: Payload, n: u32, seed: u64) -> Self {
        RoundConfig {
            n,
            check_fraction: 0.2,
            abort_threshold: 0.0,
            secret,
            info: InfoSpec::RandomWithPattern,
            seed,
            eve: EveModel::None,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n < 2 {
            return Err(ProtocolError::InvalidConfig(format!(
                "need at least two positions, got {}",
                self.n
            )));
        }
        if !(self.check_fraction > 0.0 && self.check_fraction < 1.0) {
            return Err(ProtocolError::InvalidConfig(format!(
                "check fraction must lie in (0, 1), got {}",
                self.check_fraction
            )));
        }
        if !(0.0..1.0).contains(&self.abort_threshold) {
            return Err(ProtocolError::InvalidConfig(format!(
                "abort threshold must lie in [0, 1), got {}",
                self.abort_threshold
            )));
        }
        if let InfoSpec::Explicit(groups) = &self.info {
            if groups.len() != self.n as usize {
                return Err(ProtocolError::InvalidConfig(format!(
                    "{} info groups supplied for {} positions",
                    groups.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConfigEcho {
    pub n: u32,
    pub check_fraction: f64,
    pub abort_threshold: f64,
    pub secret: String,
    pub info: String,
    pub seed: u64,
    pub eve: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Prepared {
    pub family: String,
    pub ghz_kind: String,
    pub bell_kind: String,
    pub count: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlanEcho {
    pub ghz_target: String,
    pub bell_target: String,
    pub info_pattern: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SideMessage {
    pub channel: String,
    pub m: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckEvent {
    pub position: u32,
    pub basis: String,
    pub alice: String,
    pub bob: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckReport {
    pub line: String,
    pub sampled_positions: Vec<u32>,
    pub events: Vec<CheckEvent>,
    pub errors: u32,
    pub error_rate: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Checks {
    pub d_line: Option<CheckReport>,
    pub a_line: Option<CheckReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UnitaryRecord {
    pub position: u32,
    pub a_code: String,
    pub d_code: String,
    pub a_copied_from_m: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CavityRecord {
    pub first_pair: [String; 2],
    pub second_pair: [String; 2],
    pub hadamard: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutcomeRecord {
    pub ad: String,
    pub be: String,
    pub c: String,
}

impl OutcomeRecord {
    fn letter(bit: bool) -> char {
        if bit {
            'e'
        } else {
            'g'
        }
    }

    pub fn from_triple(triple: OutcomeTriple) -> Self {
        OutcomeRecord {
            ad: format!("{}{}", Self::letter(triple.ad.0), Self::letter(triple.ad.1)),
            be: format!("{}{}", Self::letter(triple.be.0), Self::letter(triple.be.1)),
            c: Self::letter(triple.c).to_string(),
        }
    }

    pub fn to_triple(&self) -> Option<OutcomeTriple> {
        let bit = |s: &str, i: usize| -> Option<bool> {
            match s.as_bytes().get(i) {
                Some(b'g') => Some(false),
                Some(b'e') => Some(true),
                _ => None,
            }
        };
        Some(OutcomeTriple {
            ad: (bit(&self.ad, 0)?, bit(&self.ad, 1)?),
            be: (bit(&self.be, 0)?, bit(&self.be, 1)?),
            c: bit(&self.c, 0)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DecodedPosition {
    pub position: u32,
    pub ghz_kind: String,
    pub bell_kind: String,
    pub a_bits: String,
    pub d_bits: String,
    /// True at position m+1, whose A triple only copies the hidden position.
    pub a_auxiliary: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Decoded {
    pub payload: String,
    pub behind: String,
    pub ghz_at_m: String,
    pub info_at_m: String,
    pub positions: Vec<DecodedPosition>,
}

/// Resource counts attributable to the hiding machinery of one round,
/// excluding preparation and the eavesdropping checks.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResourceAccount {
    pub qubits_communicated: u32,
    pub normal_resource_qubits: u32,
    pub auxiliary_qubits: u32,
    pub z_measurements: u32,
    pub ghz_measurements: u32,
    pub bell_measurements: u32,
    pub secret_bits: u32,
    pub info_bits: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResourceTotals {
    pub transits: u32,
    pub z_measurements: u32,
    pub x_measurements: u32,
    pub ghz_measurements: u32,
    pub bell_measurements: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Resources {
    pub totals: ResourceTotals,
    pub hiding: Option<ResourceAccount>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EveLogRecord {
    pub model: String,
    pub intercepts: u32,
    pub ancilla_bits: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Abort {
    pub stage: String,
    pub reason: String,
}

/// Complete auditable record of one round.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Transcript {
    pub version: String,
    pub config: ConfigEcho,
    pub prepared: Prepared,
    pub info_bits: String,
    pub plan: Option<PlanEcho>,
    pub m: Option<u32>,
    pub side_channel: Option<SideMessage>,
    pub checks: Checks,
    pub unitaries: Vec<UnitaryRecord>,
    pub cavity: Option<CavityRecord>,
    pub outcome_triple: Option<OutcomeRecord>,
    pub decoded: Option<Decoded>,
    pub resources: Resources,
    pub eve_log: EveLogRecord,
    pub abort: Option<Abort>,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("transcript serializes");
        out.push('\n');
        out
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }

    pub fn decoded_payload(&self) -> Option<Payload> {
        self.decoded
            .as_ref()
            .and_then(|d| Payload::from_bits(&d.payload))
    }
}

/// Evaluates one eavesdropping check: the joint outcome (Alice's first) must
/// lie in the measured-basis support of the ideal prepared state.
pub fn check_passes(
    line: Line,
    family: GhzFamily,
    basis: MeasBasis,
    alice: bool,
    bob: &[bool],
) -> bool {
    let mut joint = vec![alice];
    joint.extend_from_slice(bob);
    ideal_check_support(line, family, basis).contains(&joint)
}

/// Z- or X-basis support of the ideal transmitted state, derived by
/// expanding the state in the measured product basis. Outcome order is
/// (Alice's atom, Bob's atoms).
pub fn ideal_check_support(line: Line, family: GhzFamily, basis: MeasBasis) -> Vec<Vec<bool>> {
    let state = match line {
        Line::D => make_bell_on(BellKind::PsiMinus, q(Role::D, 1), q(Role::E, 1)),
        Line::A => make_ghz_on(
            family.reference(),
            q(Role::A, 1),
            q(Role::B, 1),
            q(Role::C, 1),
        ),
    };
    let state = match basis {
        MeasBasis::Z => state,
        MeasBasis::X => {
            let mut s = state;
            for label in s.register().to_vec() {
                s = s.apply(&hadamard(), &[label]).expect("label present");
            }
            s
        }
    };
    let n = state.qubit_count();
    state
        .support(1e-9)
        .into_iter()
        .map(|idx| (0..n).map(|k| idx >> (n - 1 - k) & 1 == 1).collect())
        .collect()
}

fn outcome_letter(basis: MeasBasis, bit: bool) -> String {
    match (basis, bit) {
        (MeasBasis::Z, false) => "g",
        (MeasBasis::Z, true) => "e",
        (MeasBasis::X, false) => "+",
        (MeasBasis::X, true) => "-",
    }
    .to_string()
}

/// Draws `k` distinct elements from `pool`, returned in ascending order.
fn sample_positions<R: Rng + ?Sized>(pool: &[u32], k: usize, rng: &mut R) -> Vec<u32> {
    let mut pool = pool.to_vec();
    let k = k.min(pool.len());
    for i in 0..k {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut picked = pool[..k].to_vec();
    picked.sort_unstable();
    picked
}

struct RoundState {
    ghz: BTreeMap<u32, StateVector>,
    bell: BTreeMap<u32, StateVector>,
    activity: EveActivity,
    totals: ResourceTotals,
}

impl RoundState {
    /// Measures out any probe ancillas Eve attached, logging the bits she
    /// stores. Statistically equivalent to Eve keeping them, and it keeps
    /// the per-position registers small.
    fn strip_ancillas<R: Rng + ?Sized>(
        state: StateVector,
        rng: &mut R,
        log: &mut String,
    ) -> StateVector {
        let mut state = state;
        while let Some(label) = state
            .register()
            .iter()
            .copied()
            .find(|l| l.role == Role::Probe)
        {
            let (bit, rest) = state
                .measure(label, MeasBasis::Z, rng)
                .expect("ancilla label present");
            log.push(if bit { '1' } else { '0' });
            state = rest;
        }
        state
    }
}

/// Executes one full round. Configuration errors are returned; protocol
/// aborts and position-selection failures are recorded in the transcript.
pub fn run_round(config: &RoundConfig) -> Result<Transcript, ProtocolError> {
    run_round_with(config, tables(), &reference_gate())
}

pub fn run_round_with(
    config: &RoundConfig,
    tables: &Tables,
    gate: &TwoAtomGate,
) -> Result<Transcript, ProtocolError> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let n = config.n;
    let family = config.secret.family();
    let plan = encode_payload(config.secret, tables);

    // Alice fixes her information bits (and therefore m) before anything
    // flies; the check samples steer around the hidden pair.
    let groups: Vec<InfoGroup> = match &config.info {
        InfoSpec::Explicit(groups) => groups.clone(),
        InfoSpec::Random => (0..n)
            .map(|_| InfoGroup::new(rng.gen_range(0..16)))
            .collect(),
        InfoSpec::RandomWithPattern => {
            let mut groups: Vec<InfoGroup> = (0..n)
                .map(|_| InfoGroup::new(rng.gen_range(0..16)))
                .collect();
            let slot = rng.gen_range(1..n);
            groups[slot as usize - 1] = plan.info_pattern();
            groups
        }
    };
    let info_bits: String = groups.iter().map(|g| g.as_bits()).collect();

    let mut transcript = Transcript {
        version: TRANSCRIPT_VERSION.to_string(),
        config: ConfigEcho {
            n,
            check_fraction: config.check_fraction,
            abort_threshold: config.abort_threshold,
            secret: config.secret.as_bits(),
            info: config.info.name().to_string(),
            seed: config.seed,
            eve: config.eve.describe(),
        },
        prepared: Prepared {
            family: family.name().to_string(),
            ghz_kind: family.reference().name().to_string(),
            bell_kind: BellKind::PsiMinus.name().to_string(),
            count: n,
        },
        info_bits,
        plan: Some(PlanEcho {
            ghz_target: plan.ghz_target.name().to_string(),
            bell_target: plan.bell_target.name().to_string(),
            info_pattern: plan.info_pattern().as_bits(),
        }),
        m: None,
        side_channel: None,
        checks: Checks {
            d_line: None,
            a_line: None,
        },
        unitaries: Vec::new(),
        cavity: None,
        outcome_triple: None,
        decoded: None,
        resources: Resources {
            totals: ResourceTotals {
                transits: 0,
                z_measurements: 0,
                x_measurements: 0,
                ghz_measurements: 0,
                bell_measurements: 0,
            },
            hiding: None,
        },
        eve_log: EveLogRecord {
            model: config.eve.describe(),
            intercepts: 0,
            ancilla_bits: String::new(),
        },
        abort: None,
    };

    let m = match choose_m(&groups, &plan) {
        Ok(m) => m,
        Err(CodecError::NoValidPosition) => {
            transcript.abort = Some(Abort {
                stage: "position-selection".to_string(),
                reason: "no position carries the plan's pattern with room for the copy".to_string(),
            });
            return Ok(transcript);
        }
        Err(other) => {
            return Err(ProtocolError::InvalidConfig(format!(
                "position selection failed: {other}"
            )))
        }
    };
    transcript.m = Some(m);
    transcript.side_channel = Some(SideMessage {
        channel: "authenticated-classical".to_string(),
        m,
    });

    // Check samples exclude m and m+1; both lines are drawn independently.
    let eligible: Vec<u32> = (1..=n).filter(|i| *i != m && *i != m + 1).collect();
    let per_line = (config.check_fraction * n as f64).ceil() as usize;
    let d_checks = sample_positions(&eligible, per_line, &mut rng);
    let a_checks = sample_positions(&eligible, per_line, &mut rng);
    let checked: BTreeSet<u32> = d_checks.iter().chain(a_checks.iter()).copied().collect();

    let mut state = RoundState {
        ghz: (1..=n)
            .map(|i| {
                (
                    i,
                    make_ghz_on(
                        family.reference(),
                        q(Role::A, i),
                        q(Role::B, i),
                        q(Role::C, i),
                    ),
                )
            })
            .collect(),
        bell: (1..=n)
            .map(|i| {
                (
                    i,
                    make_bell_on(BellKind::PsiMinus, q(Role::D, i), q(Role::E, i)),
                )
            })
            .collect(),
        activity: EveActivity::default(),
        totals: ResourceTotals {
            transits: 0,
            z_measurements: 0,
            x_measurements: 0,
            ghz_measurements: 0,
            bell_measurements: 0,
        },
    };

    let transit = |line: Line,
                   label: QubitLabel,
                   partners: &[QubitLabel],
                   joint: &StateVector,
                   rng: &mut ChaCha12Rng,
                   st: &mut RoundState,
                   ancilla_log: &mut String|
     -> StateVector {
        st.totals.transits += 1;
        let out = intercept(
            &config.eve,
            line,
            label,
            partners,
            joint,
            rng,
            &mut st.activity,
        )
        .expect("probe parameters were validated at construction");
        RoundState::strip_ancillas(out, rng, ancilla_log)
    };

    // D atoms fly to Alice, then both parties spend the sampled positions.
    let mut ancilla_log = String::new();
    for i in 1..=n {
        let joint = state.bell[&i].clone();
        let out = transit(
            Line::D,
            q(Role::D, i),
            &[q(Role::E, i)],
            &joint,
            &mut rng,
            &mut state,
            &mut ancilla_log,
        );
        state.bell.insert(i, out);
    }

    let run_check_line = |line: Line,
                          positions: &[u32],
                          rng: &mut ChaCha12Rng,
                          st: &mut RoundState|
     -> CheckReport {
        let mut events = Vec::new();
        let mut errors = 0u32;
        for &pos in positions {
            let basis = if rng.gen::<bool>() {
                MeasBasis::X
            } else {
                MeasBasis::Z
            };
            let (alice, bob_outcomes) = match line {
                Line::D => {
                    let s = st.bell.remove(&pos).expect("position not yet consumed");
                    let (alice, s) = s.measure(q(Role::D, pos), basis, rng).expect("D present");
                    let (bob, _) = s.measure(q(Role::E, pos), basis, rng).expect("E present");
                    (alice, vec![bob])
                }
                Line::A => {
                    let s = st.ghz.remove(&pos).expect("position not yet consumed");
                    let (alice, s) = s.measure(q(Role::A, pos), basis, rng).expect("A present");
                    let (b, s) = s.measure(q(Role::B, pos), basis, rng).expect("B present");
                    let (c, _) = s.measure(q(Role::C, pos), basis, rng).expect("C present");
                    (alice, vec![b, c])
                }
            };
            match basis {
                MeasBasis::Z => st.totals.z_measurements += 1 + bob_outcomes.len() as u32,
                MeasBasis::X => st.totals.x_measurements += 1 + bob_outcomes.len() as u32,
            }
            let pass = check_passes(line, family, basis, alice, &bob_outcomes);
            if !pass {
                errors += 1;
            }
            events.push(CheckEvent {
                position: pos,
                basis: basis.to_string(),
                alice: outcome_letter(basis, alice),
                bob: bob_outcomes
                    .iter()
                    .map(|b| outcome_letter(basis, *b))
                    .collect(),
                pass,
            });
        }
        let error_rate = if positions.is_empty() {
            0.0
        } else {
            errors as f64 / positions.len() as f64
        };
        CheckReport {
            line: line.name().to_string(),
            sampled_positions: positions.to_vec(),
            events,
            errors,
            error_rate,
            passed: error_rate <= config.abort_threshold,
        }
    };

    let d_report = run_check_line(Line::D, &d_checks, &mut rng, &mut state);
    let d_passed = d_report.passed;
    transcript.checks.d_line = Some(d_report);
    if !d_passed {
        transcript.abort = Some(Abort {
            stage: "d-line-check".to_string(),
            reason: "check error rate exceeded the abort threshold".to_string(),
        });
        finalize(&mut transcript, state, ancilla_log, config);
        return Ok(transcript);
    }

    // A atoms fly to Alice, second check round.
    for i in 1..=n {
        let joint = state.ghz[&i].clone();
        let out = transit(
            Line::A,
            q(Role::A, i),
            &[q(Role::B, i), q(Role::C, i)],
            &joint,
            &mut rng,
            &mut state,
            &mut ancilla_log,
        );
        state.ghz.insert(i, out);
    }
    let a_report = run_check_line(Line::A, &a_checks, &mut rng, &mut state);
    let a_passed = a_report.passed;
    transcript.checks.a_line = Some(a_report);
    if !a_passed {
        transcript.abort = Some(Abort {
            stage: "a-line-check".to_string(),
            reason: "check error rate exceeded the abort threshold".to_string(),
        });
        finalize(&mut transcript, state, ancilla_log, config);
        return Ok(transcript);
    }

    // Information unitaries at every surviving position; position m+1's A
    // atom copies the unitary used at m.
    let info_positions: Vec<u32> = (1..=n).filter(|i| !checked.contains(i)).collect();
    for &i in &info_positions {
        let group = groups[i as usize - 1];
        let copied = i == m + 1;
        let a_code = if copied {
            groups[m as usize - 1].a_code()
        } else {
            group.a_code()
        };
        let d_code = group.d_code();
        let ghz = state.ghz[&i]
            .apply(&pauli_gate(a_code), &[q(Role::A, i)])
            .expect("A atom present");
        state.ghz.insert(i, ghz);
        let bell = state.bell[&i]
            .apply(&pauli_gate(d_code), &[q(Role::D, i)])
            .expect("D atom present");
        state.bell.insert(i, bell);
        transcript.unitaries.push(UnitaryRecord {
            position: i,
            a_code: a_code.as_str().to_string(),
            d_code: d_code.as_str().to_string(),
            a_copied_from_m: copied,
        });
    }

    // Return flight of the traveling atoms, A group first.
    let mut hidden_transits = 0u32;
    for &i in &info_positions {
        let joint = state.ghz[&i].clone();
        let out = transit(
            Line::A,
            q(Role::A, i),
            &[q(Role::B, i), q(Role::C, i)],
            &joint,
            &mut rng,
            &mut state,
            &mut ancilla_log,
        );
        state.ghz.insert(i, out);
        if i == m || i == m + 1 {
            hidden_transits += 1;
        }
    }
    for &i in &info_positions {
        let joint = state.bell[&i].clone();
        let out = transit(
            Line::D,
            q(Role::D, i),
            &[q(Role::E, i)],
            &joint,
            &mut rng,
            &mut state,
            &mut ancilla_log,
        );
        state.bell.insert(i, out);
        if i == m {
            hidden_transits += 1;
        }
    }

    // Entanglement swapping in the two cavities, then the five Z readouts.
    let a_next = q(Role::A, m + 1);
    let b_next = q(Role::B, m + 1);
    let c_next = q(Role::C, m + 1);
    let d_m = q(Role::D, m);
    let e_m = q(Role::E, m);
    let ghz_next = state
        .ghz
        .remove(&(m + 1))
        .expect("auxiliary position intact");
    let bell_m = state.bell.remove(&m).expect("hidden position intact");
    let joint = ghz_next.tensor(&bell_m).expect("disjoint registers");
    let joint = joint
        .apply(gate.unitary(), &[a_next, d_m])
        .expect("pair present");
    let joint = joint
        .apply(gate.unitary(), &[b_next, e_m])
        .expect("pair present");
    let joint = joint.apply(&hadamard(), &[c_next]).expect("C present");
    transcript.cavity = Some(CavityRecord {
        first_pair: [a_next.to_string(), d_m.to_string()],
        second_pair: [b_next.to_string(), e_m.to_string()],
        hadamard: c_next.to_string(),
    });

    let (bit_a, joint) = joint
        .measure(a_next, MeasBasis::Z, &mut rng)
        .expect("present");
    let (bit_d, joint) = joint.measure(d_m, MeasBasis::Z, &mut rng).expect("present");
    let (bit_b, joint) = joint
        .measure(b_next, MeasBasis::Z, &mut rng)
        .expect("present");
    let (bit_e, joint) = joint.measure(e_m, MeasBasis::Z, &mut rng).expect("present");
    let (bit_c, _) = joint
        .measure(c_next, MeasBasis::Z, &mut rng)
        .expect("present");
    state.totals.z_measurements += 5;
    let triple = OutcomeTriple {
        ad: (bit_a, bit_d),
        be: (bit_b, bit_e),
        c: bit_c,
    };
    transcript.outcome_triple = Some(OutcomeRecord::from_triple(triple));
    let behind = tables.collection_code(triple);

    // The entangled-basis readout at m recovers the hidden pair.
    let ghz_m = state.ghz.remove(&m).expect("hidden position intact");
    let basis = ghz_basis_on(q(Role::A, m), q(Role::B, m), q(Role::C, m));
    let (kind_idx, _) = ghz_m
        .measure_in_state_basis(
            &[q(Role::A, m), q(Role::B, m), q(Role::C, m)],
            &basis,
            &mut rng,
        )
        .expect("GHZ basis is orthonormal");
    let ghz_at_m = GhzKind::ALL[kind_idx];
    state.totals.ghz_measurements += 1;
    let (decoded_payload, info_at_m) = decode_payload(ghz_at_m, behind, tables);

    // Remaining positions decode as ordinary dense-coded pairs.
    let mut positions = Vec::new();
    for &i in &info_positions {
        if i == m {
            continue;
        }
        let (ghz_name, a_bits, auxiliary) = if i == m + 1 {
            // Consumed in the cavities; its content is the copy of position m.
            (ghz_at_m.name().to_string(), ghz_at_m.code(), true)
        } else {
            let s = state.ghz.remove(&i).expect("normal position intact");
            let basis = ghz_basis_on(q(Role::A, i), q(Role::B, i), q(Role::C, i));
            let (idx, _) = s
                .measure_in_state_basis(
                    &[q(Role::A, i), q(Role::B, i), q(Role::C, i)],
                    &basis,
                    &mut rng,
                )
                .expect("GHZ basis is orthonormal");
            state.totals.ghz_measurements += 1;
            let kind = GhzKind::ALL[idx];
            (kind.name().to_string(), kind.code(), false)
        };
        let s = state.bell.remove(&i).expect("bell pair intact");
        let basis = bell_basis_on(q(Role::D, i), q(Role::E, i));
        let (idx, _) = s
            .measure_in_state_basis(&[q(Role::D, i), q(Role::E, i)], &basis, &mut rng)
            .expect("Bell basis is orthonormal");
        state.totals.bell_measurements += 1;
        let bell_kind = BellKind::ALL[idx];
        positions.push(DecodedPosition {
            position: i,
            ghz_kind: ghz_name,
            bell_kind: bell_kind.name().to_string(),
            a_bits: a_bits.as_str().to_string(),
            d_bits: bell_kind.code().as_str().to_string(),
            a_auxiliary: auxiliary,
        });
    }

    transcript.decoded = Some(Decoded {
        payload: decoded_payload.as_bits(),
        behind: behind.as_str().to_string(),
        ghz_at_m: ghz_at_m.name().to_string(),
        info_at_m: info_at_m.as_bits(),
        positions,
    });
    transcript.resources.hiding = Some(ResourceAccount {
        qubits_communicated: hidden_transits,
        normal_resource_qubits: 5,
        auxiliary_qubits: 3,
        z_measurements: 5,
        ghz_measurements: 1,
        bell_measurements: 0,
        secret_bits: 5,
        info_bits: 4,
    });

    finalize(&mut transcript, state, ancilla_log, config);
    Ok(transcript)
}

fn finalize(
    transcript: &mut Transcript,
    state: RoundState,
    ancilla_log: String,
    config: &RoundConfig,
) {
    transcript.resources.totals = state.totals;
    transcript.eve_log = EveLogRecord {
        model: config.eve.describe(),
        intercepts: state.activity.intercepts,
        ancilla_bits: ancilla_log,
    };
}

/// Groups sent by Alice, keyed by position, reconstructed from a transcript.
/// Position m+1's A half is the copied code, not the information bits.
pub fn sent_info_groups(transcript: &Transcript) -> Vec<(u32, InfoGroup)> {
    let n = transcript.config.n as usize;
    let bits = &transcript.info_bits;
    (1..=n)
        .map(|i| {
            let s = &bits[(i - 1) * 4..i * 4];
            (i as u32, InfoGroup::from_bits(s).expect("transcript bits"))
        })
        .collect()
}

/// Checks a finished no-abort transcript for full decoding correctness:
/// the payload, the group at m, the D half at m+1 and every normal group.
pub fn decoding_is_exact(transcript: &Transcript) -> bool {
    let Some(decoded) = &transcript.decoded else {
        return false;
    };
    if decoded.payload != transcript.config.secret {
        return false;
    }
    let groups = sent_info_groups(transcript);
    let m = transcript.m.expect("finished round has m");
    let group_at = |i: u32| groups[i as usize - 1].1;
    if decoded.info_at_m != group_at(m).as_bits() {
        return false;
    }
    for pos in &decoded.positions {
        let sent = group_at(pos.position);
        if pos.d_bits != sent.d_code().as_str() {
            return false;
        }
        if pos.a_auxiliary {
            // The copied content must equal the A half at m.
            if pos.a_bits != group_at(m).a_code().as_str() {
                return false;
            }
        } else if pos.a_bits != sent.a_code().as_str() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{BasisPolicy, TargetLine};

    fn explicit_groups(bits: &[&str]) -> InfoSpec {
        InfoSpec::Explicit(
            bits.iter()
                .map(|b| InfoGroup::from_bits(b).unwrap())
                .collect(),
        )
    }

    #[test]
    fn config_validation() {
        let mut config = RoundConfig::new(Payload::from_bits("11100").unwrap(), 1, 0);
        assert!(config.validate().is_err());
        config.n = 8;
        assert!(config.validate().is_ok());
        config.check_fraction = 1.0;
        assert!(config.validate().is_err());
        config.check_fraction = 0.2;
        config.info = explicit_groups(&["0000"]);
        assert!(config.validate().is_err());
    }

    #[test]
    fn ideal_check_supports_match_hand_rules() {
        // Singlet: opposite outcomes in both bases.
        for basis in [MeasBasis::Z, MeasBasis::X] {
            let support = ideal_check_support(Line::D, GhzFamily::SP, basis);
            assert_eq!(support.len(), 2);
            for joint in support {
                assert_ne!(joint[0], joint[1]);
            }
        }
        // SP reference in Z: A opposite to B, B equal to C.
        let support = ideal_check_support(Line::A, GhzFamily::SP, MeasBasis::Z);
        assert_eq!(support.len(), 2);
        for joint in &support {
            assert_ne!(joint[0], joint[1]);
            assert_eq!(joint[1], joint[2]);
        }
        // QR reference in Z: A equal to B, B opposite to C.
        let support = ideal_check_support(Line::A, GhzFamily::QR, MeasBasis::Z);
        for joint in &support {
            assert_eq!(joint[0], joint[1]);
            assert_ne!(joint[1], joint[2]);
        }
        // X basis: both families pass exactly on an odd number of minuses.
        for family in [GhzFamily::SP, GhzFamily::QR] {
            let support = ideal_check_support(Line::A, family, MeasBasis::X);
            assert_eq!(support.len(), 4);
            for joint in support {
                let minuses = joint.iter().filter(|b| **b).count();
                assert_eq!(minuses % 2, 1);
            }
        }
    }

    #[test]
    fn worked_example_round_decodes_the_secret() {
        // Secret group 111 with the pattern planted at position 3.
        let mut groups = vec![
            "0000", "0110", "1100", "0001", "1010", "0111", "0010", "1111",
        ];
        groups[2] = "1100";
        let config = RoundConfig {
            n: 8,
            check_fraction: 0.2,
            abort_threshold: 0.0,
            secret: Payload::from_bits("11100").unwrap(),
            info: explicit_groups(&groups),
            seed: 13,
            eve: EveModel::None,
        };
        let transcript = run_round(&config).unwrap();
        assert!(!transcript.aborted());
        assert_eq!(transcript.m, Some(3));
        let decoded = transcript.decoded.as_ref().unwrap();
        assert_eq!(decoded.payload, "11100");
        assert_eq!(decoded.ghz_at_m, "S+");
        assert_eq!(decoded.info_at_m, "1100");
        assert!(decoding_is_exact(&transcript));
    }

    #[test]
    fn no_eve_round_has_zero_check_errors() {
        for seed in 0..8 {
            let config = RoundConfig::new(Payload::new(seed as u8 % 32), 10, seed);
            let transcript = run_round(&config).unwrap();
            assert!(!transcript.aborted(), "seed {seed}");
            for report in [
                transcript.checks.d_line.as_ref().unwrap(),
                transcript.checks.a_line.as_ref().unwrap(),
            ] {
                assert_eq!(report.errors, 0);
                assert!(report.events.iter().all(|e| e.pass));
            }
            assert!(decoding_is_exact(&transcript), "seed {seed}");
        }
    }

    #[test]
    fn same_seed_gives_identical_transcripts() {
        let config = RoundConfig::new(Payload::from_bits("01011").unwrap(), 12, 99);
        let one = run_round(&config).unwrap();
        let two = run_round(&config).unwrap();
        assert_eq!(one, two);
        assert_eq!(one.to_json(), two.to_json());
    }

    #[test]
    fn missing_pattern_is_recorded_not_thrown() {
        let config = RoundConfig {
            n: 4,
            check_fraction: 0.2,
            abort_threshold: 0.0,
            secret: Payload::from_bits("11100").unwrap(),
            info: explicit_groups(&["0000", "0000", "0000", "0000"]),
            seed: 5,
            eve: EveModel::None,
        };
        let transcript = run_round(&config).unwrap();
        assert!(transcript.aborted());
        assert_eq!(
            transcript.abort.as_ref().unwrap().stage,
            "position-selection"
        );
        assert!(transcript.decoded.is_none());
        assert!(transcript.resources.hiding.is_none());
    }

    #[test]
    fn pattern_at_final_position_only_cannot_hide() {
        let config = RoundConfig {
            n: 3,
            check_fraction: 0.2,
            abort_threshold: 0.0,
            secret: Payload::from_bits("11100").unwrap(),
            info: explicit_groups(&["0000", "0000", "1100"]),
            seed: 5,
            eve: EveModel::None,
        };
        let transcript = run_round(&config).unwrap();
        assert_eq!(
            transcript.abort.as_ref().unwrap().stage,
            "position-selection"
        );
    }

    #[test]
    fn measure_resend_on_d_line_aborts_with_high_probability() {
        let mut aborted = 0;
        let runs = 40;
        for seed in 0..runs {
            let mut config = RoundConfig::new(Payload::from_bits("11100").unwrap(), 20, seed);
            config.check_fraction = 0.4;
            config.eve = EveModel::measure_resend(BasisPolicy::RandomZX, TargetLine::DLine);
            let transcript = run_round(&config).unwrap();
            if transcript.aborted() {
                assert_eq!(transcript.abort.as_ref().unwrap().stage, "d-line-check");
                aborted += 1;
            }
        }
        // Eight checked positions at a 25% per-check error rate: aborting is
        // overwhelmingly likely (p_survive = 0.75^8, about 10%).
        assert!(aborted > runs * 3 / 4, "aborted only {aborted}/{runs}");
    }

    #[test]
    fn hiding_resources_match_the_fixed_account() {
        let config = RoundConfig::new(Payload::from_bits("10101").unwrap(), 9, 4242);
        let transcript = run_round(&config).unwrap();
        let hiding = transcript.resources.hiding.as_ref().unwrap();
        assert_eq!(hiding.qubits_communicated, 3);
        assert_eq!(hiding.normal_resource_qubits, 5);
        assert_eq!(hiding.auxiliary_qubits, 3);
        assert_eq!(hiding.z_measurements, 5);
        assert_eq!(hiding.ghz_measurements, 1);
        assert_eq!(hiding.bell_measurements, 0);
        assert_eq!(hiding.secret_bits, 5);
        assert_eq!(hiding.info_bits, 4);
    }

    #[test]
    fn transcript_round_trips_through_json() {
        let config = RoundConfig::new(Payload::from_bits("00110").unwrap(), 6, 77);
        let transcript = run_round(&config).unwrap();
        let json = transcript.to_json();
        let parsed = Transcript::from_json(&json).unwrap();
        assert_eq!(parsed, transcript);
    }

    // The smallest legal round: two positions, the hidden pair at 1 and its
    // copy at 2, no room left for checks.
    #[test]
    fn minimal_two_position_round() {
        let config = RoundConfig::new(Payload::from_bits("11100").unwrap(), 2, 8);
        let transcript = run_round(&config).unwrap();
        assert!(!transcript.aborted());
        assert_eq!(transcript.m, Some(1));
        assert_eq!(transcript.prepared.count, 2);
        for report in [
            transcript.checks.d_line.as_ref().unwrap(),
            transcript.checks.a_line.as_ref().unwrap(),
        ] {
            assert!(report.sampled_positions.is_empty());
        }
        assert!(decoding_is_exact(&transcript));
    }

    // All-zero information leaves every normal position in the prepared
    // reference pair.
    #[test]
    fn zero_info_keeps_reference_kinds_at_normal_positions() {
        let mut groups = vec!["0000"; 8];
        groups[3] = "1100";
        let config = RoundConfig {
            n: 8,
            check_fraction: 0.2,
            abort_threshold: 0.0,
            secret: Payload::from_bits("11100").unwrap(),
            info: explicit_groups(&groups),
            seed: 2,
            eve: EveModel::None,
        };
        let transcript = run_round(&config).unwrap();
        assert_eq!(transcript.m, Some(4));
        let decoded = transcript.decoded.as_ref().unwrap();
        for pos in &decoded.positions {
            if pos.a_auxiliary {
                continue;
            }
            assert_eq!(pos.ghz_kind, "S-", "position {}", pos.position);
            assert_eq!(pos.bell_kind, "psi-", "position {}", pos.position);
        }
    }

    #[test]
    fn qr_family_round_decodes_too() {
        // Family bit 0 prepares the Q- reference.
        let config = RoundConfig::new(Payload::from_bits("01101").unwrap(), 8, 31);
        let transcript = run_round(&config).unwrap();
        assert_eq!(transcript.prepared.ghz_kind, "Q-");
        assert!(!transcript.aborted());
        assert!(decoding_is_exact(&transcript));
    }
}
