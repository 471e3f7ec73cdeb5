//! Thin command-line front end over the library's harness commands.
//!
//! Exit codes: 0 pass, 1 assertion fail, 2 usage error, 3 protocol abort.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cavity_stego::adversary::{
    BasisPolicy, CollapseScope, EveModel, Line, ProbeParams, TargetLine,
};
use cavity_stego::codec::{InfoGroup, Payload};
use cavity_stego::harness::{
    cmd_account, cmd_attack, cmd_derive_table, cmd_run, cmd_stats_m, cmd_verify_evolution,
    AttackSpec, Report, Status,
};
use cavity_stego::protocol::{InfoSpec, RoundConfig, Transcript};
use cavity_stego::state::GhzFamily;

#[derive(Parser)]
#[command(
    name = "cavity-stego",
    about = "Simulator and analysis harness for a cavity-QED steganography protocol",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the cavity gate and the closed-form evolutions against the
    /// golden transcriptions.
    VerifyEvolution {
        /// Amplitude tolerance for the state comparisons.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Re-derive the code tables by brute force and export them.
    DeriveTable {
        /// Output format for the table written to --out.
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        /// Include a cell diff against the golden transcriptions.
        #[arg(long)]
        compare: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Execute one full hide/decode round and write its transcript.
    Run {
        /// Five payload bits, e.g. 11100.
        #[arg(long)]
        secret: String,
        /// Number of positions.
        #[arg(long, default_value_t = 16)]
        n: u32,
        /// "random", "random-with-pattern", or an explicit 4n-bit string.
        #[arg(long, default_value = "random-with-pattern")]
        info: String,
        /// Fraction of positions sampled per eavesdropping check.
        #[arg(long, default_value_t = 0.2)]
        check_fraction: f64,
        /// Maximum tolerated check error rate before aborting.
        #[arg(long, default_value_t = 0.0)]
        abort_threshold: f64,
        #[command(flatten)]
        eve: EveArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo per-check error rate of an attack, against the analytic
    /// prediction where one exists.
    Attack {
        #[arg(long, value_enum)]
        model: AttackModel,
        /// Basis policy of the eavesdropper (measure-resend only).
        #[arg(long, value_enum, default_value_t = BasisArg::Random)]
        eve_basis: BasisArg,
        /// Flip probability |beta|^2 of the probe.
        #[arg(long, default_value_t = 0.1)]
        beta_sq: f64,
        /// Which transmission is attacked.
        #[arg(long, value_enum, default_value_t = LineArg::D)]
        line: LineArg,
        /// Basis policy of the checking parties.
        #[arg(long, value_enum, default_value_t = BasisArg::Random)]
        checks: BasisArg,
        /// Prepared family on the A line.
        #[arg(long, value_enum, default_value_t = FamilyArg::Sp)]
        family: FamilyArg,
        /// Collapse model of a measure-resend intercept.
        #[arg(long, value_enum, default_value_t = CollapseArg::WholeCarrier)]
        collapse: CollapseArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Hiding-pattern statistics over random secrets and information.
    StatsM {
        #[arg(long, default_value_t = 2000)]
        trials: u32,
        #[arg(long, default_value_t = 64)]
        n: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Resource accounting of a recorded transcript.
    Account {
        /// Path to a transcript written by `run`.
        #[arg(long)]
        transcript: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Seed for every random draw the command makes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the command's file output (transcript or table).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the machine-readable report instead of the human rendering.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackModel {
    MeasureResend,
    Probe,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Random,
    Z,
    X,
}

impl BasisArg {
    fn policy(self) -> BasisPolicy {
        match self {
            BasisArg::Random => BasisPolicy::RandomZX,
            BasisArg::Z => BasisPolicy::FixedZ,
            BasisArg::X => BasisPolicy::FixedX,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LineArg {
    D,
    A,
    Both,
}

impl LineArg {
    fn target(self) -> TargetLine {
        match self {
            LineArg::D => TargetLine::DLine,
            LineArg::A => TargetLine::ALine,
            LineArg::Both => TargetLine::Both,
        }
    }

    fn line(self) -> Option<Line> {
        match self {
            LineArg::D => Some(Line::D),
            LineArg::A => Some(Line::A),
            LineArg::Both => None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Sp,
    Qr,
}

impl FamilyArg {
    fn family(self) -> GhzFamily {
        match self {
            FamilyArg::Sp => GhzFamily::SP,
            FamilyArg::Qr => GhzFamily::QR,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CollapseArg {
    WholeCarrier,
    TransitOnly,
}

impl CollapseArg {
    fn scope(self) -> CollapseScope {
        match self {
            CollapseArg::WholeCarrier => CollapseScope::WholeCarrier,
            CollapseArg::TransitOnly => CollapseScope::TransitOnly,
        }
    }
}

#[derive(Args)]
struct EveArgs {
    /// Adversary on the transit lines.
    #[arg(long, value_enum, default_value_t = EveArg::None)]
    eve: EveArg,
    /// Basis policy of a measure-resend adversary.
    #[arg(long, value_enum, default_value_t = BasisArg::Random)]
    eve_basis: BasisArg,
    /// Flip probability |beta|^2 of a probe adversary.
    #[arg(long, default_value_t = 0.1)]
    beta_sq: f64,
    /// Line the adversary attacks.
    #[arg(long, value_enum, default_value_t = LineArg::D)]
    line: LineArg,
    /// Collapse model of a measure-resend intercept.
    #[arg(long, value_enum, default_value_t = CollapseArg::WholeCarrier)]
    collapse: CollapseArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum EveArg {
    None,
    MeasureResend,
    Probe,
}

impl EveArgs {
    fn model(&self) -> Result<EveModel, String> {
        Ok(match self.eve {
            EveArg::None => EveModel::None,
            EveArg::MeasureResend => EveModel::MeasureResend {
                basis_policy: self.eve_basis.policy(),
                target: self.line.target(),
                scope: self.collapse.scope(),
            },
            EveArg::Probe => EveModel::Probe {
                params: ProbeParams::from_flip_probability(self.beta_sq)
                    .map_err(|e| e.to_string())?,
                target: self.line.target(),
            },
        })
    }
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ABORT: u8 = 3;

fn emit(report: &Report, common: &Common) {
    if common.json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.to_human());
    }
}

fn status_code(report: &Report) -> u8 {
    match report.status {
        Status::Pass | Status::Info => 0,
        Status::Fail => EXIT_FAIL,
    }
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::VerifyEvolution { tol, common } => {
            let report = cmd_verify_evolution(tol, common.seed);
            emit(&report, &common);
            ExitCode::from(status_code(&report))
        }
        Command::DeriveTable {
            format,
            compare,
            common,
        } => {
            let (report, export) = cmd_derive_table(compare, common.seed);
            if let (Some(export), Some(path)) = (&export, &common.out) {
                let payload = match format {
                    TableFormat::Csv => export.swap_csv.clone(),
                    TableFormat::Json => export.collections_json.clone(),
                };
                if let Err(e) = std::fs::write(path, payload) {
                    return usage_error(&format!("cannot write {}: {e}", path.display()));
                }
            }
            emit(&report, &common);
            ExitCode::from(status_code(&report))
        }
        Command::Run {
            secret,
            n,
            info,
            check_fraction,
            abort_threshold,
            eve,
            common,
        } => {
            let Some(secret) = Payload::from_bits(&secret) else {
                return usage_error("--secret must be five bits, e.g. 11100");
            };
            let info = match info.as_str() {
                "random" => InfoSpec::Random,
                "random-with-pattern" => InfoSpec::RandomWithPattern,
                bits => {
                    if bits.len() != 4 * n as usize {
                        return usage_error(&format!(
                            "--info must be 'random', 'random-with-pattern' or {} bits",
                            4 * n
                        ));
                    }
                    let mut groups = Vec::with_capacity(n as usize);
                    for i in 0..n as usize {
                        match InfoGroup::from_bits(&bits[i * 4..i * 4 + 4]) {
                            Some(g) => groups.push(g),
                            None => return usage_error("--info bits must be 0 or 1"),
                        }
                    }
                    InfoSpec::Explicit(groups)
                }
            };
            let eve = match eve.model() {
                Ok(model) => model,
                Err(e) => return usage_error(&e),
            };
            let config = RoundConfig {
                n,
                check_fraction,
                abort_threshold,
                secret,
                info,
                seed: common.seed,
                eve,
            };
            let (report, transcript) = match cmd_run(&config) {
                Ok(pair) => pair,
                Err(e) => return usage_error(&e.to_string()),
            };
            if let Some(path) = &common.out {
                if let Err(e) = std::fs::write(path, transcript.to_json()) {
                    return usage_error(&format!("cannot write {}: {e}", path.display()));
                }
            }
            emit(&report, &common);
            if transcript.aborted() {
                ExitCode::from(EXIT_ABORT)
            } else {
                ExitCode::from(status_code(&report))
            }
        }
        Command::Attack {
            model,
            eve_basis,
            beta_sq,
            line,
            checks,
            family,
            collapse,
            trials,
            common,
        } => {
            if trials == 0 {
                return usage_error("--trials must be at least 1");
            }
            let Some(attacked_line) = line.line() else {
                return usage_error("--line must be d or a for attack studies");
            };
            let model = match model {
                AttackModel::MeasureResend => EveModel::MeasureResend {
                    basis_policy: eve_basis.policy(),
                    target: line.target(),
                    scope: collapse.scope(),
                },
                AttackModel::Probe => match ProbeParams::from_flip_probability(beta_sq) {
                    Ok(params) => EveModel::Probe {
                        params,
                        target: line.target(),
                    },
                    Err(e) => return usage_error(&e.to_string()),
                },
            };
            let spec = AttackSpec {
                model,
                line: attacked_line,
                family: family.family(),
                checks: checks.policy(),
                trials,
                seed: common.seed,
            };
            let report = cmd_attack(&spec);
            emit(&report, &common);
            ExitCode::from(status_code(&report))
        }
        Command::StatsM { trials, n, common } => {
            if trials == 0 || n == 0 {
                return usage_error("--trials and --n must be at least 1");
            }
            let report = cmd_stats_m(trials, n, common.seed);
            emit(&report, &common);
            ExitCode::from(status_code(&report))
        }
        Command::Account { transcript, common } => {
            let raw = match std::fs::read_to_string(&transcript) {
                Ok(raw) => raw,
                Err(e) => {
                    return usage_error(&format!("cannot read {}: {e}", transcript.display()))
                }
            };
            let parsed = match Transcript::from_json(&raw) {
                Ok(parsed) => parsed,
                Err(e) => return usage_error(&format!("malformed transcript: {e}")),
            };
            let report = cmd_account(&parsed);
            emit(&report, &common);
            ExitCode::from(status_code(&report))
        }
    }
}
