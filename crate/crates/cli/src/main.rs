//! Command-line harness for the transfinite register machine simulator:
//! assemble and run programs, recognize oracles, compute bit prefixes, and
//! apply the compiler passes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use trm_core::engine::{Budget, Engine, RunOutcome, RunReport};
use trm_core::isa::{format_asm, has_errors, parse_asm, validate, Program};
use trm_core::oracle::OracleSpec;
use trm_core::ordinal::Ordinal;
use trm_core::transforms::{
    compile_resetting_to_unresetting, compile_wplus1_to_itrm, instrument_limit_flags,
    instrument_overflow_detection, library_program, make_recognizer, TransformReport,
};
use trm_core::vm::{parse_bound, LimitPolicy, MachineSpec};

const EXIT_HALTED: u8 = 0;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;
const EXIT_DIVERGES: u8 = 10;
const EXIT_OVERFLOW: u8 = 11;
const EXIT_BUDGET: u8 = 12;
const EXIT_CLASSICAL_LIMIT: u8 = 13;

#[derive(Parser)]
#[command(
    name = "trm",
    about = "Transfinite register machine simulator",
    long_about = "Runs α-register machine programs through transfinite time with sound \
                  limit acceleration, recognizes oracles, computes bit prefixes, and \
                  applies machine-to-machine compilation passes."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program and report the outcome.
    ///
    /// Exit codes: 0 halted, 10 certified divergence, 11 overflow
    /// (undefined), 12 budget exhausted, 13 classical limit reached,
    /// 2 usage or parse error.
    Run {
        /// Program file (assembly), or the name of a library program.
        program: String,
        #[command(flatten)]
        machine: MachineArgs,
        /// Input ordinal placed in R0.
        #[arg(long, default_value = "0")]
        input: String,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Write the recorded trace as JSON lines to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_parser = ["human", "json"], default_value = "human")]
        format: String,
    },
    /// Run a program against several oracles and report which are accepted.
    Recognize {
        /// Program file or library name.
        program: String,
        /// Oracle files or inline JSON specs (at least one).
        oracles: Vec<String>,
        #[command(flatten)]
        machine: MachineArgs,
        /// Input ordinal placed in R0 for every run.
        #[arg(long, default_value = "0")]
        input: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_parser = ["human", "json"], default_value = "human")]
        format: String,
    },
    /// Compute the first n bits of the real a program computes.
    Compute {
        /// Program file or library name.
        program: String,
        /// Number of bits to compute.
        #[arg(long, default_value_t = 8)]
        bits: u64,
        #[command(flatten)]
        machine: MachineArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Apply a compilation pass and write the output program and report.
    Transform {
        /// Pass name: make_recognizer | compile_wplus1_to_itrm |
        /// compile_resetting_to_unresetting | instrument_limit_flags |
        /// instrument_overflow_detection.
        pass: String,
        /// Input program files or library names (pass-dependent arity).
        inputs: Vec<String>,
        /// Output path for the transformed assembly; the JSON report goes
        /// to the same path with ".report.json" appended.
        #[arg(short, long)]
        out: PathBuf,
        /// Watched register for instrument_overflow_detection.
        #[arg(long)]
        watched: Option<usize>,
    },
}

#[derive(Args)]
struct MachineArgs {
    /// Limit policy.
    #[arg(long, value_parser = ["classical", "unresetting", "resetting"],
          default_value = "resetting")]
    policy: String,
    /// Register bound: an ordinal like "w" or "w+1", or "unbounded".
    #[arg(long, default_value = "w")]
    bound: String,
    /// Oracle file or inline JSON (e.g. '{"type":"finite","members":[3]}').
    #[arg(long)]
    oracle: Option<String>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Maximum number of successor steps.
    #[arg(long, default_value_t = 100_000)]
    budget_steps: u64,
    /// Maximum nesting of limit accelerations.
    #[arg(long, default_value_t = 3)]
    limit_depth: u32,
    /// Clock ceiling (ordinal).
    #[arg(long, default_value = "w^(3)")]
    max_clock: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run {
            program,
            machine,
            input,
            budget,
            trace,
            format,
        } => cmd_run(&program, &machine, &input, &budget, trace.as_deref(), &format),
        Command::Recognize {
            program,
            oracles,
            machine,
            input,
            budget,
            format,
        } => cmd_recognize(&program, &oracles, &machine, &input, &budget, &format),
        Command::Compute {
            program,
            bits,
            machine,
            budget,
        } => cmd_compute(&program, bits, &machine, &budget),
        Command::Transform {
            pass,
            inputs,
            out,
            watched,
        } => cmd_transform(&pass, &inputs, &out, watched),
    }
}

fn load_program(name_or_path: &str) -> Result<Program> {
    if let Ok(p) = library_program(name_or_path) {
        return Ok(p);
    }
    let path = Path::new(name_or_path);
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read program '{name_or_path}'"))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "program".to_string());
    let p = parse_asm(name, &text).map_err(|e| anyhow!("{name_or_path}: {e}"))?;
    let diags = validate(&p);
    if has_errors(&diags) {
        bail!("{name_or_path}: {}", diags[0].message);
    }
    Ok(p)
}

fn load_oracle(spec: Option<&str>) -> Result<OracleSpec> {
    let Some(spec) = spec else {
        return Ok(OracleSpec::AllZero);
    };
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        fs::read_to_string(spec).with_context(|| format!("cannot read oracle '{spec}'"))?
    };
    let oracle: OracleSpec =
        serde_json::from_str(&text).with_context(|| format!("bad oracle spec '{spec}'"))?;
    oracle.check().map_err(|e| anyhow!("oracle '{spec}': {e}"))?;
    Ok(oracle)
}

fn machine_spec(args: &MachineArgs) -> Result<MachineSpec> {
    let policy = match args.policy.as_str() {
        "classical" => LimitPolicy::Classical,
        "unresetting" => LimitPolicy::Unresetting,
        "resetting" => LimitPolicy::Resetting,
        other => bail!("unknown policy '{other}'"),
    };
    let bound = parse_bound(&args.bound).map_err(|e| anyhow!("bad bound: {e}"))?;
    MachineSpec::new(bound, policy).map_err(|e| anyhow!("{e}"))
}

fn make_budget(args: &BudgetArgs) -> Result<Budget> {
    let max_clock: Ordinal = args
        .max_clock
        .parse()
        .map_err(|e| anyhow!("bad max clock: {e}"))?;
    Ok(Budget::default()
        .with_steps(args.budget_steps)
        .with_limit_depth(args.limit_depth)
        .with_max_clock(max_clock))
}

fn outcome_exit_code(outcome: &RunOutcome) -> u8 {
    match outcome {
        RunOutcome::Halted { .. } => EXIT_HALTED,
        RunOutcome::Diverges { .. } => EXIT_DIVERGES,
        RunOutcome::OverflowUndefined { .. } => EXIT_OVERFLOW,
        RunOutcome::BudgetExhausted { .. } => EXIT_BUDGET,
        RunOutcome::ClassicalLimitReached { .. } => EXIT_CLASSICAL_LIMIT,
    }
}

fn describe_outcome(outcome: &RunOutcome) -> String {
    match outcome {
        RunOutcome::Halted { output, clock } => {
            format!("halted with output {output} at clock {clock}")
        }
        RunOutcome::Diverges { certificate } => format!(
            "diverges: strong loop, state at clock {} recurs at clock {} \
             dominating it throughout",
            certificate.sigma_clock, certificate.tau_clock
        ),
        RunOutcome::OverflowUndefined { register, clock } => format!(
            "undefined: register {register} reached the bound at clock {clock}"
        ),
        RunOutcome::ClassicalLimitReached { clock } => format!(
            "undefined: classical machine reached the limit time {clock}"
        ),
        RunOutcome::BudgetExhausted { reason } => format!("budget exhausted: {reason}"),
    }
}

fn cmd_run(
    program: &str,
    machine: &MachineArgs,
    input: &str,
    budget: &BudgetArgs,
    trace: Option<&Path>,
    format: &str,
) -> Result<u8> {
    let p = load_program(program)?;
    let spec = machine_spec(machine)?;
    let oracle = load_oracle(machine.oracle.as_deref())?;
    let input: Ordinal = input.parse().map_err(|e| anyhow!("bad input: {e}"))?;
    let budget = make_budget(budget)?;
    let engine = Engine::new(&spec, &p, &oracle);
    let report = engine.run(&input, &budget).map_err(|e| anyhow!("{e}"))?;
    if let Some(path) = trace {
        fs::write(path, report.trace_jsonl())
            .with_context(|| format!("cannot write trace to {}", path.display()))?;
    }
    print_report(&p, &report, format)?;
    Ok(outcome_exit_code(&report.outcome))
}

fn print_report(p: &Program, report: &RunReport, format: &str) -> Result<()> {
    if format == "json" {
        println!("{}", serde_json::to_string_pretty(report)?);
        return Ok(());
    }
    println!("program: {}", p.name);
    println!("outcome: {}", describe_outcome(&report.outcome));
    println!("successor steps executed: {}", report.steps_executed);
    if !report.limit_events.is_empty() {
        println!("limits passed:");
        for ev in &report.limit_events {
            let regs: Vec<String> = ev.regs.iter().map(|r| r.to_string()).collect();
            println!(
                "  clock {:<12} depth {} line {:<4} registers [{}]",
                ev.clock.to_string(),
                ev.level + 1,
                ev.line,
                regs.join(", ")
            );
        }
    }
    Ok(())
}

fn cmd_recognize(
    program: &str,
    oracles: &[String],
    machine: &MachineArgs,
    input: &str,
    budget: &BudgetArgs,
    format: &str,
) -> Result<u8> {
    if oracles.is_empty() {
        bail!("recognize needs at least one oracle");
    }
    let p = load_program(program)?;
    let spec = machine_spec(machine)?;
    let input: Ordinal = input.parse().map_err(|e| anyhow!("bad input: {e}"))?;
    let budget = make_budget(budget)?;

    #[derive(serde::Serialize)]
    struct Row {
        oracle: String,
        verdict: String,
        clock: Option<Ordinal>,
    }
    let mut rows = Vec::new();
    let mut accepted = 0usize;
    for name in oracles {
        let oracle = load_oracle(Some(name))?;
        let engine = Engine::new(&spec, &p, &oracle);
        let report = engine.run(&input, &budget).map_err(|e| anyhow!("{e}"))?;
        let (verdict, clock) = match &report.outcome {
            RunOutcome::Halted { output, clock } if *output == Ordinal::one() => {
                accepted += 1;
                ("accept", Some(clock.clone()))
            }
            RunOutcome::Halted { clock, .. } => ("reject", Some(clock.clone())),
            RunOutcome::Diverges { certificate } => {
                ("diverge-certified", Some(certificate.tau_clock.clone()))
            }
            RunOutcome::OverflowUndefined { clock, .. } => ("overflow", Some(clock.clone())),
            RunOutcome::ClassicalLimitReached { clock } => {
                ("classical-limit", Some(clock.clone()))
            }
            RunOutcome::BudgetExhausted { .. } => ("budget", None),
        };
        rows.push(Row {
            oracle: name.clone(),
            verdict: verdict.to_string(),
            clock,
        });
    }
    let summary = match accepted {
        0 => "no candidate accepted".to_string(),
        1 => "exactly one oracle accepted".to_string(),
        n => format!("{n} oracles accepted"),
    };
    if format == "json" {
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({
                "rows": rows,
                "summary": summary,
            }))?
        );
    } else {
        for row in &rows {
            let clock = row
                .clock
                .as_ref()
                .map_or("-".to_string(), |c| c.to_string());
            println!("{:<40} {:<18} clock {}", row.oracle, row.verdict, clock);
        }
        println!("{summary}");
    }
    Ok(EXIT_HALTED)
}

fn cmd_compute(program: &str, bits: u64, machine: &MachineArgs, budget: &BudgetArgs) -> Result<u8> {
    if bits == 0 {
        bail!("--bits must be at least 1");
    }
    let p = load_program(program)?;
    let spec = machine_spec(machine)?;
    let oracle = load_oracle(machine.oracle.as_deref())?;
    let budget = make_budget(budget)?;
    let mut out = String::new();
    for j in 0..bits {
        let engine = Engine::new(&spec, &p, &oracle);
        let report = engine
            .run(&Ordinal::from_nat(j), &budget)
            .map_err(|e| anyhow!("{e}"))?;
        match report.outcome {
            RunOutcome::Halted { output, .. } => {
                out.push(if output == Ordinal::one() { '1' } else { '0' });
            }
            other => {
                eprintln!(
                    "bit {j}: computation did not halt ({})",
                    describe_outcome(&other)
                );
                return Ok(outcome_exit_code(&other));
            }
        }
    }
    println!("{out}");
    Ok(EXIT_HALTED)
}

fn cmd_transform(
    pass: &str,
    inputs: &[String],
    out: &Path,
    watched: Option<usize>,
) -> Result<u8> {
    let arity = |n: usize| -> Result<()> {
        if inputs.len() != n {
            bail!(
                "pass '{pass}' expects {n} input program(s), got {}",
                inputs.len()
            );
        }
        Ok(())
    };
    let report: TransformReport = match pass {
        "make_recognizer" => {
            arity(1)?;
            make_recognizer(&load_program(&inputs[0])?)
        }
        "compile_wplus1_to_itrm" => {
            arity(1)?;
            compile_wplus1_to_itrm(&load_program(&inputs[0])?)
        }
        "compile_resetting_to_unresetting" => {
            arity(2)?;
            compile_resetting_to_unresetting(
                &load_program(&inputs[0])?,
                &load_program(&inputs[1])?,
            )
        }
        "instrument_limit_flags" => {
            arity(1)?;
            instrument_limit_flags(&load_program(&inputs[0])?)
        }
        "instrument_overflow_detection" => {
            arity(1)?;
            let watched =
                watched.ok_or_else(|| anyhow!("this pass needs --watched <register>"))?;
            instrument_overflow_detection(&load_program(&inputs[0])?, watched)
        }
        other => bail!("unknown pass '{other}'"),
    };
    let diags = validate(&report.output);
    if has_errors(&diags) {
        eprintln!("internal error: transform output fails validation:");
        for d in diags {
            eprintln!("  {}", d.message);
        }
        return Ok(EXIT_INTERNAL);
    }
    fs::write(out, format_asm(&report.output))
        .with_context(|| format!("cannot write {}", out.display()))?;
    let report_path = {
        let mut os = out.as_os_str().to_owned();
        os.push(".report.json");
        PathBuf::from(os)
    };
    fs::write(&report_path, serde_json::to_string_pretty(&report)?)
        .with_context(|| format!("cannot write {}", report_path.display()))?;
    println!("wrote {} and {}", out.display(), report_path.display());
    Ok(EXIT_HALTED)
}
