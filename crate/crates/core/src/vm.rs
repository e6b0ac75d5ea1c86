//! Single-step and limit-step semantics of α-register machines.
//!
//! At successor times a machine steps like a classical unlimited register
//! machine. What happens at limit times depends on the policy:
//!
//! * `Classical` — limit stages are undefined; the machine only ever runs
//!   finitely many steps.
//! * `Unresetting` — active line and registers take the liminf of earlier
//!   values; a register whose liminf reaches the bound makes the whole
//!   computation undefined.
//! * `Resetting` — as above, but an overflowing register is reset to 0 and
//!   the run continues.
//!
//! Liminf values are computed by the engine; this module only applies the
//! policy to them. Successor-step increments that hit the bound are treated
//! symmetrically: undefined for classical/unresetting, reset for resetting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isa::{Instruction, Line, Program, Reg};
use crate::oracle::OracleSpec;
use crate::ordinal::Ordinal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitPolicy {
    Classical,
    Unresetting,
    Resetting,
}

/// Register bound α (or unbounded) plus the limit policy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineSpec {
    /// `None` means registers may hold arbitrary ordinals.
    pub bound: Option<Ordinal>,
    pub policy: LimitPolicy,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("register bound must be at least ω")]
    BoundBelowOmega,
}

impl MachineSpec {
    pub fn new(bound: Option<Ordinal>, policy: LimitPolicy) -> Result<MachineSpec, SpecError> {
        if let Some(b) = &bound {
            if *b < Ordinal::omega() {
                return Err(SpecError::BoundBelowOmega);
            }
        }
        Ok(MachineSpec { bound, policy })
    }

    pub fn bounded(bound: Ordinal, policy: LimitPolicy) -> Result<MachineSpec, SpecError> {
        MachineSpec::new(Some(bound), policy)
    }

    pub fn unbounded(policy: LimitPolicy) -> MachineSpec {
        MachineSpec {
            bound: None,
            policy,
        }
    }

    /// The resetting ω-machine (ITRM).
    pub fn itrm() -> MachineSpec {
        MachineSpec {
            bound: Some(Ordinal::omega()),
            policy: LimitPolicy::Resetting,
        }
    }

    /// The unresetting ω-machine (wITRM).
    pub fn witrm() -> MachineSpec {
        MachineSpec {
            bound: Some(Ordinal::omega()),
            policy: LimitPolicy::Unresetting,
        }
    }

    fn exceeds_bound(&self, v: &Ordinal) -> bool {
        self.bound.as_ref().is_some_and(|b| v >= b)
    }
}

/// Machine snapshot: active line Z, register contents R_i, clock.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    pub line: Line,
    pub registers: Vec<Ordinal>,
    pub clock: Ordinal,
}

impl Config {
    /// Line and registers without the clock: the part compared by loop
    /// detection.
    pub fn state(&self) -> (Line, &[Ordinal]) {
        (self.line, &self.registers)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Continue(Config),
    Halted(Config),
    /// A register reached the bound on a machine that cannot reset it; the
    /// carried config is the last well-defined one.
    OverflowUndefined(Reg, Config),
    /// A classical machine reached a limit time; the computation is
    /// undefined from here on.
    ClassicalLimitReached(Config),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VmError {
    #[error("input {0} is not below the register bound")]
    InputOutOfBounds(Ordinal),
    #[error("limit rule invoked at non-limit clock {0}")]
    NonLimitClock(Ordinal),
    #[error("liminf vector has {got} registers, program uses {want}")]
    RegisterCountMismatch { got: usize, want: usize },
}

/// Starting configuration: R0 holds the input, all other registers 0, line 0,
/// clock 0.
pub fn initial_config(
    spec: &MachineSpec,
    p: &Program,
    input: &Ordinal,
) -> Result<Config, VmError> {
    if spec.exceeds_bound(input) {
        return Err(VmError::InputOutOfBounds(input.clone()));
    }
    let n = p.register_count.max(1);
    let mut registers = vec![Ordinal::zero(); n];
    registers[0] = input.clone();
    Ok(Config {
        line: 0,
        registers,
        clock: Ordinal::zero(),
    })
}

/// Executes the instruction at `c.line` and advances the clock by one.
pub fn successor_step(
    spec: &MachineSpec,
    p: &Program,
    oracle: &OracleSpec,
    c: &Config,
) -> StepResult {
    let mut next = c.clone();
    match step_in_place(spec, p, oracle, &mut next) {
        Some(result) => result,
        None => StepResult::Continue(next),
    }
}

/// In-place variant of [`successor_step`], used by the engine's hot loop.
/// Returns `None` when the run continues (the config has been advanced).
pub fn step_in_place(
    spec: &MachineSpec,
    p: &Program,
    oracle: &OracleSpec,
    c: &mut Config,
) -> Option<StepResult> {
    if c.line >= p.instructions.len() {
        // already fallen off the end; halted state is terminal
        return Some(StepResult::Halted(c.clone()));
    }
    let instr = &p.instructions[c.line];
    let mut next_line = c.line + 1;
    match instr {
        Instruction::Zero(r) => c.registers[*r] = Ordinal::zero(),
        Instruction::Inc(r) => {
            let bumped = c.registers[*r].succ();
            if spec.exceeds_bound(&bumped) {
                match spec.policy {
                    LimitPolicy::Resetting => c.registers[*r] = Ordinal::zero(),
                    LimitPolicy::Unresetting | LimitPolicy::Classical => {
                        let last = c.clone();
                        return Some(StepResult::OverflowUndefined(*r, last));
                    }
                }
            } else {
                c.registers[*r] = bumped;
            }
        }
        Instruction::Copy { src, dst } => c.registers[*dst] = c.registers[*src].clone(),
        Instruction::Read { index, dst } => {
            let bit = oracle.bit_at(&c.registers[*index]);
            c.registers[*dst] = Ordinal::from_nat(u32::from(bit));
        }
        Instruction::JumpEq { a, b, target } => {
            if c.registers[*a] == c.registers[*b] {
                next_line = *target;
            }
        }
        Instruction::Halt => {
            c.clock = c.clock.succ();
            return Some(StepResult::Halted(c.clone()));
        }
    }
    c.line = next_line;
    c.clock = c.clock.succ();
    if c.line >= p.instructions.len() {
        return Some(StepResult::Halted(c.clone()));
    }
    None
}

/// Applies the limit rule at a limit clock to liminf values supplied by the
/// engine.
pub fn limit_config(
    spec: &MachineSpec,
    p: &Program,
    line_liminf: Line,
    reg_liminfs: Vec<Ordinal>,
    clock: Ordinal,
) -> Result<StepResult, VmError> {
    if !clock.is_limit() {
        return Err(VmError::NonLimitClock(clock));
    }
    if reg_liminfs.len() != p.register_count.max(1) {
        return Err(VmError::RegisterCountMismatch {
            got: reg_liminfs.len(),
            want: p.register_count.max(1),
        });
    }
    let mut cfg = Config {
        line: line_liminf,
        registers: reg_liminfs,
        clock,
    };
    match spec.policy {
        LimitPolicy::Classical => Ok(StepResult::ClassicalLimitReached(cfg)),
        LimitPolicy::Unresetting => {
            for (r, v) in cfg.registers.iter().enumerate() {
                if spec.exceeds_bound(v) {
                    return Ok(StepResult::OverflowUndefined(r, cfg.clone()));
                }
            }
            Ok(StepResult::Continue(cfg))
        }
        LimitPolicy::Resetting => {
            for v in cfg.registers.iter_mut() {
                if spec.bound.as_ref().is_some_and(|b| &*v >= b) {
                    *v = Ordinal::zero();
                }
            }
            Ok(StepResult::Continue(cfg))
        }
    }
}

/// Parses a bound given on the command line: an ordinal or "unbounded".
pub fn parse_bound(text: &str) -> Result<Option<Ordinal>, crate::ordinal::OrdinalParseError> {
    if text.eq_ignore_ascii_case("unbounded") {
        Ok(None)
    } else {
        text.parse().map(Some)
    }
}
