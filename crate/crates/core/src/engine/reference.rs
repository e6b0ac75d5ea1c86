//! Brute-force liminf reference: an independent oracle for the accelerator.
//!
//! Runs plain successor steps (no acceleration at all) and estimates each
//! register's liminf by windowed minima over the recorded tail: the minimum
//! over the last quarter of the trace, compared against the minimum over the
//! quarter before it. A component whose windowed minimum has stabilized
//! across both quarters reports that value; anything still moving is
//! reported unstable (for a detected period this means the register grows
//! without bound).

use crate::ordinal::Ordinal;
use crate::vm::{initial_config, step_in_place, Config, MachineSpec, VmError};
use crate::{OracleSpec, Program};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stat<T> {
    Stable(T),
    /// The windowed minimum kept changing; `last_min` is its value over the
    /// final quarter.
    Unstable { last_min: T },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteOutcome {
    Halted { output: Ordinal, clock: Ordinal },
    OverflowUndefined { register: usize, clock: Ordinal },
    ClassicalLimitReached,
    Estimate { line: Stat<usize>, regs: Vec<Stat<Ordinal>> },
}

/// Runs `n_steps` pure successor steps and reports windowed liminf
/// estimates.
pub fn brute_liminf_reference(
    spec: &MachineSpec,
    program: &Program,
    oracle: &OracleSpec,
    input: &Ordinal,
    n_steps: usize,
) -> Result<BruteOutcome, VmError> {
    let cfg = initial_config(spec, program, input)?;
    Ok(brute_liminf_from(spec, program, oracle, cfg, n_steps))
}

pub fn brute_liminf_from(
    spec: &MachineSpec,
    program: &Program,
    oracle: &OracleSpec,
    mut cfg: Config,
    n_steps: usize,
) -> BruteOutcome {
    let mut lines: Vec<usize> = Vec::with_capacity(n_steps);
    let mut regs: Vec<Vec<Ordinal>> = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        lines.push(cfg.line);
        regs.push(cfg.registers.clone());
        match step_in_place(spec, program, oracle, &mut cfg) {
            None => {}
            Some(crate::vm::StepResult::Halted(c)) => {
                return BruteOutcome::Halted {
                    output: c.registers[0].clone(),
                    clock: c.clock,
                };
            }
            Some(crate::vm::StepResult::OverflowUndefined(r, c)) => {
                return BruteOutcome::OverflowUndefined {
                    register: r,
                    clock: c.clock,
                };
            }
            Some(crate::vm::StepResult::ClassicalLimitReached(_)) => {
                return BruteOutcome::ClassicalLimitReached;
            }
            Some(crate::vm::StepResult::Continue(_)) => unreachable!(),
        }
    }
    let n = lines.len();
    if n < 8 {
        // too short to window; report everything as unsettled
        return BruteOutcome::Estimate {
            line: Stat::Unstable {
                last_min: *lines.last().unwrap_or(&0),
            },
            regs: cfg
                .registers
                .iter()
                .map(|v| Stat::Unstable {
                    last_min: v.clone(),
                })
                .collect(),
        };
    }
    let (q3, q4) = (n / 2..3 * n / 4, 3 * n / 4..n);
    let line_min = |range: std::ops::Range<usize>| lines[range].iter().min().copied().unwrap();
    let line = if line_min(q3.clone()) == line_min(q4.clone()) {
        Stat::Stable(line_min(q4.clone()))
    } else {
        Stat::Unstable {
            last_min: line_min(q4.clone()),
        }
    };
    let nregs = regs[0].len();
    let reg_min = |range: std::ops::Range<usize>, r: usize| {
        regs[range].iter().map(|v| &v[r]).min().unwrap().clone()
    };
    let reg_stats = (0..nregs)
        .map(|r| {
            let a = reg_min(q3.clone(), r);
            let b = reg_min(q4.clone(), r);
            if a == b {
                Stat::Stable(b)
            } else {
                Stat::Unstable { last_min: b }
            }
        })
        .collect();
    BruteOutcome::Estimate {
        line,
        regs: reg_stats,
    }
}
