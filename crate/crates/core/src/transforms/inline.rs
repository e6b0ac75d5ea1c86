//! The linker primitive: splicing a relocated callee into a host program.

use std::collections::HashMap;

use thiserror::Error;

use crate::isa::{relocate, Instruction, Line, Program, Reg, RelocateError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InlineError {
    #[error("call marker {0} is not a host line")]
    BadMarker(Line),
    #[error("input wiring names callee register {0} outside the callee")]
    BadInputReg(Reg),
    #[error(transparent)]
    Relocate(#[from] RelocateError),
}

/// Replaces each marker line of `host` with a relocated copy of `callee`.
///
/// Every call site gets its own disjoint register block above the host's
/// registers. At a site, the callee's registers are zeroed, `input_regs`
/// pairs `(callee register, host register)` are copied in, the callee body
/// runs (its halts become jumps to the continuation), and the callee's R0 is
/// copied to `output_reg`.
pub fn inline_subroutine(
    host: &Program,
    callee: &Program,
    call_markers: &[Line],
    input_regs: &[(Reg, Reg)],
    output_reg: Reg,
) -> Result<Program, InlineError> {
    for &m in call_markers {
        if m >= host.instructions.len() {
            return Err(InlineError::BadMarker(m));
        }
    }
    for &(cr, _) in input_regs {
        if cr >= callee.register_count {
            return Err(InlineError::BadInputReg(cr));
        }
    }
    let callee_regs = callee.register_count.max(1);
    let site_len = callee_regs + input_regs.len() + callee.instructions.len() + 1;

    // pass 1: new start line of every host line
    let mut starts = Vec::with_capacity(host.instructions.len() + 1);
    let mut at = 0usize;
    for (i, _) in host.instructions.iter().enumerate() {
        starts.push(at);
        at += if call_markers.contains(&i) { site_len } else { 1 };
    }
    starts.push(at); // one past the end

    // pass 2: emit
    let mut out: Vec<Instruction> = Vec::with_capacity(at);
    let mut next_block = host.register_count;
    for (i, instr) in host.instructions.iter().enumerate() {
        if !call_markers.contains(&i) {
            out.push(match *instr {
                Instruction::JumpEq { a, b, target } => Instruction::JumpEq {
                    a,
                    b,
                    target: starts[target],
                },
                ref other => other.clone(),
            });
            continue;
        }
        let base = next_block;
        next_block += callee_regs;
        let reg_map: HashMap<Reg, Reg> =
            (0..callee_regs).map(|r| (r, base + r)).collect();
        for r in 0..callee_regs {
            out.push(Instruction::Zero(base + r));
        }
        for &(cr, hr) in input_regs {
            out.push(Instruction::Copy {
                src: hr,
                dst: base + cr,
            });
        }
        let body_start = starts[i] + callee_regs + input_regs.len();
        let continuation = body_start + callee.instructions.len();
        let moved = relocate(callee, body_start, &reg_map)?;
        for instr in moved.instructions {
            out.push(match instr {
                Instruction::Halt => Instruction::JumpEq {
                    a: base,
                    b: base,
                    target: continuation,
                },
                other => other,
            });
        }
        out.push(Instruction::Copy {
            src: base,
            dst: output_reg,
        });
    }
    Ok(Program::new(format!("{}+{}", host.name, callee.name), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Budget, Engine, RunOutcome};
    use crate::isa::{has_errors, parse_asm, validate};
    use crate::oracle::OracleSpec;
    use crate::ordinal::Ordinal;
    use crate::vm::MachineSpec;

    #[test]
    fn trivial_callee_sets_output() {
        // host: marker, then halt; callee writes 1 and halts
        let host = parse_asm("host", "ZERO 1\nHALT").unwrap();
        let callee = parse_asm("one", "ZERO 0\nINC 0\nHALT").unwrap();
        let out = inline_subroutine(&host, &callee, &[0], &[], 1).unwrap();
        assert!(!has_errors(&validate(&out)));
        let spec = MachineSpec::itrm();
        let oracle = OracleSpec::AllZero;
        let engine = Engine::new(&spec, &out, &oracle);
        let report = engine.run(&Ordinal::zero(), &Budget::default()).unwrap();
        match report.outcome {
            RunOutcome::Halted { .. } => {}
            other => panic!("unexpected {other:?}"),
        }
        // output_reg (R1) holds the callee's R0 = 1 at the halt
        let last = report.trace.last().unwrap();
        assert_eq!(last.regs[1], Ordinal::one());
    }

    #[test]
    fn two_sites_get_disjoint_copies() {
        let host = parse_asm("host", "ZERO 1\nZERO 2\nHALT").unwrap();
        let callee = crate::transforms::library_program("recognize_omega").unwrap();
        let out = inline_subroutine(&host, &callee, &[0, 1], &[(0, 1)], 2).unwrap();
        assert!(!has_errors(&validate(&out)));
        // both sites fully relocated: register budget covers two callee blocks
        assert_eq!(
            out.register_count,
            host.register_count + 2 * callee.register_count
        );
    }

    #[test]
    fn empty_host_with_marker_is_rejected() {
        let host = parse_asm("empty", "").unwrap();
        let callee = parse_asm("one", "HALT").unwrap();
        assert_eq!(
            inline_subroutine(&host, &callee, &[0], &[], 0),
            Err(InlineError::BadMarker(0))
        );
        // no markers at all: the host is unchanged up to nothing to do
        let out = inline_subroutine(&host, &callee, &[], &[], 0).unwrap();
        assert!(out.instructions.is_empty());
    }
}
