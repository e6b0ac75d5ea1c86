//! Turning a computing program into a recognizer: compare the computed real
//! to the oracle bitwise.

use std::collections::HashMap;

use crate::isa::{relocate, Instruction, Program, Reg};
use crate::transforms::{AuxRegister, AuxRole, TransformReport};

/// Builds a recognizer for the real computed by `p`.
///
/// Phase i computes bit i by running an inlined copy of `p` on input i,
/// compares it to the oracle bit at i, and rejects with output 0 on a
/// mismatch. Otherwise every work register (including the counting register)
/// is zeroed once, the counter is set to i+1 via a stash register, and two
/// flag registers are swapped. If the oracle is exactly the computed real,
/// all phases pass; the liminf state at ω has the counter at 0 and both
/// flags at 0 (each is zeroed cofinally), which the loop head detects and
/// accepts with output 1. The recognizer runs on an unresetting ω-machine:
/// no register's liminf ever reaches ω because everything is zeroed once per
/// phase.
pub fn make_recognizer(p: &Program) -> TransformReport {
    const COUNTER: Reg = 1;
    const F1: Reg = 2;
    const F2: Reg = 3;
    const STASH: Reg = 4;
    const SWAP: Reg = 5;
    const ORACLE_BIT: Reg = 6;
    const ZERO: Reg = 7;
    const P_BASE: Reg = 8;
    let p_regs = p.register_count.max(1);
    let reg_map: HashMap<Reg, Reg> = (0..p_regs).map(|r| (r, P_BASE + r)).collect();

    let plen = p.instructions.len();
    let body = 2; // first body line
    let after_p = body + 1 + plen;
    let agree = after_p + 4;
    let acc = agree + 1 + p_regs + 10;
    let acc2 = acc + 2;

    let mut out: Vec<Instruction> = Vec::with_capacity(acc2 + 3);
    out.push(Instruction::Inc(F2)); // 0: flags start (0, 1), counter 0
    out.push(Instruction::JumpEq {
        a: F1,
        b: F2,
        target: acc,
    }); // 1: head — flags equal only at a limit
    out.push(Instruction::Copy {
        src: COUNTER,
        dst: P_BASE,
    }); // 2: p's input := i
    let moved = relocate(p, body + 1, &reg_map).expect("fresh block is injective");
    for instr in moved.instructions {
        out.push(match instr {
            Instruction::Halt => Instruction::JumpEq {
                a: P_BASE,
                b: P_BASE,
                target: after_p,
            },
            other => other,
        });
    }
    debug_assert_eq!(out.len(), after_p);
    out.push(Instruction::Read {
        index: COUNTER,
        dst: ORACLE_BIT,
    });
    out.push(Instruction::JumpEq {
        a: P_BASE,
        b: ORACLE_BIT,
        target: agree,
    });
    out.push(Instruction::Zero(0)); // bits disagree: reject
    out.push(Instruction::Halt);
    debug_assert_eq!(out.len(), agree);
    out.push(Instruction::Copy {
        src: COUNTER,
        dst: STASH,
    });
    for r in 0..p_regs {
        out.push(Instruction::Zero(P_BASE + r));
    }
    out.push(Instruction::Zero(ORACLE_BIT));
    out.push(Instruction::Zero(COUNTER)); // the counter's cofinal zero
    out.push(Instruction::Copy {
        src: STASH,
        dst: COUNTER,
    });
    out.push(Instruction::Inc(COUNTER)); // counter := i+1
    out.push(Instruction::Zero(STASH));
    out.push(Instruction::Copy { src: F1, dst: SWAP });
    out.push(Instruction::Copy { src: F2, dst: F1 });
    out.push(Instruction::Copy { src: SWAP, dst: F2 });
    out.push(Instruction::Zero(SWAP));
    out.push(Instruction::JumpEq {
        a: SWAP,
        b: SWAP,
        target: 1,
    }); // next phase
    debug_assert_eq!(out.len(), acc);
    out.push(Instruction::JumpEq {
        a: COUNTER,
        b: ZERO,
        target: acc2,
    });
    out.push(Instruction::JumpEq {
        a: COUNTER,
        b: COUNTER,
        target: body,
    }); // flags equal with a nonzero counter: resume the phase
    debug_assert_eq!(out.len(), acc2);
    out.push(Instruction::Zero(0));
    out.push(Instruction::Inc(0)); // accept
    out.push(Instruction::Halt);

    let mut report = TransformReport::new(Program::new(
        format!("recognize({})", p.name),
        out,
    ));
    report.register_map = reg_map;
    report.auxiliary_registers = vec![
        AuxRegister {
            index: COUNTER,
            role: AuxRole::Counter,
        },
        AuxRegister {
            index: F1,
            role: AuxRole::Flag,
        },
        AuxRegister {
            index: F2,
            role: AuxRole::Flag,
        },
        AuxRegister {
            index: STASH,
            role: AuxRole::Scratch,
        },
        AuxRegister {
            index: SWAP,
            role: AuxRole::Scratch,
        },
        AuxRegister {
            index: ORACLE_BIT,
            role: AuxRole::OracleBit,
        },
        AuxRegister {
            index: ZERO,
            role: AuxRole::Zero,
        },
    ];
    report.notes = format!(
        "recognizes the real computed by '{}': accepts (output 1) shortly \
         after ω when every bit matches the oracle, rejects (output 0) at a \
         finite stage on the first mismatch",
        p.name
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Budget, Engine, RunOutcome};
    use crate::isa::{has_errors, validate};
    use crate::oracle::OracleSpec;
    use crate::ordinal::Ordinal;
    use crate::transforms::samples;
    use crate::vm::MachineSpec;

    fn recognizer_budget() -> Budget {
        Budget::default().with_max_clock(
            Ordinal::omega().repeat(20), // clock budget ω·20
        )
    }

    fn run_recognizer(q: &Program, oracle: &OracleSpec) -> RunOutcome {
        let spec = MachineSpec::witrm();
        let engine = Engine::new(&spec, q, oracle);
        engine
            .run(&Ordinal::zero(), &recognizer_budget())
            .unwrap()
            .outcome
    }

    #[test]
    fn empty_real_recognizer() {
        let report = make_recognizer(&samples::empty_computer());
        assert!(!has_errors(&validate(&report.output)));
        let q = &report.output;

        // accepts the empty oracle shortly after ω
        match run_recognizer(q, &OracleSpec::AllZero) {
            RunOutcome::Halted { output, clock } => {
                assert_eq!(output, Ordinal::one());
                assert!(clock > Ordinal::omega());
                assert!(clock < Ordinal::omega().repeat(2));
            }
            other => panic!("unexpected {other:?}"),
        }

        // rejects an oracle with bit 3 set, at a finite clock, in phase 3
        match run_recognizer(q, &OracleSpec::finite([3])) {
            RunOutcome::Halted { output, clock } => {
                assert_eq!(output, Ordinal::zero());
                assert!(clock < Ordinal::omega());
            }
            other => panic!("unexpected {other:?}"),
        }

        // first-bit mismatch rejects immediately
        match run_recognizer(q, &OracleSpec::finite([0])) {
            RunOutcome::Halted { output, .. } => assert_eq!(output, Ordinal::zero()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evens_recognizer_accepts_only_evens() {
        let report = make_recognizer(&samples::evens_computer());
        assert!(!has_errors(&validate(&report.output)));
        let q = &report.output;
        let evens = OracleSpec::periodic(vec![], vec![1, 0]);
        match run_recognizer(q, &evens) {
            RunOutcome::Halted { output, clock } => {
                assert_eq!(output, Ordinal::one());
                assert!(clock > Ordinal::omega());
            }
            other => panic!("unexpected {other:?}"),
        }
        // flip bit 2: rejected at a finite stage
        let perturbed = OracleSpec::periodic(vec![1, 0, 0], vec![1, 0]);
        match run_recognizer(q, &perturbed) {
            RunOutcome::Halted { output, clock } => {
                assert_eq!(output, Ordinal::zero());
                assert!(clock < Ordinal::omega());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
