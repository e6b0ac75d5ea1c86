//! Machine-to-machine compilers: simulating a resetting β-machine on an
//! unresetting α-machine (α > β), and simulating an unresetting
//! (ω+1)-machine on a resetting ω-machine.

use num_bigint::BigUint;

use crate::isa::{relocate, Instruction, Program, Reg};
use crate::ordinal::Ordinal;
use crate::transforms::instrument::{build_with_handlers, flag_layout};
use crate::transforms::{AuxRegister, AuxRole, TransformReport};

/// Compiles a resetting β-program `q` for an unresetting α-machine, given a
/// program that recognizes β among ordinal inputs (halts with 1 exactly on
/// input β, 0 on every other ordinal).
///
/// The simulation runs `q` on its own registers, with limit-stage flags
/// woven around every step. When the flags signal a limit, the recognizer is
/// run on each simulated register and every register found to hold β is
/// reset to 0, which is exactly the resetting machine's limit rule; then the
/// flags are re-armed and the simulation resumes.
pub fn compile_resetting_to_unresetting(
    q: &Program,
    beta_recognizer: &Program,
) -> TransformReport {
    let sim_regs = q.register_count.max(1);
    // aux: flags + scratch from the layout, then a constant-one register,
    // then the recognizer's block
    let layout = flag_layout(q, 1 + beta_recognizer.register_count.max(1));
    let one = layout.scratch + 1;
    let p_base = one + 1;
    let p_regs = beta_recognizer.register_count.max(1);
    let reg_map: std::collections::HashMap<Reg, Reg> =
        (0..p_regs).map(|r| (r, p_base + r)).collect();

    let payload = |_i: usize, at: usize, out: &mut Vec<Instruction>| {
        let mut cursor = at;
        for r in 0..sim_regs {
            // fresh recognizer state, input = simulated register r
            for pr in 0..p_regs {
                out.push(Instruction::Zero(p_base + pr));
            }
            out.push(Instruction::Copy {
                src: r,
                dst: p_base,
            });
            cursor += p_regs + 1;
            let body_start = cursor;
            let after = body_start + beta_recognizer.instructions.len();
            let moved = relocate(beta_recognizer, body_start, &reg_map)
                .expect("fresh register block is injective");
            for instr in moved.instructions {
                out.push(match instr {
                    Instruction::Halt => Instruction::JumpEq {
                        a: p_base,
                        b: p_base,
                        target: after,
                    },
                    other => other,
                });
            }
            cursor = after;
            // output 1 means the register holds β: reset it
            out.push(Instruction::JumpEq {
                a: p_base,
                b: one,
                target: cursor + 2,
            });
            out.push(Instruction::JumpEq {
                a: p_base,
                b: p_base,
                target: cursor + 3,
            });
            out.push(Instruction::Zero(r));
            cursor += 3;
        }
    };

    let mut program = build_with_handlers(q, &layout, payload);
    // the builder's first instruction arms the flags; a constant 1 is
    // needed as well, so prepend its initialization
    program.instructions.insert(0, Instruction::Inc(one));
    for instr in program.instructions.iter_mut() {
        if let Instruction::JumpEq { target, .. } = instr {
            *target += 1;
        }
    }
    let program = Program::new(format!("{}(on-unresetting)", q.name), program.instructions);

    let mut report = TransformReport::new(program);
    report.register_map = (0..sim_regs).map(|r| (r, r)).collect();
    report.auxiliary_registers = vec![
        AuxRegister {
            index: layout.f1,
            role: AuxRole::Flag,
        },
        AuxRegister {
            index: layout.f2,
            role: AuxRole::Flag,
        },
        AuxRegister {
            index: layout.scratch,
            role: AuxRole::Scratch,
        },
        AuxRegister {
            index: one,
            role: AuxRole::One,
        },
    ];
    report
        .auxiliary_registers
        .extend((0..p_regs).map(|r| AuxRegister {
            index: p_base + r,
            role: AuxRole::CalleeBlock,
        }));
    report.notes = format!(
        "simulates '{}' step for step; at detected limit stages the \
         recognizer '{}' runs on each simulated register and zeroes those \
         holding the simulated bound; per-step check lines are 2 + 5*i",
        q.name, beta_recognizer.name
    );
    report
}

/// The step-check line of simulated instruction `i` in the output of
/// [`compile_resetting_to_unresetting`].
pub fn bisimulation_check_line(i: usize) -> usize {
    2 + 5 * i
}

/// Encoding used by [`compile_wplus1_to_itrm`]: finite i is stored as i+1
/// and ω as 0, so a resetting overflow (liminf ω, reset to 0) lands exactly
/// on the code of ω.
pub fn encode_value(v: &Ordinal) -> Ordinal {
    match v.finite_value() {
        Some(n) => Ordinal::from_nat(n + 1u32),
        None => Ordinal::zero(), // ω (the only infinite value on an (ω+1)-machine)
    }
}

/// Decodes a finite register content of the compiled program back to the
/// simulated (ω+1)-machine value. 0 decodes to ω.
pub fn decode_value(v: &Ordinal) -> Ordinal {
    match v.finite_value() {
        Some(n) if n > BigUint::from(0u32) => Ordinal::from_nat(n - 1u32),
        _ => Ordinal::omega(),
    }
}

/// Compiles an unresetting (ω+1)-program to a resetting ω-program under the
/// encoding `enc(i) = i+1`, `enc(ω) = 0`.
///
/// Zeroing a register becomes setting it to 1; incrementing a register that
/// codes ω jumps to a crash halt, mirroring the direct machine's undefined
/// overflow; equality tests are encoding-invariant; oracle reads decode the
/// index by counting up (no decrement exists), read the raw bit, and
/// re-encode it — an index coding ω reads 0, as a real oracle does at
/// infinite indices.
pub fn compile_wplus1_to_itrm(p: &Program) -> TransformReport {
    let k = p.register_count.max(1);
    let zero = k; // never written: always-zero comparand (codes ω!)
    let dec = k + 1; // decoded index
    let enc = k + 2; // encoding counter
    let bit = k + 3; // raw oracle bit
    let one = k + 4; // constant enc(0)
    let two = k + 5; // constant enc(1)

    // Simulated registers are written in single steps only (COPY from the
    // constant registers): a transient raw 0 would code ω and could leak
    // into a liminf.
    let size_of = |instr: &Instruction| -> usize {
        match instr {
            Instruction::Zero(_) => 1,
            Instruction::Inc(_) => 2,
            Instruction::Copy { .. } => 1,
            Instruction::JumpEq { .. } => 1,
            Instruction::Halt => 1,
            Instruction::Read { .. } => 13,
        }
    };
    let n = p.instructions.len();
    let init_len = 3 + (k - 1); // set up the constants, then registers 1.. to enc(0)
    let mut starts = Vec::with_capacity(n + 1);
    let mut at = init_len;
    for instr in &p.instructions {
        starts.push(at);
        at += size_of(instr);
    }
    starts.push(at); // fall-off HALT
    let crash_line = at + 1;

    let mut out: Vec<Instruction> = Vec::with_capacity(crash_line + 1);
    out.push(Instruction::Inc(one));
    out.push(Instruction::Inc(two));
    out.push(Instruction::Inc(two));
    for r in 1..k {
        out.push(Instruction::Copy { src: one, dst: r });
    }
    for instr in &p.instructions {
        let b = out.len();
        match *instr {
            Instruction::Zero(r) => {
                out.push(Instruction::Copy { src: one, dst: r }); // enc(0)
            }
            Instruction::Inc(r) => {
                // incrementing a register that codes ω is the crash case
                out.push(Instruction::JumpEq {
                    a: r,
                    b: zero,
                    target: crash_line,
                });
                out.push(Instruction::Inc(r));
            }
            Instruction::Copy { src, dst } => out.push(Instruction::Copy { src, dst }),
            Instruction::JumpEq { a, b: rb, target } => out.push(Instruction::JumpEq {
                a,
                b: rb,
                target: starts[target],
            }),
            Instruction::Halt => out.push(Instruction::Halt),
            Instruction::Read { index, dst } => {
                // b+0  JEQ index zero b+12  # index codes ω → bit is 0
                // b+1  ZERO dec
                // b+2  ZERO enc
                // b+3  INC enc              # enc = enc(dec) = dec+1
                // b+4  JEQ enc index b+8    # found dec = index−1
                // b+5  INC enc
                // b+6  INC dec
                // b+7  JEQ dec dec b+4
                // b+8  READ dec bit
                // b+9  JEQ bit zero b+12    # raw bit 0 → dst := enc(0)
                // b+10 COPY two dst         # raw bit 1 → dst := enc(1)
                // b+11 JEQ dst dst b+13     # done
                // b+12 COPY one dst         # dst := enc(0)
                out.push(Instruction::JumpEq {
                    a: index,
                    b: zero,
                    target: b + 12,
                });
                out.push(Instruction::Zero(dec));
                out.push(Instruction::Zero(enc));
                out.push(Instruction::Inc(enc));
                out.push(Instruction::JumpEq {
                    a: enc,
                    b: index,
                    target: b + 8,
                });
                out.push(Instruction::Inc(enc));
                out.push(Instruction::Inc(dec));
                out.push(Instruction::JumpEq {
                    a: dec,
                    b: dec,
                    target: b + 4,
                });
                out.push(Instruction::Read {
                    index: dec,
                    dst: bit,
                });
                out.push(Instruction::JumpEq {
                    a: bit,
                    b: zero,
                    target: b + 12,
                });
                out.push(Instruction::Copy { src: two, dst });
                out.push(Instruction::JumpEq {
                    a: dst,
                    b: dst,
                    target: b + 13,
                });
                out.push(Instruction::Copy { src: one, dst });
            }
        }
        debug_assert_eq!(out.len() - b, size_of(instr));
    }
    out.push(Instruction::Halt); // fall-off target
    out.push(Instruction::Halt); // crash halt
    debug_assert_eq!(out.len() - 1, crash_line);

    let mut report = TransformReport::new(Program::new(format!("{}(itrm)", p.name), out));
    report.register_map = (0..k).map(|r| (r, r)).collect();
    report.auxiliary_registers = vec![
        AuxRegister {
            index: zero,
            role: AuxRole::Zero,
        },
        AuxRegister {
            index: dec,
            role: AuxRole::Counter,
        },
        AuxRegister {
            index: enc,
            role: AuxRole::Counter,
        },
        AuxRegister {
            index: bit,
            role: AuxRole::OracleBit,
        },
        AuxRegister {
            index: one,
            role: AuxRole::One,
        },
        AuxRegister {
            index: two,
            role: AuxRole::One,
        },
    ];
    report.crash_line = Some(crash_line);
    report.notes = format!(
        "simulates the unresetting (ω+1)-program '{}' with enc(i)=i+1, \
         enc(ω)=0; halting at line {crash_line} signals the simulated \
         machine's undefined overflow",
        p.name
    );
    report
}
