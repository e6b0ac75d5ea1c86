//! Per-step instrumentation: limit-stage flags and overflow detection.

use crate::isa::{Instruction, Program, Reg};
use crate::transforms::{AuxRegister, AuxRole, TransformReport};

/// Weaves limit-stage flags around every instruction.
///
/// Two fresh flag registers start as (1, 0) and are swapped once per
/// simulated step, so they only ever become equal — both 0 — when a limit
/// stage has just been passed (each flag takes both values cofinally, so
/// both liminfs are 0). Each step block checks the flags before executing
/// its instruction and re-arms them to (1, 0) when it finds them equal.
pub fn instrument_limit_flags(p: &Program) -> TransformReport {
    build_instrumented(p, &[])
}

/// Adds a companion register that tracks whether `watched` holds 0: the
/// companion is set to 0 whenever the watched register contains 0 and to 1
/// otherwise, once per step. At a limit stage where the watched register
/// reads 0, a companion value of 1 certifies a genuine overflow (the
/// register was nonzero cofinally and its liminf hit the bound), while 0
/// means the register was 0 cofinally often.
pub fn instrument_overflow_detection(p: &Program, watched: Reg) -> TransformReport {
    let zero = p.register_count.max(watched + 1);
    let companion = zero + 1;
    // Per-instruction block: update companion from watched, then step. The
    // companion moves between 0 and 1 in single writes — it must never pass
    // through a wrong transient value, or its own liminf would lie.
    //   b+0: JEQ watched zero b+5      # watched is 0 → companion := 0
    //   b+1: JEQ companion zero b+3    # watched nonzero: raise 0 → 1
    //   b+2: JEQ companion companion b+6
    //   b+3: INC companion
    //   b+4: JEQ companion companion b+6
    //   b+5: ZERO companion
    //   b+6: <instr>
    const BLOCK: usize = 7;
    let n = p.instructions.len();
    let start = |i: usize| i * BLOCK;
    let mut out = Vec::with_capacity(n * BLOCK + 1);
    for (i, instr) in p.instructions.iter().enumerate() {
        let b = start(i);
        out.push(Instruction::JumpEq {
            a: watched,
            b: zero,
            target: b + 5,
        });
        out.push(Instruction::JumpEq {
            a: companion,
            b: zero,
            target: b + 3,
        });
        out.push(Instruction::JumpEq {
            a: companion,
            b: companion,
            target: b + 6,
        });
        out.push(Instruction::Inc(companion));
        out.push(Instruction::JumpEq {
            a: companion,
            b: companion,
            target: b + 6,
        });
        out.push(Instruction::Zero(companion));
        out.push(retarget(instr, &|t| start(t)));
        debug_assert_eq!(out.len(), b + BLOCK);
    }
    out.push(Instruction::Halt); // fall-off target
    let mut report = TransformReport::new(Program::new(
        format!("{}(overflow-watch)", p.name),
        out,
    ));
    report.register_map = (0..p.register_count).map(|r| (r, r)).collect();
    report.auxiliary_registers = vec![
        AuxRegister {
            index: zero,
            role: AuxRole::Zero,
        },
        AuxRegister {
            index: companion,
            role: AuxRole::Companion,
        },
    ];
    report.notes = format!(
        "companion register {companion} mirrors whether register {watched} is zero; \
         at a limit where register {watched} reads 0, companion 1 means overflow, \
         companion 0 means cofinally zero"
    );
    report
}

/// Shared layout for flag instrumentation, optionally inserting extra
/// handler payload (used by the bisimulation compiler): per original
/// instruction `i` the block is
///
/// ```text
/// chk_i:  JEQ f1 f2 handler_i
/// ret_i:  COPY f1 t
///         COPY f2 f1
///         COPY t f2
///         <instr_i, jumps retargeted to chk_j>
/// ```
///
/// with all handlers placed behind the final `HALT`:
///
/// ```text
/// handler_i: <payload>
///            ZERO f1
///            INC f1
///            ZERO f2
///            JEQ f1 f1 ret_i
/// ```
pub(crate) struct FlagLayout {
    pub f1: Reg,
    pub f2: Reg,
    pub scratch: Reg,
    pub block_start: Vec<usize>,
    pub halt_line: usize,
}

pub(crate) fn flag_layout(p: &Program, extra_regs: usize) -> FlagLayout {
    let f1 = p.register_count;
    let f2 = f1 + 1;
    let scratch = f2 + 1;
    const INIT: usize = 1; // INC f1
    const BLOCK: usize = 5;
    let n = p.instructions.len();
    let block_start = (0..=n).map(|i| INIT + i * BLOCK).collect::<Vec<_>>();
    let _ = extra_regs;
    FlagLayout {
        f1,
        f2,
        scratch,
        halt_line: INIT + n * BLOCK,
        block_start,
    }
}

/// The payload callback receives the original instruction index and the
/// absolute line its handler payload starts at (payload length must not
/// depend on that line).
pub(crate) fn build_with_handlers(
    p: &Program,
    layout: &FlagLayout,
    mut handler_payload: impl FnMut(usize, usize, &mut Vec<Instruction>),
) -> Program {
    let n = p.instructions.len();
    let mut out: Vec<Instruction> = Vec::new();
    out.push(Instruction::Inc(layout.f1)); // arm flags (1, 0)
    // handlers sit after the fall-off HALT; size them first with a probe
    let mut handler_start = vec![0usize; n];
    let mut at = layout.halt_line + 1;
    let mut payload_sizes = vec![0usize; n];
    for i in 0..n {
        let mut probe = Vec::new();
        handler_payload(i, 0, &mut probe);
        payload_sizes[i] = probe.len();
        handler_start[i] = at;
        at += probe.len() + 4;
    }
    for (i, instr) in p.instructions.iter().enumerate() {
        out.push(Instruction::JumpEq {
            a: layout.f1,
            b: layout.f2,
            target: handler_start[i],
        });
        out.push(Instruction::Copy {
            src: layout.f1,
            dst: layout.scratch,
        });
        out.push(Instruction::Copy {
            src: layout.f2,
            dst: layout.f1,
        });
        out.push(Instruction::Copy {
            src: layout.scratch,
            dst: layout.f2,
        });
        out.push(retarget(instr, &|t| layout.block_start[t]));
    }
    out.push(Instruction::Halt);
    for i in 0..n {
        let before = out.len();
        handler_payload(i, handler_start[i], &mut out);
        debug_assert_eq!(out.len() - before, payload_sizes[i]);
        out.push(Instruction::Zero(layout.f1));
        out.push(Instruction::Inc(layout.f1));
        out.push(Instruction::Zero(layout.f2));
        out.push(Instruction::JumpEq {
            a: layout.f1,
            b: layout.f1,
            target: layout.block_start[i] + 1, // ret_i: resume at the swap
        });
    }
    Program::new(format!("{}(flags)", p.name), out)
}

fn build_instrumented(p: &Program, _unused: &[Reg]) -> TransformReport {
    let layout = flag_layout(p, 0);
    let out = build_with_handlers(p, &layout, |_i, _at, _out| {});
    let mut report = TransformReport::new(out);
    report.register_map = (0..p.register_count).map(|r| (r, r)).collect();
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
    ];
    report.notes = format!(
        "flags ({}, {}) swap once per simulated step; they compare equal at \
         the per-block check exactly when a limit stage has just been \
         passed, and are then re-armed to (1, 0)",
        layout.f1, layout.f2
    );
    report
}

fn retarget(instr: &Instruction, map: &dyn Fn(usize) -> usize) -> Instruction {
    match *instr {
        Instruction::JumpEq { a, b, target } => Instruction::JumpEq {
            a,
            b,
            target: map(target),
        },
        ref other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Budget, Engine, RunOutcome, TraceEventKind};
    use crate::isa::{has_errors, parse_asm, validate};
    use crate::oracle::OracleSpec;
    use crate::ordinal::Ordinal;
    use crate::transforms::library_program;
    use crate::vm::{LimitPolicy, MachineSpec};

    #[test]
    fn instrumented_busy_counter_flags() {
        let busy = library_program("busy_counter").unwrap();
        let report = instrument_limit_flags(&busy);
        assert!(!has_errors(&validate(&report.output)));
        let flags = report.aux(AuxRole::Flag);
        let (f1, f2) = (flags[0], flags[1]);

        // run on an unresetting ω+1 machine so the limit is passable
        let spec =
            MachineSpec::bounded(Ordinal::omega().succ(), LimitPolicy::Unresetting).unwrap();
        let oracle = OracleSpec::AllZero;
        let engine = Engine::new(&spec, &report.output, &oracle);
        let run = engine.run(&Ordinal::zero(), &Budget::default()).unwrap();

        // at the limit the flags are both 0
        let limit = run
            .trace
            .iter()
            .find(|e| e.event == TraceEventKind::Limit)
            .expect("a limit is reached");
        assert_eq!(limit.regs[f1], Ordinal::zero());
        assert_eq!(limit.regs[f2], Ordinal::zero());

        // at every recorded successor-stage check the flags differ (the
        // limit config itself, where they agree, is the Limit event above)
        let chk_lines: Vec<usize> = (0..busy.len()).map(|i| 1 + 5 * i).collect();
        for ev in &run.trace {
            if ev.event == TraceEventKind::Step && chk_lines.contains(&ev.line) {
                assert_ne!(ev.regs[f1], ev.regs[f2], "flags equal at {ev:?}");
            }
        }
        // immediately after the post-limit re-arm the flags read (1, 0):
        // the first visit of a ret line after the limit
        let rearm_state = run
            .trace
            .iter()
            .skip_while(|e| e.event != TraceEventKind::Limit)
            .find(|e| e.event == TraceEventKind::Step && e.line == 2)
            .expect("the handler returns to the first block");
        assert_eq!(rearm_state.regs[f1], Ordinal::one());
        assert_eq!(rearm_state.regs[f2], Ordinal::zero());
    }

    #[test]
    fn overflow_detector_distinguishes_reset_from_cofinal_zero() {
        let spec = MachineSpec::itrm();
        let oracle = OracleSpec::AllZero;
        let budget = Budget::default();

        // busy counter: watched register genuinely overflows at ω
        let busy = library_program("busy_counter").unwrap();
        let report = instrument_overflow_detection(&busy, 0);
        assert!(!has_errors(&validate(&report.output)));
        let companion = report.aux(AuxRole::Companion)[0];
        let engine = Engine::new(&spec, &report.output, &oracle);
        let run = engine.run(&Ordinal::zero(), &budget).unwrap();
        let limit = run
            .limit_events
            .first()
            .expect("busy counter reaches a limit");
        assert_eq!(limit.regs[0], Ordinal::zero());
        assert_eq!(limit.regs[companion], Ordinal::one());

        // zeroing loop: watched register is 0 cofinally, no overflow
        let z = crate::transforms::samples::zeroing_loop();
        let report = instrument_overflow_detection(&z, 0);
        let engine = Engine::new(&spec, &report.output, &oracle);
        let run = engine.run(&Ordinal::zero(), &budget).unwrap();
        let limit = run
            .limit_events
            .first()
            .expect("zeroing loop reaches a limit");
        assert_eq!(limit.regs[0], Ordinal::zero());
        assert_eq!(limit.regs[companion], Ordinal::zero());
        match run.outcome {
            RunOutcome::Diverges { .. } | RunOutcome::BudgetExhausted { .. } => {}
            ref other => panic!("unexpected {other:?}"),
        }
    }
}
