//! The shipped program library.

use thiserror::Error;

use crate::isa::{parse_asm, Program};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown library program '{0}'")]
pub struct UnknownProgram(pub String);

/// Returns one of the five named library programs.
///
/// * `recognize_omega` — an unresetting (ω+1)-program that halts with 1
///   exactly on input ω and 0 on every other ordinal input: a counter runs
///   toward the input while two flags track limit stages; if the counter
///   meets the input at a limit, the input was ω.
/// * `busy_counter` — increments R0 forever.
/// * `nested_counter` — an inner counter and flag pair drive an outer limit
///   counter; on machines that keep ordinal values its accumulator reaches
///   ω·k at the k-th limit, exercising nested acceleration up to ω².
/// * `bitwise_compare` — reads the oracle bit at the input index and halts
///   with it.
/// * `self_loop` — a one-line unconditional loop.
pub fn library_program(name: &str) -> Result<Program, UnknownProgram> {
    let text = match name {
        "recognize_omega" => RECOGNIZE_OMEGA,
        "busy_counter" => BUSY_COUNTER,
        "nested_counter" => NESTED_COUNTER,
        "bitwise_compare" => BITWISE_COMPARE,
        "self_loop" => SELF_LOOP,
        other => return Err(UnknownProgram(other.to_string())),
    };
    Ok(parse_asm(name, text).expect("library programs are well-formed"))
}

pub const LIBRARY_NAMES: [&str; 5] = [
    "recognize_omega",
    "busy_counter",
    "nested_counter",
    "bitwise_compare",
    "self_loop",
];

// R0 input x, R1 counter, R2/R3 limit flags, R4 always zero, R5 swap scratch.
const RECOGNIZE_OMEGA: &str = "\
# accepts exactly omega on an unresetting (omega+1)-machine
        INC 2           # arm flags: (1, 0)
head:   JEQ 1 0 found   # counter reached the input?
        COPY 2 5        # swap flags
        COPY 3 2
        COPY 5 3
        INC 1
        JEQ 4 4 head
found:  JEQ 2 3 limit   # flags equal only at a limit stage
        ZERO 0          # met at a successor stage: input was finite
        HALT
limit:  ZERO 0          # met at a limit stage: input was omega
        INC 0
        HALT
";

const BUSY_COUNTER: &str = "\
        INC 0
        JEQ 1 1 0
";

// R0 outer accumulator, R1 inner counter, R2/R3 flags, R4 always zero,
// R5 swap scratch, R6 counts detected limits.
const NESTED_COUNTER: &str = "\
        INC 2           # arm flags: (1, 0)
loop:   COPY 2 5        # swap flags
        COPY 3 2
        COPY 5 3
        INC 0
        INC 1
        JEQ 2 3 hit     # flags equal: a limit just passed
        JEQ 4 4 loop
hit:    ZERO 1          # restart the inner counter
        INC 6
        ZERO 2          # re-arm flags
        INC 2
        ZERO 3
        JEQ 4 4 loop
";

const BITWISE_COMPARE: &str = "\
        READ 0 1
        COPY 1 0
        HALT
";

const SELF_LOOP: &str = "\
        JEQ 0 0 0
";

/// Additional programs shipped for the harness and tests (computing
/// programs for the recognizer pass, and small overflow exercises).
pub mod samples {
    use crate::isa::{parse_asm, Program};

    /// Computes the empty real: every bit is 0.
    pub fn empty_computer() -> Program {
        parse_asm("empty_computer", "ZERO 0\nHALT").expect("well-formed")
    }

    /// Computes the even numbers: bit j is 1 iff j is even, via a two-exit
    /// counting loop.
    pub fn evens_computer() -> Program {
        parse_asm(
            "evens_computer",
            "\
count:  JEQ 1 0 even
        INC 1
        JEQ 1 0 odd
        INC 1
        JEQ 2 2 count
even:   ZERO 0
        INC 0
        HALT
odd:    ZERO 0
        HALT
",
        )
        .expect("well-formed")
    }

    /// Two registers that overflow together at ω.
    pub fn two_register_overflow() -> Program {
        parse_asm("two_register_overflow", "INC 0\nINC 1\nJEQ 2 2 0").expect("well-formed")
    }

    /// Zeroes the watched register once per iteration: cofinally zero at ω
    /// without an overflow.
    pub fn zeroing_loop() -> Program {
        parse_asm("zeroing_loop", "ZERO 0\nINC 0\nJEQ 1 1 0").expect("well-formed")
    }

    pub fn all() -> Vec<Program> {
        vec![
            empty_computer(),
            evens_computer(),
            two_register_overflow(),
            zeroing_loop(),
        ]
    }
}

/// Every shipped program, for round-trip and validation sweeps.
pub fn all_programs() -> Vec<Program> {
    let mut out: Vec<Program> = LIBRARY_NAMES
        .iter()
        .map(|n| library_program(n).unwrap())
        .collect();
    out.extend(samples::all());
    out
}
