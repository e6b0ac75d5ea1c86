//! Compiler passes between machine types, and the shipped program library.
//!
//! Every pass is a pure program-to-program function that returns the output
//! together with the register bookkeeping a caller needs to interpret runs
//! of it.

mod compile;
mod inline;
mod instrument;
mod library;
mod recognizer;

pub use compile::{
    bisimulation_check_line, compile_resetting_to_unresetting, compile_wplus1_to_itrm,
    decode_value, encode_value,
};
pub use inline::{inline_subroutine, InlineError};
pub use instrument::{instrument_limit_flags, instrument_overflow_detection};
pub use library::{library_program, samples, all_programs, UnknownProgram, LIBRARY_NAMES};
pub use recognizer::make_recognizer;

use std::collections::HashMap;

use serde::Serialize;

use crate::isa::{format_asm, Program, Reg};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxRole {
    Flag,
    Counter,
    Scratch,
    Zero,
    One,
    Companion,
    OracleBit,
    CalleeBlock,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuxRegister {
    pub index: Reg,
    pub role: AuxRole,
}

/// What a pass produced: the output program, where the source registers
/// went, which fresh registers were added and why.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformReport {
    pub output: Program,
    pub register_map: HashMap<Reg, Reg>,
    pub auxiliary_registers: Vec<AuxRegister>,
    pub notes: String,
    /// For passes with a crash/stop branch: the line whose `HALT` signals
    /// the simulated machine became undefined rather than halting.
    pub crash_line: Option<usize>,
}

impl TransformReport {
    pub fn new(output: Program) -> TransformReport {
        TransformReport {
            output,
            register_map: HashMap::new(),
            auxiliary_registers: Vec::new(),
            notes: String::new(),
            crash_line: None,
        }
    }

    pub fn aux(&self, role: AuxRole) -> Vec<Reg> {
        self.auxiliary_registers
            .iter()
            .filter(|a| a.role == role)
            .map(|a| a.index)
            .collect()
    }
}

impl Serialize for TransformReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let n = 4 + usize::from(self.crash_line.is_some());
        let mut st = s.serialize_struct("TransformReport", n)?;
        st.serialize_field("outputProgram", &format_asm(&self.output))?;
        let map: std::collections::BTreeMap<String, Reg> = self
            .register_map
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        st.serialize_field("registerMap", &map)?;
        st.serialize_field("auxiliaryRegisters", &self.auxiliary_registers)?;
        st.serialize_field("notes", &self.notes)?;
        if let Some(line) = self.crash_line {
            st.serialize_field("crashLine", &line)?;
        }
        st.end()
    }
}
