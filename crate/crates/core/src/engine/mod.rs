//! Transfinite run engine.
//!
//! Drives runs of α-register machines through successor steps and verified
//! limit jumps. Acceleration is certificate-driven and sound-only: the
//! engine fast-forwards to the next limit clock exactly when the window
//! verification in [`detect`] succeeds, and otherwise keeps stepping until
//! the budget runs out. Divergence is only ever reported with a strong-loop
//! certificate.

mod affine;
mod certificate;
mod detect;
mod meta;
mod reference;
mod run;

pub use certificate::{detect_strong_loop, CertificateKind, DivergenceCertificate};
pub use detect::{evaluate_limit, PeriodSummary, PhaseDescription};
pub use reference::{brute_liminf_from, brute_liminf_reference, BruteOutcome, Stat};
pub use run::Engine;

use serde::{Deserialize, Serialize};

use crate::ordinal::Ordinal;

/// Desk-scale truncation of transfinite time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_successor_steps: u64,
    /// How deep accelerations may nest: 1 reaches ω·k, 2 reaches ω², …
    pub max_limit_depth: u32,
    pub max_clock: Ordinal,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_successor_steps: 100_000,
            max_limit_depth: 3,
            max_clock: Ordinal::omega_pow(Ordinal::from_nat(3u32), 1u32),
        }
    }
}

impl Budget {
    pub fn with_steps(mut self, steps: u64) -> Self {
        self.max_successor_steps = steps;
        self
    }

    pub fn with_max_clock(mut self, clock: Ordinal) -> Self {
        self.max_clock = clock;
        self
    }

    pub fn with_limit_depth(mut self, depth: u32) -> Self {
        self.max_limit_depth = depth;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum RunOutcome {
    Halted {
        output: Ordinal,
        clock: Ordinal,
    },
    OverflowUndefined {
        register: usize,
        clock: Ordinal,
    },
    Diverges {
        certificate: DivergenceCertificate,
    },
    ClassicalLimitReached {
        clock: Ordinal,
    },
    BudgetExhausted {
        reason: String,
    },
}

impl RunOutcome {
    pub fn is_halted(&self) -> bool {
        matches!(self, RunOutcome::Halted { .. })
    }

    pub fn halted_output(&self) -> Option<&Ordinal> {
        match self {
            RunOutcome::Halted { output, .. } => Some(output),
            _ => None,
        }
    }
}

/// One recorded trace event, serialized as a JSON-lines object.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub clock: Ordinal,
    pub line: usize,
    pub regs: Vec<Ordinal>,
    pub event: TraceEventKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<Ordinal>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceEventKind {
    Step,
    Limit,
    OverflowReset,
    Certificate,
}

/// Per-register classification of a verified limit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "class", content = "value")]
pub enum LimitClass {
    /// Some phase of the period holds this value constantly; it is the
    /// register's liminf.
    Stabilized(Ordinal),
    /// Every phase grows; the register's liminf is this supremum.
    Growing(Ordinal),
}

/// A limit the run passed through, with the accelerator's view of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimitEventInfo {
    pub clock: Ordinal,
    pub line: usize,
    pub regs: Vec<Ordinal>,
    pub classes: Vec<LimitClass>,
    /// 0 for ω-scale limits, 1 for limits of limits, …
    pub level: usize,
}

/// The recorded transfinite run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub trace: Vec<TraceEvent>,
    pub limit_events: Vec<LimitEventInfo>,
    pub steps_executed: u64,
}

impl RunReport {
    /// Serializes the trace as JSON lines.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for ev in &self.trace {
            out.push_str(&serde_json::to_string(ev).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }
}
