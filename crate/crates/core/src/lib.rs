//! Symbolic simulation of transfinite register machines.
//!
//! The crate models α-register machines: register machines whose registers
//! hold ordinals below a bound α and whose runs extend through transfinite
//! time, with the active line and register contents at limit stages given by
//! limits inferior of their earlier values. Three limit policies are
//! supported (classical, unresetting, resetting), together with
//!
//! * exact Cantor-normal-form ordinal arithmetic ([`ordinal`]),
//! * the machine ISA, assembler and relocation tooling ([`isa`]),
//! * finitely-described real oracles ([`oracle`]),
//! * single-step and limit-step semantics ([`vm`]),
//! * a run engine with sound limit acceleration, divergence certificates and
//!   a brute-force reference ([`engine`]),
//! * machine-to-machine compilation passes ([`transforms`]).

pub mod engine;
pub mod isa;
pub mod oracle;
pub mod ordinal;
pub mod transforms;
pub mod vm;

pub use engine::{Budget, DivergenceCertificate, RunOutcome, RunReport};
pub use isa::{Instruction, Program};
pub use oracle::OracleSpec;
pub use ordinal::Ordinal;
pub use vm::{Config, LimitPolicy, MachineSpec};
