//! The register-machine instruction set, program representation, the
//! assembler/disassembler and relocation used by the compiler passes.
//!
//! The ISA follows the unlimited-register-machine tradition: increment, copy,
//! oracle read, jump-on-equality and stop, plus an explicit zeroing
//! instruction. `JZ r label` is assembler sugar for a `JEQ` against a
//! designated always-zero register declared with a `.zeroreg` directive.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Reg = usize;
pub type Line = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Instruction {
    /// Set register to 0.
    Zero(Reg),
    /// Increase register content by 1.
    Inc(Reg),
    /// Copy `src` into `dst`.
    Copy { src: Reg, dst: Reg },
    /// Read the oracle bit at the index held in `index` into `dst`.
    Read { index: Reg, dst: Reg },
    /// Jump to `target` when the two registers hold equal ordinals.
    JumpEq { a: Reg, b: Reg, target: Line },
    /// Stop.
    Halt,
}

impl Instruction {
    pub fn registers(&self) -> Vec<Reg> {
        match *self {
            Instruction::Zero(r) | Instruction::Inc(r) => vec![r],
            Instruction::Copy { src, dst } => vec![src, dst],
            Instruction::Read { index, dst } => vec![index, dst],
            Instruction::JumpEq { a, b, .. } => vec![a, b],
            Instruction::Halt => vec![],
        }
    }

    /// The register written by this instruction, if any.
    pub fn written(&self) -> Option<Reg> {
        match *self {
            Instruction::Zero(r) | Instruction::Inc(r) => Some(r),
            Instruction::Copy { dst, .. } | Instruction::Read { dst, .. } => Some(dst),
            _ => None,
        }
    }

    /// Registers read (not written) by this instruction.
    pub fn reads(&self) -> Vec<Reg> {
        match *self {
            Instruction::Inc(r) => vec![r],
            Instruction::Copy { src, .. } => vec![src],
            Instruction::Read { index, .. } => vec![index],
            Instruction::JumpEq { a, b, .. } => vec![a, b],
            _ => vec![],
        }
    }
}

/// A finite sequence of instructions. Falling past the last line halts the
/// machine; `register_count` is one past the highest register index used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub name: String,
    pub instructions: Vec<Instruction>,
    pub register_count: usize,
}

impl Program {
    pub fn new(name: impl Into<String>, instructions: Vec<Instruction>) -> Program {
        let register_count = instructions
            .iter()
            .flat_map(|i| i.registers())
            .max()
            .map_or(0, |r| r + 1);
        Program {
            name: name.into(),
            instructions,
            register_count,
        }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A validation finding; an empty diagnostic list means the program is well
/// formed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: Option<Line>,
    pub message: String,
}

/// Checks program invariants: jump targets at most one past the end and a
/// consistent register count. Registers that are written but never read are
/// reported as warnings.
pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, instr) in p.instructions.iter().enumerate() {
        if let Instruction::JumpEq { target, .. } = instr {
            if *target > p.instructions.len() {
                out.push(Diagnostic {
                    severity: Severity::Error,
                    line: Some(i),
                    message: format!(
                        "jump target {target} out of range (program has {} lines)",
                        p.instructions.len()
                    ),
                });
            }
        }
    }
    let needed = p
        .instructions
        .iter()
        .flat_map(|i| i.registers())
        .max()
        .map_or(0, |r| r + 1);
    if p.register_count < needed {
        out.push(Diagnostic {
            severity: Severity::Error,
            line: None,
            message: format!(
                "register_count {} is below the highest register index used ({})",
                p.register_count,
                needed - 1
            ),
        });
    }
    let mut read: Vec<bool> = vec![false; needed.max(1)];
    let mut written: Vec<bool> = vec![false; needed.max(1)];
    for instr in &p.instructions {
        for r in instr.reads() {
            read[r] = true;
        }
        if let Some(r) = instr.written() {
            written[r] = true;
        }
    }
    for r in 0..needed {
        // R0 is the output register, writing it without reading is normal
        if r != 0 && written[r] && !read[r] {
            out.push(Diagnostic {
                severity: Severity::Warning,
                line: None,
                message: format!("register {r} is written but never read"),
            });
        }
    }
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelocateError {
    #[error("register map is not injective: {0} and {1} both map to {2}")]
    NotInjective(Reg, Reg, Reg),
    #[error("register map does not cover register {0}")]
    Unmapped(Reg),
}

/// Renames registers through an injective map and shifts every jump target by
/// `line_offset`; semantics are preserved modulo the renaming.
pub fn relocate(
    p: &Program,
    line_offset: usize,
    reg_map: &HashMap<Reg, Reg>,
) -> Result<Program, RelocateError> {
    let mut seen: HashMap<Reg, Reg> = HashMap::new();
    for (&from, &to) in reg_map {
        if let Some(&prev) = seen.get(&to) {
            let (a, b) = if prev < from { (prev, from) } else { (from, prev) };
            return Err(RelocateError::NotInjective(a, b, to));
        }
        seen.insert(to, from);
    }
    let map = |r: Reg| reg_map.get(&r).copied().ok_or(RelocateError::Unmapped(r));
    let mut instructions = Vec::with_capacity(p.instructions.len());
    for instr in &p.instructions {
        instructions.push(match *instr {
            Instruction::Zero(r) => Instruction::Zero(map(r)?),
            Instruction::Inc(r) => Instruction::Inc(map(r)?),
            Instruction::Copy { src, dst } => Instruction::Copy {
                src: map(src)?,
                dst: map(dst)?,
            },
            Instruction::Read { index, dst } => Instruction::Read {
                index: map(index)?,
                dst: map(dst)?,
            },
            Instruction::JumpEq { a, b, target } => Instruction::JumpEq {
                a: map(a)?,
                b: map(b)?,
                target: target + line_offset,
            },
            Instruction::Halt => Instruction::Halt,
        });
    }
    Ok(Program::new(p.name.clone(), instructions))
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct AsmError {
    pub line: usize,
    pub msg: String,
}

fn asm_err(line: usize, msg: impl Into<String>) -> AsmError {
    AsmError {
        line,
        msg: msg.into(),
    }
}

/// Parses assembly text into a program.
///
/// One instruction per line, optional `label:` prefix, `#` comments, and an
/// optional `.zeroreg r` header naming the scratch register that the `JZ`
/// macro expands against.
pub fn parse_asm(name: impl Into<String>, text: &str) -> Result<Program, AsmError> {
    struct RawLine {
        lineno: usize,
        mnemonic: String,
        args: Vec<String>,
    }

    let mut zeroreg: Option<Reg> = None;
    let mut labels: HashMap<String, Line> = HashMap::new();
    let mut raw: Vec<RawLine> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let code = line.split('#').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        if let Some(rest) = code.strip_prefix(".zeroreg") {
            let r: Reg = rest
                .trim()
                .parse()
                .map_err(|_| asm_err(lineno, ".zeroreg needs a register number"))?;
            zeroreg = Some(r);
            continue;
        }
        let mut code = code;
        while let Some(colon) = code.find(':') {
            let (label, rest) = code.split_at(colon);
            let label = label.trim();
            if label.is_empty() || label.contains(char::is_whitespace) {
                return Err(asm_err(lineno, "malformed label"));
            }
            if labels.insert(label.to_string(), raw.len()).is_some() {
                return Err(asm_err(lineno, format!("duplicate label '{label}'")));
            }
            code = rest[1..].trim();
        }
        if code.is_empty() {
            continue; // label-only line targets the next instruction
        }
        let mut parts = code.split_whitespace();
        let mnemonic = parts.next().unwrap().to_uppercase();
        raw.push(RawLine {
            lineno,
            mnemonic,
            args: parts.map(str::to_string).collect(),
        });
    }

    let resolve_target = |tok: &str, lineno: usize, len: usize| -> Result<Line, AsmError> {
        if let Some(&l) = labels.get(tok) {
            return Ok(l);
        }
        if let Ok(n) = tok.parse::<Line>() {
            if n <= len {
                return Ok(n);
            }
            return Err(asm_err(lineno, format!("jump target {n} out of range")));
        }
        Err(asm_err(lineno, format!("unresolved label '{tok}'")))
    };
    let parse_reg = |tok: &str, lineno: usize| -> Result<Reg, AsmError> {
        tok.parse()
            .map_err(|_| asm_err(lineno, format!("bad register '{tok}'")))
    };

    let len = raw.len();
    let mut instructions = Vec::with_capacity(len);
    for RawLine {
        lineno,
        mnemonic,
        args,
    } in &raw
    {
        let lineno = *lineno;
        let need = |n: usize| -> Result<(), AsmError> {
            if args.len() != n {
                Err(asm_err(
                    lineno,
                    format!("{mnemonic} expects {n} operand(s), got {}", args.len()),
                ))
            } else {
                Ok(())
            }
        };
        let instr = match mnemonic.as_str() {
            "ZERO" => {
                need(1)?;
                Instruction::Zero(parse_reg(&args[0], lineno)?)
            }
            "INC" => {
                need(1)?;
                Instruction::Inc(parse_reg(&args[0], lineno)?)
            }
            "COPY" => {
                need(2)?;
                Instruction::Copy {
                    src: parse_reg(&args[0], lineno)?,
                    dst: parse_reg(&args[1], lineno)?,
                }
            }
            "READ" => {
                need(2)?;
                Instruction::Read {
                    index: parse_reg(&args[0], lineno)?,
                    dst: parse_reg(&args[1], lineno)?,
                }
            }
            "JEQ" => {
                need(3)?;
                Instruction::JumpEq {
                    a: parse_reg(&args[0], lineno)?,
                    b: parse_reg(&args[1], lineno)?,
                    target: resolve_target(&args[2], lineno, len)?,
                }
            }
            "JZ" => {
                need(2)?;
                let z = zeroreg
                    .ok_or_else(|| asm_err(lineno, "JZ requires a .zeroreg directive"))?;
                Instruction::JumpEq {
                    a: parse_reg(&args[0], lineno)?,
                    b: z,
                    target: resolve_target(&args[1], lineno, len)?,
                }
            }
            "HALT" => {
                need(0)?;
                Instruction::Halt
            }
            other => return Err(asm_err(lineno, format!("unknown mnemonic '{other}'"))),
        };
        instructions.push(instr);
    }
    // labels may point one past the end (halt by falling off)
    for (label, &l) in &labels {
        if l > len {
            return Err(asm_err(0, format!("label '{label}' has no instruction")));
        }
    }
    Ok(Program::new(name, instructions))
}

/// Canonical, re-parsable listing: numeric operands and line-number targets.
pub fn format_asm(p: &Program) -> String {
    let mut out = String::new();
    for instr in &p.instructions {
        let line = match *instr {
            Instruction::Zero(r) => format!("ZERO {r}"),
            Instruction::Inc(r) => format!("INC {r}"),
            Instruction::Copy { src, dst } => format!("COPY {src} {dst}"),
            Instruction::Read { index, dst } => format!("READ {index} {dst}"),
            Instruction::JumpEq { a, b, target } => format!("JEQ {a} {b} {target}"),
            Instruction::Halt => "HALT".to_string(),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_asm(self))
    }
}
