//! Divergence certificates: strong loops in the recorded run.
//!
//! A strong loop is a pair of times σ < τ with identical machine states
//! (line and all registers) such that every intermediate state dominates the
//! state at σ: no register drops below its σ-value and the active line never
//! drops below σ's line. The block between σ and τ then repeats verbatim
//! forever — each register's liminf over the repeating block is its σ-value
//! again, so every limit the run passes through restores the σ-state — and
//! the machine never halts, under both the unresetting and resetting
//! policies.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::ordinal::Ordinal;
use crate::vm::Config;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    StrongLoop,
}

/// A sound witness of divergence: the run revisits the configuration it had
/// at `sigma_clock` at `tau_clock`, dominating it throughout in between.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivergenceCertificate {
    pub sigma_clock: Ordinal,
    pub tau_clock: Ordinal,
    pub kind: CertificateKind,
    /// The repeated state: active line and registers at σ (and τ).
    pub line: usize,
    pub registers: Vec<Ordinal>,
}

struct CertEntry {
    clock: Ordinal,
    line: u32,
    regs: Vec<Ordinal>,
    /// For limit entries: pointwise minima over the unobserved tail that the
    /// acceleration skipped (registers, line).
    tail_min: Option<(Vec<Ordinal>, u32)>,
}

/// Incremental strong-loop search over the recorded run.
pub(crate) struct LoopFinder {
    entries: Vec<CertEntry>,
    index: HashMap<u64, Vec<usize>>,
    saturated: bool,
}

const FINDER_CAP: usize = 400_000;

fn state_hash(line: u32, regs: &[Ordinal]) -> u64 {
    let mut h = DefaultHasher::new();
    line.hash(&mut h);
    regs.hash(&mut h);
    h.finish()
}

impl LoopFinder {
    pub fn new() -> LoopFinder {
        LoopFinder {
            entries: Vec::new(),
            index: HashMap::new(),
            saturated: false,
        }
    }

    pub fn push_step(&mut self, cfg: &Config) -> Option<DivergenceCertificate> {
        self.push(cfg.clock.clone(), cfg.line as u32, cfg.registers.clone(), None)
    }

    pub fn push_limit(
        &mut self,
        cfg: &Config,
        tail_min_regs: Vec<Ordinal>,
        tail_min_line: u32,
    ) -> Option<DivergenceCertificate> {
        self.push(
            cfg.clock.clone(),
            cfg.line as u32,
            cfg.registers.clone(),
            Some((tail_min_regs, tail_min_line)),
        )
    }

    fn push(
        &mut self,
        clock: Ordinal,
        line: u32,
        regs: Vec<Ordinal>,
        tail_min: Option<(Vec<Ordinal>, u32)>,
    ) -> Option<DivergenceCertificate> {
        if self.saturated {
            return None;
        }
        if self.entries.len() >= FINDER_CAP {
            // incomplete from here on, never unsound
            self.saturated = true;
            return None;
        }
        let h = state_hash(line, &regs);
        let candidates = self.index.get(&h).cloned().unwrap_or_default();
        let tau = self.entries.len();
        self.entries.push(CertEntry {
            clock,
            line,
            regs,
            tail_min,
        });
        self.index.entry(h).or_default().push(tau);
        for sigma in candidates {
            if let Some(cert) = self.check_pair(sigma, tau) {
                return Some(cert);
            }
        }
        None
    }

    fn check_pair(&self, sigma: usize, tau: usize) -> Option<DivergenceCertificate> {
        let s = &self.entries[sigma];
        let t = &self.entries[tau];
        if s.clock >= t.clock || s.line != t.line || s.regs != t.regs {
            return None;
        }
        let dominates_regs =
            |regs: &[Ordinal]| regs.iter().zip(&s.regs).all(|(a, b)| a >= b);
        for mid in &self.entries[sigma + 1..tau] {
            if mid.line < s.line || !dominates_regs(&mid.regs) {
                return None;
            }
            if let Some((mins, min_line)) = &mid.tail_min {
                if *min_line < s.line || !dominates_regs(mins) {
                    return None;
                }
            }
        }
        // τ's own skipped tail lies inside (σ, τ) as well
        if let Some((mins, min_line)) = &t.tail_min {
            if *min_line < s.line || !dominates_regs(mins) {
                return None;
            }
        }
        Some(DivergenceCertificate {
            sigma_clock: s.clock.clone(),
            tau_clock: t.clock.clone(),
            kind: CertificateKind::StrongLoop,
            line: s.line as usize,
            registers: s.regs.clone(),
        })
    }
}

/// Searches a plain recorded trace (contiguous configs) for the first strong
/// loop.
pub fn detect_strong_loop(trace: &[Config]) -> Option<DivergenceCertificate> {
    let mut finder = LoopFinder::new();
    trace.iter().find_map(|c| finder.push_step(c))
}
