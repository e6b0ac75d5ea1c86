//! Period detection: sound window self-similarity over a successor-step
//! trace, with folding of inner loops whose trip counts grow linearly.
//!
//! Detection finds three consecutive windows at the end of the trace with
//! identical control structure, fits every register at every window position
//! with an affine form over the window index (and the iteration counter
//! inside folded loops), and then proves the pattern persists:
//!
//! * every fitted form agrees exactly with all observations (the observation
//!   grid pins the affine coefficients, so the machine's per-instruction
//!   update equations hold at the level of forms, not just points);
//! * every branch outcome is stable for all variable values
//!   ([`affine::jeq_stable`]);
//! * every oracle read is stable under the oracle's tail descriptor;
//! * no increment can hit the register bound.
//!
//! Together these give an induction: from the anchor on, every future window
//! repeats the pattern, so the liminf state at the next limit clock is fully
//! determined. Anything the checks cannot decide simply fails detection —
//! the engine never guesses transfinite behaviour.

use num_bigint::BigUint;
use serde::Serialize;

use crate::engine::affine::{
    inc_can_overflow, jeq_stable, stable_read_bit, Form, Region, Tri, TripCount, VAR_LOOP,
    VAR_WINDOW,
};
use crate::isa::{Instruction, Program};
use crate::oracle::OracleSpec;
use crate::ordinal::Ordinal;
use crate::vm::MachineSpec;

/// One recorded successor step: the configuration (line and registers)
/// before executing `line`.
#[derive(Clone, Debug)]
pub struct StepRec {
    pub line: u32,
    pub regs: Vec<Ordinal>,
}

/// Per-register behaviour at one window position, as seen across windows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PhaseDescription {
    /// The value recurs unchanged in every window.
    Constant(Ordinal),
    /// The value grows by `delta` per window from `base`.
    Growing { base: Ordinal, delta: Ordinal },
}

/// A verified self-similar window pattern.
///
/// `control_path` and `length` describe the first verified window;
/// `registers[r]` lists the per-position descriptions of register `r` at the
/// detection level's window variable.
#[derive(Clone, Debug)]
pub struct PeriodSummary {
    pub start_clock: Ordinal,
    pub length: usize,
    pub control_path: Vec<usize>,
    pub registers: Vec<Vec<PhaseDescription>>,
    pub oracle_reads_stable: bool,
    pub(crate) pattern: Pattern,
    /// Acceleration level this summary was detected at: 0 over successor
    /// steps, n ≥ 1 over the limit configs of level n−1.
    pub level: usize,
}

/// One position of a verified pattern: the executed line, the line the
/// pattern continues with (used to pin branch outcomes), the trip bound when
/// the position lies inside a folded loop, and the fitted forms.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct PatPos {
    pub line: u32,
    pub next_line: u32,
    pub trip: Option<TripCount>,
    pub forms: Vec<Form>,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Pattern {
    pub positions: Vec<PatPos>,
}

impl Pattern {
    /// Lines occurring in the pattern. The liminf of the active line over the
    /// extrapolated tail is their minimum: every position recurs cofinally.
    pub fn min_line(&self) -> u32 {
        self.positions.iter().map(|p| p.line).min().unwrap_or(0)
    }

}

/// Evaluates the liminf of line and registers demanded by the limit rule.
///
/// Every position of a verified window recurs cofinally in the extrapolated
/// tail, so the liminf of a register is the minimum over positions of: the
/// position's value when it stays constant, or the supremum
/// `limit_of_progression(base, delta)` when it grows.
pub fn evaluate_limit(ps: &PeriodSummary) -> (usize, Vec<Ordinal>) {
    let line = ps.pattern.min_line() as usize;
    let regs = ps
        .registers
        .iter()
        .map(|descs| {
            descs
                .iter()
                .map(|d| match d {
                    PhaseDescription::Constant(v) => v.clone(),
                    PhaseDescription::Growing { base, delta } => {
                        Ordinal::limit_of_progression(base, delta)
                            .expect("growing description has positive delta")
                    }
                })
                .min()
                .expect("at least one phase per register")
        })
        .collect();
    (line, regs)
}

impl PeriodSummary {
    /// Pointwise minimum of every register over the whole extrapolated tail:
    /// slopes are nonnegative, so each position's minimum is its base.
    pub fn tail_min_regs(&self) -> Vec<Ordinal> {
        self.registers
            .iter()
            .map(|descs| {
                descs
                    .iter()
                    .map(|d| match d {
                        PhaseDescription::Constant(v) => v.clone(),
                        PhaseDescription::Growing { base, .. } => base.clone(),
                    })
                    .min()
                    .expect("at least one phase per register")
            })
            .collect()
    }

    pub fn tail_min_line(&self) -> usize {
        self.pattern.min_line() as usize
    }
}

/// What the level-0 detector works on: the steps of the current segment
/// (since the last limit), plus the clock at the segment start.
pub(crate) struct SegmentTrace {
    pub base_clock: Ordinal,
    pub steps: Vec<StepRec>,
}

impl SegmentTrace {
    pub fn new(base_clock: Ordinal) -> SegmentTrace {
        SegmentTrace {
            base_clock,
            steps: Vec::new(),
        }
    }

    pub fn clock_at(&self, idx: usize) -> Ordinal {
        self.base_clock.add_nat(idx as u64)
    }
}

const MAX_BODY: usize = 48;
const MAX_FAST_WINDOW: usize = 768;
const MAX_TOKEN_WINDOW: usize = 512;
const TOKENIZE_TAIL: usize = 8192;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Plain {
        idx: usize,
    },
    /// `reps` complete traversals of the `body`-long line block at `start`.
    Loop {
        start: usize,
        body: usize,
        reps: usize,
    },
}

impl Token {
    fn step_len(&self) -> usize {
        match *self {
            Token::Plain { .. } => 1,
            Token::Loop { body, reps, .. } => body * reps,
        }
    }

    fn start(&self) -> usize {
        match *self {
            Token::Plain { idx } => idx,
            Token::Loop { start, .. } => start,
        }
    }
}

/// Greedy left-to-right folding of maximal runs of a repeating line block.
///
/// A block only counts as a loop run from three repetitions up: two
/// repetitions arise spuriously whenever a longer phase starts with the
/// whole of a shorter one, and folding those would wreck the alignment of
/// genuine windows.
fn tokenize(lines: &[u32], offset: usize) -> Vec<Token> {
    let n = lines.len();
    let mut tokens = Vec::new();
    let mut i = 0;
    'outer: while i < n {
        for body in 1..=MAX_BODY.min((n - i) / 3) {
            if lines[i..i + body] == lines[i + body..i + 2 * body]
                && lines[i..i + body] == lines[i + 2 * body..i + 3 * body]
            {
                let mut reps = 3;
                while i + (reps + 1) * body <= n
                    && lines[i..i + body] == lines[i + reps * body..i + (reps + 1) * body]
                {
                    reps += 1;
                }
                tokens.push(Token::Loop {
                    start: offset + i,
                    body,
                    reps,
                });
                i += reps * body;
                continue 'outer;
            }
        }
        tokens.push(Token::Plain { idx: offset + i });
        i += 1;
    }
    tokens
}

/// Do two tokens have the same control structure?
fn token_matches(steps: &[StepRec], a: &Token, b: &Token) -> bool {
    match (a, b) {
        (Token::Plain { idx: i }, Token::Plain { idx: j }) => steps[*i].line == steps[*j].line,
        (
            Token::Loop {
                start: i, body: m, ..
            },
            Token::Loop {
                start: j, body: k, ..
            },
        ) => {
            m == k
                && (0..*m).all(|q| steps[i + q].line == steps[j + q].line)
        }
        _ => false,
    }
}

/// Fits `slope` such that `v1 = v0 + slope` and `v2 = v1 + slope`.
fn fit_slope(v0: &Ordinal, v1: &Ordinal, v2: &Ordinal) -> Option<Ordinal> {
    let d1 = v1.left_sub(v0)?;
    let d2 = v2.left_sub(v1)?;
    if d1 == d2 {
        Some(d1)
    } else {
        None
    }
}

pub(crate) struct DetectCtx<'a> {
    pub program: &'a Program,
    pub oracle: &'a OracleSpec,
    pub spec: &'a MachineSpec,
}

impl DetectCtx<'_> {
    /// Attempts detection on the segment's trailing windows. `thorough`
    /// additionally tries loop folding.
    pub fn detect(&self, seg: &SegmentTrace, thorough: bool) -> Option<PeriodSummary> {
        if let Some(s) = self.detect_plain(seg) {
            return Some(s);
        }
        if thorough {
            return self.detect_folded(seg);
        }
        None
    }

    /// Fast path: all-plain windows of equal step length.
    fn detect_plain(&self, seg: &SegmentTrace) -> Option<PeriodSummary> {
        let steps = &seg.steps;
        let n = steps.len();
        if n < 3 {
            return None;
        }
        // rolling hash over the line sequence for O(1) window comparisons
        let hashes = prefix_hashes(steps);
        let max_l = (n / 3).min(MAX_FAST_WINDOW);
        for l in 1..=max_l {
            let w0 = n - 3 * l;
            if range_hash(&hashes, w0, l) != range_hash(&hashes, w0 + l, l)
                || range_hash(&hashes, w0 + l, l) != range_hash(&hashes, w0 + 2 * l, l)
            {
                continue;
            }
            if !(0..l).all(|q| {
                steps[w0 + q].line == steps[w0 + l + q].line
                    && steps[w0 + q].line == steps[w0 + 2 * l + q].line
            }) {
                continue;
            }
            let tokens: Vec<Token> = (w0..w0 + l).map(|idx| Token::Plain { idx }).collect();
            if let Some(summary) = self.verify_windows(seg, &tokens, l, w0) {
                return Some(summary);
            }
        }
        None
    }

    /// Folding path: tokenize the tail of the segment, then look for three
    /// aligned windows of tokens.
    fn detect_folded(&self, seg: &SegmentTrace) -> Option<PeriodSummary> {
        let steps = &seg.steps;
        let n = steps.len();
        if n < 6 {
            return None;
        }
        let from = n.saturating_sub(TOKENIZE_TAIL);
        let lines: Vec<u32> = steps[from..].iter().map(|s| s.line).collect();
        let tokens = tokenize(&lines, from);
        // drop a trailing loop token: its rep count may still be growing
        let usable = match tokens.last() {
            Some(Token::Loop { .. }) => &tokens[..tokens.len() - 1],
            _ => &tokens[..],
        };
        let t = usable.len();
        if t < 3 {
            return None;
        }
        let max_l = (t / 3).min(MAX_TOKEN_WINDOW);
        for l in 1..=max_l {
            let w0 = t - 3 * l;
            // require at least one folded loop; plain-only is the fast path
            if !usable[w0..].iter().any(|tok| matches!(tok, Token::Loop { .. })) {
                continue;
            }
            let ok = (0..l).all(|q| {
                token_matches(steps, &usable[w0 + q], &usable[w0 + l + q])
                    && token_matches(steps, &usable[w0 + q], &usable[w0 + 2 * l + q])
            });
            if !ok {
                continue;
            }
            let anchor = usable[w0].start();
            if let Some(summary) =
                self.verify_windows(seg, &usable[w0..w0 + l], l, anchor)
            {
                return Some(summary);
            }
        }
        None
    }

    /// Builds and checks the fits and stability conditions for three windows
    /// whose first window is `window_tokens` (token positions `w0..w0+l` of
    /// the aligned triple). On success produces the verified summary.
    fn verify_windows(
        &self,
        seg: &SegmentTrace,
        window_tokens: &[Token],
        _l: usize,
        anchor: usize,
    ) -> Option<PeriodSummary> {
        let steps = &seg.steps;
        let nregs = steps[anchor].regs.len();
        // step offsets of the three windows
        let w0_start = anchor;
        let w0_len: usize = window_tokens.iter().map(Token::step_len).sum();

        // Re-derive the second and third windows token-by-token: same
        // structure, possibly different loop reps.
        let mut cursor = w0_start + w0_len;
        let mut windows: Vec<Vec<Token>> = vec![window_tokens.to_vec()];
        for _ in 1..3 {
            let mut toks = Vec::with_capacity(window_tokens.len());
            for tok in window_tokens {
                match *tok {
                    Token::Plain { .. } => {
                        if cursor >= steps.len() {
                            return None;
                        }
                        toks.push(Token::Plain { idx: cursor });
                        cursor += 1;
                    }
                    Token::Loop { start, body, .. } => {
                        // count reps of the same body block at the cursor
                        let mut reps = 0;
                        while cursor + (reps + 1) * body <= steps.len()
                            && (0..body).all(|q| {
                                steps[cursor + reps * body + q].line == steps[start + q].line
                            })
                        {
                            reps += 1;
                        }
                        if reps == 0 {
                            return None;
                        }
                        toks.push(Token::Loop {
                            start: cursor,
                            body,
                            reps,
                        });
                        cursor += reps * body;
                    }
                }
            }
            windows.push(toks);
        }
        if cursor > steps.len() {
            return None;
        }

        // fit forms per token position
        let mut positions: Vec<PatPos> = Vec::new();
        for ti in 0..window_tokens.len() {
            let (t0, t1, t2) = (&windows[0][ti], &windows[1][ti], &windows[2][ti]);
            match (t0, t1, t2) {
                (Token::Plain { idx: i0 }, Token::Plain { idx: i1 }, Token::Plain { idx: i2 }) => {
                    let mut forms = Vec::with_capacity(nregs);
                    for r in 0..nregs {
                        let slope = fit_slope(
                            &steps[*i0].regs[r],
                            &steps[*i1].regs[r],
                            &steps[*i2].regs[r],
                        )?;
                        if !slope.is_finite() {
                            return None;
                        }
                        forms.push(
                            Form::constant(steps[*i0].regs[r].clone())
                                .with_slope(VAR_WINDOW, slope),
                        );
                    }
                    positions.push(PatPos {
                        line: steps[*i0].line,
                        next_line: 0, // filled below
                        trip: None,
                        forms,
                    });
                }
                (
                    Token::Loop {
                        start: s0,
                        body,
                        reps: r0,
                    },
                    Token::Loop {
                        start: s1, reps: r1, ..
                    },
                    Token::Loop {
                        start: s2, reps: r2, ..
                    },
                ) => {
                    let body = *body;
                    // trips must fit t0 + dt·w
                    if r1 < r0 || r2 < r1 || r1 - r0 != r2 - r1 {
                        return None;
                    }
                    let trip = TripCount {
                        t0: BigUint::from(*r0),
                        dt: BigUint::from(r1 - r0),
                    };
                    let starts = [*s0, *s1, *s2];
                    let reps = [*r0, *r1, *r2];
                    for q in 0..body {
                        let mut forms = Vec::with_capacity(nregs);
                        for r in 0..nregs {
                            // iteration slope from the first run, verified
                            // across every iteration of every run
                            let du = if reps[0] >= 2 {
                                steps[s0 + body + q].regs[r].left_sub(&steps[s0 + q].regs[r])?
                            } else {
                                Ordinal::zero()
                            };
                            if !du.is_finite() {
                                return None;
                            }
                            for (wi, (&st, &rp)) in starts.iter().zip(reps.iter()).enumerate() {
                                let _ = wi;
                                for u in 0..rp.saturating_sub(1) {
                                    let here = &steps[st + u * body + q].regs[r];
                                    let next = &steps[st + (u + 1) * body + q].regs[r];
                                    if next.left_sub(here)? != du {
                                        return None;
                                    }
                                }
                            }
                            let dw = fit_slope(
                                &steps[s0 + q].regs[r],
                                &steps[s1 + q].regs[r],
                                &steps[s2 + q].regs[r],
                            )?;
                            if !dw.is_finite() {
                                return None;
                            }
                            forms.push(
                                Form::constant(steps[s0 + q].regs[r].clone())
                                    .with_slope(VAR_WINDOW, dw)
                                    .with_slope(VAR_LOOP, du),
                            );
                        }
                        positions.push(PatPos {
                            line: steps[s0 + q].line,
                            next_line: steps[s0 + (q + 1) % body].line,
                            trip: Some(trip.clone()),
                            forms,
                        });
                    }
                }
                _ => return None,
            }
        }
        // fill next_line for plain positions: the following pattern position
        // (wrapping to the anchor at the end of the window)
        let plen = positions.len();
        for i in 0..plen {
            if positions[i].trip.is_none() {
                positions[i].next_line = positions[(i + 1) % plen].line;
            }
        }

        let pattern = Pattern { positions };
        if !self.verify_pattern_stability(&pattern) {
            return None;
        }
        Some(self.summarize(seg, pattern, anchor, w0_len))
    }

    /// The ∀-window checks: branch outcomes, oracle reads, increments.
    pub(crate) fn verify_pattern_stability(&self, pattern: &Pattern) -> bool {
        let (threshold, period) = self.oracle.tail_descriptor();
        for pos in &pattern.positions {
            let region = Region {
                u_bound: pos.trip.clone(),
            };
            let line = pos.line as usize;
            if line >= self.program.instructions.len() {
                return false;
            }
            match &self.program.instructions[line] {
                Instruction::Zero(_) | Instruction::Copy { .. } | Instruction::Halt => {}
                Instruction::Inc(r) => {
                    if inc_can_overflow(&pos.forms[*r], self.spec.bound.as_ref(), &region)
                        != Tri::No
                    {
                        return false;
                    }
                }
                Instruction::Read { index, .. } => {
                    let idx = &pos.forms[*index];
                    if idx.is_constant() {
                        continue; // a single concrete index: the bit is fixed
                    }
                    if stable_read_bit(idx, threshold, &period, &region).is_none() {
                        return false;
                    }
                }
                Instruction::JumpEq { a, b, target } => {
                    let fallthrough = line + 1;
                    if *target == fallthrough {
                        continue; // outcome does not affect control
                    }
                    let observed_equal = pos.next_line as usize == *target;
                    if !observed_equal && pos.next_line as usize != fallthrough {
                        return false; // pattern inconsistent with either branch
                    }
                    if !jeq_stable(&pos.forms[*a], &pos.forms[*b], observed_equal, &region) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn summarize(
        &self,
        seg: &SegmentTrace,
        pattern: Pattern,
        anchor: usize,
        window_len: usize,
    ) -> PeriodSummary {
        let control_path: Vec<usize> = seg.steps[anchor..anchor + window_len]
            .iter()
            .map(|s| s.line as usize)
            .collect();
        PeriodSummary {
            start_clock: seg.clock_at(anchor),
            length: window_len,
            control_path,
            registers: pattern_descriptions(&pattern, VAR_WINDOW),
            oracle_reads_stable: true,
            pattern,
            level: 0,
        }
    }
}

/// Per-register phase descriptions at the detection variable `var`: the
/// position's value with all inner variables at 0, growing by the fitted
/// slope per window.
pub(crate) fn pattern_descriptions(pattern: &Pattern, var: usize) -> Vec<Vec<PhaseDescription>> {
    let nregs = pattern
        .positions
        .first()
        .map_or(0, |p| p.forms.len());
    (0..nregs)
        .map(|r| {
            pattern
                .positions
                .iter()
                .map(|pos| {
                    let f = &pos.forms[r];
                    // minimum over inner variables is at 0 (slopes are ≥ 0)
                    let base = f.base.clone();
                    let delta = f.slope(var);
                    if delta.is_zero() {
                        PhaseDescription::Constant(base)
                    } else {
                        PhaseDescription::Growing { base, delta }
                    }
                })
                .collect()
        })
        .collect()
}

/// Canonical line-sequence hashing for fast window prefiltering.
fn prefix_hashes(steps: &[StepRec]) -> (Vec<u64>, Vec<u64>) {
    const P: u64 = 1_000_000_007;
    let mut h = Vec::with_capacity(steps.len() + 1);
    let mut pw = Vec::with_capacity(steps.len() + 1);
    h.push(0u64);
    pw.push(1u64);
    for s in steps {
        let last = *h.last().unwrap();
        h.push(
            last.wrapping_mul(P)
                .wrapping_add(u64::from(s.line).wrapping_add(1)),
        );
        pw.push(pw.last().unwrap().wrapping_mul(P));
    }
    (h, pw)
}

fn range_hash(hp: &(Vec<u64>, Vec<u64>), start: usize, len: usize) -> u64 {
    let (h, pw) = hp;
    h[start + len].wrapping_sub(h[start].wrapping_mul(pw[len]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::parse_asm;
    use crate::vm::{initial_config, step_in_place, LimitPolicy};

    fn record_steps(
        spec: &MachineSpec,
        p: &Program,
        oracle: &OracleSpec,
        input: u64,
        n: usize,
    ) -> SegmentTrace {
        let mut seg = SegmentTrace::new(Ordinal::zero());
        let mut c = initial_config(spec, p, &Ordinal::from_nat(input)).unwrap();
        for _ in 0..n {
            seg.steps.push(StepRec {
                line: c.line as u32,
                regs: c.registers.clone(),
            });
            if step_in_place(spec, p, oracle, &mut c).is_some() {
                break;
            }
        }
        seg
    }

    fn itrm() -> MachineSpec {
        MachineSpec::itrm()
    }

    #[test]
    fn busy_counter_period() {
        let p = parse_asm("busy", "INC 0\nJEQ 1 1 0").unwrap();
        let spec = itrm();
        let oracle = OracleSpec::AllZero;
        let seg = record_steps(&spec, &p, &oracle, 0, 12);
        let ctx = DetectCtx {
            program: &p,
            oracle: &oracle,
            spec: &spec,
        };
        let s = ctx.detect(&seg, false).expect("busy counter is periodic");
        assert_eq!(s.length, 2);
        assert_eq!(s.control_path, vec![0, 1]);
        // R0 grows by 1 per window at some phase, R1 stays 0
        assert!(s.registers[0].iter().any(|d| matches!(
            d,
            PhaseDescription::Growing { delta, .. } if *delta == Ordinal::one()
        )));
        assert!(s.registers[1]
            .iter()
            .all(|d| *d == PhaseDescription::Constant(Ordinal::zero())));
        let (line, regs) = evaluate_limit(&s);
        assert_eq!(line, 0);
        assert_eq!(regs[0], Ordinal::omega());
        assert_eq!(regs[1], Ordinal::zero());
    }

    #[test]
    fn zeroing_loop_phases_are_constant() {
        // zero R2 then increment it three times per iteration
        let p = parse_asm("z3", "ZERO 2\nINC 2\nINC 2\nINC 2\nJEQ 0 0 0").unwrap();
        let spec = itrm();
        let oracle = OracleSpec::AllZero;
        let seg = record_steps(&spec, &p, &oracle, 0, 30);
        let ctx = DetectCtx {
            program: &p,
            oracle: &oracle,
            spec: &spec,
        };
        let s = ctx.detect(&seg, false).unwrap();
        assert_eq!(s.length, 5);
        // values before each window line: 3 before ZERO, then 0,1,2 before
        // the increments, 3 before the jump
        let expect: Vec<u64> = vec![3, 0, 1, 2, 3];
        let got: Vec<Ordinal> = s.registers[2]
            .iter()
            .map(|d| match d {
                PhaseDescription::Constant(v) => v.clone(),
                other => panic!("expected constant, got {other:?}"),
            })
            .collect();
        let mut want: Vec<Ordinal> = expect.into_iter().map(Ordinal::from_nat).collect();
        // window may be rotated; compare as multisets
        let mut got_s = got.clone();
        got_s.sort();
        want.sort();
        assert_eq!(got_s, want);
        let (_, regs) = evaluate_limit(&s);
        assert_eq!(regs[2], Ordinal::zero());
    }

    #[test]
    fn counting_against_input_is_not_accelerated_before_the_hit() {
        // R1 counts toward R0 = 9; equality will genuinely fire, so no
        // window may be certified
        let p = parse_asm("cnt", "JEQ 1 0 3\nINC 1\nJEQ 2 2 0\nHALT").unwrap();
        let spec = itrm();
        let oracle = OracleSpec::AllZero;
        let seg = record_steps(&spec, &p, &oracle, 9, 20);
        let ctx = DetectCtx {
            program: &p,
            oracle: &oracle,
            spec: &spec,
        };
        assert!(ctx.detect(&seg, true).is_none());
    }

    #[test]
    fn counting_against_infinite_register_is_accelerated() {
        // same loop, but R0 holds ω on an unresetting ω+1 machine
        let p = parse_asm("cnt", "JEQ 1 0 3\nINC 1\nJEQ 2 2 0\nHALT").unwrap();
        let spec =
            MachineSpec::bounded(Ordinal::omega().succ(), LimitPolicy::Unresetting).unwrap();
        let oracle = OracleSpec::AllZero;
        let mut seg = SegmentTrace::new(Ordinal::zero());
        let mut c = initial_config(&spec, &p, &Ordinal::omega()).unwrap();
        for _ in 0..30 {
            seg.steps.push(StepRec {
                line: c.line as u32,
                regs: c.registers.clone(),
            });
            assert!(step_in_place(&spec, &p, &oracle, &mut c).is_none());
        }
        let ctx = DetectCtx {
            program: &p,
            oracle: &oracle,
            spec: &spec,
        };
        let s = ctx.detect(&seg, false).expect("no collision with ω");
        let (_, regs) = evaluate_limit(&s);
        assert_eq!(regs[0], Ordinal::omega());
        assert_eq!(regs[1], Ordinal::omega());
    }

    #[test]
    fn oracle_read_below_threshold_blocks_detection() {
        // read at a growing index against FiniteSupport{7}: no detection
        // until the window's base index passes the threshold 8
        let p = parse_asm("r", "READ 1 2\nINC 1\nJEQ 0 0 0").unwrap();
        let spec = itrm();
        let oracle = OracleSpec::finite([7]);
        let ctx = DetectCtx {
            program: &p,
            oracle: &oracle,
            spec: &spec,
        };
        // after 5 loop iterations the window bases sit below 8
        let seg = record_steps(&spec, &p, &oracle, 0, 15);
        assert!(ctx.detect(&seg, false).is_none());
        // after 40 steps the last three windows read indices ≥ 8
        let seg = record_steps(&spec, &p, &oracle, 0, 40);
        let s = ctx.detect(&seg, false).expect("past the threshold");
        assert!(s.oracle_reads_stable);
        let (_, regs) = evaluate_limit(&s);
        assert_eq!(regs[2], Ordinal::zero());
    }

    #[test]
    fn folded_inner_loop_with_growing_trips() {
        // outer phases: inner loop counts R1 up to R0, then R0 is
        // incremented and R1 reset; inner trip count grows by 1 per phase
        let text = "\
0: JEQ 1 0 3
1: INC 1
2: JEQ 2 2 0
3: INC 0
4: ZERO 1
5: JEQ 2 2 0
";
        let p = parse_asm("grow", text).unwrap();
        let spec = itrm();
        let oracle = OracleSpec::AllZero;
        let seg = record_steps(&spec, &p, &oracle, 3, 400);
        let ctx = DetectCtx {
            program: &p,
            oracle: &oracle,
            spec: &spec,
        };
        let s = ctx.detect(&seg, true).expect("foldable growing loop");
        let (line, regs) = evaluate_limit(&s);
        // R0 grows without bound; R1 is zeroed cofinally; the loop head
        // recurs cofinally
        assert_eq!(regs[0], Ordinal::omega());
        assert_eq!(regs[1], Ordinal::zero());
        assert_eq!(line, 0);
    }
}
