//! Meta-level acceleration: detecting self-similar sequences of limit
//! configurations and jumping to the limit of those limits.
//!
//! After level-0 accelerations produce limit configs at clocks `c, c+δ,
//! c+δ·2, …`, the same window logic applies one level up: the "steps" are
//! whole segments (the run between two consecutive limits), the window
//! variable is the segment index, and register deltas may be ordinals. A
//! segment is a flattened position list — the post-limit steps followed by
//! the verified window that produced the next limit — and segments are
//! compared structurally, their position values fitted with one extra outer
//! variable. The ordinary stability walk then proves every future segment
//! behaves identically, with two extra obligations closing the induction:
//!
//! * inside every inherited extrapolating window, each register's liminf
//!   must come from a single contribution that dominates for every outer
//!   value, so the limit configs the segments produce are affine functions
//!   of the outer variable (matching the fits);
//! * that liminf's relation to the register bound must be uniform in the
//!   outer variable, so the limit policy acts the same way at every future
//!   limit.
//!
//! Future segments then also trigger the lower-level detection at the same
//! offsets (the engine is deterministic and its detection schedule depends
//! only on the segment's own steps), so limit entries keep arriving with a
//! constant clock delta, and the landing clock is their supremum.

use crate::engine::affine::Form;
use crate::engine::detect::{
    pattern_descriptions, DetectCtx, PatPos, Pattern, PeriodSummary, StepRec,
};
use crate::ordinal::Ordinal;
use crate::vm::LimitPolicy;

/// A limit configuration recorded at some acceleration level, together with
/// the segment of the run that led to it.
#[derive(Clone, Debug)]
pub(crate) struct LimitEntry {
    pub clock: Ordinal,
    pub line: u32,
    pub regs: Vec<Ordinal>,
    /// How this limit was reached from the previous entry; `None` when the
    /// segment was too irregular to carry upward.
    pub segment: Option<Segment>,
}

/// The run between two consecutive limits at some level, flattened into
/// pattern positions. `positions[0]` is the previous limit config itself.
#[derive(Clone, Debug)]
pub(crate) struct Segment {
    pub positions: Vec<PatPos>,
    /// Extrapolating portions at every nesting depth: `(start, end, var)`
    /// ranges into `positions`, outermost last.
    pub windows: Vec<(usize, usize, usize)>,
}

const META_POSITIONS_MAX: usize = 6000;

impl Segment {
    pub(crate) fn from_level0(prefix: &[StepRec], summary: &PeriodSummary) -> Option<Segment> {
        let first_pattern_line = summary.pattern.positions.first()?.line;
        let mut positions: Vec<PatPos> =
            Vec::with_capacity(prefix.len() + summary.pattern.positions.len());
        for (i, s) in prefix.iter().enumerate() {
            let next_line = prefix.get(i + 1).map_or(first_pattern_line, |n| n.line);
            positions.push(PatPos {
                line: s.line,
                next_line,
                trip: None,
                forms: s.regs.iter().cloned().map(Form::constant).collect(),
            });
        }
        let wstart = positions.len();
        positions.extend(summary.pattern.positions.iter().cloned());
        if positions.len() > META_POSITIONS_MAX {
            return None;
        }
        let wend = positions.len();
        Some(Segment {
            positions,
            windows: vec![(wstart, wend, crate::engine::affine::VAR_WINDOW)],
        })
    }

    fn same_shape(&self, other: &Segment) -> bool {
        self.windows == other.windows
            && self.positions.len() == other.positions.len()
            && self.positions.iter().zip(&other.positions).all(|(a, b)| {
                a.line == b.line
                    && a.next_line == b.next_line
                    && a.trip == b.trip
                    && a.forms.len() == b.forms.len()
                    && a.forms.iter().zip(&b.forms).all(|(f, g)| f.slopes == g.slopes)
            })
    }
}

/// Value of a register liminf as a function of outer variables:
/// `base + Σ slope_v·v + tail`, with the constant `tail` added innermost
/// (the supremum jump of a growing contribution lands after the variable
/// terms, so it cannot be folded into the base).
#[derive(Clone, Debug, PartialEq, Eq)]
struct LiminfForm {
    base: Ordinal,
    slopes: Vec<(usize, Ordinal)>,
    tail: Ordinal,
}

impl LiminfForm {
    fn min_value(&self) -> Ordinal {
        self.base.add(&self.tail)
    }

    fn strict_sup(&self) -> Ordinal {
        let max_exp = self
            .slopes
            .iter()
            .map(|(_, s)| s)
            .chain(std::iter::once(&self.tail))
            .filter_map(|s| s.leading_exp().cloned())
            .max();
        match max_exp {
            None => self.min_value().succ(),
            Some(e) => self.base.add(&Ordinal::omega_pow(e.succ(), 1u32)),
        }
    }

    /// `self(v) ≤ other(v)` for every assignment: componentwise, sound by
    /// monotonicity of ordinal addition in both arguments.
    fn le_forall(&self, other: &LiminfForm) -> bool {
        if self.base > other.base || self.tail > other.tail {
            return false;
        }
        let vars: std::collections::BTreeSet<usize> = self
            .slopes
            .iter()
            .chain(&other.slopes)
            .map(|(v, _)| *v)
            .collect();
        vars.into_iter().all(|v| self.slope(v) <= other.slope(v))
    }

    fn slope(&self, var: usize) -> Ordinal {
        self.slopes
            .iter()
            .find(|(v, _)| *v == var)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(Ordinal::zero)
    }
}

/// The liminf contribution of one pattern position inside a window that
/// extrapolates over `window_var`: constant positions contribute their
/// value, growing positions their supremum `base + ω^(e+1)`.
fn contribution(pos_form: &Form, window_var: usize) -> LiminfForm {
    let growth = pos_form.slope(window_var);
    let outer: Vec<(usize, Ordinal)> = pos_form
        .slopes
        .iter()
        .enumerate()
        .skip(window_var + 1)
        .filter(|(_, s)| !s.is_zero())
        .map(|(v, s)| (v, s.clone()))
        .collect();
    let tail = match growth.leading_exp() {
        None => Ordinal::zero(),
        Some(e) => Ordinal::omega_pow(e.clone().succ(), 1u32),
    };
    LiminfForm {
        base: pos_form.base.clone(),
        slopes: outer,
        tail,
    }
}

fn window_liminf_form(positions: &[PatPos], window_var: usize, reg: usize) -> Option<LiminfForm> {
    let contributions: Vec<LiminfForm> = positions
        .iter()
        .map(|p| contribution(&p.forms[reg], window_var))
        .collect();
    contributions
        .iter()
        .find(|c| contributions.iter().all(|o| c.le_forall(o)))
        .cloned()
}

enum BoundRelation {
    AlwaysBelow,
    AlwaysAtOrAbove,
}

/// Does the liminf relate to the bound the same way for every outer value?
fn bound_relation(liminf: &LiminfForm, bound: Option<&Ordinal>) -> Option<BoundRelation> {
    let Some(bound) = bound else {
        return Some(BoundRelation::AlwaysBelow);
    };
    if &liminf.min_value() >= bound {
        return Some(BoundRelation::AlwaysAtOrAbove);
    }
    if &liminf.strict_sup() <= bound {
        return Some(BoundRelation::AlwaysBelow);
    }
    None
}

pub(crate) struct MetaDetection {
    pub summary: PeriodSummary,
    pub clock_delta: Ordinal,
    pub anchor_clock: Ordinal,
    /// The whole span from the previous higher-level limit through the
    /// extrapolating window, for one more level of nesting.
    pub segment: Option<Segment>,
}

/// Detects a self-similar run of limit entries at `level ≥ 1` and verifies
/// that it extrapolates.
pub(crate) fn detect_meta(
    ctx: &DetectCtx,
    entries: &[LimitEntry],
    level: usize,
) -> Option<MetaDetection> {
    let n = entries.len();
    let max_l = (n.saturating_sub(1) / 3).min(4);
    (1..=max_l).find_map(|l| try_meta_window(ctx, entries, level, l))
}

fn try_meta_window(
    ctx: &DetectCtx,
    entries: &[LimitEntry],
    level: usize,
    l: usize,
) -> Option<MetaDetection> {
    let var = crate::engine::affine::VAR_WINDOW + level;
    let n = entries.len();
    let anchor = n - 1 - 3 * l;
    // segment leading out of entry e (into entry e+1)
    let seg_out = |e: usize| entries.get(e + 1).and_then(|en| en.segment.as_ref());

    // the three windows' segments must align structurally
    for off in 0..l {
        let s0 = seg_out(anchor + off)?;
        let s1 = seg_out(anchor + l + off)?;
        let s2 = seg_out(anchor + 2 * l + off)?;
        if !s0.same_shape(s1) || !s0.same_shape(s2) {
            return None;
        }
        // folded loops are not carried across levels
        if s0.positions.iter().any(|p| p.trip.is_some()) {
            return None;
        }
    }

    // entry configs across the windows: affine, re-verified on the final
    // entry (lines must agree throughout)
    let e0 = &entries[anchor];
    let e1 = &entries[anchor + l];
    let e2 = &entries[anchor + 2 * l];
    let e3 = &entries[anchor + 3 * l];
    if e0.line != e1.line || e0.line != e2.line || e0.line != e3.line {
        return None;
    }
    for r in 0..e0.regs.len() {
        let slope = fit_ordinal_slope(&e0.regs[r], &e1.regs[r], &e2.regs[r])?;
        if e2.regs[r].add(&slope) != e3.regs[r] {
            return None;
        }
    }
    let clock_delta = fit_ordinal_slope(&e0.clock, &e1.clock, &e2.clock)?;
    if clock_delta.is_zero() || e2.clock.add(&clock_delta) != e3.clock {
        return None;
    }

    // fit every position across the three windows with the outer variable
    let mut positions: Vec<PatPos> = Vec::new();
    let mut windows: Vec<(usize, usize, usize)> = Vec::new();
    for off in 0..l {
        let s0 = seg_out(anchor + off)?;
        let s1 = seg_out(anchor + l + off)?;
        let s2 = seg_out(anchor + 2 * l + off)?;
        let seg_base = positions.len();
        windows.extend(
            s0.windows
                .iter()
                .map(|&(ws, we, wv)| (seg_base + ws, seg_base + we, wv)),
        );
        for (pi, p0) in s0.positions.iter().enumerate() {
            let p1 = &s1.positions[pi];
            let p2 = &s2.positions[pi];
            let mut forms = Vec::with_capacity(p0.forms.len());
            for r in 0..p0.forms.len() {
                let slope =
                    fit_ordinal_slope(&p0.forms[r].base, &p1.forms[r].base, &p2.forms[r].base)?;
                forms.push(p0.forms[r].clone().with_slope(var, slope));
            }
            positions.push(PatPos {
                line: p0.line,
                next_line: p0.next_line,
                trip: p0.trip.clone(),
                forms,
            });
        }
    }
    let pattern = Pattern { positions };

    if !ctx.verify_pattern_stability(&pattern) {
        return None;
    }

    // every inherited extrapolating window must produce its limit configs
    // as an affine, policy-uniform function of the outer variables
    let nregs = e0.regs.len();
    for &(ws, we, wv) in &windows {
        let window_positions = &pattern.positions[ws..we];
        for r in 0..nregs {
            let liminf = window_liminf_form(window_positions, wv, r)?;
            match (
                ctx.spec.policy,
                bound_relation(&liminf, ctx.spec.bound.as_ref())?,
            ) {
                (LimitPolicy::Classical, _) => return None,
                (LimitPolicy::Unresetting, BoundRelation::AlwaysAtOrAbove) => return None,
                _ => {}
            }
        }
    }

    let summary = PeriodSummary {
        start_clock: entries[anchor].clock.clone(),
        length: pattern.positions.len(),
        control_path: pattern.positions.iter().map(|p| p.line as usize).collect(),
        registers: pattern_descriptions(&pattern, var),
        oracle_reads_stable: true,
        pattern: pattern.clone(),
        level,
    };

    // the nesting segment spans from the previous higher-level limit: the
    // segments before the anchor become its prefix
    let segment = build_nesting_segment(entries, anchor, pattern, windows, var);

    Some(MetaDetection {
        summary,
        clock_delta,
        anchor_clock: entries[anchor].clock.clone(),
        segment,
    })
}

fn build_nesting_segment(
    entries: &[LimitEntry],
    anchor: usize,
    pattern: Pattern,
    pattern_windows: Vec<(usize, usize, usize)>,
    var: usize,
) -> Option<Segment> {
    let mut positions: Vec<PatPos> = Vec::new();
    let mut windows: Vec<(usize, usize, usize)> = Vec::new();
    for e in 0..=anchor {
        let seg = entries[e].segment.as_ref()?;
        let base = positions.len();
        windows.extend(
            seg.windows
                .iter()
                .map(|&(ws, we, wv)| (base + ws, base + we, wv)),
        );
        positions.extend(seg.positions.iter().cloned());
    }
    let wstart = positions.len();
    windows.extend(
        pattern_windows
            .iter()
            .map(|&(ws, we, wv)| (wstart + ws, wstart + we, wv)),
    );
    positions.extend(pattern.positions);
    if positions.len() > META_POSITIONS_MAX {
        return None;
    }
    let wend = positions.len();
    windows.push((wstart, wend, var));
    Some(Segment { positions, windows })
}

fn fit_ordinal_slope(v0: &Ordinal, v1: &Ordinal, v2: &Ordinal) -> Option<Ordinal> {
    let d1 = v1.left_sub(v0)?;
    let d2 = v2.left_sub(v1)?;
    if d1 == d2 {
        Some(d1)
    } else {
        None
    }
}
