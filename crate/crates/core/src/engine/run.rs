//! The run driver: successor stepping alternated with sound limit
//! acceleration, nested meta-acceleration, divergence certification and
//! budget accounting.

use crate::engine::certificate::{DivergenceCertificate, LoopFinder};
use crate::engine::detect::{evaluate_limit, DetectCtx, PeriodSummary, SegmentTrace, StepRec};
use crate::engine::meta::{detect_meta, LimitEntry, Segment};
use crate::engine::{Budget, LimitClass, LimitEventInfo, RunOutcome, RunReport, TraceEvent, TraceEventKind};
use crate::isa::Program;
use crate::oracle::OracleSpec;
use crate::ordinal::Ordinal;
use crate::vm::{initial_config, limit_config, step_in_place, Config, MachineSpec, StepResult, VmError};

/// Bundles a machine spec, program and oracle for repeated runs.
pub struct Engine<'a> {
    pub spec: &'a MachineSpec,
    pub program: &'a Program,
    pub oracle: &'a OracleSpec,
    certify: bool,
}

const TRACE_STEP_CAP: usize = 20_000;
const SEGMENT_CAP: usize = 120_000;

impl<'a> Engine<'a> {
    pub fn new(spec: &'a MachineSpec, program: &'a Program, oracle: &'a OracleSpec) -> Self {
        Engine {
            spec,
            program,
            oracle,
            certify: true,
        }
    }

    /// Disables divergence certification, letting runs pass through repeated
    /// states (used to observe longer reference traces).
    pub fn without_certificates(mut self) -> Self {
        self.certify = false;
        self
    }

    /// Whole-run semantics from the standard initial configuration.
    pub fn run(&self, input: &Ordinal, budget: &Budget) -> Result<RunReport, VmError> {
        let cfg = initial_config(self.spec, self.program, input)?;
        Ok(self.run_from(cfg, budget))
    }

    /// Runs from an arbitrary configuration (used by certificate replay and
    /// the test harness).
    pub fn run_from(&self, cfg: Config, budget: &Budget) -> RunReport {
        Driver::new(self, budget).run(cfg)
    }

    /// Attempts period detection on a suffix of successor-step configs, as
    /// the engine would during a run.
    pub fn detect_period(&self, suffix: &[Config]) -> Option<PeriodSummary> {
        if suffix.is_empty() {
            return None;
        }
        let mut seg = SegmentTrace::new(suffix[0].clock.clone());
        seg.steps.extend(suffix.iter().map(|c| StepRec {
            line: c.line as u32,
            regs: c.registers.clone(),
        }));
        self.detect_ctx().detect(&seg, true)
    }

    fn detect_ctx(&self) -> DetectCtx<'_> {
        DetectCtx {
            program: self.program,
            oracle: self.oracle,
            spec: self.spec,
        }
    }
}

struct Driver<'a, 'b> {
    engine: &'b Engine<'a>,
    budget: &'b Budget,
    seg: SegmentTrace,
    levels: Vec<Vec<LimitEntry>>,
    finder: LoopFinder,
    trace: Vec<TraceEvent>,
    limit_events: Vec<LimitEventInfo>,
    steps: u64,
    seg_truncated: bool,
}

enum Accel {
    Done(RunOutcome),
    Continue(Config),
}

impl<'a, 'b> Driver<'a, 'b> {
    fn new(engine: &'b Engine<'a>, budget: &'b Budget) -> Self {
        Driver {
            engine,
            budget,
            seg: SegmentTrace::new(Ordinal::zero()),
            levels: Vec::new(),
            finder: LoopFinder::new(),
            trace: Vec::new(),
            limit_events: Vec::new(),
            steps: 0,
            seg_truncated: false,
        }
    }

    fn run(mut self, mut cfg: Config) -> RunReport {
        self.seg = SegmentTrace::new(cfg.clock.clone());
        let mut just_accelerated = false;
        let outcome = loop {
            // record the configuration we are about to step from
            self.push_seg_step(&cfg);
            if !just_accelerated {
                self.record_step_event(&cfg);
                if self.engine.certify {
                    if let Some(cert) = self.finder.push_step(&cfg) {
                        break self.certificate_outcome(cert, &cfg);
                    }
                }
            }
            just_accelerated = false;

            // acceleration attempt, throttled by segment length
            let n = self.seg.steps.len();
            let last_chance = self.steps >= self.budget.max_successor_steps;
            let fast = n >= 6 && (n <= 2048 || n % 97 == 0 || last_chance);
            let thorough = (n >= 24 && n % 211 == 0) || (last_chance && n >= 6);
            if fast || thorough {
                if let Some(summary) = self.engine.detect_ctx().detect(&self.seg, thorough) {
                    match self.accelerate(&cfg, summary) {
                        Accel::Done(outcome) => break outcome,
                        Accel::Continue(newcfg) => {
                            cfg = newcfg;
                            just_accelerated = true;
                            continue;
                        }
                    }
                }
            }

            if last_chance {
                break RunOutcome::BudgetExhausted {
                    reason: format!(
                        "no halt, certificate or acceleration within {} successor steps",
                        self.budget.max_successor_steps
                    ),
                };
            }

            match step_in_place(self.engine.spec, self.engine.program, self.engine.oracle, &mut cfg)
            {
                None => {
                    self.steps += 1;
                }
                Some(StepResult::Halted(c)) => {
                    self.record_step_event(&c);
                    break RunOutcome::Halted {
                        output: c.registers[0].clone(),
                        clock: c.clock,
                    };
                }
                Some(StepResult::OverflowUndefined(r, c)) => {
                    break RunOutcome::OverflowUndefined {
                        register: r,
                        clock: c.clock.succ(),
                    };
                }
                Some(StepResult::Continue(_)) | Some(StepResult::ClassicalLimitReached(_)) => {
                    unreachable!("successor stepping never yields these")
                }
            }
        };
        RunReport {
            outcome,
            trace: self.trace,
            limit_events: self.limit_events,
            steps_executed: self.steps,
        }
    }

    /// Applies a verified level-0 acceleration, then cascades meta levels
    /// while their detections fire.
    fn accelerate(&mut self, cfg: &Config, summary: PeriodSummary) -> Accel {
        if self.budget.max_limit_depth < 1 {
            return Accel::Done(RunOutcome::BudgetExhausted {
                reason: "acceleration disabled by limit depth 0".into(),
            });
        }
        let landing = cfg.clock.next_limit_above();
        if landing >= self.budget.max_clock {
            return Accel::Done(RunOutcome::BudgetExhausted {
                reason: format!("next limit {landing} is at or past the clock budget"),
            });
        }
        // the segment prefix: steps before the window anchor
        let anchor_idx = summary
            .start_clock
            .left_sub(&self.seg.base_clock)
            .and_then(|d| d.finite_value())
            .and_then(|n| usize::try_from(&n).ok());
        let segment = match (&anchor_idx, self.seg_truncated) {
            (Some(idx), false) => Segment::from_level0(&self.seg.steps[..*idx], &summary),
            _ => None,
        };
        let result = self.install_limit(&summary, landing, segment, 0);
        match result {
            Accel::Continue(mut newcfg) => {
                // meta cascade: each level's detection may fire in turn
                let mut level = 0;
                loop {
                    if self.levels.len() <= level || self.levels[level].len() < 4 {
                        break;
                    }
                    // a level-(level+1) acceleration nests depth level+2
                    if (level as u32) + 2 > self.budget.max_limit_depth {
                        break;
                    }
                    let Some(meta) =
                        detect_meta(&self.engine.detect_ctx(), &self.levels[level], level + 1)
                    else {
                        break;
                    };
                    let landing = Ordinal::limit_of_progression(
                        &meta.anchor_clock,
                        &meta.clock_delta,
                    )
                    .expect("meta clock delta is positive");
                    if landing >= self.budget.max_clock {
                        return Accel::Done(RunOutcome::BudgetExhausted {
                            reason: format!(
                                "next limit {landing} is at or past the clock budget"
                            ),
                        });
                    }
                    match self.install_limit(&meta.summary, landing, meta.segment, level + 1) {
                        Accel::Continue(c) => {
                            // lower levels start fresh after a higher limit
                            for lvl in self.levels.iter_mut().take(level + 1) {
                                lvl.clear();
                            }
                            newcfg = c;
                            level += 1;
                        }
                        done => return done,
                    }
                }
                self.seg = SegmentTrace::new(newcfg.clock.clone());
                self.seg_truncated = false;
                Accel::Continue(newcfg)
            }
            done => done,
        }
    }

    /// Evaluates the liminf state, applies the limit policy, and records the
    /// resulting limit entry at `level`.
    fn install_limit(
        &mut self,
        summary: &PeriodSummary,
        landing: Ordinal,
        segment: Option<Segment>,
        level: usize,
    ) -> Accel {
        let (line_liminf, reg_liminfs) = evaluate_limit(summary);
        let pre_policy = reg_liminfs.clone();
        let step = limit_config(
            self.engine.spec,
            self.engine.program,
            line_liminf,
            reg_liminfs,
            landing.clone(),
        )
        .expect("landing clock is a limit and liminf vector is sized to the program");
        match step {
            StepResult::ClassicalLimitReached(_) => {
                Accel::Done(RunOutcome::ClassicalLimitReached { clock: landing })
            }
            StepResult::OverflowUndefined(r, _) => Accel::Done(RunOutcome::OverflowUndefined {
                register: r,
                clock: landing,
            }),
            StepResult::Continue(newcfg) => {
                let was_reset = pre_policy != newcfg.registers;
                self.trace.push(TraceEvent {
                    clock: newcfg.clock.clone(),
                    line: newcfg.line,
                    regs: newcfg.registers.clone(),
                    event: if was_reset {
                        TraceEventKind::OverflowReset
                    } else {
                        TraceEventKind::Limit
                    },
                    sigma: None,
                });
                self.limit_events.push(LimitEventInfo {
                    clock: newcfg.clock.clone(),
                    line: newcfg.line,
                    regs: newcfg.registers.clone(),
                    classes: classes_of(summary),
                    level,
                });
                if self.engine.certify {
                    let tail_regs = summary.tail_min_regs();
                    let tail_line = summary.tail_min_line() as u32;
                    if let Some(cert) = self.finder.push_limit(&newcfg, tail_regs, tail_line) {
                        return Accel::Done(self.certificate_outcome(cert, &newcfg));
                    }
                }
                if self.levels.len() <= level {
                    self.levels.resize_with(level + 1, Vec::new);
                }
                self.levels[level].push(LimitEntry {
                    clock: landing,
                    line: newcfg.line as u32,
                    regs: newcfg.registers.clone(),
                    segment,
                });
                Accel::Continue(newcfg)
            }
            StepResult::Halted(_) => unreachable!("limit rule never halts directly"),
        }
    }

    fn certificate_outcome(&mut self, cert: DivergenceCertificate, at: &Config) -> RunOutcome {
        self.trace.push(TraceEvent {
            clock: cert.tau_clock.clone(),
            line: at.line,
            regs: at.registers.clone(),
            event: TraceEventKind::Certificate,
            sigma: Some(cert.sigma_clock.clone()),
        });
        RunOutcome::Diverges { certificate: cert }
    }

    fn push_seg_step(&mut self, cfg: &Config) {
        self.seg.steps.push(StepRec {
            line: cfg.line as u32,
            regs: cfg.registers.clone(),
        });
        if self.seg.steps.len() > SEGMENT_CAP {
            let drop = SEGMENT_CAP / 2;
            self.seg.steps.drain(..drop);
            self.seg.base_clock = self.seg.base_clock.add_nat(drop as u64);
            self.seg_truncated = true;
        }
    }

    fn record_step_event(&mut self, cfg: &Config) {
        if self.trace.len() < TRACE_STEP_CAP {
            self.trace.push(TraceEvent {
                clock: cfg.clock.clone(),
                line: cfg.line,
                regs: cfg.registers.clone(),
                event: TraceEventKind::Step,
                sigma: None,
            });
        }
    }
}

/// Per-register classification of a verified limit, for comparison against
/// the brute-force reference.
fn classes_of(summary: &PeriodSummary) -> Vec<LimitClass> {
    use crate::engine::detect::PhaseDescription;
    summary
        .registers
        .iter()
        .map(|descs| {
            let stabilized = descs
                .iter()
                .filter_map(|d| match d {
                    PhaseDescription::Constant(v) => Some(v.clone()),
                    PhaseDescription::Growing { .. } => None,
                })
                .min();
            let sup = descs
                .iter()
                .map(|d| match d {
                    PhaseDescription::Constant(v) => v.clone(),
                    PhaseDescription::Growing { base, delta } => {
                        Ordinal::limit_of_progression(base, delta).expect("positive delta")
                    }
                })
                .min()
                .expect("nonempty descriptions");
            match stabilized {
                Some(v) if v <= sup => LimitClass::Stabilized(v),
                _ => LimitClass::Growing(sup),
            }
        })
        .collect()
}

