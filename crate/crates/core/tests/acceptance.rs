//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use trm_core::engine::{
    brute_liminf_from, brute_liminf_reference, Budget, BruteOutcome, Engine, LimitClass,
    RunOutcome, RunReport, Stat, TraceEventKind,
};
use trm_core::isa::{parse_asm, Program};
use trm_core::oracle::OracleSpec;
use trm_core::ordinal::Ordinal;
use trm_core::transforms::{
    bisimulation_check_line, compile_resetting_to_unresetting, compile_wplus1_to_itrm,
    decode_value, encode_value, instrument_overflow_detection, library_program, make_recognizer,
    samples,
};
use trm_core::vm::{initial_config, step_in_place, Config, LimitPolicy, MachineSpec, StepResult};

fn nat(n: u64) -> Ordinal {
    Ordinal::from_nat(n)
}

fn omega() -> Ordinal {
    Ordinal::omega()
}

fn itrm() -> MachineSpec {
    MachineSpec::itrm()
}

fn witrm() -> MachineSpec {
    MachineSpec::witrm()
}

fn wplus1() -> MachineSpec {
    MachineSpec::bounded(omega().succ(), LimitPolicy::Unresetting).unwrap()
}

fn run(spec: &MachineSpec, p: &Program, o: &OracleSpec, input: &Ordinal, b: &Budget) -> RunReport {
    Engine::new(spec, p, o).run(input, b).expect("valid input")
}

fn pass(n: usize, what: &str) {
    println!("ACCEPTANCE {n}: PASS — {what}");
}

/// Criterion 1: the three limit policies on the busy counter at ω.
#[test]
fn criterion_1_limit_rule_fidelity() {
    let busy = library_program("busy_counter").unwrap();
    let oracle = OracleSpec::AllZero;
    let budget = Budget::default();

    // resetting: clock ω is reached, the overflowing register is reset to 0,
    // and the line is liminf{0,1} = 0
    let report = run(&itrm(), &busy, &oracle, &nat(0), &budget);
    let limit = report
        .trace
        .iter()
        .find(|e| e.event == TraceEventKind::OverflowReset)
        .expect("reset limit at ω");
    assert_eq!(limit.clock, omega());
    assert_eq!(limit.line, 0);
    assert_eq!(limit.regs, vec![nat(0), nat(0)]);

    // unresetting: the same run is undefined at ω
    let unres = MachineSpec::bounded(omega(), LimitPolicy::Unresetting).unwrap();
    let report = run(&unres, &busy, &oracle, &nat(0), &budget);
    match &report.outcome {
        RunOutcome::OverflowUndefined { register: 0, clock } => assert_eq!(*clock, omega()),
        other => panic!("unexpected {other:?}"),
    }

    // classical: undefined at the first limit
    let classical = MachineSpec::bounded(omega(), LimitPolicy::Classical).unwrap();
    let report = run(&classical, &busy, &oracle, &nat(0), &budget);
    match &report.outcome {
        RunOutcome::ClassicalLimitReached { clock } => assert_eq!(*clock, omega()),
        other => panic!("unexpected {other:?}"),
    }
    pass(1, "busy counter limit rules under resetting/unresetting/classical");
}

/// Criterion 2: the shipped recognize_omega accepts exactly ω.
#[test]
fn criterion_2_recognize_omega() {
    let rec = library_program("recognize_omega").unwrap();
    let oracle = OracleSpec::AllZero;
    let budget = Budget::default();
    let spec = wplus1();

    let report = run(&spec, &rec, &oracle, &omega(), &budget);
    match &report.outcome {
        RunOutcome::Halted { output, clock } => {
            assert_eq!(*output, nat(1));
            assert!(*clock > omega() && *clock < omega().repeat(2), "clock {clock}");
        }
        other => panic!("unexpected {other:?}"),
    }
    let mut accepted = 1;
    for i in 0..10u64 {
        let report = run(&spec, &rec, &oracle, &nat(i), &budget);
        match &report.outcome {
            RunOutcome::Halted { output, clock } => {
                assert_eq!(*output, nat(0), "input {i}");
                assert!(clock.is_finite(), "input {i} halts finitely");
                if *output == nat(1) {
                    accepted += 1;
                }
            }
            other => panic!("input {i}: unexpected {other:?}"),
        }
    }
    assert_eq!(accepted, 1, "ω is the unique accepted input");
    pass(2, "recognize_omega accepts ω in (ω, ω·2) and rejects 0..9 finitely");
}

/// Criterion 3: recognizers built from the ∅- and evens-computers accept
/// exactly their oracle and reject single-bit perturbations.
#[test]
fn criterion_3_make_recognizer() {
    let budget = Budget::default().with_max_clock(omega().repeat(20));
    let spec = witrm();

    let flip = |oracle: &OracleSpec, pos: u64| -> OracleSpec {
        // explicit prefix with one flipped bit, unchanged tail behaviour
        let (th, period) = oracle.tail_descriptor();
        let len = (pos + 1).max(th);
        let mut prefix: Vec<u8> = Vec::new();
        for i in 0..len {
            prefix.push(oracle.bit_at(&nat(i)));
        }
        prefix[pos as usize] ^= 1;
        let mut period = period;
        if th > len {
            unreachable!("len covers the threshold");
        }
        // rotate the period so it continues correctly at index `len`
        let shift = ((len - th) % period.len() as u64) as usize;
        period.rotate_left(shift);
        OracleSpec::periodic(prefix, period)
    };

    for (computer, matching) in [
        (samples::empty_computer(), OracleSpec::AllZero),
        (
            samples::evens_computer(),
            OracleSpec::periodic(vec![], vec![1, 0]),
        ),
    ] {
        let recognizer = make_recognizer(&computer).output;
        let report = run(&spec, &recognizer, &matching, &nat(0), &budget);
        match &report.outcome {
            RunOutcome::Halted { output, clock } => {
                assert_eq!(*output, nat(1), "{} accepts its real", computer.name);
                assert!(*clock > omega());
            }
            other => panic!("{}: unexpected {other:?}", computer.name),
        }
        for pos in [0u64, 1, 2, 7, 15] {
            let perturbed = flip(&matching, pos);
            let report = run(&spec, &recognizer, &perturbed, &nat(0), &budget);
            match &report.outcome {
                RunOutcome::Halted { output, clock } => {
                    assert_eq!(*output, nat(0), "{} rejects flip@{pos}", computer.name);
                    assert!(clock.is_finite());
                }
                other => panic!("{} flip@{pos}: unexpected {other:?}", computer.name),
            }
        }
    }
    pass(3, "recognizers accept exactly their real, reject 5 perturbations each");
}

/// Criterion 4: outcome equivalence of compile_wplus1_to_itrm over the
/// library programs and inputs {0..5, ω}.
#[test]
fn criterion_4_wplus1_equivalence() {
    #[derive(Debug, PartialEq, Eq)]
    enum Class {
        Halt(Ordinal),
        Diverges,
        Overflow,
    }
    let oracle = OracleSpec::finite([1, 3]);
    let budget = Budget::default();
    let direct_spec = wplus1();
    let compiled_spec = itrm();

    let mut cases = 0;
    for name in trm_core::transforms::LIBRARY_NAMES {
        let p = library_program(name).unwrap();
        let compiled = compile_wplus1_to_itrm(&p);
        let crash = compiled.crash_line.unwrap();
        let mut inputs: Vec<Ordinal> = (0..=5u64).map(nat).collect();
        inputs.push(omega());
        for input in inputs {
            let direct = run(&direct_spec, &p, &oracle, &input, &budget);
            let direct_class = match &direct.outcome {
                RunOutcome::Halted { output, .. } => Class::Halt(output.clone()),
                RunOutcome::Diverges { .. } => Class::Diverges,
                RunOutcome::OverflowUndefined { .. } => Class::Overflow,
                other => panic!("{name}({input}): direct {other:?}"),
            };
            let enc_input = encode_value(&input);
            let comp = run(&compiled_spec, &compiled.output, &oracle, &enc_input, &budget);
            let comp_class = match &comp.outcome {
                RunOutcome::Halted { clock: _, output } => {
                    let at_crash = comp
                        .trace
                        .iter()
                        .rev()
                        .find(|e| e.event == TraceEventKind::Step)
                        .is_some_and(|e| e.line == crash);
                    if at_crash {
                        Class::Overflow
                    } else {
                        Class::Halt(decode_value(output))
                    }
                }
                RunOutcome::Diverges { .. } => Class::Diverges,
                RunOutcome::OverflowUndefined { .. } => Class::Overflow,
                other => panic!("{name}({input}): compiled {other:?}"),
            };
            assert_eq!(direct_class, comp_class, "{name}({input})");
            cases += 1;
        }
    }
    assert_eq!(cases, 35);
    pass(4, "direct (ω+1)-runs and ITRM compilations agree on all 35 cases");
}

/// Criterion 5: bisimulation of compile_resetting_to_unresetting against the
/// direct resetting run, on all simulated-register projections up to ω·3.
#[test]
fn criterion_5_bisimulation() {
    let recognizer = library_program("recognize_omega").unwrap();
    let oracle = OracleSpec::AllZero;
    let horizon = omega().repeat(3);

    for q in [
        library_program("busy_counter").unwrap(),
        samples::two_register_overflow(),
    ] {
        let sim_regs = q.register_count;
        // direct resetting-ω run, certificates off so the trace continues
        // past repeated states, up to sim-clock ω·3
        let direct_spec = itrm();
        let direct_budget = Budget::default()
            .with_max_clock(omega().repeat(4))
            .with_steps(4_000);
        let direct = Engine::new(&direct_spec, &q, &oracle)
            .without_certificates()
            .run(&nat(0), &direct_budget)
            .unwrap();
        // reference sequence: every config of the direct run in clock order
        let reference: Vec<_> = direct
            .trace
            .iter()
            .filter(|e| {
                matches!(
                    e.event,
                    TraceEventKind::Step | TraceEventKind::Limit | TraceEventKind::OverflowReset
                ) && e.clock < horizon
            })
            .map(|e| (e.clock.clone(), e.line, e.regs.clone()))
            .collect();
        assert!(
            reference.iter().any(|(c, _, _)| *c >= omega().repeat(2)),
            "direct run passes ω·2"
        );

        let compiled = compile_resetting_to_unresetting(&q, &recognizer);
        let spec = wplus1();
        let budget = Budget::default()
            .with_max_clock(omega().repeat(200))
            .with_steps(60_000);
        let comp = Engine::new(&spec, &compiled.output, &oracle)
            .without_certificates()
            .run(&nat(0), &budget)
            .unwrap();

        // the compiled trace yields one simulated config per check-line
        // visit, plus one per limit (the state after the reset handler,
        // observed at the first return-line visit after the limit event)
        let chk_of = |line: usize| -> Option<usize> {
            (line >= 2 && (line - 2) % 5 == 0).then(|| (line - 2) / 5)
        };
        let mut simulated: Vec<(usize, Vec<Ordinal>)> = Vec::new();
        let mut pending_limit = false;
        for e in &comp.trace {
            match e.event {
                TraceEventKind::Limit | TraceEventKind::OverflowReset => pending_limit = true,
                TraceEventKind::Step => {
                    if pending_limit {
                        // ret lines sit one past the check lines
                        if e.line >= 3 && (e.line - 3) % 5 == 0 {
                            let block = (e.line - 3) / 5;
                            if block < q.len() {
                                simulated.push((block, e.regs[..sim_regs].to_vec()));
                                pending_limit = false;
                            }
                        }
                    } else if let Some(block) = chk_of(e.line) {
                        if block < q.len() {
                            simulated.push((block, e.regs[..sim_regs].to_vec()));
                        }
                    }
                }
                _ => {}
            }
        }

        assert!(
            simulated.len() >= reference.len(),
            "{}: compiled run covers the horizon ({} < {})",
            q.name,
            simulated.len(),
            reference.len()
        );
        for (i, (clock, line, regs)) in reference.iter().enumerate() {
            let (sim_line, sim_regs_vals) = &simulated[i];
            assert_eq!(sim_line, line, "{}: line at sim-clock {clock}", q.name);
            assert_eq!(
                sim_regs_vals, regs,
                "{}: registers at sim-clock {clock}",
                q.name
            );
        }
        // the first simulated limit applies the same resets the direct
        // machine does, via the inlined β-recognizer
        let first_direct_limit = reference
            .iter()
            .find(|(c, _, _)| !c.is_finite())
            .expect("direct limit in range");
        assert!(first_direct_limit.2.iter().all(|r| r.is_finite()));
    }
    pass(5, "compiled runs match direct resetting runs config-for-config to ω·3");
}

fn divergence_corpus() -> Vec<(MachineSpec, Program, OracleSpec, Ordinal)> {
    let o = OracleSpec::AllZero;
    let mut corpus: Vec<(MachineSpec, Program, OracleSpec, Ordinal)> = Vec::new();
    // simple divergers and halting controls on a few machine types
    for (name, spec) in [
        ("busy_counter", itrm()),
        ("busy_counter", MachineSpec::unbounded(LimitPolicy::Unresetting)),
        ("self_loop", itrm()),
        ("self_loop", witrm()),
        ("nested_counter", itrm()),
        ("recognize_omega", wplus1()),
        ("bitwise_compare", itrm()),
    ] {
        corpus.push((spec, library_program(name).unwrap(), o.clone(), nat(0)));
    }
    corpus.push((wplus1(), library_program("recognize_omega").unwrap(), o.clone(), omega()));
    corpus.push((itrm(), samples::two_register_overflow(), o.clone(), nat(0)));
    corpus.push((itrm(), samples::zeroing_loop(), o.clone(), nat(0)));
    corpus.push((itrm(), samples::empty_computer(), o.clone(), nat(3)));
    corpus.push((witrm(), samples::evens_computer(), o.clone(), nat(7)));
    // zero-reset loop whose state repeats only through the limit
    let z3 = parse_asm("zero_inc3", "ZERO 2\nINC 2\nINC 2\nINC 2\nJEQ 0 0 0").unwrap();
    corpus.push((itrm(), z3, o.clone(), nat(0)));
    // two-phase loop with a mid-loop dip: no finite strong loop
    let dip = parse_asm("dip", "ZERO 0\nINC 0\nJEQ 1 1 0").unwrap();
    corpus.push((itrm(), dip, o.clone(), nat(0)));
    // counting loop that halts when it reaches its input
    let upto = parse_asm("upto", "JEQ 1 0 3\nINC 1\nJEQ 2 2 0\nHALT").unwrap();
    corpus.push((itrm(), upto.clone(), o.clone(), nat(25)));
    // the same loop against ω diverges on an unresetting ω+1 machine:
    // its counter overflows at the limit... on unbounded it runs past ω
    corpus.push((
        MachineSpec::unbounded(LimitPolicy::Unresetting),
        upto,
        o.clone(),
        omega().repeat(2),
    ));
    // oracle reader marching through a finite-support oracle
    let reader = parse_asm("reader", "READ 1 2\nINC 1\nJEQ 0 0 0").unwrap();
    corpus.push((itrm(), reader, OracleSpec::finite([7]), nat(0)));
    // instrumented and compiled variants
    corpus.push((
        itrm(),
        instrument_overflow_detection(&library_program("busy_counter").unwrap(), 0).output,
        o.clone(),
        nat(0),
    ));
    corpus.push((
        itrm(),
        compile_wplus1_to_itrm(&library_program("self_loop").unwrap()).output,
        o.clone(),
        encode_value(&nat(0)),
    ));
    corpus.push((
        witrm(),
        make_recognizer(&samples::empty_computer()).output,
        OracleSpec::AllZero,
        nat(0),
    ));
    assert_eq!(corpus.len(), 20);
    corpus
}

/// Criterion 6: every emitted certificate is validated by replay; no
/// certificate is emitted for a program that halts within budget.
#[test]
fn criterion_6_certificate_soundness() {
    let budget = Budget::default().with_steps(20_000);
    let mut certificates = 0;
    let mut halts = 0;
    for (spec, p, oracle, input) in divergence_corpus() {
        let report = run(&spec, &p, &oracle, &input, &budget);
        match &report.outcome {
            RunOutcome::Diverges { certificate } => {
                certificates += 1;
                // rebuild the σ-configuration and replay from it
                let sigma = Config {
                    line: certificate.line,
                    registers: certificate.registers.clone(),
                    clock: certificate.sigma_clock.clone(),
                };
                let mut cfg = sigma.clone();
                let offset = certificate
                    .tau_clock
                    .left_sub(&certificate.sigma_clock)
                    .expect("τ > σ");
                let mut steps = 0u64;
                for _ in 0..10_000 {
                    match step_in_place(&spec, &p, &oracle, &mut cfg) {
                        None => {}
                        Some(StepResult::Halted(c)) => {
                            panic!("{}: halted at {} after a certificate", p.name, c.clock)
                        }
                        Some(other) => panic!("{}: {other:?} after a certificate", p.name),
                    }
                    steps += 1;
                    // finite loops must revisit the σ-state at τ's offset
                    if let Some(d) = offset.finite_value() {
                        if d == steps.into() {
                            assert_eq!(cfg.line, sigma.line, "{}", p.name);
                            assert_eq!(cfg.registers, sigma.registers, "{}", p.name);
                        }
                    }
                }
                if !offset.is_finite() {
                    // the loop closes through a limit: re-run the engine from
                    // σ and check it reproduces the certificate
                    let replay = Engine::new(&spec, &p, &oracle).run_from(sigma.clone(), &budget);
                    match replay.outcome {
                        RunOutcome::Diverges { certificate: c2 } => {
                            assert_eq!(c2.line, certificate.line, "{}", p.name);
                            assert_eq!(c2.registers, certificate.registers, "{}", p.name);
                        }
                        other => panic!("{}: replay gave {other:?}", p.name),
                    }
                }
            }
            RunOutcome::Halted { .. } => halts += 1,
            RunOutcome::OverflowUndefined { .. } => {}
            other => panic!("{}: unexpected {other:?}", p.name),
        }
    }
    assert!(certificates >= 8, "corpus certifies divergence ({certificates})");
    assert!(halts >= 5, "corpus contains halting controls ({halts})");
    pass(
        6,
        "all certificates replay 10⁴ steps without halting and recur; halting runs never certify",
    );
}

fn first_limit_corpus() -> Vec<(MachineSpec, Program, OracleSpec, Ordinal)> {
    let o = OracleSpec::AllZero;
    let mut corpus: Vec<(MachineSpec, Program, OracleSpec, Ordinal)> = vec![
        (itrm(), library_program("busy_counter").unwrap(), o.clone(), nat(0)),
        (itrm(), library_program("nested_counter").unwrap(), o.clone(), nat(0)),
        (wplus1(), library_program("recognize_omega").unwrap(), o.clone(), omega()),
        (itrm(), samples::two_register_overflow(), o.clone(), nat(0)),
        (itrm(), samples::zeroing_loop(), o.clone(), nat(0)),
        (
            MachineSpec::unbounded(LimitPolicy::Unresetting),
            library_program("busy_counter").unwrap(),
            o.clone(),
            nat(0),
        ),
        (
            witrm(),
            make_recognizer(&samples::empty_computer()).output,
            OracleSpec::AllZero,
            nat(0),
        ),
        (
            witrm(),
            make_recognizer(&samples::evens_computer()).output,
            OracleSpec::periodic(vec![], vec![1, 0]),
            nat(0),
        ),
        (
            itrm(),
            instrument_overflow_detection(&library_program("busy_counter").unwrap(), 0).output,
            o.clone(),
            nat(0),
        ),
        (
            itrm(),
            instrument_overflow_detection(&samples::zeroing_loop(), 0).output,
            o.clone(),
            nat(0),
        ),
        (
            wplus1(),
            compile_resetting_to_unresetting(
                &library_program("busy_counter").unwrap(),
                &library_program("recognize_omega").unwrap(),
            )
            .output,
            o.clone(),
            nat(0),
        ),
    ];
    corpus.push((
        itrm(),
        parse_asm("zero_inc3", "ZERO 2\nINC 2\nINC 2\nINC 2\nJEQ 0 0 0").unwrap(),
        o.clone(),
        nat(0),
    ));
    corpus.push((
        itrm(),
        parse_asm("dip", "ZERO 0\nINC 0\nJEQ 1 1 0").unwrap(),
        o.clone(),
        nat(0),
    ));
    corpus.push((
        itrm(),
        parse_asm("reader", "READ 1 2\nINC 1\nJEQ 0 0 0").unwrap(),
        OracleSpec::finite([7]),
        nat(0),
    ));
    corpus.push((
        itrm(),
        parse_asm(
            "grow",
            "JEQ 1 0 3\nINC 1\nJEQ 2 2 0\nINC 0\nZERO 1\nJEQ 2 2 0",
        )
        .unwrap(),
        o.clone(),
        nat(3),
    ));
    assert_eq!(corpus.len(), 15);
    corpus
}

/// Criterion 7: the accelerator's first-limit state agrees with the
/// brute-force reference on every stabilized register, and growing
/// registers are classified Growing.
#[test]
fn criterion_7_accelerator_vs_reference() {
    let budget = Budget::default();
    for (spec, p, oracle, input) in first_limit_corpus() {
        let report = run(&spec, &p, &oracle, &input, &budget);
        let first = report
            .limit_events
            .first()
            .unwrap_or_else(|| panic!("{}: no limit reached", p.name));
        let brute = brute_liminf_reference(&spec, &p, &oracle, &input, 10_000)
            .expect("valid input");
        let BruteOutcome::Estimate { regs, .. } = brute else {
            panic!("{}: reference ended early: {brute:?}", p.name);
        };
        for (r, stat) in regs.iter().enumerate() {
            match (stat, &first.classes[r]) {
                (Stat::Stable(v), LimitClass::Stabilized(w)) => {
                    assert_eq!(v, w, "{}: register {r}", p.name);
                }
                (Stat::Unstable { .. }, LimitClass::Growing(_)) => {}
                (brute_stat, accel_class) => panic!(
                    "{}: register {r} disagrees: reference {brute_stat:?}, accelerator {accel_class:?}",
                    p.name
                ),
            }
        }
    }
    pass(7, "accelerator and brute-force reference agree on all 15 first limits");
}

/// Criterion 8: nested_counter produces limit events at ω, ω·2, ω·3 and a
/// second-level acceleration landing exactly on ω², with the outer
/// register's liminf ω² = limit_of_progression over delta ω.
#[test]
fn criterion_8_nested_limits() {
    let nest = library_program("nested_counter").unwrap();
    let oracle = OracleSpec::AllZero;
    let budget = Budget::default();

    // unbounded machine: the accumulator actually reaches ω·k and ω²
    let spec = MachineSpec::unbounded(LimitPolicy::Unresetting);
    let report = run(&spec, &nest, &oracle, &nat(0), &budget);
    for k in 1..=3u64 {
        assert!(
            report
                .limit_events
                .iter()
                .any(|e| e.level == 0 && e.clock == omega().repeat(k)),
            "limit event at ω·{k}"
        );
    }
    let big = report
        .limit_events
        .iter()
        .find(|e| e.level == 1)
        .expect("second-level acceleration");
    let omega_sq = Ordinal::limit_of_progression(&Ordinal::zero(), &omega()).unwrap();
    assert_eq!(big.clock, omega_sq, "lands exactly on ω²");
    assert_eq!(big.regs[0], omega_sq, "outer register's liminf is ω²");

    // resetting ω: same structure, certified divergence through ω²
    let report = run(&itrm(), &nest, &oracle, &nat(0), &budget);
    for k in 1..=3u64 {
        assert!(report
            .limit_events
            .iter()
            .any(|e| e.level == 0 && e.clock == omega().repeat(k)));
    }
    assert!(report.limit_events.iter().any(|e| e.level == 1 && e.clock == omega_sq));
    match &report.outcome {
        RunOutcome::Diverges { certificate } => {
            assert_eq!(certificate.tau_clock, omega_sq);
        }
        other => panic!("unexpected {other:?}"),
    }
    pass(8, "nested_counter: limits at ω·k, level-2 landing on ω², liminf ω²");
}

/// Criterion 9: ordinal algebra over the enumerated corpus.
#[test]
fn criterion_9_ordinal_algebra() {
    // all notations with ≤ 3 terms, exponents ≤ ω·2, coefficients ≤ 3
    let exponents: Vec<Ordinal> = vec![
        "0", "1", "2", "w", "w+1", "w+2", "w*2",
    ]
    .into_iter()
    .map(|s| s.parse().unwrap())
    .collect();
    let mut corpus: Vec<Ordinal> = vec![Ordinal::zero()];
    let mut singles: Vec<Ordinal> = Vec::new();
    for e in &exponents {
        for c in 1..=3u32 {
            singles.push(Ordinal::omega_pow(e.clone(), c));
        }
    }
    corpus.extend(singles.iter().cloned());
    for (i, a) in singles.iter().enumerate() {
        for (j, b) in singles.iter().enumerate() {
            let (ea, eb) = (&exponents[i / 3], &exponents[j / 3]);
            if ea <= eb {
                continue;
            }
            let two = a.add(b);
            corpus.push(two.clone());
            for (k, c) in singles.iter().enumerate() {
                if eb > &exponents[k / 3] {
                    corpus.push(two.add(c));
                }
            }
        }
    }
    // total order: embed into positions of a sorted copy and check every
    // pair agrees with the positional order (implies antisymmetry and
    // transitivity on the corpus)
    let mut sorted = corpus.clone();
    sorted.sort();
    sorted.dedup();
    let pos =
        |a: &Ordinal| -> usize { sorted.binary_search(a).expect("corpus member") };
    let mut checks: u64 = 0;
    for a in &corpus {
        for b in &corpus {
            assert_eq!(a.cmp(b), pos(a).cmp(&pos(b)), "{a} vs {b}");
            checks += 1;
        }
    }
    assert!(checks >= 10_000, "≥ 10⁴ cases ({checks})");

    // identities and associativity (sampled triples, deterministic stride)
    for a in &corpus {
        assert_eq!(a.add(&Ordinal::zero()), *a);
        assert_eq!(Ordinal::zero().add(a), *a);
    }
    let n = corpus.len();
    let mut tri = 0;
    let mut idx: usize = 0;
    while tri < 20_000 {
        idx = (idx.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407))
            % (n * n * n);
        let (a, b, c) = (
            &corpus[idx % n],
            &corpus[(idx / n) % n],
            &corpus[(idx / n / n) % n],
        );
        assert_eq!(a.add(b).add(c), a.add(&b.add(c)), "({a}+{b})+{c}");
        tri += 1;
    }

    // strict left monotonicity in the right argument
    let mut mono = 0;
    for b in corpus.iter().step_by(3) {
        for c in corpus.iter().step_by(5) {
            if b < c {
                let a = &corpus[(mono * 7) % n];
                assert!(a.add(b) < a.add(c), "{a}+{b} < {a}+{c}");
                mono += 1;
            }
        }
    }
    assert!(mono > 1_000);

    // next-limit minimality over the corpus
    let limits: Vec<&Ordinal> = sorted.iter().filter(|a| a.is_limit()).collect();
    for a in sorted.iter().step_by(2) {
        let nl = a.next_limit_above();
        assert!(nl.is_limit() && nl > *a);
        for l in &limits {
            assert!(
                !(**l > *a && **l < nl),
                "no corpus limit strictly between {a} and {nl}"
            );
        }
    }

    // parse ∘ format identity on 1000 pseudo-random valid notations
    let mut state: u64 = 0x9e3779b97f4a7c15;
    let mut rand = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for _ in 0..1000 {
        let mut o = Ordinal::zero();
        let terms = 1 + rand() % 4;
        let mut exps: Vec<u64> = (0..terms).map(|_| rand() % 6).collect();
        exps.sort_unstable_by(|a, b| b.cmp(a));
        exps.dedup();
        for e in exps {
            let coeff = 1 + rand() % 9;
            o = o.add(&Ordinal::omega_pow(nat(e), coeff as u32));
        }
        let text = o.to_string();
        assert_eq!(text.parse::<Ordinal>().unwrap(), o, "{text}");
    }
    pass(9, "ordinal order, identities, associativity, monotonicity, minimality, round-trip");
}

/// Criterion 10: the overflow-detector gadget distinguishes a genuine
/// overflow from a cofinally-zero register at the ω-limit.
#[test]
fn criterion_10_overflow_detector() {
    let oracle = OracleSpec::AllZero;
    let budget = Budget::default();
    let spec = itrm();

    let busy = library_program("busy_counter").unwrap();
    let report = instrument_overflow_detection(&busy, 0);
    let companion = report
        .auxiliary_registers
        .iter()
        .find(|a| a.role == trm_core::transforms::AuxRole::Companion)
        .unwrap()
        .index;
    let run1 = run(&spec, &report.output, &oracle, &nat(0), &budget);
    let limit = run1.limit_events.first().expect("limit at ω");
    assert_eq!(limit.clock, omega());
    assert_eq!(limit.regs[0], nat(0), "watched register reads 0");
    assert_eq!(limit.regs[companion], nat(1), "companion certifies overflow");

    let z = samples::zeroing_loop();
    let report = instrument_overflow_detection(&z, 0);
    let companion = report
        .auxiliary_registers
        .iter()
        .find(|a| a.role == trm_core::transforms::AuxRole::Companion)
        .unwrap()
        .index;
    let run2 = run(&spec, &report.output, &oracle, &nat(0), &budget);
    let limit = run2.limit_events.first().expect("limit at ω");
    assert_eq!(limit.regs[0], nat(0), "watched register reads 0");
    assert_eq!(
        limit.regs[companion],
        nat(0),
        "companion reads 0: cofinally zero, not an overflow"
    );
    pass(10, "overflow gadget: companion 1 at a true overflow, 0 when cofinally zero");
}

/// The reference used in criterion 5 and 7 comparisons must itself terminate
/// sensibly on classical machines (sanity for brute_liminf_from).
#[test]
fn brute_reference_from_config_runs() {
    let busy = library_program("busy_counter").unwrap();
    let spec = itrm();
    let cfg = initial_config(&spec, &busy, &nat(0)).unwrap();
    match brute_liminf_from(&spec, &busy, &OracleSpec::AllZero, cfg, 1000) {
        BruteOutcome::Estimate { .. } => {}
        other => panic!("unexpected {other:?}"),
    }
}
