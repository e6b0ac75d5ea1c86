//! Affine descriptions of register values over acceleration variables, and
//! the decision procedures the detector uses to prove that an observed
//! pattern persists forever.
//!
//! A [`Form`] describes a register's value at a trace position as
//! `base + slope_n·v_n + … + slope_1·w + slope_0·u`, evaluated outermost
//! variable first with ordinal addition. Variable 0 is the inner-loop
//! iteration counter, variable 1 the window index at the current detection
//! level, and higher variables are meta-level window counters. All variables
//! range over the naturals; slopes are nonnegative, and only meta variables
//! ever carry infinite slopes.
//!
//! Comparison outcomes, oracle reads and increment overflows are only
//! accepted as stable when the relevant (in-)equalities can be decided for
//! every assignment; anything undecidable makes the caller give up the
//! acceleration rather than guess.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::ordinal::Ordinal;

pub const VAR_LOOP: usize = 0;
pub const VAR_WINDOW: usize = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    pub base: Ordinal,
    /// `slopes[i]` is the slope on variable `i`; trailing zeros are trimmed.
    pub slopes: Vec<Ordinal>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

/// Trip-count bound for the inner-loop variable: `u < t0 + dt·w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripCount {
    pub t0: BigUint,
    pub dt: BigUint,
}

/// Variable ranges: every variable is a natural; the loop variable, when
/// bounded, additionally satisfies `u < trips(w)`.
#[derive(Clone, Debug, Default)]
pub struct Region {
    pub u_bound: Option<TripCount>,
}

impl Form {
    pub fn constant(base: Ordinal) -> Form {
        Form {
            base,
            slopes: Vec::new(),
        }
    }

    pub fn with_slope(mut self, var: usize, slope: Ordinal) -> Form {
        if self.slopes.len() <= var {
            self.slopes.resize(var + 1, Ordinal::zero());
        }
        self.slopes[var] = slope;
        self.trim();
        self
    }

    fn trim(&mut self) {
        while self.slopes.last().is_some_and(Ordinal::is_zero) {
            self.slopes.pop();
        }
    }

    pub fn slope(&self, var: usize) -> Ordinal {
        self.slopes.get(var).cloned().unwrap_or_else(Ordinal::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.slopes.is_empty()
    }

    /// Evaluates the form at a concrete assignment (missing entries are 0).
    pub fn eval(&self, assignment: &[u64]) -> Ordinal {
        let mut acc = self.base.clone();
        for (var, slope) in self.slopes.iter().enumerate().rev() {
            let v = assignment.get(var).copied().unwrap_or(0);
            if v > 0 && !slope.is_zero() {
                acc = acc.add(&slope.repeat(v));
            }
        }
        acc
    }

    /// Substitutes the outermost variable `var` with a concrete value,
    /// folding its contribution into the base. Only valid when `var` is the
    /// highest variable with a nonzero slope.
    fn substitute_outer(&self, var: usize, value: u64) -> Form {
        debug_assert!(self.slopes.len() <= var + 1);
        let mut f = self.clone();
        let slope = f.slope(var);
        if f.slopes.len() > var {
            f.slopes.truncate(var);
            f.trim();
        }
        if value > 0 && !slope.is_zero() {
            f.base = f.base.add(&slope.repeat(value));
        }
        f
    }

    /// An ordinal strictly greater than every value of the form: the variable
    /// contributions are each below `ω^(E+1)` for `E` the largest slope
    /// exponent, and `ω^(E+1)` is additively indecomposable, so their finite
    /// sum stays below it too.
    fn strict_sup(&self) -> Ordinal {
        let max_exp = self
            .slopes
            .iter()
            .filter_map(|s| s.leading_exp().cloned())
            .max();
        match max_exp {
            None => self.base.succ(),
            Some(e) => self.base.add(&Ordinal::omega_pow(e.succ(), 1u32)),
        }
    }
}

fn to_bigint(n: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, n.clone())
}

/// Signed coefficient of `var` in `f − g` when both slopes are finite.
fn net_coeff(f: &Form, g: &Form, var: usize) -> Option<BigInt> {
    let a = f.slope(var).finite_value()?;
    let b = g.slope(var).finite_value()?;
    Some(to_bigint(&a) - to_bigint(&b))
}

/// Is there an assignment in `region` where the two forms take equal values?
pub fn collision(f: &Form, g: &Form, region: &Region) -> Tri {
    let nvars = f.slopes.len().max(g.slopes.len());
    // find the outermost variable carrying an infinite slope in either form
    let outer_infinite = (0..nvars)
        .rev()
        .find(|&v| !f.slope(v).is_finite() || !g.slope(v).is_finite());
    match outer_infinite {
        None => finite_collision(f, g, region, nvars),
        Some(h) => {
            // Any variable outside h must be handled before h: substitute the
            // outermost variable until h is outermost.
            if nvars - 1 > h {
                return split_outer(f, g, region, nvars - 1);
            }
            let df = f.slope(h);
            let dg = g.slope(h);
            let scale_ok = {
                // inner contributions must not outgrow the common slope's
                // scale, or the v ≥ 1 reduction below loses information
                let lead = df.leading_exp().cloned().unwrap_or_else(Ordinal::zero);
                (0..h).all(|v| {
                    [f.slope(v), g.slope(v)]
                        .iter()
                        .all(|s| s.leading_exp().is_none_or(|e| *e <= lead))
                })
            };
            if df == dg && scale_ok {
                // v = 0 branch, plus the v ≥ 1 branch where one copy of the
                // slope is absorbed into both bases. Both values then carry
                // the identical common term δ·(v−1), which cancels in the
                // ω^e-coefficient equation, so equality for v ≥ 1 no longer
                // depends on v.
                let zero_case = collision(
                    &f.substitute_outer(h, 0),
                    &g.substitute_outer(h, 0),
                    region,
                );
                if zero_case == Tri::Yes {
                    return Tri::Yes;
                }
                let f1 = f.substitute_outer(h, 1).with_slope(h, Ordinal::zero());
                let g1 = g.substitute_outer(h, 1).with_slope(h, Ordinal::zero());
                let pos_case = collision(&f1, &g1, region);
                combine_or(zero_case, pos_case)
            } else {
                split_outer(f, g, region, h)
            }
        }
    }
}

/// Case-split on the outermost variable: small values concretely, then a
/// magnitude argument for the unbounded tail.
fn split_outer(f: &Form, g: &Form, region: &Region, var: usize) -> Tri {
    const SPLIT: u64 = 3;
    let mut any_unknown = false;
    for v in 0..=SPLIT {
        match collision(
            &f.substitute_outer(var, v),
            &g.substitute_outer(var, v),
            region,
        ) {
            Tri::Yes => return Tri::Yes,
            Tri::Unknown => any_unknown = true,
            Tri::No => {}
        }
    }
    if any_unknown {
        return Tri::Unknown;
    }
    // beyond the split: one form must dominate the other for good
    let beyond = SPLIT + 1;
    if dominates_from(f, g, var, beyond, region) || dominates_from(g, f, var, beyond, region) {
        Tri::No
    } else {
        Tri::Unknown
    }
}

/// True when `big`'s minimum value at `var = from` already clears a strict
/// upper bound on every value `small` can ever take. `big` is monotone in all
/// variables, so this settles every assignment with `var ≥ from`.
fn dominates_from(big: &Form, small: &Form, var: usize, from: u64, _region: &Region) -> bool {
    let mut assign = vec![0u64; var + 1];
    assign[var] = from;
    big.eval(&assign) >= small.strict_sup()
}

fn combine_or(a: Tri, b: Tri) -> Tri {
    match (a, b) {
        (Tri::Yes, _) | (_, Tri::Yes) => Tri::Yes,
        (Tri::No, Tri::No) => Tri::No,
        _ => Tri::Unknown,
    }
}

/// Collision when every slope is finite: the infinite parts of the bases must
/// match, and the finite parts give a linear Diophantine problem.
fn finite_collision(f: &Form, g: &Form, region: &Region, nvars: usize) -> Tri {
    let (f_inf, f_fin) = f.base.split_finite();
    let (g_inf, g_fin) = g.base.split_finite();
    if f_inf != g_inf {
        return Tri::No;
    }
    // Σ coeff_i · v_i = c  over the region
    let c = to_bigint(&g_fin) - to_bigint(&f_fin);
    let mut coeffs: Vec<(usize, BigInt)> = Vec::new();
    for v in 0..nvars {
        let Some(a) = net_coeff(f, g, v) else {
            return Tri::Unknown;
        };
        if !a.is_zero() {
            coeffs.push((v, a));
        }
    }
    solve_linear(&coeffs, &c, region)
}

/// Does `Σ coeff_i·v_i = c` have a solution over naturals, with the loop
/// variable bounded by the region's trip count?
fn solve_linear(coeffs: &[(usize, BigInt)], c: &BigInt, region: &Region) -> Tri {
    match coeffs {
        [] => {
            if c.is_zero() {
                Tri::Yes
            } else {
                Tri::No
            }
        }
        [(var, a)] => {
            if *var == VAR_LOOP {
                return solve_loop_pair(a, &BigInt::zero(), c, region);
            }
            let (q, r) = c.div_rem(a);
            if r.is_zero() && !q.is_negative() {
                Tri::Yes
            } else {
                Tri::No
            }
        }
        [(v1, a1), (v2, a2)] if *v1 == VAR_LOOP => {
            if *v2 == VAR_WINDOW {
                solve_loop_pair(a1, a2, c, region)
            } else {
                // loop variable coupled with a meta variable: not needed by
                // any supported pattern
                Tri::Unknown
            }
        }
        _ => {
            if coeffs.iter().any(|(v, _)| *v == VAR_LOOP) {
                return Tri::Unknown;
            }
            solve_unbounded(coeffs, c)
        }
    }
}

/// `Σ a_i·x_i = c` over unconstrained naturals.
fn solve_unbounded(coeffs: &[(usize, BigInt)], c: &BigInt) -> Tri {
    let g = coeffs
        .iter()
        .fold(BigInt::zero(), |acc, (_, a)| acc.gcd(a));
    if !(c % &g).is_zero() {
        return Tri::No;
    }
    let has_pos = coeffs.iter().any(|(_, a)| a.is_positive());
    let has_neg = coeffs.iter().any(|(_, a)| a.is_negative());
    if has_pos && has_neg {
        // mixed signs reach every multiple of the gcd
        return Tri::Yes;
    }
    // same-signed: flip so all positive and c must be ≥ 0
    let (coeffs, c) = if has_neg {
        (
            coeffs.iter().map(|(v, a)| (*v, -a)).collect::<Vec<_>>(),
            -c,
        )
    } else {
        (coeffs.to_vec(), c.clone())
    };
    if c.is_negative() {
        return Tri::No;
    }
    if c.is_zero() {
        return Tri::Yes;
    }
    match coeffs.as_slice() {
        [(_, a)] => {
            if (&c % a).is_zero() {
                Tri::Yes
            } else {
                Tri::No
            }
        }
        [(_, a), (_, b)] => {
            // minimal x ≥ 0 with a·x ≡ c (mod b); solvable iff a·x ≤ c
            let g2 = a.gcd(b);
            if !(&c % &g2).is_zero() {
                return Tri::No;
            }
            let bb = (b / &g2).abs();
            if bb.is_one() {
                // b spans everything once divisibility holds
                return Tri::Yes;
            }
            let aa = (a / &g2).mod_floor(&bb);
            let cc = (&c / &g2).mod_floor(&bb);
            let inv = mod_inverse(&aa, &bb);
            match inv {
                Some(inv) => {
                    let x = (cc * inv).mod_floor(&bb);
                    if &x * a <= c {
                        Tri::Yes
                    } else {
                        Tri::No
                    }
                }
                None => Tri::Unknown,
            }
        }
        _ => Tri::Unknown,
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// `a_u·u + a_w·w = c` with `w ≥ 0` and `0 ≤ u < t0 + dt·w`.
fn solve_loop_pair(a_u: &BigInt, a_w: &BigInt, c: &BigInt, region: &Region) -> Tri {
    let Some(trip) = &region.u_bound else {
        // unbounded loop variable behaves like any other natural
        return solve_unbounded(
            &[(VAR_LOOP, a_u.clone()), (VAR_WINDOW, a_w.clone())]
                .into_iter()
                .filter(|(_, a)| !a.is_zero())
                .collect::<Vec<_>>(),
            c,
        );
    };
    let t0 = to_bigint(&trip.t0);
    let dt = to_bigint(&trip.dt);
    let u_max_at = |w: &BigInt| -> BigInt { &t0 - 1 + &dt * w };

    if a_u.is_zero() && a_w.is_zero() {
        return if c.is_zero() { Tri::Yes } else { Tri::No };
    }
    if a_u.is_zero() {
        let (q, r) = c.div_rem(a_w);
        return if r.is_zero() && !q.is_negative() {
            Tri::Yes
        } else {
            Tri::No
        };
    }
    if a_w.is_zero() {
        let (q, r) = c.div_rem(a_u);
        if !r.is_zero() || q.is_negative() {
            return Tri::No;
        }
        // need some w with u ≤ u_max(w)
        return if q <= u_max_at(&BigInt::zero()) || dt.is_positive() {
            Tri::Yes
        } else {
            Tri::No
        };
    }
    // general case: parametrize all integer solutions
    let e = a_u.extended_gcd(a_w);
    if !(c % &e.gcd).is_zero() {
        return Tri::No;
    }
    let scale = c / &e.gcd;
    let u0 = &e.x * &scale;
    let w0 = &e.y * &scale;
    let step_u = a_w / &e.gcd;
    let step_w = -(a_u / &e.gcd);
    // u(t) = u0 + step_u·t ≥ 0
    // w(t) = w0 + step_w·t ≥ 0
    // u(t) − dt·w(t) ≤ t0 − 1
    let mut lo: Option<BigInt> = None;
    let mut hi: Option<BigInt> = None;
    let mut add_constraint = |alpha: BigInt, beta: BigInt| -> bool {
        // alpha·t ≤ beta
        match alpha.sign() {
            Sign::NoSign => !beta.is_negative(),
            Sign::Plus => {
                let b = beta.div_floor(&alpha);
                hi = Some(match hi.take() {
                    Some(h) => h.min(b),
                    None => b,
                });
                true
            }
            Sign::Minus => {
                let b = beta.div_floor(&alpha); // negative divisor: floor is ceil of the flip
                lo = Some(match lo.take() {
                    Some(l) => l.max(b),
                    None => b,
                });
                true
            }
        }
    };
    // -step_u·t ≤ u0
    if !add_constraint(-&step_u, u0.clone()) {
        return Tri::No;
    }
    // -step_w·t ≤ w0
    if !add_constraint(-&step_w, w0.clone()) {
        return Tri::No;
    }
    // (step_u − dt·step_w)·t ≤ t0 − 1 − u0 + dt·w0
    let alpha = &step_u - &dt * &step_w;
    let beta = &t0 - 1 - &u0 + &dt * &w0;
    if !add_constraint(alpha, beta) {
        return Tri::No;
    }
    match (lo, hi) {
        (Some(l), Some(h)) if l > h => Tri::No,
        _ => Tri::Yes,
    }
}

/// Outcome stability of a `JEQ` whose observed outcome was `observed_equal`.
pub fn jeq_stable(a: &Form, b: &Form, observed_equal: bool, region: &Region) -> bool {
    if observed_equal {
        // identical value functions stay equal at every assignment
        a == b
    } else {
        collision(a, b, region) == Tri::No
    }
}

/// The oracle bit read at an index described by `idx`, when that bit is the
/// same for every assignment in the region.
pub fn stable_read_bit(
    idx: &Form,
    threshold: u64,
    period: &[u8],
    region: &Region,
) -> Option<u8> {
    let (base_inf, base_fin) = idx.base.split_finite();
    if !base_inf.is_zero() {
        // every index is ≥ ω, and such reads answer 0
        return Some(0);
    }
    if let Some(h) = (0..idx.slopes.len())
        .rev()
        .find(|&v| !idx.slope(v).is_finite())
    {
        // v ≥ 1 pushes the index past ω (bit 0); v = 0 must agree
        let reduced = idx.substitute_outer(h, 0);
        return match stable_read_bit(&reduced, threshold, period, region) {
            Some(0) => Some(0),
            _ => None,
        };
    }
    if idx.is_constant() {
        let m = period.len() as u64;
        let n: BigUint = base_fin;
        let th = BigUint::from(threshold);
        if n >= th {
            let rem = ((&n - &th) % BigUint::from(m)).try_into().unwrap_or(0u64);
            return Some(period[rem as usize]);
        }
        // below the tail threshold the bit is still fixed: the index is a
        // single concrete natural
        return None; // caller reads it concretely instead
    }
    // growing finite index: all positive slopes must respect the tail period
    let m = BigUint::from(period.len() as u64);
    let th = BigUint::from(threshold);
    if base_fin < th {
        return None;
    }
    for s in &idx.slopes {
        let sv = s.finite_value()?;
        if !(&sv % &m).is_zero() {
            return None;
        }
    }
    let rem: u64 = ((&base_fin - &th) % &m).try_into().unwrap_or(0);
    let _ = region;
    Some(period[rem as usize])
}

/// Can an increment on a register described by `form` ever hit the bound?
/// (`v + 1 = β` needs β to be a successor with predecessor v.)
pub fn inc_can_overflow(form: &Form, bound: Option<&Ordinal>, region: &Region) -> Tri {
    let Some(bound) = bound else {
        return Tri::No;
    };
    match bound.classify() {
        crate::ordinal::OrdinalClass::Successor(pred) => {
            collision(form, &Form::constant(pred), region)
        }
        _ => Tri::No,
    }
}
