//! Exact arithmetic on ordinal notations below ε₀ in Cantor normal form.
//!
//! An [`Ordinal`] is a finite sum `ω^e₁·c₁ + ω^e₂·c₂ + … + ω^eₙ·cₙ` with the
//! exponents themselves ordinals in strictly decreasing order and every
//! coefficient a positive integer. The empty sum denotes 0. Coefficients are
//! arbitrary-precision so that long successor runs cannot overflow, and the
//! normal form is unique, so equality and hashing are syntactic.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

/// One CNF term `ω^exp · coeff` with `coeff ≥ 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Term {
    exp: Ordinal,
    coeff: BigUint,
}

/// An ordinal below ε₀ in Cantor normal form.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<Term>,
}

/// Classification of an ordinal used to drive limit rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrdinalClass {
    Zero,
    Successor(Ordinal),
    Limit,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrdinalParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("non-canonical notation at byte {pos}: {msg}")]
    NonCanonical { pos: usize, msg: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("limit_of_progression requires a positive delta")]
pub struct ZeroDelta;

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Ordinal::from_nat(1u32)
    }

    pub fn omega() -> Self {
        Ordinal {
            terms: vec![Term {
                exp: Ordinal::one(),
                coeff: BigUint::one(),
            }],
        }
    }

    pub fn from_nat<N: Into<BigUint>>(n: N) -> Self {
        let n = n.into();
        if n.is_zero() {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![Term {
                    exp: Ordinal::zero(),
                    coeff: n,
                }],
            }
        }
    }

    /// `ω^exp · coeff`; zero when `coeff` is zero.
    pub fn omega_pow<N: Into<BigUint>>(exp: Ordinal, coeff: N) -> Self {
        let coeff = coeff.into();
        if coeff.is_zero() {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![Term { exp, coeff }],
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for ordinals below ω (including 0).
    pub fn is_finite(&self) -> bool {
        match self.terms.as_slice() {
            [] => true,
            [t] => t.exp.is_zero(),
            _ => false,
        }
    }

    /// The natural-number value, if below ω.
    pub fn finite_value(&self) -> Option<BigUint> {
        match self.terms.as_slice() {
            [] => Some(BigUint::zero()),
            [t] if t.exp.is_zero() => Some(t.coeff.clone()),
            _ => None,
        }
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.classify(), OrdinalClass::Limit)
    }

    /// Splits `a` into its limit part and finite tail: `a = limit ⊕ n`.
    pub fn split_finite(&self) -> (Ordinal, BigUint) {
        match self.terms.last() {
            Some(t) if t.exp.is_zero() => (
                Ordinal {
                    terms: self.terms[..self.terms.len() - 1].to_vec(),
                },
                t.coeff.clone(),
            ),
            _ => (self.clone(), BigUint::zero()),
        }
    }

    /// Leading exponent, or None for 0.
    pub fn leading_exp(&self) -> Option<&Ordinal> {
        self.terms.first().map(|t| &t.exp)
    }

    /// Non-commutative ordinal addition in CNF.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(first) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        for t in &self.terms {
            match t.exp.cmp(&first.exp) {
                Ordering::Greater => terms.push(t.clone()),
                _ => break,
            }
        }
        // merge the boundary term when exponents coincide
        let merged = self
            .terms
            .iter()
            .find(|t| t.exp == first.exp)
            .map(|t| &t.coeff + &first.coeff)
            .unwrap_or_else(|| first.coeff.clone());
        terms.push(Term {
            exp: first.exp.clone(),
            coeff: merged,
        });
        terms.extend(rhs.terms[1..].iter().cloned());
        Ordinal { terms }
    }

    pub fn add_nat<N: Into<BigUint>>(&self, n: N) -> Ordinal {
        self.add(&Ordinal::from_nat(n))
    }

    pub fn succ(&self) -> Ordinal {
        self.add_nat(1u32)
    }

    pub fn classify(&self) -> OrdinalClass {
        match self.terms.last() {
            None => OrdinalClass::Zero,
            Some(t) if t.exp.is_zero() => {
                let mut terms = self.terms.clone();
                let last = terms.last_mut().unwrap();
                if last.coeff.is_one() {
                    terms.pop();
                } else {
                    last.coeff -= 1u32;
                }
                OrdinalClass::Successor(Ordinal { terms })
            }
            Some(_) => OrdinalClass::Limit,
        }
    }

    /// Smallest limit ordinal strictly greater than `self`.
    pub fn next_limit_above(&self) -> Ordinal {
        let (limit_part, _) = self.split_finite();
        limit_part.add(&Ordinal::omega())
    }

    /// `base + delta·ω`, the supremum of `base + delta·k` over finite `k`.
    ///
    /// `delta·ω` collapses to `ω^(e+1)` where `e` is delta's leading exponent.
    pub fn limit_of_progression(base: &Ordinal, delta: &Ordinal) -> Result<Ordinal, ZeroDelta> {
        let Some(lead) = delta.leading_exp() else {
            return Err(ZeroDelta);
        };
        let delta_omega = Ordinal::omega_pow(lead.succ(), 1u32);
        Ok(base.add(&delta_omega))
    }

    /// The unique `d` with `smaller + d = self`, when `smaller ≤ self`.
    pub fn left_sub(&self, smaller: &Ordinal) -> Option<Ordinal> {
        let mut i = 0;
        loop {
            match (self.terms.get(i), smaller.terms.get(i)) {
                (_, None) => {
                    return Some(Ordinal {
                        terms: self.terms[i..].to_vec(),
                    });
                }
                (None, Some(_)) => return None,
                (Some(a), Some(b)) => match a.exp.cmp(&b.exp) {
                    Ordering::Less => return None,
                    Ordering::Greater => {
                        // self dominates from here; the rest of `smaller` is absorbed
                        return Some(Ordinal {
                            terms: self.terms[i..].to_vec(),
                        });
                    }
                    Ordering::Equal => match a.coeff.cmp(&b.coeff) {
                        Ordering::Less => return None,
                        Ordering::Greater => {
                            // later terms of `smaller` are absorbed by this one
                            let mut terms = vec![Term {
                                exp: a.exp.clone(),
                                coeff: &a.coeff - &b.coeff,
                            }];
                            terms.extend(self.terms[i + 1..].iter().cloned());
                            return Some(Ordinal { terms });
                        }
                        Ordering::Equal => {
                            i += 1;
                        }
                    },
                },
            }
        }
    }

    /// `self` added to itself `k` times (`self·k` for a finite repeat count).
    pub fn repeat(&self, k: u64) -> Ordinal {
        // CNF shortcut: for k ≥ 1, delta·k = ω^e·(c·k) + tail
        if k == 0 || self.is_zero() {
            return Ordinal::zero();
        }
        let mut terms = self.terms.clone();
        terms[0].coeff = &terms[0].coeff * BigUint::from(k);
        Ordinal { terms }
    }

    /// Number of CNF terms (used by enumeration bounds in tests).
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut i = 0;
        loop {
            match (self.terms.get(i), other.terms.get(i)) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(a), Some(b)) => {
                    match a.exp.cmp(&b.exp).then_with(|| a.coeff.cmp(&b.coeff)) {
                        Ordering::Equal => i += 1,
                        non_eq => return non_eq,
                    }
                }
            }
        }
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if t.exp.is_zero() {
                write!(f, "{}", t.coeff)?;
            } else {
                if t.exp == Ordinal::one() {
                    write!(f, "w")?;
                } else {
                    write!(f, "w^({})", t.exp)?;
                }
                if !t.coeff.is_one() {
                    write!(f, "*{}", t.coeff)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl serde::Serialize for Ordinal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Ordinal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        p.skip_ws();
        let ord = p.parse_ordinal()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(OrdinalParseError::Syntax {
                pos: p.pos,
                msg: "trailing input".into(),
            });
        }
        Ok(ord)
    }
}

/// Parses the canonical ordinal grammar:
/// `ordinal := "0" | term ("+" term)* ; term := "w" ("^" "(" ordinal ")")? ("*" nat)? | nat`.
pub fn parse_ordinal(s: &str) -> Result<Ordinal, OrdinalParseError> {
    s.parse()
}

pub fn format_ordinal(a: &Ordinal) -> String {
    a.to_string()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_nat(&mut self) -> Result<BigUint, OrdinalParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(OrdinalParseError::Syntax {
                pos: start,
                msg: "expected a number".into(),
            });
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(digits.parse().unwrap())
    }

    fn parse_term(&mut self) -> Result<(Ordinal, BigUint, usize), OrdinalParseError> {
        let start = self.pos;
        if self.eat(b'w') {
            let exp = if self.eat(b'^') {
                if !self.eat(b'(') {
                    return Err(OrdinalParseError::Syntax {
                        pos: self.pos,
                        msg: "expected '(' after '^'".into(),
                    });
                }
                self.skip_ws();
                let e = self.parse_ordinal()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(OrdinalParseError::Syntax {
                        pos: self.pos,
                        msg: "expected ')'".into(),
                    });
                }
                e
            } else {
                Ordinal::one()
            };
            let coeff = if self.eat(b'*') {
                self.parse_nat()?
            } else {
                BigUint::one()
            };
            if coeff.is_zero() {
                return Err(OrdinalParseError::NonCanonical {
                    pos: start,
                    msg: "coefficient must be positive".into(),
                });
            }
            if exp.is_zero() {
                return Err(OrdinalParseError::NonCanonical {
                    pos: start,
                    msg: "write the exponent-0 term as a bare number".into(),
                });
            }
            Ok((exp, coeff, start))
        } else {
            let n = self.parse_nat()?;
            if n.is_zero() {
                return Err(OrdinalParseError::NonCanonical {
                    pos: start,
                    msg: "a 0 term is only valid as the whole ordinal".into(),
                });
            }
            Ok((Ordinal::zero(), n, start))
        }
    }

    fn parse_ordinal(&mut self) -> Result<Ordinal, OrdinalParseError> {
        // lone "0"
        if self.peek() == Some(b'0')
            && !self
                .src
                .get(self.pos + 1)
                .is_some_and(|c| c.is_ascii_digit())
        {
            self.pos += 1;
            return Ok(Ordinal::zero());
        }
        let mut terms: Vec<Term> = Vec::new();
        loop {
            let (exp, coeff, start) = self.parse_term()?;
            if let Some(prev) = terms.last() {
                if prev.exp <= exp {
                    return Err(OrdinalParseError::NonCanonical {
                        pos: start,
                        msg: "exponents must strictly decrease".into(),
                    });
                }
            }
            terms.push(Term { exp, coeff });
            self.skip_ws();
            if !self.eat(b'+') {
                break;
            }
            self.skip_ws();
        }
        Ok(Ordinal { terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    /// Independent comparison oracle for ordinals below ω^ω: map the notation
    /// to its coefficient vector by finite power and compare positionally.
    fn poly_vec(a: &Ordinal) -> Option<Vec<BigUint>> {
        let mut v: Vec<BigUint> = Vec::new();
        for t in &a.terms {
            let e: usize = t.exp.finite_value()?.try_into().ok()?;
            if v.len() <= e {
                v.resize(e + 1, BigUint::zero());
            }
            v[e] = &v[e] + &t.coeff;
        }
        Some(v)
    }

    fn poly_cmp(a: &Ordinal, b: &Ordinal) -> Ordering {
        let (mut va, mut vb) = (poly_vec(a).unwrap(), poly_vec(b).unwrap());
        let n = va.len().max(vb.len());
        va.resize(n, BigUint::zero());
        vb.resize(n, BigUint::zero());
        for i in (0..n).rev() {
            match va[i].cmp(&vb[i]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    /// Independent CNF addition for ordinals below ω^ω via coefficient vectors:
    /// `a + b` keeps a's coefficients above b's leading power, merges at it,
    /// and takes b's coefficients below it.
    fn poly_add(a: &Ordinal, b: &Ordinal) -> Ordinal {
        let (mut va, vb) = (poly_vec(a).unwrap(), poly_vec(b).unwrap());
        if let Some(e) = vb.iter().rposition(|c| !c.is_zero()) {
            if va.len() <= e {
                va.resize(e + 1, BigUint::zero());
            }
            for (i, c) in vb.iter().enumerate() {
                match i.cmp(&e) {
                    Ordering::Less => va[i] = c.clone(),
                    Ordering::Equal => va[i] = &va[i] + c,
                    Ordering::Greater => {}
                }
            }
        }
        let terms = va
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| Term {
                exp: Ordinal::from_nat(i as u64),
                coeff: c.clone(),
            })
            .collect();
        Ordinal { terms }
    }

    #[test]
    fn compare_examples() {
        assert_eq!(ord("w").cmp(&ord("5")), Ordering::Greater);
        assert_eq!(ord("0").cmp(&ord("0")), Ordering::Equal);
        // derived via the independent poly-vector oracle
        let a = ord("w^(2)+3");
        let b = ord("w*5");
        assert_eq!(poly_cmp(&a, &b), Ordering::Greater);
        assert_eq!(a.cmp(&b), Ordering::Greater);
    }

    #[test]
    fn add_examples() {
        assert_eq!(ord("1").add(&ord("w")), ord("w"));
        assert_eq!(ord("w").add(&ord("1")), ord("w+1"));
        let a = ord("w*2+3");
        let expect = poly_add(&a, &ord("w"));
        assert_eq!(expect, ord("w*3"));
        assert_eq!(a.add(&ord("w")), ord("w*3"));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(ord("0").classify(), OrdinalClass::Zero);
        assert_eq!(
            ord("w+4").classify(),
            OrdinalClass::Successor(ord("w+3"))
        );
        assert_eq!(ord("w^(2)").classify(), OrdinalClass::Limit);
    }

    #[test]
    fn next_limit_examples() {
        assert_eq!(ord("0").next_limit_above(), ord("w"));
        assert_eq!(ord("w").next_limit_above(), ord("w*2"));
        // derived: scan candidate limits near the input
        let a = ord("w^(2)+w*3+7");
        let nl = a.next_limit_above();
        assert_eq!(nl, ord("w^(2)+w*4"));
        assert!(nl.is_limit() && nl > a);
        for k in 0u32..40 {
            let between = ord("w^(2)+w*3").add_nat(k);
            assert!(!(between > a && between < nl && between.is_limit()));
        }
    }

    #[test]
    fn limit_of_progression_examples() {
        let lop = |b: &str, d: &str| {
            Ordinal::limit_of_progression(&ord(b), &ord(d)).unwrap()
        };
        assert_eq!(lop("5", "1"), ord("w"));
        // derived: sup of base + delta·k stabilizes below the claimed limit
        let base = ord("w*2+3");
        let lim = lop("w*2+3", "1");
        assert_eq!(lim, ord("w*3"));
        let mut x = base.clone();
        for _ in 0..1000 {
            x = x.add(&ord("1"));
            assert!(x < lim);
        }
        let lim2 = lop("0", "w");
        assert_eq!(lim2, ord("w^(2)"));
        for k in 1..1000u64 {
            assert!(ord("w").repeat(k) < lim2);
        }
        assert_eq!(
            Ordinal::limit_of_progression(&ord("5"), &Ordinal::zero()),
            Err(ZeroDelta)
        );
    }

    #[test]
    fn parse_format_examples() {
        assert_eq!(ord("w^(2)*1+w*3+5"), ord("w^(2)+w*3+5"));
        assert_eq!(ord("0"), Ordinal::zero());
        assert!(matches!(
            "w+w".parse::<Ordinal>(),
            Err(OrdinalParseError::NonCanonical { .. })
        ));
        assert!("w+".parse::<Ordinal>().is_err());
        assert!("w*0".parse::<Ordinal>().is_err());
        for s in ["0", "w", "w+1", "w^(w)+w^(2)*4+w*3+17", "w^(w+1)*2+1"] {
            let a = ord(s);
            assert_eq!(format_ordinal(&a).parse::<Ordinal>().unwrap(), a);
        }
    }

    #[test]
    fn left_sub_cases() {
        let cases = [
            ("w", "1", Some("w")),
            ("w+5", "w+1", Some("4")),
            ("w*5", "w*2+3", Some("w*3")),
            ("w*2", "w+1", Some("w")),
            ("w^(2)+5", "w+1", Some("w^(2)+5")),
            ("w", "w", Some("0")),
            ("3", "w", None),
            ("w+1", "w+2", None),
        ];
        for (b, a, want) in cases {
            let got = ord(b).left_sub(&ord(a));
            assert_eq!(got, want.map(ord), "{b} - {a}");
            if let Some(d) = want.map(ord) {
                assert_eq!(ord(a).add(&d), ord(b), "{a} + ({b}-{a})");
            }
        }
    }

    #[test]
    fn split_finite_works() {
        assert_eq!(ord("w*2+7").split_finite(), (ord("w*2"), 7u32.into()));
        assert_eq!(ord("w").split_finite(), (ord("w"), BigUint::zero()));
        assert_eq!(ord("9").split_finite(), (ord("0"), 9u32.into()));
    }
}
