//! Finitely-described real oracles (subsets of ω).
//!
//! The tail descriptor gives, for every oracle, a threshold and a repeating
//! bit pattern valid from that threshold on; the accelerator uses it to
//! reason about reads at unboundedly growing indices.

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ordinal::Ordinal;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum OracleSpec {
    #[serde(rename = "allzero")]
    AllZero,
    #[serde(rename = "finite")]
    Finite { members: Vec<u64> },
    #[serde(rename = "periodic")]
    Periodic { prefix: Vec<u8>, period: Vec<u8> },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("finite-support members must be distinct")]
    DuplicateMembers,
    #[error("period must be nonempty")]
    EmptyPeriod,
    #[error("oracle bits must be 0 or 1")]
    BadBit,
}

impl OracleSpec {
    pub fn finite<I: IntoIterator<Item = u64>>(members: I) -> OracleSpec {
        let mut members: Vec<u64> = members.into_iter().collect();
        members.sort_unstable();
        OracleSpec::Finite { members }
    }

    pub fn periodic(prefix: Vec<u8>, period: Vec<u8>) -> OracleSpec {
        OracleSpec::Periodic { prefix, period }
    }

    pub fn check(&self) -> Result<(), OracleError> {
        match self {
            OracleSpec::AllZero => Ok(()),
            OracleSpec::Finite { members } => {
                let mut sorted = members.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != members.len() {
                    return Err(OracleError::DuplicateMembers);
                }
                Ok(())
            }
            OracleSpec::Periodic { prefix, period } => {
                if period.is_empty() {
                    return Err(OracleError::EmptyPeriod);
                }
                if prefix.iter().chain(period).any(|&b| b > 1) {
                    return Err(OracleError::BadBit);
                }
                Ok(())
            }
        }
    }

    /// Membership bit at a finite index.
    pub fn bit_at_nat(&self, n: &BigUint) -> u8 {
        match self {
            OracleSpec::AllZero => 0,
            OracleSpec::Finite { members } => {
                let as_u64: Option<u64> = n.try_into().ok();
                match as_u64 {
                    Some(n) => u8::from(members.contains(&n)),
                    None => 0,
                }
            }
            OracleSpec::Periodic { prefix, period } => {
                if let Some(i) = usize::try_from(n).ok().filter(|&i| i < prefix.len()) {
                    prefix[i]
                } else {
                    let off = n - BigUint::from(prefix.len());
                    let idx = off.mod_floor(&BigUint::from(period.len()));
                    period[usize::try_from(&idx).unwrap()]
                }
            }
        }
    }

    /// Bit read at an ordinal index. Oracles are subsets of ω, so reads at
    /// indices ≥ ω answer 0 (non-membership).
    pub fn bit_at(&self, index: &Ordinal) -> u8 {
        match index.finite_value() {
            Some(n) => self.bit_at_nat(&n),
            None => 0,
        }
    }

    /// `(threshold, period)` such that for all n ≥ threshold,
    /// `bit_at(n) = period[(n − threshold) mod |period|]`.
    pub fn tail_descriptor(&self) -> (u64, Vec<u8>) {
        match self {
            OracleSpec::AllZero => (0, vec![0]),
            OracleSpec::Finite { members } => {
                (members.iter().max().map_or(0, |m| m + 1), vec![0])
            }
            OracleSpec::Periodic { prefix, period } => (prefix.len() as u64, period.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(n: u64) -> Ordinal {
        Ordinal::from_nat(n)
    }

    #[test]
    fn finite_support_bits() {
        let o = OracleSpec::finite([0, 2]);
        assert_eq!(o.bit_at(&nat(2)), 1);
        assert_eq!(o.bit_at(&nat(1)), 0);
        assert_eq!(o.bit_at(&Ordinal::omega()), 0);
    }

    #[test]
    fn periodic_bits_follow_prefix_then_period() {
        let o = OracleSpec::periodic(vec![1], vec![0, 1]);
        // expanded: 1, then 0,1 repeating → index 4 = 1
        let expanded = [1u8, 0, 1, 0, 1, 0, 1];
        for (i, &b) in expanded.iter().enumerate() {
            assert_eq!(o.bit_at(&nat(i as u64)), b, "index {i}");
        }
        assert_eq!(o.bit_at(&nat(4)), 1);
    }

    #[test]
    fn tail_descriptors() {
        assert_eq!(OracleSpec::AllZero.tail_descriptor(), (0, vec![0]));
        assert_eq!(OracleSpec::finite([0, 2]).tail_descriptor(), (3, vec![0]));
        assert_eq!(
            OracleSpec::periodic(vec![1], vec![0, 1]).tail_descriptor(),
            (1, vec![0, 1])
        );
    }

    #[test]
    fn tail_descriptor_agrees_with_bits() {
        let oracles = [
            OracleSpec::AllZero,
            OracleSpec::finite([]),
            OracleSpec::finite([0, 2, 7]),
            OracleSpec::periodic(vec![], vec![1, 0]),
            OracleSpec::periodic(vec![1, 1, 0], vec![0, 0, 1]),
        ];
        for o in &oracles {
            let (th, per) = o.tail_descriptor();
            for n in th..th + 5 * per.len() as u64 {
                let want = per[((n - th) % per.len() as u64) as usize];
                assert_eq!(o.bit_at(&nat(n)), want, "{o:?} at {n}");
            }
        }
    }

    #[test]
    fn empty_finite_support_is_all_zero() {
        let empty = OracleSpec::finite([]);
        for n in 0..50 {
            assert_eq!(empty.bit_at(&nat(n)), OracleSpec::AllZero.bit_at(&nat(n)));
        }
    }

    #[test]
    fn json_round_trip() {
        for (o, json) in [
            (OracleSpec::AllZero, r#"{"type":"allzero"}"#),
            (
                OracleSpec::finite([1, 3]),
                r#"{"type":"finite","members":[1,3]}"#,
            ),
            (
                OracleSpec::periodic(vec![1], vec![0, 1]),
                r#"{"type":"periodic","prefix":[1],"period":[0,1]}"#,
            ),
        ] {
            assert_eq!(serde_json::to_string(&o).unwrap(), json);
            assert_eq!(serde_json::from_str::<OracleSpec>(json).unwrap(), o);
        }
    }
}
