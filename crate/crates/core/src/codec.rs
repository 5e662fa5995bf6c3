//! Bijective mapping between factored state vectors and a single integer id.
//!
//! A factored state `(x_1, ..., x_n)` with 1-based digit indices `R_i` is
//! encoded as
//!
//! ```text
//! L = R_1 + sum_{i=2..n} R_i * prod_{j<i} card_j
//! ```
//!
//! Because every digit is 1-based the image is the contiguous range
//! `[offset, offset + size - 1]` with `offset = sum_i prod_{j<i} card_j`.
//! Decoding subtracts the offset and then peels ordinary mixed-radix digits,
//! which is the exact inverse of the formula for any number of variables.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("domain must have at least one variable")]
    NoVariables,
    #[error("variable {index} has zero cardinality")]
    ZeroCardinality { index: usize },
    #[error("state space size overflows u64")]
    Overflow,
    #[error("expected {expected} digits, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("digit for variable {index} is {value}, outside 1..={cardinality}")]
    DigitOutOfRange {
        index: usize,
        value: usize,
        cardinality: usize,
    },
    #[error("encoded value {value} outside image [{min}, {max}]")]
    OutOfImage { value: u64, min: u64, max: u64 },
}

/// Single integer image of a factored state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EncodedState(pub u64);

impl fmt::Display for EncodedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for EncodedState {
    fn from(v: u64) -> Self {
        EncodedState(v)
    }
}

/// A factored state: one 1-based index per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactoredState {
    digits: Vec<usize>,
}

impl FactoredState {
    pub fn new(digits: Vec<usize>) -> Self {
        FactoredState { digits }
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }
}

impl From<Vec<usize>> for FactoredState {
    fn from(digits: Vec<usize>) -> Self {
        FactoredState { digits }
    }
}

/// Cardinalities of each state variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DomainSpec {
    cardinalities: Vec<usize>,
    // prod_{j<i} card_j for every i
    weights: Vec<u64>,
    size: u64,
    offset: u64,
}

impl DomainSpec {
    pub fn new(cardinalities: Vec<usize>) -> Result<Self, CodecError> {
        if cardinalities.is_empty() {
            return Err(CodecError::NoVariables);
        }
        let mut weights = Vec::with_capacity(cardinalities.len());
        let mut w: u64 = 1;
        let mut offset: u64 = 0;
        for (index, &c) in cardinalities.iter().enumerate() {
            if c == 0 {
                return Err(CodecError::ZeroCardinality { index });
            }
            weights.push(w);
            offset = offset.checked_add(w).ok_or(CodecError::Overflow)?;
            w = w.checked_mul(c as u64).ok_or(CodecError::Overflow)?;
        }
        // The largest encoded value is offset + size - 1; make sure it fits.
        offset.checked_add(w).ok_or(CodecError::Overflow)?;
        Ok(DomainSpec {
            cardinalities,
            weights,
            size: w,
            offset,
        })
    }

    /// Univariate domain, the MDP case.
    pub fn univariate(states: usize) -> Result<Self, CodecError> {
        Self::new(vec![states])
    }

    pub fn variable_count(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    /// Number of distinct states, `prod_i card_i`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn min_encoded(&self) -> EncodedState {
        EncodedState(self.offset)
    }

    pub fn max_encoded(&self) -> EncodedState {
        EncodedState(self.offset + self.size - 1)
    }

    pub fn encode(&self, x: &FactoredState) -> Result<EncodedState, CodecError> {
        if x.digits.len() != self.cardinalities.len() {
            return Err(CodecError::Arity {
                expected: self.cardinalities.len(),
                got: x.digits.len(),
            });
        }
        let mut l = 0u64;
        for (index, (&d, (&c, &w))) in x
            .digits
            .iter()
            .zip(self.cardinalities.iter().zip(&self.weights))
            .enumerate()
        {
            if d == 0 || d > c {
                return Err(CodecError::DigitOutOfRange {
                    index,
                    value: d,
                    cardinality: c,
                });
            }
            l += d as u64 * w;
        }
        Ok(EncodedState(l))
    }

    pub fn decode(&self, l: EncodedState) -> Result<FactoredState, CodecError> {
        let mut rest = self.ordinal(l)? as u64;
        let mut digits = vec![0; self.cardinalities.len()];
        for i in (0..self.cardinalities.len()).rev() {
            let w = self.weights[i];
            digits[i] = (rest / w) as usize + 1;
            rest %= w;
        }
        Ok(FactoredState { digits })
    }

    /// Zero-based position of `l` inside the image, usable as a dense index.
    pub fn ordinal(&self, l: EncodedState) -> Result<usize, CodecError> {
        if l.0 < self.offset || l.0 - self.offset >= self.size {
            return Err(CodecError::OutOfImage {
                value: l.0,
                min: self.offset,
                max: self.offset + self.size - 1,
            });
        }
        Ok((l.0 - self.offset) as usize)
    }

    pub fn from_ordinal(&self, ordinal: usize) -> EncodedState {
        debug_assert!((ordinal as u64) < self.size);
        EncodedState(self.offset + ordinal as u64)
    }

    /// All encoded states in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = EncodedState> + '_ {
        (0..self.size).map(move |o| EncodedState(self.offset + o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(c: &[usize]) -> DomainSpec {
        DomainSpec::new(c.to_vec()).unwrap()
    }

    #[test]
    fn single_variable_is_identity() {
        let s = spec(&[25]);
        assert_eq!(s.encode(&vec![7].into()).unwrap(), EncodedState(7));
        assert_eq!(s.decode(EncodedState(7)).unwrap().digits(), &[7]);
    }

    #[test]
    fn two_variable_examples() {
        let s = spec(&[3, 3]);
        assert_eq!(s.encode(&vec![3, 2].into()).unwrap(), EncodedState(9));
        assert_eq!(s.encode(&vec![1, 1].into()).unwrap(), EncodedState(4));
        assert_eq!(s.decode(EncodedState(9)).unwrap().digits(), &[3, 2]);
        assert_eq!(s.decode(EncodedState(4)).unwrap().digits(), &[1, 1]);
    }

    #[test]
    fn three_variables_round_trip_where_division_loop_fails() {
        // (2,2,1) -> 2 + 2*2 + 1*4 = 10; a plain quotient/remainder walk from
        // the top digit would read R_3 = 10 / 4 = 2.
        let s = spec(&[2, 2, 2]);
        let l = s.encode(&vec![2, 2, 1].into()).unwrap();
        assert_eq!(l, EncodedState(10));
        assert_eq!(s.decode(l).unwrap().digits(), &[2, 2, 1]);
    }

    #[test]
    fn bounds_errors_name_the_variable() {
        let s = spec(&[3, 4]);
        match s.encode(&vec![1, 5].into()) {
            Err(CodecError::DigitOutOfRange { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            s.encode(&vec![0, 1].into()),
            Err(CodecError::DigitOutOfRange { index: 0, .. })
        ));
        assert!(matches!(s.encode(&vec![1].into()), Err(CodecError::Arity { .. })));
    }

    #[test]
    fn decode_rejects_values_outside_image() {
        let s = spec(&[3, 3]);
        assert_eq!(s.min_encoded(), EncodedState(4));
        assert_eq!(s.max_encoded(), EncodedState(12));
        assert!(s.decode(EncodedState(3)).is_err());
        assert!(s.decode(EncodedState(13)).is_err());
    }

    #[test]
    fn construction_checks() {
        assert_eq!(DomainSpec::new(vec![]), Err(CodecError::NoVariables));
        assert_eq!(
            DomainSpec::new(vec![2, 0]),
            Err(CodecError::ZeroCardinality { index: 1 })
        );
        assert_eq!(
            DomainSpec::new(vec![usize::MAX, usize::MAX, 4]),
            Err(CodecError::Overflow)
        );
    }

    #[test]
    fn taxi_domain_exhaustive() {
        let s = spec(&[25, 5, 4]);
        let mut seen = std::collections::HashSet::new();
        for a in 1..=25 {
            for b in 1..=5 {
                for c in 1..=4 {
                    let x = FactoredState::new(vec![a, b, c]);
                    let l = s.encode(&x).unwrap();
                    assert!(seen.insert(l));
                    assert_eq!(s.decode(l).unwrap(), x);
                }
            }
        }
        assert_eq!(seen.len() as u64, s.size());
        assert_eq!(s.size(), 500);
    }
}
