//! Voter weight vectors: nonnegative exact rationals summing to one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid weight vector: {0}")]
pub struct InvalidWeights(pub String);

/// One weight per voter; entries are `>= 0` and sum to exactly 1.
///
/// Serializes as a JSON array of rational strings, e.g. `["1/3","1/3","1/3"]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct WeightVector {
    entries: Vec<Rational>,
}

impl WeightVector {
    pub fn new(entries: Vec<Rational>) -> Result<Self, InvalidWeights> {
        if entries.is_empty() {
            return Err(InvalidWeights("no voters".into()));
        }
        if let Some(i) = entries.iter().position(Rational::is_negative) {
            return Err(InvalidWeights(format!(
                "weight {} of voter {} is negative",
                entries[i], i
            )));
        }
        let total: Rational = entries.iter().sum();
        if total != Rational::one() {
            return Err(InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightVector { entries })
    }

    /// `w_i = 1/n` for every voter.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "need at least one voter");
        WeightVector {
            entries: vec![Rational::new(1, n as i64); n],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn get(&self, voter: usize) -> &Rational {
        &self.entries[voter]
    }
}

impl TryFrom<Vec<Rational>> for WeightVector {
    type Error = InvalidWeights;
    fn try_from(entries: Vec<Rational>) -> Result<Self, Self::Error> {
        WeightVector::new(entries)
    }
}

impl From<WeightVector> for Vec<Rational> {
    fn from(w: WeightVector) -> Self {
        w.entries
    }
}
