//! Probability distributions on `[k]^n` with exact rational probabilities.
//!
//! Two representations: product measures given by an `n x k` marginal matrix,
//! and explicit sparse measures given by their support. All stored
//! probabilities are exact; floating point appears only in the cached
//! [`Sampler`], which never feeds exact verdicts.
//!
//! JSON format:
//! `{"type":"product","p":[["1/2","1/2"], ...]}` or
//! `{"type":"explicit","support":[{"x":[1,0,0],"p":"1/3"}, ...]}`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::ser::{SerializeMap, SerializeSeq, SerializeStruct};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;
use crate::scf::{Alternative, Profile};
use crate::weights::WeightVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistError {
    #[error("index out of range: {0}")]
    IndexError(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Product measure: `marginals[i][j] = P(X_i = j)`, rows sum to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductDistribution {
    marginals: Vec<Vec<Rational>>,
}

impl ProductDistribution {
    pub fn new(marginals: Vec<Vec<Rational>>) -> Result<Self, DistError> {
        if marginals.is_empty() {
            return Err(DistError::InvalidDistribution("no voters".into()));
        }
        let k = marginals[0].len();
        if k < 2 {
            return Err(DistError::InvalidDistribution(format!(
                "rows must have k >= 2 entries, got {k}"
            )));
        }
        for (i, row) in marginals.iter().enumerate() {
            if row.len() != k {
                return Err(DistError::InvalidDistribution(format!(
                    "row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| p.is_negative()) {
                return Err(DistError::InvalidDistribution(format!(
                    "row {i} contains negative probability {p}"
                )));
            }
            let total: Rational = row.iter().sum();
            if total != Rational::one() {
                return Err(DistError::InvalidDistribution(format!(
                    "row {i} sums to {total}, not 1"
                )));
            }
        }
        Ok(ProductDistribution { marginals })
    }

    /// Independent uniform votes on `[k]`.
    pub fn uniform(k: u32, n: usize) -> Self {
        let row = vec![Rational::new(1, k as i64); k as usize];
        ProductDistribution {
            marginals: vec![row; n],
        }
    }

    pub fn n(&self) -> usize {
        self.marginals.len()
    }

    pub fn k(&self) -> u32 {
        self.marginals[0].len() as u32
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.marginals
    }

    pub fn marginal(&self, voter: usize, j: Alternative) -> Result<Rational, DistError> {
        let row = self.marginals.get(voter).ok_or_else(|| {
            DistError::IndexError(format!("voter {voter} of {}", self.n()))
        })?;
        row.get(j.index())
            .cloned()
            .ok_or_else(|| DistError::IndexError(format!("alternative {j} of [{}]", self.k())))
    }
}

/// Sparse measure: positive probabilities on an explicit support, summing to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitDistribution {
    n: usize,
    support: BTreeMap<Profile, Rational>,
}

impl ExplicitDistribution {
    pub fn new(entries: impl IntoIterator<Item = (Profile, Rational)>) -> Result<Self, DistError> {
        let mut support = BTreeMap::new();
        let mut n = None;
        let mut total = Rational::zero();
        for (x, p) in entries {
            let len = x.len();
            match n {
                None => n = Some(len),
                Some(expected) if expected != len => {
                    return Err(DistError::InvalidDistribution(format!(
                        "profile {x} has {len} entries, expected {expected}"
                    )));
                }
                _ => {}
            }
            if !p.is_positive() {
                return Err(DistError::InvalidDistribution(format!(
                    "probability of {x} is {p}, must be positive"
                )));
            }
            total += &p;
            if support.insert(x, p).is_some() {
                return Err(DistError::InvalidDistribution(
                    "duplicate profile in support".into(),
                ));
            }
        }
        let n = n.ok_or_else(|| DistError::InvalidDistribution("empty support".into()))?;
        if total != Rational::one() {
            return Err(DistError::InvalidDistribution(format!(
                "support sums to {total}, not 1"
            )));
        }
        Ok(ExplicitDistribution { n, support })
    }

    pub fn point_mass(x: Profile) -> Self {
        ExplicitDistribution::new([(x, Rational::one())]).expect("a point mass is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> impl Iterator<Item = (&Profile, &Rational)> {
        self.support.iter()
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn probability_of(&self, x: &Profile) -> Result<Rational, DistError> {
        if x.len() != self.n {
            return Err(DistError::InvalidProfile(format!(
                "profile has {} entries, distribution is over {} voters",
                x.len(),
                self.n
            )));
        }
        Ok(self.support.get(x).cloned().unwrap_or_else(Rational::zero))
    }

    pub fn marginal(&self, voter: usize, j: Alternative) -> Result<Rational, DistError> {
        if voter >= self.n {
            return Err(DistError::IndexError(format!(
                "voter {voter} of {}",
                self.n
            )));
        }
        Ok(self
            .support
            .iter()
            .filter(|(x, _)| x.entries()[voter] == j)
            .map(|(_, p)| p)
            .sum())
    }
}

/// Either representation, behind one interface.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub enum Distribution {
    Product(ProductDistribution),
    Explicit(ExplicitDistribution),
}

impl Distribution {
    pub fn n(&self) -> usize {
        match self {
            Distribution::Product(p) => p.n(),
            Distribution::Explicit(e) => e.n(),
        }
    }

    /// Exact `P(X_voter = j)`; voters are 0-indexed.
    pub fn marginal(&self, voter: usize, j: Alternative) -> Result<Rational, DistError> {
        match self {
            Distribution::Product(p) => p.marginal(voter, j),
            Distribution::Explicit(e) => e.marginal(voter, j),
        }
    }

    /// Exact `P(X = x)`.
    pub fn probability_of(&self, x: &Profile) -> Result<Rational, DistError> {
        match self {
            Distribution::Product(p) => {
                if x.len() != p.n() {
                    return Err(DistError::InvalidProfile(format!(
                        "profile has {} entries, distribution is over {} voters",
                        x.len(),
                        p.n()
                    )));
                }
                let mut prob = Rational::one();
                for (i, &a) in x.entries().iter().enumerate() {
                    if a.value() >= p.k() {
                        return Err(DistError::InvalidProfile(format!(
                            "vote {a} is outside [{}]",
                            p.k()
                        )));
                    }
                    prob *= p.marginal(i, a)?;
                    if prob.is_zero() {
                        break;
                    }
                }
                Ok(prob)
            }
            Distribution::Explicit(e) => e.probability_of(x),
        }
    }

    /// `values[j] = sum_i w_i * P(X_i = j)` for `j in [k]`, exactly.
    ///
    /// `k` is passed by the caller because explicit supports do not carry the
    /// alternative count.
    pub fn expected_weights(
        &self,
        w: &WeightVector,
        k: u32,
    ) -> Result<ExpectedWeights, DistError> {
        if w.len() != self.n() {
            return Err(DistError::DimensionMismatch(format!(
                "{} weights for {} voters",
                w.len(),
                self.n()
            )));
        }
        if let Distribution::Product(p) = self {
            if p.k() != k {
                return Err(DistError::DimensionMismatch(format!(
                    "requested k={k} but product rows have k={}",
                    p.k()
                )));
            }
        }
        let mut values = vec![Rational::zero(); k as usize];
        match self {
            Distribution::Product(p) => {
                for (i, row) in p.rows().iter().enumerate() {
                    for (j, pij) in row.iter().enumerate() {
                        values[j] += w.get(i) * pij;
                    }
                }
            }
            Distribution::Explicit(e) => {
                for (x, p) in e.support() {
                    for (i, a) in x.entries().iter().enumerate() {
                        if a.value() >= k {
                            return Err(DistError::DimensionMismatch(format!(
                                "support profile contains vote {a} outside [{k}]"
                            )));
                        }
                        values[a.index()] += w.get(i) * p;
                    }
                }
            }
        }
        Ok(ExpectedWeights { values })
    }

    /// Build the cached floating-point sampler. Conversion to doubles happens
    /// once, here; exact values are never affected.
    pub fn sampler(&self) -> Sampler {
        match self {
            Distribution::Product(p) => {
                let cum = p
                    .rows()
                    .iter()
                    .map(|row| cumulative(row.iter().map(Rational::to_f64)))
                    .collect();
                Sampler(SamplerKind::Product { cum })
            }
            Distribution::Explicit(e) => {
                let profiles: Vec<Profile> = e.support().map(|(x, _)| x.clone()).collect();
                let cum = cumulative(e.support().map(|(_, p)| p.to_f64()));
                Sampler(SamplerKind::Explicit { profiles, cum })
            }
        }
    }
}

impl From<ProductDistribution> for Distribution {
    fn from(p: ProductDistribution) -> Self {
        Distribution::Product(p)
    }
}

impl From<ExplicitDistribution> for Distribution {
    fn from(e: ExplicitDistribution) -> Self {
        Distribution::Explicit(e)
    }
}

/// Per-alternative expected weight under a distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedWeights {
    values: Vec<Rational>,
}

impl ExpectedWeights {
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, j: Alternative) -> &Rational {
        &self.values[j.index()]
    }
}

fn cumulative(probs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn pick(cum: &[f64], r: f64) -> usize {
    match cum.binary_search_by(|c| c.partial_cmp(&r).expect("finite cumulative weights")) {
        Ok(i) | Err(i) => i.min(cum.len() - 1),
    }
}

/// Cached sampler for a [`Distribution`]; one conversion to `f64`, reused.
#[derive(Debug, Clone)]
pub struct Sampler(SamplerKind);

#[derive(Debug, Clone)]
enum SamplerKind {
    Product { cum: Vec<Vec<f64>> },
    Explicit { profiles: Vec<Profile>, cum: Vec<f64> },
}

impl Sampler {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Profile {
        match &self.0 {
            SamplerKind::Product { cum } => Profile::new(
                cum.iter()
                    .map(|row| Alternative(pick(row, rng.gen::<f64>()) as u32))
                    .collect(),
            ),
            SamplerKind::Explicit { profiles, cum } => {
                profiles[pick(cum, rng.gen::<f64>())].clone()
            }
        }
    }
}

// --- JSON wire format ---------------------------------------------------

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawDistribution {
    Product { p: Vec<Vec<Rational>> },
    Explicit { support: Vec<RawSupportEntry> },
}

#[derive(Deserialize)]
struct RawSupportEntry {
    x: Vec<u32>,
    p: Rational,
}

impl TryFrom<RawDistribution> for Distribution {
    type Error = DistError;

    fn try_from(raw: RawDistribution) -> Result<Self, Self::Error> {
        match raw {
            RawDistribution::Product { p } => Ok(Distribution::Product(ProductDistribution::new(p)?)),
            RawDistribution::Explicit { support } => {
                let entries = support
                    .into_iter()
                    .map(|e| (Profile::from_values(&e.x), e.p));
                Ok(Distribution::Explicit(ExplicitDistribution::new(entries)?))
            }
        }
    }
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Distribution::Product(p) => {
                let mut st = serializer.serialize_struct("Distribution", 2)?;
                st.serialize_field("type", "product")?;
                st.serialize_field("p", p.rows())?;
                st.end()
            }
            Distribution::Explicit(e) => e.serialize(serializer),
        }
    }
}

impl Serialize for ExplicitDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Distribution", 2)?;
        st.serialize_field("type", "explicit")?;
        st.serialize_field("support", &SupportSer(self))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ExplicitDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match Distribution::deserialize(deserializer)? {
            Distribution::Explicit(e) => Ok(e),
            Distribution::Product(_) => Err(serde::de::Error::custom(
                "expected an explicit distribution, found a product distribution",
            )),
        }
    }
}

struct SupportSer<'a>(&'a ExplicitDistribution);

impl Serialize for SupportSer<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.support_len()))?;
        for (x, p) in self.0.support() {
            seq.serialize_element(&SupportEntrySer { x, p })?;
        }
        seq.end()
    }
}

struct SupportEntrySer<'a> {
    x: &'a Profile,
    p: &'a Rational,
}

impl Serialize for SupportEntrySer<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("x", self.x.entries())?;
        map.serialize_entry("p", self.p)?;
        map.end()
    }
}
