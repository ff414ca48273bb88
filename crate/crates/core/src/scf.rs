//! Social choice functions on `[k]^n` as dense truth tables.
//!
//! Profiles are encoded little-endian mixed radix: voter 1 is the least
//! significant digit, `index = sum_i entries[i] * k^i`. Every file format and
//! LP row ordering in this crate uses that one encoding.

use std::fmt;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::weights::{InvalidWeights, WeightVector};

/// Dense truth tables are capped at this many entries.
pub const MAX_TABLE_SIZE: usize = 10_000_000;

/// Orbit-based random generation enumerates `k! * k^n`; keep it small.
pub const MAX_ORBIT_TABLE_SIZE: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScfError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error(transparent)]
    InvalidWeights(#[from] InvalidWeights),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("invalid truth table: {0}")]
    InvalidTable(String),
    #[error("cannot parse truth table: {0}")]
    Parse(String),
}

/// One of the `k` alternatives, labeled `0..k-1`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct Alternative(pub u32);

impl Alternative {
    pub fn value(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A full vector of `n` votes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile(Vec<Alternative>);

impl Profile {
    pub fn new(entries: Vec<Alternative>) -> Self {
        Profile(entries)
    }

    pub fn from_values(values: &[u32]) -> Self {
        Profile(values.iter().copied().map(Alternative).collect())
    }

    /// Decode a canonical index back into digits (voter 1 least significant).
    pub fn from_index(mut index: usize, k: u32, n: usize) -> Self {
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            entries.push(Alternative((index % k as usize) as u32));
            index /= k as usize;
        }
        Profile(entries)
    }

    /// Canonical integer encoding: `sum_i entries[i] * k^i`.
    pub fn index(&self, k: u32) -> usize {
        let mut index = 0usize;
        for a in self.0.iter().rev() {
            index = index * k as usize + a.index();
        }
        index
    }

    pub fn entries(&self) -> &[Alternative] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, voter: usize) -> Option<Alternative> {
        self.0.get(voter).copied()
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

/// A bijection on `[k]`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<Alternative>,
}

impl Permutation {
    pub fn new(images: Vec<Alternative>) -> Result<Self, ScfError> {
        let k = images.len();
        let mut seen = vec![false; k];
        for a in &images {
            let v = a.index();
            if v >= k || seen[v] {
                return Err(ScfError::InvalidPermutation(format!(
                    "image list [{}] is not a bijection on [{k}]",
                    images.iter().join(",")
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(k: u32) -> Self {
        Permutation {
            images: (0..k).map(Alternative).collect(),
        }
    }

    /// Swap `a` and `b`, fix everything else.
    pub fn transposition(k: u32, a: Alternative, b: Alternative) -> Self {
        assert!(a.value() < k && b.value() < k);
        let mut images: Vec<Alternative> = (0..k).map(Alternative).collect();
        images.swap(a.index(), b.index());
        Permutation { images }
    }

    /// The full cycle `v -> v + 1 (mod k)`.
    pub fn cycle(k: u32) -> Self {
        Permutation {
            images: (0..k).map(|v| Alternative((v + 1) % k)).collect(),
        }
    }

    /// All `k!` permutations, in lexicographic image order. Only for small `k`.
    pub fn all(k: u32) -> Vec<Permutation> {
        assert!(k <= 8, "k! enumeration is limited to k <= 8");
        (0..k)
            .permutations(k as usize)
            .map(|images| Permutation {
                images: images.into_iter().map(Alternative).collect(),
            })
            .collect()
    }

    pub fn k(&self) -> u32 {
        self.images.len() as u32
    }

    pub fn apply(&self, a: Alternative) -> Alternative {
        self.images[a.index()]
    }

    pub fn apply_profile(&self, x: &Profile) -> Profile {
        Profile(x.entries().iter().map(|&a| self.apply(a)).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![Alternative(0); self.images.len()];
        for (v, a) in self.images.iter().enumerate() {
            images[a.index()] = Alternative(v as u32);
        }
        Permutation { images }
    }

    /// `self . other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.k(), other.k());
        Permutation {
            images: other.images.iter().map(|&a| self.apply(a)).collect(),
        }
    }

    pub fn images(&self) -> &[Alternative] {
        &self.images
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.images.iter().join(","))
    }
}

/// Result of a neutrality check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Neutrality {
    Neutral,
    NotNeutral {
        permutation: Permutation,
        profile: Profile,
    },
}

impl Neutrality {
    pub fn is_neutral(&self) -> bool {
        matches!(self, Neutrality::Neutral)
    }
}

/// How to pick a winner among weight-tied alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreakRule {
    /// The vote of the earliest voter whose vote is among the tied set wins.
    FirstMatchingVoter,
    /// The fixed alternative wins every tie it is part of; ties it is not
    /// part of fall back to the first-matching-voter rule.
    FixedWinner(Alternative),
}

/// In-place mixed-radix counter over `[k]^n`, in index order.
pub(crate) struct ProfileCounter {
    digits: Vec<u32>,
    k: u32,
}

impl ProfileCounter {
    pub(crate) fn new(k: u32, n: usize) -> Self {
        ProfileCounter {
            digits: vec![0; n],
            k,
        }
    }

    pub(crate) fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Step to the next profile; false once the counter wraps to all zeros.
    pub(crate) fn advance(&mut self) -> bool {
        for d in self.digits.iter_mut() {
            *d += 1;
            if *d < self.k {
                return true;
            }
            *d = 0;
        }
        false
    }
}

pub(crate) fn table_size(k: u32, n: usize) -> Result<usize, ScfError> {
    if k < 2 {
        return Err(ScfError::InvalidTable(format!("k = {k}, need k >= 2")));
    }
    if n == 0 {
        return Err(ScfError::InvalidTable("n = 0, need n >= 1".into()));
    }
    let mut size = 1u128;
    for _ in 0..n {
        size = size.saturating_mul(k as u128);
        if size > MAX_TABLE_SIZE as u128 {
            return Err(ScfError::TooLarge(format!(
                "table for k={k}, n={n} exceeds {MAX_TABLE_SIZE} entries"
            )));
        }
    }
    Ok(size as usize)
}

/// A function `[k]^n -> [k]` stored as its full table in profile-index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialChoiceFunction {
    k: u32,
    n: usize,
    table: Vec<Alternative>,
}

impl SocialChoiceFunction {
    pub fn new(k: u32, n: usize, table: Vec<Alternative>) -> Result<Self, ScfError> {
        let size = table_size(k, n)?;
        if table.len() != size {
            return Err(ScfError::InvalidTable(format!(
                "table has {} entries, expected k^n = {size}",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|a| a.value() >= k) {
            return Err(ScfError::InvalidTable(format!(
                "table value {bad} is outside [{k}]"
            )));
        }
        Ok(SocialChoiceFunction { k, n, table })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[Alternative] {
        &self.table
    }

    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    /// Value at a raw profile index (bounds-checked by the vector).
    pub fn value_at(&self, index: usize) -> Alternative {
        self.table[index]
    }

    pub fn evaluate(&self, x: &Profile) -> Result<Alternative, ScfError> {
        if x.len() != self.n {
            return Err(ScfError::InvalidProfile(format!(
                "profile has {} entries, function takes {}",
                x.len(),
                self.n
            )));
        }
        if let Some(bad) = x.entries().iter().find(|a| a.value() >= self.k) {
            return Err(ScfError::InvalidProfile(format!(
                "vote {bad} is outside [{}]",
                self.k
            )));
        }
        Ok(self.table[x.index(self.k)])
    }

    /// Profile indices of `f^{-1}(a)`, ascending.
    pub fn preimage(&self, a: Alternative) -> Vec<usize> {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == a)
            .map(|(i, _)| i)
            .collect()
    }

    /// The relabeled function `g(x) = sigma(f(sigma^{-1}(x)))`.
    pub fn permute_alternatives(&self, sigma: &Permutation) -> Result<Self, ScfError> {
        if sigma.k() != self.k {
            return Err(ScfError::InvalidPermutation(format!(
                "permutation on [{}] applied to function on [{}]",
                sigma.k(),
                self.k
            )));
        }
        let mut table = vec![Alternative(0); self.table.len()];
        let mut counter = ProfileCounter::new(self.k, self.n);
        let mut idx = 0usize;
        loop {
            let image_idx = permuted_index(sigma, counter.digits(), self.k);
            table[image_idx] = sigma.apply(self.table[idx]);
            idx += 1;
            if !counter.advance() {
                break;
            }
        }
        // Surjectivity of x -> sigma(x) guarantees every slot was written.
        SocialChoiceFunction::new(self.k, self.n, table)
    }

    /// Neutrality check via the two generators of the symmetric group.
    ///
    /// The permutations commuting with `f` form a subgroup, so checking the
    /// transposition (0 1) and the full cycle decides neutrality; any
    /// violation is witnessed on one of the generators directly.
    pub fn is_neutral(&self) -> Neutrality {
        let mut generators = vec![Permutation::transposition(
            self.k,
            Alternative(0),
            Alternative(1),
        )];
        if self.k > 2 {
            generators.push(Permutation::cycle(self.k));
        }
        for sigma in &generators {
            let mut counter = ProfileCounter::new(self.k, self.n);
            let mut idx = 0usize;
            loop {
                let image_idx = permuted_index(sigma, counter.digits(), self.k);
                if self.table[image_idx] != sigma.apply(self.table[idx]) {
                    return Neutrality::NotNeutral {
                        permutation: sigma.clone(),
                        profile: Profile::from_values(counter.digits()),
                    };
                }
                idx += 1;
                if !counter.advance() {
                    break;
                }
            }
        }
        Neutrality::Neutral
    }

    /// Serialize as the `.tt` text format: `k n` header then the table.
    pub fn to_tt_string(&self) -> String {
        format!(
            "{} {}\n{}\n",
            self.k,
            self.n,
            self.table.iter().join(" ")
        )
    }

    /// Parse the `.tt` text format. The table line is either `k^n`
    /// whitespace-separated integers or, for `k <= 10`, one undelimited
    /// digit string of length `k^n`.
    pub fn from_tt_str(s: &str) -> Result<Self, ScfError> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| ScfError::Parse("empty input".into()))?;
        let mut header_tokens = header.split_whitespace();
        let k: u32 = header_tokens
            .next()
            .ok_or_else(|| ScfError::Parse("missing k in header".into()))?
            .parse()
            .map_err(|e| ScfError::Parse(format!("bad k: {e}")))?;
        let n: usize = header_tokens
            .next()
            .ok_or_else(|| ScfError::Parse("missing n in header".into()))?
            .parse()
            .map_err(|e| ScfError::Parse(format!("bad n: {e}")))?;
        if header_tokens.next().is_some() {
            return Err(ScfError::Parse("header must be exactly `k n`".into()));
        }
        let size = table_size(k, n)?;
        let tokens: Vec<&str> = lines.flat_map(str::split_whitespace).collect();
        let values: Vec<u32> = if tokens.len() == size {
            tokens
                .iter()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|e| ScfError::Parse(format!("bad table entry {t:?}: {e}")))
                })
                .collect::<Result<_, _>>()?
        } else if k <= 10 && tokens.len() == 1 && tokens[0].chars().count() == size {
            tokens[0]
                .chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| ScfError::Parse(format!("bad digit {c:?} in compact table")))
                })
                .collect::<Result<_, _>>()?
        } else {
            return Err(ScfError::Parse(format!(
                "expected {size} table entries (or one digit string of that length), found {} tokens",
                tokens.len()
            )));
        };
        SocialChoiceFunction::new(k, n, values.into_iter().map(Alternative).collect())
    }
}

fn permuted_index(sigma: &Permutation, digits: &[u32], k: u32) -> usize {
    let mut index = 0usize;
    for &d in digits.iter().rev() {
        index = index * k as usize + sigma.apply(Alternative(d)).index();
    }
    index
}

/// Build the weighted plurality function for `w` with the given tie-break.
///
/// For every profile the output carries at least as much total weight as any
/// other alternative; the unweighted plurality is the special case
/// `w_i = 1/n`.
pub fn build_weighted_plurality(
    k: u32,
    n: usize,
    w: &WeightVector,
    tie_break: TieBreakRule,
) -> Result<SocialChoiceFunction, ScfError> {
    let size = table_size(k, n)?;
    if w.len() != n {
        return Err(InvalidWeights(format!("{} weights for {n} voters", w.len())).into());
    }
    if let TieBreakRule::FixedWinner(a) = tie_break {
        if a.value() >= k {
            return Err(ScfError::InvalidTable(format!(
                "fixed winner {a} is outside [{k}]"
            )));
        }
    }

    let mut table = Vec::with_capacity(size);
    let mut totals = vec![Rational::zero(); k as usize];
    let mut counter = ProfileCounter::new(k, n);
    loop {
        for t in totals.iter_mut() {
            *t = Rational::zero();
        }
        for (i, &d) in counter.digits().iter().enumerate() {
            totals[d as usize] += w.get(i);
        }
        let max = totals.iter().max().expect("k >= 2").clone();
        let winner = match tie_break {
            TieBreakRule::FixedWinner(a) if totals[a.index()] == max => a,
            _ => first_matching_voter(counter.digits(), &totals, &max),
        };
        table.push(winner);
        if !counter.advance() {
            break;
        }
    }
    SocialChoiceFunction::new(k, n, table)
}

fn first_matching_voter(digits: &[u32], totals: &[Rational], max: &Rational) -> Alternative {
    digits
        .iter()
        .copied()
        .find(|&d| totals[d as usize] == *max)
        .map(Alternative)
        .expect("the maximum weight is positive, so some voter voted for it")
}

/// Draw a uniformly random neutral function by assigning one value per orbit
/// of the joint relabeling action and extending by neutrality.
///
/// The value chosen for an orbit representative must be fixed by the
/// representative's stabilizer: it is one of the digits appearing in the
/// profile, or the unique missing alternative when exactly one is missing.
pub fn random_neutral_function(
    k: u32,
    n: usize,
    seed: u64,
) -> Result<SocialChoiceFunction, ScfError> {
    let size = table_size(k, n)?;
    if k > 4 || size > MAX_ORBIT_TABLE_SIZE {
        return Err(ScfError::TooLarge(format!(
            "orbit generation requires k <= 4 and k^n <= {MAX_ORBIT_TABLE_SIZE} (got k={k}, k^n={size})"
        )));
    }
    let perms = Permutation::all(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table: Vec<Option<Alternative>> = vec![None; size];
    let mut counter = ProfileCounter::new(k, n);
    let mut idx = 0usize;
    loop {
        if table[idx].is_none() {
            let mut present = vec![false; k as usize];
            for &d in counter.digits() {
                present[d as usize] = true;
            }
            let mut valid: Vec<u32> = (0..k).filter(|&v| present[v as usize]).collect();
            let missing: Vec<u32> = (0..k).filter(|&v| !present[v as usize]).collect();
            if missing.len() == 1 {
                valid.push(missing[0]);
            }
            let value = Alternative(valid[rng.gen_range(0..valid.len())]);
            for sigma in &perms {
                let image_idx = permuted_index(sigma, counter.digits(), k);
                let image_val = sigma.apply(value);
                match &mut table[image_idx] {
                    Some(existing) => debug_assert_eq!(*existing, image_val),
                    slot @ None => *slot = Some(image_val),
                }
            }
        }
        idx += 1;
        if !counter.advance() {
            break;
        }
    }
    let table: Vec<Alternative> = table
        .into_iter()
        .map(|v| v.expect("orbit closure covers every profile"))
        .collect();
    SocialChoiceFunction::new(k, n, table)
}
