//! Decide whether a social choice function on `[k]^n` is a weighted plurality.

pub mod decide;
pub mod dist;
pub mod effects;
pub mod lp;
pub mod rational;
pub mod scf;
pub mod weights;

pub use decide::{
    build_dual, build_primal, canonical_labels, decide, decide_with_labels, extract_witness,
    verify_weights, verify_witness, DecideError, DecisionOutcome, DualLp, Labels, Mode, PrimalLp,
    Verdict,
};
pub use dist::{
    DistError, Distribution, ExpectedWeights, ExplicitDistribution, ProductDistribution, Sampler,
};
pub use effects::{
    aggregation_report, covariance_sum, effect_scaling_experiment, effect_vector, scaling_csv,
    AggregationReport, CovarianceBreakdown, EffectMethod, EffectValue, EffectVector, EffectsError,
    ScalingFamily, ScalingPoint,
};
pub use lp::{solve, verify_certificate, LpError, LpSolution, OptimalSolution, StandardFormLP};
pub use rational::Rational;
pub use scf::{
    build_weighted_plurality, random_neutral_function, Alternative, Neutrality, Permutation,
    Profile, ScfError, SocialChoiceFunction, TieBreakRule,
};
pub use weights::{InvalidWeights, WeightVector};
