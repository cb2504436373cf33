//! Köthe matrices, graded seminorms and the space-level checks built on them.

mod exponent;
mod grid;
mod nuclearity;
mod policy;
pub(crate) mod seminorm;
mod sequence;
mod verdict;

pub use exponent::{ExponentFamily, ExponentSequence, IndexFn};
pub use grid::{GridKind, WeightGrid};
pub use nuclearity::{
    gp_nuclearity, nuclearity_power_series, weak_stability, weight_infimum, GpPair, GpWitness,
    NuclearityWitness, PowerSeriesType, StabilityWitness, WeightInfimum,
};
pub use policy::TruncationPolicy;
pub use seminorm::{
    dual_membership, membership, seminorm, sup_seminorm, DualWitness, MembershipWitness,
    SeminormValue, SupSeminormValue,
};
pub use sequence::{CoefficientSequence, SequenceFamily, TailBound};
pub use verdict::{Counterexample, Diagnostics, TrendClass, TrendSummary, Verdict, FLAT_SLOPE};
