//! Closed-form predictions: two-candidate surprise thresholds, the winner
//! concentration bound, and the normal approximation of MPFB factors for
//! three candidates.
//!
//! Asymptotic statements are reported as verdicts together with the
//! finite-`n` bound values; nothing here claims a finite-`n` probability
//! the underlying theory does not give.

mod normal;
mod three;
mod two;

pub use normal::{normal_tail, std_normal_cdf};
pub use three::{
    analytic_mpfb_ordering, claimed_relations, score_diff_moments, AnalyticMpfb, AnalyticOrdering,
    ReducedModel, ScoreDiffMoments, WinnerRank,
};
pub use two::{
    classify_two_candidate, winner_concentration_bound, BoundKind, ProbabilityBound,
    TwoCandidateVerdict, Verdict, WinnerBound,
};
