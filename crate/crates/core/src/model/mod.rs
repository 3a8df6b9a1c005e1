//! Candidates, preference classes, Kendall-tau distance, scoring rules and the
//! probability matrices that drive the network model.
//!
//! Everything here is immutable once constructed and validated, so values can
//! be shared freely between worker threads.

mod classes;
mod file;
mod matrix;
mod order;
mod rule;

pub use classes::{ClassDistribution, ClassSystem, MAX_CANDIDATES};
pub use file::{Model, ModelFile};
pub use matrix::{is_regular, satisfies_mee, ConnectionMatrix, Monotonicity};
pub use order::{kt_distance, PreferenceOrder};
pub use rule::{RuleKind, ScoringRule};

/// Letter used for candidate `c` in human-readable labels (`a`, `b`, ...).
pub fn candidate_letter(c: usize) -> char {
    (b'a' + (c % 26) as u8) as char
}
