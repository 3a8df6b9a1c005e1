//! Command parameters. Every field is optional so that flags, the JSON config
//! file and built-in defaults can be layered: flags win over the file, the
//! file over defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use serde::{Deserialize, Serialize};

/// Class distribution: a single margin `ε` for two candidates, meaning
/// `(1/2 + ε, 1/2 − ε)`, or the full probability vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSpec {
    Margin(f64),
    Dist(Vec<f64>),
}

impl FromStr for EpsSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_list::<f64>(s)?;
        Ok(if v.len() == 1 {
            EpsSpec::Margin(v[0])
        } else {
            EpsSpec::Dist(v)
        })
    }
}

/// Matrix written as rows separated by `;`, entries by `,`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matrix(pub Vec<Vec<f64>>);

impl FromStr for Matrix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(';')
            .map(parse_list)
            .collect::<Result<_, _>>()
            .map(Matrix)
    }
}

/// Comma-separated list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_list(s).map(List)
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|e| format!("`{}`: {e}", x.trim()))
        })
        .collect()
}

/// Layers `fallback` under `self` field by field.
pub trait Merge {
    fn merge(self, fallback: Self) -> Self;
}

macro_rules! params {
    (
        $(#[$meta:meta])*
        pub struct $name:ident {
            $( $(#[$fmeta:meta])* $field:ident : $ty:ty ),* $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $( $(#[$fmeta])* #[arg(long)] #[serde(default, skip_serializing_if = "Option::is_none")] pub $field: Option<$ty>, )*
        }

        impl Merge for $name {
            fn merge(self, fallback: Self) -> Self {
                Self { $( $field: self.$field.or(fallback.$field), )* }
            }
        }
    };
}

params! {
    /// Monte Carlo estimation of surprise, beat probabilities and MPFB.
    pub struct SimulateArgs {
        /// Number of voters.
        n: usize,
        /// Number of candidates; inferred from `eps` or `p`, else 3 with the
        /// two-level shorthand and 2 otherwise.
        m: usize,
        /// Margin `ε` (two candidates) or the class distribution `e1,e2,...`.
        eps: EpsSpec,
        /// True connection probabilities, e.g. `0.4,0.2;0.2,0.4`.
        p: Matrix,
        /// Estimated connection probabilities (default: `p`).
        phat: Matrix,
        /// Two-level `p`: same-class probability.
        p_same: f64,
        /// Two-level `p`: cross-class probability.
        p_cross: f64,
        /// Two-level `p̂`: same-class estimate.
        phat_same: f64,
        /// Two-level `p̂`: cross-class estimate.
        phat_cross: f64,
        /// `plurality`, `borda`, `veto`, a comma list of them, or `all`.
        rule: String,
        /// Monte Carlo trials.
        trials: usize,
        /// Voters evaluated per class per trial.
        panel_size: usize,
        /// Keep only trials won by this candidate (0-based).
        condition_on: usize,
        /// Tie-break priority, highest first, e.g. `1,0,2`.
        tiebreak: List<usize>,
    }
}

params! {
    /// Closed-form verdicts; `--compare` adds a matching Monte Carlo run.
    pub struct TheoryArgs {
        /// Number of voters.
        n: usize,
        /// Number of candidates (2 or 3); inferred from `eps` or `p`, else 3
        /// with the two-level shorthand and 2 otherwise.
        m: usize,
        /// Margin `ε` (two candidates) or the class distribution.
        eps: EpsSpec,
        /// True connection probabilities.
        p: Matrix,
        /// Estimated connection probabilities (default: `p`).
        phat: Matrix,
        /// Two-level `p`: same-class probability.
        p_same: f64,
        /// Two-level `p`: cross-class probability.
        p_cross: f64,
        /// Two-level `p̂`: same-class estimate.
        phat_same: f64,
        /// Two-level `p̂`: cross-class estimate.
        phat_cross: f64,
        /// True winner for the three-candidate analysis (0-based, default 1).
        winner: usize,
        /// Also run the Monte Carlo engine and report agreement.
        #[arg(num_args = 0..=1, default_missing_value = "true")]
        compare: bool,
        /// Trials of the comparison run.
        trials: usize,
        /// Panel size of the comparison run.
        panel_size: usize,
    }
}

params! {
    /// Empirical MPFB of plurality, Borda and veto against the analytic ordering.
    pub struct MpfbArgs {
        /// Number of voters.
        n: usize,
        /// Class distribution over the six classes (default uniform).
        eps: EpsSpec,
        /// True connection probabilities (6×6).
        p: Matrix,
        /// Estimated connection probabilities (6×6, default: `p`).
        phat: Matrix,
        /// Two-level `p`: same-class probability.
        p_same: f64,
        /// Two-level `p`: cross-class probability.
        p_cross: f64,
        /// Two-level `p̂`: same-class estimate.
        phat_same: f64,
        /// Two-level `p̂`: cross-class estimate.
        phat_cross: f64,
        /// True winner to condition on (0-based, default 1).
        winner: usize,
        /// Monte Carlo trials.
        trials: usize,
        /// Voters evaluated per class per trial.
        panel_size: usize,
    }
}

params! {
    /// Desk-scale referendum sweep over noise level and global weight.
    pub struct BrexitArgs {
        /// CSV with header `region,leave,remain`.
        votes: PathBuf,
        /// CSV with header `town,region,lat,lon`.
        locations: PathBuf,
        /// Voters in the sub-election.
        sample: usize,
        /// Connection attempts per voter.
        attempts: usize,
        /// Same-class connection probability.
        p: f64,
        /// Cross-class connection probability.
        q: f64,
        /// Noise standard deviations, e.g. `0,0.05,0.1`.
        bias_grid: List<f64>,
        /// Global weights `w_G`, e.g. `0,0.5,1`.
        wg_grid: List<f64>,
        /// Trials per grid point.
        trials: usize,
        /// Decay length of the distance term, in km.
        lambda_km: f64,
        /// Distance-term probability at zero distance (default: `p`).
        p1_max: f64,
        /// Use a 10,000-voter sample with 500 attempts unless given explicitly.
        #[arg(num_args = 0..=1, default_missing_value = "true")]
        full_scale: bool,
    }
}

params! {
    /// Monte Carlo against exact enumeration on small electorates.
    pub struct OracleArgs {
        /// Monte Carlo trials per configuration.
        trials: usize,
        /// Allowed deviation in confidence half-widths.
        tolerance: f64,
        /// Run only the configurations of this size.
        n: usize,
    }
}
