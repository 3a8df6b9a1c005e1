//! Exact surprise for tiny two-candidate elections, by enumeration.

use rayon::prelude::*;
use serde::Serialize;

use super::{run_trials, SimulationConfig};
use crate::model::{ClassDistribution, ConnectionMatrix, RuleKind, ScoringRule};
use crate::perception::TieBreak;
use crate::rng::RngSeed;
use crate::{Error, Result};

/// Largest electorate [`brute_force_surprise`] enumerates.
pub const MAX_ORACLE_VOTERS: usize = 8;

fn two_way_winner(a: f64, b: f64, tiebreak: &TieBreak) -> usize {
    let tol = 1e-9 * a.abs().max(b.abs());
    if a - b > tol {
        0
    } else if b - a > tol {
        1
    } else if tiebreak.rank(0) < tiebreak.rank(1) {
        0
    } else {
        1
    }
}

/// Exact probability that a voter in `focus_class` is surprised, for `m = 2`.
///
/// Enumerates the classes of the other `n − 1` voters and every pattern of
/// edges incident to the focus voter. Any two-candidate scoring rule ranks
/// candidates by their class counts, so the rule only needs validating.
pub fn brute_force_surprise(
    n: usize,
    dist: &ClassDistribution,
    p: &ConnectionMatrix,
    phat: &ConnectionMatrix,
    rule: &ScoringRule,
    focus_class: usize,
    tiebreak: &TieBreak,
) -> Result<f64> {
    if n == 0 || n > MAX_ORACLE_VOTERS {
        return Err(Error::Precondition(format!(
            "exact enumeration needs 1 <= n <= {MAX_ORACLE_VOTERS}, got {n}"
        )));
    }
    if dist.len() != 2 || rule.m() != 2 {
        return Err(Error::Precondition(
            "exact enumeration supports two candidates only".into(),
        ));
    }
    p.check_size("p", 2)?;
    phat.check_size("phat", 2)?;
    tiebreak.check_size(2)?;
    if focus_class > 1 {
        return Err(Error::OutOfBounds {
            what: "class",
            index: focus_class,
            len: 2,
        });
    }
    let others = n - 1;
    let eps = dist.probs();
    let f = focus_class;
    let mut total = 0.0;
    for classes in 0u32..(1 << others) {
        let class_of = |i: usize| ((classes >> i) & 1) as usize;
        let mut prob_a = 1.0;
        let mut counts = [0usize; 2];
        counts[f] += 1;
        for i in 0..others {
            prob_a *= eps[class_of(i)];
            counts[class_of(i)] += 1;
        }
        if prob_a == 0.0 {
            continue;
        }
        let w_true = two_way_winner(counts[0] as f64, counts[1] as f64, tiebreak);
        for edges in 0u32..(1 << others) {
            let mut prob_e = 1.0;
            let mut nbr = [0u32; 2];
            for i in 0..others {
                let q = p.get(f, class_of(i));
                if (edges >> i) & 1 == 1 {
                    prob_e *= q;
                    nbr[class_of(i)] += 1;
                } else {
                    prob_e *= 1.0 - q;
                }
            }
            let mut est = [
                nbr[0] as f64 / phat.get(f, 0),
                nbr[1] as f64 / phat.get(f, 1),
            ];
            est[f] += 1.0;
            if two_way_winner(est[0], est[1], tiebreak) != w_true {
                total += prob_a * prob_e;
            }
        }
    }
    Ok(total)
}

/// One small configuration of the oracle grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCase {
    pub name: String,
    pub n: usize,
    pub eps: [f64; 2],
    pub p: [[f64; 2]; 2],
    pub phat: [[f64; 2]; 2],
}

impl OracleCase {
    fn new(n: usize, eps0: f64, p: [f64; 3], phat: [f64; 3]) -> Self {
        let sq = |x: [f64; 3]| [[x[0], x[1]], [x[1], x[2]]];
        Self {
            name: format!(
                "n{n}-e{eps0}-p{}-{}-{}-q{}-{}-{}",
                p[0], p[1], p[2], phat[0], phat[1], phat[2]
            ),
            n,
            eps: [eps0, 1.0 - eps0],
            p: sq(p),
            phat: sq(phat),
        }
    }

    pub fn config(&self, trials: usize) -> Result<SimulationConfig> {
        Ok(SimulationConfig {
            n: self.n,
            dist: ClassDistribution::new(self.eps.to_vec())?,
            p: ConnectionMatrix::named("p", self.p.iter().map(|r| r.to_vec()).collect())?,
            phat: ConnectionMatrix::named("phat", self.phat.iter().map(|r| r.to_vec()).collect())?,
            rule: ScoringRule::preset(RuleKind::Plurality, 2)?,
            trials,
            panel_size: self.n,
            tiebreak: None,
            condition_on: None,
        })
    }
}

/// Twelve configurations with `n ∈ {4, 6, 8}`, mixing accurate, inverted
/// and flat estimates.
pub fn default_oracle_grid() -> Vec<OracleCase> {
    vec![
        OracleCase::new(4, 0.5, [0.9, 0.1, 0.9], [0.1, 0.9, 0.1]),
        OracleCase::new(4, 0.6, [0.5, 0.2, 0.5], [0.5, 0.2, 0.5]),
        OracleCase::new(4, 0.7, [0.6, 0.3, 0.4], [0.3, 0.6, 0.4]),
        OracleCase::new(4, 0.4, [0.8, 0.4, 0.6], [0.5, 0.5, 0.5]),
        OracleCase::new(6, 0.6, [0.9, 0.1, 0.9], [0.1, 0.9, 0.1]),
        OracleCase::new(6, 0.5, [0.7, 0.3, 0.7], [0.4, 0.2, 0.4]),
        OracleCase::new(6, 0.65, [0.5, 0.5, 0.5], [0.9, 0.3, 0.6]),
        OracleCase::new(6, 0.55, [0.3, 0.2, 0.6], [0.6, 0.2, 0.3]),
        OracleCase::new(8, 0.6, [0.9, 0.1, 0.9], [0.1, 0.9, 0.1]),
        OracleCase::new(8, 0.5, [0.6, 0.4, 0.6], [0.6, 0.4, 0.6]),
        OracleCase::new(8, 0.7, [0.8, 0.2, 0.5], [0.4, 0.4, 0.4]),
        OracleCase::new(8, 0.45, [0.5, 0.3, 0.7], [0.9, 0.2, 0.9]),
    ]
}

/// Exact versus Monte Carlo surprise for one class of one case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub case: String,
    pub n: usize,
    pub class_index: usize,
    pub exact: f64,
    pub estimate: f64,
    pub half_width: f64,
    pub delta: f64,
    /// `|delta| ≤ tolerance · half_width`.
    pub pass: bool,
}

/// Runs every case at `trials` trials and compares both classes against
/// the enumeration, allowing `tolerance` confidence half-widths.
pub fn run_oracle_check(
    grid: &[OracleCase],
    trials: usize,
    tolerance: f64,
    seed: RngSeed,
) -> Result<Vec<OracleRow>> {
    if !(tolerance >= 0.0) {
        return Err(Error::invalid("tolerance", "must be non-negative"));
    }
    let per_case: Vec<Vec<OracleRow>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, case)| {
            let cfg = case.config(trials)?;
            let tb = cfg.effective_tiebreak()?;
            let report = run_trials(&cfg, seed.child(i as u64))?;
            (0..2)
                .map(|k| {
                    let exact = brute_force_surprise(
                        case.n, &cfg.dist, &cfg.p, &cfg.phat, &cfg.rule, k, &tb,
                    )?;
                    let e = report.classes[k].surprise.ok_or_else(|| {
                        Error::Degenerate(format!("{}: class {k} never sampled", case.name))
                    })?;
                    let delta = e.value - exact;
                    Ok(OracleRow {
                        case: case.name.clone(),
                        n: case.n,
                        class_index: k,
                        exact,
                        estimate: e.value,
                        half_width: e.half_width,
                        delta,
                        pass: delta.abs() <= tolerance * e.half_width,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_case.into_iter().flatten().collect())
}
