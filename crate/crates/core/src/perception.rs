//! A voter's bias-corrected estimate of the class populations, and the
//! true and perceived winners under a scoring rule.
//!
//! Voter `v` in class `j` sees `|Nbr_v^k|` neighbours in class `k` and scales
//! each count by `1 / p̂[j][k]`; the own-class estimate also counts `v`.

use serde::{Deserialize, Serialize};

use crate::genesis::{neighbor_class_counts, ElectionSample};
use crate::model::{ClassSystem, ConnectionMatrix, ScoringRule};
use crate::{Error, Result};

/// Voter `v`'s estimated number of voters in each class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerceivedCounts {
    pub voter: usize,
    pub estimates: Vec<f64>,
}

/// One score per candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreVector(pub Vec<f64>);

impl ScoreVector {
    pub fn get(&self, candidate: usize) -> f64 {
        self.0[candidate]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Fixed priority order used to break score ties; earlier is preferred.
///
/// The default prefers lower candidate indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TieBreak {
    priority: Vec<usize>,
}

impl TieBreak {
    pub fn new(priority: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; priority.len()];
        for &c in &priority {
            if c >= priority.len() || seen[c] {
                return Err(Error::invalid(
                    "tiebreak",
                    format!("{priority:?} is not a permutation of 0..{}", priority.len()),
                ));
            }
            seen[c] = true;
        }
        Ok(Self { priority })
    }

    /// Prefers `candidate`, then the rest in ascending order.
    pub fn favoring(candidate: usize, m: usize) -> Result<Self> {
        if candidate >= m {
            return Err(Error::OutOfBounds {
                what: "candidate",
                index: candidate,
                len: m,
            });
        }
        let priority = std::iter::once(candidate)
            .chain((0..m).filter(|&c| c != candidate))
            .collect();
        Ok(Self { priority })
    }

    /// Explicit priority list, empty for the default order.
    pub fn priority(&self) -> &[usize] {
        &self.priority
    }

    /// Rank of `candidate` (0 is the most preferred).
    pub fn rank(&self, candidate: usize) -> usize {
        if self.priority.is_empty() {
            candidate
        } else {
            self.priority
                .iter()
                .position(|&c| c == candidate)
                .unwrap_or(usize::MAX)
        }
    }

    pub fn check_size(&self, m: usize) -> Result<()> {
        if !self.priority.is_empty() && self.priority.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "tie-break lists {} candidates, rule has {m}",
                self.priority.len()
            )));
        }
        Ok(())
    }
}

/// Scores closer than this (relative to the largest score) count as tied,
/// so that summation-order rounding never decides a winner.
pub const TIE_TOLERANCE: f64 = 1e-9;

fn tie_scale(scores: &[f64]) -> f64 {
    TIE_TOLERANCE * scores.iter().fold(0.0f64, |a, s| a.max(s.abs()))
}

fn ahead(scores: &[f64], a: usize, b: usize, tol: f64, tb: &TieBreak) -> bool {
    let d = scores[a] - scores[b];
    d > tol || (d.abs() <= tol && tb.rank(a) < tb.rank(b))
}

/// Highest-scoring candidate, ties going to the earlier one in `tiebreak`.
pub fn winner(scores: &ScoreVector, tiebreak: &TieBreak) -> usize {
    let s = scores.as_slice();
    let tol = tie_scale(s);
    (1..s.len()).fold(0, |best, c| {
        if ahead(s, c, best, tol, tiebreak) {
            c
        } else {
            best
        }
    })
}

/// Whether `challenger` would win a head-to-head comparison against
/// `incumbent` on these scores, under the same tie rule as [`winner`].
pub fn beats(
    scores: &ScoreVector,
    challenger: usize,
    incumbent: usize,
    tiebreak: &TieBreak,
) -> bool {
    challenger != incumbent
        && ahead(
            scores.as_slice(),
            challenger,
            incumbent,
            tie_scale(scores.as_slice()),
            tiebreak,
        )
}

/// Bias-corrected population estimates for a voter in `own_class` with per-class neighbour counts
/// `neighbors`.
pub fn estimates_from_neighbors(
    own_class: usize,
    neighbors: &[u32],
    phat: &ConnectionMatrix,
) -> Vec<f64> {
    let row = phat.row(own_class);
    let mut est: Vec<f64> = neighbors
        .iter()
        .zip(row)
        .map(|(&c, &q)| c as f64 / q)
        .collect();
    est[own_class] += 1.0;
    est
}

/// Voter `v`'s estimated class populations.
pub fn perceive_counts(
    sample: &ElectionSample,
    v: usize,
    phat: &ConnectionMatrix,
) -> Result<PerceivedCounts> {
    phat.check_size("phat", sample.num_classes())?;
    let nbr = neighbor_class_counts(sample, v)?;
    Ok(PerceivedCounts {
        voter: v,
        estimates: estimates_from_neighbors(sample.class_of(v), &nbr, phat),
    })
}

/// `table[k][a]`: score candidate `a` receives from one class-`k` voter.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    m: usize,
    table: Vec<Vec<f64>>,
}

impl ScoreTable {
    pub fn new(rule: &ScoringRule, cs: &ClassSystem) -> Result<Self> {
        if rule.m() != cs.m() {
            return Err(Error::DimensionMismatch(format!(
                "rule `{}` has {} positions, class system has {} candidates",
                rule.name(),
                rule.m(),
                cs.m()
            )));
        }
        let table = (0..cs.len())
            .map(|k| {
                (0..cs.m())
                    .map(|a| rule.score_at(cs.position(k, a)))
                    .collect()
            })
            .collect();
        Ok(Self { m: cs.m(), table })
    }

    pub fn row(&self, class: usize) -> &[f64] {
        &self.table[class]
    }

    /// Scores induced by (possibly fractional) class counts.
    pub fn scores(&self, counts: &[f64]) -> Result<ScoreVector> {
        if counts.len() != self.table.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} class counts for {} classes",
                counts.len(),
                self.table.len()
            )));
        }
        let mut out = vec![0.0; self.m];
        for (row, &c) in self.table.iter().zip(counts) {
            if c != 0.0 {
                for (o, &s) in out.iter_mut().zip(row) {
                    *o += c * s;
                }
            }
        }
        Ok(ScoreVector(out))
    }
}

/// `score(a) = Σ_k counts[k] · rule[pos_k(a)]`.
pub fn true_scores(counts: &[f64], rule: &ScoringRule, cs: &ClassSystem) -> Result<ScoreVector> {
    ScoreTable::new(rule, cs)?.scores(counts)
}

/// [`true_scores`] applied to a voter's estimates.
pub fn perceived_scores(
    pc: &PerceivedCounts,
    rule: &ScoringRule,
    cs: &ClassSystem,
) -> Result<ScoreVector> {
    true_scores(&pc.estimates, rule, cs)
}

/// Integer class counts as reals.
pub fn counts_f64(counts: &[usize]) -> Vec<f64> {
    counts.iter().map(|&c| c as f64).collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::model::RuleKind;

    fn sv(s: &[f64]) -> ScoreVector {
        ScoreVector(s.to_vec())
    }

    #[test]
    fn winner_examples() {
        assert_eq!(winner(&sv(&[3.0, 2.0]), &TieBreak::default()), 0);
        assert_eq!(
            winner(&sv(&[2.0, 2.0]), &TieBreak::new(vec![1, 0]).unwrap()),
            1
        );
        assert_eq!(winner(&sv(&[1.0, 5.0, 5.0]), &TieBreak::default()), 1);
        assert_eq!(
            winner(&sv(&[1.0, 5.0, 5.0]), &TieBreak::favoring(2, 3).unwrap()),
            2
        );
    }

    #[test]
    fn rounding_level_differences_are_ties() {
        let s = sv(&[2.0, 2.0 + 4.0 * f64::EPSILON]);
        assert_eq!(winner(&s, &TieBreak::default()), 0);
        assert!(!beats(&s, 1, 0, &TieBreak::default()));
    }

    #[test]
    fn tiebreak_validation() {
        assert!(TieBreak::new(vec![0, 0]).is_err());
        assert!(TieBreak::new(vec![0, 2]).is_err());
        assert!(TieBreak::favoring(3, 3).is_err());
        assert_eq!(TieBreak::favoring(1, 3).unwrap().priority(), &[1, 0, 2]);
    }

    #[test]
    fn perceive_examples() {
        let phat = ConnectionMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let isolated = ElectionSample::from_edges(vec![0, 1], 2, []).unwrap();
        assert_eq!(
            perceive_counts(&isolated, 0, &phat).unwrap().estimates,
            vec![1.0, 0.0]
        );

        let edges = (1..5).map(|u| (0, u));
        let star = ElectionSample::from_edges(vec![0, 1, 1, 1, 1], 2, edges).unwrap();
        assert_eq!(perceive_counts(&star, 0, &phat).unwrap().estimates[1], 8.0);
        assert!(perceive_counts(&star, 5, &phat).is_err());
    }

    #[test]
    fn complete_graph_perfect_observation() {
        let sigma = vec![0, 1, 2, 0, 5, 5, 3];
        let n = sigma.len();
        let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v)));
        let s = ElectionSample::from_edges(sigma, 6, edges).unwrap();
        let ones = ConnectionMatrix::uniform(6, 1.0).unwrap();
        let cs = ClassSystem::build(3).unwrap();
        let rule = ScoringRule::preset(RuleKind::Borda, 3).unwrap();
        let truth = true_scores(&counts_f64(s.counts()), &rule, &cs).unwrap();
        for v in 0..n {
            let pc = perceive_counts(&s, v, &ones).unwrap();
            assert_eq!(pc.estimates, counts_f64(s.counts()));
            assert_eq!(perceived_scores(&pc, &rule, &cs).unwrap(), truth);
        }
    }

    #[test]
    fn true_score_examples() {
        let cs2 = ClassSystem::build(2).unwrap();
        let plu2 = ScoringRule::preset(RuleKind::Plurality, 2).unwrap();
        assert_eq!(
            true_scores(&[3.0, 2.0], &plu2, &cs2).unwrap().0,
            vec![3.0, 2.0]
        );
        assert_eq!(
            true_scores(&[8.0, 5.0], &plu2, &cs2).unwrap().0,
            vec![8.0, 5.0]
        );

        let cs = ClassSystem::build(3).unwrap();
        for kind in RuleKind::ALL {
            let rule = ScoringRule::preset(kind, 3).unwrap();
            let s = true_scores(&[1.0; 6], &rule, &cs).unwrap();
            for a in 0..3 {
                assert!((s.get(a) - 2.0).abs() < 1e-12, "{kind}: {:?}", s);
            }
        }
        let bor = ScoringRule::preset(RuleKind::Borda, 3).unwrap();
        let s = true_scores(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], &bor, &cs).unwrap();
        assert_eq!(s.0, vec![2.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert!(true_scores(&[1.0; 5], &bor, &cs).is_err());
    }

    #[test]
    fn own_class_only_estimates_permute_the_rule() {
        let cs = ClassSystem::build(3).unwrap();
        let rule = ScoringRule::preset(RuleKind::Borda, 3).unwrap();
        for k in 0..6 {
            let mut est = vec![0.0; 6];
            est[k] = 1.0;
            let pc = PerceivedCounts {
                voter: 0,
                estimates: est,
            };
            let s = perceived_scores(&pc, &rule, &cs).unwrap();
            for a in 0..3 {
                assert_eq!(s.get(a), rule.score_at(cs.position(k, a)));
            }
        }
    }

    proptest! {
        #[test]
        fn winner_is_affine_invariant(
            counts in prop::collection::vec(0u32..50, 6),
            scale in 0.01f64..100.0,
            shift in -10.0f64..10.0,
            kind in prop::sample::select(RuleKind::ALL.to_vec()),
        ) {
            let cs = ClassSystem::build(3).unwrap();
            let rule = ScoringRule::preset(kind, 3).unwrap();
            let moved = rule.affine(scale, shift).unwrap();
            let c: Vec<f64> = counts.iter().map(|&x| x as f64).collect();
            let tb = TieBreak::default();
            let a = winner(&true_scores(&c, &rule, &cs).unwrap(), &tb);
            let b = winner(&true_scores(&c, &moved, &cs).unwrap(), &tb);
            prop_assert_eq!(a, b);
        }
    }
}
