//! A hand-built graph on which half the electorate is always surprised.

use crate::genesis::ElectionSample;
use crate::model::{ClassSystem, ConnectionMatrix, RuleKind, ScoringRule};
use crate::perception::{perceive_counts, perceived_scores, winner, TieBreak};
use crate::{Error, Result};

/// Two equal classes; every voter knows all of its own class and all but
/// one voter of the other class.
#[derive(Clone, Debug)]
pub struct EchoChamberFixture {
    pub sample: ElectionSample,
    /// Plurality winner each voter perceives with `p̂ ≡ 1`.
    pub perceived: Vec<usize>,
}

impl EchoChamberFixture {
    /// Whether every voter perceives its own favourite as the winner.
    pub fn everyone_sees_own_candidate(&self) -> bool {
        self.perceived
            .iter()
            .zip(self.sample.sigma())
            .all(|(&w, &k)| w == k)
    }

    /// Share of voters whose perceived winner differs from `declared`.
    pub fn surprised_fraction(&self, declared: usize) -> f64 {
        let surprised = self.perceived.iter().filter(|&&w| w != declared).count();
        surprised as f64 / self.perceived.len() as f64
    }
}

/// Voters `0..n/2` prefer candidate 0 and the rest candidate 1. Voter `i` of
/// the first half and voter `n/2 + j` of the second half are adjacent iff
/// `i ≠ j`; same-class pairs are always adjacent.
pub fn echo_chamber_fixture(n: usize) -> Result<EchoChamberFixture> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::invalid(
            "n",
            format!("{n} must be even and positive"),
        ));
    }
    let half = n / 2;
    let sigma: Vec<usize> = (0..n).map(|v| usize::from(v >= half)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let same = (u < half) == (v < half);
            if same || v - half != u {
                edges.push((u, v));
            }
        }
    }
    let sample = ElectionSample::from_edges(sigma, 2, edges)?;
    let phat = ConnectionMatrix::uniform(2, 1.0)?;
    let cs = ClassSystem::build(2)?;
    let rule = ScoringRule::preset(RuleKind::Plurality, 2)?;
    let tb = TieBreak::default();
    let perceived = (0..n)
        .map(|v| {
            let pc = perceive_counts(&sample, v, &phat)?;
            Ok(winner(&perceived_scores(&pc, &rule, &cs)?, &tb))
        })
        .collect::<Result<_>>()?;
    Ok(EchoChamberFixture { sample, perceived })
}
