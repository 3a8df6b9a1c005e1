use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A strict total order over `m` candidates, stored best-to-worst.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PreferenceOrder {
    ranking: Vec<usize>,
    positions: Vec<usize>,
}

impl PreferenceOrder {
    /// Builds an order from a best-to-worst list of candidate indices.
    pub fn new(ranking: Vec<usize>) -> Result<Self> {
        let m = ranking.len();
        if m < 2 {
            return Err(Error::invalid(
                "ranking",
                format!("need at least 2 candidates, got {m}"),
            ));
        }
        let mut positions = vec![usize::MAX; m];
        for (pos, &c) in ranking.iter().enumerate() {
            if c >= m {
                return Err(Error::invalid(
                    "ranking",
                    format!("candidate {c} out of range for m={m}"),
                ));
            }
            if positions[c] != usize::MAX {
                return Err(Error::invalid("ranking", format!("candidate {c} repeated")));
            }
            positions[c] = pos;
        }
        Ok(Self { ranking, positions })
    }

    /// The identity order `0 ≻ 1 ≻ … ≻ m−1`.
    pub fn identity(m: usize) -> Result<Self> {
        Self::new((0..m).collect())
    }

    pub fn m(&self) -> usize {
        self.ranking.len()
    }

    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    /// Zero-based position of `candidate` (0 = most preferred).
    pub fn position(&self, candidate: usize) -> usize {
        self.positions[candidate]
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn top(&self) -> usize {
        self.ranking[0]
    }

    /// True when `a` is ranked above `b`.
    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.positions[a] < self.positions[b]
    }
}

impl TryFrom<Vec<usize>> for PreferenceOrder {
    type Error = Error;

    fn try_from(ranking: Vec<usize>) -> Result<Self> {
        Self::new(ranking)
    }
}

impl From<PreferenceOrder> for Vec<usize> {
    fn from(order: PreferenceOrder) -> Self {
        order.ranking
    }
}

/// Compact label such as `acb`.
impl fmt::Display for PreferenceOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.ranking {
            write!(f, "{}", super::candidate_letter(c))?;
        }
        Ok(())
    }
}

/// Kendall-tau distance: the number of candidate pairs the two orders rank
/// oppositely, which equals the minimum number of adjacent swaps turning one
/// order into the other.
pub fn kt_distance(a: &PreferenceOrder, b: &PreferenceOrder) -> Result<u32> {
    if a.m() != b.m() {
        return Err(Error::invalid(
            "kt_distance",
            format!(
                "orders over different candidate counts ({} vs {})",
                a.m(),
                b.m()
            ),
        ));
    }
    let m = a.m();
    let mut discordant = 0;
    for x in 0..m {
        for y in (x + 1)..m {
            if a.prefers(x, y) != b.prefers(x, y) {
                discordant += 1;
            }
        }
    }
    Ok(discordant)
}
