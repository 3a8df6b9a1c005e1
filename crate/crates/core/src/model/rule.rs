use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The preset scoring rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Plurality,
    Borda,
    Veto,
}

impl RuleKind {
    pub const ALL: [RuleKind; 3] = [RuleKind::Plurality, RuleKind::Borda, RuleKind::Veto];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Plurality => "plurality",
            RuleKind::Borda => "borda",
            RuleKind::Veto => "veto",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            RuleKind::Plurality => "Plu",
            RuleKind::Borda => "Bor",
            RuleKind::Veto => "Vet",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plurality" | "plu" => Ok(RuleKind::Plurality),
            "borda" | "bor" => Ok(RuleKind::Borda),
            "veto" | "vet" | "antiplurality" => Ok(RuleKind::Veto),
            other => Err(Error::invalid("rule", format!("unknown rule `{other}`"))),
        }
    }
}

/// A positional scoring rule: position `i` in a ballot earns `scores[i]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoringRule {
    name: String,
    scores: Vec<f64>,
}

impl ScoringRule {
    /// A custom rule. Scores must be finite, non-increasing, and not all equal.
    pub fn new(name: impl Into<String>, scores: Vec<f64>) -> Result<Self> {
        if scores.len() < 2 {
            return Err(Error::invalid("scores", "need at least 2 positions"));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("scores", "non-finite entry"));
        }
        if let Some(i) = scores.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::invalid(
                format!("scores[{}]", i + 1),
                "scores must be non-increasing",
            ));
        }
        if scores[0] <= scores[scores.len() - 1] {
            return Err(Error::invalid("scores", "first score must exceed last"));
        }
        Ok(Self {
            name: name.into(),
            scores,
        })
    }

    /// Plurality `(1, 0, …, 0)`, Borda `(m−1, …, 1, 0)` and veto
    /// `(1, …, 1, 0)`, the latter two rescaled to sum to one. For three
    /// candidates this gives `(2/3, 1/3, 0)` and `(1/2, 1/2, 0)`.
    pub fn preset(kind: RuleKind, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(
                "m",
                format!("need at least 2 candidates, got {m}"),
            ));
        }
        let scores = match kind {
            RuleKind::Plurality => {
                let mut s = vec![0.0; m];
                s[0] = 1.0;
                s
            }
            RuleKind::Borda => {
                let total = (m * (m - 1) / 2) as f64;
                (0..m).map(|i| (m - 1 - i) as f64 / total).collect()
            }
            RuleKind::Veto => {
                let mut s = vec![1.0 / (m - 1) as f64; m];
                s[m - 1] = 0.0;
                s
            }
        };
        Self::new(kind.name(), scores)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn m(&self) -> usize {
        self.scores.len()
    }

    pub fn score_at(&self, position: usize) -> f64 {
        self.scores[position]
    }

    /// `λ·s + μ` for `λ > 0`, which selects the same winners.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::invalid("scale", "must be positive"));
        }
        Self::new(
            format!("{}*{scale}+{shift}", self.name),
            self.scores.iter().map(|s| scale * s + shift).collect(),
        )
    }
}
