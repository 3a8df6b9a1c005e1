//! Three candidates: normal approximation of false-beating probabilities.
//!
//! For a voter `v` in class `k`, challenger `a` and true winner `w`, every
//! other voter `u` contributes `X_u = d_l·1[u ∈ P_l, u ~ v]/p̂_kl` to
//! `ŝ_v(a) − ŝ_v(w)`, where `d_l = s[pos_l(a)] − s[pos_l(w)]`. With a uniform
//! population over the `|C|` classes,
//!
//! ```text
//! E[X]  = Σ_l p_kl d_l   / (|C| p̂_kl)
//! E[X²] = Σ_l p_kl d_l²  / (|C| p̂_kl²)
//! ```
//!
//! and the beat probability is approximately `Φ(√n·E[X]/√var X)`.

use serde::Serialize;

use super::normal::normal_tail;
use crate::model::{
    satisfies_mee, ClassSystem, ConnectionMatrix, Monotonicity, RuleKind, ScoringRule,
};
use crate::{Error, Result};

/// Connection model with one probability for same-class pairs and one for
/// every other pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedModel {
    pub p_same: f64,
    pub p_cross: f64,
    pub phat_same: f64,
    pub phat_cross: f64,
}

impl ReducedModel {
    pub fn new(p_same: f64, p_cross: f64, phat_same: f64, phat_cross: f64) -> Result<Self> {
        for (name, x) in [
            ("p_same", p_same),
            ("p_cross", p_cross),
            ("phat_same", phat_same),
            ("phat_cross", phat_cross),
        ] {
            if !(x > 0.0 && x <= 1.0) {
                return Err(Error::invalid(name, format!("{x} outside (0, 1]")));
            }
        }
        Ok(Self {
            p_same,
            p_cross,
            phat_same,
            phat_cross,
        })
    }

    /// Reads a two-level model off full matrices; fails unless every
    /// diagonal entry is equal and every off-diagonal entry is equal.
    pub fn from_matrices(p: &ConnectionMatrix, phat: &ConnectionMatrix) -> Result<Self> {
        let (ps, pc) = p.as_two_level().ok_or_else(|| {
            Error::Precondition("p is not of the same-class / cross-class form".into())
        })?;
        let (hs, hc) = phat.as_two_level().ok_or_else(|| {
            Error::Precondition("phat is not of the same-class / cross-class form".into())
        })?;
        Self::new(ps, pc, hs, hc)
    }

    pub fn matrices(&self, size: usize) -> Result<(ConnectionMatrix, ConnectionMatrix)> {
        Ok((
            ConnectionMatrix::two_level(size, self.p_same, self.p_cross)?,
            ConnectionMatrix::two_level(size, self.phat_same, self.phat_cross)?,
        ))
    }

    /// `p/p̂` is larger for the own class than for the others.
    pub fn strict_mee(&self) -> bool {
        self.p_same / self.phat_same > self.p_cross / self.phat_cross
    }

    pub fn mee(&self) -> bool {
        self.p_same / self.phat_same >= self.p_cross / self.phat_cross
    }

    fn get(&self, j: usize, k: usize) -> (f64, f64) {
        if j == k {
            (self.p_same, self.phat_same)
        } else {
            (self.p_cross, self.phat_cross)
        }
    }
}

/// Moments of one voter's per-neighbour contribution to a score gap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreDiffMoments {
    pub rule: String,
    pub voter_class: usize,
    pub challenger: usize,
    pub winner: usize,
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    /// `√n · mean / √variance`.
    pub mu_normalized: f64,
}

fn check_three(cs: &ClassSystem) -> Result<()> {
    if cs.m() != 3 {
        return Err(Error::Precondition(format!(
            "needs m = 3, got m = {}",
            cs.m()
        )));
    }
    Ok(())
}

/// Mean and variance of the contribution of one other voter to
/// `ŝ_v(challenger) − ŝ_v(winner)` for `v` in `voter_class`.
#[allow(clippy::too_many_arguments)]
pub fn score_diff_moments(
    rule: &ScoringRule,
    voter_class: usize,
    challenger: usize,
    winner: usize,
    model: &ReducedModel,
    cs: &ClassSystem,
    n: usize,
) -> Result<ScoreDiffMoments> {
    check_three(cs)?;
    if rule.m() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "rule `{}` is not a three-candidate rule",
            rule.name()
        )));
    }
    if voter_class >= cs.len() {
        return Err(Error::OutOfBounds {
            what: "class",
            index: voter_class,
            len: cs.len(),
        });
    }
    if challenger >= 3 || winner >= 3 {
        return Err(Error::OutOfBounds {
            what: "candidate",
            index: challenger.max(winner),
            len: 3,
        });
    }
    if challenger == winner {
        return Err(Error::invalid("challenger", "must differ from the winner"));
    }
    let weight = 1.0 / cs.len() as f64;
    let (mut mean, mut second) = (0.0, 0.0);
    for l in 0..cs.len() {
        let d = rule.score_at(cs.position(l, challenger)) - rule.score_at(cs.position(l, winner));
        let (p, h) = model.get(voter_class, l);
        mean += weight * p * d / h;
        second += weight * p * d * d / (h * h);
    }
    let variance = second - mean * mean;
    if !(variance > 0.0) {
        return Err(Error::Degenerate(format!(
            "variance {variance} for class {voter_class}, challenger {challenger} under `{}`",
            rule.name()
        )));
    }
    Ok(ScoreDiffMoments {
        rule: rule.name().to_string(),
        voter_class,
        challenger,
        winner,
        mean,
        second_moment: second,
        variance,
        mu_normalized: (n as f64).sqrt() * mean / variance.sqrt(),
    })
}

/// Where a voter ranks the true winner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WinnerRank {
    First,
    Second,
    Last,
}

impl WinnerRank {
    pub fn of(cs: &ClassSystem, voter_class: usize, winner: usize) -> Self {
        match cs.position(voter_class, winner) {
            0 => WinnerRank::First,
            1 => WinnerRank::Second,
            _ => WinnerRank::Last,
        }
    }
}

/// Predicted relations `a ≤ b` between MPFB factors.
pub fn claimed_relations(rank: WinnerRank) -> Vec<(RuleKind, RuleKind)> {
    use RuleKind::*;
    match rank {
        WinnerRank::First => vec![(Plurality, Borda), (Borda, Veto)],
        WinnerRank::Second => vec![(Veto, Borda), (Borda, Plurality)],
        WinnerRank::Last => vec![(Veto, Borda), (Plurality, Borda)],
    }
}

/// Approximate MPFB of one rule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticMpfb {
    pub rule: RuleKind,
    /// `Φ(μ)` for the most dangerous challenger.
    pub mpfb: f64,
    pub mu: f64,
    pub challenger: usize,
    pub moments: Vec<ScoreDiffMoments>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticOrdering {
    pub voter_class: usize,
    pub winner: usize,
    pub n: usize,
    pub winner_rank: WinnerRank,
    pub per_rule: Vec<AnalyticMpfb>,
    /// Rules by increasing `μ` (equivalently MPFB).
    pub ascending: Vec<RuleKind>,
    pub label: String,
    pub strict_mee: bool,
    pub claimed: Vec<(RuleKind, RuleKind)>,
    /// Every claimed relation holds on `μ`. Only meaningful with strict MEE.
    pub claim_holds: bool,
}

impl AnalyticOrdering {
    pub fn rule(&self, kind: RuleKind) -> &AnalyticMpfb {
        self.per_rule
            .iter()
            .find(|r| r.rule == kind)
            .expect("all presets present")
    }
}

/// Normal-approximation MPFB of plurality, Borda and veto for voters of
/// `voter_class` when `winner` is the true winner.
pub fn analytic_mpfb_ordering(
    voter_class: usize,
    winner: usize,
    model: &ReducedModel,
    cs: &ClassSystem,
    n: usize,
) -> Result<AnalyticOrdering> {
    check_three(cs)?;
    let (p, phat) = model.matrices(cs.len())?;
    if !satisfies_mee(&p, &phat, cs, Monotonicity::Weak)? {
        return Err(Error::Precondition(
            "estimation error is not monotone: p/p̂ must not increase with distance".into(),
        ));
    }
    let mut per_rule = Vec::with_capacity(3);
    for kind in RuleKind::ALL {
        let rule = ScoringRule::preset(kind, 3)?;
        let moments = (0..3)
            .filter(|&a| a != winner)
            .map(|a| score_diff_moments(&rule, voter_class, a, winner, model, cs, n))
            .collect::<Result<Vec<_>>>()?;
        let best = moments
            .iter()
            .max_by(|x, y| x.mu_normalized.total_cmp(&y.mu_normalized))
            .expect("two challengers");
        per_rule.push(AnalyticMpfb {
            rule: kind,
            mpfb: normal_tail(best.mu_normalized),
            mu: best.mu_normalized,
            challenger: best.challenger,
            moments: moments.clone(),
        });
    }
    let mut ascending: Vec<&AnalyticMpfb> = per_rule.iter().collect();
    ascending.sort_by(|a, b| a.mu.total_cmp(&b.mu).then(a.rule.cmp(&b.rule)));
    let label = ascending
        .iter()
        .map(|r| r.rule.short())
        .collect::<Vec<_>>()
        .join(" ≤ ");
    let ascending: Vec<RuleKind> = ascending.iter().map(|r| r.rule).collect();
    let rank = WinnerRank::of(cs, voter_class, winner);
    let claimed = claimed_relations(rank);
    let mu = |k: RuleKind| per_rule.iter().find(|r| r.rule == k).expect("preset").mu;
    let claim_holds = claimed.iter().all(|&(a, b)| {
        let (x, y) = (mu(a), mu(b));
        x <= y + 1e-12 * x.abs().max(y.abs()).max(1.0)
    });
    Ok(AnalyticOrdering {
        voter_class,
        winner,
        n,
        winner_rank: rank,
        ascending,
        label,
        strict_mee: model.strict_mee(),
        claimed,
        claim_holds,
        per_rule,
    })
}
