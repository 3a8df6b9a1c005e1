//! Monte Carlo estimation of surprise, beat events and MPFB factors.
//!
//! Each trial samples a class assignment, computes the true winner, then
//! evaluates a random panel of voters from every class. Only the panel
//! voters' incident edges are drawn; the counter-based edge stream makes
//! them identical to the corresponding edges of the full graph.
//!
//! Per-class frequencies use a ratio estimator: trial `t` contributes
//! `y = N_k` and `x = N_k · (surprised panel share)`, so `Σx / Σy` estimates
//! the probability that a fixed voter is surprised given it is in class `k`.
//!
//! Trials are computed in parallel and folded in trial order, so reports do
//! not depend on the number of worker threads.

mod fixture;
mod oracle;
mod report;

use rayon::prelude::*;
use serde::Serialize;

use crate::genesis::{incident_class_counts, sample_assignment};
use crate::model::{ClassDistribution, ClassSystem, ConnectionMatrix, ScoringRule};
use crate::perception::{
    beats, counts_f64, estimates_from_neighbors, winner, ScoreTable, TieBreak,
};
use crate::rng::{Purpose, RngSeed};
use crate::stats::RatioSums;
use crate::{Error, Result};

pub use fixture::{echo_chamber_fixture, EchoChamberFixture};
pub use oracle::{
    brute_force_surprise, default_oracle_grid, run_oracle_check, OracleCase, OracleRow,
    MAX_ORACLE_VOTERS,
};
pub use report::{
    check_sandwich, contradicts, mpfb_empirical_ordering, write_reports_csv, ClassSurprise,
    ConfigSummary, EmpiricalOrdering, SandwichCheck, SurpriseReport,
};

/// Parameters of a Monte Carlo run.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub dist: ClassDistribution,
    pub p: ConnectionMatrix,
    pub phat: ConnectionMatrix,
    pub rule: ScoringRule,
    pub trials: usize,
    /// Voters evaluated per class per trial.
    pub panel_size: usize,
    /// `None` prefers the conditioned winner if any, else lower indices.
    pub tiebreak: Option<TieBreak>,
    /// Keep only trials whose true winner is this candidate.
    pub condition_on: Option<usize>,
}

impl SimulationConfig {
    /// Checks every parameter and returns the class system.
    pub fn validate(&self) -> Result<ClassSystem> {
        if self.n == 0 {
            return Err(Error::invalid("n", "need at least one voter"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "need at least one trial"));
        }
        if self.panel_size == 0 {
            return Err(Error::invalid(
                "panel_size",
                "need at least one voter per class",
            ));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::invalid("n", "at most 2^32 - 1 voters"));
        }
        let cs = ClassSystem::build(self.rule.m())?;
        if self.dist.len() != cs.len() {
            return Err(Error::DimensionMismatch(format!(
                "eps has {} entries, {} candidates need {}",
                self.dist.len(),
                cs.m(),
                cs.len()
            )));
        }
        self.p.check_size("p", cs.len())?;
        self.phat.check_size("phat", cs.len())?;
        if let Some(c) = self.condition_on {
            if c >= cs.m() {
                return Err(Error::invalid(
                    "condition_on",
                    format!("candidate {c} out of range for m = {}", cs.m()),
                ));
            }
        }
        if let Some(tb) = &self.tiebreak {
            tb.check_size(cs.m())?;
        }
        Ok(cs)
    }

    /// Tie-break actually applied.
    pub fn effective_tiebreak(&self) -> Result<TieBreak> {
        match (&self.tiebreak, self.condition_on) {
            (Some(tb), _) => Ok(tb.clone()),
            (None, Some(c)) => TieBreak::favoring(c, self.rule.m()),
            (None, None) => Ok(TieBreak::default()),
        }
    }

    /// Same configuration under another rule.
    pub fn with_rule(&self, rule: ScoringRule) -> Self {
        Self {
            rule,
            ..self.clone()
        }
    }
}

/// One trial's result under one rule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub true_winner: usize,
    /// Panel voters, grouped by class.
    pub panel: Vec<usize>,
    pub panel_class: Vec<usize>,
    pub per_voter_perceived: Vec<usize>,
    pub surprised: Vec<bool>,
    /// Bit `b` set iff candidate `b` beats the true winner in that voter's
    /// perceived scores.
    pub beat_mask: Vec<u8>,
}

struct Trial {
    counts: Vec<usize>,
    winners: Vec<usize>,
    outcomes: Vec<Option<TrialOutcome>>,
}

struct Engine<'a> {
    cfg: &'a SimulationConfig,
    cs: ClassSystem,
    tables: Vec<ScoreTable>,
    tiebreak: TieBreak,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SimulationConfig, rules: &[ScoringRule]) -> Result<Self> {
        let cs = cfg.validate()?;
        let tables = rules
            .iter()
            .map(|r| ScoreTable::new(r, &cs))
            .collect::<Result<_>>()?;
        Ok(Self {
            tiebreak: cfg.effective_tiebreak()?,
            cfg,
            cs,
            tables,
        })
    }

    fn trial(&self, seed: RngSeed) -> Result<Trial> {
        let cfg = self.cfg;
        let a = sample_assignment(cfg.n, &cfg.dist, seed)?;
        let counts = counts_f64(&a.counts);
        let mut winners = Vec::with_capacity(self.tables.len());
        for t in &self.tables {
            winners.push(winner(&t.scores(&counts)?, &self.tiebreak));
        }
        let active: Vec<bool> = winners
            .iter()
            .map(|&w| cfg.condition_on.map_or(true, |c| c == w))
            .collect();
        if !active.iter().any(|&x| x) {
            return Ok(Trial {
                counts: a.counts,
                winners,
                outcomes: vec![None; self.tables.len()],
            });
        }

        let mut members: Vec<Vec<usize>> =
            a.counts.iter().map(|&c| Vec::with_capacity(c)).collect();
        for (v, &k) in a.sigma.iter().enumerate() {
            members[k].push(v);
        }
        let mut rng = seed.rng(Purpose::Panel);
        let mut panel = Vec::new();
        let mut panel_class = Vec::new();
        for (k, list) in members.iter().enumerate() {
            let size = cfg.panel_size.min(list.len());
            for i in rand::seq::index::sample(&mut rng, list.len(), size) {
                panel.push(list[i]);
                panel_class.push(k);
            }
        }

        let mut outcomes: Vec<Option<TrialOutcome>> = active
            .iter()
            .zip(&winners)
            .map(|(&on, &w)| {
                on.then(|| TrialOutcome {
                    true_winner: w,
                    panel: panel.clone(),
                    panel_class: panel_class.clone(),
                    per_voter_perceived: Vec::with_capacity(panel.len()),
                    surprised: Vec::with_capacity(panel.len()),
                    beat_mask: Vec::with_capacity(panel.len()),
                })
            })
            .collect();
        let m = self.cs.m();
        for (&v, &k) in panel.iter().zip(&panel_class) {
            let nbr = incident_class_counts(&a.sigma, &cfg.p, seed, v);
            let est = estimates_from_neighbors(k, &nbr, &cfg.phat);
            for (table, out) in self.tables.iter().zip(outcomes.iter_mut()) {
                let Some(out) = out else { continue };
                let scores = table.scores(&est)?;
                let w = out.true_winner;
                let perceived = winner(&scores, &self.tiebreak);
                let mask = (0..m)
                    .filter(|&b| beats(&scores, b, w, &self.tiebreak))
                    .fold(0u8, |acc, b| acc | (1 << b));
                out.per_voter_perceived.push(perceived);
                out.surprised.push(perceived != w);
                out.beat_mask.push(mask);
            }
        }
        Ok(Trial {
            counts: a.counts,
            winners,
            outcomes,
        })
    }
}

/// Running sums for one rule.
#[derive(Clone, Debug)]
pub(crate) struct Accumulator {
    pub trials: usize,
    pub accepted: usize,
    pub winner_counts: Vec<usize>,
    pub voters_observed: Vec<usize>,
    /// `[class]`
    pub surprise: Vec<RatioSums>,
    /// `[true winner][class][challenger]`
    pub beat: Vec<Vec<Vec<RatioSums>>>,
}

impl Accumulator {
    fn new(m: usize, classes: usize) -> Self {
        Self {
            trials: 0,
            accepted: 0,
            winner_counts: vec![0; m],
            voters_observed: vec![0; classes],
            surprise: vec![RatioSums::default(); classes],
            beat: vec![vec![vec![RatioSums::default(); m]; classes]; m],
        }
    }

    fn add(&mut self, counts: &[usize], winner: usize, outcome: Option<&TrialOutcome>) {
        self.trials += 1;
        self.winner_counts[winner] += 1;
        let Some(out) = outcome else { return };
        self.accepted += 1;
        let m = self.winner_counts.len();
        for (k, &nk) in counts.iter().enumerate() {
            let y = nk as f64;
            let idx: Vec<usize> = (0..out.panel.len())
                .filter(|&i| out.panel_class[i] == k)
                .collect();
            self.voters_observed[k] += idx.len();
            let weight = if idx.is_empty() {
                0.0
            } else {
                y / idx.len() as f64
            };
            let surprised = idx.iter().filter(|&&i| out.surprised[i]).count();
            self.surprise[k].push(weight * surprised as f64, y);
            for w in 0..m {
                for b in 0..m {
                    let x = if w == out.true_winner {
                        weight
                            * idx
                                .iter()
                                .filter(|&&i| out.beat_mask[i] & (1 << b) != 0)
                                .count() as f64
                    } else {
                        0.0
                    };
                    self.beat[w][k][b].push(x, y);
                }
            }
        }
    }
}

const CHUNK: usize = 256;

fn run_engine(
    cfg: &SimulationConfig,
    rules: &[ScoringRule],
    seed: RngSeed,
) -> Result<Vec<SurpriseReport>> {
    let engine = Engine::new(cfg, rules)?;
    let (m, classes) = (engine.cs.m(), engine.cs.len());
    let mut acc: Vec<Accumulator> = rules.iter().map(|_| Accumulator::new(m, classes)).collect();
    let mut start = 0;
    while start < cfg.trials {
        let end = (start + CHUNK).min(cfg.trials);
        let batch: Vec<Trial> = (start..end)
            .into_par_iter()
            .map(|t| engine.trial(seed.child(t as u64)))
            .collect::<Result<_>>()?;
        for trial in &batch {
            for (r, a) in acc.iter_mut().enumerate() {
                a.add(&trial.counts, trial.winners[r], trial.outcomes[r].as_ref());
            }
        }
        start = end;
    }
    let tiebreak = engine.tiebreak.clone();
    rules
        .iter()
        .zip(acc)
        .map(|(rule, a)| {
            if let Some(c) = cfg.condition_on {
                if a.accepted == 0 {
                    return Err(Error::ConditioningStarved {
                        winner: c,
                        trials: a.trials,
                        observed: a.winner_counts,
                    });
                }
            }
            let summary = ConfigSummary::new(&cfg.with_rule(rule.clone()), &tiebreak, seed);
            Ok(SurpriseReport::from_accumulator(summary, &engine.cs, a))
        })
        .collect()
}

/// Monte Carlo surprise report for `cfg`.
pub fn run_trials(cfg: &SimulationConfig, seed: RngSeed) -> Result<SurpriseReport> {
    Ok(run_engine(cfg, std::slice::from_ref(&cfg.rule), seed)?.remove(0))
}

/// One report per rule, all computed from the same samples; `cfg.rule` is
/// ignored apart from fixing `m`.
pub fn run_trials_for_rules(
    cfg: &SimulationConfig,
    rules: &[ScoringRule],
    seed: RngSeed,
) -> Result<Vec<SurpriseReport>> {
    if rules.is_empty() {
        return Err(Error::invalid("rules", "need at least one rule"));
    }
    run_engine(cfg, rules, seed)
}

/// True-winner counts over trials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WinnerFrequencies {
    pub trials: usize,
    pub counts: Vec<usize>,
}

/// How often each candidate is the true winner; draws only assignments,
/// using the same per-trial streams as [`run_trials`].
pub fn winner_frequencies(cfg: &SimulationConfig, seed: RngSeed) -> Result<WinnerFrequencies> {
    let cs = cfg.validate()?;
    let table = ScoreTable::new(&cfg.rule, &cs)?;
    let tiebreak = cfg.effective_tiebreak()?;
    let mut counts = vec![0; cs.m()];
    let mut start = 0;
    while start < cfg.trials {
        let end = (start + 4 * CHUNK).min(cfg.trials);
        let batch: Vec<usize> = (start..end)
            .into_par_iter()
            .map(|t| {
                let a = sample_assignment(cfg.n, &cfg.dist, seed.child(t as u64))?;
                Ok(winner(&table.scores(&counts_f64(&a.counts))?, &tiebreak))
            })
            .collect::<Result<_>>()?;
        for w in batch {
            counts[w] += 1;
        }
        start = end;
    }
    Ok(WinnerFrequencies {
        trials: cfg.trials,
        counts,
    })
}

/// Outcome of trial `index` under `cfg.rule`, or `None` if conditioning
/// discarded it.
pub fn trial_outcome(
    cfg: &SimulationConfig,
    seed: RngSeed,
    index: usize,
) -> Result<Option<TrialOutcome>> {
    let engine = Engine::new(cfg, std::slice::from_ref(&cfg.rule))?;
    Ok(engine.trial(seed.child(index as u64))?.outcomes.remove(0))
}
