use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Accumulator, SimulationConfig};
use crate::model::{ClassSystem, RuleKind};
use crate::perception::TieBreak;
use crate::rng::RngSeed;
use crate::stats::{Estimate, RatioSums};
use crate::{Error, Result};

/// Everything needed to rerun a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub n: usize,
    pub m: usize,
    pub eps: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub phat: Vec<Vec<f64>>,
    pub rule: String,
    pub rule_scores: Vec<f64>,
    pub trials: usize,
    pub panel_size: usize,
    pub tiebreak: Vec<usize>,
    pub condition_on: Option<usize>,
    pub seed: RngSeed,
}

impl ConfigSummary {
    pub(crate) fn new(cfg: &SimulationConfig, tiebreak: &TieBreak, seed: RngSeed) -> Self {
        let m = cfg.rule.m();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&c| tiebreak.rank(c));
        Self {
            n: cfg.n,
            m,
            eps: cfg.dist.probs().to_vec(),
            p: cfg.p.rows().to_vec(),
            phat: cfg.phat.rows().to_vec(),
            rule: cfg.rule.name().to_string(),
            rule_scores: cfg.rule.scores().to_vec(),
            trials: cfg.trials,
            panel_size: cfg.panel_size,
            tiebreak: order,
            condition_on: cfg.condition_on,
            seed,
        }
    }

    /// Equal apart from the rule.
    pub fn same_except_rule(&self, other: &ConfigSummary) -> bool {
        let strip = |c: &ConfigSummary| ConfigSummary {
            rule: String::new(),
            rule_scores: Vec::new(),
            ..c.clone()
        };
        strip(self) == strip(other)
    }
}

/// Estimates for voters of one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSurprise {
    pub class_index: usize,
    pub label: String,
    /// 1-based label of the standard three-candidate class table.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub table_label: Option<usize>,
    pub voters_observed: usize,
    /// `P(surprised | voter in this class)`; `None` if the class never
    /// appeared.
    pub surprise: Option<Estimate>,
    /// Per challenger `b`: `P(b beats the true winner)`.
    pub beat: Vec<Option<Estimate>>,
    /// `Σ_w max_{b≠w} P(w_T = w and b beats w)`. Under conditioning on a
    /// single winner this is the plain maximum over challengers.
    pub mpfb: Option<Estimate>,
    /// Per true winner, the challenger attaining the maximum.
    pub mpfb_challengers: Vec<Option<usize>>,
}

/// Monte Carlo results for one rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurpriseReport {
    pub rule: String,
    pub config: ConfigSummary,
    pub trials: usize,
    pub accepted_trials: usize,
    pub discard_rate: f64,
    pub winner_counts: Vec<usize>,
    pub panel_size: usize,
    pub classes: Vec<ClassSurprise>,
}

fn combined(parts: &[&RatioSums]) -> RatioSums {
    let mut total = *parts[0];
    for p in &parts[1..] {
        total.add_disjoint_numerator(p);
    }
    total
}

impl SurpriseReport {
    pub(crate) fn from_accumulator(
        config: ConfigSummary,
        cs: &ClassSystem,
        acc: Accumulator,
    ) -> Self {
        let m = cs.m();
        let classes = (0..cs.len())
            .map(|k| {
                let beat = (0..m)
                    .map(|b| {
                        combined(&(0..m).map(|w| &acc.beat[w][k][b]).collect::<Vec<_>>()).estimate()
                    })
                    .collect();
                let mut challengers = vec![None; m];
                let mut parts = Vec::with_capacity(m);
                for (w, slot) in challengers.iter_mut().enumerate() {
                    let row = &acc.beat[w][k];
                    let b = (0..m)
                        .filter(|&b| b != w)
                        .fold(None::<usize>, |best, b| match best {
                            Some(x) if row[x].x >= row[b].x => Some(x),
                            _ => Some(b),
                        })
                        .expect("m >= 2");
                    if acc.winner_counts[w] > 0 {
                        *slot = Some(b);
                    }
                    parts.push(&row[b]);
                }
                ClassSurprise {
                    class_index: k,
                    label: cs.label(k),
                    table_label: cs.table_label(k),
                    voters_observed: acc.voters_observed[k],
                    surprise: acc.surprise[k].estimate(),
                    beat,
                    mpfb: combined(&parts).estimate(),
                    mpfb_challengers: challengers,
                }
            })
            .collect();
        Self {
            rule: config.rule.clone(),
            trials: acc.trials,
            accepted_trials: acc.accepted,
            discard_rate: 1.0 - acc.accepted as f64 / acc.trials as f64,
            winner_counts: acc.winner_counts,
            panel_size: config.panel_size,
            config,
            classes,
        }
    }

    pub fn m(&self) -> usize {
        self.config.m
    }

    pub fn class(&self, k: usize) -> &ClassSurprise {
        &self.classes[k]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat CSV, one row per class and challenger.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        write_reports_csv(std::slice::from_ref(self), out)
    }

    pub fn sandwich(&self) -> Vec<SandwichCheck> {
        check_sandwich(self)
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    rule: &'a str,
    class: usize,
    label: &'a str,
    challenger: usize,
    beat: Option<f64>,
    beat_ci: Option<f64>,
    surprise: Option<f64>,
    surprise_ci: Option<f64>,
    mpfb: Option<f64>,
    mpfb_ci: Option<f64>,
    trials: usize,
    accepted_trials: usize,
}

/// CSV rows for several reports (e.g. one per rule) in one table.
pub fn write_reports_csv(reports: &[SurpriseReport], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        for c in &r.classes {
            for (b, beat) in c.beat.iter().enumerate() {
                w.serialize(CsvRow {
                    rule: &r.rule,
                    class: c.class_index,
                    label: &c.label,
                    challenger: b,
                    beat: beat.map(|e| e.value),
                    beat_ci: beat.map(|e| e.half_width),
                    surprise: c.surprise.map(|e| e.value),
                    surprise_ci: c.surprise.map(|e| e.half_width),
                    mpfb: c.mpfb.map(|e| e.value),
                    mpfb_ci: c.mpfb.map(|e| e.half_width),
                    trials: r.trials,
                    accepted_trials: r.accepted_trials,
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `MPFB ≤ surprise ≤ (m−1)·MPFB` for one class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichCheck {
    pub class_index: usize,
    pub mpfb: f64,
    pub surprise: f64,
    pub upper: f64,
    /// Three combined confidence half-widths.
    pub slack: f64,
    pub holds: bool,
}

/// Sandwich check for every class with data.
pub fn check_sandwich(report: &SurpriseReport) -> Vec<SandwichCheck> {
    let k = (report.m() - 1) as f64;
    report
        .classes
        .iter()
        .filter_map(|c| {
            let (s, l) = (c.surprise?, c.mpfb?);
            let slack = 3.0 * (s.half_width + k * l.half_width);
            let upper = k * l.value;
            Some(SandwichCheck {
                class_index: c.class_index,
                mpfb: l.value,
                surprise: s.value,
                upper,
                slack,
                holds: l.value <= s.value + slack && s.value <= upper + slack,
            })
        })
        .collect()
}

/// Empirical MPFB values of the three preset rules for one class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalOrdering {
    pub class_index: usize,
    pub values: Vec<(RuleKind, Estimate)>,
    /// Rules sorted by increasing MPFB.
    pub ascending: Vec<RuleKind>,
    /// Some neighbouring pair in `ascending` has overlapping intervals.
    pub inconclusive: bool,
    pub label: String,
}

impl EmpiricalOrdering {
    pub fn value(&self, rule: RuleKind) -> Estimate {
        self.values
            .iter()
            .find(|(r, _)| *r == rule)
            .expect("all three rules present")
            .1
    }
}

/// Orders the MPFB estimates of one class across plurality, Borda and veto
/// reports built from the same configuration.
pub fn mpfb_empirical_ordering(
    plu: &SurpriseReport,
    bor: &SurpriseReport,
    vet: &SurpriseReport,
    class: usize,
) -> Result<EmpiricalOrdering> {
    if !plu.config.same_except_rule(&bor.config) || !plu.config.same_except_rule(&vet.config) {
        return Err(Error::invalid(
            "reports",
            "configurations differ beyond the rule",
        ));
    }
    let mut values = Vec::with_capacity(3);
    for (kind, r) in [
        (RuleKind::Plurality, plu),
        (RuleKind::Borda, bor),
        (RuleKind::Veto, vet),
    ] {
        let c = r.classes.get(class).ok_or(Error::OutOfBounds {
            what: "class",
            index: class,
            len: r.classes.len(),
        })?;
        let e = c.mpfb.ok_or_else(|| {
            Error::Degenerate(format!("class {class} has no MPFB estimate under {kind}"))
        })?;
        values.push((kind, e));
    }
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)));
    let inconclusive = sorted.windows(2).any(|w| w[0].1.overlaps(&w[1].1));
    let label = sorted
        .iter()
        .map(|(r, _)| r.short())
        .collect::<Vec<_>>()
        .join(" ≤ ");
    Ok(EmpiricalOrdering {
        class_index: class,
        ascending: sorted.iter().map(|(r, _)| *r).collect(),
        values,
        inconclusive,
        label,
    })
}

/// Claimed relations `a ≤ b` that the estimates refute with separated
/// intervals (`a` entirely above `b`).
pub fn contradicts(
    ordering: &EmpiricalOrdering,
    claims: &[(RuleKind, RuleKind)],
) -> Vec<(RuleKind, RuleKind)> {
    claims
        .iter()
        .copied()
        .filter(|&(a, b)| ordering.value(a).lo() > ordering.value(b).hi())
        .collect()
}
