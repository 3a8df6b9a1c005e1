use std::fmt::Write as _;

use election_surprise::brexit::{ingest, run_sweep, write_curve_csv, SweepConfig};
use election_surprise::geo::GeoDecayParams;
use election_surprise::model::{
    ClassDistribution, ClassSystem, ConnectionMatrix, RuleKind, ScoringRule,
};
use election_surprise::perception::TieBreak;
use election_surprise::surprise::{
    check_sandwich, contradicts, default_oracle_grid, mpfb_empirical_ordering, run_oracle_check,
    run_trials, run_trials_for_rules, write_reports_csv, OracleCase, SimulationConfig,
    SurpriseReport,
};
use election_surprise::theory::{
    analytic_mpfb_ordering, claimed_relations, classify_two_candidate, winner_concentration_bound,
    AnalyticOrdering, ReducedModel, Verdict, WinnerRank,
};
use election_surprise::{Error, RngSeed};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{BrexitArgs, EpsSpec, Matrix, MpfbArgs, OracleArgs, SimulateArgs, TheoryArgs};
use crate::output::{CliError, Outcome};

type Result<T> = std::result::Result<T, CliError>;

fn required<T>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| CliError::validation(format!("invalid input `{field}`: required")))
}

fn factorial_root(len: usize) -> Option<usize> {
    (2..=6).find(|&m| (1..=m).product::<usize>() == len)
}

/// Model fields shared by the simulation commands.
struct ModelInput<'a> {
    m: Option<usize>,
    eps: Option<&'a EpsSpec>,
    p: Option<&'a Matrix>,
    phat: Option<&'a Matrix>,
    p_same: Option<f64>,
    p_cross: Option<f64>,
    phat_same: Option<f64>,
    phat_cross: Option<f64>,
}

struct ResolvedModel {
    cs: ClassSystem,
    dist: ClassDistribution,
    p: ConnectionMatrix,
    phat: ConnectionMatrix,
}

impl ModelInput<'_> {
    fn infer_m(&self, default: usize) -> Result<usize> {
        // The two-level shorthand exists for the three-candidate analysis.
        let default = if self.p.is_none() && self.p_same.is_some() {
            3
        } else {
            default
        };
        if let Some(m) = self.m {
            return Ok(m);
        }
        let from_len = |len: usize, field: &str| {
            factorial_root(len).ok_or_else(|| {
                CliError::validation(format!(
                    "invalid input `{field}`: {len} classes is not m! for any m"
                ))
            })
        };
        match (self.eps, self.p) {
            (Some(EpsSpec::Margin(_)), _) => Ok(2),
            (Some(EpsSpec::Dist(v)), _) => from_len(v.len(), "eps"),
            (None, Some(p)) => from_len(p.0.len(), "p"),
            (None, None) => Ok(default),
        }
    }

    fn resolve(&self, default_m: usize) -> Result<ResolvedModel> {
        let m = self.infer_m(default_m)?;
        let cs = ClassSystem::build(m)?;
        let size = cs.len();
        let dist = match self.eps {
            None => ClassDistribution::uniform(size)?,
            Some(EpsSpec::Margin(e)) => {
                if m != 2 {
                    return Err(CliError::validation(format!(
                        "invalid input `eps`: a single margin needs m = 2, got m = {m}"
                    )));
                }
                ClassDistribution::two_candidate(*e)?
            }
            Some(EpsSpec::Dist(v)) => ClassDistribution::new(v.clone())?,
        };
        if dist.len() != size {
            return Err(CliError::validation(format!(
                "invalid input `eps`: {} entries, expected m! = {size}",
                dist.len()
            )));
        }
        let p = match (self.p, self.p_same, self.p_cross) {
            (Some(p), None, None) => ConnectionMatrix::named("p", p.0.clone())?,
            (None, Some(s), Some(c)) => ConnectionMatrix::two_level(size, s, c)?,
            (None, None, None) => return required(None, "p"),
            _ => {
                return Err(CliError::validation(
                    "invalid input `p`: give either `p` or both `p_same` and `p_cross`".into(),
                ))
            }
        };
        p.check_size("p", size)?;
        let phat =
            match (self.phat, self.phat_same, self.phat_cross) {
                (Some(h), None, None) => ConnectionMatrix::named("phat", h.0.clone())?,
                (None, Some(s), Some(c)) => ConnectionMatrix::two_level(size, s, c)?,
                (None, None, None) => p.clone(),
                _ => return Err(CliError::validation(
                    "invalid input `phat`: give either `phat` or both `phat_same` and `phat_cross`"
                        .into(),
                )),
            };
        phat.check_size("phat", size)?;
        Ok(ResolvedModel { cs, dist, p, phat })
    }
}

fn parse_rules(spec: &str, m: usize) -> Result<Vec<ScoringRule>> {
    let kinds: Vec<RuleKind> = if spec.trim().eq_ignore_ascii_case("all") {
        RuleKind::ALL.to_vec()
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<RuleKind>()
                    .map_err(|e| CliError::validation(format!("invalid input `rule`: {e}")))
            })
            .collect::<Result<_>>()?
    };
    kinds
        .into_iter()
        .map(|k| Ok(ScoringRule::preset(k, m)?))
        .collect()
}

fn reports_json(reports: &[SurpriseReport]) -> Value {
    Value::Array(
        reports
            .iter()
            .map(|r| {
                let mut v = serde_json::to_value(r).expect("report serializes");
                v["sandwich"] = serde_json::to_value(check_sandwich(r)).expect("checks serialize");
                v
            })
            .collect(),
    )
}

fn csv_bytes(reports: &[SurpriseReport]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_reports_csv(reports, &mut buf)?;
    Ok(buf)
}

fn fmt_estimate(e: Option<election_surprise::stats::Estimate>) -> String {
    match e {
        Some(e) => format!("{:.4} ± {:.4}", e.value, e.half_width),
        None => "-".into(),
    }
}

fn report_table(reports: &[SurpriseReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(
            s,
            "{}: {} of {} trials accepted, winners {:?}",
            r.rule, r.accepted_trials, r.trials, r.winner_counts
        );
        for c in &r.classes {
            let _ = writeln!(
                s,
                "  class {} ({}): surprise {}  mpfb {}",
                c.class_index,
                c.label,
                fmt_estimate(c.surprise),
                fmt_estimate(c.mpfb)
            );
        }
    }
    s
}

#[derive(Serialize)]
struct SimulateEffective {
    n: usize,
    m: usize,
    eps: Vec<f64>,
    p: Vec<Vec<f64>>,
    phat: Vec<Vec<f64>>,
    rules: Vec<String>,
    trials: usize,
    panel_size: usize,
    condition_on: Option<usize>,
    tiebreak: Option<Vec<usize>>,
}

pub fn simulate(a: &SimulateArgs, seed: RngSeed) -> Result<Outcome> {
    let model = ModelInput {
        m: a.m,
        eps: a.eps.as_ref(),
        p: a.p.as_ref(),
        phat: a.phat.as_ref(),
        p_same: a.p_same,
        p_cross: a.p_cross,
        phat_same: a.phat_same,
        phat_cross: a.phat_cross,
    }
    .resolve(2)?;
    let m = model.cs.m();
    let rules = parse_rules(a.rule.as_deref().unwrap_or("plurality"), m)?;
    let tiebreak = a
        .tiebreak
        .as_ref()
        .map(|l| TieBreak::new(l.0.clone()))
        .transpose()?;
    let cfg = SimulationConfig {
        n: required(a.n, "n")?,
        dist: model.dist,
        p: model.p,
        phat: model.phat,
        rule: rules[0].clone(),
        trials: a.trials.unwrap_or(1000),
        panel_size: a.panel_size.unwrap_or(25),
        tiebreak,
        condition_on: a.condition_on,
    };
    cfg.validate()?;
    let effective = SimulateEffective {
        n: cfg.n,
        m,
        eps: cfg.dist.probs().to_vec(),
        p: cfg.p.rows().to_vec(),
        phat: cfg.phat.rows().to_vec(),
        rules: rules.iter().map(|r| r.name().to_string()).collect(),
        trials: cfg.trials,
        panel_size: cfg.panel_size,
        condition_on: cfg.condition_on,
        tiebreak: a.tiebreak.as_ref().map(|l| l.0.clone()),
    };
    let reports = run_trials_for_rules(&cfg, &rules, seed)?;
    Ok(Outcome::new("simulate", &effective)
        .file("simulate.json", pretty(&reports_json(&reports)))
        .file("simulate.csv", csv_bytes(&reports)?)
        .stdout(report_table(&reports)))
}

fn pretty(v: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s.into_bytes()
}

fn ordering_text(o: &AnalyticOrdering) -> String {
    let mut s = String::new();
    for (i, kind) in o.ascending.iter().enumerate() {
        if i > 0 {
            let prev = o.rule(o.ascending[i - 1]).mu;
            let cur = o.rule(*kind).mu;
            s.push_str(if (cur - prev).abs() <= 1e-12 * cur.abs().max(1.0) {
                " = "
            } else {
                " ≤ "
            });
        }
        s.push_str(kind.short());
    }
    s
}

fn rank_name(r: WinnerRank) -> &'static str {
    match r {
        WinnerRank::First => "winner first",
        WinnerRank::Second => "winner second",
        WinnerRank::Last => "winner last",
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Surprised => "surprised",
        Verdict::NotSurprised => "not surprised",
        Verdict::KnifeEdge => "knife edge",
    }
}

#[derive(Serialize)]
struct TheoryEffective {
    n: usize,
    m: usize,
    eps: Vec<f64>,
    p: Vec<Vec<f64>>,
    phat: Vec<Vec<f64>>,
    winner: Option<usize>,
    compare: bool,
    trials: Option<usize>,
    panel_size: Option<usize>,
}

pub fn theory_check(a: &TheoryArgs, seed: RngSeed) -> Result<Outcome> {
    let input = ModelInput {
        m: a.m,
        eps: a.eps.as_ref(),
        p: a.p.as_ref(),
        phat: a.phat.as_ref(),
        p_same: a.p_same,
        p_cross: a.p_cross,
        phat_same: a.phat_same,
        phat_cross: a.phat_cross,
    };
    let model = input.resolve(2)?;
    let compare = a.compare.unwrap_or(false);
    let (trials, panel) = (a.trials.unwrap_or(500), a.panel_size.unwrap_or(25));
    match model.cs.m() {
        2 => {
            let n = a.n.unwrap_or(4000);
            let eps = model.dist.get(0) - 0.5;
            if eps <= 0.0 {
                return Err(CliError::validation(
                    "invalid input `eps`: class 0 must be the strict majority".into(),
                ));
            }
            let verdicts = (0..2)
                .map(|k| classify_two_candidate(eps, &model.p, &model.phat, k, n))
                .collect::<election_surprise::Result<Vec<_>>>()?;
            let mut text = String::new();
            for v in &verdicts {
                let _ = writeln!(
                    text,
                    "class {}: {} (lhs {:.6}, rhs {:.6}, exponent coefficient {:.3e})",
                    v.class_index,
                    verdict_name(v.verdict),
                    v.ratio_lhs,
                    v.ratio_rhs,
                    v.rate_exponent_coeff
                );
            }
            let mut out = json!({
                "m": 2,
                "n": n,
                "eps": eps,
                "classes": verdicts,
                "winner_bound": winner_concentration_bound(n, eps)?,
            });
            if compare {
                let cfg = SimulationConfig {
                    n,
                    dist: model.dist.clone(),
                    p: model.p.clone(),
                    phat: model.phat.clone(),
                    rule: ScoringRule::preset(RuleKind::Plurality, 2)?,
                    trials,
                    panel_size: panel,
                    tiebreak: None,
                    condition_on: Some(0),
                };
                let report = run_trials(&cfg, seed)?;
                let mut rows = Vec::new();
                let mut all = true;
                for v in &verdicts {
                    let s = report.classes[v.class_index].surprise;
                    // Majority of voters surprised versus not.
                    let agrees = match (v.verdict, s) {
                        (Verdict::KnifeEdge, _) | (_, None) => None,
                        (Verdict::Surprised, Some(s)) => Some(s.value > 0.5),
                        (Verdict::NotSurprised, Some(s)) => Some(s.value < 0.5),
                    };
                    all &= agrees != Some(false);
                    let _ = writeln!(
                        text,
                        "class {} measured surprise {} -> agreement {}",
                        v.class_index,
                        fmt_estimate(s),
                        agrees.map_or("n/a".into(), |x| x.to_string())
                    );
                    rows.push(
                        json!({"class_index": v.class_index, "measured": s, "agreement": agrees}),
                    );
                }
                let _ = writeln!(text, "agreement = {all}");
                out["compare"] = json!({"trials": trials, "panel_size": panel, "classes": rows, "agreement": all});
            }
            let effective = TheoryEffective {
                n,
                m: 2,
                eps: model.dist.probs().to_vec(),
                p: model.p.rows().to_vec(),
                phat: model.phat.rows().to_vec(),
                winner: None,
                compare,
                trials: compare.then_some(trials),
                panel_size: compare.then_some(panel),
            };
            Ok(Outcome::new("theory-check", &effective)
                .file("theory.json", pretty(&out))
                .stdout(text))
        }
        3 => {
            let n = a.n.unwrap_or(3000);
            let winner = a.winner.unwrap_or(1);
            let (out, text) =
                three_candidate(&model, n, winner, compare.then_some((trials, panel)), seed)?;
            let effective = TheoryEffective {
                n,
                m: 3,
                eps: model.dist.probs().to_vec(),
                p: model.p.rows().to_vec(),
                phat: model.phat.rows().to_vec(),
                winner: Some(winner),
                compare,
                trials: compare.then_some(trials),
                panel_size: compare.then_some(panel),
            };
            let mut outcome =
                Outcome::new("theory-check", &effective).file("theory.json", pretty(&out.json));
            if let Some(reports) = out.reports {
                outcome = outcome.file("theory_compare.csv", csv_bytes(&reports)?);
            }
            Ok(outcome.stdout(text))
        }
        m => Err(CliError::validation(format!(
            "precondition violated: theory-check covers m = 2 and m = 3, got m = {m}"
        ))),
    }
}

struct ThreeOut {
    json: Value,
    reports: Option<Vec<SurpriseReport>>,
}

fn three_candidate(
    model: &ResolvedModel,
    n: usize,
    winner: usize,
    monte_carlo: Option<(usize, usize)>,
    seed: RngSeed,
) -> Result<(ThreeOut, String)> {
    if winner >= 3 {
        return Err(CliError::validation(format!(
            "invalid input `winner`: {winner} out of range for m = 3"
        )));
    }
    let analytic = if model.dist.is_uniform() {
        let reduced = ReducedModel::from_matrices(&model.p, &model.phat)?;
        Some(
            (0..model.cs.len())
                .map(|k| analytic_mpfb_ordering(k, winner, &reduced, &model.cs, n))
                .collect::<election_surprise::Result<Vec<_>>>()?,
        )
    } else if monte_carlo.is_none() {
        return Err(CliError::validation(
            "precondition violated: the analytic ordering assumes a uniform class distribution"
                .into(),
        ));
    } else {
        None
    };

    let mut text = String::new();
    let mut classes = Vec::new();
    let mut reports = None;
    let empirical = match monte_carlo {
        Some((trials, panel)) => {
            let cfg = SimulationConfig {
                n,
                dist: model.dist.clone(),
                p: model.p.clone(),
                phat: model.phat.clone(),
                rule: ScoringRule::preset(RuleKind::Plurality, 3)?,
                trials,
                panel_size: panel,
                tiebreak: None,
                condition_on: Some(winner),
            };
            let rules = RuleKind::ALL.map(|k| ScoringRule::preset(k, 3).expect("presets exist"));
            let r = run_trials_for_rules(&cfg, &rules, seed)?;
            let orderings = (0..model.cs.len())
                .map(|k| mpfb_empirical_ordering(&r[0], &r[1], &r[2], k))
                .collect::<election_surprise::Result<Vec<_>>>()?;
            reports = Some(r);
            Some(orderings)
        }
        None => None,
    };

    let mut agreement = true;
    for k in 0..model.cs.len() {
        let rank = WinnerRank::of(&model.cs, k, winner);
        let claims = claimed_relations(rank);
        let label = model.cs.label(k);
        let table = model
            .cs
            .table_label(k)
            .map_or(String::new(), |l| format!("P{l} "));
        let mut line = format!("class {table}({label}), {}:", rank_name(rank));
        let mut row = json!({
            "class_index": k,
            "label": label,
            "table_label": model.cs.table_label(k),
            "winner_rank": rank,
            "claimed": claims,
        });
        if let Some(an) = &analytic {
            let o = &an[k];
            let _ = write!(line, " analytic {}", ordering_text(o));
            row["analytic"] = serde_json::to_value(o).expect("ordering serializes");
        }
        if let Some(em) = &empirical {
            let o = &em[k];
            let bad = contradicts(o, &claims);
            agreement &= bad.is_empty();
            let _ = write!(
                line,
                "; empirical {}{}{}",
                o.label,
                if o.inconclusive {
                    " (inconclusive)"
                } else {
                    ""
                },
                if bad.is_empty() { "" } else { " CONTRADICTS" }
            );
            row["empirical"] = serde_json::to_value(o).expect("ordering serializes");
            row["contradictions"] = serde_json::to_value(&bad).expect("pairs serialize");
        }
        let _ = writeln!(text, "{line}");
        classes.push(row);
    }
    let mut out = json!({"m": 3, "n": n, "winner": winner, "classes": classes});
    if let Some(r) = &reports {
        let _ = writeln!(text, "agreement = {agreement}");
        out["agreement"] = json!(agreement);
        out["reports"] = reports_json(r);
    }
    Ok((ThreeOut { json: out, reports }, text))
}

#[derive(Serialize)]
struct MpfbEffective {
    n: usize,
    eps: Vec<f64>,
    p: Vec<Vec<f64>>,
    phat: Vec<Vec<f64>>,
    winner: usize,
    trials: usize,
    panel_size: usize,
}

pub fn mpfb_compare(a: &MpfbArgs, seed: RngSeed) -> Result<Outcome> {
    let model = ModelInput {
        m: Some(3),
        eps: a.eps.as_ref(),
        p: a.p.as_ref(),
        phat: a.phat.as_ref(),
        p_same: a.p_same,
        p_cross: a.p_cross,
        phat_same: a.phat_same,
        phat_cross: a.phat_cross,
    }
    .resolve(3)?;
    let n = a.n.unwrap_or(3000);
    let winner = a.winner.unwrap_or(1);
    let (trials, panel) = (a.trials.unwrap_or(1000), a.panel_size.unwrap_or(30));
    if trials == 0 || panel == 0 || n == 0 {
        return Err(CliError::validation(
            "invalid input `trials`: n, trials and panel_size must be positive".into(),
        ));
    }
    let (out, text) = three_candidate(&model, n, winner, Some((trials, panel)), seed)?;
    let effective = MpfbEffective {
        n,
        eps: model.dist.probs().to_vec(),
        p: model.p.rows().to_vec(),
        phat: model.phat.rows().to_vec(),
        winner,
        trials,
        panel_size: panel,
    };
    let reports = out.reports.expect("Monte Carlo requested");
    Ok(Outcome::new("mpfb-compare", &effective)
        .file("mpfb_compare.json", pretty(&out.json))
        .file("mpfb_compare.csv", csv_bytes(&reports)?)
        .stdout(text))
}

#[derive(Serialize)]
struct BrexitEffective {
    votes: String,
    locations: String,
    #[serde(flatten)]
    sweep: SweepConfig,
}

pub fn brexit(a: &BrexitArgs, seed: RngSeed) -> Result<Outcome> {
    let votes = required(a.votes.clone(), "votes")?;
    let locations = required(a.locations.clone(), "locations")?;
    let full = a.full_scale.unwrap_or(false);
    let p = a.p.unwrap_or(0.6);
    let cfg = SweepConfig {
        p,
        q: a.q.unwrap_or(0.2),
        bias_grid: a
            .bias_grid
            .as_ref()
            .map_or(vec![0.0, 0.05, 0.1], |l| l.0.clone()),
        wg_grid: a.wg_grid.as_ref().map_or_else(
            || (0..=10).map(|i| i as f64 / 10.0).collect(),
            |l| l.0.clone(),
        ),
        sample_size: a.sample.unwrap_or(if full { 10_000 } else { 2_000 }),
        attempts: a.attempts.unwrap_or(if full { 500 } else { 100 }),
        trials: a.trials.unwrap_or(20),
        decay: GeoDecayParams::new(a.p1_max, a.lambda_km.unwrap_or(100.0)),
        tiebreak: TieBreak::default(),
    };
    cfg.validate()?;
    let report = ingest(&votes, &locations)?;
    let points = run_sweep(&report.records, &cfg, seed)?;
    let mut csv = Vec::new();
    write_curve_csv(&points, &mut csv)?;
    let mut text = format!(
        "{} regions, {} imputed ({:.1}%), {} malformed rows skipped\n",
        report.coverage.regions,
        report.coverage.imputed,
        100.0 * report.coverage.imputed_fraction,
        report.coverage.malformed_rows
    );
    for c in &points {
        let _ = writeln!(
            text,
            "p={} q={} bias={} w_G={}: {:.4} ± {:.4}",
            c.p, c.q, c.bias, c.w_g, c.surprised_minority_fraction, c.ci_halfwidth
        );
    }
    let effective = BrexitEffective {
        votes: votes.display().to_string(),
        locations: locations.display().to_string(),
        sweep: cfg,
    };
    Ok(Outcome::new("brexit", &effective)
        .file("curve.csv", csv)
        .file("coverage.json", pretty(&report.coverage))
        .stdout(text))
}

#[derive(Serialize)]
struct OracleEffective {
    trials: usize,
    tolerance: f64,
    n: Option<usize>,
    cases: Vec<OracleCase>,
}

pub fn oracle_check(a: &OracleArgs, seed: RngSeed) -> Result<Outcome> {
    let trials = a.trials.unwrap_or(20_000);
    let tolerance = a.tolerance.unwrap_or(3.0);
    if trials == 0 {
        return Err(CliError::validation(
            "invalid input `trials`: need at least one trial".into(),
        ));
    }
    let grid = default_oracle_grid();
    let cases: Vec<OracleCase> = match a.n {
        None => grid,
        Some(n) if grid.iter().any(|c| c.n == n) => grid.into_iter().filter(|c| c.n == n).collect(),
        // Other sizes reuse the largest configurations; the enumeration
        // itself rejects sizes it cannot handle.
        Some(n) => {
            let largest = grid.iter().map(|c| c.n).max().expect("grid is non-empty");
            grid.into_iter()
                .filter(|c| c.n == largest)
                .map(|c| OracleCase {
                    name: c
                        .name
                        .replacen(&format!("n{largest}-"), &format!("n{n}-"), 1),
                    n,
                    ..c
                })
                .collect()
        }
    };
    let rows = run_oracle_check(&cases, trials, tolerance, seed)?;
    let csv = csv_writer_bytes(&rows)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<40} {:>5} {:>10} {:>10} {:>9} {:>7}  result",
        "case", "class", "exact", "estimate", "delta", "hw"
    );
    for r in &rows {
        let _ = writeln!(
            text,
            "{:<40} {:>5} {:>10.6} {:>10.6} {:>+9.5} {:>7.5}  {}",
            r.case,
            r.class_index,
            r.exact,
            r.estimate,
            r.delta,
            r.half_width,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    let effective = OracleEffective {
        trials,
        tolerance,
        n: a.n,
        cases,
    };
    let outcome = Outcome::new("oracle-check", &effective)
        .file("oracle.csv", csv)
        .stdout(text);
    if failed.is_empty() {
        Ok(outcome)
    } else {
        let detail = failed
            .iter()
            .map(|r| {
                format!(
                    "{} class {}: delta {:+.5} exceeds {tolerance} × {:.5}",
                    r.case, r.class_index, r.delta, r.half_width
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        Ok(outcome.fail(format!(
            "{} of {} oracle comparisons failed:\n{detail}",
            failed.len(),
            rows.len()
        )))
    }
}

fn csv_writer_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(Error::from)?;
    }
    w.into_inner().map_err(|e| CliError::runtime(e.to_string()))
}
