//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p election-surprise-cli --test acceptance`.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Mutex;
use std::time::Instant;

use election_surprise::brexit::{ingest, run_sweep, CurvePoint, SweepConfig};
use election_surprise::geo::GeoDecayParams;
use election_surprise::model::{
    kt_distance, ClassDistribution, ConnectionMatrix, PreferenceOrder, RuleKind, ScoringRule,
};
use election_surprise::perception::TieBreak;
use election_surprise::surprise::{
    check_sandwich, contradicts, default_oracle_grid, echo_chamber_fixture,
    mpfb_empirical_ordering, run_oracle_check, run_trials, run_trials_for_rules,
    winner_frequencies, SimulationConfig, SurpriseReport,
};
use election_surprise::theory::{
    analytic_mpfb_ordering, claimed_relations, ReducedModel, WinnerRank,
};
use election_surprise::RngSeed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

/// Every report produced along the way, for the sandwich criterion.
static REPORTS: Mutex<Vec<SurpriseReport>> = Mutex::new(Vec::new());

fn keep(r: &SurpriseReport) {
    REPORTS.lock().unwrap().push(r.clone());
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn two(a: f64, b: f64, c: f64) -> ConnectionMatrix {
    ConnectionMatrix::new(vec![vec![a, b], vec![b, c]]).unwrap()
}

fn two_candidate(
    eps: f64,
    p: ConnectionMatrix,
    phat: ConnectionMatrix,
    trials: usize,
) -> SimulationConfig {
    SimulationConfig {
        n: 4000,
        dist: ClassDistribution::two_candidate(eps).unwrap(),
        p,
        phat,
        rule: ScoringRule::preset(RuleKind::Plurality, 2).unwrap(),
        trials,
        panel_size: 25,
        tiebreak: None,
        condition_on: Some(0),
    }
}

fn c1_oracle() -> Check {
    let rows = run_oracle_check(&default_oracle_grid(), 20_000, 3.0, RngSeed::new(1, 0))
        .map_err(|e| e.to_string())?;
    let cases: std::collections::BTreeSet<_> = rows.iter().map(|r| &r.case).collect();
    ensure(cases.len() == 12, || {
        format!("{} configurations", cases.len())
    })?;
    let worst = rows
        .iter()
        .map(|r| r.delta.abs() / r.half_width)
        .fold(0.0, f64::max);
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    ensure(failed.is_empty(), || format!("{failed:?}"))?;
    Ok(format!(
        "{} comparisons, worst |Δ| = {worst:.2} half-widths",
        rows.len()
    ))
}

fn c2_two_candidate_directions() -> Check {
    let eps = 0.05;
    let threshold = 2.0 * (0.5 - eps) / (0.5 + eps);
    let p = two(0.4, 0.2, 0.4);
    let mut out = Vec::new();
    for (i, factor) in [0.8, 1.25].into_iter().enumerate() {
        let phat = two(0.4, 0.2, 0.2 * threshold * factor);
        let r = run_trials(
            &two_candidate(eps, p.clone(), phat, 500),
            RngSeed::new(2, i as u64),
        )
        .map_err(|e| e.to_string())?;
        keep(&r);
        let s = r.classes[1].surprise.ok_or("class 1 unobserved")?;
        if factor < 1.0 {
            ensure(s.value >= 0.9, || format!("0.8× threshold: surprise {s:?}"))?;
        } else {
            ensure(s.value <= 0.1, || {
                format!("1.25× threshold: surprise {s:?}")
            })?;
        }
        out.push(format!("{factor}×: {:.4}", s.value));
    }
    Ok(out.join(", "))
}

fn c3_perfect_estimates() -> Check {
    let grid = [
        two(0.4, 0.2, 0.4),
        two(0.6, 0.3, 0.5),
        two(0.5, 0.2, 0.3),
        two(0.8, 0.5, 0.7),
    ];
    let mut worst: f64 = 0.0;
    for (i, p) in grid.into_iter().enumerate() {
        let r = run_trials(
            &two_candidate(0.05, p.clone(), p, 200),
            RngSeed::new(3, i as u64),
        )
        .map_err(|e| e.to_string())?;
        keep(&r);
        for c in &r.classes {
            let s = c.surprise.ok_or("class unobserved")?;
            ensure(s.value <= 0.02, || {
                format!("config {i} class {}: {s:?}", c.class_index)
            })?;
            worst = worst.max(s.value);
        }
    }
    Ok(format!("4 configs × 2 classes, max surprise {worst:.5}"))
}

fn c4_minority_never_wins() -> Check {
    let mut cfg = two_candidate(0.1, two(0.4, 0.2, 0.4), two(0.4, 0.2, 0.4), 2000);
    cfg.condition_on = None;
    let f = winner_frequencies(&cfg, RngSeed::new(4, 0)).map_err(|e| e.to_string())?;
    ensure(f.counts[1] == 0, || {
        format!("minority won {} of {}", f.counts[1], f.trials)
    })?;
    Ok(format!("winners {:?}", f.counts))
}

fn c5_three_candidate_orderings() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let winner = 1;
    let presets = RuleKind::ALL.map(|k| ScoringRule::preset(k, 3).unwrap());
    let mut inconclusive = 0;
    for i in 0..5 {
        let p_cross = rng.random_range(0.1..0.3);
        let p_same = p_cross + rng.random_range(0.1..0.3);
        let phat_cross = p_cross * rng.random_range(0.9..1.3);
        let phat_same = p_same * (phat_cross / p_cross) / rng.random_range(1.15..1.5);
        let model =
            ReducedModel::new(p_same, p_cross, phat_same, phat_cross).map_err(|e| e.to_string())?;
        ensure(model.strict_mee(), || {
            format!("config {i} is not strictly MEE: {model:?}")
        })?;
        let (p, phat) = model.matrices(6).map_err(|e| e.to_string())?;
        let cfg = SimulationConfig {
            n: 3000,
            dist: ClassDistribution::uniform(6).unwrap(),
            p,
            phat,
            rule: presets[0].clone(),
            trials: 1000,
            panel_size: 30,
            tiebreak: None,
            condition_on: Some(winner),
        };
        let reports =
            run_trials_for_rules(&cfg, &presets, RngSeed::new(5, i)).map_err(|e| e.to_string())?;
        reports.iter().for_each(keep);
        let cs = election_surprise::model::ClassSystem::build(3).unwrap();
        for k in 0..cs.len() {
            let a =
                analytic_mpfb_ordering(k, winner, &model, &cs, 3000).map_err(|e| e.to_string())?;
            ensure(a.claim_holds, || {
                format!("config {i} class {k}: analytic {}", a.label)
            })?;
            let rank = WinnerRank::of(&cs, k, winner);
            let e = mpfb_empirical_ordering(&reports[0], &reports[1], &reports[2], k)
                .map_err(|e| e.to_string())?;
            let bad = contradicts(&e, &claimed_relations(rank));
            ensure(bad.is_empty(), || {
                format!(
                    "config {i} class {k} ({rank:?}): empirical {} contradicts {bad:?}",
                    e.label
                )
            })?;
            inconclusive += usize::from(e.inconclusive);
        }
    }
    Ok(format!("5 configs × 6 classes, no contradictions ({inconclusive}/30 empirical orderings inconclusive)"))
}

fn c6_sandwich() -> Check {
    let reports = REPORTS.lock().unwrap();
    let mut checked = 0;
    for r in reports.iter() {
        for s in check_sandwich(r) {
            ensure(s.holds, || {
                format!("{:?} class {}: {s:?}", r.rule, s.class_index)
            })?;
            checked += 1;
        }
    }
    ensure(checked > 0, || "no reports collected".into())?;
    Ok(format!(
        "{checked} class checks over {} reports",
        reports.len()
    ))
}

fn c7_echo_chamber() -> Check {
    for n in [4, 8, 16] {
        let f = echo_chamber_fixture(n).map_err(|e| e.to_string())?;
        for declared in [0, 1] {
            let s = f.surprised_fraction(declared);
            ensure(s == 0.5, || format!("n={n} declared {declared}: {s}"))?;
        }
    }
    Ok("n ∈ {4, 8, 16}, both winners: 0.5".into())
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

fn desk(p: f64, q: f64, bias_grid: Vec<f64>, wg_grid: Vec<f64>) -> SweepConfig {
    SweepConfig {
        p,
        q,
        bias_grid,
        wg_grid,
        sample_size: 2000,
        attempts: 100,
        trials: 20,
        decay: GeoDecayParams::default(),
        tiebreak: TieBreak::default(),
    }
}

fn weakly_increasing(points: &[&CurvePoint]) -> bool {
    points.windows(2).all(|w| {
        w[1].surprised_minority_fraction + w[0].ci_halfwidth + w[1].ci_halfwidth
            >= w[0].surprised_minority_fraction
    })
}

fn c8_brexit_trends() -> Check {
    let dir = data_dir();
    let records = ingest(dir.join("votes.csv"), dir.join("locations.csv"))
        .map_err(|e| e.to_string())?
        .records;
    let seed = RngSeed::new(8, 0);
    let at = |pts: &[CurvePoint], bias: f64, w_g: f64| -> CurvePoint {
        pts.iter()
            .find(|c| c.bias == bias && c.w_g == w_g)
            .unwrap()
            .clone()
    };

    let mut zero = Vec::new();
    for (p, q) in [(0.4, 0.2), (0.6, 0.2), (0.8, 0.2)] {
        let pts = run_sweep(
            &records,
            &desk(p, q, vec![0.0, 0.05, 0.1], vec![0.0, 1.0]),
            seed,
        )
        .map_err(|e| e.to_string())?;
        zero.push(at(&pts, 0.0, 0.0));
        let end = at(&pts, 0.0, 1.0);
        ensure(end.surprised_minority_fraction == 0.0, || {
            format!("(b) p={p}: {end:?}")
        })?;
        let by_bias: Vec<CurvePoint> = [0.0, 0.05, 0.1].iter().map(|&b| at(&pts, b, 1.0)).collect();
        ensure(
            weakly_increasing(&by_bias.iter().collect::<Vec<_>>()),
            || format!("(c) p={p}: {by_bias:?}"),
        )?;
    }
    ensure(weakly_increasing(&zero.iter().collect::<Vec<_>>()), || {
        format!("(a): {zero:?}")
    })?;
    let a: Vec<String> = zero
        .iter()
        .map(|c| format!("{:.4}", c.surprised_minority_fraction))
        .collect();
    Ok(format!("w_G=0 by p/q: {}; w_G=1, bias 0: 0", a.join(" ≤ ")))
}

fn run_cli(dir: &Path, threads: &str, args: &[&str]) -> Result<Vec<(String, Vec<u8>)>, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_surprise"))
        .args(args)
        .args(["--seed", "99", "--threads", threads, "--out"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr))
    })?;
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn c9_determinism() -> Check {
    let votes = data_dir().join("votes.csv").display().to_string();
    let locations = data_dir().join("locations.csv").display().to_string();
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "simulate",
            "--eps",
            "0.05",
            "--p",
            "0.4,0.2;0.2,0.4",
            "--n",
            "500",
            "--trials",
            "300",
            "--rule",
            "all",
        ],
        vec![
            "simulate",
            "--p-same",
            "0.4",
            "--p-cross",
            "0.2",
            "--phat-same",
            "0.3",
            "--phat-cross",
            "0.2",
            "--n",
            "300",
            "--trials",
            "200",
            "--rule",
            "all",
        ],
        vec![
            "theory-check",
            "--eps",
            "0.05",
            "--p",
            "0.4,0.2;0.2,0.4",
            "--phat",
            "0.4,0.2;0.2,0.3",
            "--compare",
            "--trials",
            "100",
        ],
        vec![
            "mpfb-compare",
            "--p-same",
            "0.4",
            "--p-cross",
            "0.2",
            "--phat-same",
            "0.3",
            "--phat-cross",
            "0.2",
            "--n",
            "600",
            "--trials",
            "200",
        ],
        vec![
            "brexit",
            "--votes",
            &votes,
            "--locations",
            &locations,
            "--sample",
            "500",
            "--attempts",
            "50",
            "--trials",
            "6",
            "--wg-grid",
            "0,0.5,1",
        ],
        vec!["oracle-check", "--trials", "2000"],
    ];
    let mut compared = 0;
    for args in &commands {
        let base = tempfile::tempdir().map_err(|e| e.to_string())?;
        let one = run_cli(&base.path().join("t1"), "1", args)?;
        let four = run_cli(&base.path().join("t4"), "4", args)?;
        ensure(one == four, || {
            format!("{}: outputs differ between 1 and 4 threads", args[0])
        })?;
        for (name, bytes) in &one {
            if name == "simulate.json" {
                check_emitted_sandwich(bytes)?;
            }
        }
        compared += one.len();
    }
    Ok(format!(
        "{} commands, {compared} files byte-identical at 1 and 4 threads",
        commands.len()
    ))
}

/// Sandwich flags written by `simulate` must all hold.
fn check_emitted_sandwich(bytes: &[u8]) -> Result<(), String> {
    let reports: Value = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    for r in reports.as_array().ok_or("expected an array")? {
        for s in r["sandwich"].as_array().ok_or("missing sandwich")? {
            ensure(s["holds"] == true, || {
                format!("emitted sandwich fails: {s}")
            })?;
        }
    }
    Ok(())
}

fn bubble_swaps(a: &PreferenceOrder, b: &PreferenceOrder) -> u32 {
    let mut keys: Vec<usize> = b.ranking().iter().map(|&c| a.position(c)).collect();
    let mut swaps = 0;
    for end in (1..keys.len()).rev() {
        for i in 0..end {
            if keys[i] > keys[i + 1] {
                keys.swap(i, i + 1);
                swaps += 1;
            }
        }
    }
    swaps
}

fn c10_kt_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let m = rng.random_range(2..=5);
        let mut draw = || {
            let mut r: Vec<usize> = (0..m).collect();
            r.shuffle(&mut rng);
            PreferenceOrder::new(r).unwrap()
        };
        let (a, b, c) = (draw(), draw(), draw());
        let d = |x: &PreferenceOrder, y: &PreferenceOrder| kt_distance(x, y).unwrap();
        ensure(d(&a, &b) == d(&b, &a), || {
            format!("asymmetric: {a:?} {b:?}")
        })?;
        ensure(d(&a, &b) <= d(&a, &c) + d(&c, &b), || {
            format!("triangle: {a:?} {b:?} {c:?}")
        })?;
        ensure(d(&a, &b) == bubble_swaps(&a, &b), || {
            format!("inversion count: {a:?} {b:?}")
        })?;
        ensure((d(&a, &b) == 0) == (a == b), || {
            format!("identity: {a:?} {b:?}")
        })?;
    }
    Ok("1000 triples, m ∈ 2..=5".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", c1_oracle),
        (
            "two-candidate surprise in both directions",
            c2_two_candidate_directions,
        ),
        ("perfect estimates are not surprising", c3_perfect_estimates),
        ("minority candidate never wins", c4_minority_never_wins),
        (
            "three-candidate MPFB orderings",
            c5_three_candidate_orderings,
        ),
        ("MPFB sandwich", c6_sandwich),
        ("echo-chamber fixture", c7_echo_chamber),
        ("referendum desk-scale trends", c8_brexit_trends),
        ("determinism across thread counts", c9_determinism),
        ("Kendall-tau properties", c10_kt_properties),
    ];
    // The sandwich criterion reads reports from the later Monte Carlo runs.
    let order = [0, 1, 2, 3, 4, 6, 7, 8, 9, 5];
    let mut lines = vec![String::new(); criteria.len()];
    let mut failed = 0;
    let total = Instant::now();
    for i in order {
        let (name, check) = criteria[i];
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        lines[i] = match result {
            Ok(detail) => format!("PASS criterion {}: {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                format!("FAIL criterion {}: {name}: {why} [{secs:.1}s]", i + 1)
            }
        };
    }
    for line in &lines {
        println!("{line}");
    }
    println!(
        "acceptance: {} passed, {failed} failed [{:.1}s]",
        criteria.len() - failed,
        total.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
