use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RegionRecord;
use crate::genesis::{sample_geo_graph_attempts, MAX_ATTEMPTED_PAIRS};
use crate::geo::{GeoDecayParams, GeoVoter};
use crate::perception::TieBreak;
use crate::rng::{Purpose, RngSeed};
use crate::stats::mean_estimate;
use crate::{Error, Result};

/// Class index of leave voters.
pub const LEAVE: usize = 0;
/// Class index of remain voters.
pub const REMAIN: usize = 1;

/// Draws `sample_size` individual votes uniformly without replacement from
/// all votes cast and places each at its region's location.
pub fn sample_subelection(
    records: &[RegionRecord],
    sample_size: usize,
    seed: RngSeed,
) -> Result<Vec<GeoVoter>> {
    let mut offsets = Vec::with_capacity(records.len());
    let mut total: u64 = 0;
    for r in records {
        offsets.push(total);
        total += r.total();
    }
    if sample_size as u64 > total {
        return Err(Error::invalid(
            "sample",
            format!("{sample_size} exceeds the {total} votes available"),
        ));
    }
    let total = usize::try_from(total).map_err(|_| Error::invalid("records", "too many votes"))?;
    let mut rng = seed.rng(Purpose::Subelection);
    let mut picks = rand::seq::index::sample(&mut rng, total, sample_size).into_vec();
    picks.sort_unstable();
    picks
        .into_iter()
        .map(|i| {
            let i = i as u64;
            let r = offsets.partition_point(|&o| o <= i) - 1;
            let rec = &records[r];
            let class = if i - offsets[r] < rec.leave_count {
                LEAVE
            } else {
                REMAIN
            };
            GeoVoter::new(class, rec.lat, rec.lon)
        })
        .collect()
}

/// Adds zero-mean Gaussian noise with standard deviation `bias` to the first
/// share, redrawing until it lies in `[0, 1]`.
pub fn noisy_global_from(true_dist: [f64; 2], bias: f64, rng: &mut impl Rng) -> [f64; 2] {
    if bias == 0.0 {
        return true_dist;
    }
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let x = true_dist[0] + bias * z;
        if (0.0..=1.0).contains(&x) {
            return [x, 1.0 - x];
        }
    }
}

/// [`noisy_global_from`] with a fresh noise stream for `seed`.
pub fn noisy_global(true_dist: [f64; 2], bias: f64, seed: RngSeed) -> Result<[f64; 2]> {
    check_simplex("true_dist", true_dist)?;
    if !(bias >= 0.0 && bias.is_finite()) {
        return Err(Error::invalid(
            "bias",
            format!("{bias} must be finite and non-negative"),
        ));
    }
    Ok(noisy_global_from(
        true_dist,
        bias,
        &mut seed.rng(Purpose::Noise),
    ))
}

fn check_simplex(name: &str, d: [f64; 2]) -> Result<()> {
    if d.iter().any(|x| !(0.0..=1.0).contains(x)) || (d[0] + d[1] - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(name, format!("{d:?} is not a distribution")));
    }
    Ok(())
}

/// Weights on the private (neighbourhood) and global observations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationMix {
    pub w_i: f64,
    pub w_g: f64,
    /// Standard deviation of the noise on the global shares.
    pub bias: f64,
}

impl ObservationMix {
    pub fn new(w_i: f64, w_g: f64, bias: f64) -> Result<Self> {
        for (name, w) in [("w_I", w_i), ("w_G", w_g)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::invalid(name, format!("{w} outside [0, 1]")));
            }
        }
        if (w_i + w_g - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "w_G",
                format!("w_I + w_G = {} must be 1", w_i + w_g),
            ));
        }
        if !(bias >= 0.0 && bias.is_finite()) {
            return Err(Error::invalid(
                "bias",
                format!("{bias} must be finite and non-negative"),
            ));
        }
        Ok(Self { w_i, w_g, bias })
    }

    /// `w_I = 1 − w_G`.
    pub fn global(w_g: f64, bias: f64) -> Result<Self> {
        Self::new(1.0 - w_g, w_g, bias)
    }
}

/// Candidate with the larger mixed share; exact ties follow `tiebreak`.
pub fn perceive_mixed(
    neighbor_dist: [f64; 2],
    global_dist: [f64; 2],
    mix: &ObservationMix,
    tiebreak: &TieBreak,
) -> usize {
    let a = mix.w_i * neighbor_dist[0] + mix.w_g * global_dist[0];
    let b = mix.w_i * neighbor_dist[1] + mix.w_g * global_dist[1];
    if a > b {
        0
    } else if b > a {
        1
    } else if tiebreak.rank(0) <= tiebreak.rank(1) {
        0
    } else {
        1
    }
}

/// Parameters of a sweep over noise level and global weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Same-class connection probability.
    pub p: f64,
    /// Cross-class connection probability.
    pub q: f64,
    pub bias_grid: Vec<f64>,
    pub wg_grid: Vec<f64>,
    pub sample_size: usize,
    pub attempts: usize,
    pub trials: usize,
    #[serde(default)]
    pub decay: GeoDecayParams,
    #[serde(default)]
    pub tiebreak: TieBreak,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.q) {
            return Err(Error::invalid("p", "p and q must lie in [0, 1]"));
        }
        if self.p < self.q {
            return Err(Error::invalid(
                "q",
                format!("{} exceeds p = {}", self.q, self.p),
            ));
        }
        if self.bias_grid.is_empty() {
            return Err(Error::invalid("bias_grid", "empty"));
        }
        if self.wg_grid.is_empty() {
            return Err(Error::invalid("wg_grid", "empty"));
        }
        for &b in &self.bias_grid {
            ObservationMix::global(0.5, b)?;
        }
        for &w in &self.wg_grid {
            ObservationMix::global(w, 0.0)?;
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "need at least one trial"));
        }
        if self.sample_size < 2 {
            return Err(Error::invalid("sample", "need at least two voters"));
        }
        if self.attempts == 0 {
            return Err(Error::invalid(
                "attempts",
                "need at least one attempt per voter",
            ));
        }
        self.tiebreak.check_size(2)?;
        self.decay.validate()?;
        let pairs = self
            .sample_size
            .saturating_mul(self.attempts.min(self.sample_size - 1));
        if pairs > MAX_ATTEMPTED_PAIRS {
            return Err(Error::Sizing(format!(
                "sample {} x attempts {} exceeds {MAX_ATTEMPTED_PAIRS} attempted pairs; try --sample {}",
                self.sample_size,
                self.attempts,
                MAX_ATTEMPTED_PAIRS / self.attempts.max(1)
            )));
        }
        Ok(())
    }

    /// Grid points in output order: bias outer, `w_G` inner.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        self.bias_grid
            .iter()
            .flat_map(|&b| self.wg_grid.iter().map(move |&w| (b, w)))
            .collect()
    }
}

/// Surprised share of the losing side at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub q: f64,
    pub bias: f64,
    pub w_g: f64,
    pub surprised_minority_fraction: f64,
    pub ci_halfwidth: f64,
    pub trials: usize,
}

fn trial_fractions(records: &[RegionRecord], cfg: &SweepConfig, seed: RngSeed) -> Result<Vec<f64>> {
    let voters = sample_subelection(records, cfg.sample_size, seed)?;
    let graph = sample_geo_graph_attempts(&voters, cfg.p, cfg.q, &cfg.decay, cfg.attempts, seed)?;
    let n = voters.len() as f64;
    let leave = voters.iter().filter(|v| v.class_index == LEAVE).count() as f64;
    let truth = [leave / n, 1.0 - leave / n];
    let winner = perceive_mixed(
        truth,
        truth,
        &ObservationMix::global(1.0, 0.0)?,
        &cfg.tiebreak,
    );
    let minority: Vec<(usize, [f64; 2])> = voters
        .iter()
        .enumerate()
        .filter(|(_, v)| v.class_index != winner)
        .map(|(u, v)| {
            let mut own = [0.0; 2];
            own[v.class_index] += 1.0;
            for &w in &graph[u] {
                own[voters[w as usize].class_index] += 1.0;
            }
            let deg = own[0] + own[1];
            (u, [own[0] / deg, own[1] / deg])
        })
        .collect();
    if minority.is_empty() {
        return Ok(vec![0.0; cfg.bias_grid.len() * cfg.wg_grid.len()]);
    }
    let mut out = Vec::with_capacity(cfg.bias_grid.len() * cfg.wg_grid.len());
    for (bias, w_g) in cfg.grid() {
        let mix = ObservationMix::global(w_g, bias)?;
        // Same noise stream at every grid point.
        let mut rng = seed.rng(Purpose::Noise);
        let surprised = minority
            .iter()
            .filter(|(_, local)| {
                let global = noisy_global_from(truth, bias, &mut rng);
                perceive_mixed(*local, global, &mix, &cfg.tiebreak) != winner
            })
            .count();
        out.push(surprised as f64 / minority.len() as f64);
    }
    Ok(out)
}

/// Runs every `(bias, w_G)` point for `cfg.trials` trials. Each trial draws
/// one sub-election and graph, shared by all grid points, and each voter's
/// noisy global view comes from a stream that is also shared across grid
/// points.
pub fn run_sweep(
    records: &[RegionRecord],
    cfg: &SweepConfig,
    seed: RngSeed,
) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let per_trial: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial_fractions(records, cfg, seed.child(t as u64)))
        .collect::<Result<_>>()?;
    Ok(cfg
        .grid()
        .into_iter()
        .enumerate()
        .map(|(g, (bias, w_g))| {
            let samples: Vec<f64> = per_trial.iter().map(|row| row[g]).collect();
            let e = mean_estimate(&samples);
            CurvePoint {
                p: cfg.p,
                q: cfg.q,
                bias,
                w_g,
                surprised_minority_fraction: e.value,
                ci_halfwidth: e.half_width,
                trials: cfg.trials,
            }
        })
        .collect())
}

#[derive(Serialize)]
struct CurveRow {
    p: f64,
    q: f64,
    bias: f64,
    #[serde(rename = "w_G")]
    w_g: f64,
    surprised_fraction: f64,
    ci: f64,
    trials: usize,
}

/// `p,q,bias,w_G,surprised_fraction,ci,trials`.
pub fn write_curve_csv(points: &[CurvePoint], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in points {
        w.serialize(CurveRow {
            p: c.p,
            q: c.q,
            bias: c.bias,
            w_g: c.w_g,
            surprised_fraction: c.surprised_minority_fraction,
            ci: c.ci_halfwidth,
            trials: c.trials,
        })?;
    }
    w.flush()?;
    Ok(())
}
