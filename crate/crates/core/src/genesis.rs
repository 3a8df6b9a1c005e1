//! Sampling election realisations: class assignments, stochastic-block-model
//! graphs, and the geography-aware graphs used by the referendum pipeline.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geo::{GeoDecayParams, GeoVoter};
use crate::model::{ClassDistribution, ConnectionMatrix};
use crate::rng::{Purpose, RngSeed};
use crate::{Error, Result};

/// Class of every voter plus per-class totals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub sigma: Vec<usize>,
    pub counts: Vec<usize>,
}

/// One realisation: assignment and an undirected simple graph, stored as
/// sorted neighbour lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionSample {
    sigma: Vec<usize>,
    counts: Vec<usize>,
    adjacency: Vec<Vec<u32>>,
}

impl ElectionSample {
    /// Builds a sample from an assignment and an edge list. Duplicate edges
    /// are merged; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(
        sigma: Vec<usize>,
        num_classes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = sigma.len();
        let counts = count_classes(&sigma, num_classes)?;
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::OutOfBounds {
                    what: "vertex",
                    index: u.max(v),
                    len: n,
                });
            }
            if u == v {
                return Err(Error::invalid("edges", format!("self-loop at {u}")));
            }
            adjacency[u].push(v as u32);
            adjacency[v].push(u as u32);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            sigma,
            counts,
            adjacency,
        })
    }

    pub(crate) fn from_adjacency(assignment: Assignment, adjacency: Vec<Vec<u32>>) -> Self {
        Self {
            sigma: assignment.sigma,
            counts: assignment.counts,
            adjacency,
        }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn class_of(&self, v: usize) -> usize {
        self.sigma[v]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Writes the `u v` edge list, one edge per line.
    pub fn write_edge_list(&self, mut out: impl Write) -> Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    /// JSON sidecar carrying `n`, `sigma` and `counts`.
    pub fn sidecar(&self) -> SampleSidecar {
        SampleSidecar {
            n: self.n(),
            sigma: self.sigma.clone(),
            counts: self.counts.clone(),
        }
    }

    /// Reads back a dump produced by [`ElectionSample::write_edge_list`] and
    /// [`ElectionSample::sidecar`].
    pub fn read_dump(edges: impl BufRead, sidecar: &SampleSidecar) -> Result<Self> {
        if sidecar.sigma.len() != sidecar.n {
            return Err(Error::invalid("sidecar.sigma", "length differs from n"));
        }
        let mut list = Vec::new();
        for (lineno, line) in edges.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => list.push((u, v)),
                _ => {
                    return Err(Error::invalid(
                        format!("edges line {}", lineno + 1),
                        format!("expected `u v`, got `{line}`"),
                    ))
                }
            }
        }
        let sample = Self::from_edges(sidecar.sigma.clone(), sidecar.counts.len(), list)?;
        if sample.counts != sidecar.counts {
            return Err(Error::invalid("sidecar.counts", "inconsistent with sigma"));
        }
        Ok(sample)
    }
}

/// JSON companion of an edge-list dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub n: usize,
    pub sigma: Vec<usize>,
    pub counts: Vec<usize>,
}

fn count_classes(sigma: &[usize], num_classes: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0; num_classes];
    for &k in sigma {
        if k >= num_classes {
            return Err(Error::OutOfBounds {
                what: "class",
                index: k,
                len: num_classes,
            });
        }
        counts[k] += 1;
    }
    Ok(counts)
}

/// Draws each voter's class independently from `dist`.
pub fn sample_assignment(n: usize, dist: &ClassDistribution, seed: RngSeed) -> Result<Assignment> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one voter"));
    }
    let probs = dist.probs();
    let last_nonzero = probs
        .iter()
        .rposition(|&e| e > 0.0)
        .expect("distribution sums to 1");
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &e in probs {
        acc += e;
        cumulative.push(acc);
    }
    let mut rng = seed.rng(Purpose::Assignment);
    let mut counts = vec![0; probs.len()];
    let sigma = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let k = cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(last_nonzero);
            counts[k] += 1;
            k
        })
        .collect();
    Ok(Assignment { sigma, counts })
}

fn check_classes(sigma: &[usize], p: &ConnectionMatrix) -> Result<()> {
    if let Some(&k) = sigma.iter().find(|&&k| k >= p.size()) {
        return Err(Error::OutOfBounds {
            what: "class",
            index: k,
            len: p.size(),
        });
    }
    Ok(())
}

fn symmetric_adjacency(upper: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    let n = upper.len();
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    // Lower neighbours of u arrive before u's own upper list, in increasing
    // order, so every list ends up sorted.
    for (u, ups) in upper.into_iter().enumerate() {
        for &v in &ups {
            adjacency[v as usize].push(u as u32);
        }
        adjacency[u].extend(ups);
    }
    adjacency
}

/// Stochastic block model: `{u, v}` is an edge with probability
/// `p[σ(u)][σ(v)]`, independently per pair.
pub fn sample_sbm_graph(
    sigma: &[usize],
    p: &ConnectionMatrix,
    seed: RngSeed,
) -> Result<Vec<Vec<u32>>> {
    check_classes(sigma, p)?;
    let n = sigma.len();
    let stream = seed.pair_stream();
    let upper: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let row = p.row(sigma[u]);
            ((u + 1)..n)
                .filter(|&v| stream.edge(u, v, row[sigma[v]]))
                .map(|v| v as u32)
                .collect()
        })
        .collect();
    Ok(symmetric_adjacency(upper))
}

/// Assignment followed by an SBM graph, both keyed by `seed`.
pub fn sample_election(
    n: usize,
    dist: &ClassDistribution,
    p: &ConnectionMatrix,
    seed: RngSeed,
) -> Result<ElectionSample> {
    p.check_size("p", dist.len())?;
    let assignment = sample_assignment(n, dist, seed)?;
    let adjacency = sample_sbm_graph(&assignment.sigma, p, seed)?;
    Ok(ElectionSample::from_adjacency(assignment, adjacency))
}

/// Number of `v`'s neighbours in each class.
pub fn neighbor_class_counts(sample: &ElectionSample, v: usize) -> Result<Vec<u32>> {
    if v >= sample.n() {
        return Err(Error::OutOfBounds {
            what: "voter",
            index: v,
            len: sample.n(),
        });
    }
    let mut counts = vec![0u32; sample.num_classes()];
    for &u in sample.neighbors(v) {
        counts[sample.class_of(u as usize)] += 1;
    }
    Ok(counts)
}

/// Per-class neighbour counts of `v` in the graph [`sample_sbm_graph`] would
/// produce for the same `(sigma, p, seed)`, without building that graph.
/// Costs `O(n)` instead of `O(n²)`.
pub fn incident_class_counts(
    sigma: &[usize],
    p: &ConnectionMatrix,
    seed: RngSeed,
    v: usize,
) -> Vec<u32> {
    let stream = seed.pair_stream();
    let row = p.row(sigma[v]);
    let mut counts = vec![0u32; p.size()];
    for (u, &k) in sigma.iter().enumerate() {
        if u != v && stream.edge(u, v, row[k]) {
            counts[k] += 1;
        }
    }
    counts
}

/// Connection probability of a geo-augmented pair: the mean of a
/// distance-decayed term and a class term (`p` same class, `q` otherwise).
pub fn geo_edge_probability(
    a: &GeoVoter,
    b: &GeoVoter,
    p: f64,
    q: f64,
    decay: &GeoDecayParams,
) -> f64 {
    let p1 = decay.p1(a.distance_km(b), p);
    let p2 = if a.class_index == b.class_index { p } else { q };
    0.5 * (p1 + p2)
}

fn check_geo_params(p: f64, q: f64, decay: &GeoDecayParams) -> Result<()> {
    for (name, x) in [("p", p), ("q", q)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(name, format!("{x} outside [0, 1]")));
        }
    }
    if p < q {
        return Err(Error::invalid(
            "q",
            format!("cross-class probability {q} exceeds p = {p}"),
        ));
    }
    decay.validate()
}

/// Geo-augmented graph over all pairs.
pub fn sample_geo_graph(
    voters: &[GeoVoter],
    p: f64,
    q: f64,
    decay: &GeoDecayParams,
    seed: RngSeed,
) -> Result<Vec<Vec<u32>>> {
    check_geo_params(p, q, decay)?;
    let n = voters.len();
    let stream = seed.pair_stream();
    let upper: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|u| {
            ((u + 1)..n)
                .filter(|&v| {
                    stream.edge(
                        u,
                        v,
                        geo_edge_probability(&voters[u], &voters[v], p, q, decay),
                    )
                })
                .map(|v| v as u32)
                .collect()
        })
        .collect();
    Ok(symmetric_adjacency(upper))
}

/// Largest number of attempted pairs accepted by
/// [`sample_geo_graph_attempts`] (about 0.8 GB of pair storage).
pub const MAX_ATTEMPTED_PAIRS: usize = 100_000_000;

/// Geo-augmented graph built from connection attempts: every voter picks
/// `attempts` distinct partners uniformly at random; each attempted pair is
/// kept with its geo edge probability. A pair attempted from both ends is a
/// single Bernoulli draw, so the result is a simple graph.
pub fn sample_geo_graph_attempts(
    voters: &[GeoVoter],
    p: f64,
    q: f64,
    decay: &GeoDecayParams,
    attempts: usize,
    seed: RngSeed,
) -> Result<Vec<Vec<u32>>> {
    check_geo_params(p, q, decay)?;
    let n = voters.len();
    if n < 2 {
        return Ok(vec![Vec::new(); n]);
    }
    let attempts = attempts.min(n - 1);
    let total = n.saturating_mul(attempts);
    if total > MAX_ATTEMPTED_PAIRS {
        let suggested = (MAX_ATTEMPTED_PAIRS / attempts.max(1)).max(2);
        return Err(Error::Sizing(format!(
            "{n} voters x {attempts} attempts = {total} pairs exceeds {MAX_ATTEMPTED_PAIRS}; \
             try a sample of at most {suggested}"
        )));
    }
    let stream = seed.pair_stream();
    let mut pairs: Vec<(u32, u32)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|u| {
            let mut rng = seed.child(u as u64).rng(Purpose::Attempts);
            rand::seq::index::sample(&mut rng, n - 1, attempts)
                .into_iter()
                .map(move |i| {
                    let v = if i >= u { i + 1 } else { i };
                    (u.min(v) as u32, u.max(v) as u32)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    pairs.par_sort_unstable();
    pairs.dedup();
    let mut upper: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (a, b) in pairs {
        let (u, v) = (a as usize, b as usize);
        if stream.edge(
            u,
            v,
            geo_edge_probability(&voters[u], &voters[v], p, q, decay),
        ) {
            upper.entry(a).or_default().push(b);
        }
    }
    let mut lists = vec![Vec::new(); n];
    for (u, ups) in upper {
        lists[u as usize] = ups;
    }
    Ok(symmetric_adjacency(lists))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(e: &[f64]) -> ClassDistribution {
        ClassDistribution::new(e.to_vec()).unwrap()
    }

    #[test]
    fn degenerate_distribution() {
        let a = sample_assignment(5, &dist(&[1.0, 0.0]), RngSeed::new(1, 0)).unwrap();
        assert_eq!(a.counts, vec![5, 0]);
        let a = sample_assignment(5, &dist(&[0.0, 1.0]), RngSeed::new(1, 0)).unwrap();
        assert_eq!(a.counts, vec![0, 5]);
        assert!(sample_assignment(0, &dist(&[1.0, 0.0]), RngSeed::new(1, 0)).is_err());
    }

    #[test]
    fn assignment_is_deterministic() {
        let d = dist(&[0.2, 0.3, 0.1, 0.1, 0.2, 0.1]);
        let a = sample_assignment(100, &d, RngSeed::new(9, 4)).unwrap();
        let b = sample_assignment(100, &d, RngSeed::new(9, 4)).unwrap();
        let c = sample_assignment(100, &d, RngSeed::new(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.counts.iter().sum::<usize>(), 100);
        for k in 0..6 {
            assert_eq!(a.counts[k], a.sigma.iter().filter(|&&s| s == k).count());
        }
    }

    #[test]
    fn full_probability_gives_complete_graph() {
        let p = ConnectionMatrix::uniform(2, 1.0).unwrap();
        let s = sample_election(30, &dist(&[0.5, 0.5]), &p, RngSeed::new(3, 0)).unwrap();
        assert_eq!(s.edge_count(), 30 * 29 / 2);
        for v in 0..30 {
            assert_eq!(s.degree(v), 29);
            assert!(!s.has_edge(v, v));
        }
    }

    #[test]
    fn sbm_graph_is_deterministic_and_symmetric() {
        let p = ConnectionMatrix::new(vec![vec![0.3, 0.1], vec![0.1, 0.2]]).unwrap();
        let d = dist(&[0.5, 0.5]);
        let a = sample_election(200, &d, &p, RngSeed::new(5, 2)).unwrap();
        let b = sample_election(200, &d, &p, RngSeed::new(5, 2)).unwrap();
        assert_eq!(a, b);
        for u in 0..200 {
            assert!(a.neighbors(u).windows(2).all(|w| w[0] < w[1]));
            for &v in a.neighbors(u) {
                assert!(a.has_edge(v as usize, u));
            }
        }
    }

    #[test]
    fn incident_counts_agree_with_full_graph() {
        let p = ConnectionMatrix::new(vec![vec![0.5, 0.2], vec![0.2, 0.35]]).unwrap();
        let seed = RngSeed::new(11, 7);
        let s = sample_election(300, &dist(&[0.6, 0.4]), &p, seed).unwrap();
        for v in [0, 17, 150, 299] {
            assert_eq!(
                incident_class_counts(s.sigma(), &p, seed, v),
                neighbor_class_counts(&s, v).unwrap()
            );
        }
    }

    #[test]
    fn neighbor_counts_examples() {
        // isolated vertex
        let s = ElectionSample::from_edges(vec![0, 1, 0], 2, [(1, 2)]).unwrap();
        assert_eq!(neighbor_class_counts(&s, 0).unwrap(), vec![0, 0]);
        // star centre 0 with class-0 leaves
        let s = ElectionSample::from_edges(vec![1, 0, 0, 0], 2, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(neighbor_class_counts(&s, 0).unwrap(), vec![3, 0]);
        assert!(neighbor_class_counts(&s, 4).is_err());
    }

    #[test]
    fn complete_graph_counts_exclude_self() {
        let p = ConnectionMatrix::uniform(2, 1.0).unwrap();
        let s = sample_election(12, &dist(&[0.5, 0.5]), &p, RngSeed::new(2, 2)).unwrap();
        for v in 0..12 {
            let mut expect: Vec<u32> = s.counts().iter().map(|&c| c as u32).collect();
            expect[s.class_of(v)] -= 1;
            assert_eq!(neighbor_class_counts(&s, v).unwrap(), expect);
        }
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(ElectionSample::from_edges(vec![0, 1], 2, [(0, 0)]).is_err());
        assert!(ElectionSample::from_edges(vec![0, 1], 2, [(0, 2)]).is_err());
        assert!(ElectionSample::from_edges(vec![0, 2], 2, []).is_err());
    }

    #[test]
    fn dump_roundtrip() {
        let p = ConnectionMatrix::uniform(2, 0.3).unwrap();
        let s = sample_election(40, &dist(&[0.5, 0.5]), &p, RngSeed::new(1, 1)).unwrap();
        let mut buf = Vec::new();
        s.write_edge_list(&mut buf).unwrap();
        let side: SampleSidecar =
            serde_json::from_str(&serde_json::to_string(&s.sidecar()).unwrap()).unwrap();
        let back = ElectionSample::read_dump(buf.as_slice(), &side).unwrap();
        assert_eq!(back, s);
        assert!(ElectionSample::read_dump("0 1 2\n".as_bytes(), &side).is_err());
    }

    #[test]
    fn geo_probability_examples() {
        let decay = GeoDecayParams::new(Some(0.6), 100.0);
        let a = GeoVoter::new(0, 51.5, -0.1).unwrap();
        // d = λ along a meridian: Δlat = λ / R radians
        let dlat = (100.0 / crate::geo::EARTH_RADIUS_KM).to_degrees();
        let b = GeoVoter::new(1, 51.5 + dlat, -0.1).unwrap();
        let prob = geo_edge_probability(&a, &b, 0.8, 0.2, &decay);
        assert!((prob - (0.6 * (-1f64).exp() + 0.2) / 2.0).abs() < 1e-9);
        assert!((prob - 0.2104).abs() < 1e-4);

        let unit = GeoDecayParams::new(Some(1.0), 100.0);
        let c = GeoVoter::new(0, 51.5, -0.1).unwrap();
        assert_eq!(geo_edge_probability(&a, &c, 1.0, 0.2, &unit), 1.0);
        let far = GeoVoter::new(0, -51.5, 179.9).unwrap();
        assert!((geo_edge_probability(&a, &far, 0.8, 0.2, &unit) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn geo_graph_parameter_checks() {
        let v = vec![GeoVoter::new(0, 0.0, 0.0).unwrap(); 3];
        let d = GeoDecayParams::default();
        assert!(sample_geo_graph(&v, 0.2, 0.4, &d, RngSeed::new(0, 0)).is_err());
        assert!(sample_geo_graph(&v, 1.2, 0.4, &d, RngSeed::new(0, 0)).is_err());
        let bad = GeoDecayParams::new(None, 0.0);
        assert!(sample_geo_graph(&v, 0.4, 0.2, &bad, RngSeed::new(0, 0)).is_err());
    }

    #[test]
    fn attempts_graph_is_simple_and_bounded() {
        let voters: Vec<GeoVoter> = (0..300)
            .map(|i| GeoVoter::new(i % 2, 52.0, -1.5).unwrap())
            .collect();
        let d = GeoDecayParams::default();
        let g = sample_geo_graph_attempts(&voters, 1.0, 1.0, &d, 10, RngSeed::new(4, 0)).unwrap();
        let again =
            sample_geo_graph_attempts(&voters, 1.0, 1.0, &d, 10, RngSeed::new(4, 0)).unwrap();
        assert_eq!(g, again);
        // co-located voters with p = q = 1 keep every attempted pair
        for (u, list) in g.iter().enumerate() {
            assert!(list.len() >= 10, "voter {u} kept only {}", list.len());
            assert!(list.windows(2).all(|w| w[0] < w[1]));
            assert!(!list.contains(&(u as u32)));
        }
        let total: usize = g.iter().map(Vec::len).sum();
        assert!(total / 2 <= 300 * 10);
    }

    #[test]
    fn attempts_graph_sizing_error() {
        let voters = vec![GeoVoter::new(0, 0.0, 0.0).unwrap(); 2];
        // attempts clamp to n-1, so this is fine
        assert!(sample_geo_graph_attempts(
            &voters,
            0.5,
            0.5,
            &GeoDecayParams::default(),
            1_000_000,
            RngSeed::new(0, 0)
        )
        .is_ok());
    }
}
