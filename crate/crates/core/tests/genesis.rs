use election_surprise::genesis::{neighbor_class_counts, sample_assignment, sample_election};
use election_surprise::model::{ClassDistribution, ConnectionMatrix};
use election_surprise::RngSeed;

#[test]
fn assignment_frequencies_track_eps() {
    let dist = ClassDistribution::new(vec![0.5, 0.5]).unwrap();
    for t in 0..10 {
        let a = sample_assignment(10_000, &dist, RngSeed::new(31, t)).unwrap();
        let f = a.counts[0] as f64 / 1e4;
        // 3σ of a fair binomial at n = 10⁴ is 0.015.
        assert!((0.485..=0.515).contains(&f), "trial {t}: {f}");
        assert_eq!(a.counts.iter().sum::<usize>(), 10_000);
    }
}

#[test]
fn uniform_sbm_degrees_match_erdos_renyi() {
    let (n, p) = (400, 0.05);
    let dist = ClassDistribution::uniform(2).unwrap();
    let pm = ConnectionMatrix::uniform(2, p).unwrap();
    let trials = 100;
    let mut total = 0.0;
    for t in 0..trials {
        let s = sample_election(n, &dist, &pm, RngSeed::new(77, t)).unwrap();
        total += 2.0 * s.edge_count() as f64 / n as f64;
    }
    let mean = total / trials as f64;
    let expected = (n - 1) as f64 * p;
    // Mean degree is 2|E|/n with |E| ~ Binomial(n(n−1)/2, p).
    let pairs = (n * (n - 1) / 2) as f64;
    let sd = 2.0 * (pairs * p * (1.0 - p)).sqrt() / n as f64 / (trials as f64).sqrt();
    assert!(
        (mean - expected).abs() <= 3.0 * sd,
        "{mean} vs {expected} (sd {sd})"
    );
}

#[test]
fn edge_count_is_within_three_sigma() {
    let n = 2000;
    let dist = ClassDistribution::new(vec![0.6, 0.4]).unwrap();
    let pm = ConnectionMatrix::new(vec![vec![0.05, 0.02], vec![0.02, 0.04]]).unwrap();
    let s = sample_election(n, &dist, &pm, RngSeed::new(3, 1)).unwrap();
    let c = s.counts();
    let mut mean = 0.0;
    let mut var = 0.0;
    for j in 0..2 {
        for k in j..2 {
            let pairs = if j == k {
                c[j] * (c[j] - 1) / 2
            } else {
                c[j] * c[k]
            } as f64;
            let q = pm.get(j, k);
            mean += pairs * q;
            var += pairs * q * (1.0 - q);
        }
    }
    let got = s.edge_count() as f64;
    assert!(
        (got - mean).abs() <= 3.0 * var.sqrt(),
        "{got} vs {mean} ± {}",
        var.sqrt()
    );
}

#[test]
fn handshake_per_block() {
    let dist = ClassDistribution::new(vec![0.3, 0.7]).unwrap();
    let pm = ConnectionMatrix::new(vec![vec![0.3, 0.1], vec![0.1, 0.2]]).unwrap();
    let s = sample_election(500, &dist, &pm, RngSeed::new(4, 4)).unwrap();
    let mut from_counts = [[0u64; 2]; 2];
    for v in 0..s.n() {
        let counts = neighbor_class_counts(&s, v).unwrap();
        for (k, &c) in counts.iter().enumerate() {
            from_counts[s.class_of(v)][k] += c as u64;
        }
    }
    let mut blocks = [[0u64; 2]; 2];
    for (u, v) in s.edges() {
        let (a, b) = (s.class_of(u), s.class_of(v));
        blocks[a.min(b)][a.max(b)] += 1;
    }
    assert_eq!(from_counts[0][0] / 2, blocks[0][0]);
    assert_eq!(from_counts[1][1] / 2, blocks[1][1]);
    assert_eq!(from_counts[0][1], blocks[0][1]);
    assert_eq!(from_counts[1][0], blocks[0][1]);
    assert_eq!(blocks.iter().flatten().sum::<u64>(), s.edge_count() as u64);
}

#[test]
fn samples_do_not_depend_on_thread_count() {
    let dist = ClassDistribution::new(vec![0.5, 0.5]).unwrap();
    let pm = ConnectionMatrix::new(vec![vec![0.2, 0.05], vec![0.05, 0.2]]).unwrap();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let s = sample_election(1500, &dist, &pm, RngSeed::new(99, 0)).unwrap();
            let mut buf = Vec::new();
            s.write_edge_list(&mut buf).unwrap();
            (s.sigma().to_vec(), buf)
        })
    };
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(5));
}
