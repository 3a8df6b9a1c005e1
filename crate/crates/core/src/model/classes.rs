use serde::Serialize;

use super::order::{kt_distance, PreferenceOrder};
use crate::{Error, Result};

/// Largest supported candidate count; `6! = 720` classes.
pub const MAX_CANDIDATES: usize = 6;

/// All `m!` preference classes in lexicographic order of their rankings,
/// together with the pairwise Kendall-tau distance matrix.
///
/// For `m = 3` the lexicographic enumeration coincides with the conventional
/// labelling of the six classes used in the three-candidate analysis:
///
/// | index | ranking | label |
/// |-------|---------|-------|
/// | 0     | a ≻ b ≻ c | P1 |
/// | 1     | a ≻ c ≻ b | P2 |
/// | 2     | b ≻ a ≻ c | P3 |
/// | 3     | b ≻ c ≻ a | P4 |
/// | 4     | c ≻ a ≻ b | P5 |
/// | 5     | c ≻ b ≻ a | P6 |
///
/// so [`ClassSystem::table_label`] is the identity shifted by one. The lookup
/// is kept explicit so that nothing depends on that coincidence.
#[derive(Clone, Debug, Serialize)]
pub struct ClassSystem {
    m: usize,
    classes: Vec<PreferenceOrder>,
    kt: Vec<Vec<u32>>,
}

const TABLE_M3: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

impl ClassSystem {
    pub fn build(m: usize) -> Result<Self> {
        if !(2..=MAX_CANDIDATES).contains(&m) {
            return Err(Error::invalid(
                "m",
                format!("candidate count must be in 2..={MAX_CANDIDATES}, got {m}"),
            ));
        }
        let mut classes = Vec::new();
        let mut perm: Vec<usize> = (0..m).collect();
        loop {
            classes.push(PreferenceOrder::new(perm.clone())?);
            if !next_permutation(&mut perm) {
                break;
            }
        }
        let kt = classes
            .iter()
            .map(|a| {
                classes
                    .iter()
                    .map(|b| kt_distance(a, b).expect("same m"))
                    .collect()
            })
            .collect();
        Ok(Self { m, classes, kt })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of classes, `m!`.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[PreferenceOrder] {
        &self.classes
    }

    pub fn class(&self, k: usize) -> &PreferenceOrder {
        &self.classes[k]
    }

    pub fn kt(&self, j: usize, k: usize) -> u32 {
        self.kt[j][k]
    }

    pub fn kt_matrix(&self) -> &[Vec<u32>] {
        &self.kt
    }

    /// Position of `candidate` in class `k`'s ranking.
    pub fn position(&self, k: usize, candidate: usize) -> usize {
        self.classes[k].position(candidate)
    }

    pub fn index_of(&self, order: &PreferenceOrder) -> Option<usize> {
        self.classes.iter().position(|c| c == order)
    }

    /// One-based label `P1..P6` of class `k` in the three-candidate table,
    /// or `None` when `m != 3`.
    pub fn table_label(&self, k: usize) -> Option<usize> {
        if self.m != 3 {
            return None;
        }
        TABLE_M3
            .iter()
            .position(|row| row.as_slice() == self.classes[k].ranking())
            .map(|i| i + 1)
    }

    /// Inverse of [`ClassSystem::table_label`].
    pub fn from_table_label(&self, label: usize) -> Option<usize> {
        if self.m != 3 || !(1..=6).contains(&label) {
            return None;
        }
        let order = PreferenceOrder::new(TABLE_M3[label - 1].to_vec()).ok()?;
        self.index_of(&order)
    }

    pub fn label(&self, k: usize) -> String {
        self.classes[k].to_string()
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Probability `ε_k` that a voter belongs to class `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassDistribution {
    eps: Vec<f64>,
}

impl ClassDistribution {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::invalid("eps", "empty distribution"));
        }
        for (k, &e) in eps.iter().enumerate() {
            if !e.is_finite() || !(0.0..=1.0).contains(&e) {
                return Err(Error::invalid(
                    format!("eps[{k}]"),
                    format!("{e} outside [0, 1]"),
                ));
            }
        }
        let total: f64 = eps.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "eps",
                format!("entries sum to {total}, expected 1"),
            ));
        }
        Ok(Self { eps })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("eps", "empty distribution"));
        }
        Self::new(vec![1.0 / len as f64; len])
    }

    /// `(1/2 + margin, 1/2 − margin)` over the two classes of a two-candidate
    /// election.
    pub fn two_candidate(margin: f64) -> Result<Self> {
        if !(margin > -0.5 && margin < 0.5) {
            return Err(Error::invalid(
                "margin",
                format!("{margin} outside (-1/2, 1/2)"),
            ));
        }
        Self::new(vec![0.5 + margin, 0.5 - margin])
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.eps
    }

    pub fn get(&self, k: usize) -> f64 {
        self.eps[k]
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.eps.len() as f64;
        self.eps.iter().all(|&e| (e - u).abs() <= 1e-12)
    }
}
