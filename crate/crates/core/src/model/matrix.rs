use serde::Serialize;

use super::classes::ClassSystem;
use crate::{Error, Result};

/// Symmetric class-to-class connection probabilities.
///
/// Used both for the true stochastic-block-model matrix and for the voters'
/// estimate of it. Entries must lie in `(0, 1]`: the estimate is a divisor in
/// the population estimator, so zero is rejected at construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ConnectionMatrix {
    p: Vec<Vec<f64>>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl ConnectionMatrix {
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        Self::named("p", p)
    }

    /// Same as [`ConnectionMatrix::new`], with `name` used in error messages.
    pub fn named(name: &str, p: Vec<Vec<f64>>) -> Result<Self> {
        let size = p.len();
        if size == 0 {
            return Err(Error::invalid(name, "empty matrix"));
        }
        for (j, row) in p.iter().enumerate() {
            if row.len() != size {
                return Err(Error::invalid(
                    format!("{name}[{j}]"),
                    format!("row has {} entries, expected {size}", row.len()),
                ));
            }
            for (k, &x) in row.iter().enumerate() {
                if !x.is_finite() || x <= 0.0 || x > 1.0 {
                    return Err(Error::invalid(
                        format!("{name}[{j}][{k}]"),
                        format!("{x} not in (0, 1]"),
                    ));
                }
            }
        }
        for j in 0..size {
            for k in (j + 1)..size {
                if (p[j][k] - p[k][j]).abs() > SYMMETRY_TOL {
                    return Err(Error::invalid(
                        format!("{name}[{j}][{k}]"),
                        format!("{} differs from {name}[{k}][{j}] = {}", p[j][k], p[k][j]),
                    ));
                }
            }
        }
        Ok(Self { p })
    }

    pub fn uniform(size: usize, value: f64) -> Result<Self> {
        Self::new(vec![vec![value; size]; size])
    }

    /// `same` on the diagonal and `cross` everywhere else.
    pub fn two_level(size: usize, same: f64, cross: f64) -> Result<Self> {
        Self::new(
            (0..size)
                .map(|j| {
                    (0..size)
                        .map(|k| if j == k { same } else { cross })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn size(&self) -> usize {
        self.p.len()
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.p[j][k]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.p[j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.p
    }

    /// Returns `(same, cross)` when the matrix has one value on the diagonal
    /// and one value off it, `None` otherwise.
    pub fn as_two_level(&self) -> Option<(f64, f64)> {
        let same = self.p[0][0];
        let cross = if self.size() > 1 { self.p[0][1] } else { same };
        for j in 0..self.size() {
            for k in 0..self.size() {
                let expect = if j == k { same } else { cross };
                if self.p[j][k] != expect {
                    return None;
                }
            }
        }
        Some((same, cross))
    }

    /// Errors unless the matrix is `size`×`size`; `what` names it in the message.
    pub fn check_size(&self, what: &str, size: usize) -> Result<()> {
        if self.size() != size {
            return Err(Error::DimensionMismatch(format!(
                "{what} is {0}x{0}, expected {size}x{size}",
                self.size()
            )));
        }
        Ok(())
    }
}

/// Whether monotonicity must be strict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Monotonicity {
    #[default]
    Weak,
    Strict,
}

fn monotone_in_kt(
    cs: &ClassSystem,
    value: impl Fn(usize, usize) -> f64,
    mode: Monotonicity,
) -> bool {
    let c = cs.len();
    for j in 0..c {
        for k in 0..c {
            for l in 0..c {
                if cs.kt(j, k) < cs.kt(j, l) {
                    let (a, b) = (value(j, k), value(j, l));
                    let ok = match mode {
                        Monotonicity::Weak => a >= b,
                        Monotonicity::Strict => a > b,
                    };
                    if !ok {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Regularity: within every row, connection probability does not increase
/// with Kendall-tau distance between the classes.
pub fn is_regular(p: &ConnectionMatrix, cs: &ClassSystem, mode: Monotonicity) -> Result<bool> {
    p.check_size("p", cs.len())?;
    Ok(monotone_in_kt(cs, |j, k| p.get(j, k), mode))
}

/// Monotone estimation error: the ratio `p / p̂` does not increase with
/// Kendall-tau distance, i.e. estimates become relatively more generous
/// towards dissimilar classes.
pub fn satisfies_mee(
    p: &ConnectionMatrix,
    phat: &ConnectionMatrix,
    cs: &ClassSystem,
    mode: Monotonicity,
) -> Result<bool> {
    p.check_size("p", cs.len())?;
    phat.check_size("phat", cs.len())?;
    Ok(monotone_in_kt(
        cs,
        |j, k| p.get(j, k) / phat.get(j, k),
        mode,
    ))
}
