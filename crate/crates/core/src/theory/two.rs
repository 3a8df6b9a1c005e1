//! Two candidates: when is a voter of each class surprised, and how sure is
//! the majority candidate to win.
//!
//! Class 0 prefers candidate 0 and has probability `1/2 + ε`; class 1
//! prefers candidate 1. A class-0 voter is surprised when
//! `p̂00/p̂01 > (p00/p01)·(1/2+ε)/(1/2−ε)`, a class-1 voter when
//! `p̂11/p̂10 < (p11/p10)·(1/2−ε)/(1/2+ε)`.

use serde::Serialize;

use crate::model::ConnectionMatrix;
use crate::{Error, Result};

/// Relative gap below which the two sides of a threshold count as equal.
const KNIFE_EDGE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Surprised,
    NotSurprised,
    /// The threshold holds with equality; no asymptotic verdict.
    KnifeEdge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    AtLeast,
    AtMost,
}

/// Finite-`n` bound on the probability of perceiving the minority candidate
/// as winner, given the majority candidate truly wins. Valid only for large
/// enough `n`; the theory gives no explicit threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbabilityBound {
    pub kind: BoundKind,
    pub value: f64,
}

/// `P(minority candidate wins) ≤ e^(−√n/2)` once `n ≥ 1/(16ε⁴)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WinnerBound {
    pub n: usize,
    pub eps: f64,
    pub value: f64,
    pub validity_threshold: f64,
    pub in_force: bool,
}

/// Threshold classification of one class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoCandidateVerdict {
    pub class_index: usize,
    pub n: usize,
    pub eps: f64,
    /// Own-class over cross-class estimated probability.
    pub ratio_lhs: f64,
    /// True ratio scaled by the class-size odds.
    pub ratio_rhs: f64,
    pub verdict: Verdict,
    /// `None` on a knife edge.
    pub surprised_whp: Option<bool>,
    /// `c = 2·(p̂jj·p̂jk/(p̂jj+p̂jk))²`; bounds decay like `e^(−c√n)`.
    pub rate_exponent_coeff: f64,
    pub bound: Option<ProbabilityBound>,
    pub winner_bound: WinnerBound,
}

fn check_margin(eps: f64, upper_inclusive: bool) -> Result<()> {
    let ok = eps > 0.0
        && if upper_inclusive {
            eps <= 0.5
        } else {
            eps < 0.5
        };
    if ok {
        Ok(())
    } else {
        let range = if upper_inclusive {
            "(0, 1/2]"
        } else {
            "(0, 1/2)"
        };
        Err(Error::invalid("eps", format!("{eps} outside {range}")))
    }
}

/// Bound on the minority candidate winning under plurality.
pub fn winner_concentration_bound(n: usize, eps: f64) -> Result<WinnerBound> {
    check_margin(eps, true)?;
    let threshold = 1.0 / (16.0 * eps.powi(4));
    Ok(WinnerBound {
        n,
        eps,
        value: (-(n as f64).sqrt() / 2.0).exp(),
        validity_threshold: threshold,
        in_force: n as f64 >= threshold,
    })
}

/// Classifies voters of `class_index` (0 = majority, 1 = minority) for the
/// class split `(1/2 + eps, 1/2 − eps)`.
pub fn classify_two_candidate(
    eps: f64,
    p: &ConnectionMatrix,
    phat: &ConnectionMatrix,
    class_index: usize,
    n: usize,
) -> Result<TwoCandidateVerdict> {
    check_margin(eps, false)?;
    p.check_size("p", 2)?;
    phat.check_size("phat", 2)?;
    if class_index > 1 {
        return Err(Error::OutOfBounds {
            what: "class",
            index: class_index,
            len: 2,
        });
    }
    let (j, k) = (class_index, 1 - class_index);
    let odds = (0.5 + eps) / (0.5 - eps);
    let lhs = phat.get(j, j) / phat.get(j, k);
    let true_ratio = p.get(j, j) / p.get(j, k);
    let rhs = if j == 0 {
        true_ratio * odds
    } else {
        true_ratio / odds
    };
    let verdict = if (lhs - rhs).abs() <= KNIFE_EDGE * lhs.max(rhs) {
        Verdict::KnifeEdge
    } else if (j == 0 && lhs > rhs) || (j == 1 && lhs < rhs) {
        Verdict::Surprised
    } else {
        Verdict::NotSurprised
    };
    let (hjj, hjk) = (phat.get(j, j), phat.get(j, k));
    let c = 2.0 * (hjj * hjk / (hjj + hjk)).powi(2);
    let tail = (-c * (n as f64).sqrt()).exp();
    let bound = match verdict {
        Verdict::Surprised => Some(ProbabilityBound {
            kind: BoundKind::AtLeast,
            value: (1.0 - 2.0 * tail).max(0.0),
        }),
        Verdict::NotSurprised => Some(ProbabilityBound {
            kind: BoundKind::AtMost,
            value: tail,
        }),
        Verdict::KnifeEdge => None,
    };
    Ok(TwoCandidateVerdict {
        class_index,
        n,
        eps,
        ratio_lhs: lhs,
        ratio_rhs: rhs,
        surprised_whp: match verdict {
            Verdict::KnifeEdge => None,
            v => Some(v == Verdict::Surprised),
        },
        verdict,
        rate_exponent_coeff: c,
        bound,
        winner_bound: winner_concentration_bound(n, eps)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: f64, b: f64, c: f64) -> ConnectionMatrix {
        ConnectionMatrix::new(vec![vec![a, b], vec![b, c]]).unwrap()
    }

    #[test]
    fn perfect_estimates_never_surprise() {
        let p = m(0.4, 0.2, 0.3);
        for eps in [0.01, 0.1, 0.3] {
            for class in 0..2 {
                let v = classify_two_candidate(eps, &p, &p, class, 1000).unwrap();
                assert_eq!(v.verdict, Verdict::NotSurprised, "eps={eps} class={class}");
                assert_eq!(v.bound.unwrap().kind, BoundKind::AtMost);
            }
        }
    }

    #[test]
    fn overestimated_own_class_probability_surprises_majority() {
        let p = m(0.3, 0.3, 0.3);
        let phat = m(0.4, 0.2, 0.3);
        let v = classify_two_candidate(0.1, &p, &phat, 0, 10_000).unwrap();
        assert!((v.ratio_lhs - 2.0).abs() < 1e-15);
        assert!((v.ratio_rhs - 1.5).abs() < 1e-15);
        assert_eq!(v.verdict, Verdict::Surprised);
        let c = 2.0 * (0.08f64 / 0.6).powi(2);
        assert!((v.rate_exponent_coeff - c).abs() < 1e-15);
        assert!((v.bound.unwrap().value - (1.0 - 2.0 * (-c * 100.0).exp())).abs() < 1e-15);
    }

    #[test]
    fn overwhelming_majority_cannot_surprise_minority() {
        // (p11/p10)·(1/2−ε)/(1/2+ε) < 1 while p̂11 > p̂10
        let p = m(0.4, 0.2, 0.4);
        let phat = m(0.4, 0.3, 0.35);
        let v = classify_two_candidate(0.4, &p, &phat, 1, 1000).unwrap();
        assert!(v.ratio_rhs < 1.0 && v.ratio_lhs > 1.0);
        assert_eq!(v.verdict, Verdict::NotSurprised);
    }

    #[test]
    fn knife_edge_has_no_verdict() {
        // class 1: lhs = rhs = (0.4/0.2)·(0.45/0.55)
        let p = m(0.4, 0.2, 0.4);
        let phat = m(0.4, 0.22, 0.4 * 0.22 / 0.2 * 0.45 / 0.55);
        let v = classify_two_candidate(0.05, &p, &phat, 1, 1000).unwrap();
        assert_eq!(v.verdict, Verdict::KnifeEdge);
        assert!(v.surprised_whp.is_none() && v.bound.is_none());
    }

    #[test]
    fn margin_validation() {
        let p = m(0.4, 0.2, 0.4);
        assert!(classify_two_candidate(0.0, &p, &p, 0, 10).is_err());
        assert!(classify_two_candidate(0.5, &p, &p, 0, 10).is_err());
        assert!(classify_two_candidate(0.1, &p, &p, 2, 10).is_err());
    }

    #[test]
    fn winner_bound_examples() {
        let b = winner_concentration_bound(10_000, 0.1).unwrap();
        assert!((b.value / 1.928_749_847_963_918e-22 - 1.0).abs() < 1e-12);
        assert!(b.in_force);
        assert!(winner_concentration_bound(1, 0.5).unwrap().in_force);
        let b = winner_concentration_bound(100, 0.1).unwrap();
        assert!(!b.in_force);
        assert!((b.validity_threshold - 625.0).abs() < 1e-9);
    }
}
