//! Standard normal distribution function.

use statrs::function::erf::erfc;

/// `Φ(x)`. Computed through `erfc` so the lower tail keeps relative precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(G ≥ 0)` for `G ~ Normal(mu, 1)`, which equals `Φ(mu)`.
pub fn normal_tail(mu: f64) -> f64 {
    std_normal_cdf(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // 30-digit values from mpmath
        let cases = [
            (0.0, 0.5),
            (-1.959964, 0.024_999_999_096_442_4),
            (3.0, 0.998_650_101_968_369_9),
            (1.0, 0.841_344_746_068_542_9),
            (-5.0, 2.866_515_718_791_939e-7),
            (-10.0, 7.619_853_024_160_526e-24),
        ];
        for (x, want) in cases {
            let got = normal_tail(x);
            assert!((got - want).abs() < 1e-10, "Φ({x}) = {got}, want {want}");
            assert!(
                (got - want).abs() <= 1e-9 * want,
                "relative error at {x}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn symmetric_and_monotone() {
        let mut prev = 0.0;
        for i in -800..=800 {
            let x = i as f64 / 100.0;
            let v = normal_tail(x);
            assert!((v + normal_tail(-x) - 1.0).abs() < 1e-7);
            assert!(v >= prev, "not monotone at {x}");
            prev = v;
        }
    }
}
