//! The Fejér kernel and the extremal constant `ρ(α) = inf_{x>0} x^{2−α}/sin²x`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::roots::brent;

/// `F_τ(x) = (sin(τx/2)/(τx/2))²`, with the series `1 − u²/3 + 2u⁴/45`
/// (`u = τx/2`) for `|τx| < 10⁻⁴`.
pub fn fejer(tau: f64, x: f64) -> f64 {
    let tx = tau * x;
    if tx.abs() < 1e-4 {
        let u2 = 0.25 * tx * tx;
        return 1.0 - u2 / 3.0 + 2.0 * u2 * u2 / 45.0;
    }
    let u = 0.5 * tx;
    let r = u.sin() / u;
    r * r
}

/// Minimizer of `x^{2−α}/sin²x` for `α ∈ (0, 2)`: the first positive root
/// of `(2−α)·sin x − 2x·cos x`, found on `(0, π/2]`.
pub fn rho_argmin(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(domain(format!("rho_argmin needs alpha in (0, 2), got {alpha}")));
    }
    // Dividing by x removes the trivial root at 0: h(0) = −α < 0 < h(π/2).
    let h = |x: f64| {
        if x == 0.0 {
            -alpha
        } else {
            (2.0 - alpha) * x.sin() / x - 2.0 * x.cos()
        }
    };
    brent(h, 0.0, FRAC_PI_2, 1e-15)
}

/// `ρ(α)` with its minimizer and the a-priori bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoResult {
    pub alpha: f64,
    pub rho: f64,
    /// `None` at `α = 0`, where the infimum is approached as `x → 0⁺`.
    pub argmin: Option<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl RhoResult {
    pub fn within_bounds(&self) -> bool {
        self.lower <= self.rho && self.rho <= self.upper * (1.0 + 1e-14)
    }
}

/// Upper bound `min((π/2)^{2−α}, 1/sin²1)`.
pub fn rho_upper_bound(alpha: f64) -> f64 {
    FRAC_PI_2.powf(2.0 - alpha).min(1.0 / 1f64.sin().powi(2))
}

pub fn rho(alpha: f64) -> Result<RhoResult> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(domain(format!("rho needs alpha in [0, 2], got {alpha}")));
    }
    let upper = rho_upper_bound(alpha);
    let (value, argmin) = if alpha == 0.0 {
        (1.0, None)
    } else if alpha == 2.0 {
        (1.0, Some(FRAC_PI_2))
    } else {
        let x = rho_argmin(alpha)?;
        (x.powf(2.0 - alpha) / x.sin().powi(2), Some(x))
    };
    Ok(RhoResult {
        alpha,
        rho: value,
        argmin,
        lower: 1.0,
        upper,
    })
}

/// `α = 2(1 − cot 1)`, where `ρ` peaks at `1/sin²1`.
pub fn rho_peak_alpha() -> f64 {
    2.0 * (1.0 - 1.0 / 1f64.tan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn fejer_basics() {
        assert_eq!(fejer(3.0, 0.0), 1.0);
        assert!(fejer(2.0, PI).abs() < 1e-30);
        let x: f64 = 0.3;
        assert!((fejer(5.0, x) - ((2.5 * x).sin() / (2.5 * x)).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn fejer_series_continuity() {
        for i in 1..200 {
            let tx = i as f64 * 5e-5;
            let v = fejer(1.0, tx);
            // Plus one rounding unit of the leading term.
            assert!((v - (1.0 - tx * tx / 12.0)).abs() <= tx.powi(4) + f64::EPSILON);
        }
        let below = fejer(1.0, 0.999_999e-4);
        let above = fejer(1.0, 1.000_001e-4);
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn rho_endpoints() {
        assert_eq!(rho(0.0).unwrap().rho, 1.0);
        assert_eq!(rho(2.0).unwrap().rho, 1.0);
        assert!(rho(-0.1).is_err());
        assert!(rho(2.1).is_err());
        assert!(rho_argmin(0.0).is_err());
        assert!(rho_argmin(2.0).is_err());
    }

    #[test]
    fn rho_peak() {
        let r = rho(rho_peak_alpha()).unwrap();
        assert!((r.rho - 1.0 / 1f64.sin().powi(2)).abs() < 1e-10);
        assert!((r.argmin.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn argmin_solves_tangent_equation() {
        let x = rho_argmin(1.0).unwrap();
        assert!((x.sin() - 2.0 * x * x.cos()).abs() < 1e-12);
        // Dense sign-change oracle for g on (0, π/2).
        let g = |x: f64| x.sin() - 2.0 * x * x.cos();
        let n = 100_000;
        let mut root = None;
        for i in 1..n {
            let (a, b) = (FRAC_PI_2 * i as f64 / n as f64, FRAC_PI_2 * (i + 1) as f64 / n as f64);
            if g(a) < 0.0 && g(b) >= 0.0 {
                root = Some(0.5 * (a + b));
                break;
            }
        }
        assert!((root.unwrap() - x).abs() < 2e-5);
    }

    #[test]
    fn rho_matches_grid_minimum() {
        for alpha in [0.25, 1.0, 1.75] {
            let n = 1_000_000;
            let mut best = f64::INFINITY;
            for i in 1..=n {
                let x = 4.0 * PI * i as f64 / n as f64;
                let v = x.powf(2.0 - alpha) / x.sin().powi(2);
                if v < best {
                    best = v;
                }
            }
            let r = rho(alpha).unwrap().rho;
            assert!(r <= best && (best - r) / r < 1e-8, "alpha {alpha}: {r} vs {best}");
        }
    }

    #[test]
    fn argmin_increases_with_alpha() {
        let xs: Vec<f64> = (1..200).map(|i| rho_argmin(i as f64 / 100.0).unwrap()).collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        assert!(xs.iter().all(|&x| x > 0.0 && x < FRAC_PI_2));
    }

    proptest! {
        #[test]
        fn rho_within_bounds(alpha in 0.0f64..=2.0) {
            let r = rho(alpha).unwrap();
            prop_assert!(r.within_bounds(), "{:?}", r);
        }

        #[test]
        fn fejer_bounded_by_envelope(tau in 0.01f64..1e4, x in -100.0f64..100.0) {
            let v = fejer(tau, x);
            prop_assert!((0.0..=1.0).contains(&v));
            if x != 0.0 {
                prop_assert!(v <= 4.0 / (tau * x).powi(2) * (1.0 + 1e-14));
            }
        }
    }
}
