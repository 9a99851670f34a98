//! A flow on a weighted union of circles, each translated at unit speed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gauss;
use crate::error::{domain, Error, Result};
use crate::kernels::fejer;
use crate::measures::{Atom, SpectralMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub k: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl Mode {
    pub fn coef(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// One circle of length `period` carrying `f(ω) = Σ c_k e^{2πikω/p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circle {
    pub weight: f64,
    pub period: f64,
    pub coeffs: Vec<Mode>,
}

impl Circle {
    pub fn eval(&self, omega: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|m| m.coef() * Complex64::from_polar(1.0, 2.0 * PI * m.k as f64 * omega / self.period))
            .sum()
    }

    fn max_k(&self) -> i64 {
        self.coeffs.iter().map(|m| m.k.abs()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Circle>", into = "Vec<Circle>")]
pub struct PeriodicFlowModel {
    circles: Vec<Circle>,
}

impl TryFrom<Vec<Circle>> for PeriodicFlowModel {
    type Error = Error;

    fn try_from(c: Vec<Circle>) -> Result<Self> {
        PeriodicFlowModel::new(c)
    }
}

impl From<PeriodicFlowModel> for Vec<Circle> {
    fn from(m: PeriodicFlowModel) -> Self {
        m.circles
    }
}

impl PeriodicFlowModel {
    pub fn new(circles: Vec<Circle>) -> Result<Self> {
        if circles.is_empty() {
            return Err(Error::InvalidModel("at least one circle is required".into()));
        }
        for (j, c) in circles.iter().enumerate() {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(Error::InvalidModel(format!("circle {j}: weight must be positive, got {}", c.weight)));
            }
            if !(c.period > 0.0 && c.period.is_finite()) {
                return Err(Error::InvalidModel(format!("circle {j}: period must be positive, got {}", c.period)));
            }
            let mut ks: Vec<i64> = c.coeffs.iter().map(|m| m.k).collect();
            ks.sort_unstable();
            if ks.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidModel(format!("circle {j}: repeated frequency index")));
            }
            if c.coeffs.iter().any(|m| !(m.re.is_finite() && m.im.is_finite())) {
                return Err(Error::InvalidModel(format!("circle {j}: coefficients must be finite")));
            }
        }
        let total: f64 = circles.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("weights must sum to 1, got {total}")));
        }
        Ok(PeriodicFlowModel { circles })
    }

    pub fn circles(&self) -> &[Circle] {
        &self.circles
    }

    /// `‖𝒫‖_∞`.
    pub fn max_period(&self) -> f64 {
        self.circles.iter().map(|c| c.period).fold(0.0, f64::max)
    }

    /// `γ = 2π/‖𝒫‖_∞`.
    pub fn gap(&self) -> f64 {
        2.0 * PI / self.max_period()
    }

    pub fn norm_sq(&self) -> f64 {
        self.circles
            .iter()
            .map(|c| c.weight * c.coeffs.iter().map(|m| m.coef().norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Atoms at `2πk/p_j` (`k ≠ 0`) with mass `w_j|c_{j,k}|²`.
    pub fn spectrum(&self) -> SpectralMeasure {
        let atoms = self
            .circles
            .iter()
            .flat_map(|c| {
                c.coeffs.iter().filter(|m| m.k != 0 && m.coef().norm_sqr() > 0.0).map(|m| Atom {
                    x: 2.0 * PI * m.k as f64 / c.period,
                    mass: c.weight * m.coef().norm_sqr(),
                })
            })
            .collect();
        SpectralMeasure::new(atoms, Vec::new(), Vec::new()).expect("atoms are finite and nonnegative")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicEval {
    pub avg_norm_sq: f64,
    pub bound_rem3: f64,
    pub bound_rem2: f64,
    pub spectrum: SpectralMeasure,
}

/// `‖P_{t,s}f − f*‖²` modewise, plus the bounded-period and spectral-gap
/// bounds.
pub fn periodic_eval(model: &PeriodicFlowModel, t: f64, s: f64) -> Result<PeriodicEval> {
    if !(t > s && t.is_finite() && s.is_finite()) {
        return Err(domain(format!("need s < t, got s = {s}, t = {t}")));
    }
    let tau = t - s;
    let avg: f64 = model
        .circles
        .iter()
        .map(|c| {
            c.weight
                * c.coeffs
                    .iter()
                    .filter(|m| m.k != 0)
                    .map(|m| m.coef().norm_sqr() * fejer(tau, 2.0 * PI * m.k as f64 / c.period))
                    .sum::<f64>()
        })
        .sum();
    let f2 = model.norm_sq();
    let gamma = model.gap();
    Ok(PeriodicEval {
        avg_norm_sq: avg,
        bound_rem3: (2.0 * model.max_period() * f2.sqrt() / tau).powi(2),
        bound_rem2: 4.0 * f2 / (tau * tau * gamma * gamma),
        spectrum: model.spectrum(),
    })
}

/// Points per circle for the trajectory oracle.
pub const ORACLE_POINTS: usize = 2048;

/// `‖P_{t,s}f − f*‖²` by integrating `f` along trajectories: `f*` is the
/// trapezoid mean over one period, whole periods of `f − f*` integrate to
/// zero, and the leftover stretch uses composite Gauss–Legendre.
pub fn trajectory_average_norm(model: &PeriodicFlowModel, t: f64, s: f64) -> Result<f64> {
    if !(t > s && t.is_finite() && s.is_finite()) {
        return Err(domain(format!("need s < t, got s = {s}, t = {t}")));
    }
    let tau = t - s;
    let parts: Vec<f64> = model
        .circles
        .par_iter()
        .map(|c| {
            let p = c.period;
            let n = ORACLE_POINTS;
            let h = p / n as f64;
            let mean: Complex64 = (0..n).map(|i| c.eval(i as f64 * h)).sum::<Complex64>() / n as f64;
            let rem = tau - (tau / p).floor() * p;
            let panels = ((rem / p) * 4.0 * (c.max_k().max(1) as f64)).ceil().max(1.0) as usize;
            let edges: Vec<f64> = (0..=panels).map(|i| s + rem * i as f64 / panels as f64).collect();
            let sq: f64 = (0..n)
                .map(|i| {
                    let omega = i as f64 * h;
                    let g = |u: f64| c.eval(omega + u) - mean;
                    let re = gauss::composite(&|u: f64| g(u).re, &edges).0;
                    let im = gauss::composite(&|u: f64| g(u).im, &edges).0;
                    (re * re + im * im) / (tau * tau)
                })
                .sum::<f64>()
                / n as f64;
            c.weight * sq
        })
        .collect();
    // Summed in order so the result does not depend on the thread count.
    Ok(parts.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(k: i64, re: f64, im: f64) -> Mode {
        Mode { k, re, im }
    }

    pub(crate) fn two_circles() -> PeriodicFlowModel {
        PeriodicFlowModel::new(vec![
            Circle {
                weight: 0.5,
                period: 1.0,
                coeffs: vec![mode(-3, 0.1, 0.2), mode(-1, 0.4, -0.3), mode(0, 1.0, 0.0), mode(2, -0.5, 0.25), mode(3, 0.05, 0.0)],
            },
            Circle {
                weight: 0.5,
                period: 3.0,
                coeffs: vec![mode(-2, 0.3, 0.1), mode(1, 0.7, 0.2), mode(0, -0.4, 0.0), mode(3, 0.0, -0.6)],
            },
        ])
        .unwrap()
    }

    #[test]
    fn single_mode() {
        let m = PeriodicFlowModel::new(vec![Circle {
            weight: 1.0,
            period: 1.0,
            coeffs: vec![mode(1, 1.0, 0.0)],
        }])
        .unwrap();
        for tau in [0.3, 1.7, 5.0] {
            let e = periodic_eval(&m, tau, 0.0).unwrap();
            assert!((e.avg_norm_sq - fejer(tau, 2.0 * PI)).abs() < 1e-15);
            let o = trajectory_average_norm(&m, tau, 0.0).unwrap();
            assert!((o - e.avg_norm_sq).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_data_has_no_decay() {
        let m = PeriodicFlowModel::new(vec![
            Circle { weight: 0.25, period: 2.0, coeffs: vec![mode(0, 3.0, 0.0)] },
            Circle { weight: 0.75, period: 0.5, coeffs: vec![mode(0, -1.0, 1.0)] },
        ])
        .unwrap();
        assert_eq!(periodic_eval(&m, 4.0, 1.0).unwrap().avg_norm_sq, 0.0);
        assert!(trajectory_average_norm(&m, 4.0, 1.0).unwrap() < 1e-28);
    }

    #[test]
    fn oracle_and_bounds_on_two_circles() {
        let m = two_circles();
        for tau in crate::quad::log_grid(1.0, 1e3, 25) {
            let e = periodic_eval(&m, tau + 0.7, 0.7).unwrap();
            let o = trajectory_average_norm(&m, tau + 0.7, 0.7).unwrap();
            assert!((o - e.avg_norm_sq).abs() <= 1e-8 * e.avg_norm_sq, "tau {tau}: {o} vs {}", e.avg_norm_sq);
            assert!(e.avg_norm_sq <= e.bound_rem3 && e.avg_norm_sq <= e.bound_rem2);
        }
        let gap = m.gap();
        assert!((gap - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!(m.spectrum().atoms().iter().all(|a| a.x.abs() >= gap * (1.0 - 1e-15)));
    }

    #[test]
    fn validation() {
        let c = |w: f64, p: f64| Circle { weight: w, period: p, coeffs: vec![mode(1, 1.0, 0.0)] };
        assert!(PeriodicFlowModel::new(vec![c(0.5, 1.0)]).is_err());
        assert!(PeriodicFlowModel::new(vec![c(1.0, 0.0)]).is_err());
        assert!(PeriodicFlowModel::new(Vec::new()).is_err());
        let dup = Circle { weight: 1.0, period: 1.0, coeffs: vec![mode(1, 1.0, 0.0), mode(1, 0.0, 1.0)] };
        assert!(PeriodicFlowModel::new(vec![dup]).is_err());
        let parsed: PeriodicFlowModel =
            serde_json::from_str(r#"[{"weight": 1, "period": 2, "coeffs": [{"k": 1, "re": 1, "im": 0}]}]"#).unwrap();
        assert_eq!(parsed.max_period(), 2.0);
    }

    #[test]
    fn s_translation_invariance() {
        let m = two_circles();
        let base = periodic_eval(&m, 7.3, 0.0).unwrap().avg_norm_sq;
        for s in [-4.0, 0.25, 19.0] {
            assert!((periodic_eval(&m, s + 7.3, s).unwrap().avg_norm_sq - base).abs() < 1e-15);
            let o = trajectory_average_norm(&m, s + 7.3, s).unwrap();
            assert!((o - base).abs() < 1e-10 * base);
        }
    }
}
