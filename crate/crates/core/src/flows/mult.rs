//! The multiplication flow `U^t f(x) = e^{ixt} f(x)` on `L₂(ℝ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gauss;
use crate::error::{domain, Error, Result};
use crate::kernels::{rho, rho_argmin};
use crate::measures::{Segment, SpectralMeasure};
use crate::quad::{QuadResult, QuadStatus};

/// `c·|x|^{β/2}` on `(a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub c_re: f64,
    #[serde(default)]
    pub c_im: f64,
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub beta: f64,
}

impl PowerTerm {
    pub fn new(c: Complex64, a: f64, b: f64, beta: f64) -> Self {
        PowerTerm {
            c_re: c.re,
            c_im: c.im,
            a,
            b,
            beta,
        }
    }

    pub fn coef(&self) -> Complex64 {
        Complex64::new(self.c_re, self.c_im)
    }

    /// `∫_a^b x^{β+shift} dx`.
    fn power_integral(&self, shift: f64) -> f64 {
        let m = self.beta + shift + 1.0;
        if m == 0.0 {
            (self.b / self.a).ln()
        } else {
            (self.b.powf(m) - self.a.powf(m)) / m
        }
    }
}

/// `f(x) = Σ cᵢ·|x|^{βᵢ/2}·χ_{(aᵢ, bᵢ]}(x)` with `0 < aᵢ < bᵢ` and disjoint
/// pieces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PowerTerm>", into = "Vec<PowerTerm>")]
pub struct PiecewisePowerFunction {
    terms: Vec<PowerTerm>,
}

impl TryFrom<Vec<PowerTerm>> for PiecewisePowerFunction {
    type Error = Error;

    fn try_from(terms: Vec<PowerTerm>) -> Result<Self> {
        PiecewisePowerFunction::new(terms)
    }
}

impl From<PiecewisePowerFunction> for Vec<PowerTerm> {
    fn from(f: PiecewisePowerFunction) -> Self {
        f.terms
    }
}

impl PiecewisePowerFunction {
    pub fn new(mut terms: Vec<PowerTerm>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if !(t.a > 0.0 && t.b > t.a && t.b.is_finite()) {
                return Err(Error::InvalidModel(format!("term {i}: need 0 < a < b < inf, got ({}, {}]", t.a, t.b)));
            }
            if !(t.beta >= 0.0 && t.beta.is_finite()) {
                return Err(Error::InvalidModel(format!("term {i}: beta must be >= 0, got {}", t.beta)));
            }
            if !(t.c_re.is_finite() && t.c_im.is_finite()) {
                return Err(Error::InvalidModel(format!("term {i}: coefficient must be finite")));
            }
        }
        terms.sort_by(|x, y| x.a.total_cmp(&y.a));
        if let Some(w) = terms.windows(2).find(|w| w[1].a < w[0].b) {
            return Err(Error::InvalidModel(format!(
                "terms ({}, {}] and ({}, {}] overlap",
                w[0].a, w[0].b, w[1].a, w[1].b
            )));
        }
        Ok(PiecewisePowerFunction { terms })
    }

    pub fn zero() -> Self {
        PiecewisePowerFunction::default()
    }

    /// `|x|^{α/2}·χ_{(a, b]}`.
    pub fn window(a: f64, b: f64, alpha: f64) -> Result<Self> {
        Self::new(vec![PowerTerm::new(Complex64::new(1.0, 0.0), a, b, alpha)])
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms
            .iter()
            .find(|t| x > t.a && x <= t.b)
            .map(|t| t.coef() * x.abs().powf(0.5 * t.beta))
            .unwrap_or_default()
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.iter().map(|t| t.coef().norm_sqr() * t.power_integral(0.0)).sum()
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        PiecewisePowerFunction {
            terms: self
                .terms
                .iter()
                .map(|t| PowerTerm::new(t.coef() * k, t.a, t.b, t.beta))
                .collect(),
        }
    }

    /// `f + g`; overlapping pieces must share the exponent so that the sum
    /// stays in the family.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut cuts: Vec<f64> = self.terms.iter().chain(&other.terms).flat_map(|t| [t.a, t.b]).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let find = |f: &Self, x: f64| f.terms.iter().find(|t| x > t.a && x <= t.b).copied();
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let (p, q) = (find(self, mid), find(other, mid));
            let term = match (p, q) {
                (None, None) => continue,
                (Some(p), None) => PowerTerm { a: w[0], b: w[1], ..p },
                (None, Some(q)) => PowerTerm { a: w[0], b: w[1], ..q },
                (Some(p), Some(q)) => {
                    if p.beta != q.beta {
                        return Err(domain(format!(
                            "overlap on ({}, {}] mixes exponents {} and {}",
                            w[0], w[1], p.beta, q.beta
                        )));
                    }
                    PowerTerm::new(p.coef() + q.coef(), w[0], w[1], p.beta)
                }
            };
            out.push(term);
        }
        Self::new(out)
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((self.terms.first()?.a, self.terms.last()?.b))
    }
}

/// `σ_f` has density `|f|²`.
pub fn mult_spectral(f: &PiecewisePowerFunction) -> SpectralMeasure {
    let segs = f
        .terms
        .iter()
        .filter(|t| t.coef().norm_sqr() > 0.0)
        .map(|t| Segment::power(t.a, t.b, t.coef().norm_sqr(), t.beta))
        .collect();
    SpectralMeasure::new(Vec::new(), segs, Vec::new()).expect("disjoint pieces give a valid measure")
}

/// One piece of the cross density `f·ḡ = coef·x^exponent` on `(a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTerm {
    pub a: f64,
    pub b: f64,
    pub coef: Complex64,
    pub exponent: f64,
}

impl CrossTerm {
    pub fn integral(&self) -> Complex64 {
        let m = self.exponent + 1.0;
        let w = if m == 0.0 {
            (self.b / self.a).ln()
        } else {
            (self.b.powf(m) - self.a.powf(m)) / m
        };
        self.coef * w
    }
}

/// Density of `σ_{f,g}` on the common support.
pub fn mult_cross_spectral(f: &PiecewisePowerFunction, g: &PiecewisePowerFunction) -> Vec<CrossTerm> {
    let mut out = Vec::new();
    for p in &f.terms {
        for q in &g.terms {
            let (a, b) = (p.a.max(q.a), p.b.min(q.b));
            if a < b {
                out.push(CrossTerm {
                    a,
                    b,
                    coef: p.coef() * q.coef().conj(),
                    exponent: 0.5 * (p.beta + q.beta),
                });
            }
        }
    }
    out
}

/// Panel edges on `[a, b]` at the zeros `2πk/τ` of the multiplier, with at
/// least `min_panels` panels.
fn multiplier_edges(a: f64, b: f64, tau: f64, min_panels: usize) -> Vec<f64> {
    let step = 2.0 * PI / tau;
    let mut e = vec![a];
    let k0 = (a / step).floor() as i64 + 1;
    let k1 = (b / step).ceil() as i64;
    for k in k0..k1 {
        let z = k as f64 * step;
        if z > a && z < b {
            e.push(z);
        }
    }
    e.push(b);
    if e.len() - 1 < min_panels {
        let n = min_panels;
        e = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        e[n] = b;
    }
    e
}

/// `‖P_{t,s}f‖²` from the explicit multiplier `(e^{itx} − e^{isx})/(ix(t−s))`,
/// integrated with composite Gauss–Legendre between its zeros.
pub fn mult_average_norm(f: &PiecewisePowerFunction, t: f64, s: f64) -> Result<QuadResult> {
    if !(t > s) || !t.is_finite() || !s.is_finite() {
        return Err(domain(format!("need s < t, got s = {s}, t = {t}")));
    }
    let tau = t - s;
    let mult = |x: f64| {
        let num = Complex64::new(0.0, t * x).exp() - Complex64::new(0.0, s * x).exp();
        (num / Complex64::new(0.0, x * tau)).norm_sqr()
    };
    let (mut value, mut err) = (0.0, 0.0);
    for term in &f.terms {
        let c2 = term.coef().norm_sqr();
        if c2 == 0.0 {
            continue;
        }
        let g = |x: f64| mult(x) * c2 * x.powf(term.beta);
        let edges = multiplier_edges(term.a, term.b, tau, 8);
        let (v, e) = gauss::composite(&g, &edges);
        value += v;
        err += e;
    }
    Ok(QuadResult {
        value,
        abs_err: err + 1e-15 * value,
        status: QuadStatus::Converged,
        trace: Vec::new(),
    })
}

/// Supremum of `‖∫₀ᵗ U^τ f dτ‖²` over `t`, with the bracket that certifies it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YNorm {
    pub value: f64,
    pub argmax: f64,
    /// Largest value the function can take beyond the searched range.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelNorms {
    pub x_norm_sq: f64,
    pub y_norm_sq: f64,
    pub y_tilde_sq: f64,
}

/// `∫ |f|²·|x|^{−α} dx`; every piece must carry `β = α`.
pub fn x_norm_sq(f: &PiecewisePowerFunction, alpha: f64) -> Result<f64> {
    if let Some(t) = f.terms.iter().find(|t| t.beta != alpha) {
        return Err(domain(format!("x-norm needs beta = alpha = {alpha}, found beta = {}", t.beta)));
    }
    Ok(f.terms.iter().map(|t| t.coef().norm_sqr() * (t.b - t.a)).sum())
}

/// `∫ x⁻²|f|² dx`.
pub fn y_tilde_sq(f: &PiecewisePowerFunction) -> f64 {
    f.terms.iter().map(|t| t.coef().norm_sqr() * t.power_integral(-2.0)).sum()
}

/// `g(t) = ∫ 4 sin²(tx/2)·x⁻²·|f|² dx`.
fn y_profile(f: &PiecewisePowerFunction, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    f.terms
        .iter()
        .map(|term| {
            let c2 = term.coef().norm_sqr();
            let g = |x: f64| 4.0 * (0.5 * t * x).sin().powi(2) * c2 * x.powf(term.beta - 2.0);
            gauss::composite(&g, &multiplier_edges(term.a, term.b, t, 4)).0
        })
        .sum()
}

/// `sup_t ∫ 4 sin²(tx/2)·x⁻²·|f|² dx`. Writing the integrand as
/// `2w − 2w·cos(tx)` with `w = x⁻²|f|²`, integration by parts bounds the
/// cosine part by `V/t` where `V` sums the endpoint values and variation of
/// `w`; the search runs until that bound is small relative to `ỹ`, capped at
/// `t = 10⁶/inf supp f`.
pub fn y_norm_sq(f: &PiecewisePowerFunction) -> YNorm {
    let Some((lo, hi)) = f.support() else {
        return YNorm {
            value: 0.0,
            argmax: 0.0,
            tail_bound: 0.0,
        };
    };
    let yt = y_tilde_sq(f);
    let variation: f64 = f
        .terms
        .iter()
        .map(|t| {
            let c2 = t.coef().norm_sqr();
            let (wa, wb) = (c2 * t.a.powf(t.beta - 2.0), c2 * t.b.powf(t.beta - 2.0));
            // w is monotone on each piece.
            wa + wb + (wa - wb).abs()
        })
        .sum();
    let t_cap = 1e6 / lo;
    let t_end = (16.0 * 2.0 * PI / lo).min(t_cap);
    let n = ((t_end * 8.0 * hi / PI).ceil() as usize).clamp(256, 200_000);
    let ts: Vec<f64> = (1..=n).map(|i| t_end * i as f64 / n as f64).collect();
    let vals: Vec<f64> = ts.par_iter().map(|&t| y_profile(f, t)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let mut best = (ts[order[0]], vals[order[0]]);
    for &i in order.iter().take(6) {
        let a = if i == 0 { 0.0 } else { ts[i - 1] };
        let b = ts[(i + 1).min(n - 1)];
        let r = crate::quad::golden_max(|t| y_profile(f, t), a, b, 80);
        if r.1 > best.1 {
            best = r;
        }
    }
    YNorm {
        value: best.1,
        argmax: best.0,
        tail_bound: 2.0 * yt + 2.0 * variation / t_end,
    }
}

pub fn model_norms(f: &PiecewisePowerFunction, alpha: f64) -> Result<ModelNorms> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(domain(format!("alpha must lie in [0, 2], got {alpha}")));
    }
    Ok(ModelNorms {
        x_norm_sq: x_norm_sq(f, alpha)?,
        y_norm_sq: y_norm_sq(f).value,
        y_tilde_sq: y_tilde_sq(f),
    })
}

/// Centre of the extremal window: the minimizer of `x^{2−α}/sin²x`, with the
/// endpoint cases pinned (the infimum sits at `0⁺` for `α = 0`).
fn window_centre(alpha: f64, nu: f64) -> Result<f64> {
    if alpha == 0.0 {
        Ok(2.0 * nu)
    } else if alpha == 2.0 {
        Ok(PI / 2.0)
    } else {
        rho_argmin(alpha)
    }
}

/// `‖P_{t,s}f_ν‖²·(t−s)^α/‖f_ν‖²_X` for `f_ν = |x|^{α/2}·χ_{((r−ν)/τ, (r+ν)/τ]}`
/// and `t − s = 2τ`; tends to `2^α/ρ(α)` as `ν → 0`.
pub fn operator_norm_lower(alpha: f64, tau: f64, nu: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(domain(format!("alpha must lie in [0, 2], got {alpha}")));
    }
    if !(tau > 0.0 && tau.is_finite() && nu > 0.0) {
        return Err(domain(format!("tau and nu must be positive, got {tau}, {nu}")));
    }
    let r = window_centre(alpha, nu)?;
    if r - nu <= 0.0 {
        return Err(domain(format!("nu = {nu} exceeds the window centre {r}")));
    }
    let f = PiecewisePowerFunction::window((r - nu) / tau, (r + nu) / tau, alpha)?;
    let avg = mult_average_norm(&f, 2.0 * tau, 0.0)?;
    Ok(avg.value * (2.0 * tau).powf(alpha) / x_norm_sq(&f, alpha)?)
}

/// The check that `ρ(α)/2^α` cannot be lowered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessWitness {
    pub alpha: f64,
    pub eps: f64,
    pub nu: f64,
    pub delta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// With `ν = min(ε^{−1/α} − 1, 1)`, `f = |x|^{α/2}χ_{(1,1+ν]}` and
/// `δ = 1 + ν`: `σ_f(−δ, δ] > ε·(ρ(α)/2^α)·B·‖f‖²_X·δ^α` for the exact
/// operator constant `B = 2^α/ρ(α)`.
pub fn sharpness_witness(alpha: f64, eps: f64) -> Result<SharpnessWitness> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(domain(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    let nu = (eps.powf(-1.0 / alpha) - 1.0).min(1.0);
    let f = PiecewisePowerFunction::window(1.0, 1.0 + nu, alpha)?;
    let delta = 1.0 + nu;
    let lhs = mult_spectral(&f).interval_mass(-delta, delta);
    let r = rho(alpha)?.rho;
    let b = 2f64.powf(alpha) / r;
    let rhs = eps * (r / 2f64.powf(alpha)) * b * x_norm_sq(&f, alpha)? * delta.powf(alpha);
    Ok(SharpnessWitness {
        alpha,
        eps,
        nu,
        delta,
        lhs,
        rhs,
        pass: lhs > rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::fejer;
    use crate::rates::{decay_norm, singularity_norm};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn spectral_density_of_window() {
        let f = PiecewisePowerFunction::window(1.0, 2.0, 1.0).unwrap();
        let m = mult_spectral(&f);
        assert_eq!(m.segments()[0].p, 1.0);
        assert!((m.total_mass() - 1.5).abs() < 1e-15);
        assert!((f.norm_sq() - 1.5).abs() < 1e-15);
        assert_eq!(mult_spectral(&PiecewisePowerFunction::zero()).total_mass(), 0.0);
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(PiecewisePowerFunction::window(0.0, 1.0, 1.0).is_err());
        assert!(PiecewisePowerFunction::window(1.0, 1.0, 1.0).is_err());
        let t = |a, b| PowerTerm::new(c(1.0, 0.0), a, b, 0.0);
        assert!(PiecewisePowerFunction::new(vec![t(1.0, 2.0), t(1.5, 3.0)]).is_err());
        assert!(PiecewisePowerFunction::new(vec![t(1.0, 2.0), t(2.0, 3.0)]).is_ok());
    }

    #[test]
    fn json_schema() {
        let f: PiecewisePowerFunction = serde_json::from_str(r#"[{"c_re": 1, "c_im": 0.5, "a": 1, "b": 2, "beta": 1}]"#).unwrap();
        assert_eq!(f.terms()[0].coef(), c(1.0, 0.5));
        assert!(serde_json::from_str::<PiecewisePowerFunction>(r#"[{"c_re": 1, "a": 2, "b": 1}]"#).is_err());
    }

    #[test]
    fn average_matches_decay_norm() {
        let f = PiecewisePowerFunction::window(1.0, 2.0, 1.0).unwrap();
        let m = mult_spectral(&f);
        for tau in [1.0, 5.0, 20.0, 100.0, 3000.0] {
            let time = mult_average_norm(&f, tau, 0.0).unwrap().value;
            let spec = decay_norm(&m, tau).unwrap().value;
            assert!((time - spec).abs() <= 1e-10 * spec, "tau {tau}: {time} vs {spec}");
        }
        assert_eq!(mult_average_norm(&PiecewisePowerFunction::zero(), 2.0, 1.0).unwrap().value, 0.0);
        assert!(mult_average_norm(&f, 1.0, 1.0).is_err());
    }

    #[test]
    fn x_and_y_norms() {
        let nu = 0.3;
        let f = PiecewisePowerFunction::window(1.0, 1.0 + nu, 1.5).unwrap();
        assert!((x_norm_sq(&f, 1.5).unwrap() - nu).abs() < 1e-15);
        assert!(x_norm_sq(&f, 1.0).is_err());
        let n = model_norms(&f, 1.5).unwrap();
        assert!(2.0 * n.y_tilde_sq <= n.y_norm_sq + 1e-12);
        assert!(n.y_norm_sq <= 4.0 * n.y_tilde_sq);
        let z = model_norms(&PiecewisePowerFunction::zero(), 1.0).unwrap();
        assert_eq!((z.x_norm_sq, z.y_norm_sq, z.y_tilde_sq), (0.0, 0.0, 0.0));
    }

    #[test]
    fn y_profile_matches_scaled_average() {
        // g(t) = t²·‖P_{t,0}f‖².
        let f = PiecewisePowerFunction::window(0.5, 2.0, 1.0).unwrap();
        for t in [0.3, 2.0, 11.0] {
            let avg = mult_average_norm(&f, t, 0.0).unwrap().value;
            assert!((y_profile(&f, t) - t * t * avg).abs() < 1e-12 * y_profile(&f, t));
        }
    }

    #[test]
    fn operator_norm_approaches_constant() {
        for alpha in [0.5, 1.0, 1.5] {
            let limit = 2f64.powf(alpha) / rho(alpha).unwrap().rho;
            let v = operator_norm_lower(alpha, 3.0, 1e-3).unwrap();
            assert!(v <= limit + 1e-10);
            assert!((limit - v) / limit < 1e-2, "alpha {alpha}: {v} vs {limit}");
        }
        let zero = operator_norm_lower(0.0, 2.0, 1e-3).unwrap();
        assert!(zero <= 1.0 + 1e-10 && zero > 0.999);
        assert!(operator_norm_lower(1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn sharpness_examples() {
        let w = sharpness_witness(1.0, 0.9).unwrap();
        assert!((w.nu - 1.0 / 9.0).abs() < 1e-15);
        assert!(w.pass);
        for alpha in [0.5, 1.0, 1.5, 2.0] {
            for eps in [0.5, 0.9, 0.99, 0.999_999] {
                let w = sharpness_witness(alpha, eps).unwrap();
                let direct = eps * w.nu * (1.0 + w.nu).powf(alpha);
                assert!((w.rhs - direct).abs() <= 1e-12 * direct);
                assert!(w.pass && w.lhs > direct, "{w:?}");
            }
        }
        assert!(sharpness_witness(0.0, 0.5).is_err());
        assert!(sharpness_witness(1.0, 1.0).is_err());
    }

    #[test]
    fn cross_density_polarization() {
        let f = PiecewisePowerFunction::new(vec![PowerTerm::new(c(1.0, 2.0), 1.0, 3.0, 1.0)]).unwrap();
        let g = PiecewisePowerFunction::new(vec![PowerTerm::new(c(-0.5, 1.0), 2.0, 4.0, 1.0)]).unwrap();
        let sum = f.add(&g).unwrap();
        let cross: Complex64 = mult_cross_spectral(&f, &g).iter().map(|t| t.integral()).sum();
        let lhs = sum.norm_sq();
        let rhs = f.norm_sq() + g.norm_sq() + 2.0 * cross.re;
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
        let h = PiecewisePowerFunction::window(2.5, 3.5, 0.5).unwrap();
        assert!(f.add(&h).is_err());
    }

    #[test]
    fn atom_like_window_approaches_fejer() {
        let x0 = 1.3;
        let f = PiecewisePowerFunction::window(x0, x0 + 1e-7, 0.0).unwrap();
        let v = mult_average_norm(&f, 4.0, 0.0).unwrap().value / f.norm_sq();
        assert!((v - fejer(4.0, x0)).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn translation_invariance(s in -50.0f64..50.0, tau in 0.1f64..200.0) {
            let f = PiecewisePowerFunction::window(0.5, 1.7, 1.0).unwrap();
            let a = mult_average_norm(&f, s + tau, s).unwrap().value;
            let b = mult_average_norm(&f, tau, 0.0).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-9 * b);
        }

        #[test]
        fn operator_bound_on_family(alpha in 0.0f64..2.0, a in 0.1f64..2.0, len in 0.01f64..3.0, tau in 0.1f64..100.0) {
            let f = PiecewisePowerFunction::window(a, a + len, alpha).unwrap();
            let lhs = mult_average_norm(&f, tau, 0.0).unwrap().value * tau.powf(alpha);
            let rhs = 2f64.powf(alpha) / rho(alpha).unwrap().rho * x_norm_sq(&f, alpha).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-9), "{lhs} > {rhs}");
        }

        #[test]
        fn triangle_inequality(re in -2.0f64..2.0, im in -2.0f64..2.0, alpha in 0.1f64..1.9) {
            let f = PiecewisePowerFunction::window(0.5, 2.0, alpha).unwrap();
            let g = PiecewisePowerFunction::new(vec![PowerTerm::new(c(re, im), 1.0, 3.0, alpha)]).unwrap();
            let sum = f.add(&g).unwrap();
            let n = |h: &PiecewisePowerFunction| singularity_norm(&mult_spectral(h), alpha).unwrap().sqrt();
            prop_assert!(n(&sum) <= (n(&f) + n(&g)) * (1.0 + 1e-9));
        }
    }
}
