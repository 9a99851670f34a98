//! Decay norms, the kernel sandwich bounds, singularity norms and the
//! constants that link power singularities at the origin to power decay.

use std::f64::consts::LN_2;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::rho;
use crate::measures::{Domain, Fejer, PowerKernel, SpectralMeasure};
use crate::quad::{adaptive_points, golden_max, log_grid, QuadResult, QuadStatus, Tolerance};
use crate::roots::brent;

/// Tolerance used for decay norms: tight absolute floor plus a relative
/// target so that large-τ values keep their significant digits.
pub const DECAY_TOL: Tolerance = Tolerance::new(1e-15, 1e-10);

/// `‖P_{t,s}f − f*‖² = ∫_{ℝ∖{0}} F_τ dμ` for `τ = t − s`.
pub fn decay_norm(mu: &SpectralMeasure, tau: f64) -> Result<QuadResult> {
    decay_norm_tol(mu, tau, DECAY_TOL)
}

pub fn decay_norm_tol(mu: &SpectralMeasure, tau: f64, tol: Tolerance) -> Result<QuadResult> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(domain(format!("tau must be positive, got {tau}")));
    }
    Ok(mu.integrate_kernel(&Fejer::new(tau), Domain::punctured_line(), tol))
}

/// The two kernel bounds at one `(τ, ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaBounds {
    pub tau: f64,
    pub eps: f64,
    pub decay: QuadResult,
    /// `(8/τ²)·∫_{2/τ}^∞ x⁻³ μ(−x, x] dx`, an upper bound for the decay norm.
    pub upper: f64,
    pub upper_err: f64,
    /// `μ(−2ε/τ, 2ε/τ]` (origin excluded).
    pub window_mass: f64,
    /// `(ε²/sin²ε)·decay`, an upper bound for `window_mass`.
    pub window_bound: f64,
}

impl LemmaBounds {
    pub fn upper_margin(&self) -> f64 {
        self.upper - self.decay.value + self.upper_err + self.decay.abs_err
    }

    pub fn window_margin(&self) -> f64 {
        let slack = self.eps.powi(2) / self.eps.sin().powi(2) * self.decay.abs_err;
        self.window_bound - self.window_mass + slack + 1e-14 * self.window_mass
    }
}

pub fn lemma_bounds(mu: &SpectralMeasure, tau: f64, eps: f64) -> Result<LemmaBounds> {
    if !(eps > 0.0 && eps < std::f64::consts::PI) {
        return Err(domain(format!("eps must lie in (0, pi), got {eps}")));
    }
    let m = mu.without_origin();
    let decay = decay_norm(&m, tau)?;
    let (upper, upper_err) = lemma1_upper(&m, tau)?;
    let w = 2.0 * eps / tau;
    let window_mass = m.interval_mass(-w, w);
    let window_bound = eps.powi(2) / eps.sin().powi(2) * decay.value;
    Ok(LemmaBounds {
        tau,
        eps,
        decay,
        upper,
        upper_err,
        window_mass,
        window_bound,
    })
}

/// `(8/τ²)·∫_{2/τ}^∞ x⁻³ μ(−x, x] dx` by quadrature over the mass function
/// (substituting `u = 1/x`); Cantor parts are integrated by parts.
pub fn lemma1_upper(mu: &SpectralMeasure, tau: f64) -> Result<(f64, f64)> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(domain(format!("tau must be positive, got {tau}")));
    }
    let lower = 2.0 / tau;
    let plain = SpectralMeasure::new(mu.atoms().to_vec(), mu.segments().to_vec(), Vec::new())?;
    let mass_fn = |x: f64| plain.interval_mass(-x, x);
    let total = plain.total_mass();
    // ∫_L^∞ x⁻³ M(x) dx = ∫_0^{1/L} u·M(1/u) du.
    let integrand = |u: f64| if u == 0.0 { 0.0 } else { u * mass_fn(1.0 / u) };
    let u_max = 1.0 / lower;
    let mut pts = vec![0.0, u_max];
    for x in plain.breakpoints() {
        let ax = x.abs();
        if ax > 0.0 {
            let u = 1.0 / ax;
            if u < u_max {
                pts.push(u);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let tol = Tolerance::new(1e-15, 1e-12);
    let r = adaptive_points(&integrand, &pts, tol.scaled(total.max(1e-300)));
    let mut value = r.value;
    let mut err = r.err;
    for c in mu.cantor() {
        let single = SpectralMeasure::from_cantor(*c)?;
        let at_lower = c.mass(f64::NEG_INFINITY, lower);
        let beyond = single.integrate_kernel(&PowerKernel::new(-2.0), Domain::interval(lower, f64::INFINITY), Tolerance::new(1e-15, 1e-12));
        value += at_lower / (2.0 * lower * lower) + 0.5 * beyond.value;
        err += 0.5 * beyond.abs_err;
    }
    let scale = 8.0 / (tau * tau);
    Ok((scale * value, scale * err))
}

/// `sup_{δ>0} δ^{−α}·μ(−δ, δ]`; `+∞` when the measure is too singular at the
/// origin.
pub fn singularity_norm(mu: &SpectralMeasure, alpha: f64) -> Result<f64> {
    Ok(singularity_sup(mu, alpha)?.value)
}

/// Value and maximizing `δ` (if attained at a finite point) of the
/// singularity ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularitySup {
    pub value: f64,
    pub delta: Option<f64>,
}

const EQUAL_ORDER: f64 = 1e-12;

/// Order of vanishing of `μ(−δ, δ]` at 0: `M(δ) ≍ δ^order·|ln δ|^log_power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginOrder {
    pub order: f64,
    pub log_power: f64,
}

/// The most singular component at the origin, or `None` if no mass
/// accumulates there.
pub fn origin_order(mu: &SpectralMeasure) -> Option<OriginOrder> {
    let mut best: Option<OriginOrder> = None;
    let mut consider = |o: OriginOrder| {
        best = Some(match best {
            None => o,
            Some(b) if o.order < b.order - EQUAL_ORDER => o,
            Some(b) if (o.order - b.order).abs() <= EQUAL_ORDER && o.log_power > b.log_power => o,
            Some(b) => b,
        });
    };
    if mu.origin_mass() > 0.0 {
        consider(OriginOrder {
            order: 0.0,
            log_power: 0.0,
        });
    }
    for s in mu.segments().iter().filter(|s| s.c > 0.0 && s.a <= 0.0 && s.b >= 0.0) {
        match s.exponents() {
            Some((p, sp)) => consider(OriginOrder {
                order: p + 1.0,
                log_power: sp,
            }),
            None => {
                // Linear interpolation: order 1 if the density is positive at
                // 0, order 2 if it rises linearly from 0.
                let sides: Vec<(f64, f64)> = {
                    let i0 = s.xs.iter().position(|&x| x == 0.0);
                    let mut v = Vec::new();
                    match i0 {
                        Some(i) => {
                            if i + 1 < s.xs.len() {
                                v.push((s.values[i], s.values[i + 1]));
                            }
                            if i > 0 {
                                v.push((s.values[i], s.values[i - 1]));
                            }
                        }
                        None => {
                            let d0 = s.density_unchecked(0.0) / s.c;
                            v.push((d0, d0));
                        }
                    }
                    v
                };
                for (v0, v1) in sides {
                    if v0 > 0.0 {
                        consider(OriginOrder {
                            order: 1.0,
                            log_power: 0.0,
                        });
                    } else if v1 > 0.0 {
                        consider(OriginOrder {
                            order: 2.0,
                            log_power: 0.0,
                        });
                    }
                }
            }
        }
    }
    for c in mu.cantor().iter().filter(|c| c.weight > 0.0 && c.a == 0.0) {
        consider(OriginOrder {
            order: c.q + 2f64.ln() / 3f64.ln(),
            log_power: 0.0,
        });
    }
    best
}

/// True when `δ^{−α}·μ(−δ, δ]` is unbounded as `δ → 0`.
pub fn singular_at_origin(mu: &SpectralMeasure, alpha: f64) -> bool {
    match origin_order(mu) {
        None => false,
        Some(o) => o.order < alpha - EQUAL_ORDER || ((o.order - alpha).abs() <= EQUAL_ORDER && o.log_power > 0.0),
    }
}

pub fn singularity_sup(mu: &SpectralMeasure, alpha: f64) -> Result<SingularitySup> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(domain(format!("alpha must be >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(SingularitySup {
            value: mu.total_mass(),
            delta: None,
        });
    }
    if singular_at_origin(mu, alpha) {
        return Ok(SingularitySup {
            value: f64::INFINITY,
            delta: None,
        });
    }
    let ratio = |d: f64| mu.closed_mass(-d, d) / d.powf(alpha);
    let mut cands = singularity_candidates(mu);
    let density_sum = |d: f64| mu.density(d) + mu.density(-d);
    // Stationary points of the ratio inside smooth pieces: roots of
    // δ·m(δ) − α·M(δ) going from positive to negative.
    let psi = |d: f64| d * density_sum(d) - alpha * mu.interval_mass(-d, d);
    let mut knots: Vec<f64> = mu.breakpoints().iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let hi_end = knots.last().copied().unwrap_or(1.0) * 1e6;
    let lo_end = knots.first().copied().unwrap_or(1.0) * 1e-9;
    let mut edges = vec![lo_end];
    edges.extend(knots.iter().copied());
    edges.push(hi_end);
    for w in edges.windows(2) {
        if !(w[1] > w[0]) {
            continue;
        }
        let grid = log_grid(w[0], w[1], 64);
        let inner: Vec<f64> = grid[1..grid.len() - 1].to_vec();
        for pair in inner.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (pa, pb) = (psi(a), psi(b));
            if pa > 0.0 && pb <= 0.0 {
                if let Ok(r) = brent(psi, a, b, 1e-14 * b) {
                    cands.push(r);
                }
            }
        }
    }
    let mut best = SingularitySup {
        value: 0.0,
        delta: None,
    };
    for d in cands {
        if !(d > 0.0 && d.is_finite()) {
            continue;
        }
        let v = ratio(d);
        if v > best.value {
            best = SingularitySup {
                value: v,
                delta: Some(d),
            };
        }
    }
    Ok(best)
}

fn singularity_candidates(mu: &SpectralMeasure) -> Vec<f64> {
    let mut c: Vec<f64> = mu.breakpoints().iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
    c.extend(log_grid(1e-9, 1e3, 400));
    for comp in mu.cantor() {
        let depth = 10;
        for (_, r) in comp.generation_intervals(depth) {
            c.push(r);
        }
        let len = comp.b - comp.a;
        for j in 0..=60 {
            c.push(comp.a + len * 3f64.powi(-j));
        }
    }
    c
}

/// `max{A_r, ‖f‖²/r^α}`: a local singularity bound on `(0, r)` made global.
pub fn localize(a_r: f64, r: f64, alpha: f64, total_mass: f64) -> Result<f64> {
    for (name, v) in [("A_r", a_r), ("r", r), ("alpha", alpha), ("total_mass", total_mass)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(a_r.max(total_mass / r.powf(alpha)))
}

/// `∫ x⁻² dμ` over `ℝ∖{0}`.
pub fn alpha2_integral(mu: &SpectralMeasure) -> Result<QuadResult> {
    mu.without_origin().tail_moment(2.0)
}

/// Which proven bound a certificate instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremTag {
    #[serde(rename = "Th1-fwd")]
    Th1Fwd,
    #[serde(rename = "Th1-bwd")]
    Th1Bwd,
    Prop1,
    Prop2,
    Th5,
    #[serde(rename = "Th7-fwd")]
    Th7Fwd,
    #[serde(rename = "Th7-bwd")]
    Th7Bwd,
    Th9,
    Th4,
    Rem5,
    #[serde(rename = "Rem2-gap")]
    Rem2Gap,
    #[serde(rename = "Rem3-period")]
    Rem3Period,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 12] = [
        TheoremTag::Th1Fwd,
        TheoremTag::Th1Bwd,
        TheoremTag::Prop1,
        TheoremTag::Prop2,
        TheoremTag::Th5,
        TheoremTag::Th7Fwd,
        TheoremTag::Th7Bwd,
        TheoremTag::Th9,
        TheoremTag::Th4,
        TheoremTag::Rem5,
        TheoremTag::Rem2Gap,
        TheoremTag::Rem3Period,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremTag::Th1Fwd => "Th1-fwd",
            TheoremTag::Th1Bwd => "Th1-bwd",
            TheoremTag::Prop1 => "Prop1",
            TheoremTag::Prop2 => "Prop2",
            TheoremTag::Th5 => "Th5",
            TheoremTag::Th7Fwd => "Th7-fwd",
            TheoremTag::Th7Bwd => "Th7-bwd",
            TheoremTag::Th9 => "Th9",
            TheoremTag::Th4 => "Th4",
            TheoremTag::Rem5 => "Rem5",
            TheoremTag::Rem2Gap => "Rem2-gap",
            TheoremTag::Rem3Period => "Rem3-period",
        }
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TheoremTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremTag::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown theorem tag `{s}`")))
    }
}

/// Shape of the decay bound in `τ = t − s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateForm {
    /// `B·τ^{−exponent}`.
    Power { exponent: f64 },
    /// `B·ln τ/τ²`.
    LogOverSquare,
}

/// Range of `τ` on which a bound is proven: `τ > tau_min` or `τ ≥ tau_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub tau_min: f64,
    pub inclusive: bool,
}

impl Validity {
    pub const POSITIVE: Validity = Validity {
        tau_min: 0.0,
        inclusive: false,
    };
    pub const FROM_TWO: Validity = Validity {
        tau_min: 2.0,
        inclusive: true,
    };
    pub const ABOVE_TWO: Validity = Validity {
        tau_min: 2.0,
        inclusive: false,
    };

    pub fn contains(&self, tau: f64) -> bool {
        if self.inclusive {
            tau >= self.tau_min
        } else {
            tau > self.tau_min
        }
    }
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tau {} {}", if self.inclusive { ">=" } else { ">" }, self.tau_min)
    }
}

/// `(α, A, B, tag)` bundle: for forward tags `B` is derived from `A`, for
/// backward tags `A` from `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub tag: TheoremTag,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub form: RateForm,
    pub validity: Validity,
}

impl RateCertificate {
    /// The decay bound at `τ`, or `None` outside the validity domain.
    pub fn bound(&self, tau: f64) -> Option<f64> {
        if !self.validity.contains(tau) {
            return None;
        }
        Some(match self.form {
            RateForm::Power { exponent } => self.b * tau.powf(-exponent),
            RateForm::LogOverSquare => self.b * tau.ln() / (tau * tau),
        })
    }
}

/// Named inputs to [`rate_constant`]; each tag reads the fields it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub alpha: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub mass: Option<f64>,
    pub r: Option<f64>,
    pub q: Option<f64>,
    pub psi: Option<QuadResult>,
    pub gamma: Option<f64>,
    pub f_norm_sq: Option<f64>,
    pub period_sup: Option<f64>,
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    match v {
        None => Err(Error::MissingInput(name)),
        Some(x) if x.is_nan() || x < 0.0 => Err(domain(format!("{name} must be >= 0, got {x}"))),
        Some(x) => Ok(x),
    }
}

fn need_positive(v: Option<f64>, name: &'static str) -> Result<f64> {
    let x = need(v, name)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(domain(format!("{name} must be positive")))
    }
}

/// Evaluates the closed-form constant attached to `tag`.
pub fn rate_constant(tag: TheoremTag, inp: &RateInputs) -> Result<RateCertificate> {
    use TheoremTag::*;
    let cert = |alpha, a, b, form, validity| RateCertificate {
        tag,
        alpha,
        a,
        b,
        form,
        validity,
    };
    let power = |e| RateForm::Power { exponent: e };
    match tag {
        Th1Fwd | Th1Bwd => {
            let alpha = need(inp.alpha, "alpha")?;
            if alpha >= 2.0 {
                return Err(domain(format!("{tag} needs alpha in [0, 2), got {alpha}")));
            }
            if tag == Th1Fwd {
                let a = need(inp.a, "A")?;
                let b = 2f64.powf(alpha + 1.0) / (2.0 - alpha) * a;
                Ok(cert(alpha, a, b, power(alpha), Validity::POSITIVE))
            } else {
                let b = need(inp.b, "B")?;
                let a = rho(alpha)?.rho / 2f64.powf(alpha) * b;
                Ok(cert(alpha, a, b, power(alpha), Validity::POSITIVE))
            }
        }
        Prop1 => {
            if let Some(al) = inp.alpha {
                if al != 2.0 {
                    return Err(domain(format!("Prop1 is the alpha = 2 case, got {al}")));
                }
            }
            let a = need(inp.a, "A")?;
            let m = need(inp.mass, "mass")?;
            Ok(cert(2.0, a, 8.0 * a + 4.0 / LN_2 * m, RateForm::LogOverSquare, Validity::FROM_TWO))
        }
        Prop2 => {
            let alpha = need(inp.alpha, "alpha")?;
            if alpha <= 2.0 {
                return Err(domain(format!("Prop2 needs alpha > 2, got {alpha}")));
            }
            let a = need(inp.a, "A")?;
            let m = need(inp.mass, "mass")?;
            Ok(cert(alpha, a, 8.0 / (alpha - 2.0) * a + 4.0 * m, power(2.0), Validity::FROM_TWO))
        }
        Th5 => {
            let alpha = need(inp.alpha, "alpha")?;
            let a = need(inp.a, "A")?;
            let r = need_positive(inp.r, "r")?;
            let d = a.max(r.powf(-alpha));
            if alpha < 2.0 {
                Ok(cert(alpha, d, 2f64.powf(alpha + 1.0) / (2.0 - alpha) * d, power(alpha), Validity::POSITIVE))
            } else if alpha == 2.0 {
                Ok(cert(alpha, d, 8.0 * d + 4.0 / LN_2, RateForm::LogOverSquare, Validity::FROM_TWO))
            } else {
                Ok(cert(alpha, d, 8.0 / (alpha - 2.0) * d + 4.0, power(2.0), Validity::FROM_TWO))
            }
        }
        Th7Fwd => {
            let a = need(inp.a, "A")?;
            Ok(cert(2.0, a, 4.0 * a, power(2.0), Validity::POSITIVE))
        }
        Th7Bwd => {
            let b = need(inp.b, "B")?;
            Ok(cert(2.0, 8.0 * b, b, power(2.0), Validity::POSITIVE))
        }
        Th9 => {
            let a = need(inp.a, "A")?;
            let r = need_positive(inp.r, "r")?;
            Ok(cert(2.0, a, 4.0 * (a + 1.0 / (r * r)), power(2.0), Validity::POSITIVE))
        }
        Th4 | Rem5 => {
            let q = need(inp.q.or(inp.alpha), "q")?;
            if q > 2.0 || (tag == Th4 && q == 0.0) {
                return Err(domain(format!("{tag} needs q in {}, got {q}", if tag == Th4 { "(0, 2]" } else { "[0, 2]" })));
            }
            let r = need_positive(inp.r, "r")?;
            let psi = inp.psi.as_ref().ok_or(Error::MissingInput("psi"))?;
            match psi.status {
                QuadStatus::Divergent => return Err(Error::DivergentInput("psi")),
                QuadStatus::Inconclusive => return Err(domain("psi quadrature is inconclusive")),
                QuadStatus::Converged => {}
            }
            if tag == Th4 {
                if r >= 1.0 {
                    return Err(domain(format!("Th4 needs r in (0, 1), got {r}")));
                }
                let l = q.min(2.0);
                let c2 = psi.value + 1.0 / (r * r);
                Ok(cert(l, psi.value, c2 * 2f64.powf(l), power(l), Validity::ABOVE_TWO))
            } else {
                let k2 = (psi.value + r.powf(-q)) / rho(q)?.rho;
                Ok(cert(q, psi.value, k2 * 2f64.powf(q), power(q), Validity::POSITIVE))
            }
        }
        Rem2Gap => {
            let g = need_positive(inp.gamma, "gamma")?;
            let f2 = need(inp.f_norm_sq, "f_norm_sq")?;
            Ok(cert(2.0, 0.0, 4.0 * f2 / (g * g), power(2.0), Validity::POSITIVE))
        }
        Rem3Period => {
            let p = need_positive(inp.period_sup, "period_sup")?;
            let f2 = need(inp.f_norm_sq, "f_norm_sq")?;
            Ok(cert(2.0, 0.0, 4.0 * p * p * f2, power(2.0), Validity::POSITIVE))
        }
    }
}

/// Least-squares fit `value ≈ B·τ^{−α}` on log–log axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub alpha: f64,
    pub b: f64,
    pub residual: f64,
}

pub const MIN_FIT_SAMPLES: usize = 8;

pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<PowerFit> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::Degenerate(format!(
            "need at least {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if let Some(&(t, v)) = samples.iter().find(|(t, v)| !(*t > 0.0 && *v > 0.0 && t.is_finite() && v.is_finite())) {
        return Err(domain(format!("samples must be positive and finite, got ({t}, {v})")));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    // Shifting by the first value keeps constant data exactly flat.
    let y0 = ys[0];
    let my = y0 + ys.iter().map(|y| y - y0).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::Degenerate("all tau values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerFit {
        alpha: -slope + 0.0,
        b: intercept.exp(),
        residual: (rss / n).sqrt(),
    })
}

/// The standard τ-grid: 200 log-spaced points on `[10⁻¹, 10⁴]`.
pub fn standard_tau_grid() -> Vec<f64> {
    log_grid(0.1, 1e4, 200)
}

/// `(τ, value)` with the largest `value` over `taus`, refined by golden
/// section around the best few grid maxima.
pub fn grid_sup<F>(f: F, taus: &[f64]) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync,
{
    let vals: Vec<f64> = taus.par_iter().map(|&t| f(t)).collect();
    let mut idx: Vec<usize> = (0..taus.len()).collect();
    idx.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let mut best = (taus[idx[0]], vals[idx[0]]);
    let refined: Vec<(f64, f64)> = idx
        .iter()
        .take(4)
        .filter(|&&i| i > 0 && i + 1 < taus.len())
        .copied()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&i| golden_max(&f, taus[i - 1], taus[i + 1], 80))
        .collect();
    for r in refined {
        if r.1 > best.1 {
            best = r;
        }
    }
    best
}

/// `sup_τ decay_norm(μ, τ)·τ^α` over the grid (with local refinement).
pub fn empirical_rate_constant(mu: &SpectralMeasure, alpha: f64, taus: &[f64]) -> Result<(f64, f64)> {
    let m = mu.without_origin();
    let f = |t: f64| decay_norm(&m, t).map(|r| r.value * t.powf(alpha)).unwrap_or(f64::NAN);
    Ok(grid_sup(f, taus))
}

/// One plotting row: `(τ, decay norm, Lemma-1 upper bound, B·τ^{−α})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub tau: f64,
    pub decay_norm: f64,
    pub lemma1_upper: f64,
    pub rate_bound: f64,
}

/// The certificate relating `singularity_norm(μ, α)` to decay: Th1-fwd for
/// `α < 2`, Prop1 for `α = 2`, Prop2 for `α > 2`.
pub fn certificate_for(mu: &SpectralMeasure, alpha: f64) -> Result<RateCertificate> {
    let m = mu.without_origin();
    let a = singularity_norm(&m, alpha)?;
    let inputs = RateInputs {
        alpha: Some(alpha),
        a: Some(a),
        mass: Some(m.total_mass()),
        ..Default::default()
    };
    if alpha < 2.0 {
        rate_constant(TheoremTag::Th1Fwd, &inputs)
    } else if alpha == 2.0 {
        rate_constant(TheoremTag::Prop1, &inputs)
    } else {
        rate_constant(TheoremTag::Prop2, &inputs)
    }
}

pub fn bounds_table(mu: &SpectralMeasure, alpha: f64, taus: &[f64]) -> Result<Vec<BoundsRow>> {
    let cert = certificate_for(mu, alpha)?;
    let m = mu.without_origin();
    taus.par_iter()
        .map(|&tau| {
            let decay = decay_norm(&m, tau)?;
            let (upper, _) = lemma1_upper(&m, tau)?;
            Ok(BoundsRow {
                tau,
                decay_norm: decay.value,
                lemma1_upper: upper,
                rate_bound: cert.bound(tau).unwrap_or(f64::NAN),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::fejer;
    use crate::measures::{Atom, CantorComponent, Segment};
    use proptest::prelude::*;

    fn window(a: f64, b: f64, alpha: f64) -> SpectralMeasure {
        SpectralMeasure::from_segment(Segment::power(a, b, 1.0, alpha)).unwrap()
    }

    #[test]
    fn decay_of_atoms() {
        let origin = SpectralMeasure::atom(0.0, 1.0).unwrap();
        assert_eq!(decay_norm(&origin, 3.0).unwrap().value, 0.0);
        let one = SpectralMeasure::atom(1.7, 2.0).unwrap();
        assert_eq!(decay_norm(&one, 3.0).unwrap().value, 2.0 * fejer(3.0, 1.7));
        assert!(decay_norm(&one, 0.0).is_err());
    }

    #[test]
    fn lemma_bounds_of_zero_measure() {
        let z = SpectralMeasure::zero();
        let b = lemma_bounds(&z, 2.0, 1.0).unwrap();
        assert_eq!(b.upper, 0.0);
        assert_eq!(b.window_bound, 0.0);
    }

    #[test]
    fn lemma1_matches_fubini_form() {
        // (8/τ²)∫_{2/τ}^∞ x⁻³ μ(−x,x] dx = ∫ min(1, 4/(τx)²) dμ.
        let m = SpectralMeasure::new(
            vec![Atom { x: -0.3, mass: 0.7 }, Atom { x: 2.0, mass: 0.2 }],
            vec![Segment::power(0.5, 3.0, 1.0, 1.0), Segment::power(-5.0, -4.0, 0.5, 0.0)],
            vec![CantorComponent::new(0.0, 1.0, 1.0)],
        )
        .unwrap();
        for tau in [0.3, 1.0, 4.0, 17.0, 300.0] {
            let (u, _) = lemma1_upper(&m, tau).unwrap();
            let k = crate::measures::FnKernel::new(move |x: f64| (4.0 / (tau * x).powi(2)).min(1.0), 1.0);
            let oracle = m.integrate_kernel(&k, Domain::punctured_line(), Tolerance::absolute(1e-13)).value;
            assert!((u - oracle).abs() < 1e-9 * oracle.max(1.0), "tau {tau}: {u} vs {oracle}");
        }
    }

    #[test]
    fn singularity_norm_of_power_window() {
        let (a, b, alpha) = (0.5, 2.0, 1.0);
        let m = window(a, b, alpha);
        let expected = (b.powf(alpha + 1.0) - a.powf(alpha + 1.0)) / ((alpha + 1.0) * b.powf(alpha));
        let s = singularity_sup(&m, alpha).unwrap();
        assert!((s.value - expected).abs() < 1e-12, "{} vs {expected}", s.value);
        assert!((s.delta.unwrap() - b).abs() < 1e-9);
        // δ-grid oracle.
        let grid_max = log_grid(1e-3, 1e3, 20001)
            .into_iter()
            .map(|d| m.interval_mass(-d, d) / d.powf(alpha))
            .fold(0.0, f64::max);
        assert!(grid_max <= s.value + 1e-15);
    }

    #[test]
    fn singularity_norm_special_cases() {
        let origin = SpectralMeasure::atom(0.0, 1.0).unwrap();
        assert_eq!(singularity_norm(&origin, 0.0).unwrap(), 1.0);
        assert_eq!(singularity_norm(&origin, 0.5).unwrap(), f64::INFINITY);
        for p in [0.25, 0.5, 1.0] {
            let q = 0.7;
            let m = SpectralMeasure::from_segment(Segment::power_log(0.0, 0.5, 1.0, q - 1.0, -2.0)).unwrap();
            assert_eq!(singularity_norm(&m, q + p).unwrap(), f64::INFINITY);
        }
        let one = SpectralMeasure::atom(1.0, 1.0).unwrap();
        assert!((singularity_norm(&one, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singularity_norm_with_stationary_interior_point() {
        // Constant density on (0,1] plus far atom: ratio δ^{-1/2}M peaks inside.
        let m = SpectralMeasure::new(vec![Atom { x: 5.0, mass: 1.0 }], vec![Segment::constant(0.0, 1.0, 1.0)], Vec::new()).unwrap();
        let s = singularity_norm(&m, 0.5).unwrap();
        let grid_max = log_grid(1e-6, 1e4, 200_001)
            .into_iter()
            .map(|d| m.closed_mass(-d, d) / d.sqrt())
            .fold(0.0, f64::max);
        assert!(s >= grid_max - 1e-12 && s <= grid_max * (1.0 + 1e-6), "{s} vs {grid_max}");
    }

    #[test]
    fn localize_examples() {
        assert_eq!(localize(1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(localize(0.1, 0.5, 1.0, 2.0).unwrap(), 4.0);
        assert!(localize(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn localize_dominates_global_norm() {
        let m = window(0.5, 2.0, 1.0);
        let global = singularity_norm(&m, 1.0).unwrap();
        for r in [0.3, 0.6, 1.0, 1.5, 2.5] {
            // Local constant on (0, r).
            let a_r = log_grid(1e-6, r, 2000)
                .into_iter()
                .chain([0.5, 2.0].into_iter().filter(|&d| d < r))
                .map(|d| m.closed_mass(-d, d) / d)
                .fold(1e-300, f64::max);
            assert!(global <= localize(a_r, r, 1.0, m.total_mass()).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn rate_constant_examples() {
        let c = rate_constant(TheoremTag::Th1Fwd, &RateInputs { alpha: Some(1.0), a: Some(1.0), ..Default::default() }).unwrap();
        assert_eq!(c.b, 4.0);
        assert_eq!(c.bound(2.0), Some(2.0));
        let f = rate_constant(TheoremTag::Th7Fwd, &RateInputs { a: Some(1.0), ..Default::default() }).unwrap();
        assert_eq!(f.b, 4.0);
        let b = rate_constant(TheoremTag::Th7Bwd, &RateInputs { b: Some(1.0), ..Default::default() }).unwrap();
        assert_eq!(b.a, 8.0);
        let p1 = rate_constant(TheoremTag::Prop1, &RateInputs { a: Some(1.0), mass: Some(1.0), ..Default::default() }).unwrap();
        assert!((p1.b - (8.0 + 4.0 / LN_2)).abs() < 1e-15);
        assert_eq!(p1.bound(1.5), None);
        assert!(p1.bound(2.0).is_some());
        assert!(rate_constant(TheoremTag::Prop2, &RateInputs { alpha: Some(2.0), a: Some(1.0), mass: Some(1.0), ..Default::default() }).is_err());
        assert!(matches!(rate_constant(TheoremTag::Th1Fwd, &RateInputs::default()), Err(Error::MissingInput(_))));
        let t5 = rate_constant(TheoremTag::Th5, &RateInputs { alpha: Some(3.0), a: Some(0.1), r: Some(0.5), ..Default::default() }).unwrap();
        assert_eq!(t5.a, 8.0);
        assert_eq!(t5.b, 8.0 * 8.0 + 4.0);
        let t9 = rate_constant(TheoremTag::Th9, &RateInputs { a: Some(1.0), r: Some(0.5), ..Default::default() }).unwrap();
        assert_eq!(t9.b, 20.0);
        let div = QuadResult::divergent(1.0, Vec::new());
        let e = rate_constant(TheoremTag::Th4, &RateInputs { q: Some(1.0), r: Some(0.5), psi: Some(div), ..Default::default() });
        assert!(matches!(e, Err(Error::DivergentInput("psi"))));
        let th4 = rate_constant(TheoremTag::Th4, &RateInputs { q: Some(1.0), r: Some(0.5), psi: Some(QuadResult::exact(2.0)), ..Default::default() }).unwrap();
        assert!((th4.b - 6.0 * 2.0).abs() < 1e-14);
        assert_eq!(th4.validity, Validity::ABOVE_TWO);
        let gap = rate_constant(TheoremTag::Rem2Gap, &RateInputs { gamma: Some(2.0), f_norm_sq: Some(3.0), ..Default::default() }).unwrap();
        assert_eq!(gap.b, 3.0);
        let per = rate_constant(TheoremTag::Rem3Period, &RateInputs { period_sup: Some(3.0), f_norm_sq: Some(2.0), ..Default::default() }).unwrap();
        assert_eq!(per.b, 72.0);
    }

    #[test]
    fn remark5_matches_theorem4_exponent_at_two() {
        let psi = QuadResult::exact(1.5);
        let r5 = rate_constant(TheoremTag::Rem5, &RateInputs { q: Some(2.0), r: Some(0.5), psi: Some(psi), ..Default::default() }).unwrap();
        // ρ(2) = 1: K² = Ψ + r⁻², B = 4K².
        assert!((r5.b - 4.0 * (1.5 + 4.0)).abs() < 1e-13);
    }

    #[test]
    fn tags_round_trip() {
        for t in TheoremTag::ALL {
            assert_eq!(t.as_str().parse::<TheoremTag>().unwrap(), t);
            let j = serde_json::to_string(&t).unwrap();
            assert_eq!(j, format!("\"{}\"", t.as_str()));
        }
    }

    #[test]
    fn fit_examples() {
        let taus = log_grid(1.0, 100.0, 12);
        let exact: Vec<(f64, f64)> = taus.iter().map(|&t| (t, 5.0 * t.powf(-1.5))).collect();
        let f = fit_power_law(&exact).unwrap();
        assert!((f.alpha - 1.5).abs() < 1e-12 && (f.b - 5.0).abs() < 1e-10 && f.residual < 1e-12);
        let flat: Vec<(f64, f64)> = taus.iter().map(|&t| (t, 3.0)).collect();
        assert_eq!(fit_power_law(&flat).unwrap().alpha, 0.0);
        let same: Vec<(f64, f64)> = (0..10).map(|_| (2.0, 1.0)).collect();
        assert!(matches!(fit_power_law(&same), Err(Error::Degenerate(_))));
        assert!(fit_power_law(&exact[..4]).is_err());
    }

    #[test]
    fn fitted_exponents_of_decay() {
        let fit = |m: &SpectralMeasure| {
            let samples: Vec<(f64, f64)> = log_grid(10.0, 1e4, 40)
                .into_iter()
                .map(|t| (t, decay_norm(m, t).unwrap().value))
                .collect();
            fit_power_law(&samples).unwrap().alpha
        };
        // Mass δ^1 near the origin decays like τ⁻¹.
        let uniform = SpectralMeasure::from_segment(Segment::constant(0.0, 1.0, 1.0)).unwrap();
        let a = fit(&uniform);
        assert!((0.9..=1.1).contains(&a), "{a}");
        // Support away from the origin: capped at τ⁻².
        let a = fit(&window(1.0, 2.0, 1.0));
        assert!((1.9..=2.1).contains(&a), "{a}");
    }

    #[test]
    fn alpha2_integral_examples() {
        let sq = SpectralMeasure::from_segment(Segment::power(0.0, 1.0, 1.0, 2.0)).unwrap();
        assert!((alpha2_integral(&sq).unwrap().value - 1.0).abs() < 1e-15);
        let atom = SpectralMeasure::atom(0.5, 1.0).unwrap();
        assert!((alpha2_integral(&atom).unwrap().value - 4.0).abs() < 1e-15);
        let flat = SpectralMeasure::from_segment(Segment::constant(0.0, 1.0, 1.0)).unwrap();
        assert!(alpha2_integral(&flat).unwrap().is_divergent());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn scaling_is_linear(c in 0.01f64..100.0, alpha in 0.1f64..1.9) {
            let m = SpectralMeasure::new(
                vec![Atom { x: 1.5, mass: 0.3 }],
                vec![Segment::power(0.2, 1.0, 1.0, alpha + 0.5)],
                Vec::new(),
            ).unwrap();
            let base = singularity_norm(&m, alpha).unwrap();
            let scaled = singularity_norm(&m.scaled(c).unwrap(), alpha).unwrap();
            prop_assert!((scaled - c * base).abs() <= 1e-9 * c * base);
        }

        #[test]
        fn forward_bound_holds_on_window(a in 0.05f64..1.0, len in 0.1f64..3.0, alpha in 0.0f64..1.9, tau in 0.1f64..1e3) {
            let m = window(a, a + len, alpha);
            let amax = singularity_norm(&m, alpha).unwrap();
            let cert = rate_constant(TheoremTag::Th1Fwd, &RateInputs { alpha: Some(alpha), a: Some(amax), ..Default::default() }).unwrap();
            let d = decay_norm(&m, tau).unwrap();
            prop_assert!(d.value <= cert.bound(tau).unwrap() + d.abs_err);
        }

        #[test]
        fn th1_round_trip_ratio(alpha in 0.0f64..1.99, a in 0.01f64..10.0) {
            let fwd = rate_constant(TheoremTag::Th1Fwd, &RateInputs { alpha: Some(alpha), a: Some(a), ..Default::default() }).unwrap();
            let bwd = rate_constant(TheoremTag::Th1Bwd, &RateInputs { alpha: Some(alpha), b: Some(fwd.b), ..Default::default() }).unwrap();
            let ratio = bwd.a / a;
            let expected = 2.0 * rho(alpha).unwrap().rho / (2.0 - alpha);
            prop_assert!((ratio - expected).abs() < 1e-12 * expected);
            prop_assert!(ratio >= 1.0);
        }
    }
}
