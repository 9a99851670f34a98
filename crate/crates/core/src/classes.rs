//! Singularity classes at the origin and their inclusion lattice.
//!
//! * `K1`: absolutely continuous near 0 with `∫_{−r}^{r} |x|^{−q} φ dx < ∞`.
//! * `K2`: `∫_{ℝ∖{0}} |x|^{−q} dμ < ∞`.
//! * `K3`: `∫ sin²(τx)/(τx)² dμ ≤ B τ^{−q}`.
//! * `K4`: `μ((−δ, δ]∖{0}) ≤ A δ^q`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{self, CatalogEntry};
use crate::error::{Error, Result};
use crate::measures::{Domain, PowerKernel, SpectralMeasure};
use crate::quad::{log_grid, QuadStatus, Tolerance, TracePoint};
use crate::rates::{decay_norm, grid_sup, singularity_norm, standard_tau_grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassId {
    K1,
    K2,
    K3,
    K4,
}

impl ClassId {
    pub const ALL: [ClassId; 4] = [ClassId::K1, ClassId::K2, ClassId::K3, ClassId::K4];
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for ClassId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassId::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown class `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NonMember,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Member => "member",
            Verdict::NonMember => "non_member",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub class_id: ClassId,
    pub q: f64,
    pub verdict: Verdict,
    /// The finite integral or supremum behind a `Member` verdict.
    pub value: Option<f64>,
    /// Growing sequence behind a `NonMember` verdict.
    pub trace: Vec<TracePoint>,
}

impl ClassVerdict {
    fn member(class_id: ClassId, q: f64, value: f64) -> Self {
        ClassVerdict {
            class_id,
            q,
            verdict: Verdict::Member,
            value: Some(value),
            trace: Vec::new(),
        }
    }

    fn other(class_id: ClassId, q: f64, verdict: Verdict, trace: Vec<TracePoint>) -> Self {
        ClassVerdict {
            class_id,
            q,
            verdict,
            value: None,
            trace,
        }
    }

    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::Member
    }

    pub fn is_non_member(&self) -> bool {
        self.verdict == Verdict::NonMember
    }

    /// Short text form of the witness for reports.
    pub fn witness_text(&self) -> String {
        match (self.value, self.trace.last()) {
            (Some(v), _) => format!("{v:.17e}"),
            (None, Some(p)) => format!("trace[{}] last={:.17e}@{:.3e}", self.trace.len(), p.value, p.eps),
            (None, None) => String::new(),
        }
    }
}

/// Minimum length of a non-membership trace.
pub const MIN_TRACE: usize = 8;

pub fn class_membership(mu: &SpectralMeasure, q: f64, class_id: ClassId) -> Result<ClassVerdict> {
    if !(q.is_finite() && q >= 0.0) {
        return Err(crate::error::domain(format!("q must be >= 0, got {q}")));
    }
    let m = mu.without_origin();
    Ok(match class_id {
        ClassId::K1 => k1(&m, q),
        ClassId::K2 => {
            let r = m.tail_moment(q)?;
            moment_verdict(ClassId::K2, q, r.status, r.value, r.trace)
        }
        ClassId::K3 => k3(&m, q)?,
        ClassId::K4 => k4(&m, q)?,
    })
}

fn moment_verdict(id: ClassId, q: f64, status: QuadStatus, value: f64, trace: Vec<TracePoint>) -> ClassVerdict {
    match status {
        QuadStatus::Converged => ClassVerdict::member(id, q, value),
        QuadStatus::Divergent => ClassVerdict::other(id, q, Verdict::NonMember, trace),
        QuadStatus::Inconclusive => ClassVerdict::other(id, q, Verdict::Inconclusive, trace),
    }
}

fn k1(m: &SpectralMeasure, q: f64) -> ClassVerdict {
    // Distance from the origin to the nearest non-absolutely-continuous mass.
    let mut d: f64 = 1.0;
    for a in m.atoms().iter().filter(|a| a.mass > 0.0) {
        d = d.min(a.x.abs());
    }
    for c in m.cantor().iter().filter(|c| c.weight > 0.0) {
        d = d.min(c.a);
    }
    if d <= 0.0 {
        let trace = m
            .cantor()
            .iter()
            .find(|c| c.a == 0.0)
            .map(|c| {
                // Staircase slope over the first interval of each generation.
                (1..=MIN_TRACE as i32 + 4)
                    .map(|j| {
                        let eps = (c.b - c.a) * 3f64.powi(-j);
                        TracePoint {
                            eps,
                            value: c.staircase(c.a + eps) / eps,
                        }
                    })
                    .collect()
            })
            .unwrap_or_default();
        return ClassVerdict::other(ClassId::K1, q, Verdict::NonMember, trace);
    }
    let r = 0.5 * d;
    let local = m.integrate_kernel(
        &PowerKernel::new(-q),
        Domain {
            lo: -r,
            hi: r,
            punctured: true,
        },
        Tolerance::absolute(crate::quad::DEFAULT_TOL),
    );
    moment_verdict(ClassId::K1, q, local.status, local.value, local.trace)
}

/// Windows of this many grid points are compared when deciding growth.
const K3_WINDOW: usize = 10;
/// Log-slope of the window maxima below which the grid-sup counts as settled.
const K3_FLAT: f64 = 0.01;
/// Log-slope above which it counts as growing without bound.
const K3_GROWING: f64 = 0.05;

/// `τ^q·∫ sin²(τx)/(τx)² dμ` on the standard grid.
pub fn k3_profile(mu: &SpectralMeasure, q: f64, taus: &[f64]) -> Result<Vec<f64>> {
    let m = mu.without_origin();
    taus.par_iter()
        .map(|&t| decay_norm(&m, 2.0 * t).map(|r| r.value * t.powf(q)))
        .collect()
}

fn k3(m: &SpectralMeasure, q: f64) -> Result<ClassVerdict> {
    if m.total_mass() == 0.0 {
        return Ok(ClassVerdict::member(ClassId::K3, q, 0.0));
    }
    let taus = standard_tau_grid();
    let vals = k3_profile(m, q, &taus)?;
    let maxima: Vec<TracePoint> = taus
        .chunks(K3_WINDOW)
        .zip(vals.chunks(K3_WINDOW))
        .map(|(t, v)| TracePoint {
            eps: *t.last().unwrap(),
            value: v.iter().copied().fold(0.0, f64::max),
        })
        .collect();
    let tail = &maxima[maxima.len() - MIN_TRACE..];
    let slope = log_slope(tail);
    let increasing = tail.windows(2).all(|w| w[1].value > w[0].value);
    if increasing && slope >= K3_GROWING {
        return Ok(ClassVerdict::other(ClassId::K3, q, Verdict::NonMember, tail.to_vec()));
    }
    if slope < K3_FLAT {
        let f = |t: f64| decay_norm(m, 2.0 * t).map(|r| r.value * t.powf(q)).unwrap_or(f64::NAN);
        let (_, sup) = grid_sup(f, &taus);
        return Ok(ClassVerdict::member(ClassId::K3, q, sup));
    }
    Ok(ClassVerdict::other(ClassId::K3, q, Verdict::Inconclusive, tail.to_vec()))
}

fn log_slope(points: &[TracePoint]) -> f64 {
    let samples: Vec<(f64, f64)> = points.iter().map(|p| (p.eps, p.value)).collect();
    if samples.iter().any(|s| !(s.1 > 0.0)) {
        return 0.0;
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

fn k4(m: &SpectralMeasure, q: f64) -> Result<ClassVerdict> {
    let a = singularity_norm(m, q)?;
    if a.is_finite() {
        return Ok(ClassVerdict::member(ClassId::K4, q, a));
    }
    Ok(ClassVerdict::other(ClassId::K4, q, Verdict::NonMember, k4_trace(m, q)))
}

/// `δ^{−q}·μ(−δ, δ]` at `δ = 10^{−j}`: the longest increasing run ending at
/// the smallest `δ`.
pub fn k4_trace(m: &SpectralMeasure, q: f64) -> Vec<TracePoint> {
    let pts: Vec<TracePoint> = (1..=60)
        .map(|j| {
            let eps = 10f64.powi(-j);
            TracePoint {
                eps,
                value: m.interval_mass(-eps, eps) / eps.powf(q),
            }
        })
        .collect();
    let mut start = pts.len() - 1;
    while start > 0 && pts[start].value > pts[start - 1].value {
        start -= 1;
    }
    pts[start..].to_vec()
}

/// One relation checked by [`inclusion_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub relation: String,
    pub measure: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub q: f64,
    pub p: f64,
    pub checks: Vec<RelationCheck>,
}

impl InclusionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RelationCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Verdicts of one measure at the levels the suite needs.
struct Profile {
    k1: ClassVerdict,
    k2: ClassVerdict,
    k3_capped: ClassVerdict,
    k3_q: ClassVerdict,
    k4: ClassVerdict,
    k4_raised: ClassVerdict,
    k2_two: ClassVerdict,
    k3_two: ClassVerdict,
    k3_above: ClassVerdict,
}

fn profile(m: &SpectralMeasure, q: f64, p: f64) -> Result<Profile> {
    let qc = q.min(2.0);
    let k3_q = if q < 2.0 { None } else { Some(class_membership(m, q, ClassId::K3)?) };
    let k3_capped = class_membership(m, qc, ClassId::K3)?;
    Ok(Profile {
        k1: class_membership(m, q, ClassId::K1)?,
        k2: class_membership(m, q, ClassId::K2)?,
        k3_q: k3_q.unwrap_or_else(|| k3_capped.clone()),
        k3_capped,
        k4: class_membership(m, q, ClassId::K4)?,
        k4_raised: class_membership(m, q + p, ClassId::K4)?,
        k2_two: class_membership(m, 2.0, ClassId::K2)?,
        k3_two: class_membership(m, 2.0, ClassId::K3)?,
        k3_above: class_membership(m, 2.5, ClassId::K3)?,
    })
}

fn implication(relation: &str, name: &str, premise: &ClassVerdict, conclusion: &ClassVerdict) -> RelationCheck {
    let holds = !(premise.is_member() && conclusion.is_non_member());
    RelationCheck {
        relation: relation.into(),
        measure: name.into(),
        holds,
        detail: format!("{} -> {}", premise.verdict, conclusion.verdict),
    }
}

fn expect(relation: &str, name: &str, got: &ClassVerdict, want: Verdict) -> RelationCheck {
    RelationCheck {
        relation: relation.into(),
        measure: name.into(),
        holds: got.verdict == want,
        detail: format!("{} (expected {want})", got.verdict),
    }
}

/// Runs the class lattice over the level-`q` catalog.
pub fn inclusion_suite(q: f64, p: f64) -> Result<InclusionReport> {
    if !(q > 0.0 && p > 0.0 && q.is_finite() && p.is_finite()) {
        return Err(crate::error::domain(format!("q and p must be positive, got {q}, {p}")));
    }
    let entries = catalog::catalog(q);
    let profiles: Vec<(&CatalogEntry, Profile)> = entries
        .par_iter()
        .map(|e| profile(&e.measure, q, p).map(|pr| (e, pr)))
        .collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for (e, pr) in &profiles {
        let n = e.name;
        checks.push(implication("K1(q) => K2(q)", n, &pr.k1, &pr.k2));
        checks.push(implication("K2(q) => K4(q)", n, &pr.k2, &pr.k4));
        checks.push(implication("K2(q) => K3(min(q,2))", n, &pr.k2, &pr.k3_capped));
        checks.push(implication("K4(q+p) => K2(q)", n, &pr.k4_raised, &pr.k2));
        checks.push(implication("K2(2) => K3(2)", n, &pr.k2_two, &pr.k3_two));
        checks.push(implication("K3(2) => K2(2)", n, &pr.k3_two, &pr.k2_two));
        if q < 2.0 {
            checks.push(implication("K3(q) => K4(q)", n, &pr.k3_q, &pr.k4));
            checks.push(implication("K4(q) => K3(q)", n, &pr.k4, &pr.k3_q));
        }
        if let (Some(b), true) = (pr.k3_two.value, pr.k2_two.is_member()) {
            let a = pr.k2_two.value.unwrap_or(f64::NAN);
            checks.push(RelationCheck {
                relation: "int x^-2 dmu <= 2 B".into(),
                measure: n.into(),
                holds: a <= 2.0 * b * (1.0 + 1e-9),
                detail: format!("{a:.12e} <= 2 * {b:.12e}"),
            });
        }
        let off_origin = e.measure.mass_off_origin() > 0.0;
        if off_origin {
            checks.push(expect("mass off 0 => not K3(2.5)", n, &pr.k3_above, Verdict::NonMember));
            let mr = maximal_rate_check(&e.measure, 1e4)?;
            checks.push(RelationCheck {
                relation: "maximal rate tau^-2".into(),
                measure: n.into(),
                holds: mr.verdict == MaxRateVerdict::Holds,
                detail: format!("{} c = {:.6e}", mr.verdict, mr.c),
            });
        }
    }
    let find = |name: &str| profiles.iter().find(|(e, _)| e.name == name).map(|(_, p)| p).expect("catalog entry");
    let cantor = find("cantor");
    checks.push(expect("K1(q) strict in K2(q)", "cantor", &cantor.k2, Verdict::Member));
    checks.push(expect("K1(q) strict in K2(q)", "cantor", &cantor.k1, Verdict::NonMember));
    checks.push(expect("K2(q) => K4(q)", "cantor", &cantor.k4, Verdict::Member));
    let power = find("power-density");
    checks.push(expect("K2(q) strict in K4(q)", "power-density", &power.k4, Verdict::Member));
    checks.push(expect("K2(q) strict in K4(q)", "power-density", &power.k2, Verdict::NonMember));
    if q != 2.0 {
        checks.push(expect("K3(min(q,2)) not in K2(q)", "power-density", &power.k3_capped, Verdict::Member));
    }
    let plog = find("power-log");
    checks.push(expect("K4(q+p) strict in K2(q)", "power-log", &plog.k2, Verdict::Member));
    checks.push(expect("K4(q+p) strict in K2(q)", "power-log", &plog.k4_raised, Verdict::NonMember));
    Ok(InclusionReport { q, p, checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxRateVerdict {
    Holds,
    Degenerate,
    Inconclusive,
}

impl fmt::Display for MaxRateVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaxRateVerdict::Holds => "max-rate holds",
            MaxRateVerdict::Degenerate => "degenerate",
            MaxRateVerdict::Inconclusive => "inconclusive",
        })
    }
}

/// `max_{τ ∈ [T, 2T]} τ²·decay_norm(μ, τ)` for one dyadic window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateWindow {
    pub start: f64,
    pub max: f64,
    pub argmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxRateReport {
    pub verdict: MaxRateVerdict,
    /// Infimum of the window maxima.
    pub c: f64,
    pub windows: Vec<RateWindow>,
}

pub const WINDOW_POINTS: usize = 64;

/// Dyadic windows from `2π/inf|supp|` up to `t_max`; a positive floor on
/// the window maxima rules out `o(τ⁻²)` decay.
pub fn maximal_rate_check(mu: &SpectralMeasure, t_max: f64) -> Result<MaxRateReport> {
    let m = mu.without_origin();
    if m.total_mass() == 0.0 {
        return Ok(MaxRateReport {
            verdict: MaxRateVerdict::Degenerate,
            c: 0.0,
            windows: Vec::new(),
        });
    }
    let gap = m.support_gap();
    // Mass reaching the origin: start at a fixed scale instead.
    let start = if gap > 0.0 && gap.is_finite() { 2.0 * std::f64::consts::PI / gap } else { 1.0 };
    if !(t_max >= 2.0 * start) {
        return Err(crate::error::domain(format!("t_max must be at least {}, got {t_max}", 2.0 * start)));
    }
    let mut starts = Vec::new();
    let mut t = start;
    while 2.0 * t <= t_max * (1.0 + 1e-12) {
        starts.push(t);
        t *= 2.0;
    }
    let f = |tau: f64| decay_norm(&m, tau).map(|r| r.value * tau * tau).unwrap_or(f64::NAN);
    let windows: Vec<RateWindow> = starts
        .iter()
        .map(|&t| {
            let grid = log_grid(t, 2.0 * t, WINDOW_POINTS);
            let (argmax, max) = grid_sup(f, &grid);
            RateWindow { start: t, max, argmax }
        })
        .collect();
    let c = windows.iter().map(|w| w.max).fold(f64::INFINITY, f64::min);
    let last: Vec<f64> = windows.iter().rev().take(3).map(|w| w.max).collect();
    let collapsing = last.len() == 3 && last[0] < last[1] && last[1] < last[2] && last[0] < 0.5 * last[2];
    let verdict = if !(c > 0.0) || collapsing { MaxRateVerdict::Inconclusive } else { MaxRateVerdict::Holds };
    Ok(MaxRateReport { verdict, c, windows })
}
