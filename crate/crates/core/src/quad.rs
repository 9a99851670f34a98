//! Quadrature primitives: a globally adaptive Gauss–Kronrod (7/15) rule and
//! a geometric "shell" summation toward a singular endpoint that classifies
//! the partial-sum sequence as convergent or divergent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

/// Outcome classification of a numerical integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadStatus {
    Converged,
    Divergent,
    Inconclusive,
}

impl QuadStatus {
    /// The worse of two statuses (divergent > inconclusive > converged).
    pub fn combine(self, other: QuadStatus) -> QuadStatus {
        use QuadStatus::*;
        match (self, other) {
            (Divergent, _) | (_, Divergent) => Divergent,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Converged,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QuadStatus::Converged => "converged",
            QuadStatus::Divergent => "divergent",
            QuadStatus::Inconclusive => "inconclusive",
        }
    }
}

/// One point of a truncation trace: the truncation scale and the partial
/// value accumulated down to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub eps: f64,
    pub value: f64,
}

/// Integral value with an absolute error estimate and a status.
///
/// A `Divergent` result carries the last finite truncation in `value` and the
/// truncation sequence in `trace`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub status: QuadStatus,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TracePoint>,
}

impl QuadResult {
    pub fn exact(value: f64) -> Self {
        QuadResult {
            value,
            abs_err: 0.0,
            status: QuadStatus::Converged,
            trace: Vec::new(),
        }
    }

    pub fn divergent(value: f64, trace: Vec<TracePoint>) -> Self {
        QuadResult {
            value,
            abs_err: f64::INFINITY,
            status: QuadStatus::Divergent,
            trace,
        }
    }

    pub fn is_converged(&self) -> bool {
        self.status == QuadStatus::Converged
    }

    pub fn is_divergent(&self) -> bool {
        self.status == QuadStatus::Divergent
    }

    /// Value if converged, `+∞` if divergent, `None` if inconclusive.
    pub fn finite_value(&self) -> Option<f64> {
        match self.status {
            QuadStatus::Converged => Some(self.value),
            QuadStatus::Divergent => Some(f64::INFINITY),
            QuadStatus::Inconclusive => None,
        }
    }
}

/// Mixed absolute/relative tolerance: the target is `max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }

    pub(crate) fn scaled(&self, factor: f64) -> Self {
        Tolerance {
            abs: self.abs * factor,
            rel: self.rel,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::absolute(DEFAULT_TOL)
    }
}

pub const DEFAULT_TOL: f64 = 1e-10;
/// Maximum number of bisections applied to any single panel.
pub const MAX_BISECTIONS: u32 = 60;
const MAX_SUBDIVISIONS: usize = 4000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One application of the 15-point Kronrod rule with its embedded 7-point
/// Gauss rule; returns (kronrod estimate, |kronrod − gauss|).
pub(crate) fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
}

/// Outcome of a finite-interval integration.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Integral {
    pub value: f64,
    pub err: f64,
    pub converged: bool,
}

/// Globally adaptive GK15 on a finite interval: the panel with the largest
/// error estimate is bisected until the total error meets the tolerance.
pub(crate) fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: Tolerance) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            err: 0.0,
            converged: true,
        };
    }
    if a < b {
        adaptive_points(f, &[a, b], tol)
    } else {
        let r = adaptive_points(f, &[b, a], tol);
        Integral {
            value: -r.value,
            ..r
        }
    }
}

/// Globally adaptive GK15 over the panels delimited by the increasing
/// `points` (forced breakpoints).
pub(crate) fn adaptive_points<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: Tolerance) -> Integral {
    let mut panels: Vec<Panel> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (value, err) = gk15(f, w[0], w[1]);
            Panel {
                a: w[0],
                b: w[1],
                value,
                err,
                depth: 0,
            }
        })
        .collect();
    if panels.is_empty() {
        return Integral {
            value: 0.0,
            err: 0.0,
            converged: true,
        };
    }
    let max_panels = MAX_SUBDIVISIONS.max(4 * panels.len());
    let mut total: f64 = panels.iter().map(|p| p.value).sum();
    let mut err: f64 = panels.iter().map(|p| p.err).sum();
    let mut heap: BinaryHeap<ByErr> = panels
        .iter()
        .enumerate()
        .map(|(i, p)| ByErr(p.err, i))
        .collect();
    let mut abs_sum: f64 = panels.iter().map(|p| p.value.abs()).sum();
    loop {
        // Errors at the level of floating-point noise are not reducible.
        let floor = 64.0 * f64::EPSILON * abs_sum;
        if err <= tol.target(total).max(floor) || panels.len() >= max_panels || !total.is_finite() {
            break;
        }
        let Some(ByErr(_, i)) = heap.pop() else { break };
        let p = panels[i];
        let mid = 0.5 * (p.a + p.b);
        if p.depth >= MAX_BISECTIONS || mid <= p.a || mid >= p.b {
            continue;
        }
        let (lv, le) = gk15(f, p.a, mid);
        let (rv, re) = gk15(f, mid, p.b);
        total += lv + rv - p.value;
        err += le + re - p.err;
        abs_sum += lv.abs() + rv.abs() - p.value.abs();
        panels[i] = Panel {
            a: p.a,
            b: mid,
            value: lv,
            err: le,
            depth: p.depth + 1,
        };
        heap.push(ByErr(le, i));
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: rv,
            err: re,
            depth: p.depth + 1,
        });
        heap.push(ByErr(re, panels.len() - 1));
    }
    // Re-sum to shed the drift of incremental updates.
    let total: f64 = panels.iter().map(|p| p.value).sum();
    let err: f64 = panels.iter().map(|p| p.err).sum();
    let floor = 64.0 * f64::EPSILON * panels.iter().map(|p| p.value.abs()).sum::<f64>();
    Integral {
        value: total,
        err,
        converged: err <= tol.target(total).max(floor) && total.is_finite(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ByErr(f64, usize);

impl Eq for ByErr {}

impl PartialOrd for ByErr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByErr {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Partial sums of nonnegative-kernel shells approaching a singular point.
#[derive(Debug, Clone)]
pub struct ShellSum {
    pub value: f64,
    pub err: f64,
    pub status: QuadStatus,
    pub trace: Vec<TracePoint>,
}

/// One shell: its distance to the singular point, its value and error.
pub(crate) struct Shell {
    pub eps: f64,
    pub value: f64,
    pub err: f64,
}

/// Minimum shell index after which divergence may be declared.
const DIVERGENCE_START: usize = 20;
/// Number of consecutive growing increments required for divergence.
const DIVERGENCE_RUN: usize = 8;
/// Algebraic decay exponent at or below which increments are non-summable.
const HARMONIC_EXPONENT: f64 = 1.05;

/// Sums shells `k = 0, 1, 2, …` produced by `shell(k)` (which returns `None`
/// once the shells can no longer be resolved in floating point).
///
/// Convergence: increments that decay geometrically are summed until the
/// extrapolated geometric remainder falls below the tolerance. Divergence:
/// after shell 20, eight consecutive increments exceed the absolute tolerance
/// and their algebraic decay exponent is at most ~1, so the increments are not
/// summable (log or power divergence).
pub(crate) fn sum_shells<S>(mut shell: S, tol: Tolerance, max_shells: usize) -> ShellSum
where
    S: FnMut(usize) -> Option<Shell>,
{
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut incs: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    let mut status = None;
    let mut tail = 0.0;
    let mut tail_err = 0.0;
    for k in 0..max_shells {
        let Some(s) = shell(k) else { break };
        sum += s.value;
        err += s.err;
        incs.push(s.value.abs());
        trace.push(TracePoint {
            eps: s.eps,
            value: sum,
        });
        let target = tol.target(sum);
        let n = incs.len();
        if n >= 4 {
            let d = incs[n - 1];
            let dp = incs[n - 2];
            let dpp = incs[n - 3];
            if d == 0.0 && dp == 0.0 {
                status = Some(QuadStatus::Converged);
                break;
            }
            if dp > 0.0 && dpp > 0.0 {
                let r = d / dp;
                let r_prev = dp / dpp;
                if r < 0.97 {
                    let est = d * r / (1.0 - r);
                    let spread = (r - r_prev).abs();
                    let est_err = d * spread / ((1.0 - r) * (1.0 - r)) + 1e-3 * est;
                    if est + est_err <= 0.1 * target || (n >= 8 && est_err <= 0.1 * target) {
                        tail = est;
                        tail_err = est_err;
                        status = Some(QuadStatus::Converged);
                        break;
                    }
                }
            }
        }
        if n > DIVERGENCE_START.max(DIVERGENCE_RUN) {
            let window = &incs[n - DIVERGENCE_RUN..];
            let all_large = window.iter().all(|&d| d > tol.abs);
            if all_large {
                let first = window[0];
                let last = window[DIVERGENCE_RUN - 1];
                let k0 = (n - DIVERGENCE_RUN) as f64;
                let k1 = (n - 1) as f64;
                let beta = -(last / first).ln() / (k1 / k0).ln();
                if beta <= HARMONIC_EXPONENT {
                    status = Some(QuadStatus::Divergent);
                    break;
                }
            }
        }
    }
    let status = match status {
        Some(s) => s,
        None => {
            // Shells exhausted: accept if the last increments are negligible.
            let n = incs.len();
            let last = incs.last().copied().unwrap_or(0.0);
            if n >= 2 && incs[n - 2] > 0.0 && last / incs[n - 2] < 0.97 {
                let r = last / incs[n - 2];
                tail = last * r / (1.0 - r);
                tail_err = tail;
            } else {
                tail_err = last * n as f64;
            }
            if err + tail_err <= tol.target(sum) {
                QuadStatus::Converged
            } else {
                QuadStatus::Inconclusive
            }
        }
    };
    match status {
        QuadStatus::Divergent => ShellSum {
            value: sum,
            err: f64::INFINITY,
            status,
            trace,
        },
        _ => ShellSum {
            value: sum + tail,
            err: err + tail_err,
            status,
            trace,
        },
    }
}

/// Integrates `f` over the interval between `singular` and `far`, refining
/// geometrically toward `singular` where `f` may blow up.
pub(crate) fn integrate_toward<F: Fn(f64) -> f64>(
    f: &F,
    singular: f64,
    far: f64,
    tol: Tolerance,
) -> ShellSum {
    let h = far - singular;
    let shell_tol = tol.scaled(1.0 / 64.0);
    sum_shells(
        |k| {
            let outer = singular + h * 0.5f64.powi(k as i32);
            let inner = singular + h * 0.5f64.powi(k as i32 + 1);
            if inner == singular || inner == outer || !inner.is_finite() {
                return None;
            }
            let piece = adaptive(f, inner.min(outer), inner.max(outer), shell_tol);
            if !piece.value.is_finite() {
                return None;
            }
            Some(Shell {
                eps: (inner - singular).abs(),
                value: piece.value,
                err: piece.err,
            })
        },
        tol,
        1100,
    )
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if (b - a).abs() <= 1e-9 * (a.abs() + b.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Logarithmically spaced grid with `n` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (l0, l1) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}
