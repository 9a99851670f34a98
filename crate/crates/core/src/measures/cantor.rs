use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::{Atom, SpectralMeasure};
use crate::error::{Error, Result};
use crate::quad::{sum_shells, QuadResult, QuadStatus, Shell, Tolerance};

/// Deepest generation `atomize` will build (2^depth atoms).
pub const MAX_ATOMIZATION_DEPTH: u32 = 40;
/// Recursion cap for adaptive Cantor integration.
const MAX_DEPTH: u32 = 40;
const MAX_CLIP_DEPTH: u32 = 640;
/// Half-spread of the two-node rule: the standard deviation of the Cantor
/// measure on a unit interval is `1/(2√2)`.
const SPREAD: f64 = 0.353_553_390_593_273_8;

/// `weight·x^q dk(x)` with `k` the Cantor staircase rescaled to `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorComponent {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(w: &f64) -> bool {
    *w == 1.0
}

impl CantorComponent {
    pub fn new(a: f64, b: f64, q: f64) -> Self {
        CantorComponent { a, b, q, weight: 1.0 }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && 0.0 <= self.a && self.a < self.b) {
            return Err(Error::InvalidMeasure(format!(
                "Cantor base must satisfy 0 <= a < b < inf, got [{}, {}]",
                self.a, self.b
            )));
        }
        if !(self.q.is_finite() && self.q >= 0.0) {
            return Err(Error::InvalidMeasure(format!("Cantor weight exponent q must be >= 0, got {}", self.q)));
        }
        if !(self.weight.is_finite() && self.weight >= 0.0) {
            return Err(Error::InvalidMeasure(format!("Cantor weight must be >= 0, got {}", self.weight)));
        }
        Ok(())
    }

    fn len(&self) -> f64 {
        self.b - self.a
    }

    /// The rescaled staircase `k([a, x])`.
    pub fn staircase(&self, x: f64) -> f64 {
        let mut y = (x - self.a) / self.len();
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        let mut acc = 0.0;
        let mut step = 0.5;
        for _ in 0..64 {
            y *= 3.0;
            if y < 1.0 {
            } else if y < 2.0 {
                return acc + step;
            } else {
                acc += step;
                y -= 2.0;
            }
            step *= 0.5;
        }
        acc
    }

    fn density_weight(&self, x: f64) -> f64 {
        if self.q == 0.0 {
            self.weight
        } else {
            self.weight * x.powf(self.q)
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Mass on `(lo, hi]`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        if !(lo < hi) || self.weight == 0.0 {
            return 0.0;
        }
        if self.q == 0.0 {
            return self.weight * (self.staircase(hi) - self.staircase(lo));
        }
        let f = |x: f64| self.density_weight(x);
        let mut st = Stats {
            rel_tol: 1e-14,
            ..Stats::default()
        };
        clipped(&f, self.a, self.len(), 1.0, 0, lo, hi, 1e-15 * self.weight, 0, self, &mut st)
    }

    /// `∫_{(lo,hi]} g·weight·x^q dk`.
    pub(crate) fn integrate<K: Kernel + ?Sized>(&self, kernel: &K, lo: f64, hi: f64, tol: Tolerance) -> QuadResult {
        if self.weight == 0.0 || hi <= self.a || lo >= self.b {
            return QuadResult::exact(0.0);
        }
        let f = |x: f64| kernel.eval(x) * self.density_weight(x);
        let min_depth = depth_for_scale(self.len(), kernel.scale());
        let singular_left = lo < self.a + f64::EPSILON * self.len()
            && kernel.singularities().iter().any(|&s| s == self.a);
        if !singular_left {
            let mut st = Stats::default();
            let v = clipped(&f, self.a, self.len(), 1.0, 0, lo, hi, tol.abs, min_depth, self, &mut st);
            return st.result(v, tol);
        }
        // Geometric shells toward the left end: the right child of the
        // leftmost generation-k interval has k-mass 2^{-k-1}.
        let len = self.len();
        let shell_tol = tol.abs / 64.0;
        let mut inconclusive = false;
        let sum = sum_shells(
            |k| {
                let node_len = len * 3f64.powi(-(k as i32) - 1);
                let start = self.a + 2.0 * node_len;
                if node_len < f64::MIN_POSITIVE * 1e10 || start == self.a {
                    return None;
                }
                let mass = 0.5f64.powi(k as i32 + 1);
                let mut st = Stats::default();
                let local_min = depth_for_scale(node_len, kernel.scale());
                let v = clipped(&f, start, node_len, mass, 0, lo, hi, shell_tol, local_min, self, &mut st);
                inconclusive |= st.stalled;
                Some(Shell {
                    eps: start - self.a,
                    value: v,
                    err: st.err,
                })
            },
            tol,
            660,
        );
        let mut status = sum.status;
        if inconclusive && status == QuadStatus::Converged {
            status = QuadStatus::Inconclusive;
        }
        QuadResult {
            value: sum.value,
            abs_err: sum.err,
            status,
            trace: if status == QuadStatus::Divergent { sum.trace } else { Vec::new() },
        }
    }

    /// The `2^depth` closed intervals of generation `depth`, left to right.
    pub fn generation_intervals(&self, depth: u32) -> Vec<(f64, f64)> {
        let n = 1u64 << depth;
        let step = self.len() * 3f64.powi(-(depth as i32));
        (0..n).map(|i| {
            let left = self.a + self.len() * ternary_offset(i, depth);
            (left, left + step)
        })
        .collect()
    }

    /// The generation-`depth` midpoint atoms, each with k-mass 2^{-depth}.
    pub fn atomize(&self, depth: u32) -> Result<SpectralMeasure> {
        if depth > MAX_ATOMIZATION_DEPTH {
            return Err(Error::Domain(format!(
                "atomization depth {depth} exceeds the maximum {MAX_ATOMIZATION_DEPTH}"
            )));
        }
        let k_mass = 0.5f64.powi(depth as i32);
        let atoms = self
            .generation_intervals(depth)
            .into_iter()
            .map(|(l, r)| {
                let x = 0.5 * (l + r);
                Atom {
                    x,
                    mass: self.density_weight(x) * k_mass,
                }
            })
            .collect();
        SpectralMeasure::new(atoms, Vec::new(), Vec::new())
    }

    /// Total mass of `atomize(depth)` without materializing the atoms.
    pub fn atomized_mass(&self, depth: u32) -> f64 {
        let k_mass = 0.5f64.powi(depth as i32);
        let step = self.len() * 3f64.powi(-(depth as i32));
        (0..1u64 << depth)
            .map(|i| {
                let x = self.a + self.len() * ternary_offset(i, depth) + 0.5 * step;
                self.density_weight(x)
            })
            .sum::<f64>()
            * k_mass
    }
}

/// Left offset (relative to a unit base) of the `i`-th generation-`depth`
/// interval: binary digits of `i` become ternary digits 0/2.
fn ternary_offset(i: u64, depth: u32) -> f64 {
    let mut off = 0.0;
    let mut scale = 1.0;
    for bit in (0..depth).rev() {
        scale /= 3.0;
        if (i >> bit) & 1 == 1 {
            off += 2.0 * scale;
        }
    }
    off
}

/// Depth at which generation intervals fall below half the oscillation
/// scale of the kernel.
fn depth_for_scale(len: f64, scale: f64) -> u32 {
    if !scale.is_finite() || scale <= 0.0 {
        return 0;
    }
    let ratio = 2.0 * len / scale;
    if ratio <= 1.0 {
        0
    } else {
        (ratio.ln() / 3f64.ln()).ceil().min(MAX_DEPTH as f64) as u32
    }
}

#[derive(Default)]
struct Stats {
    err: f64,
    stalled: bool,
    /// When positive, each node is resolved relative to its own size.
    rel_tol: f64,
}

impl Stats {
    fn result(&self, v: f64, tol: Tolerance) -> QuadResult {
        let status = if self.stalled && self.err > tol.target(v) {
            QuadStatus::Inconclusive
        } else {
            QuadStatus::Converged
        };
        QuadResult {
            value: v,
            abs_err: self.err,
            status,
            trace: Vec::new(),
        }
    }
}

fn two_node(f: &dyn Fn(f64) -> f64, u: f64, len: f64, mass: f64) -> f64 {
    let mid = u + 0.5 * len;
    let h = SPREAD * len;
    0.5 * mass * (f(mid - h) + f(mid + h))
}

/// Adaptive two-node rule on the node `[u, u+len]` carrying k-mass `mass`.
#[allow(clippy::too_many_arguments)]
fn node(f: &dyn Fn(f64) -> f64, u: f64, len: f64, mass: f64, depth: u32, tol: f64, min_depth: u32, st: &mut Stats) -> f64 {
    let coarse = two_node(f, u, len, mass);
    let third = len / 3.0;
    let fine = two_node(f, u, third, 0.5 * mass) + two_node(f, u + 2.0 * third, third, 0.5 * mass);
    let diff = (fine - coarse).abs();
    if (depth >= min_depth && diff <= tol) || depth >= MAX_DEPTH || diff <= 1e-17 * fine.abs() && depth >= min_depth {
        if depth >= MAX_DEPTH && diff > tol {
            st.stalled = true;
        }
        st.err += diff / 80.0;
        return fine + (fine - coarse) / 80.0;
    }
    node(f, u, third, 0.5 * mass, depth + 1, 0.5 * tol, min_depth, st)
        + node(f, u + 2.0 * third, third, 0.5 * mass, depth + 1, 0.5 * tol, min_depth, st)
}

/// Integral over the node restricted to `(lo, hi]`.
#[allow(clippy::too_many_arguments)]
fn clipped(
    f: &dyn Fn(f64) -> f64,
    u: f64,
    len: f64,
    mass: f64,
    depth: u32,
    lo: f64,
    hi: f64,
    tol: f64,
    min_depth: u32,
    comp: &CantorComponent,
    st: &mut Stats,
) -> f64 {
    let v = u + len;
    if v <= lo || u > hi {
        return 0.0;
    }
    if u > lo && v <= hi {
        let tol = if st.rel_tol > 0.0 {
            (st.rel_tol * mass * f(u + 0.5 * len).abs()).max(f64::MIN_POSITIVE)
        } else {
            tol
        };
        return node(f, u, len, mass, 0, tol, min_depth.saturating_sub(depth), st);
    }
    // Only the (at most two) nodes straddling lo or hi reach this point, so
    // the boundary path may run far deeper than the interior recursion.
    if depth >= MAX_CLIP_DEPTH || len < 1e-300 {
        let frac = (comp.staircase(v.min(hi)) - comp.staircase(u.max(lo))) / (comp.staircase(v) - comp.staircase(u)).max(f64::MIN_POSITIVE);
        return mass * frac.clamp(0.0, 1.0) * f(u + 0.5 * len);
    }
    let third = len / 3.0;
    clipped(f, u, third, 0.5 * mass, depth + 1, lo, hi, 0.5 * tol, min_depth, comp, st)
        + clipped(f, u + 2.0 * third, third, 0.5 * mass, depth + 1, lo, hi, 0.5 * tol, min_depth, comp, st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Domain, FnKernel, PowerKernel};

    #[test]
    fn staircase_values() {
        let c = CantorComponent::new(0.0, 1.0, 0.0);
        assert_eq!(c.staircase(1.0 / 3.0), 0.5);
        assert_eq!(c.staircase(0.5), 0.5);
        assert_eq!(c.staircase(2.0 / 3.0), 0.5);
        assert!((c.staircase(0.25) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(c.staircase(-1.0), 0.0);
        assert_eq!(c.staircase(2.0), 1.0);
    }

    #[test]
    fn first_generation_atoms() {
        let c = CantorComponent::new(0.0, 1.0, 0.0);
        let m = c.atomize(1).unwrap();
        let a = m.atoms();
        assert_eq!(a.len(), 2);
        assert!((a[0].x - 1.0 / 6.0).abs() < 1e-15 && (a[1].x - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(a[0].mass, 0.5);
        let c1 = CantorComponent::new(0.0, 1.0, 1.0);
        let a = c1.atomize(1).unwrap();
        assert!((a.atoms()[0].mass - 1.0 / 12.0).abs() < 1e-15);
        assert!((a.atoms()[1].mass - 5.0 / 12.0).abs() < 1e-15);
        assert!(c.atomize(41).is_err());
    }

    #[test]
    fn atomized_mass_matches_atoms() {
        let c = CantorComponent::new(0.0, 1.0, 1.5);
        assert!((c.atomize(8).unwrap().total_mass() - c.atomized_mass(8)).abs() < 1e-14);
    }

    #[test]
    fn mean_of_cantor_measure_is_midpoint() {
        let c = CantorComponent::new(0.0, 1.0, 1.0);
        assert!((c.total_mass() - 0.5).abs() < 1e-14);
        // Second moment of the Cantor measure is 3/8.
        let c2 = CantorComponent::new(0.0, 1.0, 2.0);
        assert!((c2.total_mass() - 0.375).abs() < 1e-14);
    }

    #[test]
    fn weighted_tail_moment_is_one() {
        let q = 1.3;
        let m = SpectralMeasure::from_cantor(CantorComponent::new(0.0, 1.0, q)).unwrap();
        let r = m.tail_moment(q).unwrap();
        assert!(r.is_converged());
        assert!((r.value - 1.0).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn strong_singularity_diverges() {
        // ∫ x^{-1} dk diverges: ½·3 > 1.
        let m = SpectralMeasure::from_cantor(CantorComponent::new(0.0, 1.0, 0.0)).unwrap();
        let r = m.integrate_kernel(&PowerKernel::new(-1.0), Domain::punctured_line(), Tolerance::default());
        assert!(r.is_divergent());
        // ∫ x^{-0.5} dk converges: ½·√3 < 1, value R/(1 − ½·3^{1/2}).
        let r = m.integrate_kernel(&PowerKernel::new(-0.5), Domain::punctured_line(), Tolerance::absolute(1e-12));
        assert!(r.is_converged());
        assert!(r.value > 1.0);
    }

    #[test]
    fn interval_mass_additivity() {
        let c = CantorComponent::new(0.5, 2.0, 1.7);
        let total = c.mass(0.0, 3.0);
        let split = c.mass(0.0, 1.1) + c.mass(1.1, 3.0);
        assert!((total - split).abs() < 1e-12 * total);
    }

    #[test]
    fn atomization_agrees_with_lipschitz_kernel() {
        let c = CantorComponent::new(0.0, 1.0, 1.0);
        let m = SpectralMeasure::from_cantor(c).unwrap();
        let k = FnKernel::new(|x: f64| (3.0 * x).sin(), 1.0);
        let exact = m.integrate_kernel(&k, Domain::line(), Tolerance::absolute(1e-13)).value;
        for n in [4u32, 8, 12] {
            let atoms = c.atomize(n).unwrap();
            let approx = atoms.integrate_kernel(&k, Domain::line(), Tolerance::default()).value;
            // Lipschitz constant of sin(3x)·x on [0,1] is at most 4.
            assert!((approx - exact).abs() <= 4.0 * 3f64.powi(-(n as i32)) * c.total_mass() + 1e-13);
        }
    }
}
