//! Finite Borel measures on the real line: atoms, closed-form or tabulated
//! density segments, and weighted Cantor components.

mod cantor;
mod file;
mod kernel;
mod segment;

pub use cantor::{CantorComponent, MAX_ATOMIZATION_DEPTH};
pub use file::MeasureSpec;
pub use kernel::{Fejer, FnKernel, Kernel, PowerForm, PowerKernel};
pub use segment::{Family, Segment};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive_points, integrate_toward, QuadResult, QuadStatus, Tolerance};

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// Integration domain `(lo, hi]`, optionally with the origin removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub punctured: bool,
}

impl Domain {
    /// `ℝ ∖ {0}`.
    pub fn punctured_line() -> Self {
        Domain {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            punctured: true,
        }
    }

    pub fn line() -> Self {
        Domain {
            punctured: false,
            ..Domain::punctured_line()
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Domain {
            lo,
            hi,
            punctured: false,
        }
    }

    fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi && !(self.punctured && x == 0.0)
    }
}

/// A finite measure: atoms + density segments + Cantor components.
///
/// Values are validated on construction and immutable afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureSpec", into = "MeasureSpec")]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
    segments: Vec<Segment>,
    cantor: Vec<CantorComponent>,
}

impl SpectralMeasure {
    pub fn new(atoms: Vec<Atom>, segments: Vec<Segment>, cantor: Vec<CantorComponent>) -> Result<Self> {
        for a in &atoms {
            if !a.x.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom location must be finite, got {}", a.x)));
            }
            if !(a.mass.is_finite() && a.mass >= 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "atom mass must be finite and >= 0, got {} at x = {}",
                    a.mass, a.x
                )));
            }
        }
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        let mut sorted = atoms;
        sorted.sort_by(|p, q| p.x.total_cmp(&q.x));
        for a in sorted {
            match merged.last_mut() {
                Some(last) if last.x == a.x => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        for s in &segments {
            s.validate()?;
        }
        let mut segs = segments;
        segs.sort_by(|p, q| p.a.total_cmp(&q.a));
        for w in segs.windows(2) {
            if w[1].a < w[0].b {
                return Err(Error::InvalidMeasure(format!(
                    "segments ({}, {}] and ({}, {}] overlap",
                    w[0].a, w[0].b, w[1].a, w[1].b
                )));
            }
        }
        for c in &cantor {
            c.validate()?;
        }
        Ok(SpectralMeasure {
            atoms: merged,
            segments: segs,
            cantor,
        })
    }

    pub fn zero() -> Self {
        SpectralMeasure {
            atoms: Vec::new(),
            segments: Vec::new(),
            cantor: Vec::new(),
        }
    }

    pub fn atom(x: f64, mass: f64) -> Result<Self> {
        Self::new(vec![Atom { x, mass }], Vec::new(), Vec::new())
    }

    pub fn from_segment(s: Segment) -> Result<Self> {
        Self::new(Vec::new(), vec![s], Vec::new())
    }

    pub fn from_cantor(c: CantorComponent) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), vec![c])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn cantor(&self) -> &[CantorComponent] {
        &self.cantor
    }

    /// Sum of two measures (segments must stay disjoint).
    pub fn plus(&self, other: &SpectralMeasure) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        let mut cantor = self.cantor.clone();
        cantor.extend(other.cantor.iter().cloned());
        Self::new(atoms, segments, cantor)
    }

    /// `c·μ` for `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Domain(format!("scale factor must be finite and >= 0, got {c}")));
        }
        let atoms = self.atoms.iter().map(|a| Atom { x: a.x, mass: a.mass * c }).collect();
        let segments = self
            .segments
            .iter()
            .map(|s| Segment { c: s.c * c, ..s.clone() })
            .collect();
        let cantor = self
            .cantor
            .iter()
            .map(|k| CantorComponent {
                weight: k.weight * c,
                ..*k
            })
            .collect();
        Self::new(atoms, segments, cantor)
    }

    /// The measure with any atom at the origin removed.
    pub fn without_origin(&self) -> Self {
        let mut m = self.clone();
        m.atoms.retain(|a| a.x != 0.0);
        m
    }

    pub fn origin_mass(&self) -> f64 {
        self.atom_mass_at(0.0)
    }

    pub fn atom_mass_at(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.x == x).map(|a| a.mass).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.interval_mass(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `μ(ℝ ∖ {0})`.
    pub fn mass_off_origin(&self) -> f64 {
        self.total_mass() - self.origin_mass()
    }

    /// `μ(a, b]`; zero when `a ≥ b`.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        let atoms: f64 = self.atoms.iter().filter(|t| t.x > a && t.x <= b).map(|t| t.mass).sum();
        let segs: f64 = self.segments.iter().map(|s| s.mass(a, b)).sum();
        let cant: f64 = self.cantor.iter().map(|c| c.mass(a, b)).sum();
        atoms + segs + cant
    }

    /// `μ[a, b]`.
    pub fn closed_mass(&self, a: f64, b: f64) -> f64 {
        self.interval_mass(a, b) + self.atom_mass_at(a)
    }

    /// Sum of the segment densities at `x`.
    pub fn density(&self, x: f64) -> f64 {
        self.segments.iter().map(|s| s.density(x)).sum()
    }

    /// Finite points where the measure changes character: atom locations,
    /// segment endpoints and Cantor base endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.atoms.iter().map(|a| a.x).collect();
        for s in &self.segments {
            pts.extend([s.a, s.b].into_iter().filter(|x| x.is_finite()));
        }
        for c in &self.cantor {
            pts.extend([c.a, c.b]);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `sup |x|` over the support (may be infinite); 0 for the zero measure.
    pub fn support_radius(&self) -> f64 {
        let mut r = 0.0f64;
        for a in self.atoms.iter().filter(|a| a.mass > 0.0) {
            r = r.max(a.x.abs());
        }
        for s in self.segments.iter().filter(|s| s.c > 0.0) {
            r = r.max(s.a.abs()).max(s.b.abs());
        }
        for c in self.cantor.iter().filter(|c| c.weight > 0.0) {
            r = r.max(c.b);
        }
        r
    }

    /// `inf |x|` over the support off the origin; infinite if there is none.
    pub fn support_gap(&self) -> f64 {
        let mut r = f64::INFINITY;
        for a in self.atoms.iter().filter(|a| a.mass > 0.0 && a.x != 0.0) {
            r = r.min(a.x.abs());
        }
        for s in self.segments.iter().filter(|s| s.c > 0.0) {
            let d = if s.a <= 0.0 && s.b >= 0.0 { 0.0 } else { s.a.abs().min(s.b.abs()) };
            r = r.min(d);
        }
        for c in self.cantor.iter().filter(|c| c.weight > 0.0) {
            r = r.min(c.a);
        }
        r
    }

    /// `∫_domain g dμ`. Atoms are summed exactly, segments are integrated
    /// adaptively (closed form for power kernels on power-log densities),
    /// Cantor components by self-similar recursion.
    pub fn integrate_kernel<K: Kernel + ?Sized>(&self, kernel: &K, domain: Domain, tol: Tolerance) -> QuadResult {
        let sing = kernel.singularities();
        let mut total = QuadResult::exact(0.0);
        let mut atom_blowup = false;
        for a in self.atoms.iter().filter(|a| domain.contains(a.x) && a.mass > 0.0) {
            if sing.contains(&a.x) {
                atom_blowup = true;
                continue;
            }
            total.value += a.mass * kernel.eval(a.x);
        }
        let parts = (self.segments.len() + self.cantor.len()).max(1) as f64;
        let part_tol = tol.scaled(1.0 / parts);
        for s in &self.segments {
            total = accumulate(total, s.integrate(kernel, domain.lo, domain.hi, part_tol));
        }
        for c in &self.cantor {
            total = accumulate(total, c.integrate(kernel, domain.lo, domain.hi, part_tol));
        }
        if atom_blowup {
            total.status = QuadStatus::Divergent;
            total.abs_err = f64::INFINITY;
        }
        if total.status == QuadStatus::Converged && total.abs_err > tol.target(total.value) {
            total.status = QuadStatus::Inconclusive;
        }
        total
    }

    /// `∫_{ℝ∖{0}} |x|^{−q} dμ`.
    pub fn tail_moment(&self, q: f64) -> Result<QuadResult> {
        self.tail_moment_tol(q, Tolerance::default())
    }

    pub fn tail_moment_tol(&self, q: f64, tol: Tolerance) -> Result<QuadResult> {
        if !(q.is_finite() && q >= 0.0) {
            return Err(Error::Domain(format!("tail moment order must be >= 0, got {q}")));
        }
        Ok(self.integrate_kernel(&PowerKernel::new(-q), Domain::punctured_line(), tol))
    }

    /// Parses the JSON measure schema.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure serialization cannot fail")
    }
}

/// Adds two partial results; a divergence trace is shifted by the other
/// part's value so it stays a trace of truncated totals.
pub(crate) fn accumulate(a: QuadResult, b: QuadResult) -> QuadResult {
    let shift = |mut t: Vec<crate::quad::TracePoint>, by: f64| {
        for p in &mut t {
            p.value += by;
        }
        t
    };
    let trace = if !b.trace.is_empty() && b.status == QuadStatus::Divergent {
        shift(b.trace, if a.status == QuadStatus::Divergent { 0.0 } else { a.value })
    } else if !a.trace.is_empty() {
        shift(a.trace, if b.status == QuadStatus::Divergent { 0.0 } else { b.value })
    } else {
        Vec::new()
    };
    QuadResult {
        value: a.value + b.value,
        abs_err: a.abs_err + b.abs_err,
        status: a.status.combine(b.status),
        trace,
    }
}

/// Which ends of an interval may carry an integrable (or divergent)
/// singularity.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PieceEnds {
    pub lo_singular: bool,
    pub hi_singular: bool,
}

/// `∫_lo^hi h` on a finite interval with forced interior breakpoints;
/// singular ends are approached by geometric shells.
pub(crate) fn integrate_interval(
    h: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    ends: PieceEnds,
    tol: Tolerance,
) -> QuadResult {
    let mut pts = Vec::with_capacity(breaks.len() + 3);
    pts.push(lo);
    pts.extend(breaks.iter().copied().filter(|&x| x > lo && x < hi));
    pts.push(hi);
    if ends.lo_singular && ends.hi_singular && pts.len() == 2 {
        pts.insert(1, 0.5 * (lo + hi));
    }
    let n = pts.len() - 1;
    let third = tol.scaled(1.0 / 3.0);
    let mut first = 0;
    let mut last = n;
    let mut out = QuadResult::exact(0.0);
    if ends.lo_singular {
        let s = integrate_toward(&h, pts[0], pts[1], third);
        out = accumulate(out, shell_result(s));
        first = 1;
    }
    if ends.hi_singular && last > first {
        let s = integrate_toward(&h, pts[n], pts[n - 1], third);
        out = accumulate(out, shell_result(s));
        last = n - 1;
    }
    if last > first {
        let r = adaptive_points(&h, &pts[first..=last], third);
        let status = if r.converged {
            QuadStatus::Converged
        } else {
            QuadStatus::Inconclusive
        };
        out = accumulate(
            out,
            QuadResult {
                value: r.value,
                abs_err: r.err,
                status,
                trace: Vec::new(),
            },
        );
    }
    out
}

fn shell_result(s: crate::quad::ShellSum) -> QuadResult {
    QuadResult {
        value: s.value,
        abs_err: s.err,
        status: s.status,
        trace: s.trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> SpectralMeasure {
        SpectralMeasure::from_segment(Segment::constant(0.0, 1.0, 1.0)).unwrap()
    }

    #[test]
    fn half_open_convention() {
        let m = SpectralMeasure::atom(1.0, 2.0).unwrap();
        assert_eq!(m.interval_mass(0.0, 1.0), 2.0);
        assert_eq!(m.interval_mass(1.0, 2.0), 0.0);
        assert_eq!(m.closed_mass(1.0, 2.0), 2.0);
        assert_eq!(m.interval_mass(2.0, 1.0), 0.0);
    }

    #[test]
    fn example_power_window_mass() {
        let (a, b, alpha) = (0.5, 2.0, 1.0);
        let m = SpectralMeasure::from_segment(Segment::power(a, b, 1.0, alpha)).unwrap();
        let d: f64 = 1.3;
        let expected = (d.powf(alpha + 1.0) - a.powf(alpha + 1.0)) / (alpha + 1.0);
        assert!((m.interval_mass(-d, d) - expected).abs() < 1e-15);
    }

    #[test]
    fn atoms_merge_and_validate() {
        let m = SpectralMeasure::new(
            vec![Atom { x: 1.0, mass: 1.0 }, Atom { x: 1.0, mass: 0.5 }],
            Vec::new(),
            Vec::new(),
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_eq!(m.total_mass(), 1.5);
        assert!(SpectralMeasure::atom(0.0, -1.0).is_err());
        assert!(SpectralMeasure::atom(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn overlapping_segments_rejected() {
        let r = SpectralMeasure::new(
            Vec::new(),
            vec![Segment::constant(0.0, 1.0, 1.0), Segment::constant(0.5, 2.0, 1.0)],
            Vec::new(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn atom_kernel_is_exact() {
        let m = SpectralMeasure::atom(0.7, 3.0).unwrap();
        let k = FnKernel::new(|x: f64| x.cos(), 1.0);
        let r = m.integrate_kernel(&k, Domain::line(), Tolerance::default());
        assert_eq!(r.value, 3.0 * 0.7f64.cos());
        assert!(r.is_converged());
    }

    #[test]
    fn punctured_domain_drops_origin_atom() {
        let m = SpectralMeasure::atom(0.0, 1.0).unwrap();
        let r = m.integrate_kernel(&Fejer::new(1.0), Domain::punctured_line(), Tolerance::default());
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn fejer_on_uniform_matches_direct_quadrature() {
        let m = uniform();
        let tau = 37.0;
        let r = m.integrate_kernel(&Fejer::new(tau), Domain::punctured_line(), Tolerance::absolute(1e-13));
        let direct = crate::quad::adaptive(
            &|x: f64| crate::kernels::fejer(tau, x),
            0.0,
            1.0,
            Tolerance::absolute(1e-14),
        );
        assert!(r.is_converged());
        assert!((r.value - direct.value).abs() < 1e-12);
    }

    #[test]
    fn tail_moment_examples() {
        let harmonic = SpectralMeasure::from_segment(Segment::power(0.0, 1.0, 1.0, 0.5 - 1.0)).unwrap();
        let r = harmonic.tail_moment(0.5).unwrap();
        assert!(r.is_divergent());
        assert!(r.trace.len() >= 8);
        let loglaw = SpectralMeasure::from_segment(Segment::power_log(0.0, 0.5, 1.0, 0.3 - 1.0, -2.0)).unwrap();
        let r = loglaw.tail_moment(0.3).unwrap();
        assert!(r.is_converged());
        assert!((r.value - 1.0 / 2f64.ln()).abs() < 1e-12);
        let atom = SpectralMeasure::atom(-2.0, 3.0).unwrap();
        assert!((atom.tail_moment(1.5).unwrap().value - 3.0 * 2f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn numeric_path_detects_divergence_for_general_log_exponent() {
        // x^{-1}|ln x|^{-1/2} near 0 is not integrable.
        let m = SpectralMeasure::from_segment(Segment::power_log(0.0, 0.5, 1.0, 0.0, -0.5)).unwrap();
        let r = m.tail_moment(1.0).unwrap();
        assert!(r.is_divergent(), "{:?}", r.status);
    }

    #[test]
    fn unbounded_segment_fejer_tail() {
        let m = SpectralMeasure::from_segment(Segment::power(1.0, f64::INFINITY, 1.0, -2.0)).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-15);
        let tau = 3.0;
        let r = m.integrate_kernel(&Fejer::new(tau), Domain::punctured_line(), Tolerance::absolute(1e-10));
        // Direct: substitute x = 1/t on (0, 1].
        let direct = crate::quad::adaptive(
            &|t: f64| if t == 0.0 { 0.0 } else { crate::kernels::fejer(tau, 1.0 / t) },
            0.0,
            1.0,
            Tolerance::absolute(1e-13),
        );
        assert!((r.value - direct.value).abs() < 1e-9, "{} {}", r.value, direct.value);
    }

    #[test]
    fn scaling_and_origin_removal() {
        let m = SpectralMeasure::new(
            vec![Atom { x: 0.0, mass: 1.0 }, Atom { x: 2.0, mass: 1.0 }],
            vec![Segment::constant(0.0, 1.0, 2.0)],
            Vec::new(),
        )
        .unwrap();
        assert_eq!(m.scaled(3.0).unwrap().total_mass(), 12.0);
        assert_eq!(m.without_origin().total_mass(), 3.0);
        assert_eq!(m.mass_off_origin(), 3.0);
    }
}
