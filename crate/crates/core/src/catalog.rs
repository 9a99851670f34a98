//! Named measures and model vectors used by the verification suites.

use num_complex::Complex64;

use crate::flows::{Circle, Mode, PeriodicFlowModel, PiecewisePowerFunction, PowerTerm};
use crate::measures::{Atom, CantorComponent, Segment, SpectralMeasure};

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub measure: SpectralMeasure,
}

fn entry(name: &'static str, measure: SpectralMeasure) -> CatalogEntry {
    CatalogEntry { name, measure }
}

/// `x^q dk(x)` on `[0, 1]`.
pub fn cantor_weighted(q: f64) -> SpectralMeasure {
    SpectralMeasure::from_cantor(CantorComponent::new(0.0, 1.0, q)).expect("valid cantor component")
}

/// `x^{q−1}` on `(0, 1]`.
pub fn power_density(q: f64) -> SpectralMeasure {
    SpectralMeasure::from_segment(Segment::power(0.0, 1.0, 1.0, q - 1.0)).expect("valid power segment")
}

/// `x^{q−1}|ln x|⁻²` on `(0, ½]`.
pub fn power_log_density(q: f64) -> SpectralMeasure {
    SpectralMeasure::from_segment(Segment::power_log(0.0, 0.5, 1.0, q - 1.0, -2.0)).expect("valid power-log segment")
}

/// `|x|^α` on `(a, b]`.
pub fn power_window(a: f64, b: f64, alpha: f64) -> SpectralMeasure {
    SpectralMeasure::from_segment(Segment::power(a, b, 1.0, alpha)).expect("valid window")
}

pub fn unit_atom(x: f64) -> SpectralMeasure {
    SpectralMeasure::atom(x, 1.0).expect("valid atom")
}

/// Measures that do not depend on a class level.
pub fn fixed_measures() -> Vec<CatalogEntry> {
    let mixed = SpectralMeasure::new(
        vec![Atom { x: 0.0, mass: 2.0 }, Atom { x: 3.0, mass: 0.5 }],
        vec![Segment::constant(-1.0, -0.25, 0.5)],
        Vec::new(),
    )
    .expect("valid mixed measure");
    let hat = SpectralMeasure::from_segment(Segment::tabulated(vec![0.5, 1.0, 1.5], vec![0.0, 1.0, 0.0])).expect("valid table");
    let far_cantor = SpectralMeasure::from_cantor(CantorComponent {
        weight: 0.5,
        ..CantorComponent::new(1.0, 2.0, 0.0)
    })
    .expect("valid cantor component");
    let tail = SpectralMeasure::from_segment(Segment::power(1.0, f64::INFINITY, 1.0, -3.0)).expect("valid tail");
    let symmetric = SpectralMeasure::from_segment(Segment::power(-1.0, 1.0, 1.0, 0.5)).expect("valid symmetric power");
    vec![
        entry("atom-at-1", unit_atom(1.0)),
        entry("window", power_window(1.0, 2.0, 1.0)),
        entry("x-squared", power_window(0.0, 1.0, 2.0)),
        entry("mixed", mixed),
        entry("hat", hat),
        entry("far-cantor", far_cantor),
        entry("tail", tail),
        entry("symmetric-power", symmetric),
    ]
}

/// Fixed measures plus the level-`q` counterexample family.
pub fn catalog(q: f64) -> Vec<CatalogEntry> {
    let mut v = vec![
        entry("cantor", cantor_weighted(q)),
        entry("power-density", power_density(q)),
        entry("power-log", power_log_density(q)),
    ];
    v.extend(fixed_measures());
    v
}

/// The default catalog (level 1).
pub fn standard_catalog() -> Vec<CatalogEntry> {
    catalog(1.0)
}

pub fn by_name(name: &str, q: f64) -> Option<SpectralMeasure> {
    catalog(q).into_iter().find(|e| e.name == name).map(|e| e.measure)
}

pub fn names() -> Vec<&'static str> {
    standard_catalog().iter().map(|e| e.name).collect()
}

/// Multiplication-flow vectors.
pub fn function_catalog() -> Vec<(&'static str, PiecewisePowerFunction)> {
    let one = Complex64::new(1.0, 0.0);
    let mk = |terms: Vec<PowerTerm>| PiecewisePowerFunction::new(terms).expect("valid catalog function");
    vec![
        ("window", mk(vec![PowerTerm::new(one, 1.0, 2.0, 1.0)])),
        ("narrow", mk(vec![PowerTerm::new(one, 1.0, 1.001, 0.5)])),
        ("flat", mk(vec![PowerTerm::new(Complex64::new(0.5, -1.0), 0.2, 1.0, 0.0)])),
        (
            "two-piece",
            mk(vec![
                PowerTerm::new(Complex64::new(0.3, 0.4), 0.5, 1.0, 1.5),
                PowerTerm::new(Complex64::new(-1.0, 0.2), 2.0, 4.0, 1.5),
            ]),
        ),
        ("steep", mk(vec![PowerTerm::new(one, 0.1, 0.3, 2.0)])),
    ]
}

/// Two circles of periods 1 and 3 with equal weights and modes up to
/// `|k| = 3`.
pub fn two_circle_model() -> PeriodicFlowModel {
    let mode = |k, re, im| Mode { k, re, im };
    PeriodicFlowModel::new(vec![
        Circle {
            weight: 0.5,
            period: 1.0,
            coeffs: vec![mode(-3, 0.2, -0.1), mode(-2, 0.1, 0.3), mode(-1, -0.4, 0.2), mode(0, 0.8, 0.0), mode(1, 0.5, 0.5), mode(2, -0.3, 0.1), mode(3, 0.05, -0.25)],
        },
        Circle {
            weight: 0.5,
            period: 3.0,
            coeffs: vec![mode(-3, -0.15, 0.05), mode(-1, 0.6, -0.2), mode(0, -1.0, 0.5), mode(1, 0.3, 0.1), mode(2, 0.0, -0.45), mode(3, 0.25, 0.25)],
        },
    ])
    .expect("valid periodic model")
}
