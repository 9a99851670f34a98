use proptest::prelude::*;

use ergrates_core::flows::{mult_average_norm, mult_spectral, x_norm_sq, PiecewisePowerFunction};
use ergrates_core::kernels::rho;
use ergrates_core::measures::{Atom, CantorComponent, Domain, FnKernel, Segment, SpectralMeasure};
use ergrates_core::quad::log_grid;
use ergrates_core::rates::{
    alpha2_integral, decay_norm, empirical_rate_constant, rate_constant, singularity_norm, RateInputs, TheoremTag,
};
use ergrates_core::{QuadStatus, Tolerance};

fn atom() -> impl Strategy<Value = Atom> {
    (prop_oneof![-6.0..-0.05f64, 0.05..6.0f64], 0.01..2.0f64).prop_map(|(x, mass)| Atom { x, mass })
}

fn segment() -> impl Strategy<Value = Segment> {
    (-3.0..3.0f64, 0.1..2.0f64, 0.1..2.0f64, 0.0..2.0f64, any::<bool>()).prop_map(|(a, len, c, p, power)| {
        if power {
            Segment::power(a, a + len, c, p)
        } else {
            Segment::constant(a, a + len, c)
        }
    })
}

fn cantor() -> impl Strategy<Value = CantorComponent> {
    (0.0..2.0f64, 0.2..2.0f64, 0.0..1.5f64).prop_map(|(a, len, q)| CantorComponent::new(a, a + len, q))
}

/// Measures with 0–2 atoms, 0–2 disjoint segments and at most one Cantor
/// component.
fn measure() -> impl Strategy<Value = SpectralMeasure> {
    (
        prop::collection::vec(atom(), 0..3),
        prop::collection::vec(segment(), 0..3),
        prop::option::of(cantor()),
    )
        .prop_filter_map("overlapping segments", |(atoms, mut segs, c)| {
            segs.sort_by(|s, t| s.a.total_cmp(&t.a));
            if segs.windows(2).any(|w| w[1].a < w[0].b) {
                return None;
            }
            SpectralMeasure::new(atoms, segs, c.into_iter().collect()).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interval_mass_is_additive(m in measure(), a in -7.0..7.0f64, d1 in 0.0..4.0f64, d2 in 0.0..4.0f64) {
        let (b, c) = (a + d1, a + d1 + d2);
        let whole = m.interval_mass(a, c);
        let parts = m.interval_mass(a, b) + m.interval_mass(b, c);
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1e-300) + 1e-15);
    }

    #[test]
    fn fejer_integral_is_positive_and_dominated(m in measure(), tau in 0.05..500.0f64) {
        let r = decay_norm(&m, tau).unwrap();
        prop_assert_eq!(r.status, QuadStatus::Converged);
        prop_assert!(r.value >= -r.abs_err);
        prop_assert!(r.value <= m.mass_off_origin() + r.abs_err);
    }

    #[test]
    fn bounded_kernel_is_dominated(m in measure(), w in 0.1..20.0f64) {
        let k = FnKernel { f: |x: f64| (w * x).cos().powi(2), bound: 1.0, scale: 1.0 / w };
        let r = m.integrate_kernel(&k, Domain::line(), Tolerance::new(1e-13, 1e-10));
        prop_assert!(r.value >= -r.abs_err);
        prop_assert!(r.value <= m.total_mass() * (1.0 + 1e-12) + r.abs_err);
    }

    #[test]
    fn forward_rates_hold(m in measure(), alpha in 0.1..1.9f64, tau in 0.1..1e3f64) {
        let m = m.without_origin();
        let a = singularity_norm(&m, alpha).unwrap();
        prop_assume!(a.is_finite());
        let cert = rate_constant(TheoremTag::Th1Fwd, &RateInputs { alpha: Some(alpha), a: Some(a), ..Default::default() }).unwrap();
        let d = decay_norm(&m, tau).unwrap();
        prop_assert!(d.value <= cert.bound(tau).unwrap() + d.abs_err);
        let i = alpha2_integral(&m).unwrap();
        if i.status == QuadStatus::Converged {
            prop_assert!(d.value * tau * tau <= 4.0 * i.value * (1.0 + 1e-9) + d.abs_err * tau * tau);
        }
    }
}

fn window_function() -> impl Strategy<Value = (PiecewisePowerFunction, f64)> {
    (0.05..3.0f64, 0.01..2.0f64, 0.1..1.9f64)
        .prop_map(|(a, len, alpha)| (PiecewisePowerFunction::window(a, a + len, alpha).unwrap(), alpha))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// On the multiplication model the decay constant and the singularity
    /// norm bound each other with the forward and backward constants.
    #[test]
    fn embedding_constants_link_on_the_model((f, alpha) in window_function()) {
        let mu = mult_spectral(&f);
        let a = singularity_norm(&mu, alpha).unwrap();
        prop_assert!(a.is_finite());
        let taus = log_grid(0.1, 1e3, 60);
        let (_, b_star) = empirical_rate_constant(&mu, alpha, &taus).unwrap();
        let forward = 2f64.powf(alpha + 1.0) / (2.0 - alpha) * a;
        prop_assert!(b_star <= forward * (1.0 + 1e-9));
        let backward = rho(alpha).unwrap().rho / 2f64.powf(alpha) * b_star;
        prop_assert!(a <= backward * (1.0 + 1e-6));
        let limit = 2f64.powf(alpha) / rho(alpha).unwrap().rho;
        let xn = x_norm_sq(&f, alpha).unwrap();
        for &t in taus.iter().step_by(6) {
            let v = mult_average_norm(&f, t, 0.0).unwrap();
            prop_assert!(v.value * t.powf(alpha) <= limit * xn * (1.0 + 1e-9) + v.abs_err * t.powf(alpha));
        }
    }
}
