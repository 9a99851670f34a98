use std::f64::consts::PI;

use crate::kernels::fejer;

/// `coef·|x|^exponent`, a kernel whose products with power-log densities
/// have closed-form integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerForm {
    pub coef: f64,
    pub exponent: f64,
}

/// A real kernel to be integrated against a measure.
///
/// `envelope(r)` must bound `|g(x)|` for all `|x| ≥ r`; it drives the
/// truncation of unbounded segments.
pub trait Kernel: Sync {
    fn eval(&self, x: f64) -> f64;

    /// Points where the kernel may be unbounded.
    fn singularities(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Interior points in `(lo, hi)` where panels should be split, such as
    /// zeros of an oscillating kernel.
    fn breakpoints(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    fn envelope(&self, r: f64) -> f64;

    /// Length scale of oscillation; infinite for non-oscillating kernels.
    fn scale(&self) -> f64 {
        f64::INFINITY
    }

    fn power_form(&self) -> Option<PowerForm> {
        None
    }

    /// For kernels of the form `m(x)·(1 − cos ωx)` at large `|x|`: the
    /// non-oscillating part `m` and the frequency `ω`.
    fn mean_tail(&self) -> Option<(PowerForm, f64)> {
        None
    }
}

/// The Fejér kernel `F_τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fejer {
    pub tau: f64,
}

impl Fejer {
    pub fn new(tau: f64) -> Self {
        Fejer { tau }
    }
}

/// Cap on forced zero breakpoints per call; beyond it the adaptive rule
/// resolves the oscillation itself.
const MAX_ZERO_BREAKS: usize = 200_000;

impl Kernel for Fejer {
    fn eval(&self, x: f64) -> f64 {
        fejer(self.tau, x)
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let period = 2.0 * PI / self.tau;
        let k0 = (lo / period).floor() as i64 + 1;
        let k1 = (hi / period).ceil() as i64 - 1;
        if k1 < k0 {
            return Vec::new();
        }
        let count = ((k1 - k0 + 1) as usize).min(MAX_ZERO_BREAKS);
        (0..count)
            .map(|i| (k0 + i as i64) as f64 * period)
            .filter(|&z| z > lo && z < hi && z != 0.0)
            .collect()
    }

    fn envelope(&self, r: f64) -> f64 {
        if r <= 0.0 {
            1.0
        } else {
            (4.0 / (self.tau * r).powi(2)).min(1.0)
        }
    }

    fn scale(&self) -> f64 {
        2.0 * PI / self.tau
    }

    fn mean_tail(&self) -> Option<(PowerForm, f64)> {
        let form = PowerForm {
            coef: 2.0 / (self.tau * self.tau),
            exponent: -2.0,
        };
        Some((form, self.tau))
    }
}

/// `|x|^exponent`; singular at the origin for negative exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerKernel {
    pub exponent: f64,
}

impl PowerKernel {
    pub fn new(exponent: f64) -> Self {
        PowerKernel { exponent }
    }
}

impl Kernel for PowerKernel {
    fn eval(&self, x: f64) -> f64 {
        if self.exponent == 0.0 {
            1.0
        } else {
            x.abs().powf(self.exponent)
        }
    }

    fn singularities(&self) -> Vec<f64> {
        if self.exponent < 0.0 {
            vec![0.0]
        } else {
            Vec::new()
        }
    }

    fn envelope(&self, r: f64) -> f64 {
        if self.exponent <= 0.0 {
            r.powf(self.exponent)
        } else {
            f64::INFINITY
        }
    }

    fn power_form(&self) -> Option<PowerForm> {
        Some(PowerForm {
            coef: 1.0,
            exponent: self.exponent,
        })
    }
}

/// A bounded closure kernel with `|g| ≤ bound`.
pub struct FnKernel<F> {
    pub f: F,
    pub bound: f64,
    pub scale: f64,
}

impl<F: Fn(f64) -> f64 + Sync> FnKernel<F> {
    pub fn new(f: F, bound: f64) -> Self {
        FnKernel {
            f,
            bound,
            scale: f64::INFINITY,
        }
    }
}

impl<F: Fn(f64) -> f64 + Sync> Kernel for FnKernel<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn envelope(&self, _r: f64) -> f64 {
        self.bound
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}
