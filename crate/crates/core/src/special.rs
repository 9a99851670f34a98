//! Exponential integrals used by the closed-form power-log antiderivatives.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// E1(x) = ∫_x^∞ e^{-t}/t dt for x > 0.
pub fn expint_e1(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // Modified Lentz evaluation of the continued fraction.
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() <= 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Ei(x), principal value, for real x ≠ 0. Ei(-∞) = 0.
pub fn expint_ei(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x < 0.0 {
        return -expint_e1(-x);
    }
    if x < 40.0 {
        ei_series(x)
    } else {
        ei_asymptotic(x)
    }
}

fn ei_series(x: f64) -> f64 {
    {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..400 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add <= 1e-17 * sum {
                break;
            }
        }
        EULER_GAMMA + x.ln() + sum
    }
}

fn ei_asymptotic(x: f64) -> f64 {
    {
        // Asymptotic series, truncated at its smallest term.
        let mut sum = 1.0;
        let mut term = 1.0;
        for k in 1..60 {
            let next = term * k as f64 / x;
            if next >= term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        x.exp() / x * sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 5.1
        assert!((expint_e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-15);
        assert!((expint_e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-15);
        assert!((expint_e1(2.0) - 0.048_900_510_708_061_12).abs() < 1e-16);
        assert!((expint_ei(1.0) - 1.895_117_816_355_936_8).abs() < 1e-14);
        assert!((expint_ei(-1.0) + 0.219_383_934_395_520_3).abs() < 1e-15);
    }

    #[test]
    fn branches_agree_at_switch_points() {
        let below = expint_e1(1.0 - 1e-12);
        let above = expint_e1(1.0 + 1e-12);
        assert!((below - above).abs() < 1e-11);
        let series = ei_series(40.0);
        let asymptotic = ei_asymptotic(40.0);
        assert!(((series - asymptotic) / series).abs() < 1e-13);
    }

    #[test]
    fn derivative_matches_integrand() {
        // d/dx Ei(x) = e^x / x
        for &x in &[-30.0, -3.0, -0.2, 0.3, 2.5, 15.0, 55.0] {
            let h = 1e-5 * f64::max(1.0, f64::abs(x));
            let fd = (expint_ei(x + h) - expint_ei(x - h)) / (2.0 * h);
            let exact = f64::exp(x) / x;
            assert!(((fd - exact) / exact).abs() < 1e-7, "x = {x}");
        }
    }
}
