//! Fixed-order Gauss–Legendre rules for the time-domain oracles. Kept apart
//! from the adaptive Gauss–Kronrod engine so the two paths share no code.

use std::sync::OnceLock;

/// Nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub(crate) fn rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = -x;
        xs[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

pub(crate) fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| rule(20))
}

pub(crate) fn gl10() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| rule(10))
}

pub(crate) fn apply<F: Fn(f64) -> f64>(r: &(Vec<f64>, Vec<f64>), f: &F, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    r.0.iter().zip(&r.1).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// Composite 20-point rule over the given panel edges, with the 10-point
/// rule as error estimate.
pub(crate) fn composite<F: Fn(f64) -> f64>(f: &F, edges: &[f64]) -> (f64, f64) {
    let (mut v, mut e) = (0.0, 0.0);
    for w in edges.windows(2) {
        let hi = apply(gl20(), f, w[0], w[1]);
        let lo = apply(gl10(), f, w[0], w[1]);
        v += hi;
        e += (hi - lo).abs();
    }
    (v, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [5, 10, 20] {
            let r = rule(n);
            assert!((r.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let v = apply(&r, &|x: f64| x.powi(deg as i32 - 1), 0.0, 1.0);
            assert!((v - 1.0 / (deg as f64)).abs() < 1e-14, "n = {n}");
        }
    }
}
