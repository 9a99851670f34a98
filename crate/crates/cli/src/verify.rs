//! Verification suites: each row is one inequality `lhs ≤ rhs` (or a
//! relation that must hold) with its margin.

use rayon::prelude::*;

use ergrates_core::catalog;
use ergrates_core::classes::inclusion_suite;
use ergrates_core::flows::{operator_norm_lower, periodic_eval, sharpness_witness, trajectory_average_norm, PeriodicFlowModel};
use ergrates_core::kernels::rho;
use ergrates_core::measures::SpectralMeasure;
use ergrates_core::rates::{
    alpha2_integral, decay_norm, empirical_rate_constant, rate_constant, singularity_norm, RateCertificate, RateInputs,
    TheoremTag,
};
use ergrates_core::QuadStatus;

use crate::commands::SHARPNESS_EPS;
use crate::input::{load_flow_model, load_measure, FlowModel};
use crate::report::Report;
use crate::{check_positive, CliError, GridArgs, GridDefaults, Outcome, STANDARD_GRID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Theorem1,
    Prop1,
    Prop2,
    Theorem6,
    Theorem7,
    Prop5,
    Remark3,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub input: Option<String>,
    pub alpha: Option<f64>,
    pub q: Option<f64>,
    pub p: Option<f64>,
    pub eps: Option<f64>,
}

/// Relative allowance on comparisons against a grid supremum.
const SUP_SLACK: f64 = 1e-6;

const LARGE_TAU_GRID: GridDefaults = GridDefaults {
    tau_min: 2.0,
    tau_max: 1e4,
    points: 200,
};

const PERIODIC_GRID: GridDefaults = GridDefaults {
    tau_min: 1.0,
    tau_max: 1e3,
    points: 60,
};

struct Rows {
    suite: &'static str,
    report: Report,
    outcome: Outcome,
}

impl Rows {
    fn new(suite: &'static str) -> Self {
        Rows {
            suite,
            report: Report::new(&["suite", "check", "case", "tau", "lhs", "rhs", "margin", "pass", "detail"]),
            outcome: Outcome::Ok,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, check: &str, case: &str, tau: Option<f64>, lhs: Option<f64>, rhs: Option<f64>, margin: Option<f64>, pass: bool, detail: String) {
        if !pass {
            self.outcome = Outcome::Violated;
        }
        self.report.push(vec![
            self.suite.into(),
            check.into(),
            case.into(),
            tau.into(),
            lhs.into(),
            rhs.into(),
            margin.into(),
            pass.into(),
            detail.into(),
        ]);
    }

    /// `lhs ≤ rhs`, allowing the quadrature error `err`.
    fn at_most(&mut self, check: &str, case: &str, tau: Option<f64>, lhs: f64, rhs: f64, err: f64) {
        let margin = rhs - lhs;
        self.push(check, case, tau, Some(lhs), Some(rhs), Some(margin), margin >= -err, String::new());
    }

    fn skip(&mut self, check: &str, case: &str, why: String) {
        self.push(check, case, None, None, None, None, true, why);
    }

    fn note_status(&mut self, s: QuadStatus) {
        if s != QuadStatus::Converged {
            self.outcome = self.outcome.max(Outcome::Inconclusive);
        }
    }

    fn finish(self) -> (Report, Outcome) {
        (self.report, self.outcome)
    }
}

fn measures(opts: &Options, q: f64) -> Result<Vec<(String, SpectralMeasure)>, CliError> {
    match &opts.input {
        Some(spec) => Ok(vec![load_measure(spec, q)?]),
        None => Ok(catalog::catalog(q).into_iter().map(|e| (e.name.to_owned(), e.measure)).collect()),
    }
}

fn level(opts: &Options) -> Result<f64, CliError> {
    check_positive("q", opts.q.unwrap_or(1.0))
}

fn reject(flag: &str, given: bool, suite: &str) -> Result<(), CliError> {
    if given {
        Err(CliError::Input(format!("--{flag}: not used by suite {suite}")))
    } else {
        Ok(())
    }
}

/// `decay_norm(μ, τ) ≤ cert.bound(τ)` at every grid point.
fn forward_rows(rows: &mut Rows, check: &str, name: &str, m: &SpectralMeasure, cert: &RateCertificate, taus: &[f64]) -> Result<(), CliError> {
    let vals = taus.par_iter().map(|&t| decay_norm(m, t)).collect::<Result<Vec<_>, _>>()?;
    for (&t, v) in taus.iter().zip(&vals) {
        rows.note_status(v.status);
        let bound = cert.bound(t).expect("grid lies in the validity domain");
        rows.at_most(check, name, Some(t), v.value, bound, v.abs_err);
    }
    Ok(())
}

fn theorem1(opts: &Options, grid: &GridArgs) -> Result<Rows, CliError> {
    reject("p", opts.p.is_some(), "theorem1")?;
    reject("eps", opts.eps.is_some(), "theorem1")?;
    let alpha = opts.alpha.unwrap_or(1.0);
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(CliError::Input(format!("--alpha: theorem1 needs alpha in (0, 2), got {alpha}")));
    }
    let taus = grid.resolve(STANDARD_GRID)?.taus();
    let factor = rho(alpha)?.rho / 2f64.powf(alpha);
    let mut rows = Rows::new("theorem1");
    for (name, m) in measures(opts, level(opts)?)? {
        let m = m.without_origin();
        let a = singularity_norm(&m, alpha)?;
        if !a.is_finite() {
            rows.skip("forward", &name, "singularity norm is infinite".into());
            continue;
        }
        let inputs = RateInputs { alpha: Some(alpha), a: Some(a), ..Default::default() };
        let cert = rate_constant(TheoremTag::Th1Fwd, &inputs)?;
        forward_rows(&mut rows, "forward", &name, &m, &cert, &taus)?;
        let (tau_star, b_star) = empirical_rate_constant(&m, alpha, &taus)?;
        rows.at_most("backward", &name, Some(tau_star), a, factor * b_star * (1.0 + SUP_SLACK), 0.0);
    }
    Ok(rows)
}

fn large_tau_suite(opts: &Options, grid: &GridArgs, tag: TheoremTag) -> Result<Rows, CliError> {
    reject("p", opts.p.is_some(), tag.as_str())?;
    reject("eps", opts.eps.is_some(), tag.as_str())?;
    let (suite, alpha) = match tag {
        TheoremTag::Prop1 => {
            if let Some(a) = opts.alpha.filter(|&a| a != 2.0) {
                return Err(CliError::Input(format!("--alpha: prop1 is the alpha = 2 case, got {a}")));
            }
            ("prop1", 2.0)
        }
        _ => {
            let a = opts.alpha.unwrap_or(3.0);
            if !(a > 2.0 && a.is_finite()) {
                return Err(CliError::Input(format!("--alpha: prop2 needs alpha > 2, got {a}")));
            }
            ("prop2", a)
        }
    };
    let g = grid.resolve(LARGE_TAU_GRID)?;
    if g.tau_min < 2.0 {
        return Err(CliError::Input(format!("--tau-min: {suite} bounds hold for tau >= 2, got {}", g.tau_min)));
    }
    let taus = g.taus();
    let mut rows = Rows::new(suite);
    for (name, m) in measures(opts, level(opts)?)? {
        let m = m.without_origin();
        let a = singularity_norm(&m, alpha)?;
        if !a.is_finite() {
            rows.skip("forward", &name, "singularity norm is infinite".into());
            continue;
        }
        let inputs = RateInputs {
            alpha: Some(alpha),
            a: Some(a),
            mass: Some(m.total_mass()),
            ..Default::default()
        };
        let cert = rate_constant(tag, &inputs)?;
        forward_rows(&mut rows, "forward", &name, &m, &cert, &taus)?;
    }
    Ok(rows)
}

fn theorem7(opts: &Options, grid: &GridArgs) -> Result<Rows, CliError> {
    reject("alpha", opts.alpha.is_some(), "theorem7")?;
    reject("p", opts.p.is_some(), "theorem7")?;
    reject("eps", opts.eps.is_some(), "theorem7")?;
    let taus = grid.resolve(STANDARD_GRID)?.taus();
    let mut rows = Rows::new("theorem7");
    for (name, m) in measures(opts, level(opts)?)? {
        let m = m.without_origin();
        let integral = alpha2_integral(&m)?;
        match integral.status {
            QuadStatus::Divergent => {
                rows.skip("forward", &name, "inverse-square integral diverges".into());
                continue;
            }
            s => rows.note_status(s),
        }
        let inputs = RateInputs { a: Some(integral.value), ..Default::default() };
        let cert = rate_constant(TheoremTag::Th7Fwd, &inputs)?;
        forward_rows(&mut rows, "forward", &name, &m, &cert, &taus)?;
        let (tau_star, b_star) = empirical_rate_constant(&m, 2.0, &taus)?;
        let back = rate_constant(TheoremTag::Th7Bwd, &RateInputs { b: Some(b_star), ..Default::default() })?;
        rows.at_most("backward", &name, Some(tau_star), integral.value, back.a * (1.0 + SUP_SLACK), integral.abs_err);
    }
    Ok(rows)
}

fn theorem6(opts: &Options) -> Result<Rows, CliError> {
    reject("input", opts.input.is_some(), "theorem6")?;
    reject("alpha", opts.alpha.is_some(), "theorem6")?;
    reject("eps", opts.eps.is_some(), "theorem6")?;
    let q = level(opts)?;
    let p = check_positive("p", opts.p.unwrap_or(0.5))?;
    let report = inclusion_suite(q, p)?;
    let mut rows = Rows::new("theorem6");
    for c in report.checks {
        rows.push(&c.relation, &c.measure, None, None, None, None, c.holds, c.detail);
    }
    Ok(rows)
}

fn prop5(opts: &Options) -> Result<Rows, CliError> {
    reject("input", opts.input.is_some(), "prop5")?;
    reject("q", opts.q.is_some(), "prop5")?;
    reject("p", opts.p.is_some(), "prop5")?;
    let alphas = match opts.alpha {
        Some(a) if a > 0.0 && a <= 2.0 => vec![a],
        Some(a) => return Err(CliError::Input(format!("--alpha: prop5 needs alpha in (0, 2], got {a}"))),
        None => vec![0.5, 1.0, 1.5],
    };
    let eps_list = match opts.eps {
        Some(e) if e > 0.0 && e < 1.0 => vec![e],
        Some(e) => return Err(CliError::Input(format!("--eps: must lie in (0, 1), got {e}"))),
        None => SHARPNESS_EPS.to_vec(),
    };
    let mut rows = Rows::new("prop5");
    for &alpha in &alphas {
        for &eps in &eps_list {
            let w = sharpness_witness(alpha, eps)?;
            let case = format!("alpha={alpha} eps={eps}");
            rows.push("witness", &case, None, Some(w.lhs), Some(w.rhs), Some(w.lhs - w.rhs), w.pass, format!("nu={:e} delta={:e}", w.nu, w.delta));
        }
        let limit = 2f64.powf(alpha) / rho(alpha)?.rho;
        let v = operator_norm_lower(alpha, 1.0, 1e-3)?;
        let pass = v <= limit * (1.0 + 1e-9) && v >= 0.99 * limit;
        let case = format!("alpha={alpha}");
        rows.push("operator-norm", &case, Some(1.0), Some(v), Some(limit), Some(limit - v), pass, "within 1% of the limit".into());
    }
    Ok(rows)
}

fn remark3(opts: &Options, grid: &GridArgs) -> Result<Rows, CliError> {
    for (flag, given) in [("alpha", opts.alpha.is_some()), ("q", opts.q.is_some()), ("p", opts.p.is_some()), ("eps", opts.eps.is_some())] {
        reject(flag, given, "remark3")?;
    }
    let (case, model): (String, PeriodicFlowModel) = match &opts.input {
        Some(path) => match load_flow_model(path)? {
            FlowModel::Periodic(m) => (path.clone(), m),
            FlowModel::Mult(_) => return Err(CliError::Input(format!("--input: {path} is not a periodic model"))),
        },
        None => ("two-circles".into(), catalog::two_circle_model()),
    };
    let taus = grid.resolve(PERIODIC_GRID)?.taus();
    let vals = taus
        .par_iter()
        .map(|&t| Ok((periodic_eval(&model, t, 0.0)?, trajectory_average_norm(&model, t, 0.0)?)))
        .collect::<Result<Vec<_>, ergrates_core::Error>>()?;
    let mut rows = Rows::new("remark3");
    for (&t, (e, oracle)) in taus.iter().zip(&vals) {
        rows.at_most("bounded-period", &case, Some(t), e.avg_norm_sq, e.bound_rem3, 0.0);
        rows.at_most("spectral-gap", &case, Some(t), e.avg_norm_sq, e.bound_rem2, 0.0);
        rows.at_most("trajectory-oracle", &case, Some(t), (oracle - e.avg_norm_sq).abs(), 1e-8 * e.avg_norm_sq, 0.0);
    }
    let gap = model.gap();
    let nearest = model.spectrum().atoms().iter().map(|a| a.x.abs()).fold(f64::INFINITY, f64::min);
    rows.push("gap", &case, None, Some(gap), Some(nearest), Some(nearest - gap), nearest >= gap * (1.0 - 1e-15), String::new());
    Ok(rows)
}

pub fn run(suite: Suite, opts: &Options, grid: &GridArgs) -> Result<(Report, Outcome), CliError> {
    let rows = match suite {
        Suite::Theorem1 => theorem1(opts, grid)?,
        Suite::Prop1 => large_tau_suite(opts, grid, TheoremTag::Prop1)?,
        Suite::Prop2 => large_tau_suite(opts, grid, TheoremTag::Prop2)?,
        Suite::Theorem6 => {
            reject("tau-min/--tau-max/--grid-points", grid_given(grid), "theorem6")?;
            theorem6(opts)?
        }
        Suite::Theorem7 => theorem7(opts, grid)?,
        Suite::Prop5 => {
            reject("tau-min/--tau-max/--grid-points", grid_given(grid), "prop5")?;
            prop5(opts)?
        }
        Suite::Remark3 => remark3(opts, grid)?,
    };
    Ok(rows.finish())
}

fn grid_given(g: &GridArgs) -> bool {
    g.tau_min.is_some() || g.tau_max.is_some() || g.grid_points.is_some()
}
