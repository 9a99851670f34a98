use rayon::prelude::*;

use ergrates_core::catalog;
use ergrates_core::classes::{class_membership, ClassId, Verdict};
use ergrates_core::flows::{
    mult_average_norm, mult_spectral, periodic_eval, sharpness_witness, trajectory_average_norm, x_norm_sq,
};
use ergrates_core::kernels::rho as rho_value;
use ergrates_core::rates::{bounds_table, certificate_for, decay_norm_tol, fit_power_law, MIN_FIT_SAMPLES};
use ergrates_core::{QuadStatus, Tolerance};

use crate::input::{load_flow_model, load_measure, FlowModel};
use crate::report::{Cell, Report};
use crate::{check_positive, check_range, CliError, Grid, GridArgs, GridDefaults, Outcome, STANDARD_GRID};

type Run = Result<(Report, Outcome), CliError>;

/// Grid for flow models, whose bounds only bite once τ exceeds the periods.
const FLOW_GRID: GridDefaults = GridDefaults {
    tau_min: 1.0,
    tau_max: 1e3,
    points: 60,
};

fn status_outcome(s: QuadStatus) -> Outcome {
    match s {
        QuadStatus::Converged => Outcome::Ok,
        _ => Outcome::Inconclusive,
    }
}

pub fn rho(alpha: f64) -> Run {
    check_range("alpha", alpha, 0.0, 2.0)?;
    let r = rho_value(alpha)?;
    let mut rep = Report::new(&["alpha", "rho", "argmin", "lower", "upper"]);
    rep.push(vec![r.alpha.into(), r.rho.into(), r.argmin.into(), r.lower.into(), r.upper.into()]);
    Ok((rep, Outcome::Ok))
}

pub fn decay(spec: &str, q: f64, tau: Option<f64>, grid: &GridArgs, tol: Tolerance) -> Run {
    check_positive("q", q)?;
    let (_, m) = load_measure(spec, q)?;
    let taus = match tau {
        Some(t) => vec![check_positive("tau", t)?],
        None => grid.resolve(STANDARD_GRID)?.taus(),
    };
    let vals = taus
        .par_iter()
        .map(|&t| decay_norm_tol(&m, t, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rep = Report::new(&["tau", "decay_norm", "abs_err", "status"]);
    let mut outcome = Outcome::Ok;
    for (t, v) in taus.iter().zip(&vals) {
        outcome = outcome.max(status_outcome(v.status));
        rep.push(vec![(*t).into(), v.value.into(), v.abs_err.into(), v.status.as_str().into()]);
    }
    Ok((rep, outcome))
}

pub fn bounds(spec: &str, q: f64, alpha: f64, grid: Grid) -> Run {
    check_positive("q", q)?;
    check_positive("alpha", alpha)?;
    let (_, m) = load_measure(spec, q)?;
    let cert = certificate_for(&m, alpha)?;
    let rows = bounds_table(&m, alpha, &grid.taus())?;
    let mut rep = Report::new(&["tau", "decay_norm", "lemma1_upper", "rate_bound", "certificate", "A", "B"]);
    for r in rows {
        rep.push(vec![
            r.tau.into(),
            r.decay_norm.into(),
            r.lemma1_upper.into(),
            if r.rate_bound.is_nan() { Cell::Empty } else { r.rate_bound.into() },
            cert.tag.as_str().into(),
            cert.a.into(),
            cert.b.into(),
        ]);
    }
    Ok((rep, Outcome::Ok))
}

pub fn fit(spec: &str, q: f64, grid: Grid, tol: Tolerance) -> Run {
    check_positive("q", q)?;
    if grid.points < MIN_FIT_SAMPLES {
        return Err(CliError::Input(format!(
            "--grid-points: a fit needs at least {MIN_FIT_SAMPLES} points, got {}",
            grid.points
        )));
    }
    let (_, m) = load_measure(spec, q)?;
    let taus = grid.taus();
    let vals = taus
        .par_iter()
        .map(|&t| decay_norm_tol(&m, t, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let outcome = vals.iter().map(|v| status_outcome(v.status)).max().unwrap_or(Outcome::Ok);
    // Exact kernel zeros carry no slope information.
    let samples: Vec<(f64, f64)> = taus.iter().zip(&vals).filter(|(_, v)| v.value > 0.0).map(|(t, v)| (*t, v.value)).collect();
    let f = fit_power_law(&samples)?;
    let mut rep = Report::new(&["alpha", "b", "residual", "samples", "tau_min", "tau_max"]);
    rep.push(vec![f.alpha.into(), f.b.into(), f.residual.into(), samples.len().into(), grid.tau_min.into(), grid.tau_max.into()]);
    Ok((rep, outcome))
}

pub fn classes(spec: &str, q: f64, p: Option<f64>) -> Run {
    check_positive("q", q)?;
    if let Some(p) = p {
        check_positive("p", p)?;
    }
    let (_, m) = load_measure(spec, q)?;
    let mut jobs: Vec<(ClassId, f64)> = [ClassId::K1, ClassId::K2, ClassId::K3, ClassId::K4].iter().map(|&id| (id, q)).collect();
    if let Some(p) = p {
        jobs.push((ClassId::K4, q + p));
    }
    let verdicts = jobs
        .par_iter()
        .map(|&(id, level)| class_membership(&m, level, id))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rep = Report::new(&["class_id", "q", "verdict", "witness"]);
    let mut outcome = Outcome::Ok;
    for v in verdicts {
        if v.verdict == Verdict::Inconclusive {
            outcome = Outcome::Inconclusive;
        }
        rep.push(vec![v.class_id.to_string().into(), v.q.into(), v.verdict.as_str().into(), v.witness_text().into()]);
    }
    Ok((rep, outcome))
}

pub const SHARPNESS_EPS: [f64; 3] = [0.5, 0.9, 0.99];

pub fn sharpness(input: Option<&str>, alpha: f64, eps: Option<f64>, grid: &GridArgs) -> Run {
    check_range("alpha", alpha, 0.0, 2.0)?;
    if alpha == 0.0 {
        return Err(CliError::Input("--alpha: must be positive for sharpness".into()));
    }
    if let Some(e) = eps {
        if !(e > 0.0 && e < 1.0) {
            return Err(CliError::Input(format!("--eps: must lie in (0, 1), got {e}")));
        }
    }
    let limit = 2f64.powf(alpha) / rho_value(alpha)?.rho;
    match input {
        None => {
            let eps_list: Vec<f64> = eps.map_or(SHARPNESS_EPS.to_vec(), |e| vec![e]);
            let mut rep = Report::new(&["alpha", "eps", "nu", "delta", "lhs", "rhs", "pass"]);
            let mut outcome = Outcome::Ok;
            for e in eps_list {
                let w = sharpness_witness(alpha, e)?;
                if !w.pass {
                    outcome = Outcome::Violated;
                }
                rep.push(vec![w.alpha.into(), w.eps.into(), w.nu.into(), w.delta.into(), w.lhs.into(), w.rhs.into(), w.pass.into()]);
            }
            Ok((rep, outcome))
        }
        Some(path) => {
            if eps.is_some() {
                return Err(CliError::Input("--eps: only used without --input".into()));
            }
            let FlowModel::Mult(f) = load_flow_model(path)? else {
                return Err(CliError::Input(format!("--input: {path} is not a multiplication vector")));
            };
            let xn = x_norm_sq(&f, alpha)?;
            if xn == 0.0 {
                return Err(CliError::Input("--input: the vector is zero".into()));
            }
            let taus = grid.resolve(STANDARD_GRID)?.taus();
            let ratios = taus
                .par_iter()
                .map(|&t| mult_average_norm(&f, t, 0.0).map(|v| (v.value * t.powf(alpha) / xn, v.abs_err * t.powf(alpha) / xn)))
                .collect::<Result<Vec<_>, _>>()?;
            let mut rep = Report::new(&["tau", "ratio", "limit", "margin"]);
            let mut outcome = Outcome::Ok;
            for (t, (r, err)) in taus.iter().zip(ratios) {
                let margin = limit - r;
                if margin < -err {
                    outcome = Outcome::Violated;
                }
                rep.push(vec![(*t).into(), r.into(), limit.into(), margin.into()]);
            }
            Ok((rep, outcome))
        }
    }
}

pub fn flow_sim(path: &str, grid: &GridArgs, tol: Tolerance) -> Run {
    let taus = grid.resolve(FLOW_GRID)?.taus();
    match load_flow_model(path)? {
        FlowModel::Periodic(model) => {
            let rows = taus
                .par_iter()
                .map(|&t| Ok((periodic_eval(&model, t, 0.0)?, trajectory_average_norm(&model, t, 0.0)?)))
                .collect::<Result<Vec<_>, ergrates_core::Error>>()?;
            let mut rep = Report::new(&["tau", "avg_norm_sq", "trajectory", "bound_rem3", "bound_rem2"]);
            let mut outcome = Outcome::Ok;
            for (t, (e, o)) in taus.iter().zip(rows) {
                if e.avg_norm_sq > e.bound_rem3 || e.avg_norm_sq > e.bound_rem2 {
                    outcome = Outcome::Violated;
                }
                rep.push(vec![(*t).into(), e.avg_norm_sq.into(), o.into(), e.bound_rem3.into(), e.bound_rem2.into()]);
            }
            Ok((rep, outcome))
        }
        FlowModel::Mult(f) => {
            let mu = mult_spectral(&f);
            let rows = taus
                .par_iter()
                .map(|&t| Ok((mult_average_norm(&f, t, 0.0)?, decay_norm_tol(&mu, t, tol)?)))
                .collect::<Result<Vec<_>, ergrates_core::Error>>()?;
            let mut rep = Report::new(&["tau", "avg_norm_sq", "spectral", "abs_err", "status"]);
            let mut outcome = Outcome::Ok;
            for (t, (time, spec)) in taus.iter().zip(rows) {
                let status = time.status.combine(spec.status);
                outcome = outcome.max(status_outcome(status));
                rep.push(vec![
                    (*t).into(),
                    time.value.into(),
                    spec.value.into(),
                    (time.abs_err + spec.abs_err).into(),
                    status.as_str().into(),
                ]);
            }
            Ok((rep, outcome))
        }
    }
}

pub fn catalog_listing(q: f64) -> Result<Report, CliError> {
    check_positive("q", q)?;
    let mut rep = Report::new(&["name", "total_mass", "mass_off_origin", "unbounded"]);
    for e in catalog::catalog(q) {
        let unbounded = e.measure.segments().iter().any(|s| s.is_unbounded());
        rep.push(vec![e.name.into(), e.measure.total_mass().into(), e.measure.mass_off_origin().into(), unbounded.into()]);
    }
    Ok(rep)
}
