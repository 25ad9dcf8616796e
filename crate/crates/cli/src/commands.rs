use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::json;

use xyness::ness::ti_commutator_verified;
use xyness::oracle::{build_truncation, ness_estimates, oracle_flux, DEFAULT_TIME_STEP};
use xyness::transport::{flux_report, log_slope_coefficient};
use xyness::{
    bound_state, correlation_block, divergence_fit, Complex64, MagneticCorrection, NessEvaluator,
    OperatorKind, SiteWindow,
};

use crate::output::{Cell, Output, Table};
use crate::sweep::{parse_range, Sweep};
use crate::{Common, Failure};

/// Matrix elements compared against the oracle.
const ORACLE_PAIRS: [(i64, i64); 3] = [(0, 0), (0, 1), (-1, 2)];
/// Sites on each side of the origin whose bound-state amplitude is compared.
const SPECTRUM_SITES: i64 = 20;

pub struct OracleOptions {
    pub lambda: f64,
    pub oracle_m: usize,
    pub t_star: f64,
    pub max_deviation: f64,
    pub flux_m: usize,
    pub flux_t_star: f64,
    pub first_law_tol: f64,
}

fn with_common(t: Table, c: &Common) -> Table {
    t.param("beta_l", c.beta_l)
        .param("beta_r", c.beta_r)
        .param("nu", c.nu)
        .param("tol", c.tol)
}

pub fn correction(lambda: f64, points: usize, common: &Common) -> Result<Output, Failure> {
    if points < 2 {
        return Err(Failure::Config(format!(
            "need at least 2 points, got {points}"
        )));
    }
    if !lambda.is_finite() {
        return Err(Failure::Config("lambda must be finite".into()));
    }
    let corr = MagneticCorrection::new(lambda);
    let mut t = with_common(Table::new("correction", &["k", "delta"]), common)
        .param("lambda", lambda)
        .param("points", points);
    let n = (points - 1) as f64;
    for i in 0..points {
        // symmetric grid, so that k = 0 and k = +-pi/2 are hit exactly when possible
        let k = PI * (2.0 * i as f64 - n) / n;
        t.push_values(&[k, corr.at_momentum(k)]);
    }
    Ok(Output::Table(t))
}

pub fn flux(lambda: &Sweep, common: &Common) -> Result<Output, Failure> {
    let (th, spec) = (common.thermal()?, common.spec()?);
    let params: Vec<_> = lambda
        .values
        .iter()
        .map(|&l| common.params(l))
        .collect::<Result<_, _>>()?;
    let reports: Vec<_> = params
        .par_iter()
        .map(|p| flux_report(p, &th, &spec))
        .collect::<Result<_, _>>()?;
    let mut t = with_common(
        Table::new(
            "flux",
            &[
                "lambda",
                "J",
                "sigma",
                "J_prime",
                "J_second",
                "quadrature_error",
            ],
        ),
        common,
    );
    for r in reports {
        t.push(vec![
            r.params.lambda.into(),
            r.j.into(),
            r.sigma.into(),
            r.j_prime.into(),
            r.j_second.into(),
            r.quadrature_error.into(),
        ]);
    }
    Ok(Output::Table(t))
}

pub fn flux_scan(lambda: &Sweep, common: &Common) -> Result<Output, Failure> {
    let (th, spec) = (common.thermal()?, common.spec()?);
    let params: Vec<_> = lambda
        .values
        .iter()
        .map(|&l| common.params(l))
        .collect::<Result<_, _>>()?;
    let rows: Vec<[f64; 3]> = params
        .par_iter()
        .map(|p| {
            let j = xyness::heat_flux(p, &th, &spec)?;
            let sigma = xyness::entropy_production(p, &th, &spec)?;
            Ok([p.lambda, j, sigma])
        })
        .collect::<Result<_, xyness::Error>>()?;
    let mut t = with_common(Table::new("flux-scan", &["lambda", "J", "sigma"]), common);
    for r in rows {
        t.push_values(&r);
    }
    Ok(Output::Table(t))
}

pub fn dflux(lambda: &Sweep, common: &Common) -> Result<Output, Failure> {
    let (th, spec) = (common.thermal()?, common.spec()?);
    let params: Vec<_> = lambda
        .values
        .iter()
        .map(|&l| common.params(l))
        .collect::<Result<_, _>>()?;
    let rows: Vec<(f64, f64, Option<f64>)> = params
        .par_iter()
        .map(|p| {
            let d1 = xyness::flux_derivative(p, &th, &spec)?;
            // the second derivative diverges at the origin
            let d2 = if p.lambda == 0.0 {
                None
            } else {
                Some(xyness::flux_second_derivative(p, &th, &spec)?)
            };
            Ok((p.lambda, d1, d2))
        })
        .collect::<Result<_, xyness::Error>>()?;
    let mut t = with_common(
        Table::new("dflux", &["lambda", "J_prime", "J_second"]),
        common,
    );
    for (l, d1, d2) in rows {
        t.push(vec![l.into(), d1.into(), d2.into()]);
    }
    Ok(Output::Table(t))
}

pub fn ness_matrix(lambda: f64, window: &str, common: &Common) -> Result<Output, Failure> {
    let (a, b) = parse_range(window).map_err(Failure::Config)?;
    let window = SiteWindow::new(a, b)?;
    let (th, spec, params) = (common.thermal()?, common.spec()?, common.params(lambda)?);
    let block = correlation_block(&params, &th, window, &spec)?;
    if common.format == crate::Format::Json {
        return Ok(Output::Document(block.to_json()));
    }
    let mut t = with_common(Table::new("ness-matrix", &["x", "y", "re", "im"]), common)
        .param("lambda", lambda);
    for x in window.sites() {
        for y in window.sites() {
            let v = block.get(x, y).expect("site inside the window");
            t.push_values(&[x as f64, y as f64, v.re, v.im]);
        }
    }
    Ok(Output::Table(t))
}

pub fn spectrum(lambda: f64, oracle_m: usize, common: &Common) -> Result<Output, Failure> {
    let params = common.params(lambda)?;
    let sys = build_truncation(oracle_m, &params)?;
    let h = sys.hamiltonian(OperatorKind::Magnetic);
    let outside = h.dim() - h.count_below(1.0) + h.count_below(-1.0);
    let residual = sys.magnetic().max_residual(|v| h.apply(v));
    let mut t = with_common(
        Table::new(
            "spectrum",
            &[
                "lambda",
                "e_lambda",
                "alpha_lambda",
                "nu_lambda_sq",
                "e_truncated",
                "e_sturm",
                "outside_band",
                "eigen_residual",
                "vector_deviation",
            ],
        ),
        common,
    )
    .param("oracle_m", oracle_m);
    let analytic = bound_state(lambda).ok();
    let truncated = sys.bound_state();
    let sturm = sys.bound_index().map(|i| h.eigenvalue_by_bisection(i));
    let deviation = match (&analytic, &truncated) {
        (Some(b), Some((_, v))) => Some(
            (-SPECTRUM_SITES..=SPECTRUM_SITES)
                .map(|x| {
                    let i = sys.site_index(x).expect("site inside the truncation");
                    (v[i] - b.amplitude(x)).abs()
                })
                .fold(0.0, f64::max),
        ),
        _ => None,
    };
    t.push(vec![
        lambda.into(),
        analytic.as_ref().map(|b| b.e_lambda).into(),
        analytic.as_ref().map(|b| b.alpha_lambda).into(),
        analytic.as_ref().map(|b| b.nu_lambda_sq).into(),
        truncated.as_ref().map(|(e, _)| *e).into(),
        sturm.into(),
        (outside as f64).into(),
        residual.into(),
        deviation.into(),
    ]);
    Ok(Output::Table(t))
}

pub fn ti_check(lambda: &Sweep, common: &Common) -> Result<Output, Failure> {
    let (th, spec) = (common.thermal()?, common.spec()?);
    let allowed = (10.0 * common.tol).max(1e-10);
    let mut t = with_common(
        Table::new("ti-check", &["lambda", "fast", "matrix", "discrepancy"]),
        common,
    )
    .param("allowed", allowed);
    for &l in &lambda.values {
        let c = ti_commutator_verified(&common.params(l)?, &th, &spec, allowed)?;
        t.push_values(&[l, c.fast, c.matrix, c.discrepancy]);
    }
    Ok(Output::Table(t))
}

pub fn oracle_verify(opts: &OracleOptions, common: &Common) -> Result<Output, Failure> {
    let (th, spec, params) = (
        common.thermal()?,
        common.spec()?,
        common.params(opts.lambda)?,
    );
    let eval = NessEvaluator::new(params, th, spec.clone())?;
    let sys = build_truncation(opts.oracle_m, &params)?;
    let estimates = ness_estimates(&sys, &th, &ORACLE_PAIRS, opts.t_star, DEFAULT_TIME_STEP)?;

    let mut t = with_common(
        Table::new(
            "oracle-verify",
            &[
                "check",
                "x",
                "y",
                "estimate_re",
                "estimate_im",
                "reference_re",
                "reference_im",
                "deviation",
                "tolerance",
                "status",
            ],
        ),
        common,
    )
    .param("lambda", opts.lambda)
    .param("oracle_m", opts.oracle_m)
    .param("t_star", opts.t_star)
    .param("flux_m", opts.flux_m)
    .param("flux_t_star", opts.flux_t_star);

    let check = |t: &mut Table,
                 name: &str,
                 site: Option<(i64, i64)>,
                 est: Complex64,
                 reference: Complex64,
                 tol: f64| {
        let dev = (est - reference).norm();
        let ok = dev < tol;
        if !ok {
            let at = site.map_or(String::new(), |(x, y)| format!(" at ({x}, {y})"));
            t.failures
                .push(format!("{name}{at}: deviation {dev:e} exceeds {tol:e}"));
        }
        let (x, y) = site.map_or((Cell::Empty, Cell::Empty), |(x, y)| (x.into(), y.into()));
        t.push(vec![
            name.into(),
            x,
            y,
            est.re.into(),
            est.im.into(),
            reference.re.into(),
            reference.im.into(),
            dev.into(),
            tol.into(),
            ok.into(),
        ]);
    };

    for (&(x, y), &est) in ORACLE_PAIRS.iter().zip(&estimates) {
        let reference = eval.element(x, y)?;
        check(
            &mut t,
            "element",
            Some((x, y)),
            est,
            reference,
            opts.max_deviation,
        );
    }

    let flux_sys = build_truncation(opts.flux_m, &params)?;
    let of = oracle_flux(&flux_sys, &th, opts.flux_t_star)?;
    let j = xyness::heat_flux(&params, &th, &spec)?;
    let re = |v: f64| Complex64::new(v, 0.0);
    check(
        &mut t,
        "flux_left",
        None,
        re(of.j_left),
        re(j),
        opts.max_deviation,
    );
    check(
        &mut t,
        "flux_right",
        None,
        re(of.j_right),
        re(-j),
        opts.max_deviation,
    );
    check(
        &mut t,
        "first_law",
        None,
        re(of.imbalance()),
        re(0.0),
        opts.first_law_tol,
    );
    Ok(Output::Table(t))
}

pub fn transition_fit(
    lambda_min: f64,
    lambda_max: f64,
    samples: usize,
    common: &Common,
) -> Result<Output, Failure> {
    let (th, spec) = (common.thermal()?, common.spec()?);
    let fit = divergence_fit(&th, lambda_min, lambda_max, samples, &spec)?;
    let mut t = with_common(
        Table::new(
            "transition-fit",
            &[
                "c_fit",
                "c_theory",
                "relative_error",
                "c_flux",
                "relative_error_flux",
                "intercept",
                "residual",
            ],
        ),
        common,
    )
    .param("lambda_min", lambda_min)
    .param("lambda_max", lambda_max)
    .param("samples", samples)
    .param("lambda_grid", json!(fit.lambda_grid))
    .param("log_slope", log_slope_coefficient(&th));
    t.push_values(&[
        fit.c_fit,
        fit.c_theory,
        fit.relative_error(),
        fit.c_flux,
        fit.relative_error_flux(),
        fit.intercept,
        fit.residual,
    ]);
    Ok(Output::Table(t))
}

/// Turns failed checks recorded in a report into the oracle exit status.
pub fn verdict(out: &Output) -> Result<(), Failure> {
    match out {
        Output::Table(t) if !t.failures.is_empty() => Err(Failure::Oracle(t.failures.join("; "))),
        _ => Ok(()),
    }
}
