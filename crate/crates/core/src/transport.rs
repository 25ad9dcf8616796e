//! Heat flux through the impurity, entropy production, and the behaviour of
//! the flux as a function of the field near zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{planck_density, planck_difference, ModelParams, ThermalConfig};
use crate::numerics::{adaptive_integrate, QuadratureSpec};
use crate::scattering::{magnetic_correction, MagneticCorrection};

/// Below this field strength the two derivative routes are not compared.
const CROSS_CHECK_MIN_FIELD: f64 = 1e-3;
const DERIVATIVE_ROUTE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub params: ModelParams,
    pub thermal: ThermalConfig,
    /// Energy current out of the left reservoir.
    pub j: f64,
    pub sigma: f64,
    pub j_prime: f64,
    /// `None` at zero field, where the second derivative does not exist.
    pub j_second: Option<f64>,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceFit {
    /// Decreasing field strengths.
    pub lambda_grid: Vec<f64>,
    pub c_fit: f64,
    pub c_theory: f64,
    /// Slope implied by [`heat_flux`] itself, half of `c_theory`.
    pub c_flux: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the regression.
    pub residual: f64,
}

impl DivergenceFit {
    /// `|C_fit - C_theory| / C_theory`.
    pub fn relative_error(&self) -> f64 {
        ((self.c_fit - self.c_theory) / self.c_theory).abs()
    }

    /// `|C_fit - C_flux| / C_flux`.
    pub fn relative_error_flux(&self) -> f64 {
        ((self.c_fit - self.c_flux) / self.c_flux).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDecomposition {
    pub lambda: f64,
    pub f1: f64,
    pub f2: f64,
    pub f0: f64,
    pub c_bound: f64,
}

impl LogDecomposition {
    /// `F1 + F2`, equal to `-(pi / 2) J' / lambda`.
    pub fn total(&self) -> f64 {
        self.f1 + self.f2
    }
}

/// `x -> Delta rho(sqrt(1 - x^2))` on `[0, 1]`.
pub fn thermal_kernel(th: &ThermalConfig, x: f64) -> f64 {
    let e = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    planck_difference(th, e)
}

fn peak_breaks(lambda: f64, upper: f64) -> Vec<f64> {
    let l = lambda.abs();
    [l, 10.0 * l]
        .into_iter()
        .filter(|&b| b > 0.0 && b < upper)
        .collect()
}

fn momentum_flux(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let corr = MagneticCorrection::new(params.lambda);
    let r = adaptive_integrate(
        |k: f64| {
            let e = k.cos();
            0.5 / (2.0 * PI) * e * k.sin().abs() * planck_difference(th, e) * corr.at_momentum(k)
        },
        -PI,
        PI,
        &spec.rebreak(&[0.0]),
    )?;
    Ok((r.value, r.error_estimate))
}

fn energy_flux(params: &ModelParams, th: &ThermalConfig, spec: &QuadratureSpec) -> Result<f64> {
    let lambda = params.lambda;
    let r = adaptive_integrate(
        |e: f64| e * planck_difference(th, e) * magnetic_correction(lambda, e),
        0.0,
        1.0,
        &spec.rebreak(&[]),
    )?;
    Ok(r.value / PI)
}

/// The flux and its quadrature error, after checking the momentum and
/// energy representations against each other.
pub fn heat_flux_with_error(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    spec.validate()?;
    let (j, err) = momentum_flux(params, th, spec)?;
    let j_energy = energy_flux(params, th, spec)?;
    let allowed = 10.0 * spec.abs_tol;
    let discrepancy = (j - j_energy).abs();
    if discrepancy > allowed {
        return Err(Error::RouteMismatch {
            what: "heat flux",
            discrepancy,
            allowed,
        });
    }
    Ok((j, err))
}

pub fn heat_flux(params: &ModelParams, th: &ThermalConfig, spec: &QuadratureSpec) -> Result<f64> {
    heat_flux_with_error(params, th, spec).map(|(j, _)| j)
}

pub fn entropy_production(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok((th.beta_r - th.beta_l) * heat_flux(params, th, spec)?)
}

/// `dJ / dlambda` in the momentum representation.
pub fn flux_derivative_momentum(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let lambda = params.lambda;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let l2 = lambda * lambda;
    let breaks: Vec<f64> = peak_breaks(lambda, 1.0)
        .into_iter()
        .map(f64::asin)
        .collect();
    let r = adaptive_integrate(
        |k: f64| {
            let e = k.cos();
            let s = k.sin();
            let d = s * s + l2;
            e * planck_difference(th, e) * s * s * s / (d * d)
        },
        0.0,
        PI / 2.0,
        &spec.rebreak(&breaks),
    )?;
    Ok(-4.0 * lambda / (2.0 * PI) * r.value)
}

/// `dJ / dlambda` after substituting `x = sin k`, which moves the peak of
/// width `lambda` to the endpoint `x = 0`.
pub fn flux_derivative_arcsin(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let lambda = params.lambda;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let l2 = lambda * lambda;
    let r = adaptive_integrate(
        |x: f64| {
            let d = x * x + l2;
            thermal_kernel(th, x) * x * x * x / (d * d)
        },
        0.0,
        1.0,
        &spec.rebreak(&peak_breaks(lambda, 1.0)),
    )?;
    Ok(-2.0 * lambda / PI * r.value)
}

/// Returns the substituted form; for `|lambda| >= 1e-3` the momentum form is
/// also evaluated and the two must agree within `1e-9`.
pub fn flux_derivative(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    let value = flux_derivative_arcsin(params, th, spec)?;
    if params.lambda.abs() >= CROSS_CHECK_MIN_FIELD {
        let other = flux_derivative_momentum(params, th, spec)?;
        let discrepancy = (value - other).abs();
        if discrepancy > DERIVATIVE_ROUTE_TOL {
            return Err(Error::RouteMismatch {
                what: "flux derivative",
                discrepancy,
                allowed: DERIVATIVE_ROUTE_TOL,
            });
        }
    }
    Ok(value)
}

/// `d^2 J / dlambda^2`, differentiating under the integral.
pub fn flux_second_derivative(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    let lambda = params.lambda;
    if lambda == 0.0 {
        return Err(Error::UndefinedAtOrigin);
    }
    let l2 = lambda * lambda;
    let r = adaptive_integrate(
        |x: f64| {
            let d = x * x + l2;
            let x3 = x * x * x;
            thermal_kernel(th, x) * x3 * (1.0 - 4.0 * l2 / d) / (d * d)
        },
        0.0,
        1.0,
        &spec.rebreak(&peak_breaks(lambda, 1.0)),
    )?;
    Ok(-2.0 / PI * r.value)
}

/// `rho_{beta_L}(1) - rho_{beta_R}(1)`, the thermal kernel at `x = 0`.
pub fn kernel_at_origin(th: &ThermalConfig) -> f64 {
    planck_difference(th, 1.0)
}

/// `(4 / pi) (rho_{beta_L}(1) - rho_{beta_R}(1))`, the coefficient of
/// `lambda log|lambda|` as usually quoted. It is twice the slope that follows
/// from differentiating [`heat_flux`]; see [`log_slope_coefficient`].
pub fn transition_coefficient(th: &ThermalConfig) -> f64 {
    4.0 / PI * (planck_density(th.beta_l, 1.0) - planck_density(th.beta_r, 1.0))
}

/// Exact coefficient of `log|lambda|` in `J' / lambda` for the flux as
/// normalized by [`heat_flux`]: `(2 / pi) f(0)`.
pub fn log_slope_coefficient(th: &ThermalConfig) -> f64 {
    2.0 / PI * kernel_at_origin(th)
}

/// Bound on the derivative of the thermal kernel used to control `F2`.
pub fn kernel_slope_bound(th: &ThermalConfig) -> f64 {
    let (d, b) = (th.delta(), th.beta_mean());
    (d + d * d.cosh() * b.cosh() + b * d.sinh() * b.sinh()) / 4.0
}

/// Splits `int_0^1 f(x) x^3 / (x^2 + lambda^2)^2 dx` into the logarithmically
/// divergent piece carried by `f(0)` and a bounded remainder.
pub fn log_decomposition(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<LogDecomposition> {
    spec.validate()?;
    let lambda = params.lambda;
    if lambda == 0.0 {
        return Err(Error::Domain(
            "the logarithmic split needs a nonzero field".into(),
        ));
    }
    let f0 = kernel_at_origin(th);
    let l2 = lambda * lambda;
    let f1 = -f0 * lambda.abs().ln() - 0.5 * f0 * (1.0 / (1.0 + l2) - l2.ln_1p());
    let f2 = adaptive_integrate(
        |x: f64| {
            let d = x * x + l2;
            (thermal_kernel(th, x) - f0) * x * x * x / (d * d)
        },
        0.0,
        1.0,
        &spec.rebreak(&peak_breaks(lambda, 1.0)),
    )?
    .value;
    Ok(LogDecomposition {
        lambda,
        f1,
        f2,
        f0,
        c_bound: kernel_slope_bound(th),
    })
}

pub fn flux_report(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<FluxReport> {
    let (j, quadrature_error) = heat_flux_with_error(params, th, spec)?;
    let j_second = match flux_second_derivative(params, th, spec) {
        Ok(v) => Some(v),
        Err(Error::UndefinedAtOrigin) => None,
        Err(e) => return Err(e),
    };
    Ok(FluxReport {
        params: *params,
        thermal: *th,
        j,
        sigma: (th.beta_r - th.beta_l) * j,
        j_prime: flux_derivative(params, th, spec)?,
        j_second,
        quadrature_error,
    })
}

/// Least-squares slope of `J' / lambda` against `log lambda` on a geometric grid.
pub fn divergence_fit(
    th: &ThermalConfig,
    lambda_min: f64,
    lambda_max: f64,
    n_samples: usize,
    spec: &QuadratureSpec,
) -> Result<DivergenceFit> {
    spec.validate()?;
    if !(lambda_min > 0.0 && lambda_min < lambda_max && lambda_max <= 1e-2) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < lambda_min < lambda_max <= 1e-2, got [{lambda_min}, {lambda_max}]"
        )));
    }
    if n_samples < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 samples, got {n_samples}"
        )));
    }
    if lambda_max / lambda_min < 10.0 {
        return Err(Error::IllConditioned(format!(
            "grid [{lambda_min:e}, {lambda_max:e}] spans less than a decade"
        )));
    }
    let ratio = (lambda_min / lambda_max).ln() / (n_samples - 1) as f64;
    let lambda_grid: Vec<f64> = (0..n_samples)
        .map(|i| {
            if i == n_samples - 1 {
                lambda_min
            } else {
                lambda_max * (ratio * i as f64).exp()
            }
        })
        .collect();
    let mut xs = Vec::with_capacity(n_samples);
    let mut ys = Vec::with_capacity(n_samples);
    for &l in &lambda_grid {
        let p = ModelParams { lambda: l, nu: 0 };
        xs.push(l.ln());
        ys.push(flux_derivative(&p, th, spec)? / l);
    }
    let n = n_samples as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DivergenceFit {
        lambda_grid,
        c_fit: slope,
        c_theory: transition_coefficient(th),
        c_flux: log_slope_coefficient(th),
        intercept,
        residual,
    })
}
