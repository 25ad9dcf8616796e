//! Momentum-space scattering data of the one-site impurity.
//!
//! Plane waves `e_x(k) = exp(ikx)` on `[-pi, pi]` with measure `dk / 2pi`. The
//! wave operator that maps the magnetic dynamics onto the free one acts on
//! them in closed form, and the translation-invariant steady state of the
//! clean chain is multiplication by a piecewise Fermi function. Everything in
//! the magnetic steady state is built from those two ingredients plus the
//! bound state.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    bound_state, check_momentum, planck_density, BoundState, ModelParams, ThermalConfig,
};
use crate::numerics::{adaptive_integrate, geometric_sine_sum, QuadratureSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(w e_x)(k) = e^{ikx} + i lambda e^{i|k||x|} / (sin|k| - i lambda)`.
pub fn wave_action(lambda: f64, x: i64, k: f64) -> Result<Complex64> {
    check_momentum(k)?;
    Ok(wave_action_unchecked(lambda, x, k))
}

fn wave_action_unchecked(lambda: f64, x: i64, k: f64) -> Complex64 {
    let plane = Complex64::from_polar(1.0, k * x as f64);
    if lambda == 0.0 {
        return plane;
    }
    let ka = k.abs();
    let outgoing = Complex64::from_polar(1.0, ka * x.unsigned_abs() as f64);
    plane + I * lambda * outgoing / Complex64::new(ka.sin(), -lambda)
}

/// Symbol of the clean-chain steady state: right movers carry the left
/// temperature and vice versa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XySymbol {
    pub thermal: ThermalConfig,
}

impl XySymbol {
    pub fn new(thermal: ThermalConfig) -> Self {
        Self { thermal }
    }

    /// `k = 0` belongs to the closed left branch.
    pub fn value(&self, k: f64) -> Result<f64> {
        check_momentum(k)?;
        Ok(self.value_unchecked(k))
    }

    fn value_unchecked(&self, k: f64) -> f64 {
        let beta = if k <= 0.0 {
            self.thermal.beta_r
        } else {
            self.thermal.beta_l
        };
        planck_density(beta, k.cos())
    }
}

pub fn xy_symbol(th: &ThermalConfig, k: f64) -> Result<f64> {
    XySymbol::new(*th).value(k)
}

/// Transmission-like suppression `(1 - e^2) / (1 - e^2 + lambda^2)` on the band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticCorrection {
    pub lambda: f64,
}

impl MagneticCorrection {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    pub fn at_energy(&self, e: f64) -> f64 {
        magnetic_correction(self.lambda, e)
    }

    /// Same function composed with the dispersion, written with `sin^2 k`
    /// so that it stays accurate next to the band edges.
    pub fn at_momentum(&self, k: f64) -> f64 {
        if self.lambda == 0.0 {
            return 1.0;
        }
        let s2 = k.sin().powi(2);
        s2 / (s2 + self.lambda * self.lambda)
    }
}

pub fn magnetic_correction(lambda: f64, e: f64) -> f64 {
    if lambda == 0.0 {
        return 1.0;
    }
    let gap = (1.0 - e) * (1.0 + e);
    gap / (gap + lambda * lambda)
}

/// `(w e_x, theta w e_y)`: the absolutely continuous part of the steady-state
/// two-point function, as the sum of a plain Fourier term, a term linear in
/// the field and a term quadratic in it.
pub fn ac_overlap(
    params: &ModelParams,
    th: &ThermalConfig,
    x: i64,
    y: i64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let spec = spec.rebreak(&[0.0]);
    let symbol = XySymbol::new(*th);
    let lambda = params.lambda;
    let (xf, yf) = (x as f64, y as f64);
    let (xa, ya) = (x.unsigned_abs() as f64, y.unsigned_abs() as f64);
    let norm = 1.0 / (2.0 * PI);

    let plain = adaptive_integrate(
        |k: f64| Complex64::from_polar(symbol.value_unchecked(k) * norm, k * (yf - xf)),
        -PI,
        PI,
        &spec,
    )?
    .value;
    if lambda == 0.0 {
        return Ok(plain);
    }

    let l2 = lambda * lambda;
    let linear = adaptive_integrate(
        |k: f64| {
            let ka = k.abs();
            let s = ka.sin();
            let kernel = symbol.value_unchecked(k) * norm * s / (s * s + l2);
            let a = Complex64::from_polar(1.0, ka * ya - k * xf);
            let b = Complex64::from_polar(1.0, k * yf - ka * xa);
            (a - b) * kernel
        },
        -PI,
        PI,
        &spec,
    )?
    .value;
    let quadratic = adaptive_integrate(
        |k: f64| {
            let ka = k.abs();
            let s = ka.sin();
            let kernel = symbol.value_unchecked(k) * norm / (s * s + l2);
            let a = Complex64::from_polar(1.0, ka * ya - k * xf);
            let b = Complex64::from_polar(1.0, k * yf - ka * xa);
            let c = Complex64::from_polar(1.0, ka * (ya - xa));
            (a + b - c) * kernel
        },
        -PI,
        PI,
        &spec,
    )?
    .value;

    Ok(plain + I * lambda * linear - l2 * quadratic)
}

/// The three pieces of `(f, s_d f)` for the normalized bound state `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpectrumWeight {
    pub left: f64,
    pub sample: f64,
    pub right: f64,
}

impl PointSpectrumWeight {
    pub fn total(&self) -> f64 {
        self.left + self.sample + self.right
    }
}

/// Decomposes `(f, s_d f)` over the reservoirs and the sample.
///
/// Each reservoir is a Dirichlet half-line whose eigenfunctions are
/// `sin(k (x - nu))` with weight `(2/pi) dk` on `[0, pi]`; the bound state's
/// sine transform on a half-line is a geometric series in `exp(-alpha)`.
pub fn pp_weight_parts(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<PointSpectrumWeight> {
    let bound = bound_state(params.lambda)?;
    let prefactor = (-2.0 * bound.alpha_lambda * params.nu as f64).exp() / bound.nu_lambda_sq;
    let q = bound.ratio();
    let reservoir = |beta: f64| -> Result<f64> {
        let spec = spec.rebreak(&[]);
        let r = adaptive_integrate(
            |k: f64| {
                // |q| < 1 holds for every finite nonzero field
                let g = geometric_sine_sum(q, k).unwrap_or(f64::NAN);
                planck_density(beta, k.cos()) * g * g
            },
            0.0,
            PI,
            &spec,
        )?;
        Ok(2.0 / PI * prefactor * r.value)
    };
    let sample = sample_weight(&bound, params.nu);
    Ok(PointSpectrumWeight {
        left: reservoir(th.beta_l)?,
        sample,
        right: reservoir(th.beta_r)?,
    })
}

fn sample_weight(bound: &BoundState, nu: u32) -> f64 {
    let nu = nu as i64;
    0.5 * (-nu..=nu).map(|x| bound.amplitude(x).powi(2)).sum::<f64>()
}

/// `(f, s_d f)`; zero when there is no bound state.
pub fn pp_weight(params: &ModelParams, th: &ThermalConfig, spec: &QuadratureSpec) -> Result<f64> {
    if params.lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(pp_weight_parts(params, th, spec)?.total())
}

/// Like [`pp_weight`] but refuses a vanishing field.
pub fn pp_weight_strict(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if params.lambda == 0.0 {
        return Err(Error::NoBoundState);
    }
    pp_weight(params, th, spec)
}
