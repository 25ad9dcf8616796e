//! The magnetic steady-state two-point function `s(x, y) = (delta_x, s delta_y)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{bound_state, planck_difference, BoundState, ModelParams, ThermalConfig};
use crate::numerics::{adaptive_integrate, QuadratureSpec};
use crate::scattering::{ac_overlap, pp_weight, MagneticCorrection};

/// Largest window accepted by [`correlation_block`].
pub const MAX_WINDOW: usize = 512;

/// Element-wise evaluator that computes the pure-point weight once.
#[derive(Debug, Clone)]
pub struct NessEvaluator {
    params: ModelParams,
    thermal: ThermalConfig,
    spec: QuadratureSpec,
    bound: Option<(BoundState, f64)>,
}

impl NessEvaluator {
    pub fn new(params: ModelParams, thermal: ThermalConfig, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let bound = if params.lambda == 0.0 {
            None
        } else {
            Some((
                bound_state(params.lambda)?,
                pp_weight(&params, &thermal, &spec)?,
            ))
        };
        Ok(Self {
            params,
            thermal,
            spec,
            bound,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn thermal(&self) -> &ThermalConfig {
        &self.thermal
    }

    /// `(f, s_d f)`, zero without a bound state.
    pub fn pp_weight(&self) -> f64 {
        self.bound.map_or(0.0, |(_, w)| w)
    }

    pub fn element(&self, x: i64, y: i64) -> Result<Complex64> {
        let ac = ac_overlap(&self.params, &self.thermal, x, y, &self.spec)?;
        Ok(match &self.bound {
            Some((f, w)) => ac + w * f.amplitude(x) * f.amplitude(y),
            None => ac,
        })
    }
}

pub fn s_element(
    params: &ModelParams,
    th: &ThermalConfig,
    x: i64,
    y: i64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    NessEvaluator::new(*params, *th, spec.clone())?.element(x, y)
}

/// Inclusive range of sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteWindow {
    pub x_min: i64,
    pub x_max: i64,
}

impl SiteWindow {
    pub fn new(x_min: i64, x_max: i64) -> Result<Self> {
        if x_min > x_max {
            return Err(Error::InvalidParameter(format!(
                "empty window [{x_min}, {x_max}]"
            )));
        }
        Ok(Self { x_min, x_max })
    }

    /// Window of `2 * half + 1` sites around the impurity.
    pub fn centered(half: u32) -> Self {
        Self {
            x_min: -(half as i64),
            x_max: half as i64,
        }
    }

    pub fn len(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.x_min..=self.x_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationBlock {
    pub window: SiteWindow,
    pub params: ModelParams,
    pub thermal: ThermalConfig,
    pub values: DMatrix<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct BlockRecord {
    window: SiteWindow,
    params: ModelParams,
    thermal: ThermalConfig,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl CorrelationBlock {
    pub fn get(&self, x: i64, y: i64) -> Option<Complex64> {
        let w = &self.window;
        if x < w.x_min || x > w.x_max || y < w.x_min || y > w.x_max {
            return None;
        }
        Some(self.values[((x - w.x_min) as usize, (y - w.x_min) as usize)])
    }

    /// Largest entry of `|S - S^*|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.values.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.values[(i, j)] - self.values[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Ascending eigenvalues of the block.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.values.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Largest deviation from depending on `y - x` only.
    pub fn toeplitz_residual(&self) -> f64 {
        let n = self.values.nrows();
        let mut worst: f64 = 0.0;
        for i in 1..n {
            for j in 1..n {
                worst = worst.max((self.values[(i, j)] - self.values[(i - 1, j - 1)]).norm());
            }
        }
        worst
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.values.nrows();
        let rows = |part: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| part(&self.values[(i, j)])).collect())
                .collect()
        };
        let record = BlockRecord {
            window: self.window,
            params: self.params,
            thermal: self.thermal,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        };
        serde_json::to_value(record).expect("block record is plain data")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let record: BlockRecord = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidParameter(format!("block record: {e}")))?;
        let n = record.window.len();
        if record.re.len() != n || record.im.len() != n {
            return Err(Error::InvalidParameter(
                "block record has wrong shape".into(),
            ));
        }
        let mut values = DMatrix::zeros(n, n);
        for i in 0..n {
            if record.re[i].len() != n || record.im[i].len() != n {
                return Err(Error::InvalidParameter(
                    "block record has wrong shape".into(),
                ));
            }
            for j in 0..n {
                values[(i, j)] = Complex64::new(record.re[i][j], record.im[i][j]);
            }
        }
        Ok(Self {
            window: record.window,
            params: record.params,
            thermal: record.thermal,
            values,
        })
    }
}

/// Fills the upper triangle in parallel and mirrors it.
pub fn correlation_block(
    params: &ModelParams,
    th: &ThermalConfig,
    window: SiteWindow,
    spec: &QuadratureSpec,
) -> Result<CorrelationBlock> {
    let n = window.len();
    if n > MAX_WINDOW {
        return Err(Error::WindowTooLarge {
            len: n,
            max: MAX_WINDOW,
        });
    }
    let eval = NessEvaluator::new(*params, *th, spec.clone())?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let entries: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(i, j)| eval.element(window.x_min + i as i64, window.x_min + j as i64))
        .collect::<Result<_>>()?;
    let mut values = DMatrix::zeros(n, n);
    for (&(i, j), z) in pairs.iter().zip(entries) {
        values[(i, j)] = z;
        values[(j, i)] = z.conj();
    }
    for i in 0..n {
        values[(i, i)].im = 0.0;
    }
    Ok(CorrelationBlock {
        window,
        params: *params,
        thermal: *th,
        values,
    })
}

/// `(delta_0, [s, u] delta_1)` with `u` the right shift, as a single
/// momentum integral. The bound-state contribution cancels exactly.
pub fn ti_commutator_element(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    let lambda = params.lambda;
    if lambda == 0.0 || th.is_equilibrium() {
        return Ok(0.0);
    }
    let corr = MagneticCorrection::new(lambda);
    let r = adaptive_integrate(
        |k: f64| {
            let e = k.cos();
            e * planck_difference(th, e) * corr.at_momentum(k)
        },
        0.0,
        PI,
        &spec.rebreak(&[PI / 2.0]),
    )?;
    Ok(lambda / PI * r.value)
}

/// Both routes to the commutator element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorCheck {
    pub fast: f64,
    pub matrix: f64,
    /// Imaginary part of the matrix-element difference; zero in exact arithmetic.
    pub matrix_imag: f64,
    pub discrepancy: f64,
}

/// Runs the integral and the difference `s(0, 2) - s(-1, 1)`, failing with
/// `RouteMismatch` when they differ by more than `allowed`.
pub fn ti_commutator_verified(
    params: &ModelParams,
    th: &ThermalConfig,
    spec: &QuadratureSpec,
    allowed: f64,
) -> Result<CommutatorCheck> {
    let fast = ti_commutator_element(params, th, spec)?;
    let eval = NessEvaluator::new(*params, *th, spec.clone())?;
    let diff = eval.element(0, 2)? - eval.element(-1, 1)?;
    let discrepancy = (fast - diff.re).abs().max(diff.im.abs());
    if discrepancy > allowed {
        return Err(Error::RouteMismatch {
            what: "translation-invariance commutator",
            discrepancy,
            allowed,
        });
    }
    Ok(CommutatorCheck {
        fast,
        matrix: diff.re,
        matrix_imag: diff.im,
        discrepancy,
    })
}
