//! Scalar numerics shared by the analytic modules.
//!
//! The integrator is a globally adaptive 21-point Gauss–Kronrod scheme in the
//! QUADPACK tradition: the interval with the largest error estimate is bisected
//! until the summed estimate drops below `max(abs_tol, rel_tol * |value|)`.
//! Integrands with kinks or jumps must declare them as breakpoints so that no
//! Kronrod panel straddles a non-smooth point.

// Node tables are quoted to full published precision; `!(a < b)` also rejects NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and breakpoints for [`adaptive_integrate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Interior points where the integrand is not smooth, strictly increasing.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    /// Same tolerances, different breakpoints. Used by callers that know where
    /// their own integrands are non-smooth.
    pub(crate) fn rebreak(&self, breakpoints: &[f64]) -> Self {
        Self {
            breakpoints: breakpoints.to_vec(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol >= 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be non-negative, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
}

/// Values an integrand may return: real or complex scalars.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

// 21-point Kronrod abscissae on [-1, 1] (positive half, descending) and weights;
// the odd-indexed abscissae are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_977_780_596,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod21<T, F>(f: &F, a: f64, b: f64) -> Result<Panel<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[10];
    let mut res_g = T::zero();
    let mut res_abs = f_center.magnitude() * WGK[10];
    let mut samples = [(T::zero(), T::zero()); 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[j] = (f1, f2);
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    if !res_k.is_finite_value() {
        return Err(Error::Domain(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).magnitude();
    for (j, (f1, f2)) in samples.iter().enumerate() {
        res_asc += WGK[j] * ((*f1 - mean).magnitude() + (*f2 - mean).magnitude());
    }

    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((res_k - res_g) * half).magnitude();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over `[a, b]`, splitting first at `spec.breakpoints`.
///
/// Panels are summed left to right at the end so the result does not depend
/// on the order in which the adaptive loop refined them.
pub fn adaptive_integrate<T, F>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInterval { a, b });
    }
    spec.validate()?;
    let mut edges = Vec::with_capacity(spec.breakpoints.len() + 2);
    edges.push(a);
    for &p in &spec.breakpoints {
        if !(p > a && p < b) {
            return Err(Error::InvalidParameter(format!(
                "breakpoint {p} is not strictly inside [{a}, {b}]"
            )));
        }
        if p <= *edges.last().unwrap() {
            return Err(Error::InvalidParameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        edges.push(p);
    }
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let mut finished: Vec<Panel<T>> = Vec::new();
    for w in edges.windows(2) {
        heap.push(kronrod21(&f, w[0], w[1])?);
    }

    let mut subdivisions = 0;
    loop {
        let (value, error) = totals(heap.iter().chain(finished.iter()));
        let tolerance = spec.abs_tol.max(spec.rel_tol * value.magnitude());
        if error <= tolerance {
            break;
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::NonConvergence {
                error_estimate: error,
                tolerance,
                subdivisions,
            });
        };
        if subdivisions >= spec.max_subdivisions {
            heap.push(worst);
            return Err(Error::NonConvergence {
                error_estimate: error,
                tolerance,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        // Panels narrower than a few ulps cannot be refined further.
        if mid <= worst.a
            || mid >= worst.b
            || (worst.b - worst.a) < 1e3 * f64::EPSILON * mid.abs().max(1e-300)
        {
            finished.push(worst);
            continue;
        }
        heap.push(kronrod21(&f, worst.a, mid)?);
        heap.push(kronrod21(&f, mid, worst.b)?);
        subdivisions += 1;
    }

    let mut panels: Vec<Panel<T>> = heap.into_vec();
    panels.extend(finished);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let (value, error_estimate) = totals(panels.iter());
    Ok(QuadratureResult {
        value,
        error_estimate,
        subdivisions_used: subdivisions,
    })
}

fn totals<'a, T: QuadValue + 'a>(panels: impl Iterator<Item = &'a Panel<T>>) -> (T, f64) {
    panels.fold((T::zero(), 0.0), |(v, e), p| (v + p.value, e + p.error))
}

/// Closed form of `sum_{n >= 1} q^n sin(k n)` for `|q| < 1`.
pub fn geometric_sine_sum(q: f64, k: f64) -> Result<f64> {
    if !(q.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "geometric ratio |q| = {} must be < 1",
            q.abs()
        )));
    }
    let denom = 1.0 - 2.0 * q * k.cos() + q * q;
    Ok(q * k.sin() / denom)
}
