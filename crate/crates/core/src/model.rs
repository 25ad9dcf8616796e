//! Physical parameters, lattice stencils and the impurity bound state.
//!
//! Energies are measured in units of the hopping; the XY Hamiltonian is the
//! real part of the right translation, so its dispersion is `cos k` and the
//! band is `[-1, 1]`. The sample occupies the sites `|x| <= nu`, the
//! reservoirs everything to the left and right of it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inverse temperatures of the left and right reservoirs.
///
/// The sample starts at infinite temperature. `beta_l == beta_r` is admitted so
/// that equilibrium checks can be expressed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalConfig {
    pub beta_l: f64,
    pub beta_r: f64,
}

impl ThermalConfig {
    pub fn new(beta_l: f64, beta_r: f64) -> Result<Self> {
        if !(beta_l > 0.0 && beta_l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta_l must be positive and finite, got {beta_l}"
            )));
        }
        if !(beta_r.is_finite() && beta_r >= beta_l) {
            return Err(Error::InvalidParameter(format!(
                "beta_r must be finite with beta_l <= beta_r, got beta_l = {beta_l}, beta_r = {beta_r}"
            )));
        }
        Ok(Self { beta_l, beta_r })
    }

    /// Half the inverse-temperature difference, `(beta_r - beta_l) / 2`.
    pub fn delta(&self) -> f64 {
        0.5 * (self.beta_r - self.beta_l)
    }

    /// Mean inverse temperature, `(beta_r + beta_l) / 2`.
    pub fn beta_mean(&self) -> f64 {
        0.5 * (self.beta_r + self.beta_l)
    }

    pub fn is_equilibrium(&self) -> bool {
        self.beta_l == self.beta_r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Strength of the magnetic field on site 0.
    pub lambda: f64,
    /// Sample half-width.
    pub nu: u32,
}

impl ModelParams {
    pub fn new(lambda: f64, nu: u32) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        Ok(Self { lambda, nu })
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    /// Translation-invariant XY Hamiltonian `h`.
    Xy,
    /// `h` with the sample cut loose from both reservoirs.
    Decoupled,
    /// `h` plus the one-site field.
    Magnetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reservoir {
    Left,
    Right,
}

/// Fermi occupation `1 / (1 + exp(r e))`.
pub fn planck_density(r: f64, e: f64) -> f64 {
    let x = r * e;
    // Split on the sign so exp never overflows.
    if x > 0.0 {
        let t = (-x).exp();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `rho_{beta_l}(e) - rho_{beta_r}(e)` in the form `sinh(delta e) / (cosh(delta e) + cosh(beta e))`.
pub fn planck_difference(th: &ThermalConfig, e: f64) -> f64 {
    let a = th.delta() * e;
    let b = th.beta_mean() * e;
    // Divide through by cosh(b) to stay finite for large arguments.
    let ratio = (a.abs() - b.abs()).exp();
    let sinh_part = -0.5 * (-2.0 * a.abs()).exp_m1() * a.signum();
    let cosh_a = 0.5 * (1.0 + (-2.0 * a.abs()).exp());
    let cosh_b = 0.5 * (1.0 + (-2.0 * b.abs()).exp());
    ratio * sinh_part / (ratio * cosh_a + cosh_b)
}

pub fn dispersion(k: f64) -> Result<f64> {
    check_momentum(k)?;
    Ok(k.cos())
}

pub(crate) fn check_momentum(k: f64) -> Result<()> {
    if !(-PI..=PI).contains(&k) {
        return Err(Error::Domain(format!("momentum {k} outside [-pi, pi]")));
    }
    Ok(())
}

/// Matrix element `(delta_x, H delta_y)` of the chosen one-particle operator.
pub fn operator_stencil(kind: OperatorKind, params: &ModelParams, x: i64, y: i64) -> f64 {
    let hopping = if (x - y).abs() == 1 { 0.5 } else { 0.0 };
    match kind {
        OperatorKind::Xy => hopping,
        OperatorKind::Magnetic => {
            if x == 0 && y == 0 {
                hopping + params.lambda
            } else {
                hopping
            }
        }
        OperatorKind::Decoupled => {
            hopping
                - decoupling_stencil(Reservoir::Left, params.nu, x, y)
                - decoupling_stencil(Reservoir::Right, params.nu, x, y)
        }
    }
}

/// Matrix element of the bond that ties the sample to one reservoir.
pub fn decoupling_stencil(side: Reservoir, nu: u32, x: i64, y: i64) -> f64 {
    let nu = nu as i64;
    let (inner, outer) = match side {
        Reservoir::Left => (-nu, -(nu + 1)),
        Reservoir::Right => (nu, nu + 1),
    };
    if (x == inner && y == outer) || (x == outer && y == inner) {
        0.5
    } else {
        0.0
    }
}

/// The single eigenvector of the magnetic Hamiltonian outside the band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub lambda: f64,
    pub e_lambda: f64,
    /// Decay rate: `|f(x)| ∝ exp(-alpha |x|)`.
    pub alpha_lambda: f64,
    /// Square of the normalization constant.
    pub nu_lambda_sq: f64,
    /// Alternating sign `(-1)^x`, present for negative fields.
    pub staggered: bool,
}

impl BoundState {
    pub fn amplitude(&self, x: i64) -> f64 {
        let magnitude =
            (-self.alpha_lambda * x.unsigned_abs() as f64).exp() / self.nu_lambda_sq.sqrt();
        if self.staggered && x.rem_euclid(2) == 1 {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Ratio of consecutive amplitudes on a half-line, signed for staggering.
    pub fn ratio(&self) -> f64 {
        let q = (-self.alpha_lambda).exp();
        if self.staggered {
            -q
        } else {
            q
        }
    }

    /// `sum_x f(x)^2`, summing `|x| <= cutoff` explicitly and the tail in closed form.
    pub fn norm_sq(&self, cutoff: u32) -> f64 {
        let q2 = (-2.0 * self.alpha_lambda).exp();
        let head: f64 = (-(cutoff as i64)..=cutoff as i64)
            .map(|x| self.amplitude(x).powi(2))
            .sum();
        let tail = 2.0 * q2.powi(cutoff as i32 + 1) / (1.0 - q2) / self.nu_lambda_sq;
        head + tail
    }
}

pub fn bound_state(lambda: f64) -> Result<BoundState> {
    if lambda == 0.0 {
        return Err(Error::NoBoundState);
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    let radius = 1.0f64.hypot(lambda);
    Ok(BoundState {
        lambda,
        e_lambda: radius.copysign(lambda),
        // log(sqrt(1 + l^2) + |l|) without cancellation at small |l|
        alpha_lambda: lambda.abs().asinh(),
        nu_lambda_sq: radius / lambda.abs(),
        staggered: lambda < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn planck_examples() {
        assert_eq!(planck_density(3.0, 0.0), 0.5);
        assert_eq!(planck_density(0.0, -4.0), 0.5);
        assert!((planck_density(2.0, 1.0) - 1.0 / (1.0 + 2.0f64.exp())).abs() < 1e-16);
        assert!((planck_density(2.0, 1.0) - 0.119_202_92).abs() < 1e-8);
        assert!(planck_density(800.0, 1.0) >= 0.0 && planck_density(-800.0, 1.0) <= 1.0);
    }

    #[test]
    fn planck_difference_examples() {
        let th = ThermalConfig::new(1.0, 2.0).unwrap();
        assert_eq!(planck_difference(&th, 0.0), 0.0);
        let direct = planck_density(1.0, 0.5) - planck_density(2.0, 0.5);
        assert!((planck_difference(&th, 0.5) - direct).abs() < 1e-15);
        let closed = 0.5f64.sinh() / (0.5f64.cosh() + 1.5f64.cosh());
        assert!((planck_difference(&th, 1.0) - closed).abs() < 1e-15);
        assert!((closed - 0.149_738_5).abs() < 1e-7);
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(0.0).unwrap(), 1.0);
        assert!(dispersion(PI / 2.0).unwrap().abs() < 1e-16);
        assert_eq!(dispersion(PI).unwrap(), -1.0);
        assert!(dispersion(3.2).is_err());
    }

    #[test]
    fn thermal_validation() {
        assert!(ThermalConfig::new(2.0, 1.0).is_err());
        assert!(ThermalConfig::new(0.0, 1.0).is_err());
        assert!(ThermalConfig::new(1.0, f64::INFINITY).is_err());
        let th = ThermalConfig::new(1.0, 2.0).unwrap();
        assert_eq!(th.delta(), 0.5);
        assert_eq!(th.beta_mean(), 1.5);
        assert!(ThermalConfig::new(2.0, 2.0).unwrap().is_equilibrium());
    }

    #[test]
    fn stencil_examples() {
        let mag = ModelParams::new(0.2, 0).unwrap();
        assert_eq!(operator_stencil(OperatorKind::Magnetic, &mag, 0, 0), 0.2);
        assert_eq!(operator_stencil(OperatorKind::Magnetic, &mag, 3, 4), 0.5);
        let dec = ModelParams::new(0.0, 1).unwrap();
        assert_eq!(operator_stencil(OperatorKind::Decoupled, &dec, 1, 2), 0.0);
        assert_eq!(operator_stencil(OperatorKind::Decoupled, &dec, -2, -1), 0.0);
        assert_eq!(operator_stencil(OperatorKind::Decoupled, &dec, 0, 1), 0.5);
        assert_eq!(operator_stencil(OperatorKind::Decoupled, &dec, 2, 3), 0.5);
    }

    #[test]
    fn decoupled_plus_bonds_is_xy() {
        for nu in 0..4u32 {
            let p = ModelParams::new(0.0, nu).unwrap();
            for x in -8..=8 {
                for y in -8..=8 {
                    let sum = operator_stencil(OperatorKind::Decoupled, &p, x, y)
                        + decoupling_stencil(Reservoir::Left, nu, x, y)
                        + decoupling_stencil(Reservoir::Right, nu, x, y);
                    assert_eq!(sum, operator_stencil(OperatorKind::Xy, &p, x, y));
                }
            }
        }
    }

    #[test]
    fn bound_state_examples() {
        let b = bound_state(0.75).unwrap();
        assert!((b.e_lambda - 1.25).abs() < 1e-15);
        assert!((b.alpha_lambda - 2.0f64.ln()).abs() < 1e-15);
        assert!((b.nu_lambda_sq - 5.0 / 3.0).abs() < 1e-15);
        let n = bound_state(-0.75).unwrap();
        assert!((n.e_lambda + 1.25).abs() < 1e-15);
        assert!(n.staggered);
        assert!(n.amplitude(1) < 0.0 && n.amplitude(2) > 0.0 && n.amplitude(-3) < 0.0);
        assert_eq!(bound_state(0.0), Err(Error::NoBoundState));
    }

    #[test]
    fn decay_rate_is_accurate_for_tiny_fields() {
        let b = bound_state(1e-9).unwrap();
        assert!((b.alpha_lambda - 1e-9).abs() < 1e-24);
    }

    #[test]
    fn bound_state_solves_eigen_equation() {
        for &lambda in &[0.25, -0.25, 0.75, -0.75, 2.0, -2.0, 0.01] {
            let b = bound_state(lambda).unwrap();
            for x in -50i64..=50 {
                let lhs = 0.5 * b.amplitude(x - 1)
                    + 0.5 * b.amplitude(x + 1)
                    + if x == 0 { lambda * b.amplitude(0) } else { 0.0 };
                assert!(
                    (lhs - b.e_lambda * b.amplitude(x)).abs() < 1e-12,
                    "lambda {lambda} x {x}"
                );
            }
            assert!((b.norm_sq(40) - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn planck_particle_hole(r in 0.0f64..50.0, e in -5.0f64..5.0) {
            prop_assert!((planck_density(r, e) + planck_density(r, -e) - 1.0).abs() < 1e-15);
        }

        #[test]
        fn planck_difference_sign_and_parity(bl in 0.05f64..5.0, gap in 0.0f64..5.0, e in 0.0f64..3.0) {
            let th = ThermalConfig::new(bl, bl + gap).unwrap();
            let d = planck_difference(&th, e);
            prop_assert!(d >= 0.0);
            prop_assert!((d + planck_difference(&th, -e)).abs() < 1e-16);
            let direct = planck_density(th.beta_l, e) - planck_density(th.beta_r, e);
            prop_assert!((d - direct).abs() < 1e-14);
        }

        #[test]
        fn decay_data_even_in_field(l in 1e-6f64..20.0) {
            let p = bound_state(l).unwrap();
            let m = bound_state(-l).unwrap();
            prop_assert_eq!(p.alpha_lambda, m.alpha_lambda);
            prop_assert_eq!(p.nu_lambda_sq, m.nu_lambda_sq);
            prop_assert!((p.e_lambda.powi(2) - 1.0 - l * l).abs() < 1e-12 * (1.0 + l * l));
            let growth = 1.0f64.hypot(l) + l;
            prop_assert!((p.alpha_lambda.exp() - growth).abs() < 1e-12 * growth);
        }
    }
}
