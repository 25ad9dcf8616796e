//! Finite-lattice reference computations.
//!
//! The chain is cut to the window `[-M, M]` with open ends. Time evolution is
//! exact on the window, and as long as signals from the origin have not been
//! reflected back (group velocity at most one) it coincides with the
//! infinite chain. Everything the analytic modules compute as a limit is
//! recomputed here as a late-time average.

mod evolution;
pub mod spectrum;
pub mod tridiagonal;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{operator_stencil, planck_density, ModelParams, OperatorKind, ThermalConfig};

pub use evolution::{
    averaging_times, evolve_correlation, evolve_correlations, ness_estimate, ness_estimates,
    numeric_wave_action, oracle_flux, wave_vector, EvolutionComponents, EvolutionTrace, OracleFlux,
    DEFAULT_TIME_STEP,
};
pub use spectrum::SpectralFactorization;
pub use tridiagonal::SymmetricTridiagonal;

pub const MIN_HALF_WIDTH: usize = 10;
pub const MAX_HALF_WIDTH: usize = 5000;
pub const DEFAULT_MEMORY_LIMIT: usize = 2 << 30;

/// Columns evolved per matrix product.
pub(crate) const CHUNK_COLUMNS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationLimits {
    pub memory_bytes: usize,
}

impl Default for TruncationLimits {
    fn default() -> Self {
        Self {
            memory_bytes: DEFAULT_MEMORY_LIMIT,
        }
    }
}

/// Magnetic Hamiltonian on `[-M, M]` with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct TruncatedSystem {
    half_width: usize,
    params: ModelParams,
    magnetic: SpectralFactorization,
    bound_index: Option<usize>,
}

/// Bytes held by a system of half-width `m` plus the evolution workspace.
pub fn memory_estimate(half_width: usize, nu: u32) -> usize {
    let n = 2 * half_width + 1;
    let reservoir = half_width.saturating_sub(nu as usize);
    8 * (n * n + 2 * reservoir * reservoir + 6 * n * CHUNK_COLUMNS)
}

pub fn build_truncation(half_width: usize, params: &ModelParams) -> Result<TruncatedSystem> {
    build_truncation_with_limits(half_width, params, &TruncationLimits::default())
}

pub fn build_truncation_with_limits(
    half_width: usize,
    params: &ModelParams,
    limits: &TruncationLimits,
) -> Result<TruncatedSystem> {
    if !(MIN_HALF_WIDTH..=MAX_HALF_WIDTH).contains(&half_width) {
        return Err(Error::InvalidParameter(format!(
            "half-width {half_width} outside [{MIN_HALF_WIDTH}, {MAX_HALF_WIDTH}]"
        )));
    }
    if params.nu as usize + 2 > half_width {
        return Err(Error::InvalidParameter(format!(
            "sample half-width {} leaves no reservoir inside [-{half_width}, {half_width}]",
            params.nu
        )));
    }
    let required = memory_estimate(half_width, params.nu);
    if required > limits.memory_bytes {
        return Err(Error::ResourceLimit {
            required,
            limit: limits.memory_bytes,
        });
    }
    let (magnetic, bound_index) = spectrum::magnetic(half_width, params.lambda);
    Ok(TruncatedSystem {
        half_width,
        params: *params,
        magnetic,
        bound_index,
    })
}

impl TruncatedSystem {
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn site_index(&self, x: i64) -> Option<usize> {
        let m = self.half_width as i64;
        (-m..=m).contains(&x).then(|| (x + m) as usize)
    }

    pub fn site(&self, index: usize) -> i64 {
        index as i64 - self.half_width as i64
    }

    pub fn hamiltonian(&self, kind: OperatorKind) -> SymmetricTridiagonal {
        let n = self.dim();
        let diag = (0..n)
            .map(|j| operator_stencil(kind, &self.params, self.site(j), self.site(j)))
            .collect();
        let off = (0..n - 1)
            .map(|j| operator_stencil(kind, &self.params, self.site(j), self.site(j + 1)))
            .collect();
        SymmetricTridiagonal::new(diag, off)
    }

    /// Eigenpairs of the magnetic Hamiltonian, ascending.
    pub fn magnetic(&self) -> &SpectralFactorization {
        &self.magnetic
    }

    pub fn bound_index(&self) -> Option<usize> {
        self.bound_index
    }

    /// Bound-state energy and eigenvector, sign fixed by a positive entry at
    /// the origin.
    pub fn bound_state(&self) -> Option<(f64, Vec<f64>)> {
        let b = self.bound_index?;
        let mut v: Vec<f64> = self.magnetic.vectors.column(b).iter().copied().collect();
        if v[self.half_width] < 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
        }
        Some((self.magnetic.values[b], v))
    }

    /// Sites `[0, left)` form the left reservoir and `[dim - left, dim)` the
    /// right one.
    fn reservoir_len(&self) -> usize {
        self.half_width - self.params.nu as usize
    }

    /// Reflection-free horizon for correlations involving `sites`.
    pub fn horizon(&self, sites: &[i64]) -> f64 {
        let reach = sites
            .iter()
            .map(|x| x.unsigned_abs())
            .chain(std::iter::once(self.params.nu as u64 + 2))
            .max()
            .unwrap_or(0);
        0.8 * (self.half_width as f64 - reach as f64)
    }

    pub(crate) fn check_guard(&self, sites: &[i64], t_max: f64) -> Result<()> {
        let quarter = self.half_width as f64 / 4.0;
        if let Some(&x) = sites.iter().find(|x| x.unsigned_abs() as f64 > quarter) {
            return Err(Error::InvalidParameter(format!(
                "site {x} is farther than M/4 = {quarter} from the origin"
            )));
        }
        let horizon = self.horizon(sites);
        if t_max > horizon {
            return Err(Error::TimeHorizonExceeded {
                time: t_max,
                horizon,
            });
        }
        Ok(())
    }
}

/// Decoupled initial two-point operator: thermal states on the two open
/// reservoir chains and `1/2` on the sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoupledTwoPoint {
    half_width: usize,
    nu: u32,
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
}

pub fn initial_two_point(sys: &TruncatedSystem, th: &ThermalConfig) -> DecoupledTwoPoint {
    let len = sys.reservoir_len();
    let chain = spectrum::open_chain(len);
    DecoupledTwoPoint {
        half_width: sys.half_width,
        nu: sys.params.nu,
        left: chain.function_of(|e| planck_density(th.beta_l, e)),
        right: chain.function_of(|e| planck_density(th.beta_r, e)),
    }
}

impl DecoupledTwoPoint {
    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    fn split(&self) -> (usize, usize) {
        let len = self.left.nrows();
        (len, self.dim() - len)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let (a, b) = self.split();
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (a, a)).copy_from(&self.left);
        m.view_mut((b, b), (a, a)).copy_from(&self.right);
        for i in a..b {
            m[(i, i)] = 0.5;
        }
        m
    }

    /// `s_d * w` for every column of `w`.
    pub fn apply_columns(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        let (a, b) = self.split();
        let n = self.dim();
        let mut out = w * 0.5;
        let left = &self.left * w.rows(0, a);
        let right = &self.right * w.rows(b, n - b);
        out.rows_mut(0, a).copy_from(&left);
        out.rows_mut(b, n - b).copy_from(&right);
        out
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let w = DMatrix::from_column_slice(v.len(), 1, v);
        self.apply_columns(&w).iter().copied().collect()
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }
}

/// `(f, s_d f)` for the truncated bound state.
pub fn pp_quadratic_form(sys: &TruncatedSystem, th: &ThermalConfig) -> Option<f64> {
    let (_, f) = sys.bound_state()?;
    let sd = initial_two_point(sys, th);
    let g = sd.apply(&f);
    Some(f.iter().zip(&g).map(|(a, b)| a * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::bound_state;

    fn th12() -> ThermalConfig {
        ThermalConfig::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn builds_hermitian_operators() {
        let sys = build_truncation(12, &ModelParams::new(0.2, 1).unwrap()).unwrap();
        for kind in [
            OperatorKind::Xy,
            OperatorKind::Decoupled,
            OperatorKind::Magnetic,
        ] {
            let h = sys.hamiltonian(kind).to_dense();
            assert_eq!(h, h.transpose());
        }
        let hd = sys.hamiltonian(OperatorKind::Decoupled);
        assert_eq!(hd.off_diagonal[sys.site_index(1).unwrap()], 0.0);
        assert_eq!(hd.off_diagonal[sys.site_index(-2).unwrap()], 0.0);
        assert_eq!(hd.off_diagonal.iter().filter(|&&b| b == 0.0).count(), 2);
    }

    #[test]
    fn free_spectrum_inside_band() {
        let sys = build_truncation(50, &ModelParams::new(0.0, 0).unwrap()).unwrap();
        assert!(sys.magnetic().values.iter().all(|e| e.abs() <= 1.0));
        assert!(sys.bound_index().is_none());
    }

    #[test]
    fn rejects_bad_sizes() {
        let p = ModelParams::new(0.2, 0).unwrap();
        assert!(build_truncation(9, &p).is_err());
        assert!(build_truncation(5001, &p).is_err());
        assert!(build_truncation(10, &ModelParams::new(0.2, 9).unwrap()).is_err());
        let tiny = TruncationLimits {
            memory_bytes: 1 << 20,
        };
        assert!(matches!(
            build_truncation_with_limits(500, &p, &tiny),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn single_state_outside_band() {
        for &l in &[0.25, -0.75, 2.0] {
            let sys = build_truncation(300, &ModelParams::new(l, 0).unwrap()).unwrap();
            let h = sys.hamiltonian(OperatorKind::Magnetic);
            let n = sys.dim();
            let outside = h.count_below(-1.0) + (n - h.count_below(1.0));
            assert_eq!(outside, 1);
            let exact = bound_state(l).unwrap();
            let (e, f) = sys.bound_state().unwrap();
            assert!((e - exact.e_lambda).abs() < 1e-12);
            for x in -20..=20 {
                assert!((f[sys.site_index(x).unwrap()] - exact.amplitude(x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn initial_state_structure() {
        let sys = build_truncation(20, &ModelParams::new(0.3, 2).unwrap()).unwrap();
        let sd = initial_two_point(&sys, &th12());
        let dense = sd.to_dense();
        for x in -2..=2 {
            let i = sys.site_index(x).unwrap();
            for j in 0..sys.dim() {
                let want = if i == j { 0.5 } else { 0.0 };
                assert_eq!(dense[(i, j)], want);
            }
        }
        let hd = sys.hamiltonian(OperatorKind::Decoupled).to_dense();
        assert!((&hd * &dense - &dense * &hd).amax() < 1e-12);
        let ev = nalgebra::SymmetricEigen::new(dense.clone()).eigenvalues;
        assert!(ev.iter().all(|&e| e > 0.0 && e < 1.0));
        let v: Vec<f64> = (0..sys.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let blockwise = sd.apply(&v);
        let full = &dense * nalgebra::DVector::from_vec(v);
        for (a, b) in blockwise.iter().zip(full.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pp_weight_matches_truncated_quadratic_form() {
        use crate::numerics::QuadratureSpec;
        use crate::scattering::pp_weight;
        let spec = QuadratureSpec::with_tolerance(1e-13, 1e-13);
        for &l in &[0.25, 0.5, 1.0] {
            for nu in 0..3 {
                let p = ModelParams::new(l, nu).unwrap();
                let sys = build_truncation(400, &p).unwrap();
                let oracle = pp_quadratic_form(&sys, &th12()).unwrap();
                let analytic = pp_weight(&p, &th12(), &spec).unwrap();
                assert!(
                    (oracle - analytic).abs() < 1e-8,
                    "{l} {nu}: {oracle} {analytic}"
                );
            }
        }
    }
}
