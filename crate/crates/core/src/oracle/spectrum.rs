//! Closed-form eigenpairs of the truncated operators.
//!
//! On the window `[-M, M]` with Dirichlet walls at `+-L`, `L = M + 1`, the
//! magnetic Hamiltonian commutes with reflection. Odd eigenvectors do not see
//! the impurity and are `sin(qx)`, `q = pi i / L`. Even eigenvectors are
//! `sin(q (L - |x|))`, where the site equation at the origin reads
//! `lambda sin(qL) = sin(q) cos(qL)`; one root sits between consecutive zeros
//! of `cos(qL)`, and the remaining one becomes the bound state
//! `sinh(kappa (L - |x|))`, `lambda tanh(kappa L) = sinh(kappa)`, once
//! `lambda L > 1`. Negative fields follow by staggering.

use std::f64::consts::PI;

use nalgebra::DMatrix;

/// Eigenvalues with eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFactorization {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SpectralFactorization {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `max_i |H v_i - e_i v_i|` for a matrix given by its action.
    pub fn max_residual(&self, apply: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &e) in self.values.iter().enumerate() {
            let v: Vec<f64> = self.vectors.column(i).iter().copied().collect();
            let hv = apply(&v);
            for (a, b) in hv.iter().zip(&v) {
                worst = worst.max((a - e * b).abs());
            }
        }
        worst
    }

    /// `max |V^T V - 1|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = self.vectors.transpose() * &self.vectors;
        let mut worst: f64 = 0.0;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// `V diag(g(e)) V^T`.
    pub fn function_of(&self, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (i, mut col) in scaled.column_iter_mut().enumerate() {
            col *= g(self.values[i]);
        }
        scaled * self.vectors.transpose()
    }
}

/// Open chain of `n` sites with hopping `1/2`, eigenvalues ascending.
pub fn open_chain(n: usize) -> SpectralFactorization {
    let scale = (2.0 / (n as f64 + 1.0)).sqrt();
    let step = PI / (n as f64 + 1.0);
    // column c holds mode m = n - c so that cos(m * step) ascends
    let values = (0..n).map(|c| ((n - c) as f64 * step).cos()).collect();
    let vectors = DMatrix::from_fn(n, n, |j, c| {
        let m = (n - c) as f64;
        scale * ((j as f64 + 1.0) * m * step).sin()
    });
    SpectralFactorization { values, vectors }
}

#[derive(Debug, Clone, Copy)]
enum Mode {
    Odd(f64),
    Even(f64),
    Bound(f64),
    Linear,
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn even_modes(half_width: usize, field: f64) -> Vec<Mode> {
    let l = (half_width + 1) as f64;
    let zero = |i: usize| PI * (2 * i - 1) as f64 / (2.0 * l);
    let n_even = half_width + 1;
    if field == 0.0 {
        return (1..=n_even).map(|i| Mode::Even(zero(i))).collect();
    }
    // g / q keeps a nonzero limit at q = 0
    let g = |q: f64| {
        if q == 0.0 {
            field * l - 1.0
        } else {
            (field * (q * l).sin() - q.sin() * (q * l).cos()) / q
        }
    };
    let mut modes: Vec<Mode> = (2..=n_even)
        .map(|i| Mode::Even(bisect(g, zero(i - 1), zero(i))))
        .collect();
    let threshold = field * l - 1.0;
    let top = if threshold.abs() < 1e-12 {
        Mode::Linear
    } else if threshold < 0.0 {
        Mode::Even(bisect(g, 0.0, zero(1)))
    } else {
        let h = |kappa: f64| {
            if kappa == 0.0 {
                threshold
            } else {
                (field * (kappa * l).tanh() - kappa.sinh()) / kappa
            }
        };
        Mode::Bound(bisect(h, 0.0, field.asinh()))
    };
    modes.push(top);
    modes
}

/// Eigenpairs of the magnetic Hamiltonian on `[-M, M]`, ascending, together
/// with the column index of the bound state if there is one.
pub fn magnetic(half_width: usize, lambda: f64) -> (SpectralFactorization, Option<usize>) {
    let m = half_width;
    let n = 2 * m + 1;
    let l = (m + 1) as f64;
    let field = lambda.abs();
    let sign = if lambda < 0.0 { -1.0 } else { 1.0 };

    let mut modes: Vec<(f64, Mode)> = (1..=m)
        .map(|i| {
            let q = PI * i as f64 / l;
            (q.cos(), Mode::Odd(q))
        })
        .collect();
    for mode in even_modes(m, field) {
        let e = match mode {
            Mode::Even(q) => q.cos(),
            Mode::Bound(kappa) => kappa.cosh(),
            Mode::Linear => 1.0,
            Mode::Odd(_) => unreachable!(),
        };
        modes.push((e, mode));
    }
    for entry in modes.iter_mut() {
        entry.0 *= sign;
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut vectors = DMatrix::zeros(n, n);
    let mut bound = None;
    for (c, &(_, mode)) in modes.iter().enumerate() {
        if matches!(mode, Mode::Bound(_)) {
            bound = Some(c);
        }
        let mut col = vectors.column_mut(c);
        for j in 0..n {
            let x = j as i64 - m as i64;
            let r = x.unsigned_abs() as f64;
            let mut v = match mode {
                Mode::Odd(q) => (q * x as f64).sin(),
                Mode::Even(q) => (q * (l - r)).sin(),
                Mode::Bound(kappa) => (-kappa * r).exp() * -(-2.0 * kappa * (l - r)).exp_m1(),
                Mode::Linear => l - r,
            };
            if sign < 0.0 && x.rem_euclid(2) == 1 {
                v = -v;
            }
            col[j] = v;
        }
        let norm = col.norm();
        col /= norm;
    }
    let values = modes.iter().map(|&(e, _)| e).collect();
    (SpectralFactorization { values, vectors }, bound)
}
