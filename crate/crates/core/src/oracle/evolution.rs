use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectrum::open_chain;
use super::{initial_two_point, DecoupledTwoPoint, TruncatedSystem, CHUNK_COLUMNS};
use crate::error::{Error, Result};
use crate::model::ThermalConfig;

pub const DEFAULT_TIME_STEP: f64 = 0.5;
const MIN_T_STAR: f64 = 100.0;

/// `Omega` split by inserting the spectral projections of the magnetic
/// Hamiltonian on both sides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvolutionComponents {
    pub aa: Vec<Complex64>,
    pub ap: Vec<Complex64>,
    pub pa: Vec<Complex64>,
    pub pp: Vec<Complex64>,
}

/// `Omega_xy(t) = (e^{ith} delta_x, s_d e^{ith} delta_y)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub x: i64,
    pub y: i64,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub components: EvolutionComponents,
}

impl EvolutionTrace {
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub const CSV_HEADER: &'static str = "t,re,im,re_aa,im_aa,re_ap,im_ap,re_pa,im_pa,re_pp,im_pp";

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        let c = &self.components;
        for (i, t) in self.times.iter().enumerate() {
            write!(out, "{t:.16e}")?;
            for z in [self.values[i], c.aa[i], c.ap[i], c.pa[i], c.pp[i]] {
                write!(out, ",{:.16e},{:.16e}", z.re, z.im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// `0.8 t_star, 0.8 t_star + dt, ...` up to `t_star`.
pub fn averaging_times(t_star: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_star >= MIN_T_STAR && t_star.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t_star must be at least {MIN_T_STAR}, got {t_star}"
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let start = 0.8 * t_star;
    let count = ((t_star - start) / dt + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * dt).collect())
}

pub fn evolve_correlation(
    sys: &TruncatedSystem,
    th: &ThermalConfig,
    x: i64,
    y: i64,
    times: &[f64],
) -> Result<EvolutionTrace> {
    let sd = initial_two_point(sys, th);
    Ok(evolve_correlations(sys, &sd, &[(x, y)], times)?.remove(0))
}

/// Evolves several site pairs at once, sharing the propagated columns.
pub fn evolve_correlations(
    sys: &TruncatedSystem,
    sd: &DecoupledTwoPoint,
    pairs: &[(i64, i64)],
    times: &[f64],
) -> Result<Vec<EvolutionTrace>> {
    if sd.dim() != sys.dim() || sd.nu() != sys.params().nu {
        return Err(Error::InvalidParameter(
            "initial state was built for a different truncation".into(),
        ));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidParameter(
            "times must be finite and non-negative".into(),
        ));
    }
    let mut sites: Vec<i64> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
    sites.sort_unstable();
    sites.dedup();
    let t_max = times.iter().copied().fold(0.0, f64::max);
    sys.check_guard(&sites, t_max)?;

    let slot: BTreeMap<i64, usize> = sites.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let n = sys.dim();
    let ns = sites.len();
    let fac = sys.magnetic();
    let v = &fac.vectors;
    let rows: Vec<usize> = sites.iter().map(|&x| sys.site_index(x).unwrap()).collect();

    // bound-state pieces are time independent up to a phase
    let bound = sys.bound_index().map(|b| {
        let col: Vec<f64> = v.column(b).iter().copied().collect();
        let g = sd.apply(&col);
        let weight: f64 = col.iter().zip(&g).map(|(a, b)| a * b).sum();
        (b, fac.values[b], g, weight)
    });

    let mut traces: Vec<EvolutionTrace> = pairs
        .iter()
        .map(|&(x, y)| EvolutionTrace {
            x,
            y,
            times: times.to_vec(),
            values: Vec::with_capacity(times.len()),
            components: EvolutionComponents::default(),
        })
        .collect();

    let per_chunk = (CHUNK_COLUMNS / ns).max(1);
    for chunk in times.chunks(per_chunk) {
        let cols = chunk.len() * ns;
        let mut c_re = DMatrix::<f64>::zeros(n, cols);
        let mut c_im = DMatrix::<f64>::zeros(n, cols);
        for (ti, &t) in chunk.iter().enumerate() {
            for i in 0..n {
                if Some(i) == bound.as_ref().map(|b| b.0) {
                    continue;
                }
                let (s, c) = (t * fac.values[i]).sin_cos();
                for (si, &r) in rows.iter().enumerate() {
                    let amp = v[(r, i)];
                    c_re[(i, ti * ns + si)] = c * amp;
                    c_im[(i, ti * ns + si)] = s * amp;
                }
            }
        }
        let w_re = v * &c_re;
        let w_im = v * &c_im;
        let sw_re = sd.apply_columns(&w_re);
        let sw_im = sd.apply_columns(&w_im);

        for (ti, &t) in chunk.iter().enumerate() {
            for (pi, &(x, y)) in pairs.iter().enumerate() {
                let cx = ti * ns + slot[&x];
                let cy = ti * ns + slot[&y];
                let (xr, xi) = (w_re.column(cx), w_im.column(cx));
                let (yr, yi) = (sw_re.column(cy), sw_im.column(cy));
                let aa = Complex64::new(xr.dot(&yr) + xi.dot(&yi), xr.dot(&yi) - xi.dot(&yr));
                let (ap, pa, pp) = match &bound {
                    Some((b, e_b, g, weight)) => {
                        let g = nalgebra::DVectorView::from_slice(g, n);
                        let vx = v[(sys.site_index(x).unwrap(), *b)];
                        let vy = v[(sys.site_index(y).unwrap(), *b)];
                        let phase = Complex64::from_polar(1.0, t * e_b);
                        let ap = phase * vy * Complex64::new(xr.dot(&g), -xi.dot(&g));
                        let (ayr, ayi) = (w_re.column(cy), w_im.column(cy));
                        let pa = phase.conj() * vx * Complex64::new(g.dot(&ayr), g.dot(&ayi));
                        (ap, pa, Complex64::new(vx * vy * weight, 0.0))
                    }
                    None => (
                        Complex64::default(),
                        Complex64::default(),
                        Complex64::default(),
                    ),
                };
                let tr = &mut traces[pi];
                tr.values.push(aa + ap + pa + pp);
                tr.components.aa.push(aa);
                tr.components.ap.push(ap);
                tr.components.pa.push(pa);
                tr.components.pp.push(pp);
            }
        }
    }
    Ok(traces)
}

/// Late-time averages of `Omega` for several pairs.
pub fn ness_estimates(
    sys: &TruncatedSystem,
    th: &ThermalConfig,
    pairs: &[(i64, i64)],
    t_star: f64,
    dt: f64,
) -> Result<Vec<Complex64>> {
    let times = averaging_times(t_star, dt)?;
    let sd = initial_two_point(sys, th);
    Ok(evolve_correlations(sys, &sd, pairs, &times)?
        .iter()
        .map(EvolutionTrace::mean)
        .collect())
}

/// Mean of `Omega_xy` over `[0.8 t_star, t_star]` with the default step.
pub fn ness_estimate(
    sys: &TruncatedSystem,
    th: &ThermalConfig,
    x: i64,
    y: i64,
    t_star: f64,
) -> Result<Complex64> {
    Ok(ness_estimates(sys, th, &[(x, y)], t_star, DEFAULT_TIME_STEP)?[0])
}

/// Energy currents into the sample from the left and from the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleFlux {
    pub j_left: f64,
    pub j_right: f64,
}

impl OracleFlux {
    /// Net energy gain of the sample; zero in a steady state.
    pub fn imbalance(&self) -> f64 {
        self.j_left + self.j_right
    }
}

pub fn oracle_flux(sys: &TruncatedSystem, th: &ThermalConfig, t_star: f64) -> Result<OracleFlux> {
    let nu = sys.params().nu as i64;
    let pairs = [(-(nu + 2), -nu), (nu + 2, nu)];
    let est = ness_estimates(sys, th, &pairs, t_star, DEFAULT_TIME_STEP)?;
    Ok(OracleFlux {
        j_left: 0.5 * est[0].im,
        j_right: 0.5 * est[1].im,
    })
}

/// `e^{-ith} e^{ith_lambda} (1 - P) delta_x` on the window, where `P`
/// projects onto the bound state and `h` is the clean chain.
pub fn wave_vector(sys: &TruncatedSystem, x: i64, t: f64) -> Result<Vec<Complex64>> {
    let quarter = sys.half_width() as f64 / 4.0;
    if x.unsigned_abs() as f64 > quarter {
        return Err(Error::InvalidParameter(format!(
            "site {x} is farther than M/4 = {quarter} from the origin"
        )));
    }
    let horizon = 0.8 * (sys.half_width() as f64 - x.unsigned_abs() as f64);
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time must be non-negative, got {t}"
        )));
    }
    if t > horizon {
        return Err(Error::TimeHorizonExceeded { time: t, horizon });
    }
    let n = sys.dim();
    let fac = sys.magnetic();
    let r = sys.site_index(x).unwrap();
    let mut coef = vec![Complex64::default(); n];
    for (i, c) in coef.iter_mut().enumerate() {
        if Some(i) != sys.bound_index() {
            *c = Complex64::from_polar(fac.vectors[(r, i)], t * fac.values[i]);
        }
    }
    let forward = mat_vec(&fac.vectors, &coef);
    let free = open_chain(n);
    let mut back = mat_t_vec(&free.vectors, &forward);
    for (c, e) in back.iter_mut().zip(&free.values) {
        *c *= Complex64::from_polar(1.0, -t * e);
    }
    Ok(mat_vec(&free.vectors, &back))
}

/// `sum_y w(y) e^{iky}` of [`wave_vector`] on the given momenta.
pub fn numeric_wave_action(
    sys: &TruncatedSystem,
    x: i64,
    t: f64,
    k_grid: &[f64],
) -> Result<Vec<Complex64>> {
    let w = wave_vector(sys, x, t)?;
    Ok(k_grid
        .iter()
        .map(|&k| {
            w.iter()
                .enumerate()
                .map(|(j, a)| a * Complex64::from_polar(1.0, k * sys.site(j) as f64))
                .sum()
        })
        .collect())
}

fn mat_vec(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let re = m * nalgebra::DVector::from_iterator(n, v.iter().map(|z| z.re));
    let im = m * nalgebra::DVector::from_iterator(n, v.iter().map(|z| z.im));
    re.iter()
        .zip(im.iter())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect()
}

fn mat_t_vec(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let re = m.tr_mul(&nalgebra::DVector::from_iterator(n, v.iter().map(|z| z.re)));
    let im = m.tr_mul(&nalgebra::DVector::from_iterator(n, v.iter().map(|z| z.im)));
    re.iter()
        .zip(im.iter())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect()
}
