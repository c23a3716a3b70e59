//! Fixed-point CGO solver.
//!
//! The system is solved in integral form,
//! `φ₁ = 1 + C[(q/2)e^{k̄z̄−kz}φ₂]`, `φ₂ = σ C̄[(q̄/2)e^{kz−k̄z̄}φ₁]`,
//! by Gauss–Seidel Picard sweeps. Exterior fields come for free as the
//! Laurent continuation of the Cauchy transforms. A matrix-free GMRES solve
//! of the same linear system is available when the sweeps stall.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dbar::{self, CauchyOutput, Kernel, PotentialField, SpectralParam};
use crate::error::{Error, Result};
use crate::grid::{self, make_grid, CoeffField, GridField, PolarGrid, Region};

type C64 = Complex64;
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Fallback {
    None,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolveConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub relaxation: f64,
    pub fallback: Fallback,
    pub resolution: (usize, usize),
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { tol: 1e-12, max_iter: 200, relaxation: 1.0, fallback: Fallback::Gmres, resolution: (64, 128) }
    }
}

impl SolveConfig {
    fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 || self.max_iter == 0 || !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::Parameter(format!("invalid solve configuration {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual_sup: f64,
    pub coeff_tail: f64,
    pub rim_mismatch: f64,
    pub fallback_used: bool,
    /// Coefficient tail above 1e−8.
    pub resolution_warning: bool,
    /// Sup-norm of the coefficient increment of each sweep.
    pub increments: Vec<f64>,
    pub resolution: (usize, usize),
}

/// Solution on both grids.
#[derive(Debug, Clone)]
pub struct CGOSolution {
    pub sp: SpectralParam,
    pub sigma: f64,
    /// `φ₁ − 1` as a Cauchy transform (interior coefficients + `a_n`).
    pub phi1_minus_one: CauchyOutput,
    /// `φ₂` as a conjugate Cauchy transform (interior coefficients + `b_n`).
    pub phi2: CauchyOutput,
    pub phi1_int: GridField,
    pub phi2_int: GridField,
    pub phi1_ext: GridField,
    pub phi2_ext: GridField,
    pub residual_sup: f64,
    pub iterations: usize,
    pub coeff_tail: f64,
}

impl CGOSolution {
    pub fn interior_grid(&self) -> &Arc<PolarGrid> {
        &self.phi1_int.grid
    }

    pub fn exterior_grid(&self) -> &Arc<PolarGrid> {
        &self.phi1_ext.grid
    }

    /// Laurent coefficients `a_n` of `φ₁ = 1 + Σ a_n z^{−n}`.
    pub fn phi1_laurent(&self) -> &[C64] {
        &self.phi1_minus_one.laurent
    }

    /// Laurent coefficients `b_n` of `φ₂ = Σ b_n z̄^{−n}`.
    pub fn phi2_laurent(&self) -> &[C64] {
        &self.phi2.laurent
    }

    /// Interior coefficients of `φ₁` (including the constant).
    pub fn phi1_coeffs(&self) -> CoeffField {
        let mut c = self.phi1_minus_one.interior.clone();
        c.coeffs[[0, 0]] += ONE;
        c
    }
}

/// Grid size that resolves the plane-wave content of the fields at `|k|`.
pub fn suggest_resolution(k_abs: f64) -> (usize, usize) {
    let round16 = |x: f64| ((x / 16.0).ceil() as usize) * 16;
    let p = round16(2.0 * k_abs + 10.0 * (2.0 * k_abs).cbrt() + 32.0).max(32);
    let n_r = round16(k_abs + 8.0 * k_abs.cbrt() + 32.0).max(32);
    (n_r, 2 * p)
}

/// Largest grid the automatic refinement may reach.
pub const RESOLUTION_CAP: (usize, usize) = (512, 2048);

fn increment(new: &CauchyOutput, old: &CauchyOutput) -> f64 {
    let lau = new
        .laurent
        .iter()
        .zip(&old.laurent)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
    new.interior.sup_diff(&old.interior).max(lau)
}

fn zero_output(grid: &Arc<PolarGrid>, kernel: Kernel) -> CauchyOutput {
    CauchyOutput { kernel, interior: CoeffField::zeros(grid), laurent: vec![C64::new(0.0, 0.0); grid.max_mode()] }
}

fn plus_one(f: &GridField) -> GridField {
    f.map(|v| v + ONE)
}

/// Solves the CGO problem on the grid carrying `q`.
pub fn solve_cgo(q: &PotentialField, sp: &SpectralParam, cfg: &SolveConfig) -> Result<(CGOSolution, SolveReport)> {
    cfg.validate()?;
    let gi = q.grid().clone();
    let ge = make_grid(Region::Exterior, gi.n_r, gi.n_phi)?;

    let mut a = zero_output(&gi, Kernel::Dbar);
    let mut b = zero_output(&gi, Kernel::DbarConj);
    let mut phi1_vals = GridField::constant(&gi, ONE);
    let mut phi2_vals = GridField::zeros(&gi);
    let mut increments = Vec::new();
    let mut converged = false;
    let mut fallback_used = false;
    let w = cfg.relaxation;

    for _ in 0..cfg.max_iter {
        let mut a_new = dbar::apply_a(&phi2_vals, q, sp)?;
        if w != 1.0 {
            a_new = a.combine(C64::new(1.0 - w, 0.0), &a_new, C64::new(w, 0.0));
        }
        phi1_vals = plus_one(&a_new.interior_values());
        let mut b_new = dbar::apply_b(&phi1_vals, q, sp)?;
        if w != 1.0 {
            b_new = b.combine(C64::new(1.0 - w, 0.0), &b_new, C64::new(w, 0.0));
        }
        phi2_vals = b_new.interior_values();
        let inc = increment(&a_new, &a).max(increment(&b_new, &b));
        a = a_new;
        b = b_new;
        increments.push(inc);
        if !inc.is_finite() {
            break;
        }
        if inc < cfg.tol {
            converged = true;
            break;
        }
        // Give up early on clear divergence.
        if increments.len() > 8 && inc > 1e3 * increments[0].max(1e-300) {
            break;
        }
    }

    if !converged {
        let last = increments.last().copied().unwrap_or(f64::NAN);
        if cfg.fallback == Fallback::None {
            return Err(Error::NonConvergence { iterations: increments.len(), increment: last });
        }
        fallback_used = true;
        let (p1, its) = gmres_solve(q, sp, cfg.tol, 60, 20 * cfg.max_iter.max(10))
            .ok_or(Error::NonConvergence { iterations: increments.len(), increment: last })?;
        a = dbar::apply_a(&dbar::apply_b(&p1, q, sp)?.interior_values(), q, sp)?;
        phi1_vals = plus_one(&a.interior_values());
        b = dbar::apply_b(&phi1_vals, q, sp)?;
        phi2_vals = b.interior_values();
        increments.push(f64::NAN);
        let _ = its;
        converged = true;
    }

    let phi1_ext = plus_one(&a.exterior_values(&ge));
    let phi2_ext = b.exterior_values(&ge);
    let mut phi1_c = a.interior.clone();
    phi1_c.coeffs[[0, 0]] += ONE;
    let res = dbar::dbar_residual(&phi1_c, &b.interior, &phi1_ext, &phi2_ext, q, sp);
    let residual_sup = res.sup_interior();
    let coeff_tail = grid::coeff_decay(&phi1_c).max(grid::coeff_decay(&b.interior));
    let last = gi.n_r - 1;
    let rim_mismatch = (0..gi.n_phi)
        .map(|j| {
            (phi1_vals.values[[last, j]] - phi1_ext.values[[last, j]])
                .norm()
                .max((phi2_vals.values[[last, j]] - phi2_ext.values[[last, j]]).norm())
        })
        .fold(0.0, f64::max);

    let report = SolveReport {
        converged,
        iterations: increments.len(),
        residual_sup,
        coeff_tail,
        rim_mismatch,
        fallback_used,
        resolution_warning: coeff_tail > 1e-8,
        increments,
        resolution: (gi.n_r, gi.n_phi),
    };
    let sol = CGOSolution {
        sp: *sp,
        sigma: q.sigma,
        phi1_minus_one: a,
        phi2: b,
        phi1_int: phi1_vals,
        phi2_int: phi2_vals,
        phi1_ext,
        phi2_ext,
        residual_sup,
        iterations: report.iterations,
        coeff_tail,
    };
    Ok((sol, report))
}

/// Solves with automatic resolution: starts from `start` (or the suggested
/// size) and doubles both sizes until the coefficient tail drops below
/// `tail_target` or `cap` is reached.
pub fn solve_auto(
    make_q: &dyn Fn(&Arc<PolarGrid>) -> Result<PotentialField>,
    sp: &SpectralParam,
    cfg: &SolveConfig,
    start: Option<(usize, usize)>,
    cap: (usize, usize),
    tail_target: f64,
) -> Result<(CGOSolution, SolveReport)> {
    let (mut n_r, mut n_phi) = start.unwrap_or_else(|| suggest_resolution(sp.k.norm()));
    n_r = n_r.min(cap.0);
    n_phi = n_phi.min(cap.1);
    loop {
        let gi = make_grid(Region::Interior, n_r, n_phi)?;
        let q = make_q(&gi)?;
        let out = solve_cgo(&q, sp, &SolveConfig { resolution: (n_r, n_phi), ..*cfg })?;
        if out.1.coeff_tail < tail_target || (n_r >= cap.0 && n_phi >= cap.1) {
            return Ok(out);
        }
        n_r = (2 * n_r).min(cap.0);
        n_phi = (2 * n_phi).min(cap.1);
    }
}

/// `R(k) = conj(2 b₁)`.
pub fn reflection_from_expansion(sol: &CGOSolution) -> C64 {
    (sol.phi2.laurent[0] * 2.0).conj()
}

/// `R(k) = conj((σ/π)∫ q̄ e^{kz−k̄z̄} φ₁ dA)`, by quadrature of the interior
/// samples.
pub fn reflection_from_integral(sol: &CGOSolution, q: &PotentialField) -> C64 {
    let integrand = dbar::phase_multiplier(1, &sol.sp, &sol.phi1_int.zip_map(&q.values, |f, qv| f * qv.conj()));
    (grid::integrate(&integrand) * (q.sigma / PI)).conj()
}

/// `(φ₁(z), φ₂(z))` at arbitrary points.
pub fn evaluate_solution(sol: &CGOSolution, points: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let mut p1 = Vec::with_capacity(points.len());
    let mut p2 = Vec::with_capacity(points.len());
    for &z in points {
        p1.push(sol.phi1_minus_one.eval(z)? + ONE);
        p2.push(sol.phi2.eval(z)?);
    }
    Ok((p1, p2))
}

/// Restarted GMRES on `φ₁ − A B φ₁ = 1` (φ₂ = Bφ₁ eliminated). Returns φ₁
/// interior values and the number of operator applications.
fn gmres_solve(
    q: &PotentialField,
    sp: &SpectralParam,
    tol: f64,
    restart: usize,
    max_apply: usize,
) -> Option<(GridField, usize)> {
    let gi = q.grid().clone();
    let op = |x: &[C64]| -> Option<Vec<C64>> {
        let f = GridField { grid: gi.clone(), values: ndarray::Array2::from_shape_vec((gi.n_r, gi.n_phi), x.to_vec()).ok()? };
        let ab = dbar::apply_a(&dbar::apply_b(&f, q, sp).ok()?.interior_values(), q, sp).ok()?;
        let v = ab.interior_values();
        Some(x.iter().zip(v.values.iter()).map(|(a, b)| a - b).collect())
    };
    let n = gi.n_r * gi.n_phi;
    let rhs = vec![ONE; n];
    let mut x = rhs.clone();
    let dot = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(u, v)| u.conj() * v).sum::<C64>();
    let norm = |a: &[C64]| dot(a, a).re.sqrt();
    let bnorm = norm(&rhs);
    let mut applies = 0;
    while applies < max_apply {
        let ax = op(&x)?;
        applies += 1;
        let r: Vec<C64> = rhs.iter().zip(&ax).map(|(a, b)| a - b).collect();
        let beta = norm(&r);
        if beta <= tol * bnorm {
            return Some((GridField { grid: gi.clone(), values: ndarray::Array2::from_shape_vec((gi.n_r, gi.n_phi), x).ok()? }, applies));
        }
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|c| c / beta).collect()];
        let mut h = vec![vec![C64::new(0.0, 0.0); restart]; restart + 1];
        let (mut cs, mut sn) = (vec![C64::new(0.0, 0.0); restart], vec![C64::new(0.0, 0.0); restart]);
        let mut g = vec![C64::new(0.0, 0.0); restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..restart {
            let mut wv = op(&v[j])?;
            applies += 1;
            for i in 0..=j {
                h[i][j] = dot(&v[i], &wv);
                let hij = h[i][j];
                wv.iter_mut().zip(&v[i]).for_each(|(a, b)| *a -= hij * b);
            }
            let hn = norm(&wv);
            h[j + 1][j] = C64::new(hn, 0.0);
            for i in 0..j {
                let t = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let den = (h[j][j].norm_sqr() + h[j + 1][j].norm_sqr()).sqrt();
            cs[j] = h[j][j] / den;
            sn[j] = h[j + 1][j] / den;
            h[j][j] = C64::new(den, 0.0);
            h[j + 1][j] = C64::new(0.0, 0.0);
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j].conj() * g[j];
            used = j + 1;
            if hn == 0.0 || g[j + 1].norm() <= tol * bnorm {
                break;
            }
            v.push(wv.iter().map(|c| c / hn).collect());
        }
        let mut yv = vec![C64::new(0.0, 0.0); used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in i + 1..used {
                s -= h[i][k] * yv[k];
            }
            yv[i] = s / h[i][i];
        }
        for (i, yi) in yv.iter().enumerate() {
            x.iter_mut().zip(&v[i]).for_each(|(a, b)| *a += yi * b);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_potential_is_trivial() {
        let gi = make_grid(Region::Interior, 16, 32).unwrap();
        let q = PotentialField::zero(&gi);
        let sp = SpectralParam::real(5.0).unwrap();
        let (sol, rep) = solve_cgo(&q, &sp, &SolveConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(sol.phi2_int.sup_norm(), 0.0);
        assert_eq!(reflection_from_expansion(&sol), C64::new(0.0, 0.0));
    }

    #[test]
    fn gmres_matches_picard() {
        let gi = make_grid(Region::Interior, 24, 48).unwrap();
        let q = PotentialField::disk(&gi, 1.0).unwrap();
        let sp = SpectralParam::real(3.0).unwrap();
        let (sol, _) = solve_cgo(&q, &sp, &SolveConfig::default()).unwrap();
        let (p1, _) = gmres_solve(&q, &sp, 1e-13, 40, 400).unwrap();
        assert!(p1.sup_diff(&sol.phi1_int) < 1e-10);
    }
}
