//! Solid Cauchy transforms on the unit disk and the operators built on them.
//!
//! `C[v](z) = (1/π)∫ v(w)/(z−w) dA(w)` inverts `∂̄` and its conjugate-kernel
//! twin `C̄[v]` (kernel `1/(z̄−w̄)`) inverts `∂`. Both act mode by mode: a
//! source `g(r)e^{inφ}` produces `y(r)e^{i(n∓1)φ}` where `y` solves the
//! first-order radial equation
//!
//! ```text
//! r y' + p y = 2 r g,    p = 1 − n  (C),    p = n + 1  (C̄).
//! ```
//!
//! For `p ≥ 1` the regular solution is unique. For `p ≤ 0` the solution that
//! vanishes at `r = 1` is selected, which is exactly the condition that the
//! field continues to zero outside the disk for that mode. Outside the disk
//! only modes with `p ≥ 1` survive, as multiples of `r^{−p}`, and their rim
//! values are the Laurent coefficients.
//!
//! The radial equation is discretized in the ultraspherical basis, which
//! turns it into an upper-triangular system with bandwidth three.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{self, CoeffField, GridField, PolarGrid, Region};

type C64 = Complex64;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Spectral parameter with `h = 1/|k|` and `ω = 2i k̄/|k|`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpectralParam {
    pub k: C64,
    pub h: f64,
    pub omega: C64,
}

impl SpectralParam {
    pub fn new(k: C64) -> Result<Self> {
        let a = k.norm();
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Parameter(format!("spectral parameter must be nonzero, got {k}")));
        }
        Ok(SpectralParam { k, h: 1.0 / a, omega: C64::new(0.0, 2.0) * k.conj() / a })
    }

    pub fn real(k: f64) -> Result<Self> {
        Self::new(C64::new(k, 0.0))
    }

    /// `⟨z, ω⟩/h = |k| Re(z ω̄)`, so that `e^{i·phase} = e^{kz − k̄z̄}`.
    pub fn phase(&self, z: C64) -> f64 {
        (z * self.omega.conj()).re / self.h
    }

    /// `e^{kz − k̄z̄}`.
    pub fn plane_wave(&self, z: C64) -> C64 {
        C64::from_polar(1.0, self.phase(z))
    }
}

/// Grid-sampled potential with its symmetry sign.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub values: GridField,
    pub sigma: f64,
    pub support_radius: f64,
}

impl PotentialField {
    pub fn new(values: GridField, sigma: f64, support_radius: f64) -> Result<Self> {
        if sigma != 1.0 && sigma != -1.0 {
            return Err(Error::Parameter(format!("sigma must be +1 or -1, got {sigma}")));
        }
        if values.grid.region != Region::Interior {
            return Err(Error::Domain("potential must live on the interior grid".into()));
        }
        if !values.is_finite() {
            return Err(Error::Parameter("potential has non-finite samples".into()));
        }
        if support_radius < 1.0 {
            for (i, &r) in values.grid.radial_nodes.iter().enumerate() {
                if r > support_radius && values.values.row(i).iter().any(|v| v.norm() != 0.0) {
                    return Err(Error::Domain(format!(
                        "potential nonzero at r = {r} beyond support radius {support_radius}"
                    )));
                }
            }
        }
        Ok(PotentialField { values, sigma, support_radius })
    }

    /// Characteristic function of the unit disk.
    pub fn disk(grid: &Arc<PolarGrid>, sigma: f64) -> Result<Self> {
        Self::new(GridField::constant(grid, C64::new(1.0, 0.0)), sigma, 1.0)
    }

    pub fn zero(grid: &Arc<PolarGrid>) -> Self {
        PotentialField { values: GridField::zeros(grid), sigma: 1.0, support_radius: 0.0 }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.values.grid
    }

    pub fn is_zero(&self) -> bool {
        self.values.values.iter().all(|v| v.norm() == 0.0)
    }
}

/// Multiplies by `e^{±(kz − k̄z̄)}` (translation by `±ω` on the Fourier side).
pub fn phase_multiplier(direction: i32, sp: &SpectralParam, f: &GridField) -> GridField {
    let g = &f.grid;
    let mut out = f.clone();
    for ((i, j), v) in out.values.indexed_iter_mut() {
        let e = sp.plane_wave(g.point(i, j));
        *v *= if direction >= 0 { e } else { e.conj() };
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Kernel {
    /// `1/(z − w)`, inverse of `∂̄`.
    Dbar,
    /// `1/(z̄ − w̄)`, inverse of `∂`.
    DbarConj,
}

/// A Cauchy transform on the whole plane: interior coefficients plus the
/// Laurent coefficients of the exterior continuation.
#[derive(Debug, Clone)]
pub struct CauchyOutput {
    pub kernel: Kernel,
    /// Interior Chebyshev–Fourier coefficients (degree up to `n_r`).
    pub interior: CoeffField,
    /// `laurent[j−1]` multiplies `z^{−j}` (`Dbar`) or `z̄^{−j}` (`DbarConj`).
    pub laurent: Vec<C64>,
}

impl CauchyOutput {
    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.interior.grid
    }

    pub fn interior_values(&self) -> GridField {
        grid::from_coeffs(&self.interior)
    }

    /// Values of the exterior continuation on an exterior grid.
    pub fn exterior_values(&self, ext: &Arc<PolarGrid>) -> GridField {
        let mut out = GridField::zeros(ext);
        let mut row = vec![ZERO; ext.n_phi];
        for i in 0..ext.n_r {
            let s = ext.radial_nodes[i];
            row.iter_mut().for_each(|v| *v = ZERO);
            let mut sj = 1.0;
            for (j0, c) in self.laurent.iter().enumerate() {
                sj *= s;
                let j = (j0 + 1) as i64;
                let n = match self.kernel {
                    Kernel::Dbar => -j,
                    Kernel::DbarConj => j,
                };
                if let Some(idx) = ext.index_of(n) {
                    row[idx] += c * sj;
                }
            }
            ext.phi_inverse(&mut row);
            out.values.row_mut(i).iter_mut().zip(&row).for_each(|(o, v)| *o = *v);
        }
        out
    }

    /// Value at an arbitrary point of the plane.
    pub fn eval(&self, z: C64) -> Result<C64> {
        let r = z.norm();
        if r <= 1.0 {
            let phi = z.im.atan2(z.re);
            Ok(grid::eval_off_grid(&self.interior, &[(r, phi)])?[0])
        } else {
            let w = match self.kernel {
                Kernel::Dbar => 1.0 / z,
                Kernel::DbarConj => 1.0 / z.conj(),
            };
            let mut acc = ZERO;
            for c in self.laurent.iter().rev() {
                acc = (acc + c) * w;
            }
            Ok(acc)
        }
    }

    /// Linear combination `a·self + b·other` (same kernel and grid).
    pub fn combine(&self, a: C64, other: &CauchyOutput, b: C64) -> CauchyOutput {
        let mut out = self.clone();
        out.interior.coeffs.zip_mut_with(&other.interior.coeffs, |x, y| *x = a * *x + b * *y);
        out.laurent.iter_mut().zip(&other.laurent).for_each(|(x, y)| *x = a * *x + b * *y);
        out
    }
}

/// Solves `(1+l) y' + p y = (1+l) g` in Chebyshev coefficients. `g` has
/// degree below `y.len() − 1`. For `p ≤ 0` the solution with `y(1) = 0` is
/// returned.
pub(crate) fn mode_solve(p: i64, g: &[C64], y: &mut [C64]) {
    let n = y.len() - 1;
    let gt = |m: usize| if m < g.len() { g[m] } else { ZERO };
    // (1+l) g in the second-kind basis.
    let mut gu = vec![ZERO; n + 3];
    gu[0] = gt(0) - gt(2) * 0.5;
    for (j, u) in gu.iter_mut().enumerate().take(n + 2).skip(1) {
        *u = (gt(j) - gt(j + 2)) * 0.5;
    }
    let rhs = |j: usize| {
        let below = if j > 0 { gu[j - 1] } else { ZERO };
        gu[j] + (below + gu[j + 1]) * 0.5
    };
    let pf = p as f64;
    let diag = |j: usize| if j == 0 { pf } else { 0.5 * (j as f64 + pf) };
    let sup2 = |j: usize| 0.5 * (j as f64 + 2.0 - pf);
    let mut yy = vec![ZERO; n + 3];

    if p >= 1 {
        for j in (0..=n).rev() {
            yy[j] = (rhs(j) - yy[j + 1] * (j as f64 + 1.0) - yy[j + 2] * sup2(j)) / diag(j);
        }
        y.copy_from_slice(&yy[..=n]);
        return;
    }

    // p ≤ 0: the Chebyshev rows are singular at degree −p and recursions in
    // either direction are unstable, so solve for u = y' in the second-kind
    // basis (a tridiagonal system) and fix the constant by y(1) = 0.
    let nu = n + 1;
    let mut sub = vec![0.0; nu];
    let dia = vec![1.0; nu];
    let mut sup = vec![0.0; nu];
    // Row k of (1+l) y' + p y with y_j = u_{j−1}/j for j ≥ 1; row 0 also
    // carries p·y₀, which is moved to a second right-hand side.
    for k in 0..nu {
        let kf = k as f64;
        if k > 0 {
            sub[k] = 0.5 + pf / (2.0 * kf);
        }
        sup[k] = 0.5 - pf / (2.0 * (kf + 2.0));
    }
    let mut b_part: Vec<C64> = (0..nu).map(rhs).collect();
    let mut b_c0 = vec![ZERO; nu];
    b_c0[0] = C64::new(-pf, 0.0);
    tridiag_solve(&sub, &dia, &sup, &mut [&mut b_part, &mut b_c0]);
    let coeffs = |u: &[C64], c0: C64| {
        let mut c = vec![ZERO; n + 1];
        c[0] = c0;
        for j in 1..=n {
            c[j] = u[j - 1] / j as f64;
        }
        c
    };
    // The y_{n+1} = u_n/(n+1) term is dropped; it also enters y(1).
    let ya = coeffs(&b_part, ZERO);
    let yb = coeffs(&b_c0, C64::new(1.0, 0.0));
    let rim = |c: &[C64], u: &[C64]| c.iter().sum::<C64>() + u[n] / (n as f64 + 1.0);
    let (ra, rb) = (rim(&ya, &b_part), rim(&yb, &b_c0));
    let t = if p == 0 { ZERO } else { -ra / rb };
    for j in 0..=n {
        y[j] = ya[j] + yb[j] * t;
    }
    if p == 0 {
        y[0] = -ra;
    }
}

/// Gaussian elimination with partial pivoting on a real tridiagonal matrix,
/// applied to several complex right-hand sides in place.
fn tridiag_solve(sub: &[f64], dia: &[f64], sup: &[f64], rhs: &mut [&mut Vec<C64>]) {
    let n = dia.len();
    // Upper factor rows hold columns i, i+1, i+2.
    let mut upper = vec![[0.0f64; 3]; n];
    let mut cur = [dia[0], sup[0], 0.0];
    for i in 0..n {
        if i + 1 == n {
            upper[i] = cur;
            break;
        }
        let mut next = [sub[i + 1], dia[i + 1], sup[i + 1]];
        if next[0].abs() > cur[0].abs() {
            std::mem::swap(&mut cur, &mut next);
            for b in rhs.iter_mut() {
                b.swap(i, i + 1);
            }
        }
        let f = next[0] / cur[0];
        for b in rhs.iter_mut() {
            let v = b[i];
            b[i + 1] -= v * f;
        }
        upper[i] = cur;
        cur = [next[1] - f * cur[1], next[2] - f * cur[2], 0.0];
    }
    for b in rhs.iter_mut() {
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= b[i + 1] * upper[i][1];
            }
            if i + 2 < n {
                v -= b[i + 2] * upper[i][2];
            }
            b[i] = v / upper[i][0];
        }
    }
}

/// Cauchy transform of a source given by its interior coefficients.
pub fn cauchy_transform_coeffs(source: &CoeffField, kernel: Kernel) -> CauchyOutput {
    let g = source.grid.clone();
    let n = g.n_r;
    let pmax = g.max_mode();
    let mut interior = CoeffField::zeros(&g);
    let mut laurent = vec![ZERO; pmax];
    let mut y = vec![ZERO; n + 1];
    for idx in 0..g.n_phi {
        let mode = g.mode_of(idx);
        let (p, out_mode) = match kernel {
            Kernel::Dbar => (1 - mode, mode - 1),
            Kernel::DbarConj => (mode + 1, mode + 1),
        };
        let Some(out_idx) = g.index_of(out_mode) else { continue };
        let src = source.coeffs.row(idx);
        mode_solve(p, src.as_slice().expect("standard layout"), &mut y);
        if p >= 1 {
            let rim: C64 = y.iter().sum();
            laurent[(p - 1) as usize] = rim;
        }
        interior.coeffs.row_mut(out_idx).iter_mut().zip(&y).for_each(|(o, v)| *o = *v);
    }
    CauchyOutput { kernel, interior, laurent }
}

fn check_source(source: &GridField) -> Result<()> {
    if source.grid.region != Region::Interior {
        return Err(Error::Domain("Cauchy source must be sampled on the interior grid".into()));
    }
    if !source.is_finite() {
        return Err(Error::Domain("Cauchy source has non-finite samples".into()));
    }
    Ok(())
}

/// Cauchy transform of an interior source, returned on the whole plane.
pub fn cauchy(source: &GridField, kernel: Kernel) -> Result<CauchyOutput> {
    check_source(source)?;
    Ok(cauchy_transform_coeffs(&grid::to_coeffs(source), kernel))
}

/// Cauchy transform sampled on `eval` (interior or exterior grid of the same size).
pub fn cauchy_transform(source: &GridField, eval: &Arc<PolarGrid>, kernel: Kernel) -> Result<GridField> {
    let out = cauchy(source, kernel)?;
    match eval.region {
        Region::Interior if eval.same_shape(&source.grid) => Ok(out.interior_values()),
        Region::Interior => Err(Error::Parameter("interior evaluation grid must match the source grid".into())),
        Region::Exterior => Ok(out.exterior_values(eval)),
    }
}

/// `a_n = (1/π)∫ v(w) w^{n−1} dA(w)` for `n = 1..=n_max`, so that
/// `C[v](z) = Σ a_n z^{−n}` for `|z| > 1`.
pub fn exterior_moments(source: &GridField, n_max: usize) -> Result<Vec<C64>> {
    let out = cauchy(source, Kernel::Dbar)?;
    Ok((0..n_max).map(|j| out.laurent.get(j).copied().unwrap_or(ZERO)).collect())
}

/// `A f = C[(q/2) e^{k̄z̄−kz} f]`.
pub fn apply_a(f: &GridField, q: &PotentialField, sp: &SpectralParam) -> Result<CauchyOutput> {
    let src = phase_multiplier(-1, sp, &f.zip_map(&q.values, |a, b| a * b * 0.5));
    cauchy(&src, Kernel::Dbar)
}

/// `B f = σ C̄[(q̄/2) e^{kz−k̄z̄} f]`.
pub fn apply_b(f: &GridField, q: &PotentialField, sp: &SpectralParam) -> Result<CauchyOutput> {
    let s = q.sigma;
    let src = phase_multiplier(1, sp, &f.zip_map(&q.values, |a, b| a * b.conj() * (0.5 * s)));
    cauchy(&src, Kernel::DbarConj)
}

/// `AB f`, the diagonal block of `K²`.
pub fn k2_apply(f: &GridField, q: &PotentialField, sp: &SpectralParam) -> Result<CauchyOutput> {
    apply_a(&apply_b(f, q, sp)?.interior_values(), q, sp)
}

/// Residual fields of the Dirac system in polar form.
#[derive(Debug, Clone)]
pub struct Residuals {
    pub interior: (GridField, GridField),
    pub exterior: (GridField, GridField),
}

impl Residuals {
    pub fn sup_interior(&self) -> f64 {
        self.interior.0.sup_norm().max(self.interior.1.sup_norm())
    }

    pub fn sup_exterior(&self) -> f64 {
        self.exterior.0.sup_norm().max(self.exterior.1.sup_norm())
    }
}

/// `e^{iφ}(∂_r + i/r ∂_φ)φ₁ − q e^{k̄z̄−kz}φ₂` and
/// `e^{−iφ}(∂_r − i/r ∂_φ)φ₂ − σ q̄ e^{kz−k̄z̄}φ₁` on the interior, and the
/// same operators with `q = 0` on the exterior (`∂_r = −s²∂_s`, `1/r = s`).
pub fn dbar_residual(
    phi1_int: &CoeffField,
    phi2_int: &CoeffField,
    phi1_ext: &GridField,
    phi2_ext: &GridField,
    q: &PotentialField,
    sp: &SpectralParam,
) -> Residuals {
    let gi = phi1_int.grid.clone();
    let v1 = grid::from_coeffs(phi1_int);
    let v2 = grid::from_coeffs(phi2_int);
    let polar = |c: &CoeffField| (grid::from_coeffs(&grid::diff_radial(c)), grid::from_coeffs(&grid::diff_phi(c)));
    let (r1, p1) = polar(phi1_int);
    let (r2, p2) = polar(phi2_int);
    let mut res1 = GridField::zeros(&gi);
    let mut res2 = GridField::zeros(&gi);
    let i_unit = C64::new(0.0, 1.0);
    for i in 0..gi.n_r {
        let r = gi.radial_nodes[i];
        for j in 0..gi.n_phi {
            let z = gi.point(i, j);
            let e = C64::from_polar(1.0, gi.angular_nodes[j]);
            let pw = sp.plane_wave(z);
            let qv = q.values.values[[i, j]];
            res1.values[[i, j]] = e * (r1.values[[i, j]] + i_unit * p1.values[[i, j]] / r)
                - qv * pw.conj() * v2.values[[i, j]];
            res2.values[[i, j]] = e.conj() * (r2.values[[i, j]] - i_unit * p2.values[[i, j]] / r)
                - qv.conj() * q.sigma * pw * v1.values[[i, j]];
        }
    }
    let ext = |f: &GridField, sign: f64| {
        let c = grid::to_coeffs(f);
        let ds = grid::from_coeffs(&grid::diff_radial(&c));
        let dp = grid::from_coeffs(&grid::diff_phi(&c));
        let ge = f.grid.clone();
        let mut out = GridField::zeros(&ge);
        for ((i, j), v) in out.values.indexed_iter_mut() {
            let s = ge.radial_nodes[i];
            let e = C64::from_polar(1.0, sign * ge.angular_nodes[j]);
            *v = e * (-ds.values[[i, j]] * s * s + i_unit * sign * s * dp.values[[i, j]]);
        }
        out
    };
    Residuals {
        interior: (res1, res2),
        exterior: (ext(phi1_ext, 1.0), ext(phi2_ext, -1.0)),
    }
}
