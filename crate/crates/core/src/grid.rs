//! Polar collocation grids and Chebyshev–Fourier transforms.
//!
//! Radial variable: `l = 2ρ − 1` where ρ is `r` on the interior grid and
//! `s = 1/r` on the exterior grid. The radial nodes are the Chebyshev–
//! Gauss–Lobatto points `l_j = cos(πj/N)` for `j = 0..N−1`; the endpoint
//! `l = −1` (the origin, or infinity) is never sampled. A grid function is
//! identified with its unique interpolant of degree `≤ N − 1` in `l`.
//!
//! Coefficient arrays are indexed `[mode, degree]` with the Fourier mode in
//! FFT order (see [`PolarGrid::mode_of`]) and the degree in `0..=N`. The top
//! slot is zero for interpolants but may be populated by operators that
//! raise the degree by one (the Cauchy transforms).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Region {
    Interior,
    Exterior,
}

struct Plans {
    phi_fwd: Arc<dyn Fft<f64>>,
    phi_inv: Arc<dyn Fft<f64>>,
    cheb: Arc<dyn Fft<f64>>,
}

/// Tensor grid in (ρ, φ) with ρ = r (interior) or s = 1/r (exterior).
pub struct PolarGrid {
    pub region: Region,
    pub n_r: usize,
    pub n_phi: usize,
    /// Increasing, in (0, 1], last node exactly 1.
    pub radial_nodes: Vec<f64>,
    /// `2πj/n_phi`.
    pub angular_nodes: Vec<f64>,
    /// Clenshaw–Curtis weights for `∫₀¹ F(ρ) dρ` acting on node values.
    cc_weights: Vec<f64>,
    /// Weights for `∫₀^{ρ_min} F(ρ) dρ` of the interpolant.
    gap_weights: Vec<f64>,
    plans: Plans,
}

impl fmt::Debug for PolarGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarGrid")
            .field("region", &self.region)
            .field("n_r", &self.n_r)
            .field("n_phi", &self.n_phi)
            .finish()
    }
}

/// Builds a grid. `n_r ≥ 4`, `n_phi ≥ 8` and even.
pub fn make_grid(region: Region, n_r: usize, n_phi: usize) -> Result<Arc<PolarGrid>> {
    if n_r < 4 || n_phi < 8 || !n_phi.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "grid needs n_r >= 4 and even n_phi >= 8, got {n_r}x{n_phi}"
        )));
    }
    let mut planner = FftPlanner::new();
    let plans = Plans {
        phi_fwd: planner.plan_fft_forward(n_phi),
        phi_inv: planner.plan_fft_inverse(n_phi),
        cheb: planner.plan_fft_forward(2 * n_r),
    };
    let radial_nodes = (0..n_r)
        .map(|i| {
            let j = n_r - 1 - i;
            if j == 0 {
                1.0
            } else {
                0.5 * (1.0 + (PI * j as f64 / n_r as f64).cos())
            }
        })
        .collect();
    let angular_nodes = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
    let mut grid = PolarGrid {
        region,
        n_r,
        n_phi,
        radial_nodes,
        angular_nodes,
        cc_weights: Vec::new(),
        gap_weights: Vec::new(),
        plans,
    };
    grid.build_weights();
    Ok(Arc::new(grid))
}

impl PolarGrid {
    /// Half the angular node count; modes live in `[−P, P)`.
    pub fn max_mode(&self) -> usize {
        self.n_phi / 2
    }

    /// Fourier mode stored at row `idx` of a coefficient array.
    pub fn mode_of(&self, idx: usize) -> i64 {
        let p = self.max_mode();
        if idx < p {
            idx as i64
        } else {
            idx as i64 - self.n_phi as i64
        }
    }

    /// Row index of mode `n`, if representable.
    pub fn index_of(&self, n: i64) -> Option<usize> {
        let p = self.max_mode() as i64;
        if n >= -p && n < p {
            Some(if n >= 0 { n as usize } else { (n + self.n_phi as i64) as usize })
        } else {
            None
        }
    }

    /// Complex coordinate of node `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> C64 {
        to_z(self.region, self.radial_nodes[i], self.angular_nodes[j])
    }

    pub fn same_shape(&self, other: &PolarGrid) -> bool {
        self.n_r == other.n_r && self.n_phi == other.n_phi
    }

    fn build_weights(&mut self) {
        let n = self.n_r;
        let l_min = 2.0 * self.radial_nodes[0] - 1.0;
        // ∫_{-1}^{1} T_m and ∫_{-1}^{l_min} T_m.
        let full: Vec<f64> = (0..=n)
            .map(|m| if m % 2 == 0 { 2.0 / (1.0 - (m * m) as f64) } else { 0.0 })
            .collect();
        let gap: Vec<f64> = (0..=n)
            .map(|m| cheb_antiderivative(m, l_min) - cheb_antiderivative(m, -1.0))
            .collect();
        let mut cc = vec![0.0; n];
        let mut gw = vec![0.0; n];
        let mut unit = vec![C64::new(0.0, 0.0); n];
        let mut coef = vec![C64::new(0.0, 0.0); n + 1];
        for i in 0..n {
            unit.iter_mut().for_each(|u| *u = C64::new(0.0, 0.0));
            unit[n - 1 - i] = C64::new(1.0, 0.0);
            self.cheb_forward(&unit, &mut coef);
            // dρ = dl / 2
            cc[i] = 0.5 * coef.iter().zip(&full).map(|(c, w)| c.re * w).sum::<f64>();
            gw[i] = 0.5 * coef.iter().zip(&gap).map(|(c, w)| c.re * w).sum::<f64>();
        }
        self.cc_weights = cc;
        self.gap_weights = gw;
    }

    /// Node values (CGL order, `vals[0]` at l = 1) to Chebyshev coefficients
    /// of the degree `N−1` interpolant. `out` has length `N + 1`.
    pub(crate) fn cheb_forward(&self, vals: &[C64], out: &mut [C64]) {
        let n = self.n_r;
        debug_assert_eq!(vals.len(), n);
        debug_assert_eq!(out.len(), n + 1);
        // Missing endpoint value chosen so the degree-N coefficient vanishes.
        let mut alt = vals[0] * 0.5;
        for (j, v) in vals.iter().enumerate().skip(1) {
            if j % 2 == 1 {
                alt -= v;
            } else {
                alt += v;
            }
        }
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let f_end = -alt * (2.0 * sign);
        let mut buf = vec![C64::new(0.0, 0.0); 2 * n];
        buf[..n].copy_from_slice(vals);
        buf[n] = f_end;
        for j in 1..n {
            buf[2 * n - j] = vals[j];
        }
        self.plans.cheb.process(&mut buf);
        let scale = 1.0 / n as f64;
        for m in 0..=n {
            out[m] = buf[m] * scale;
        }
        out[0] *= 0.5;
        out[n] = C64::new(0.0, 0.0);
    }

    /// Chebyshev coefficients (length `N + 1`) to node values in CGL order.
    pub(crate) fn cheb_inverse(&self, coef: &[C64], out: &mut [C64]) {
        let n = self.n_r;
        let mut buf = vec![C64::new(0.0, 0.0); 2 * n];
        buf[0] = coef[0];
        buf[n] = coef[n];
        for m in 1..n {
            buf[m] = coef[m] * 0.5;
            buf[2 * n - m] = coef[m] * 0.5;
        }
        self.plans.cheb.process(&mut buf);
        out.copy_from_slice(&buf[..n]);
    }

    pub(crate) fn phi_forward(&self, row: &mut [C64]) {
        self.plans.phi_fwd.process(row);
        let s = 1.0 / self.n_phi as f64;
        row.iter_mut().for_each(|v| *v *= s);
    }

    pub(crate) fn phi_inverse(&self, row: &mut [C64]) {
        self.plans.phi_inv.process(row);
    }
}

fn cheb_antiderivative(m: usize, x: f64) -> f64 {
    let t = |k: usize| (k as f64 * x.clamp(-1.0, 1.0).acos()).cos();
    match m {
        0 => x,
        1 => 0.5 * x * x,
        _ => t(m + 1) / (2.0 * (m + 1) as f64) - t(m - 1) / (2.0 * (m - 1) as f64),
    }
}

/// Complex coordinate of a polar point on the given region.
pub fn to_z(region: Region, rho: f64, phi: f64) -> C64 {
    let e = C64::from_polar(1.0, phi);
    match region {
        Region::Interior => e * rho,
        Region::Exterior => e / rho,
    }
}

/// Complex field sampled at the nodes, indexed `(radial, angular)`.
#[derive(Debug, Clone)]
pub struct GridField {
    pub grid: Arc<PolarGrid>,
    pub values: Array2<C64>,
}

impl GridField {
    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        GridField {
            grid: grid.clone(),
            values: Array2::zeros((grid.n_r, grid.n_phi)),
        }
    }

    pub fn constant(grid: &Arc<PolarGrid>, c: C64) -> Self {
        GridField {
            grid: grid.clone(),
            values: Array2::from_elem((grid.n_r, grid.n_phi), c),
        }
    }

    /// Samples `f(z)` at every node.
    pub fn from_fn(grid: &Arc<PolarGrid>, f: impl Fn(C64) -> C64) -> Self {
        let values = Array2::from_shape_fn((grid.n_r, grid.n_phi), |(i, j)| f(grid.point(i, j)));
        GridField { grid: grid.clone(), values }
    }

    /// Samples `f(ρ, φ)` at every node.
    pub fn from_polar(grid: &Arc<PolarGrid>, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = Array2::from_shape_fn((grid.n_r, grid.n_phi), |(i, j)| {
            f(grid.radial_nodes[i], grid.angular_nodes[j])
        });
        GridField { grid: grid.clone(), values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn sup_diff(&self, other: &GridField) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Pointwise combination with a field on a grid of the same shape.
    pub fn zip_map(&self, other: &GridField, f: impl Fn(C64, C64) -> C64) -> GridField {
        let mut values = self.values.clone();
        values.zip_mut_with(&other.values, |a, b| *a = f(*a, *b));
        GridField { grid: self.grid.clone(), values }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> GridField {
        GridField { grid: self.grid.clone(), values: self.values.mapv(f) }
    }
}

/// Chebyshev–Fourier coefficients `a_{nm}`, indexed `[mode row, degree]`.
#[derive(Debug, Clone)]
pub struct CoeffField {
    pub grid: Arc<PolarGrid>,
    pub coeffs: Array2<C64>,
}

impl CoeffField {
    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        CoeffField {
            grid: grid.clone(),
            coeffs: Array2::zeros((grid.n_phi, grid.n_r + 1)),
        }
    }

    /// Coefficient of mode `n`, degree `m` (zero if not representable).
    pub fn get(&self, n: i64, m: usize) -> C64 {
        match self.grid.index_of(n) {
            Some(idx) if m <= self.grid.n_r => self.coeffs[[idx, m]],
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn sup_diff(&self, other: &CoeffField) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

pub fn to_coeffs(field: &GridField) -> CoeffField {
    let g = &field.grid;
    let (n_r, n_phi) = (g.n_r, g.n_phi);
    let mut modes = field.values.clone();
    for mut row in modes.rows_mut() {
        g.phi_forward(row.as_slice_mut().expect("standard layout"));
    }
    let mut out = CoeffField::zeros(g);
    let mut vals = vec![C64::new(0.0, 0.0); n_r];
    for idx in 0..n_phi {
        for i in 0..n_r {
            vals[n_r - 1 - i] = modes[[i, idx]];
        }
        let mut row = out.coeffs.row_mut(idx);
        g.cheb_forward(&vals, row.as_slice_mut().expect("standard layout"));
    }
    out
}

pub fn from_coeffs(coeffs: &CoeffField) -> GridField {
    let g = &coeffs.grid;
    let (n_r, n_phi) = (g.n_r, g.n_phi);
    let mut values = Array2::zeros((n_r, n_phi));
    let mut vals = vec![C64::new(0.0, 0.0); n_r];
    for idx in 0..n_phi {
        let row = coeffs.coeffs.row(idx);
        g.cheb_inverse(row.as_slice().expect("standard layout"), &mut vals);
        for i in 0..n_r {
            values[[i, idx]] = vals[n_r - 1 - i];
        }
    }
    for mut row in values.rows_mut() {
        g.phi_inverse(row.as_slice_mut().expect("standard layout"));
    }
    GridField { grid: g.clone(), values }
}

/// Clenshaw summation of a Chebyshev series at `x`.
pub(crate) fn clenshaw(c: &[C64], x: f64) -> C64 {
    let mut b1 = C64::new(0.0, 0.0);
    let mut b2 = C64::new(0.0, 0.0);
    for ck in c.iter().skip(1).rev() {
        let b0 = ck + b1 * (2.0 * x) - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + b1 * x - b2
}

/// Sums the series at arbitrary `(ρ, φ)` points, `ρ ∈ [ρ_min, 1]`.
pub fn eval_off_grid(coeffs: &CoeffField, points: &[(f64, f64)]) -> Result<Vec<C64>> {
    let g = &coeffs.grid;
    let rho_min = g.radial_nodes[0];
    points
        .iter()
        .map(|&(rho, phi)| {
            if !(rho >= rho_min * (1.0 - 1e-12) && rho <= 1.0 + 1e-12) {
                return Err(Error::Domain(format!(
                    "radial coordinate {rho} outside [{rho_min}, 1]"
                )));
            }
            let l = 2.0 * rho - 1.0;
            let mut sum = C64::new(0.0, 0.0);
            for idx in 0..g.n_phi {
                let row = coeffs.coeffs.row(idx);
                let c = clenshaw(row.as_slice().expect("standard layout"), l);
                sum += c * C64::from_polar(1.0, g.mode_of(idx) as f64 * phi);
            }
            Ok(sum)
        })
        .collect()
}

/// `∂_φ`: mode `n` times `i n`.
pub fn diff_phi(coeffs: &CoeffField) -> CoeffField {
    let g = &coeffs.grid;
    let mut out = coeffs.clone();
    for (idx, mut row) in out.coeffs.rows_mut().into_iter().enumerate() {
        let f = C64::new(0.0, g.mode_of(idx) as f64);
        row.mapv_inplace(|v| v * f);
    }
    out
}

/// `∂_ρ` (that is `∂_r` on the interior grid and `∂_s` on the exterior grid).
pub fn diff_radial(coeffs: &CoeffField) -> CoeffField {
    let g = &coeffs.grid;
    let n = g.n_r;
    let mut out = CoeffField::zeros(g);
    for idx in 0..g.n_phi {
        let c = coeffs.coeffs.row(idx);
        let mut d = vec![C64::new(0.0, 0.0); n + 2];
        for m in (1..=n).rev() {
            d[m - 1] = d[m + 1] + c[m] * (2.0 * m as f64);
        }
        d[0] *= 0.5;
        // dl/dρ = 2
        for (o, v) in out.coeffs.row_mut(idx).iter_mut().zip(&d[..n]) {
            *o = v * 2.0;
        }
    }
    out
}

/// Weighted norm with the truncation estimate of the exterior integral.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WeightedNorm {
    pub norm: f64,
    /// Approximate contribution of `s ∈ [0, s_min]` to the squared norm.
    pub truncation: f64,
}

/// `‖⟨z⟩^{−ε} f‖_{L²(ℂ)}` from an interior and an exterior field.
pub fn quad_weighted(interior: &GridField, exterior: &GridField, eps: f64) -> Result<WeightedNorm> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Parameter(format!("weight exponent {eps} outside (0, 1]")));
    }
    if interior.grid.region != Region::Interior || exterior.grid.region != Region::Exterior {
        return Err(Error::Parameter("quad_weighted needs interior and exterior fields".into()));
    }
    let ring = |f: &GridField, i: usize| -> f64 {
        let dphi = 2.0 * PI / f.grid.n_phi as f64;
        f.values.row(i).iter().map(|v| v.norm_sqr()).sum::<f64>() * dphi
    };
    let gi = &interior.grid;
    let mut total = 0.0;
    for i in 0..gi.n_r {
        let r = gi.radial_nodes[i];
        total += gi.cc_weights[i] * ring(interior, i) * r * (1.0 + r * r).powf(-eps);
    }
    let ge = &exterior.grid;
    let mut gap = 0.0;
    for i in 0..ge.n_r {
        let s = ge.radial_nodes[i];
        let f = ring(exterior, i) * (1.0 + 1.0 / (s * s)).powf(-eps) / (s * s * s);
        total += ge.cc_weights[i] * f;
        gap += ge.gap_weights[i] * f;
    }
    Ok(WeightedNorm { norm: total.max(0.0).sqrt(), truncation: gap.abs() })
}

/// Largest coefficient in the top 10% of modes or degrees, relative to the
/// largest coefficient overall.
pub fn coeff_decay(coeffs: &CoeffField) -> f64 {
    let g = &coeffs.grid;
    let p = g.max_mode() as f64;
    let n = g.n_r as f64;
    let mut peak = 0.0_f64;
    let mut tail = 0.0_f64;
    for ((idx, m), v) in coeffs.coeffs.indexed_iter() {
        let a = v.norm();
        peak = peak.max(a);
        let n_abs = g.mode_of(idx).unsigned_abs() as f64;
        if n_abs >= 0.9 * p || m as f64 >= 0.9 * n {
            tail = tail.max(a);
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        tail / peak
    }
}

/// `∫ f dA` over the region covered by the grid (trapezoid × Clenshaw–Curtis).
pub fn integrate(field: &GridField) -> C64 {
    let g = &field.grid;
    let dphi = 2.0 * PI / g.n_phi as f64;
    let mut total = C64::new(0.0, 0.0);
    for i in 0..g.n_r {
        let rho = g.radial_nodes[i];
        let jac = match g.region {
            Region::Interior => rho,
            Region::Exterior => 1.0 / (rho * rho * rho),
        };
        let ring: C64 = field.values.row(i).iter().sum();
        total += ring * (g.cc_weights[i] * jac * dphi);
    }
    total
}
