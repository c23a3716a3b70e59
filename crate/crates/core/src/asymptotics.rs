//! Large-|k| description of the CGO solution for `q = 1_D`, `σ = 1`.
//!
//! Every formula is evaluated for real `κ = |k|` after the rotation
//! `z' = e^{iθ} z`, `θ = arg k`, under which `φ₁(z; k) = φ₁(z'; κ)` and
//! `φ₂(z; k) = e^{−iθ} φ₂(z'; κ)`. In the rotated frame the boundary phase
//! `κ(1/w − w)` has stationary points `±i`, and the plane splits into
//!
//! * I1: bulk of the disk (`r < r_k`) or far field (`s = 1/r < r_k`),
//! * I2: rim band away from the stationary points, with a residue term on
//!   the left half inside and on the right half outside,
//! * II: discs of radius `C/√κ` around `z̄ = ±i`, described by the profile
//!   functions `G_r`, `G_ℓ`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dbar::SpectralParam;
use crate::error::{Error, Result};

type C64 = Complex64;
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tunable constants of the zone decomposition and the profile quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConfig {
    /// Case II radius multiplier: `|z̄ − w_±| < C/√|k|`.
    pub c: f64,
    /// `δ = delta_scale/√|k|`.
    pub delta_scale: f64,
    /// `1 − r_k = rk_scale/√|k|`.
    pub rk_scale: f64,
    pub g_quad: GQuad,
}

/// Trapezoid rule on a shifted line for the profile functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GQuad {
    /// Period scale: nodes cover `L·[−π, π)`.
    pub l: f64,
    /// Number of nodes (power of two).
    pub n: usize,
    /// Distance from the pole to the integration line.
    pub offset: f64,
}

impl Default for GQuad {
    fn default() -> Self {
        GQuad { l: 10.0, n: 512, offset: 1.5 }
    }
}

impl Default for AsymptoticConfig {
    fn default() -> Self {
        AsymptoticConfig { c: 4.0, delta_scale: 1.0, rk_scale: 1.0, g_quad: GQuad::default() }
    }
}

impl AsymptoticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Parameter(format!("C must be positive, got {}", self.c)));
        }
        if !(self.delta_scale > 0.0 && self.rk_scale > 0.0) {
            return Err(Error::Parameter("delta and r_k scales must be positive".into()));
        }
        let q = &self.g_quad;
        if !q.n.is_power_of_two() || q.n < 8 {
            return Err(Error::Parameter(format!("G quadrature nodes must be a power of two, got {}", q.n)));
        }
        if !(q.offset > 0.0 && q.l > 0.0) {
            return Err(Error::Parameter("G quadrature offset and period must be positive".into()));
        }
        Ok(())
    }

    pub fn delta(&self, k_abs: f64) -> f64 {
        self.delta_scale / k_abs.sqrt()
    }

    pub fn r_k(&self, k_abs: f64) -> f64 {
        1.0 - self.rk_scale / k_abs.sqrt()
    }
}

/// Which analytic branch of the profile integral is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    /// Continuation from `Im ζ > 0`.
    R,
    /// Continuation from `Im ζ < 0`.
    L,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ZoneLabel {
    I1,
    I2Residue,
    I2Plain,
    IINorth(Branch),
    IISouth(Branch),
}

impl ZoneLabel {
    pub fn name(&self) -> &'static str {
        match self {
            ZoneLabel::I1 => "I1",
            ZoneLabel::I2Residue => "I2_residue",
            ZoneLabel::I2Plain => "I2_plain",
            ZoneLabel::IINorth(Branch::R) => "II_north_r",
            ZoneLabel::IINorth(Branch::L) => "II_north_l",
            ZoneLabel::IISouth(Branch::R) => "II_south_r",
            ZoneLabel::IISouth(Branch::L) => "II_south_l",
        }
    }

    pub fn is_case_two(&self) -> bool {
        matches!(self, ZoneLabel::IINorth(_) | ZoneLabel::IISouth(_))
    }
}

/// Stationary points `w_± = ±i e^{i arg k}` and steepest-descent scales
/// `a_± = e^{i arg k}·√(±i/(2|k|))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPair {
    pub w_plus: C64,
    pub w_minus: C64,
    pub a_plus: C64,
    pub a_minus: C64,
}

pub fn stationary_points(sp: &SpectralParam) -> StationaryPair {
    let rot = sp.k / sp.k.norm();
    let kk = sp.k.norm();
    StationaryPair {
        w_plus: I * rot,
        w_minus: -I * rot,
        a_plus: rot * (I / (2.0 * kk)).sqrt(),
        a_minus: rot * (-I / (2.0 * kk)).sqrt(),
    }
}

/// `(κ, e^{iθ})` for `k = κ e^{iθ}`.
fn frame(sp: &SpectralParam) -> (f64, C64) {
    let kk = sp.k.norm();
    (kk, sp.k / kk)
}

/// Angle in `[0, 2π)`.
fn angle(z: C64) -> f64 {
    let a = z.im.atan2(z.re);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Offset of the south and north stationary points, in units of `a_∓`.
fn local_coords(zeta: C64, kk: f64) -> (C64, C64) {
    let s = (2.0 * kk).sqrt();
    let a_minus = C64::from_polar(1.0 / s, -FRAC_PI_4);
    let a_plus = C64::from_polar(1.0 / s, FRAC_PI_4);
    ((zeta + I) / a_minus, (I - zeta) / a_plus)
}

/// Zone label in the rotated frame (`κ > 0`, `z` already rotated).
fn classify_rotated(z: C64, kk: f64, cfg: &AsymptoticConfig) -> ZoneLabel {
    let zeta = z.conj();
    let radius = cfg.c / kk.sqrt();
    if (zeta + I).norm() < radius {
        let (t, _) = local_coords(zeta, kk);
        return ZoneLabel::IISouth(if t.im > 0.0 { Branch::R } else { Branch::L });
    }
    if (zeta - I).norm() < radius {
        let (_, t) = local_coords(zeta, kk);
        return ZoneLabel::IINorth(if t.im > 0.0 { Branch::R } else { Branch::L });
    }
    case_one_label(z, kk, cfg)
}

fn case_one_label(z: C64, kk: f64, cfg: &AsymptoticConfig) -> ZoneLabel {
    let r = z.norm();
    let inside = r <= 1.0;
    let radial = if inside { r } else { 1.0 / r };
    if radial < cfg.r_k(kk) {
        return ZoneLabel::I1;
    }
    let phi = angle(z);
    let delta = cfg.delta(kk);
    let left = phi > FRAC_PI_2 + delta && phi < 3.0 * FRAC_PI_2 - delta;
    let right = phi < FRAC_PI_2 - delta || phi > 3.0 * FRAC_PI_2 + delta;
    if (inside && left) || (!inside && right) {
        ZoneLabel::I2Residue
    } else {
        ZoneLabel::I2Plain
    }
}

/// Partition of the plane into the asymptotic zones for spectral parameter `sp`.
pub fn zone_classify(z: C64, sp: &SpectralParam, cfg: &AsymptoticConfig) -> ZoneLabel {
    let (kk, rot) = frame(sp);
    classify_rotated(rot * z, kk, cfg)
}

/// `e^{Φ}` and the residue exponential `e^{κ(1/z̄ − z̄)}` in the rotated frame.
fn exponentials(z: C64, kk: f64) -> (C64, C64) {
    let zeta = z.conj();
    let plane = C64::from_polar(1.0, 2.0 * kk * z.im);
    let residue = (kk * (1.0 / zeta - zeta)).exp();
    (plane, residue)
}

fn case_one_rotated(z: C64, kk: f64, label: ZoneLabel) -> C64 {
    let inside = z.norm() <= 1.0;
    let (plane, residue) = exponentials(z, kk);
    let scale = 1.0 / (2.0 * kk);
    match (label, inside) {
        (ZoneLabel::I2Residue, true) => (plane - residue) * scale,
        (ZoneLabel::I2Residue, false) => residue * scale,
        (_, true) => plane * scale,
        (_, false) => C64::new(0.0, 0.0),
    }
}

/// Case I value of `φ₂`: the bulk plane wave inside, zero outside, and the
/// residue-corrected forms in the I2 sectors. Case II discs are ignored.
pub fn phi2_case_one(z: C64, sp: &SpectralParam, cfg: &AsymptoticConfig) -> C64 {
    let (kk, rot) = frame(sp);
    let zr = rot * z;
    rot.conj() * case_one_rotated(zr, kk, case_one_label(zr, kk, cfg))
}

/// Profile function `G(ζ) = ∫ e^{−t²/2}/(ζ − t) dt` on the requested branch.
///
/// The real line is moved to `Im t = c` with the pole at distance
/// `offset` on the side dictated by the branch, then summed by the
/// trapezoid rule over `L·[−π, π)`.
pub fn g_profile(zeta: C64, branch: Branch, q: &GQuad) -> C64 {
    let c = match branch {
        Branch::R => (zeta.im - q.offset).min(0.0),
        Branch::L => (zeta.im + q.offset).max(0.0),
    };
    let h = 2.0 * PI / q.n as f64;
    let mut acc = C64::new(0.0, 0.0);
    for j in 1..=q.n {
        let t = C64::new(q.l * (-PI + j as f64 * h), c);
        acc += (-t * t * 0.5).exp() / (zeta - t);
    }
    acc * (q.l * h)
}

/// Change in `g_profile` when the node count is doubled.
pub fn g_profile_refinement(zeta: C64, branch: Branch, q: &GQuad) -> f64 {
    let fine = GQuad { n: 2 * q.n, ..*q };
    (g_profile(zeta, branch, &fine) - g_profile(zeta, branch, q)).norm()
}

fn case_two_rotated(z: C64, kk: f64, label: ZoneLabel, q: &GQuad) -> C64 {
    let inside = z.norm() <= 1.0;
    let zeta = z.conj();
    let (plane, residue) = exponentials(z, kk);
    let scale = 1.0 / (2.0 * kk);
    let (south, north) = local_coords(zeta, kk);
    let denom = 4.0 * PI * I * kk;
    let (coef, t, branch) = match label {
        ZoneLabel::IISouth(b) => (C64::from_polar(1.0, 2.0 * kk) / denom, south, b),
        ZoneLabel::IINorth(b) => (C64::from_polar(1.0, -2.0 * kk) / denom, north, b),
        _ => unreachable!("case two called with a case one label"),
    };
    let g = coef * g_profile(t, branch, q);
    match (inside, branch) {
        (true, Branch::R) => g + plane * scale,
        (true, Branch::L) => g + (plane - residue) * scale,
        (false, Branch::R) => g + residue * scale,
        (false, Branch::L) => g,
    }
}

/// Case II value of `φ₂` near the stationary points.
pub fn phi2_case_two(z: C64, sp: &SpectralParam, cfg: &AsymptoticConfig) -> Result<C64> {
    let (kk, rot) = frame(sp);
    let zr = rot * z;
    let label = classify_rotated(zr, kk, cfg);
    if !label.is_case_two() {
        return Err(Error::Contract(format!("z = {z} is outside the case II discs ({})", label.name())));
    }
    Ok(rot.conj() * case_two_rotated(zr, kk, label, &cfg.g_quad))
}

/// Zone-dispatched asymptotic `φ₂`.
pub fn phi2_asym(z: C64, sp: &SpectralParam, cfg: &AsymptoticConfig) -> C64 {
    let (kk, rot) = frame(sp);
    let zr = rot * z;
    let label = classify_rotated(zr, kk, cfg);
    let v = if label.is_case_two() {
        case_two_rotated(zr, kk, label, &cfg.g_quad)
    } else {
        case_one_rotated(zr, kk, label)
    };
    rot.conj() * v
}

/// `1 + z̄/(4k)` inside the disk, `1 + 1/(4kz)` outside.
pub fn phi1_asym(z: C64, sp: &SpectralParam) -> C64 {
    let w = if z.norm() <= 1.0 { z.conj() } else { 1.0 / z };
    1.0 + w / (4.0 * sp.k)
}

/// `R(k) ≈ (π|k|³)^{−1/2}(sin(2|k| − π/4) − 5/(16|k|)·cos(2|k| − π/4))`.
pub fn reflection_asym(sp: &SpectralParam) -> f64 {
    let kk = sp.k.norm();
    let a = 2.0 * kk - FRAC_PI_4;
    (PI * kk.powi(3)).powf(-0.5) * (a.sin() - 5.0 / (16.0 * kk) * a.cos())
}
