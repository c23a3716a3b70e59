//! Solver-versus-asymptotics comparisons for the disk potential.
//!
//! Solutions are cached per `(k, resolution, tol)` so that sweeps and
//! repeated comparisons reuse them. All sweeps return records in input
//! order regardless of how the work was scheduled.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{self, AsymptoticConfig, ZoneLabel};
use crate::dbar::{self, PotentialField, SpectralParam};
use crate::error::{Error, Result};
use crate::grid::{self, make_grid, GridField, PolarGrid, Region};
use crate::solver::{self, CGOSolution, SolveConfig, SolveReport};

type C64 = Complex64;
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Weight exponents reported by the comparisons.
pub const REPORTED_EPS: [f64; 2] = [0.5, 1.0];

type CacheKey = (u64, u64, usize, usize, u64);

/// Solution cache for `q = 1_D`, `σ = 1`.
#[derive(Default)]
pub struct DiskSolver {
    pub cfg: SolveConfig,
    /// Fixed resolution, or `None` for the size suggested per `|k|`.
    pub resolution: Option<(usize, usize)>,
    cache: Mutex<HashMap<CacheKey, Arc<(CGOSolution, SolveReport)>>>,
}

impl DiskSolver {
    pub fn new(cfg: SolveConfig, resolution: Option<(usize, usize)>) -> Self {
        DiskSolver { cfg, resolution, cache: Mutex::new(HashMap::new()) }
    }

    pub fn resolution_for(&self, k_abs: f64) -> (usize, usize) {
        self.resolution.unwrap_or_else(|| solver::suggest_resolution(k_abs))
    }

    pub fn solve(&self, sp: &SpectralParam) -> Result<Arc<(CGOSolution, SolveReport)>> {
        let (n_r, n_phi) = self.resolution_for(sp.k.norm());
        let key = (sp.k.re.to_bits(), sp.k.im.to_bits(), n_r, n_phi, self.cfg.tol.to_bits());
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let gi = make_grid(Region::Interior, n_r, n_phi)?;
        let q = PotentialField::disk(&gi, 1.0)?;
        let out = Arc::new(solver::solve_cgo(&q, sp, &SolveConfig { resolution: (n_r, n_phi), ..self.cfg })?);
        self.cache.lock().expect("cache lock").insert(key, out.clone());
        Ok(out)
    }
}

/// What the solver's `φ₂` is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Against {
    /// `σ C̄[(q̄/2) e^{Φ}]`, the first Neumann term.
    TildePhi2,
    /// Zone-dispatched asymptotics.
    AsymDispatch,
    /// Case I formulas everywhere.
    CaseIOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub k: C64,
    pub sup_diff_interior: f64,
    pub sup_diff_exterior: f64,
    /// Keyed by the weight exponent, formatted with `{}`.
    pub weighted_diff: BTreeMap<String, f64>,
    pub per_zone_sup: BTreeMap<String, f64>,
    pub resolution: (usize, usize),
    #[serde(skip)]
    pub diff_interior: GridField,
    #[serde(skip)]
    pub diff_exterior: GridField,
}

impl ComparisonReport {
    pub fn sup_diff(&self) -> f64 {
        self.sup_diff_interior.max(self.sup_diff_exterior)
    }

    pub fn weighted(&self, eps: f64) -> Option<f64> {
        self.weighted_diff.get(&format!("{eps}")).copied()
    }
}

fn build_report(
    sp: &SpectralParam,
    diff_interior: GridField,
    diff_exterior: GridField,
    cfg: &AsymptoticConfig,
) -> Result<ComparisonReport> {
    let mut weighted_diff = BTreeMap::new();
    for eps in REPORTED_EPS {
        weighted_diff.insert(format!("{eps}"), grid::quad_weighted(&diff_interior, &diff_exterior, eps)?.norm);
    }
    let mut per_zone_sup: BTreeMap<String, f64> = BTreeMap::new();
    for f in [&diff_interior, &diff_exterior] {
        let g = &f.grid;
        for i in 0..g.n_r {
            for j in 0..g.n_phi {
                let label = asymptotics::zone_classify(g.point(i, j), sp, cfg);
                let e = per_zone_sup.entry(label.name().to_string()).or_insert(0.0);
                *e = e.max(f.values[[i, j]].norm());
            }
        }
    }
    Ok(ComparisonReport {
        k: sp.k,
        sup_diff_interior: diff_interior.sup_norm(),
        sup_diff_exterior: diff_exterior.sup_norm(),
        weighted_diff,
        per_zone_sup,
        resolution: (diff_interior.grid.n_r, diff_interior.grid.n_phi),
        diff_interior,
        diff_exterior,
    })
}

fn exterior_grid(sol: &CGOSolution) -> &Arc<PolarGrid> {
    sol.exterior_grid()
}

/// `φ₂ − reference` on both grids.
pub fn compare_phi2(
    solver: &DiskSolver,
    sp: &SpectralParam,
    cfg: &AsymptoticConfig,
    against: Against,
) -> Result<ComparisonReport> {
    cfg.validate()?;
    let pair = solver.solve(sp)?;
    let sol = &pair.0;
    let (ri, re) = match against {
        Against::TildePhi2 => {
            let gi = sol.interior_grid();
            let q = PotentialField::disk(gi, 1.0)?;
            let t = dbar::apply_b(&GridField::constant(gi, ONE), &q, sp)?;
            (t.interior_values(), t.exterior_values(exterior_grid(sol)))
        }
        Against::AsymDispatch => (
            GridField::from_fn(sol.interior_grid(), |z| asymptotics::phi2_asym(z, sp, cfg)),
            GridField::from_fn(exterior_grid(sol), |z| asymptotics::phi2_asym(z, sp, cfg)),
        ),
        Against::CaseIOnly => (
            GridField::from_fn(sol.interior_grid(), |z| asymptotics::phi2_case_one(z, sp, cfg)),
            GridField::from_fn(exterior_grid(sol), |z| asymptotics::phi2_case_one(z, sp, cfg)),
        ),
    };
    build_report(sp, sol.phi2_int.zip_map(&ri, |a, b| a - b), sol.phi2_ext.zip_map(&re, |a, b| a - b), cfg)
}

/// `φ₁ − φ̃₁` on both grids.
pub fn compare_phi1(solver: &DiskSolver, sp: &SpectralParam, cfg: &AsymptoticConfig) -> Result<ComparisonReport> {
    let pair = solver.solve(sp)?;
    let sol = &pair.0;
    let di = sol.phi1_int.zip_map(&GridField::from_fn(sol.interior_grid(), |z| asymptotics::phi1_asym(z, sp)), |a, b| a - b);
    let de = sol.phi1_ext.zip_map(&GridField::from_fn(exterior_grid(sol), |z| asymptotics::phi1_asym(z, sp)), |a, b| a - b);
    build_report(sp, di, de, cfg)
}

/// Least-squares line through `(ln k, ln v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
}

pub fn scaling_fit(pairs: &[(f64, f64)]) -> Result<ScalingFit> {
    if pairs.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", pairs.len())));
    }
    if let Some(p) = pairs.iter().find(|(k, v)| !(*k > 0.0 && *v > 0.0 && k.is_finite() && v.is_finite())) {
        return Err(Error::Fit(format!("non-positive or non-finite point {p:?}")));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all k values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let max_residual = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).abs()).fold(0.0, f64::max);
    Ok(ScalingFit { exponent, intercept, max_residual })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReflectionRecord {
    pub k: f64,
    /// From the far-field coefficient of `φ₂`.
    pub r_numeric: Option<C64>,
    /// From the integral of `q̄ e^{Φ} φ₁`.
    pub r_integral: Option<C64>,
    pub r_asym: f64,
    /// `|R_numeric − R_asym|·k^{7/2}`.
    pub scaled_diff: Option<f64>,
    pub error: Option<String>,
}

/// `count` equally spaced `k` in `[k_min, k_max]`; numerical values for
/// `k ≤ k_c`, asymptotic values everywhere.
pub fn reflection_sweep(
    k_min: f64,
    k_max: f64,
    count: usize,
    k_c: f64,
    solver: &DiskSolver,
) -> Result<Vec<ReflectionRecord>> {
    if !(k_min > 0.0 && k_max >= k_min) || count == 0 {
        return Err(Error::Parameter(format!("bad sweep [{k_min}, {k_max}] x {count}")));
    }
    let ks: Vec<f64> = (0..count)
        .map(|i| if count == 1 { k_min } else { k_min + (k_max - k_min) * i as f64 / (count - 1) as f64 })
        .collect();
    ks.par_iter()
        .map(|&k| {
            let sp = SpectralParam::real(k)?;
            let r_asym = asymptotics::reflection_asym(&sp);
            let mut rec = ReflectionRecord { k, r_numeric: None, r_integral: None, r_asym, scaled_diff: None, error: None };
            if k <= k_c {
                match solver.solve(&sp) {
                    Ok(pair) => {
                        let sol = &pair.0;
                        let q = PotentialField::disk(sol.interior_grid(), 1.0)?;
                        let r = solver::reflection_from_expansion(sol);
                        rec.r_numeric = Some(r);
                        rec.r_integral = Some(solver::reflection_from_integral(sol, &q));
                        rec.scaled_diff = Some((r - r_asym).norm() * k.powf(3.5));
                    }
                    Err(e) => rec.error = Some(e.to_string()),
                }
            }
            Ok(rec)
        })
        .collect()
}

/// Weighted `⟨·⟩¹L²` norm of a Cauchy output over the whole plane.
fn plane_norm(out: &dbar::CauchyOutput, ext: &Arc<PolarGrid>) -> Result<f64> {
    Ok(grid::quad_weighted(&out.interior_values(), &out.exterior_values(ext), 1.0)?.norm)
}

/// Weighted norm of a field supported in the disk.
fn disk_norm(f: &GridField) -> Result<f64> {
    let ext = make_grid(Region::Exterior, f.grid.n_r, f.grid.n_phi)?;
    Ok(grid::quad_weighted(f, &GridField::zeros(&ext), 1.0)?.norm)
}

/// Per-k ratio `max_g ‖K² g‖/‖g‖` in `⟨·⟩¹L²` for `K² = AB`.
pub fn k2_norms(
    make_q: &(dyn Fn(&Arc<PolarGrid>) -> Result<PotentialField> + Sync),
    k_list: &[f64],
    test_fields: &(dyn Fn(&Arc<PolarGrid>) -> Vec<GridField> + Sync),
    resolution: Option<(usize, usize)>,
) -> Result<Vec<(f64, f64)>> {
    k_list
        .par_iter()
        .map(|&k| {
            let (n_r, n_phi) = resolution.unwrap_or_else(|| solver::suggest_resolution(k));
            let gi = make_grid(Region::Interior, n_r, n_phi)?;
            let ge = make_grid(Region::Exterior, n_r, n_phi)?;
            let q = make_q(&gi)?;
            let sp = SpectralParam::real(k)?;
            let mut worst: f64 = 0.0;
            for g in test_fields(&gi) {
                let den = disk_norm(&g)?;
                if den == 0.0 {
                    return Err(Error::Fit("test field has zero norm".into()));
                }
                worst = worst.max(plane_norm(&dbar::k2_apply(&g, &q, &sp)?, &ge)? / den);
            }
            Ok((k, worst))
        })
        .collect()
}

/// Fitted exponent of the `K²` norm ratios.
pub fn k2_norm_probe(
    make_q: &(dyn Fn(&Arc<PolarGrid>) -> Result<PotentialField> + Sync),
    k_list: &[f64],
    test_fields: &(dyn Fn(&Arc<PolarGrid>) -> Vec<GridField> + Sync),
    resolution: Option<(usize, usize)>,
) -> Result<ScalingFit> {
    scaling_fit(&k2_norms(make_q, k_list, test_fields, resolution)?)
}

/// Weighted norm of `φ₂ − e^{Φ}/(2k)·1_D`, the remainder after the
/// leading plane wave.
pub fn phi2_remainder_norm(sol: &CGOSolution, eps: f64) -> Result<f64> {
    let sp = sol.sp;
    let lead = GridField::from_fn(sol.interior_grid(), |z| sp.plane_wave(z) / (2.0 * sp.k));
    Ok(grid::quad_weighted(&sol.phi2_int.zip_map(&lead, |a, b| a - b), &sol.phi2_ext, eps)?.norm)
}

/// Solver value for `|k| ≤ k_c`, asymptotic value above.
pub fn hybrid_phi2(z: C64, sp: &SpectralParam, k_c: f64, cfg: &AsymptoticConfig, solver: &DiskSolver) -> Result<C64> {
    if sp.k.norm() <= k_c {
        let pair = solver.solve(sp)?;
        let (_, phi2) = solver::evaluate_solution(&pair.0, &[z])?;
        Ok(phi2[0])
    } else {
        Ok(asymptotics::phi2_asym(z, sp, cfg))
    }
}

/// Largest mismatch between the formulas on either side of one boundary.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryMismatch {
    pub boundary: String,
    pub samples: usize,
    pub sup: f64,
}

/// Samples every zone boundary and evaluates the formulas of both adjacent
/// zones there. Returns one entry per boundary that has samples.
pub fn zone_boundary_mismatch(sp: &SpectralParam, cfg: &AsymptoticConfig, samples: usize) -> Result<Vec<BoundaryMismatch>> {
    cfg.validate()?;
    let kk = sp.k.norm();
    let rot = sp.k / kk;
    let tiny = 1e-9;
    let mut out: Vec<BoundaryMismatch> = Vec::new();
    let mut push = |name: &str, diffs: Vec<f64>| {
        if !diffs.is_empty() {
            out.push(BoundaryMismatch {
                boundary: name.to_string(),
                samples: diffs.len(),
                sup: diffs.into_iter().fold(0.0, f64::max),
            });
        }
    };
    // Values on the two sides of a boundary point `z` displaced by ±n·tiny.
    let pair_at = |z: C64, normal: C64| -> (ZoneLabel, C64, ZoneLabel, C64) {
        let a = z - normal * tiny;
        let b = z + normal * tiny;
        let za = a * rot.conj();
        let zb = b * rot.conj();
        (
            asymptotics::zone_classify(za, sp, cfg),
            asymptotics::phi2_asym(za, sp, cfg),
            asymptotics::zone_classify(zb, sp, cfg),
            asymptotics::phi2_asym(zb, sp, cfg),
        )
    };
    let angles = |n: usize| (0..n).map(move |j| 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64);

    // Case II discs, centred at z = ∓i in the rotated frame.
    let radius = cfg.c / kk.sqrt();
    for (name, centre) in [("II_south_circle", C64::new(0.0, 1.0)), ("II_north_circle", C64::new(0.0, -1.0))] {
        let mut d = Vec::new();
        for t in angles(samples) {
            let n = C64::from_polar(1.0, t);
            let (la, va, lb, vb) = pair_at(centre + n * radius, n);
            if la != lb {
                d.push((va - vb).norm());
            }
        }
        push(name, d);
    }
    // r = r_k and s = r_k circles.
    let rk = cfg.r_k(kk);
    for (name, rad) in [("interior_rk_circle", rk), ("exterior_rk_circle", 1.0 / rk), ("rim", 1.0)] {
        let mut d = Vec::new();
        for t in angles(samples) {
            let n = C64::from_polar(1.0, t);
            let (la, va, lb, vb) = pair_at(n * rad, n);
            if la != lb || name == "rim" {
                d.push((va - vb).norm());
            }
        }
        push(name, d);
    }
    // Sector rays at φ = π/2 ± δ and 3π/2 ± δ inside the rim bands.
    let delta = cfg.delta(kk);
    let mut d = Vec::new();
    for phi in [0.5, 1.5].iter().flat_map(|c| [c * std::f64::consts::PI - delta, c * std::f64::consts::PI + delta]) {
        let n = C64::from_polar(1.0, phi) * C64::new(0.0, 1.0);
        for j in 0..samples {
            let frac = (j as f64 + 0.5) / samples as f64;
            for rad in [rk + (1.0 - rk) * frac, 1.0 / (rk + (1.0 - rk) * frac)] {
                let (la, va, lb, vb) = pair_at(C64::from_polar(rad, phi), n);
                if la != lb {
                    d.push((va - vb).norm());
                }
            }
        }
    }
    push("sector_rays", d);
    // Branch lines inside the Case II discs: Im z̃ = 0.
    let mut d = Vec::new();
    let a = 1.0 / (2.0 * kk).sqrt();
    for j in 0..samples {
        let x = -cfg.c * std::f64::consts::SQRT_2 + 2.0 * cfg.c * std::f64::consts::SQRT_2 * (j as f64 + 0.5) / samples as f64;
        let south = (C64::new(0.0, -1.0) + C64::from_polar(a * x, -std::f64::consts::FRAC_PI_4)).conj();
        let north = (C64::new(0.0, 1.0) - C64::from_polar(a * x, std::f64::consts::FRAC_PI_4)).conj();
        for (z, dir) in [(south, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)), (north, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4))] {
            let (la, va, lb, vb) = pair_at(z, dir);
            if la != lb && la.is_case_two() && lb.is_case_two() {
                d.push((va - vb).norm());
            }
        }
    }
    push("II_branch_lines", d);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_fit_exact_power_laws() {
        let ks: [f64; 4] = [25.0, 50.0, 100.0, 200.0];
        let f = scaling_fit(&ks.map(|k| (k, k.powi(-2)))).unwrap();
        assert!((f.exponent + 2.0).abs() < 1e-12 && f.max_residual < 1e-12);
        let f = scaling_fit(&ks.map(|k| (k, 3.0 / k.sqrt()))).unwrap();
        assert!((f.exponent + 0.5).abs() < 1e-12);
        assert!((f.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(matches!(scaling_fit(&[(1.0, 1.0), (2.0, 2.0)]), Err(Error::Fit(_))));
        assert!(matches!(scaling_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(Error::Fit(_))));
    }

    #[test]
    fn zero_potential_probe_is_rejected() {
        let mk = |g: &Arc<PolarGrid>| Ok(PotentialField::zero(g));
        let fields = |g: &Arc<PolarGrid>| vec![GridField::constant(g, ONE)];
        let r = k2_norm_probe(&mk, &[10.0, 20.0, 40.0], &fields, Some((16, 32)));
        assert!(matches!(r, Err(Error::Fit(_))));
    }

    #[test]
    fn solver_cache_reuses_solutions() {
        let s = DiskSolver::new(SolveConfig::default(), Some((32, 64)));
        let sp = SpectralParam::real(5.0).unwrap();
        let a = s.solve(&sp).unwrap();
        let b = s.solve(&sp).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
