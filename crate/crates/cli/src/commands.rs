use std::collections::BTreeMap;
use std::sync::Arc;

use cgo_core::asymptotics::{self, AsymptoticConfig, Branch, GQuad};
use cgo_core::dbar::{PotentialField, SpectralParam};
use cgo_core::grid::{make_grid, GridField, PolarGrid, Region};
use cgo_core::harness::{self, Against, DiskSolver, ScalingFit};
use cgo_core::solver::{self, Fallback, SolveConfig};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{c, complex_cols, f, grid_csv, opt_c, Sink};
use crate::CliError;

type C64 = Complex64;

fn resolution(grid: &GridArgs) -> Result<Option<(usize, usize)>, CliError> {
    match (grid.nr, grid.nphi) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(CliError::Usage("--nr and --nphi must be given together".into())),
    }
}

/// Grids shared by `solve` and `asym`, so their outputs overlay.
fn grids(k_abs: f64, grid: &GridArgs) -> Result<(Arc<PolarGrid>, Arc<PolarGrid>), CliError> {
    let (n_r, n_phi) = resolution(grid)?.unwrap_or_else(|| solver::suggest_resolution(k_abs));
    Ok((make_grid(Region::Interior, n_r, n_phi)?, make_grid(Region::Exterior, n_r, n_phi)?))
}

fn solve_config(a: &SolverArgs) -> SolveConfig {
    let fallback = match a.fallback {
        FallbackArg::Gmres => Fallback::Gmres,
        FallbackArg::None => Fallback::None,
    };
    SolveConfig { tol: a.tol, max_iter: a.max_iter, relaxation: a.relaxation, fallback, ..Default::default() }
}

fn g_quad(g: &GQuadArgs) -> GQuad {
    GQuad { l: g.g_l, n: g.g_n, offset: g.g_offset }
}

fn asym_config(c: f64, delta_scale: f64, rk_scale: f64, g: &GQuadArgs) -> Result<AsymptoticConfig, CliError> {
    let cfg = AsymptoticConfig { c, delta_scale, rk_scale, g_quad: g_quad(g) };
    cfg.validate()?;
    Ok(cfg)
}

fn fit_json(fit: Option<ScalingFit>) -> Value {
    fit.map(|s| json!({ "exponent": s.exponent, "intercept": s.intercept, "max_residual": s.max_residual }))
        .unwrap_or(Value::Null)
}

pub fn solve(a: &SolveArgs) -> Result<(), CliError> {
    let sp = SpectralParam::new(C64::new(a.k, a.k_im))?;
    let (gi, _) = grids(sp.k.norm(), &a.grid)?;
    let q = match a.q {
        PotentialArg::Disk => PotentialField::disk(&gi, a.sigma)?,
        PotentialArg::Zero => PotentialField::new(GridField::zeros(&gi), a.sigma, 1.0)?,
    };
    let cfg = SolveConfig { resolution: (gi.n_r, gi.n_phi), ..solve_config(&a.solver) };
    let (sol, report) = solver::solve_cgo(&q, &sp, &cfg)?;
    let r_exp = solver::reflection_from_expansion(&sol);
    let r_int = solver::reflection_from_integral(&sol, &q);

    let mut sink = Sink::new(&a.common.out, "solve", a)?;
    grid_csv(&mut sink, "phi_interior.csv", &[("phi1", &sol.phi1_int), ("phi2", &sol.phi2_int)], None)?;
    grid_csv(&mut sink, "phi_exterior.csv", &[("phi1", &sol.phi1_ext), ("phi2", &sol.phi2_ext)], None)?;
    let mut header = vec!["n".to_string()];
    header.extend(complex_cols(&["a", "b"]));
    let mut lau = sink.csv("laurent.csv", &header)?;
    for (n, (x, y)) in sol.phi1_laurent().iter().zip(sol.phi2_laurent()).enumerate() {
        let mut row = vec![(n + 1).to_string()];
        row.extend(c(*x));
        row.extend(c(*y));
        lau.row(&row)?;
    }
    lau.close()?;
    let body = json!({
        "k": sp.k,
        "report": report,
        "reflection_expansion": r_exp,
        "reflection_integral": r_int,
    });
    sink.json("report.json", &body)?;
    println!(
        "k = {}: {} after {} iterations, residual {:.2e}, tail {:.2e}, R = {:.6e}",
        sp.k,
        if report.converged { "converged" } else { "not converged" },
        report.iterations,
        report.residual_sup,
        report.coeff_tail,
        r_exp.re
    );
    let checks = json!({ "converged": report.converged, "resolution_warning": report.resolution_warning });
    sink.finish(body, checks)
}

pub fn asym(a: &AsymArgs) -> Result<(), CliError> {
    let sp = SpectralParam::new(C64::new(a.k, a.k_im))?;
    let cfg = asym_config(a.asym.c, a.asym.delta_scale, a.asym.rk_scale, &a.asym.g)?;
    let (gi, ge) = grids(sp.k.norm(), &a.grid)?;
    let mut sink = Sink::new(&a.common.out, "asym", a)?;
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    for (g, name) in [(&gi, "asym_interior.csv"), (&ge, "asym_exterior.csv")] {
        let p1 = GridField::from_fn(g, |z| asymptotics::phi1_asym(z, &sp));
        let p2 = GridField::from_fn(g, |z| asymptotics::phi2_asym(z, &sp, &cfg));
        let zone = |i: usize, j: usize| asymptotics::zone_classify(g.point(i, j), &sp, &cfg).name().to_string();
        for i in 0..g.n_r {
            for j in 0..g.n_phi {
                *counts.entry(asymptotics::zone_classify(g.point(i, j), &sp, &cfg).name()).or_default() += 1;
            }
        }
        grid_csv(&mut sink, name, &[("phi1", &p1), ("phi2", &p2)], Some(("zone", &zone)))?;
    }
    let mismatch = harness::zone_boundary_mismatch(&sp, &cfg, a.boundary_samples)?;
    let scale = sp.k.norm().powf(1.5);
    let worst = mismatch.iter().map(|m| m.sup).fold(0.0, f64::max);
    sink.json("boundaries.json", &mismatch)?;
    println!("k = {}: zone counts {counts:?}; largest boundary mismatch {worst:.3e} (x k^1.5 = {:.3})", sp.k, worst * scale);
    let summary = json!({ "zone_counts": counts, "boundary_mismatch_sup": worst, "boundary_mismatch_scaled": worst * scale });
    sink.finish(summary, Value::Null)
}

pub fn gfun(a: &GfunArgs) -> Result<(), CliError> {
    if a.nx < 2 || a.ny < 2 || !(a.xmax > a.xmin && a.ymax > a.ymin) {
        return Err(CliError::Usage("gfun needs nx, ny >= 2 and a non-empty rectangle".into()));
    }
    let q = g_quad(&a.g);
    AsymptoticConfig { g_quad: q, ..Default::default() }.validate()?;
    let mut sink = Sink::new(&a.common.out, "gfun", a)?;
    let mut header = vec!["x".to_string(), "y".to_string()];
    header.extend(complex_cols(&["gr", "gl"]));
    header.extend(["abs_gr", "abs_gl", "identity_abs"].map(String::from));
    if a.refine {
        header.extend(["refine_gr", "refine_gl"].map(String::from));
    }
    let mut out = sink.csv("gfun.csv", &header)?;
    let (mut id_max, mut ref_max) = (0.0_f64, 0.0_f64);
    for i in 0..a.nx {
        let x = a.xmin + (a.xmax - a.xmin) * i as f64 / (a.nx - 1) as f64;
        for j in 0..a.ny {
            let y = a.ymin + (a.ymax - a.ymin) * j as f64 / (a.ny - 1) as f64;
            let z = C64::new(x, y);
            let gr = asymptotics::g_profile(z, Branch::R, &q);
            let gl = asymptotics::g_profile(z, Branch::L, &q);
            let id = (gr - gl + 2.0 * std::f64::consts::PI * C64::i() * (-z * z * 0.5).exp()).norm();
            id_max = id_max.max(id);
            let mut row = vec![f(x), f(y)];
            row.extend(c(gr));
            row.extend(c(gl));
            row.extend([f(gr.norm()), f(gl.norm()), f(id)]);
            if a.refine {
                let (rr, rl) = (asymptotics::g_profile_refinement(z, Branch::R, &q), asymptotics::g_profile_refinement(z, Branch::L, &q));
                ref_max = ref_max.max(rr).max(rl);
                row.extend([f(rr), f(rl)]);
            }
            out.row(&row)?;
        }
    }
    out.close()?;
    println!("max |G_r - G_l + 2 pi i exp(-z^2/2)| = {id_max:.3e}");
    if a.refine {
        println!("max change under node doubling = {ref_max:.3e}");
    }
    let summary = json!({ "identity_max": id_max, "refinement_max": if a.refine { json!(ref_max) } else { Value::Null } });
    sink.finish(summary, json!({ "identity_below_1e-9": id_max < 1e-9 }))
}

pub fn compare(a: &CompareArgs) -> Result<(), CliError> {
    if a.k.is_empty() || a.c.is_empty() {
        return Err(CliError::Usage("compare needs at least one k and one C".into()));
    }
    let against = match a.against {
        AgainstArg::Asym => Against::AsymDispatch,
        AgainstArg::Case1 => Against::CaseIOnly,
        AgainstArg::Tilde => Against::TildePhi2,
    };
    let cfgs = a
        .c
        .iter()
        .map(|&c| asym_config(c, a.delta_scale, a.rk_scale, &a.g))
        .collect::<Result<Vec<_>, _>>()?;
    let sps = a.k.iter().map(|&k| SpectralParam::real(k)).collect::<Result<Vec<_>, _>>()?;
    let solver = DiskSolver::new(solve_config(&a.solver), resolution(&a.grid)?);
    let mut sink = Sink::new(&a.common.out, "compare", a)?;
    let mut runs = Vec::new();
    for (cv, cfg) in a.c.iter().zip(&cfgs) {
        let mut rows = Vec::new();
        let (mut s1, mut s2, mut w2) = (Vec::new(), Vec::new(), Vec::new());
        for sp in &sps {
            let k = sp.k.re;
            let r2 = harness::compare_phi2(&solver, sp, cfg, against)?;
            let r1 = harness::compare_phi1(&solver, sp, cfg)?;
            for (region, d1, d2) in [("interior", &r1.diff_interior, &r2.diff_interior), ("exterior", &r1.diff_exterior, &r2.diff_exterior)] {
                grid_csv(&mut sink, &format!("diff_C{cv}_k{k}_{region}.csv"), &[("dphi1", d1), ("dphi2", d2)], None)?;
            }
            println!(
                "C = {cv}, k = {k}: sup|phi1 - asym| = {:.3e}, sup|phi2 - ref| = {:.3e}, weighted(1) = {:.3e}",
                r1.sup_diff(),
                r2.sup_diff(),
                r2.weighted(1.0).unwrap_or(f64::NAN)
            );
            s1.push((k, r1.sup_diff()));
            s2.push((k, r2.sup_diff()));
            w2.push((k, r2.weighted(1.0).unwrap_or(f64::NAN)));
            rows.push(json!({ "k": k, "phi1": r1, "phi2": r2 }));
        }
        let fit = |p: &[(f64, f64)]| if p.len() >= 3 { harness::scaling_fit(p).ok() } else { None };
        let fits = json!({
            "phi1_sup": fit_json(fit(&s1)),
            "phi2_sup": fit_json(fit(&s2)),
            "phi2_weighted_1": fit_json(fit(&w2)),
        });
        runs.push(json!({ "C": cv, "against": format!("{against:?}"), "reports": rows, "fits": fits }));
    }
    let body = json!({ "runs": runs });
    sink.json("scaling.json", &body)?;
    sink.finish(body, Value::Null)
}

pub fn reflect(a: &ReflectArgs) -> Result<(), CliError> {
    let solver = DiskSolver::new(solve_config(&a.solver), resolution(&a.grid)?);
    let recs = harness::reflection_sweep(a.kmin, a.kmax, a.count, a.kc, &solver)?;
    let mut sink = Sink::new(&a.common.out, "reflect", a)?;
    let mut header = vec!["k".to_string()];
    header.extend(complex_cols(&["r_numeric", "r_integral"]));
    header.extend(["r_asym", "r_k32", "r_asym_k32", "diff_k72", "error"].map(String::from));
    let mut out = sink.csv("reflect.csv", &header)?;
    for r in &recs {
        let k32 = r.k.powf(1.5);
        let mut row = vec![f(r.k)];
        row.extend(opt_c(r.r_numeric));
        row.extend(opt_c(r.r_integral));
        row.push(f(r.r_asym));
        row.push(r.r_numeric.map(|v| f(v.re * k32)).unwrap_or_default());
        row.push(f(r.r_asym * k32));
        row.push(r.scaled_diff.map(f).unwrap_or_default());
        row.push(r.error.clone().unwrap_or_default());
        out.row(&row)?;
    }
    out.close()?;

    let numeric: Vec<_> = recs.iter().filter(|r| r.r_numeric.is_some()).collect();
    let failed = recs.iter().filter(|r| r.error.is_some()).count();
    let mut summary = json!({ "samples": recs.len(), "numeric_samples": numeric.len(), "failed": failed });
    if !numeric.is_empty() {
        let imag = numeric.iter().map(|r| r.r_numeric.unwrap().im.abs()).fold(0.0, f64::max);
        let routes = numeric.iter().map(|r| (r.r_numeric.unwrap() - r.r_integral.unwrap()).norm()).fold(0.0, f64::max);
        let mut scaled: Vec<f64> = numeric.iter().filter_map(|r| r.scaled_diff).collect();
        scaled.sort_by(f64::total_cmp);
        let median = scaled[scaled.len() / 2];
        let ratio = scaled[scaled.len() - 1] / median;
        println!("{} numeric samples: max |Im R| = {imag:.2e}, route gap = {routes:.2e}, max/median diff*k^3.5 = {ratio:.3}", numeric.len());
        summary["max_imag"] = json!(imag);
        summary["route_gap"] = json!(routes);
        summary["scaled_diff_max_over_median"] = json!(ratio);
    } else {
        println!("{} asymptotic samples", recs.len());
    }
    sink.finish(summary, json!({ "all_solved": failed == 0 }))?;
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} solves failed", recs.len())));
    }
    Ok(())
}

pub fn probe_k2(a: &ProbeArgs) -> Result<(), CliError> {
    if a.k.iter().any(|k| k.is_nan() || *k <= 0.0) {
        return Err(CliError::Usage("probe-k2 needs positive k".into()));
    }
    let kind = a.q;
    let make_q = move |g: &Arc<PolarGrid>| match kind {
        PotentialArg::Disk => PotentialField::disk(g, 1.0),
        PotentialArg::Zero => Ok(PotentialField::zero(g)),
    };
    let fields = |g: &Arc<PolarGrid>| vec![GridField::constant(g, C64::new(1.0, 0.0))];
    let norms = harness::k2_norms(&make_q, &a.k, &fields, resolution(&a.grid)?)?;
    let mut sink = Sink::new(&a.common.out, "probe-k2", a)?;
    let mut out = sink.csv("k2.csv", &["k".to_string(), "norm_ratio".to_string()])?;
    for (k, v) in &norms {
        out.row(&[f(*k), f(*v)])?;
    }
    out.close()?;
    let fit = harness::scaling_fit(&norms)?;
    let pass = fit.exponent >= a.window_lo && fit.exponent <= a.window_hi;
    println!(
        "K2 slope {:.4} (window [{}, {}]): {}",
        fit.exponent,
        a.window_lo,
        a.window_hi,
        if pass { "PASS" } else { "FAIL" }
    );
    let body = json!({ "fit": fit_json(Some(fit)), "window": [a.window_lo, a.window_hi], "pass": pass, "norms": norms });
    sink.json("slope.json", &body)?;
    sink.finish(body, json!({ "window": pass }))
}

