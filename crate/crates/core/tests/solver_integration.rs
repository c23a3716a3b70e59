use std::f64::consts::PI;

use cgo_core::asymptotics;
use cgo_core::dbar::{PotentialField, SpectralParam};
use cgo_core::grid::{self, make_grid, GridField, Region};
use cgo_core::harness::DiskSolver;
use cgo_core::solver::{self, Fallback, SolveConfig};
use cgo_core::Complex64 as C64;

fn bessel_j1(x: f64) -> f64 {
    // J₁(x) = (1/π)∫₀^π cos(τ − x sin τ) dτ by composite Simpson.
    let n = 4000;
    let h = PI / n as f64;
    let f = |t: f64| (t - x * t.sin()).cos();
    let mut s = f(0.0) + f(PI);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0 / PI
}

fn disk_solve(k: C64, res: (usize, usize)) -> (solver::CGOSolution, solver::SolveReport, PotentialField) {
    let gi = make_grid(Region::Interior, res.0, res.1).unwrap();
    let q = PotentialField::disk(&gi, 1.0).unwrap();
    let sp = SpectralParam::new(k).unwrap();
    let (sol, rep) = solver::solve_cgo(&q, &sp, &SolveConfig { resolution: res, ..Default::default() }).unwrap();
    (sol, rep, q)
}

#[test]
fn zero_potential_is_trivial() {
    let gi = make_grid(Region::Interior, 16, 32).unwrap();
    let q = PotentialField::zero(&gi);
    let sp = SpectralParam::real(10.0).unwrap();
    let (sol, rep) = solver::solve_cgo(&q, &sp, &SolveConfig::default()).unwrap();
    assert!(rep.converged && rep.iterations == 1 && !rep.fallback_used);
    assert!(sol.phi1_int.sup_diff(&GridField::constant(&gi, C64::new(1.0, 0.0))) == 0.0);
    assert_eq!(sol.phi2_int.sup_norm(), 0.0);
    assert_eq!(solver::reflection_from_expansion(&sol), C64::new(0.0, 0.0));
}

#[test]
fn moderate_k_converges_with_small_residual() {
    let (_, rep, _) = disk_solve(C64::new(10.0, 0.0), (64, 128));
    assert!(rep.converged && !rep.fallback_used);
    assert!(rep.residual_sup < 1e-9, "{}", rep.residual_sup);
    assert!(rep.rim_mismatch < 1e-12);
    assert!(rep.iterations < 30);
    assert!(!rep.resolution_warning);
}

#[test]
fn invalid_configuration_rejected() {
    let gi = make_grid(Region::Interior, 16, 32).unwrap();
    let q = PotentialField::disk(&gi, 1.0).unwrap();
    let sp = SpectralParam::real(10.0).unwrap();
    for cfg in [
        SolveConfig { tol: 0.0, ..Default::default() },
        SolveConfig { max_iter: 0, ..Default::default() },
        SolveConfig { relaxation: 1.5, ..Default::default() },
    ] {
        assert!(solver::solve_cgo(&q, &sp, &cfg).is_err());
    }
}

#[test]
fn reflection_is_real_and_route_independent() {
    for k in [12.0, 31.5] {
        let (sol, _, q) = disk_solve(C64::new(k, 0.0), solver::suggest_resolution(k));
        let r = solver::reflection_from_expansion(&sol);
        let r2 = solver::reflection_from_integral(&sol, &q);
        assert!(r.im.abs() < 1e-13 * r.norm().max(1.0));
        assert!((r - r2).norm() < 1e-12);
        let ra = asymptotics::reflection_asym(&sol.sp);
        assert!((r.re - ra).abs() * k.powf(3.5) < 3.0, "k={k}");
    }
}

#[test]
fn integral_route_against_bessel_oracle() {
    // With φ₁ = 1 the integral is (1/π)∫_D e^{2iky} dA = 2J₁(2k)/(2k).
    let k = 7.0;
    let (mut sol, _, q) = disk_solve(C64::new(k, 0.0), (48, 96));
    sol.phi1_int = GridField::constant(sol.interior_grid(), C64::new(1.0, 0.0));
    let r = solver::reflection_from_integral(&sol, &q);
    let want = 2.0 * bessel_j1(2.0 * k) / (2.0 * k);
    assert!((r - want).norm() < 1e-10, "{r} vs {want}");
}

#[test]
fn far_field_matches_leading_laurent_term() {
    let k = 15.0;
    let (sol, _, _) = disk_solve(C64::new(k, 0.0), solver::suggest_resolution(k));
    let r = solver::reflection_from_expansion(&sol);
    let mut prev = f64::INFINITY;
    for s in [3.0, 30.0, 300.0] {
        let z = C64::from_polar(s, 0.7);
        let (_, p2) = solver::evaluate_solution(&sol, &[z]).unwrap();
        let lead = r.conj() / (2.0 * z.conj());
        let rel = (p2[0] - lead).norm() * s * s;
        assert!(rel < prev * 1.01 || rel < 1e-8);
        prev = rel;
    }
}

#[test]
fn increments_decline_for_large_k() {
    for k in [50.0, 100.0] {
        let (_, rep, _) = disk_solve(C64::new(k, 0.0), solver::suggest_resolution(k));
        assert!(rep.converged);
        for w in rep.increments[1..].windows(2) {
            assert!(w[1] < w[0], "k={k}: {:?}", rep.increments);
        }
    }
}

#[test]
fn rotation_of_k_leaves_reflection_unchanged() {
    let k = 20.0;
    let res = solver::suggest_resolution(k);
    let (a, _, _) = disk_solve(C64::new(k, 0.0), res);
    let (b, _, _) = disk_solve(C64::from_polar(k, 1.1), res);
    let ra = solver::reflection_from_expansion(&a);
    let rb = solver::reflection_from_expansion(&b);
    assert!((ra - rb).norm() < 1e-11);
}

#[test]
fn real_k_reflection_symmetry() {
    // φ₂(z̄) = conj φ₂(z) for real k and real q.
    let (sol, _, _) = disk_solve(C64::new(18.0, 0.0), solver::suggest_resolution(18.0));
    let n = sol.interior_grid().n_phi;
    for field in [&sol.phi2_int, &sol.phi2_ext, &sol.phi1_int] {
        for i in 0..sol.interior_grid().n_r {
            for j in 0..n {
                let mirror = field.values[[i, (n - j) % n]];
                assert!((field.values[[i, j]] - mirror.conj()).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn field_sizes_follow_inverse_k() {
    let solver = DiskSolver::default();
    for k in [25.0, 50.0, 100.0] {
        let sp = SpectralParam::real(k).unwrap();
        let pair = solver.solve(&sp).unwrap();
        let sol = &pair.0;
        let dev = sol.phi1_int.map(|v| v - 1.0).sup_norm().max(sol.phi1_ext.map(|v| v - 1.0).sup_norm());
        assert!(dev * k < 1.0, "k={k}: {dev}");
        // Bulk zone of the disk, away from the rim band and the stationary points.
        let cfg = asymptotics::AsymptoticConfig::default();
        let g = sol.interior_grid();
        let mut bulk: f64 = 0.0;
        for i in 0..g.n_r {
            for j in 0..g.n_phi {
                if asymptotics::zone_classify(g.point(i, j), &sp, &cfg) == asymptotics::ZoneLabel::I1 {
                    bulk = bulk.max(sol.phi2_int.values[[i, j]].norm());
                }
            }
        }
        assert!((0.8..=1.2).contains(&(bulk * 2.0 * k)), "k={k}: {}", bulk * 2.0 * k);
    }
}

#[test]
fn gmres_fallback_reproduces_picard() {
    let gi = make_grid(Region::Interior, 32, 64).unwrap();
    let q = PotentialField::disk(&gi, 1.0).unwrap();
    let sp = SpectralParam::real(8.0).unwrap();
    let (a, _) = solver::solve_cgo(&q, &sp, &SolveConfig::default()).unwrap();
    let forced = SolveConfig { max_iter: 1, fallback: Fallback::Gmres, ..Default::default() };
    let (b, rep) = solver::solve_cgo(&q, &sp, &forced).unwrap();
    assert!(rep.fallback_used);
    assert!(a.phi1_int.sup_diff(&b.phi1_int) < 1e-10);
    assert!(a.phi2_int.sup_diff(&b.phi2_int) < 1e-10);
    let none = SolveConfig { max_iter: 1, fallback: Fallback::None, ..Default::default() };
    assert!(matches!(solver::solve_cgo(&q, &sp, &none), Err(cgo_core::Error::NonConvergence { .. })));
}

#[test]
fn weighted_remainder_shrinks() {
    let solver = DiskSolver::default();
    let norms: Vec<f64> = [25.0, 100.0]
        .iter()
        .map(|&k| {
            let pair = solver.solve(&SpectralParam::real(k).unwrap()).unwrap();
            remainder_norm(&pair.0)
        })
        .collect();
    assert!(norms[1] < norms[0]);
}

fn remainder_norm(sol: &solver::CGOSolution) -> f64 {
    cgo_core::harness::phi2_remainder_norm(sol, 1.0).unwrap()
}

#[test]
fn exterior_values_consistent_with_grid_quadrature() {
    // b₁ = (1/2π)∫ q̄ e^{Φ} φ₁ dA for σ = 1, matching the first Laurent coefficient.
    let (sol, _, q) = disk_solve(C64::new(9.0, 0.0), (48, 96));
    let integrand = cgo_core::dbar::phase_multiplier(1, &sol.sp, &sol.phi1_int.zip_map(&q.values, |a, b| a * b.conj()));
    let b1 = grid::integrate(&integrand) / (2.0 * PI);
    assert!((b1 - sol.phi2_laurent()[0]).norm() < 1e-13);
}
