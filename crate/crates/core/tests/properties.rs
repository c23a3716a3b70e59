use proptest::prelude::*;

use cgo_core::asymptotics::{self, AsymptoticConfig};
use cgo_core::dbar::{self, Kernel, SpectralParam};
use cgo_core::grid::{self, make_grid, GridField, Region};
use cgo_core::harness;
use cgo_core::Complex64 as C64;

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6)
}

// A smooth field built from a handful of random monomials z^a z̄^b.
fn field(g: &std::sync::Arc<grid::PolarGrid>, c: &[(f64, f64)]) -> GridField {
    let c: Vec<C64> = c.iter().map(|&(a, b)| C64::new(a, b)).collect();
    GridField::from_fn(g, |z| {
        let w = z.conj();
        c[0] + c[1] * z + c[2] * w + c[3] * z * w + c[4] * w * w * w + c[5] * (z * 0.8).exp()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transform_roundtrip(c in coeffs()) {
        let g = make_grid(Region::Interior, 24, 32).unwrap();
        let f = field(&g, &c);
        let back = grid::from_coeffs(&grid::to_coeffs(&f));
        prop_assert!(back.sup_diff(&f) < 1e-12);
    }

    #[test]
    fn conjugate_kernel_relation(c in coeffs()) {
        let g = make_grid(Region::Interior, 24, 64).unwrap();
        let f = field(&g, &c);
        let a = dbar::cauchy(&f, Kernel::DbarConj).unwrap().interior_values();
        let b = dbar::cauchy(&f.map(|v| v.conj()), Kernel::Dbar).unwrap().interior_values().map(|v| v.conj());
        prop_assert!(a.sup_diff(&b) < 1e-12);
    }

    #[test]
    fn cauchy_is_linear(c in coeffs(), d in coeffs(), s in -3.0..3.0f64) {
        let g = make_grid(Region::Interior, 24, 64).unwrap();
        let (f, h) = (field(&g, &c), field(&g, &d));
        let lhs = dbar::cauchy(&f.zip_map(&h, |x, y| x + y * s), Kernel::Dbar).unwrap().interior_values();
        let cf = dbar::cauchy(&f, Kernel::Dbar).unwrap().interior_values();
        let ch = dbar::cauchy(&h, Kernel::Dbar).unwrap().interior_values();
        prop_assert!(lhs.sup_diff(&cf.zip_map(&ch, |x, y| x + y * s)) < 1e-12);
    }

    #[test]
    fn phase_is_unitary_and_invertible(re in -50.0..50.0f64, im in -50.0..50.0f64, c in coeffs()) {
        prop_assume!(re.hypot(im) > 1e-3);
        let sp = SpectralParam::new(C64::new(re, im)).unwrap();
        let g = make_grid(Region::Interior, 16, 32).unwrap();
        let f = field(&g, &c);
        let m = dbar::phase_multiplier(1, &sp, &f);
        for (a, b) in m.values.iter().zip(f.values.iter()) {
            prop_assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
        prop_assert!(dbar::phase_multiplier(-1, &sp, &m).sup_diff(&f) < 1e-12);
    }

    #[test]
    fn zone_labels_rotate_with_k(k in 10.0..400.0f64, theta in 0.0..std::f64::consts::TAU, x in -1.6..1.6f64, y in -1.6..1.6f64) {
        let cfg = AsymptoticConfig::default();
        let rot = C64::from_polar(1.0, theta);
        let z = C64::new(x, y);
        let a = asymptotics::zone_classify(z, &SpectralParam::real(k).unwrap(), &cfg);
        let b = asymptotics::zone_classify(z / rot, &SpectralParam::new(rot * k).unwrap(), &cfg);
        // Points on a boundary may tip either way after rounding.
        let on_edge = {
            let r = z.norm();
            (r - 1.0).abs() < 1e-9 || (r - cfg.r_k(k)).abs() < 1e-9 || (1.0 / r - cfg.r_k(k)).abs() < 1e-9
        };
        prop_assert!(a == b || on_edge, "{a:?} vs {b:?}");
    }

    #[test]
    fn phi2_asym_rotates_with_k(k in 10.0..400.0f64, theta in 0.0..std::f64::consts::TAU, x in -1.6..1.6f64, y in -1.6..1.6f64) {
        let cfg = AsymptoticConfig::default();
        let rot = C64::from_polar(1.0, theta);
        let z = C64::new(x, y);
        let a = asymptotics::phi2_asym(z, &SpectralParam::real(k).unwrap(), &cfg);
        let b = asymptotics::phi2_asym(z / rot, &SpectralParam::new(rot * k).unwrap(), &cfg) * rot;
        prop_assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()));
    }

    #[test]
    fn weighted_norm_monotone_in_eps(c in coeffs(), e1 in 0.05..1.0f64, e2 in 0.05..1.0f64) {
        let gi = make_grid(Region::Interior, 16, 32).unwrap();
        let ge = make_grid(Region::Exterior, 16, 32).unwrap();
        let f = field(&gi, &c);
        let h = GridField::from_fn(&ge, |z| 1.0 / z.conj());
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let a = grid::quad_weighted(&f, &h, lo).unwrap().norm;
        let b = grid::quad_weighted(&f, &h, hi).unwrap().norm;
        prop_assert!(a >= b * (1.0 - 1e-12));
    }

    #[test]
    fn scaling_fit_recovers_power_law(p in -3.0..3.0f64, a in 0.01..100.0f64) {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0].iter().map(|&k: &f64| (k, a * k.powf(p))).collect();
        let fit = harness::scaling_fit(&pts).unwrap();
        prop_assert!((fit.exponent - p).abs() < 1e-10);
        prop_assert!(fit.max_residual < 1e-10);
    }
}
