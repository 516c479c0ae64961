use czq::surfaces::{
    complex_distance, cross, dot, first_fundamental_form, gaussian_bump, jacobian,
    rough_halfspace, slanted_cylinder, Mollifier, SurfaceChart,
};
use czq::C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn charts() -> Vec<Box<dyn SurfaceChart>> {
    vec![
        Box::new(gaussian_bump()),
        Box::new(slanted_cylinder()),
        Box::new(rough_halfspace()),
    ]
}

fn sub(a: [C64; 3], b: [C64; 3], s: f64) -> [C64; 3] {
    [(a[0] - b[0]) / s, (a[1] - b[1]) / s, (a[2] - b[2]) / s]
}

fn close(a: [C64; 3], b: [C64; 3], tol: f64) -> bool {
    (0..3).all(|i| (a[i] - b[i]).norm() <= tol * (1.0 + b[i].norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn analytic_derivatives_match_central_differences(v1 in -25.0f64..25.0, v2 in -25.0f64..25.0) {
        let step = 1e-4;
        for chart in charts() {
            let d = chart.derivatives((v1, v2));
            let p = |a: f64, b: f64| chart.point((a, b)).0;
            let fd1 = sub(p(v1 + step, v2), p(v1 - step, v2), 2.0 * step);
            let fd2 = sub(p(v1, v2 + step), p(v1, v2 - step), 2.0 * step);
            prop_assert!(close(d.d1, fd1, 1e-6), "{chart:?} d1");
            prop_assert!(close(d.d2, fd2, 1e-6), "{chart:?} d2");
            let dd = |a: f64, b: f64| chart.derivatives((a, b));
            let fd11 = sub(dd(v1 + step, v2).d1, dd(v1 - step, v2).d1, 2.0 * step);
            let fd12 = sub(dd(v1, v2 + step).d1, dd(v1, v2 - step).d1, 2.0 * step);
            let fd22 = sub(dd(v1, v2 + step).d2, dd(v1, v2 - step).d2, 2.0 * step);
            prop_assert!(close(d.d11, fd11, 1e-6), "{chart:?} d11");
            prop_assert!(close(d.d12, fd12, 1e-6), "{chart:?} d12");
            prop_assert!(close(d.d22, fd22, 1e-6), "{chart:?} d22");
        }
    }

    #[test]
    fn lagrange_identity(v1 in -30.0f64..30.0, v2 in -30.0f64..30.0) {
        for chart in charts() {
            let d = chart.derivatives((v1, v2));
            let z = cross(&d.d1, &d.d2);
            let a = first_fundamental_form(chart.as_ref(), (v1, v2)).unwrap();
            let lhs = dot(&z, &z);
            prop_assert!((lhs - a.det()).norm() <= 1e-12 * lhs.norm());
            let j = jacobian(chart.as_ref(), (v1, v2)).unwrap();
            prop_assert!((j * j - lhs).norm() <= 1e-12 * lhs.norm());
        }
    }

    #[test]
    fn psi_is_odd_and_monotone(v in 0.0f64..40.0) {
        let m = Mollifier::default();
        prop_assert!((m.psi(v) + m.psi(-v)).abs() < 1e-13);
        prop_assert!(m.derivatives(v, 1)[1] >= 0.0);
    }
}

#[test]
fn real_limit_without_mollifier() {
    let mut bump = gaussian_bump();
    bump.mollifier.strength = 0.0;
    let mut cyl = slanted_cylinder();
    cyl.mollifier.strength = 0.0;
    let mut half = rough_halfspace();
    half.mollifier.strength = 0.0;
    let real: Vec<Box<dyn SurfaceChart>> = vec![Box::new(bump), Box::new(cyl), Box::new(half)];
    for chart in &real {
        for v in [(-20.0, 3.0), (1.0, 1.0), (15.0, -25.0)] {
            let x = chart.point(v);
            assert!(x.0.iter().all(|c| c.im == 0.0));
            let a = first_fundamental_form(chart.as_ref(), v).unwrap();
            assert!(a.e().im == 0.0 && a.f().im == 0.0 && a.g().im == 0.0);
            assert!(a.flags().re_pd);
        }
    }
}

#[test]
fn real_cylinder_jacobian_closed_form() {
    // |(−R sin t, R cos t, 0) × a| = R √(a₃² + (a₁ cos t + a₂ sin t)²)
    let mut cyl = slanted_cylinder();
    cyl.mollifier.strength = 0.0;
    for t in [0.0, 0.7, 2.0, 4.4] {
        let j = jacobian(&cyl, (t, 1.3)).unwrap();
        let want = 2.5 * (1.0 + (0.5 * t.cos() + 0.5 * t.sin()).powi(2)).sqrt();
        assert!((j - C64::new(want, 0.0)).norm() < 1e-13);
    }
}

#[test]
fn fundamental_form_admissible_on_example_grids() {
    let bump = gaussian_bump();
    let cyl = slanted_cylinder();
    let half = rough_halfspace();
    let h = 0.25;
    let n = (30.0 / h) as i64;
    for i in -n..=n {
        for j in -n..=n {
            let v = (i as f64 * h, j as f64 * h);
            first_fundamental_form(&bump, v).unwrap();
        }
    }
    let m = (20.0 / h) as i64;
    for i in -m..=m {
        for j in -m..=m {
            first_fundamental_form(&half, (i as f64 * h, j as f64 * h)).unwrap();
        }
    }
    for i in 0..64 {
        for j in -n..=n {
            first_fundamental_form(&cyl, (2.0 * PI * i as f64 / 64.0, j as f64 * h)).unwrap();
        }
    }
}

#[test]
fn bump_distance_is_decaying_far_out() {
    let bump = gaussian_bump();
    let x = bump.point((0.0, 0.0));
    let y = bump.point((15.0, 0.0));
    let r = complex_distance(&x, &y).unwrap();
    assert!(r.im > 0.0, "{r}");
}
