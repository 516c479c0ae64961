use czq::epstein::ComplexQuadraticForm;
use czq::quadrature::{
    convergence_slope, corrected_trapezoid, fit_correction_stencil, punctured_trapezoid,
    GridSpec,
};
use czq::C64;
use proptest::prelude::*;
use std::f64::consts::PI;

const HS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn gaussian(h: f64) -> (GridSpec, Vec<C64>) {
    let n = (7.0 / h).ceil() as i64;
    let grid = GridSpec::plane(h, (0.0, 0.0), n, n).unwrap();
    let g = grid.sample(|x, y| C64::new((-(x * x + y * y)).exp(), 0.0));
    (grid, g)
}

fn gaussian_errors(order: Option<u32>) -> Vec<f64> {
    let a = ComplexQuadraticForm::identity();
    let exact = PI.powf(1.5);
    HS.iter()
        .map(|&h| {
            let (grid, g) = gaussian(h);
            let v = match order {
                None => punctured_trapezoid(&g, &a, C64::new(0.5, 0.0), &grid).unwrap(),
                Some(p) => corrected_trapezoid(&g, &a, 0.5, &grid, p).unwrap(),
            };
            (v - exact).norm()
        })
        .collect()
}

#[test]
fn gaussian_slopes() {
    let e0 = gaussian_errors(None);
    let s0 = convergence_slope(&HS, &e0);
    assert!((0.7..=1.3).contains(&s0), "punctured {s0} {e0:?}");
    let e3 = gaussian_errors(Some(3));
    let s3 = convergence_slope(&HS, &e3);
    assert!((2.7..=3.3).contains(&s3), "order 3 {s3} {e3:?}");
    let e5 = gaussian_errors(Some(5));
    let s5 = convergence_slope(&HS, &e5);
    assert!((4.5..=5.5).contains(&s5), "order 5 {s5} {e5:?}");
}

#[test]
fn gaussian_order_seven() {
    let hs = [0.4, 0.2, 0.1];
    let a = ComplexQuadraticForm::identity();
    let exact = PI.powf(1.5);
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let (grid, g) = gaussian(h);
            (corrected_trapezoid(&g, &a, 0.5, &grid, 7).unwrap() - exact).norm()
        })
        .collect();
    let slope = convergence_slope(&hs, &errs);
    assert!((6.4..=7.6).contains(&slope), "order 7 {slope} {errs:?}");
}

#[test]
fn zero_samples_give_zero() {
    let a = ComplexQuadraticForm::identity();
    let grid = GridSpec::plane(0.1, (0.0, 0.0), 20, 20).unwrap();
    let g = vec![C64::new(0.0, 0.0); grid.len()];
    assert_eq!(punctured_trapezoid(&g, &a, C64::new(0.5, 0.0), &grid).unwrap(), C64::new(0.0, 0.0));
    for p in [3, 5, 7] {
        assert_eq!(corrected_trapezoid(&g, &a, 0.5, &grid, p).unwrap(), C64::new(0.0, 0.0));
    }
}

fn cylinder_form() -> ComplexQuadraticForm {
    ComplexQuadraticForm::new(C64::new(6.25, 0.0), C64::new(-0.2765, -0.0461), C64::new(1.4582, 0.5006))
        .unwrap()
}

fn bump_density(x: f64, y: f64) -> C64 {
    // Smooth, effectively compact: below 1e-17 beyond radius 2.
    let env = (-(x * x + 2.0 * y * y) * 5.0).exp();
    C64::new(1.0 + 0.3 * x - 0.2 * y * y, 0.1 * x * y) * env
}

#[test]
fn cylinder_form_order_three_self_converges() {
    let a = cylinder_form();
    let vals: Vec<C64> = [0.1f64, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&h| {
            let n = (2.5 / h).ceil() as i64;
            let grid = GridSpec::plane(h, (0.0, 0.0), n, n).unwrap();
            let g = grid.sample(bump_density);
            corrected_trapezoid(&g, &a, 0.5, &grid, 3).unwrap()
        })
        .collect();
    // Richardson with the h^3 leading term.
    let reference = (vals[3] * 8.0 - vals[2]) / 7.0;
    let errs: Vec<f64> = vals[..3].iter().map(|v| (v - reference).norm()).collect();
    let slope = convergence_slope(&[0.1, 0.05, 0.025], &errs);
    assert!((2.6..=3.4).contains(&slope), "{slope} {errs:?}");
}

#[test]
fn anisotropic_grid_matches_refined_square_grid() {
    // h₁ ≠ h₂ goes through the rescaled lattice form.
    let a = cylinder_form();
    let exactish = {
        let h = 0.01;
        let grid = GridSpec::plane(h, (0.0, 0.0), 250, 250).unwrap();
        corrected_trapezoid(&grid.sample(bump_density), &a, 0.5, &grid, 5).unwrap()
    };
    let grid = GridSpec::plane_box(0.04, 0.03, (0.0, 0.0), (-63, -84), (63, 84)).unwrap();
    let got = corrected_trapezoid(&grid.sample(bump_density), &a, 0.5, &grid, 3).unwrap();
    assert!((got - exactish).norm() < 1e-4, "{got} vs {exactish}");
    let punct = czq::quadrature::punctured_trapezoid(&grid.sample(bump_density), &a, C64::new(0.5, 0.0), &grid)
        .unwrap();
    assert!((got - exactish).norm() < 0.05 * (punct - exactish).norm());
}

#[test]
fn cylinder_and_unrolled_plane_agree() {
    let a = cylinder_form();
    let n1 = 80usize;
    let h1 = 2.0 * PI / n1 as f64;
    let h2 = 0.05;
    let cyl = GridSpec::cylinder(n1, h2, (0.0, 0.0), -60, 60).unwrap();
    let g = |x: f64, y: f64| {
        let x = (x + PI).rem_euclid(2.0 * PI) - PI;
        bump_density(x, y)
    };
    let plane = GridSpec::plane_box(h1, h2, (0.0, 0.0), (-40, -60), (39, 60)).unwrap();
    for order in [3, 5] {
        let vc = corrected_trapezoid(&cyl.sample(g), &a, 0.5, &cyl, order).unwrap();
        let vp = corrected_trapezoid(&plane.sample(g), &a, 0.5, &plane, order).unwrap();
        assert!((vc - vp).norm() < 1e-12, "{vc} vs {vp}");
    }
}

#[test]
fn stencil_symmetries() {
    let st = fit_correction_stencil(&ComplexQuadraticForm::identity(), C64::new(0.5, 0.0), 7).unwrap();
    let w = |l: (i64, i64)| st.weights[st.offsets.iter().position(|&o| o == l).unwrap()];
    for &l in &st.offsets {
        // Eight-fold symmetry of the square lattice.
        for m in [(l.1, l.0), (-l.0, l.1), (l.0, -l.1), (-l.1, l.0)] {
            assert!((w(l) - w(m)).norm() < 1e-12, "{l:?} {m:?}");
        }
    }
    // Odd monomials get no correction.
    let a = cylinder_form();
    let st = fit_correction_stencil(&a, C64::new(0.5, 0.0), 5).unwrap();
    for (b1, b2) in [(1, 0), (0, 1), (2, 1), (0, 3)] {
        let m: C64 = st
            .offsets
            .iter()
            .zip(&st.weights)
            .map(|(l, w)| w * (l.0 as f64).powi(b1) * (l.1 as f64).powi(b2))
            .sum();
        assert!(m.norm() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn rules_are_linear_in_samples(alpha_re in -2.0f64..2.0, alpha_im in -2.0f64..2.0, shift in -1.0f64..1.0, order in prop::sample::select(vec![3u32, 5, 7])) {
        let a = cylinder_form();
        let grid = GridSpec::plane(0.2, (0.0, 0.0), 12, 12).unwrap();
        let g1 = grid.sample(bump_density);
        let g2 = grid.sample(|x, y| C64::new((-(x - shift).powi(2) - y * y).exp(), x));
        let alpha = C64::new(alpha_re, alpha_im);
        let mix: Vec<C64> = g1.iter().zip(&g2).map(|(a, b)| alpha * a + b).collect();
        let r = |g: &[C64]| corrected_trapezoid(g, &a, 0.5, &grid, order).unwrap();
        let lhs = r(&mix);
        let rhs = alpha * r(&g1) + r(&g2);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}
