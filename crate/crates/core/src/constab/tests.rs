use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::poly::{default_var_names, parse};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn p(text: &str, n: usize) -> MultiPoly {
    parse(text, &default_var_names(n)).unwrap()
}

fn psd_poly(text: &str) -> MultiPoly {
    parse(text, &Cone::psd(2).unwrap().var_names()).unwrap()
}

fn cfg(samples: usize) -> SamplingConfig {
    SamplingConfig::new(samples, 7)
}

fn assert_valid(v: &Verdict, f: &MultiPoly, cone: &Cone) {
    assert!(v.witness.is_some(), "negative verdict without witness: {v:?}");
    assert!(v.verify(f, cone, &cfg(1).tols).unwrap(), "bad witness {v:?}");
}

// linear

#[test]
fn linear_positive_orthant_form_is_stable() {
    let v = linear_k_stability(&p("z1 + z2 + 1", 2), &Cone::orthant(2).unwrap(), false, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedStable);
    assert!(matches!(v.certificate, Some(Certificate::DualInterior { sign: 1, .. })));
}

#[test]
fn linear_negative_orthant_form_is_stable() {
    let v = linear_k_stability(&p("-z1 - 2*z2 + 3", 2), &Cone::orthant(2).unwrap(), false, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedStable);
    assert!(matches!(v.certificate, Some(Certificate::DualInterior { sign: -1, .. })));
}

#[test]
fn linear_mixed_signs_unstable_with_witness() {
    let f = p("z1 - z2", 2);
    let k = Cone::orthant(2).unwrap();
    let v = linear_k_stability(&f, &k, false, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedUnstable);
    assert_valid(&v, &f, &k);
}

#[test]
fn linear_mixed_signs_with_constant_unstable() {
    let f = p("3*z1 - z2 + 5", 2);
    let k = Cone::orthant(2).unwrap();
    let v = linear_k_stability(&f, &k, false, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedUnstable);
    assert_valid(&v, &f, &k);
}

#[test]
fn linear_psd_positive_definite_form_is_stable() {
    let f = psd_poly("5*z11 + z22 + 2");
    let v = linear_k_stability(&f, &Cone::psd(2).unwrap(), false, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedStable);
}

#[test]
fn linear_psd_indefinite_form_is_unstable() {
    // A = [[1, 0], [0, -1]]
    let f = psd_poly("z11 - z22");
    let k = Cone::psd(2).unwrap();
    let v = linear_k_stability(&f, &k, false, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedUnstable);
    assert_valid(&v, &f, &k);
}

#[test]
fn linear_psd_off_diagonal_dominant_is_unstable() {
    // tr(AZ) with A = [[1, 2], [2, 1]] is indefinite
    let f = psd_poly("z11 + 4*z12 + z22");
    let k = Cone::psd(2).unwrap();
    let v = linear_k_stability(&f, &k, false, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedUnstable);
    assert_valid(&v, &f, &k);
}

#[test]
fn linear_boundary_of_dual_with_real_constant_is_stable() {
    // z1 never vanishes when Im z1 > 0
    let v = linear_k_stability(&p("z1 + 0*z2 + 4", 2), &Cone::orthant(2).unwrap(), false, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedStable);
    assert!(matches!(v.certificate, Some(Certificate::DualBoundary { .. })));
}

#[test]
fn linear_boundary_with_wrong_sided_constant_is_unstable() {
    let f = p("z1 - i + 0*z2", 2);
    let k = Cone::orthant(2).unwrap();
    let v = linear_k_stability(&f, &k, true, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedUnstable);
    assert_valid(&v, &f, &k);
}

#[test]
fn linear_complex_constant_needs_flag() {
    let f = p("z1 + z2 + i", 2);
    let k = Cone::orthant(2).unwrap();
    assert!(matches!(linear_k_stability(&f, &k, false, &cfg(0)), Err(Error::NonReal)));
    let v = linear_k_stability(&f, &k, true, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedStable);
}

#[test]
fn linear_rejects_complex_slope_and_nonlinear() {
    let k = Cone::orthant(2).unwrap();
    assert!(matches!(linear_k_stability(&p("i*z1 + z2", 2), &k, true, &cfg(0)), Err(Error::NonReal)));
    assert!(linear_k_stability(&p("z1*z2", 2), &k, true, &cfg(0)).is_err());
}

#[test]
fn linear_constants() {
    let k = Cone::orthant(1).unwrap();
    let zero = MultiPoly::zero(default_var_names(1));
    let v = linear_k_stability(&zero, &k, false, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedUnstable);
    let v = linear_k_stability(&p("3", 1), &k, false, &cfg(0)).unwrap();
    assert_eq!(v.status, Status::CertifiedStable);
}

#[test]
fn dimension_mismatch_is_an_error() {
    let r = falsify_k_stability(&p("z1 + z2", 2), &Cone::orthant(3).unwrap(), &cfg(10));
    assert!(matches!(r, Err(Error::Shape(_))));
}

// falsifier

#[test]
fn quadratic_form_is_not_orthant_stable() {
    let f = p("(z1 + z3)^2 - z2^2", 3);
    let k = Cone::orthant(3).unwrap();
    let v = falsify_k_stability(&f, &k, &cfg(2000)).unwrap();
    assert_eq!(v.status, Status::Falsified);
    assert_valid(&v, &f, &k);
}

#[test]
fn same_form_is_psd_stable() {
    let f = psd_poly("(z11 + z22)^2 - z12^2");
    let v = falsify_k_stability(&f, &Cone::psd(2).unwrap(), &cfg(2000)).unwrap();
    assert_eq!(v.status, Status::NotFalsified);
    assert_eq!(v.samples, 2000);
    assert!(v.max_root_imag.unwrap() < 1e-6);
}

#[test]
fn lower_half_plane_root_is_not_a_witness() {
    let v = falsify_k_stability(&p("z1 + i", 1), &Cone::orthant(1).unwrap(), &cfg(500)).unwrap();
    assert_eq!(v.status, Status::NotFalsified);
}

#[test]
fn upper_half_plane_root_is_found() {
    let f = p("z1 - i", 1);
    let k = Cone::orthant(1).unwrap();
    let v = falsify_k_stability(&f, &k, &cfg(500)).unwrap();
    assert_eq!(v.status, Status::Falsified);
    assert_valid(&v, &f, &k);
    assert!((v.witness.unwrap()[0] - c(0.0, 1.0)).norm() < 1e-8);
}

#[test]
fn zero_and_constant_conventions() {
    let k = Cone::orthant(2).unwrap();
    let zero = MultiPoly::zero(default_var_names(2));
    let v = falsify_k_stability(&zero, &k, &cfg(10)).unwrap();
    assert_eq!(v.status, Status::CertifiedUnstable);
    assert_valid(&v, &zero, &k);
    let v = falsify_k_stability(&p("2 - i", 2), &k, &cfg(10)).unwrap();
    assert_eq!(v.status, Status::CertifiedStable);
}

#[test]
fn check_routes_linear_polynomials_to_exact_test() {
    let v = check_k_stability(&p("z1 - z2", 2), &Cone::orthant(2).unwrap(), &cfg(10)).unwrap();
    assert_eq!(v.status, Status::CertifiedUnstable);
    let v = check_k_stability(&p("z1 * z2", 2), &Cone::orthant(2).unwrap(), &cfg(200)).unwrap();
    assert_eq!(v.status, Status::NotFalsified);
}

#[test]
fn serial_and_parallel_runs_agree() {
    let f = p("(z1 + z3)^2 - z2^2", 3);
    let k = Cone::orthant(3).unwrap();
    let mut serial = cfg(500);
    serial.threads = Some(1);
    let mut four = cfg(500);
    four.threads = Some(4);
    let a = falsify_k_stability(&f, &k, &serial).unwrap();
    let b = falsify_k_stability(&f, &k, &four).unwrap();
    let g = falsify_k_stability(&f, &k, &cfg(500)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, g);
}

#[test]
fn verdict_round_trips_through_json() {
    let f = p("z1 - i", 1);
    let v = falsify_k_stability(&f, &Cone::orthant(1).unwrap(), &cfg(10)).unwrap();
    let text = serde_json::to_string(&v).unwrap();
    let back: Verdict = serde_json::from_str(&text).unwrap();
    assert_eq!(v, back);
    assert!(text.contains("\"falsified\""));
}

// hyperbolicity

#[test]
fn determinant_is_hyperbolic_on_psd() {
    let f = psd_poly("z11*z22 - z12^2");
    let v = hyperbolicity_check(&f, &Cone::psd(2).unwrap(), &cfg(1000)).unwrap();
    assert_eq!(v.status, Status::NotFalsified);
}

#[test]
fn sum_of_squares_is_not_hyperbolic() {
    let f = p("z1^2 + z2^2", 2);
    let k = Cone::orthant(2).unwrap();
    let v = hyperbolicity_check(&f, &k, &cfg(500)).unwrap();
    assert_eq!(v.status, Status::Falsified);
    assert_valid(&v, &f, &k);
}

#[test]
fn product_of_coordinates_is_hyperbolic() {
    let v = hyperbolicity_check(&p("z1*z2", 2), &Cone::orthant(2).unwrap(), &cfg(500)).unwrap();
    assert_eq!(v.status, Status::NotFalsified);
}

#[test]
fn hyperbolicity_requires_homogeneity() {
    let r = hyperbolicity_check(&p("z1*z2 + 1", 2), &Cone::orthant(2).unwrap(), &cfg(10));
    assert!(matches!(r, Err(Error::NotHomogeneous)));
}

#[test]
fn hyperbolicity_matches_falsifier() {
    let k = Cone::orthant(3).unwrap();
    for text in ["z1^2 + z2^2 - z3^2", "z1*z2*z3", "(z1 + z3)^2 - z2^2", "z1^3 - z2*z3^2"] {
        let f = p(text, 3);
        let a = hyperbolicity_check(&f, &k, &cfg(300)).unwrap();
        let b = falsify_k_stability(&f, &k, &cfg(300)).unwrap();
        assert_eq!(a, b, "{text}");
    }
}

// Hermite-Biehler lift

#[test]
fn lift_of_z1_plus_i_z2_is_unstable_on_both_sides() {
    // z1 + i·z2 vanishes at (1 + i, -1 + i)
    let r = hb_lift_check(&p("z2", 2), &p("z1", 2), &Cone::orthant(2).unwrap(), &cfg(2000)).unwrap();
    assert!(r.complex_side.status.is_negative());
    assert!(r.lifted_side.status.is_negative());
    assert!(r.consistent);
}

#[test]
fn lift_of_z1_minus_i_z2_is_unstable_on_both_sides() {
    let r = hb_lift_check(&p("-z2", 2), &p("z1", 2), &Cone::orthant(2).unwrap(), &cfg(2000)).unwrap();
    assert!(r.complex_side.status.is_negative());
    assert!(r.lifted_side.status.is_negative());
    assert!(r.consistent);
}

#[test]
fn lift_with_zero_imaginary_part() {
    let f = MultiPoly::zero(default_var_names(2));
    let r = hb_lift_check(&f, &p("z1", 2), &Cone::orthant(2).unwrap(), &cfg(300)).unwrap();
    assert_eq!(r.complex_side.status, Status::CertifiedStable);
    assert!(!r.lifted_side.status.is_negative());
    assert!(r.consistent);
}

#[test]
fn lift_of_stable_pair() {
    // g + i·f = z1 + i is stable; g + w·f = z1 + w lies in the dual interior
    let r = hb_lift_check(&p("1", 1), &p("z1", 1), &Cone::orthant(1).unwrap(), &cfg(300)).unwrap();
    assert_eq!(r.complex_side.status, Status::CertifiedStable);
    assert!(!r.lifted_side.status.is_negative());
    assert!(r.consistent);
}

#[test]
fn lift_rejects_complex_input() {
    let r = hb_lift_check(&p("i*z1", 1), &p("z1", 1), &Cone::orthant(1).unwrap(), &cfg(10));
    assert!(matches!(r, Err(Error::NonReal)));
}

// pencil

#[test]
fn pencil_of_coordinates_is_consistent() {
    let r = pencil_hko_check(&p("z2", 2), &p("z1", 2), &Cone::orthant(2).unwrap(), None, &cfg(500)).unwrap();
    assert!(!r.pencil_clean);
    assert!(!r.side_clean);
    assert!(r.consistent);
    // members with λμ > 0 are stable, those with λμ < 0 are not
    for m in &r.members {
        if m.lambda * m.mu < -1e-9 {
            assert!(m.verdict.status.is_negative(), "{m:?}");
        }
        if m.lambda * m.mu > 1e-9 {
            assert_eq!(m.verdict.status, Status::CertifiedStable);
        }
    }
}

#[test]
fn pencil_of_equal_polynomials_has_a_zero_member() {
    let f = p("z1*z2 + z1", 2);
    let r = pencil_hko_check(&f, &f, &Cone::orthant(2).unwrap(), None, &cfg(300)).unwrap();
    assert!(r.members.iter().any(|m| m.zero));
    assert!(r.pencil_clean);
    assert!(r.side_clean);
    assert!(r.consistent);
}

#[test]
fn pencil_of_non_interlacing_pair() {
    let r = pencil_hko_check(
        &p("z1", 2),
        &p("-z1 + z2^3", 2),
        &Cone::orthant(2).unwrap(),
        None,
        &cfg(1000),
    )
    .unwrap();
    assert!(!r.pencil_clean);
    assert!(r.g_plus_if.status.is_negative());
    assert!(r.f_plus_ig.status.is_negative());
    assert!(r.consistent);
}

#[test]
fn pencil_of_interlacing_pair() {
    let r = pencil_hko_check(&p("1", 1), &p("z1", 1), &Cone::orthant(1).unwrap(), None, &cfg(300)).unwrap();
    assert!(r.pencil_clean);
    assert!(r.side_clean);
    assert!(r.consistent);
}

#[test]
fn pencil_witnesses_are_valid() {
    let k = Cone::orthant(2).unwrap();
    let (f, g) = (p("z1^2 - z2", 2), p("z1*z2 + 1", 2));
    let r = pencil_hko_check(&f, &g, &k, None, &cfg(500)).unwrap();
    for m in &r.members {
        if m.verdict.status.is_negative() {
            let q = f.scale(c(m.lambda, 0.0)).add(&g.scale(c(m.mu, 0.0))).unwrap();
            assert_valid(&m.verdict, &q, &k);
        }
    }
    if r.g_plus_if.status.is_negative() {
        assert_valid(&r.g_plus_if, &g.plus_i_times(&f).unwrap(), &k);
    }
    if r.f_plus_ig.status.is_negative() {
        assert_valid(&r.f_plus_ig, &f.plus_i_times(&g).unwrap(), &k);
    }
    assert!(r.consistent);
}

#[test]
fn default_grid_has_32_distinct_directions() {
    let grid = hko::default_pencil_grid();
    assert_eq!(grid.len(), 32);
    for (l, m) in &grid {
        assert!(((l * l + m * m) - 1.0).abs() < 1e-12);
    }
}

// Wronskian

#[test]
fn wronskian_of_one_and_z1_passes() {
    let r = wronskian_certificate(&p("1", 1), &p("z1", 1), &Cone::orthant(1).unwrap(), 50, &cfg(0)).unwrap();
    assert!(r.passes);
    assert!((r.max_value + 1.0).abs() < 1e-12);
}

#[test]
fn wronskian_of_coordinates_has_violations() {
    let r = wronskian_certificate(&p("z2", 2), &p("z1", 2), &Cone::orthant(2).unwrap(), 50, &cfg(0)).unwrap();
    assert!(!r.passes);
    assert!(r.violations.iter().all(|v| v.value > 0.0));
    assert_eq!(r.directions, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
}

#[test]
fn wronskian_of_equal_pair_vanishes() {
    let f = p("z1*z2 - 3", 2);
    let r = wronskian_certificate(&f, &f, &Cone::orthant(2).unwrap(), 50, &cfg(0)).unwrap();
    assert!(r.passes);
    assert_eq!(r.max_value, 0.0);
}

#[test]
fn wronskian_uses_polyhedral_generators_and_psd_samples() {
    let k = Cone::polyhedral(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    let r = wronskian_certificate(&p("1", 2), &p("z1 + z2", 2), &k, 10, &cfg(0)).unwrap();
    assert_eq!(r.directions.len(), 2);
    assert!(!r.sampled_directions);
    assert!(r.passes);
    let k = Cone::psd(2).unwrap();
    let g = psd_poly("z11 + z22");
    let r = wronskian_certificate(&psd_poly("1"), &g, &k, 10, &cfg(0)).unwrap();
    assert!(r.sampled_directions);
    assert!(r.passes);
}

// decomposition

#[test]
fn decompose_linear_complex_form() {
    let r = decompose_check(&p("z1 + i*z2", 2), &Cone::orthant(2).unwrap(), &cfg(1000)).unwrap();
    assert!(r.h.status.is_negative());
    assert_eq!(r.g.unwrap().status, Status::CertifiedStable);
    assert_eq!(r.f.unwrap().status, Status::CertifiedStable);
    assert!(r.consistent);
}

#[test]
fn decompose_real_determinant() {
    let r = decompose_check(&psd_poly("z11*z22 - z12^2"), &Cone::psd(2).unwrap(), &cfg(300)).unwrap();
    assert_eq!(r.h.status, Status::NotFalsified);
    assert!(r.f.is_none());
    assert_eq!(r.g.unwrap().status, Status::NotFalsified);
    assert!(r.consistent);
}

#[test]
fn decompose_square_of_complex_form() {
    // real part z1² − z2² vanishes at i·(1, 1)
    let r = decompose_check(&p("(z1 + i*z2)^2", 2), &Cone::orthant(2).unwrap(), &cfg(1000)).unwrap();
    assert!(r.h.status.is_negative());
    assert!(r.g.unwrap().status.is_negative());
    assert_eq!(r.f.unwrap().status, Status::NotFalsified);
    assert!(r.consistent);
}

#[test]
fn decompose_stable_complex_polynomial() {
    // (z1 + i)(z2 + i) is stable, so both parts must be too
    let r = decompose_check(&p("(z1 + i)*(z2 + i)", 2), &Cone::orthant(2).unwrap(), &cfg(500)).unwrap();
    assert_eq!(r.h.status, Status::NotFalsified);
    assert!(!r.g.unwrap().status.is_negative());
    assert!(!r.f.unwrap().status.is_negative());
    assert!(r.consistent);
}

// imaginary projection

#[test]
fn projection_of_real_linear_form_is_a_hyperplane() {
    let cloud = imaginary_projection_sample(&p("z1 + z2 + 1", 2), 200, &[(-2.0, 2.0); 2], &cfg(0)).unwrap();
    assert_eq!(cloud.len(), 200);
    for y in cloud {
        assert!((y[0] + y[1]).abs() < 1e-8, "{y:?}");
    }
}

#[test]
fn projection_of_univariate_quadratic() {
    let cloud = imaginary_projection_sample(&p("z1^2 + 1", 1), 40, &[(-2.0, 2.0)], &cfg(0)).unwrap();
    assert_eq!(cloud.len(), 40);
    for y in cloud {
        assert!((y[0].abs() - 1.0).abs() < 1e-8, "{y:?}");
    }
}

#[test]
fn projection_of_quadratic_form_lies_on_two_planes() {
    let f = p("(z1 + z3)^2 - z2^2", 3);
    let cloud = imaginary_projection_sample(&f, 300, &[(-1.0, 1.0); 3], &cfg(3)).unwrap();
    assert_eq!(cloud.len(), 300);
    let mut hits = [0usize; 2];
    for y in cloud {
        let a = (y[0] - y[1] + y[2]).abs();
        let b = (y[0] + y[1] + y[2]).abs();
        assert!(a.min(b) < 1e-8, "{y:?}");
        hits[usize::from(b < a)] += 1;
    }
    assert!(hits[0] > 0 && hits[1] > 0);
}

#[test]
fn projection_rejects_constants_and_bad_boxes() {
    let r = imaginary_projection_sample(&p("4", 1), 10, &[(-1.0, 1.0)], &cfg(0));
    assert!(matches!(r, Err(Error::ConstantPolynomial)));
    let r = imaginary_projection_sample(&p("z1", 1), 10, &[(1.0, -1.0)], &cfg(0));
    assert!(r.is_err());
}

// specialization

#[test]
fn specialize_product_to_scalar_multiple() {
    let v = specialize_stability_check(
        &p("z1*z2", 2),
        &[0],
        &[0.0],
        &[1.0],
        &Cone::orthant(1).unwrap(),
        &Cone::orthant(1).unwrap(),
        &cfg(300),
    )
    .unwrap();
    assert_eq!(v.status, Status::NotFalsified);
}

#[test]
fn specialize_sum_leaves_lower_root() {
    let v = specialize_stability_check(
        &p("z1 + z2", 2),
        &[0],
        &[1.0],
        &[1.0],
        &Cone::orthant(1).unwrap(),
        &Cone::orthant(1).unwrap(),
        &cfg(300),
    )
    .unwrap();
    assert_eq!(v.status, Status::NotFalsified);
}

#[test]
fn specialize_lift_at_lambda_plus_i() {
    // g + w·f with w ↦ λ + i gives (g + λf) + i·f; here g + i·f = (z1 + i)(z2 + i)
    let lifted = p("z1*z2 - 1 + z3*(z1 + z2)", 3);
    for lambda in [-2.0, 0.0, 1.5] {
        let v = specialize_stability_check(
            &lifted,
            &[2],
            &[lambda],
            &[1.0],
            &Cone::orthant(1).unwrap(),
            &Cone::orthant(2).unwrap(),
            &cfg(300),
        )
        .unwrap();
        assert_eq!(v.status, Status::NotFalsified, "λ = {lambda}");
    }
}

#[test]
fn specialize_requires_interior_point() {
    let r = specialize_stability_check(
        &p("z1 + z2", 2),
        &[0],
        &[0.0],
        &[0.0],
        &Cone::orthant(1).unwrap(),
        &Cone::orthant(1).unwrap(),
        &cfg(10),
    );
    assert!(matches!(r, Err(Error::NotInterior)));
}

#[test]
fn specialize_falsified_refutes_original() {
    // (z1 - z2)·z1 specializes at z1 = i to i·(i - z2), which vanishes at z2 = i
    let f = p("(z1 - z2)*z1", 2);
    let v = specialize_stability_check(
        &f,
        &[0],
        &[0.0],
        &[1.0],
        &Cone::orthant(1).unwrap(),
        &Cone::orthant(1).unwrap(),
        &cfg(300),
    )
    .unwrap();
    assert_eq!(v.status, Status::Falsified);
    let z = v.witness.unwrap();
    let full = vec![c(0.0, 1.0), z[0]];
    assert!(f.eval(&full).norm() < 1e-6);
}

// properties

fn small_poly(n: usize) -> impl Strategy<Value = MultiPoly> {
    let term = (prop::collection::vec(0u32..3, n), -3i32..=3, -2i32..=2);
    prop::collection::vec(term, 1..5).prop_map(move |ts| {
        MultiPoly::from_terms(
            default_var_names(n),
            ts.into_iter().map(|(e, re, im)| (e, c(re as f64, im as f64))),
        )
    })
}

fn linear_poly(n: usize) -> impl Strategy<Value = (Vec<i32>, i32)> {
    (prop::collection::vec(-3i32..=3, n), -3i32..=3)
}

fn small_cone() -> impl Strategy<Value = Cone> {
    prop_oneof![
        Just(Cone::orthant(2).unwrap()),
        Just(Cone::polyhedral(vec![vec![1.0, 0.0], vec![1.0, 2.0]]).unwrap()),
        Just(Cone::polyhedral(vec![vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn negative_verdicts_carry_valid_witnesses(f in small_poly(2), cone in small_cone()) {
        let v = check_k_stability(&f, &cone, &cfg(200)).unwrap();
        if v.status.is_negative() {
            prop_assert!(v.witness.is_some());
            prop_assert!(v.verify(&f, &cone, &cfg(1).tols).unwrap());
        }
    }

    #[test]
    fn linear_certificate_agrees_with_falsifier((a, b) in linear_poly(2), cone in small_cone()) {
        let terms = a.iter().enumerate().map(|(k, &ak)| {
            let mut e = vec![0u32; 2];
            e[k] = 1;
            (e, c(ak as f64, 0.0))
        }).chain([(vec![0, 0], c(b as f64, 0.0))]);
        let f = MultiPoly::from_terms(default_var_names(2), terms);
        prop_assume!(!f.is_zero() && !f.is_constant());
        let exact = linear_k_stability(&f, &cone, false, &cfg(0)).unwrap();
        let sampled = falsify_k_stability(&f, &cone, &cfg(2000)).unwrap();
        match exact.status {
            Status::CertifiedStable => prop_assert_eq!(sampled.status, Status::NotFalsified),
            Status::CertifiedUnstable => prop_assert_eq!(sampled.status, Status::Falsified),
            s => prop_assert!(false, "unexpected {:?}", s),
        }
    }

    #[test]
    fn products_of_stable_factors_stay_clean(
        a in prop::collection::vec(0.2f64..3.0, 2),
        b in prop::collection::vec(0.2f64..3.0, 2),
        s in -2.0f64..2.0,
    ) {
        let k = Cone::orthant(2).unwrap();
        let vars = default_var_names(2);
        let lin = |w: &[f64], t: f64| MultiPoly::from_terms(
            vars.clone(),
            [(vec![1, 0], c(w[0], 0.0)), (vec![0, 1], c(w[1], 0.0)), (vec![0, 0], c(t, 0.0))],
        );
        let f = lin(&a, s);
        let g = lin(&b, -s);
        let fg = f.mul(&g).unwrap();
        prop_assert_eq!(falsify_k_stability(&fg, &k, &cfg(200)).unwrap().status, Status::NotFalsified);
    }

    #[test]
    fn product_witness_is_a_root_of_a_factor(f in small_poly(2), g in small_poly(2)) {
        let k = Cone::orthant(2).unwrap();
        let fg = f.mul(&g).unwrap();
        prop_assume!(!fg.is_zero() && !fg.is_constant());
        let v = falsify_k_stability(&fg, &k, &cfg(100)).unwrap();
        if let Some(z) = v.witness {
            let rf = f.eval(&z).norm() / residual_scale(&f, &z);
            let rg = g.eval(&z).norm() / residual_scale(&g, &z);
            prop_assert!(rf.min(rg) < 1e-3, "{} {}", rf, rg);
        }
    }
}

#[test]
fn substitution_matches_direct_evaluation() {
    let f = p("z1*z2 + z3^2", 3);
    let mut m = BTreeMap::new();
    m.insert(2, c(0.5, 1.0));
    let r = f.substitute_partial(&m).unwrap();
    let z = [c(1.0, 2.0), c(-1.0, 0.5)];
    let direct = f.eval(&[z[0], z[1], c(0.5, 1.0)]);
    assert!((r.eval(&z) - direct).norm() < 1e-12);
}

#[test]
fn small_values_near_the_boundary_are_not_witnesses() {
    // z1²·z2 is tiny at i·(1e-3, 0.3) without vanishing there
    let f = p("-z1^2*z2", 2);
    let v = falsify_k_stability(&f, &Cone::orthant(2).unwrap(), &SamplingConfig::new(300, 24)).unwrap();
    assert_eq!(v.status, Status::NotFalsified);
    let vars = Cone::psd(3).unwrap().var_names();
    let det = parse("z11*z22*z33 + 2*z12*z23*z13 - z11*z23^2 - z22*z13^2 - z33*z12^2", &vars).unwrap();
    let v = hyperbolicity_check(&det, &Cone::psd(3).unwrap(), &SamplingConfig::new(1000, 3)).unwrap();
    assert_eq!(v.status, Status::NotFalsified);
}
