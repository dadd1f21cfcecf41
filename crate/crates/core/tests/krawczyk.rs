use std::path::PathBuf;

use dfcert::exact::QComplex;
use dfcert::experiments::{certify_krawczyk, region_around, round_point, sweep_box_side};
use dfcert::interval::{ComplexInterval, IntervalBox, PointMatrix, RealInterval};
use dfcert::krawczyk::{default_preconditioner, krawczyk_image, krawczyk_test, refine_root, FailureReason};
use dfcert::parse::{load_system, parse_system, SystemFile};
use dfcert::poly::MultivariatePolynomial;
use dfcert::system::{IngredientSystem, Mode};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};

const PREC: u32 = 128;

fn bundled(name: &str) -> (SystemFile, IngredientSystem) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("systems").join(name);
    load_system(&path, PREC).unwrap()
}

fn one_var(poly: &str, mode: &str) -> IngredientSystem {
    let text = format!(
        r#"{{"schema": "dfcert-system/1", "mode": "{mode}", "variables": ["x"], "polynomials": ["{poly}"], "ingredients": []}}"#
    );
    parse_system(&text, PREC).unwrap().1
}

fn q(n: i64, d: i64) -> QComplex {
    QComplex::real(Rational::from((n, d)))
}

fn interval(lo: (i64, i64), hi: (i64, i64)) -> IntervalBox {
    let lo = RealInterval::from_rational(&Rational::from(lo), PREC);
    let hi = RealInterval::from_rational(&Rational::from(hi), PREC);
    IntervalBox::new(vec![ComplexInterval::from_real(lo.hull(&hi))]).unwrap()
}

fn scalar(v: f64) -> PointMatrix {
    PointMatrix::new(1, 1, vec![Complex64::new(v, 0.0)]).unwrap()
}

fn sqrt2() -> Float {
    Float::with_val(400, 2u32).sqrt()
}

#[test]
fn linear_image_collapses_to_the_root() {
    let sys = one_var("x - 3/4", "real");
    let region = interval((0, 1), (2, 1));
    let img = krawczyk_image(&sys, &region, &[q(1, 1)], &scalar(1.0)).unwrap();
    let v = img.get(0);
    assert!(v.contains_exact(&q(3, 4)));
    assert!(v.width_max() < 1e-30);
}

#[test]
fn quadratic_image_with_hand_preconditioner() {
    let sys = one_var("x^2 - 2", "real");
    let region = interval((140, 100), (142, 100));
    let img = krawczyk_image(&sys, &region, &[q(141, 100)], &scalar(1.0 / 2.82)).unwrap();
    let v = &img.get(0).re;
    // Hand computation: 1.41 − (1.41² − 2)/2.82 + (1 − 2[1.40,1.42]/2.82)·[−0.01, 0.01].
    assert!(v.contains_value(&sqrt2()));
    assert!(v.lo() > &1.40 && v.hi() < &1.42);
    // Width 2·0.01·(2·1.42/2.82 − 1) ≈ 1.4184e-4.
    assert!(v.width().to_f64() < 1.419e-4);
    let cert = krawczyk_test(&sys, &region, Some(&[q(141, 100)]), Some(&scalar(1.0 / 2.82)));
    assert!(cert.verdict.passed());
}

/// A square polynomial system with the planted root `r`.
fn planted(rng: &mut ChaCha8Rng, n: usize) -> (IngredientSystem, Vec<QComplex>) {
    let root: Vec<QComplex> = (0..n).map(|_| q(rng.gen_range(-200..200), 100)).collect();
    let shifted: Vec<MultivariatePolynomial> = (0..n)
        .map(|j| MultivariatePolynomial::var(n, j).sub(&MultivariatePolynomial::constant(n, root[j].clone())))
        .collect();
    let mut polys = Vec::new();
    for i in 0..n {
        let mut p = MultivariatePolynomial::zero(n);
        for (j, s) in shifted.iter().enumerate() {
            let a = if i == j { rng.gen_range(3..9) } else { rng.gen_range(-2..=2) };
            p = p.add(&s.scale(&QComplex::from_i64(a)));
            let b = rng.gen_range(-2..=2);
            if b != 0 {
                p = p.add(&s.mul(s).scale(&q(b, 4)));
            }
        }
        polys.push(p);
    }
    let names = (0..n).map(|i| format!("x{i}")).collect();
    (IngredientSystem::new(names, polys, vec![], Mode::Real).unwrap(), root)
}

#[test]
fn known_roots_stay_inside_the_image() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut images = 0;
    for _ in 0..150 {
        let n = rng.gen_range(1..=3);
        let (sys, root) = planted(&mut rng, n);
        let entries = root
            .iter()
            .map(|r| {
                let lo = Rational::from(&r.re - Rational::from((rng.gen_range(1..100), 100)));
                let hi = Rational::from(&r.re + Rational::from((rng.gen_range(1..100), 100)));
                ComplexInterval::from_real(RealInterval::from_rational(&lo, PREC).hull(&RealInterval::from_rational(&hi, PREC)))
            })
            .collect();
        let region = IntervalBox::new(entries).unwrap();
        let cert = krawczyk_test(&sys, &region, None, None);
        if let Some(img) = &cert.image {
            images += 1;
            assert!(img.contains_exact(&root));
        }
        if cert.verdict.passed() {
            assert!(region.contains_exact(&root));
        }
    }
    assert!(images > 100);
}

#[test]
fn boxes_holding_two_roots_never_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..200 {
        let a = rng.gen_range(-100..100);
        let b = a + rng.gen_range(1..50);
        // (x − a/100)(x − b/100)
        let poly = format!("(x - {a}/100)*(x - {b}/100)");
        let sys = one_var(&poly, "real");
        let lo = (a - rng.gen_range(0..40), 100);
        let hi = (b + rng.gen_range(0..40), 100);
        let cert = krawczyk_test(&sys, &interval(lo, hi), None, None);
        assert!(!cert.verdict.passed());
    }
}

#[test]
fn erf_one_decimal_box_passes_and_zero_decimal_box_fails() {
    let (file, sys) = bundled("erf.json");
    let x = file.point("start").unwrap();
    let one = certify_krawczyk(&sys, &round_point(&x, 1), &sweep_box_side(1), PREC).unwrap();
    assert!(one.verdict.passed());
    assert!(one.contraction.as_ref().unwrap() < &1);
    let zero = certify_krawczyk(&sys, &round_point(&x, 0), &sweep_box_side(0), PREC).unwrap();
    assert!(!zero.verdict.passed());
    assert!(zero.failure.is_some());
}

#[test]
fn ellipse_two_digit_box_passes() {
    let (file, sys) = bundled("ellipse.json");
    let x = round_point(&file.point("refined").unwrap(), 2);
    let cert = certify_krawczyk(&sys, &x, &sweep_box_side(2), PREC).unwrap();
    assert!(cert.verdict.passed(), "{:?}", cert.failure);
    let refined = file.point("refined").unwrap();
    assert!(cert.region.contains_exact(&refined));
}

#[test]
fn oracle_failures_are_reported_as_failures() {
    let (_, sys) = bundled("erf.json");
    let wrong = IntervalBox::new(vec![ComplexInterval::zero(PREC); 2]).unwrap();
    let cert = krawczyk_test(&sys, &wrong, None, None);
    assert_eq!(cert.failure, Some(FailureReason::OracleError));
    let region = interval((0, 1), (1, 1));
    let outside = krawczyk_test(&one_var("x^2 - 2", "real"), &region, Some(&[q(3, 1)]), None);
    assert!(!outside.verdict.passed());
}

#[test]
fn singular_midpoint_jacobian_fails_on_contraction() {
    let sys = one_var("x^2 - 1/100", "real");
    let region = interval((-1, 1), (1, 1));
    let cert = krawczyk_test(&sys, &region, None, None);
    assert_eq!(cert.failure, Some(FailureReason::ContractionFailed));
}

fn width(b: &IntervalBox) -> f64 {
    b.max_width().to_f64()
}

#[test]
fn quadratic_refinement_converges_within_eight_steps() {
    let sys = one_var("x^2 - 2", "real");
    let region = interval((140, 100), (142, 100));
    let cert = krawczyk_test(&sys, &region, None, None);
    assert!(cert.verdict.passed());

    let mut current = region.clone();
    let mut steps = 0;
    while width(&current) >= 1e-10 {
        let y = current.mid_exact();
        let pre = default_preconditioner(&sys, &y, PREC).unwrap().unwrap();
        let img = krawczyk_image(&sys, &current, &y, &pre).unwrap();
        current = img.intersect(&current).unwrap().unwrap();
        assert!(current.get(0).re.contains_value(&sqrt2()));
        steps += 1;
        assert!(steps <= 8, "width {} after {steps} steps", width(&current));
    }

    let refined = refine_root(&sys, &cert);
    assert!(width(&refined) < 1e-10);
    assert!(refined.get(0).re.contains_value(&sqrt2()));
    assert!(region.contains(&refined));
}

#[test]
fn tight_box_is_a_fixed_point() {
    let sys = one_var("x^2 - 2", "real");
    let cert = krawczyk_test(&sys, &interval((140, 100), (142, 100)), None, None);
    let tight = refine_root(&sys, &cert);
    let again = krawczyk_test(&sys, &tight, None, None);
    let same = refine_root(&sys, &again);
    assert!(tight.contains(&same));
    assert!(width(&same) >= 0.5 * width(&tight));
    let failed = krawczyk_test(&sys, &interval((-1, 1), (1, 1)), None, None);
    assert_eq!(refine_root(&sys, &failed), failed.region);
}

#[test]
fn refinement_keeps_planted_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut refined_any = 0;
    for _ in 0..60 {
        let n = rng.gen_range(1..=3);
        let (sys, root) = planted(&mut rng, n);
        let center: Vec<QComplex> =
            root.iter().map(|r| QComplex::real(Rational::from(&r.re + Rational::from((rng.gen_range(-5..=5), 1000))))).collect();
        let region = region_around(&sys, &center, &Rational::from((1, 20)), PREC).unwrap();
        let cert = krawczyk_test(&sys, &region, None, None);
        if cert.verdict.passed() {
            let r = refine_root(&sys, &cert);
            assert!(r.contains_exact(&root));
            assert!(width(&r) < 1e-20);
            refined_any += 1;
        }
    }
    assert!(refined_any > 20);
}

#[test]
fn complex_pass_implies_real_pass() {
    let polys = ["x^2 - 2", "x^3 - x - 1", "(x - 1/3)*(x + 2)"];
    let centers = [q(141, 100), q(132, 100), q(33, 100)];
    for (p, c) in polys.iter().zip(&centers) {
        let real = one_var(p, "real");
        let cplx = one_var(p, "complex");
        for k in 1..=40 {
            let side = Rational::from((k, 100));
            let rc = certify_krawczyk(&cplx, std::slice::from_ref(c), &side, PREC).unwrap();
            let rr = certify_krawczyk(&real, std::slice::from_ref(c), &side, PREC).unwrap();
            if rc.verdict.passed() {
                assert!(rr.verdict.passed(), "{p} side {k}/100");
            }
        }
    }
}

#[test]
fn spoiling_the_preconditioner_does_not_create_passes() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let mut counts = [0usize; 3];
    for _ in 0..80 {
        let n = rng.gen_range(1..=3);
        let (sys, root) = planted(&mut rng, n);
        let region = region_around(&sys, &root, &Rational::from((rng.gen_range(1..40), 100)), PREC).unwrap();
        let y = region.mid_exact();
        let Some(best) = default_preconditioner(&sys, &y, PREC).unwrap() else { continue };
        let pass_with = |noise: f64, rng: &mut ChaCha8Rng| {
            let data = (0..n * n)
                .map(|k| {
                    let v = best.get(k / n, k % n);
                    Complex64::new(v.re * (1.0 + noise * rng.gen_range(-1.0..1.0)), 0.0)
                })
                .collect();
            let pre = PointMatrix::new(n, n, data).unwrap();
            krawczyk_test(&sys, &region, None, Some(&pre)).verdict.passed()
        };
        let results = [pass_with(0.0, &mut rng), pass_with(0.3, &mut rng), pass_with(0.9, &mut rng)];
        for (c, r) in counts.iter_mut().zip(results) {
            *c += r as usize;
        }
    }
    assert!(counts[0] >= counts[1] && counts[1] >= counts[2], "{counts:?}");
}
