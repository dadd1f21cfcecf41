use std::path::PathBuf;

use dfcert::dfinite::DFiniteFunction;
use dfcert::exact::{QComplex, UPoly};
use dfcert::interval::{ComplexInterval, IntervalBox, RealInterval};
use dfcert::parse::{load_system, parse_polynomial, parse_system, SystemFile};
use dfcert::poly::MultivariatePolynomial;
use dfcert::system::{IngredientRow, IngredientSystem, Mode};
use dfcert::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};

const PREC: u32 = 128;

fn bundled(name: &str) -> (SystemFile, IngredientSystem) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("systems").join(name);
    load_system(&path, PREC).unwrap()
}

fn vars(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn real(lo: &Rational, hi: &Rational) -> ComplexInterval {
    ComplexInterval::from_real(RealInterval::from_rational(lo, PREC).hull(&RealInterval::from_rational(hi, PREC)))
}

fn rat(x: f64) -> Rational {
    Rational::from_f64(x).unwrap()
}

/// erf by its Maclaurin series at 400 bits.
fn erf_ref(x: &Rational) -> Float {
    let p = 400;
    let x = Float::with_val(p, x);
    let x2 = Float::with_val(p, x.square_ref());
    let mut term = x.clone();
    let mut sum = Float::with_val(p, 0);
    for n in 0..400u32 {
        sum += Float::with_val(p, &term / (2 * n + 1));
        term *= &x2;
        term /= n + 1;
        term = -term;
    }
    let pi = Float::with_val(p, rug::float::Constant::Pi);
    sum * 2u32 / pi.sqrt()
}

/// The erf-circle residual at a rational point, at 400 bits.
fn erf_system_ref(t: &[Rational]) -> Vec<Float> {
    let p = 400;
    let f = |q: &Rational| Float::with_val(p, q);
    let sq = |q: &Rational| f(&Rational::from(q.square_ref()));
    vec![
        sq(&t[0]) + sq(&t[1]) - 4u32,
        f(&Rational::from(&t[2] * &t[3])) - f(&Rational::from((1, 2))),
        f(&t[2]) - erf_ref(&t[0]),
        f(&t[3]) - erf_ref(&t[1]),
    ]
}

fn encloses(z: &ComplexInterval, v: &Float) -> bool {
    z.re.lo() <= v && v <= z.re.hi() && z.im.contains_zero()
}

#[test]
fn first_coordinate_polynomial_returns_first_interval() {
    let p = MultivariatePolynomial::var(2, 0);
    let b = IntervalBox::new(vec![real(&rat(0.25), &rat(0.75)), real(&rat(-3.0), &rat(9.0))]).unwrap();
    assert_eq!(p.eval_box(&b).unwrap(), *b.get(0));
}

#[test]
fn shifted_square_on_a_short_interval() {
    let p = parse_polynomial("x^2 - 2", &vars(&["x"])).unwrap();
    let b = IntervalBox::new(vec![real(&Rational::from((14, 10)), &Rational::from((15, 10)))]).unwrap();
    let v = p.eval_box(&b).unwrap();
    let eps = 1e-30;
    assert!(v.re.lo().to_f64() >= -0.04 - eps && v.re.hi().to_f64() <= 0.25 + eps);
    assert!(v.re.contains_rational(&Rational::from((-4, 100))));
    assert!(v.re.contains_rational(&Rational::from((1, 4))));
}

#[test]
fn polynomial_box_evaluation_contains_samples() {
    let names = vars(&["x", "y", "z"]);
    let p = parse_polynomial("3*x^3*y - x*z^2 + 7/5*y^2 - z + 1/3", &names).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let mut entries = Vec::new();
        let mut pts = Vec::new();
        for _ in 0..3 {
            let a = Rational::from((rng.gen_range(-300..300), 100));
            let w = Rational::from((rng.gen_range(0..100), 100));
            let b = Rational::from(&a + &w);
            let s = Rational::from(&a + Rational::from(&w * Rational::from((rng.gen_range(0..=64), 64))));
            entries.push(real(&a, &b));
            pts.push(QComplex::real(s));
        }
        let b = IntervalBox::new(entries).unwrap();
        let v = p.eval_box(&b).unwrap();
        let c = p.eval_box_centered(&b).unwrap();
        let exact = p.eval_exact(&pts);
        assert!(v.contains_exact(&exact));
        assert!(c.contains_exact(&exact));
    }
}

#[test]
fn erf_residual_at_start_point_is_small() {
    let (file, sys) = bundled("erf.json");
    let x = file.point("start").unwrap();
    let f = sys.eval_f_point(&x, PREC).unwrap();
    for (i, v) in f.iter().enumerate() {
        assert!(v.mag() < 1e-4, "row {i}: {v}");
        assert!(v.width_max() < 1e-4);
    }
}

#[test]
fn erf_residual_at_refined_point_contains_zero() {
    let (file, sys) = bundled("erf.json");
    let x = file.point("refined").unwrap();
    let f = sys.eval_f_point(&x, PREC).unwrap();
    for v in f.iter() {
        assert!(v.mag() < 1e-20);
    }
}

#[test]
fn erf_residual_matches_series_oracle() {
    let (file, sys) = bundled("erf.json");
    let x = file.point("start").unwrap();
    let t: Vec<Rational> = x.iter().map(|z| z.re.clone()).collect();
    let f = sys.eval_f_point(&x, PREC).unwrap();
    for (v, r) in f.iter().zip(erf_system_ref(&t)) {
        assert!(encloses(v, &r));
    }
}

#[test]
fn erf_ingredient_jacobian_entry_at_origin() {
    let (_, sys) = bundled("erf.json");
    let x = vec![QComplex::zero(), QComplex::from_i64(2), QComplex::zero(), QComplex::one()];
    let pt = sys.jacobian_point(&x, PREC).unwrap();
    let zero = RealInterval::zero(PREC);
    let b = IntervalBox::new(vec![
        ComplexInterval::from_real(zero.clone()),
        ComplexInterval::from_i64_real(2),
        ComplexInterval::from_real(zero),
        ComplexInterval::one(PREC),
    ]);
    let b = b.unwrap();
    let bx = sys.jacobian_box(&b).unwrap();
    let p = 400;
    let target = -Float::with_val(p, 2u32) / Float::with_val(p, rug::float::Constant::Pi).sqrt();
    for j in [&pt, &bx] {
        assert!(encloses(j.get(2, 0), &target));
        assert!(j.get(2, 0).width_max() < 1e-30);
        assert_eq!(j.get(2, 2), &ComplexInterval::one(PREC));
    }
}

trait FromI64Real {
    fn from_i64_real(v: i64) -> Self;
}

impl FromI64Real for ComplexInterval {
    fn from_i64_real(v: i64) -> Self {
        ComplexInterval::from_real(RealInterval::from_int(v, PREC))
    }
}

#[test]
fn linear_rows_give_exact_jacobian_entries() {
    let text = r#"{"schema": "dfcert-system/1", "mode": "real", "variables": ["a", "b"],
        "polynomials": ["3*a - 2/7*b + 1", "a + b - 5"], "ingredients": []}"#;
    let (_, sys) = parse_system(text, PREC).unwrap();
    let b = IntervalBox::new(vec![real(&rat(-1.0), &rat(2.0)), real(&rat(0.5), &rat(4.0))]).unwrap();
    let j = sys.jacobian_box(&b).unwrap();
    let expect = [[(3, 1), (-2, 7)], [(1, 1), (1, 1)]];
    for (i, row) in expect.iter().enumerate() {
        for (k, &(n, d)) in row.iter().enumerate() {
            let e = j.get(i, k);
            assert!(e.contains_exact(&QComplex::real(Rational::from((n, d)))));
            assert!(e.width_max() < 1e-36);
        }
    }
}

#[test]
fn polynomial_only_system_equals_row_evaluation() {
    let text = r#"{"schema": "dfcert-system/1", "mode": "real", "variables": ["u", "v"],
        "polynomials": ["u^2 + v^2 - 1", "u - v^3"], "ingredients": []}"#;
    let (_, sys) = parse_system(text, PREC).unwrap();
    let b = IntervalBox::new(vec![real(&rat(0.5), &rat(0.75)), real(&rat(0.25), &rat(1.0))]).unwrap();
    let f = sys.eval_f_box(&b).unwrap();
    for (i, p) in sys.polys().iter().enumerate() {
        assert_eq!(f.get(i), &p.eval_box(&b).unwrap());
    }
}

fn random_erf_box(rng: &mut ChaCha8Rng) -> (IntervalBox, Vec<Rational>) {
    let mut entries = Vec::new();
    let mut pts = Vec::new();
    for _ in 0..4 {
        let a = Rational::from((rng.gen_range(-2000..2000), 1000));
        let w = Rational::from((rng.gen_range(1..200), 1000));
        let s = Rational::from(&a + Rational::from(&w * Rational::from((rng.gen_range(0..=32), 32))));
        let b = Rational::from(&a + &w);
        entries.push(real(&a, &b));
        pts.push(s);
    }
    (IntervalBox::new(entries).unwrap(), pts)
}

#[test]
fn erf_system_box_evaluation_contains_sampled_values() {
    let (_, sys) = bundled("erf.json");
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..60 {
        let (b, t) = random_erf_box(&mut rng);
        let f = sys.eval_f_box(&b).unwrap();
        for (v, r) in f.iter().zip(erf_system_ref(&t)) {
            assert!(encloses(v, &r));
        }
    }
}

#[test]
fn box_evaluation_is_inclusion_monotone() {
    let (_, sys) = bundled("erf.json");
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..40 {
        let (outer, _) = random_erf_box(&mut rng);
        let inner: Vec<ComplexInterval> = outer
            .iter()
            .map(|e| {
                let lo = e.re.lo().to_rational().unwrap();
                let hi = e.re.hi().to_rational().unwrap();
                let w = Rational::from(&hi - &lo);
                let a = Rational::from(&lo + Rational::from(&w * Rational::from((1, 4))));
                let b = Rational::from(&lo + Rational::from(&w * Rational::from((1, 2))));
                real(&a, &b)
            })
            .collect();
        let inner = IntervalBox::new(inner).unwrap();
        let fo = sys.eval_f_box(&outer).unwrap();
        let fi = sys.eval_f_box(&inner).unwrap();
        // Ingredient enclosures come from truncated series, so compare up to a tiny slack.
        for (o, i) in fo.iter().zip(fi.iter()) {
            let slack = Float::with_val(PREC, 1e-25);
            assert!(o.inflate(&slack).contains(i), "{o} vs {i}");
        }
        let jo = sys.jacobian_box(&outer).unwrap();
        let ji = sys.jacobian_box(&inner).unwrap();
        let slack = Float::with_val(PREC, 1e-25);
        for r in 0..4 {
            for c in 0..4 {
                assert!(jo.get(r, c).inflate(&slack).contains(ji.get(r, c)));
            }
        }
    }
}

#[test]
fn degenerate_box_matches_point_evaluation() {
    let (file, sys) = bundled("erf.json");
    let x = file.point("start").unwrap();
    let b = IntervalBox::from_exact(&x, PREC).unwrap();
    let fp = sys.eval_f_point(&x, PREC).unwrap();
    let fb = sys.eval_f_box(&b).unwrap();
    for (p, q) in fp.iter().zip(fb.iter()) {
        assert!(p.intersect(q).is_some());
        assert!(q.width_max() < 1e-20);
    }
}

#[test]
fn jacobian_agrees_with_central_differences() {
    let (_, sys) = bundled("erf.json");
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let h = Rational::from((1, 1u64 << 30));
    for _ in 0..10 {
        let x: Vec<QComplex> = (0..4).map(|_| QComplex::real(Rational::from((rng.gen_range(-2000..2000), 1000)))).collect();
        let j = sys.jacobian_point(&x, PREC).unwrap();
        for k in 0..4 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] = QComplex::real(Rational::from(&x[k].re + &h));
            xm[k] = QComplex::real(Rational::from(&x[k].re - &h));
            let fp = sys.eval_f_point(&xp, PREC).unwrap();
            let fm = sys.eval_f_point(&xm, PREC).unwrap();
            for i in 0..4 {
                let d = (fp.get(i).re.mid() - fm.get(i).re.mid()) / Float::with_val(PREC, &h) / 2u32;
                let e = j.get(i, k).re.mid();
                let err = Float::with_val(PREC, &d - &e).abs();
                let tol = 1e-6 * e.to_f64().abs().max(1.0);
                assert!(err < tol, "entry ({i},{k}): {d} vs {e}");
            }
        }
    }
}

fn exp_row(output: usize, input: usize) -> IngredientRow {
    let func = DFiniteFunction::new(
        vec![UPoly::constant(QComplex::from_i64(-1)), UPoly::constant(QComplex::one())],
        QComplex::zero(),
        vec![ComplexInterval::one(PREC)],
    )
    .unwrap();
    IngredientRow { output, input, derivative: 0, func }
}

#[test]
fn construction_rejects_malformed_systems() {
    let p = |s: &str, names: &[&str]| parse_polynomial(s, &vars(names)).unwrap();
    let names = ["x", "y"];
    let bad = [
        IngredientSystem::new(vars(&names), vec![p("x", &names)], vec![], Mode::Real),
        IngredientSystem::new(vars(&["x", "x"]), vec![p("x", &names)], vec![exp_row(1, 0)], Mode::Real),
        IngredientSystem::new(vars(&names), vec![p("x", &names)], vec![exp_row(0, 1)], Mode::Real),
        IngredientSystem::new(vars(&names), vec![p("x", &names)], vec![exp_row(1, 1)], Mode::Real),
        IngredientSystem::new(vars(&names), vec![p("x", &names)], vec![exp_row(1, 5)], Mode::Real),
        IngredientSystem::new(vars(&names), vec![p("y + i", &names)], vec![exp_row(1, 0)], Mode::Real),
    ];
    for r in bad {
        assert!(r.is_err());
    }
    let ok = IngredientSystem::new(vars(&names), vec![p("x + y - 2", &names)], vec![exp_row(1, 0)], Mode::Real).unwrap();
    assert_eq!((ok.n(), ok.m(), ok.dim()), (1, 1, 2));
    let two = IngredientSystem::new(
        vars(&["x", "y", "z"]),
        vec![p("x - 1", &["x", "y", "z"])],
        vec![exp_row(1, 0), exp_row(2, 0)],
        Mode::Real,
    )
    .unwrap();
    assert_eq!(two.m(), 2);
    let dup = IngredientSystem::new(
        vars(&["x", "y", "z"]),
        vec![p("x - 1", &["x", "y", "z"])],
        vec![exp_row(1, 0), exp_row(1, 2)],
        Mode::Real,
    );
    assert!(matches!(dup, Err(Error::Row { .. }) | Err(Error::InvalidSystem(_))));
}

#[test]
fn chained_ingredients_evaluate_in_any_order() {
    let names = ["x", "y", "z"];
    let p = parse_polynomial("x - 1/2", &vars(&names)).unwrap();
    // y = exp(x), z = exp(y)
    let sys = IngredientSystem::new(vars(&names), vec![p], vec![exp_row(2, 1), exp_row(1, 0)], Mode::Real).unwrap();
    let half = Float::with_val(400, 0.5);
    let y = Float::with_val(400, half.exp_ref());
    let z = Float::with_val(400, y.exp_ref());
    let yq = QComplex::real(y.to_rational().unwrap());
    let zq = QComplex::real(z.to_rational().unwrap());
    let f = sys.eval_f_point(&[QComplex::real(Rational::from((1, 2))), yq, zq], PREC).unwrap();
    for v in f.iter() {
        assert!(v.mag() < 1e-30);
    }
}
