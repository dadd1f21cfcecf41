use num_complex::Complex64;
use rug::float::{Round, Special};
use rug::Float;

use super::DFiniteFunction;
use crate::error::{Error, Result};
use crate::exact::{QComplex, UPoly};
use crate::interval::{ComplexInterval, RealInterval};

const DISC_PREC: u32 = 128;

/// Closed disc known to contain some roots of the leading coefficient; the
/// union of all discs contains every root.
#[derive(Clone, Debug)]
pub(crate) struct RootDisc {
    pub center: QComplex,
    pub radius: Float,
}

/// Simultaneous root approximation (Aberth's method) in double precision.
fn aberth(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let bound = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(bound * 0.5, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    let eval = |x: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += Complex64::new(1.0, 0.0) / (z[i] - z[j]);
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-17 {
            break;
        }
    }
    z
}

/// Inclusion discs `D(z_j, n |W_j|)` for the roots of the squarefree part of
/// `p`, where `W_j = q(z_j) / Π_{k≠j} (z_j − z_k)` is the Weierstrass correction
/// of the monic squarefree factor `q` at approximations `z_j`.
pub(crate) fn root_discs(p: &UPoly) -> Option<Vec<RootDisc>> {
    let q = p.squarefree();
    let n = q.degree()?;
    if n == 0 {
        return Some(Vec::new());
    }
    let approx = aberth(&q.to_c64());
    let centers: Vec<QComplex> = approx.iter().map(|z| QComplex::from_c64(*z)).collect();
    for i in 0..n {
        for j in 0..i {
            if centers[i] == centers[j] {
                return None;
            }
        }
    }
    let pts: Vec<ComplexInterval> = centers.iter().map(|c| c.to_interval(DISC_PREC)).collect();
    let scale = RealInterval::from_int(n as i64, DISC_PREC);
    let mut discs = Vec::with_capacity(n);
    for i in 0..n {
        let mut den = ComplexInterval::one(DISC_PREC);
        for j in 0..n {
            if j != i {
                den = &den * &(&pts[i] - &pts[j]);
            }
        }
        let w = q.eval_interval(&pts[i]).div(&den).ok()?;
        let rad = (&RealInterval::point(w.mag()) * &scale).hi().clone();
        if !rad.is_finite() {
            return None;
        }
        discs.push(RootDisc {
            center: centers[i].clone(),
            radius: rad,
        });
    }
    Some(discs)
}

/// `(|p(x)| / |a_s|) / (|x| + B)^(s-1)` with `B` the Cauchy root bound.
fn coarse_bound(p: &UPoly, x: &ComplexInterval, prec: u32) -> Float {
    let s = p.degree().unwrap_or(0);
    let lead = p.leading().to_interval(prec);
    let lead_abs = lead.abs();
    let mut cauchy = RealInterval::zero(prec);
    for c in &p.coeffs()[..s] {
        let ratio = c.to_interval(prec).abs().div(&lead_abs).expect("nonzero leading coefficient");
        if *ratio.hi() > *cauchy.hi() {
            cauchy = RealInterval::point(ratio.hi().clone());
        }
    }
    let cauchy = &cauchy + &RealInterval::one(prec);
    let val = p.eval_interval(x).abs();
    let num = val.div(&lead_abs).expect("nonzero leading coefficient");
    let den = (&x.abs() + &cauchy).powi(s.saturating_sub(1) as u32);
    match num.div(&den) {
        Ok(v) => v.lo().clone(),
        Err(_) => Float::with_val(prec, 0),
    }
}

/// Lower bound on the distance from `x` to the nearest root of the leading
/// coefficient `p_r`; `+inf` when `p_r` is constant.
pub fn radius_lower_bound(g: &DFiniteFunction, x: &QComplex, prec: u32) -> Result<Float> {
    let p = g.leading();
    if p.eval(x).is_zero() {
        return Err(Error::SingularExpansionPoint { point: x.to_string() });
    }
    if p.degree() == Some(0) {
        return Ok(Float::with_val(prec, Special::Infinity));
    }
    let xi = x.to_interval(prec.max(DISC_PREC));
    let mut best = coarse_bound(p, &xi, prec.max(DISC_PREC));
    if let Some(discs) = g.root_discs() {
        let mut refined = Float::with_val(prec.max(DISC_PREC), Special::Infinity);
        for d in discs {
            let dist = (&xi - &d.center.to_interval(prec.max(DISC_PREC))).mig();
            let v = Float::with_val_round(prec.max(DISC_PREC), &dist - &d.radius, Round::Down).0;
            if v < refined {
                refined = v;
            }
        }
        if refined > best {
            best = refined;
        }
    }
    if best < 0 {
        best = Float::with_val(prec, 0);
    }
    Ok(Float::with_val_round(prec, &best, Round::Down).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn q(n: i64) -> QComplex {
        QComplex::from_i64(n)
    }

    fn with_leading(p: UPoly, base: QComplex) -> DFiniteFunction {
        DFiniteFunction::new(vec![UPoly::zero(), p], base, vec![ComplexInterval::one(64)]).unwrap()
    }

    #[test]
    fn constant_leading_coefficient_gives_infinity() {
        let g = with_leading(UPoly::constant(q(1)), q(0));
        assert!(radius_lower_bound(&g, &q(-1), 64).unwrap().is_infinite());
    }

    #[test]
    fn double_root_at_origin() {
        let g = with_leading(UPoly::new(vec![q(0), q(0), q(1)]), q(1));
        let x = QComplex::real(Rational::from((464481, 100000)));
        let r = radius_lower_bound(&g, &x, 64).unwrap().to_f64();
        assert!(r <= 4.64481 && r > 0.99 * 4.64481, "{r}");
        assert!(matches!(radius_lower_bound(&g, &q(0), 64), Err(Error::SingularExpansionPoint { .. })));
    }

    #[test]
    fn never_exceeds_true_distance() {
        // (t - 1)(t + 2)(t - 3i)
        let i = QComplex::new(Rational::new(), Rational::from(1));
        let f1 = UPoly::new(vec![q(-1), q(1)]);
        let f2 = UPoly::new(vec![q(2), q(1)]);
        let f3 = UPoly::new(vec![i.scale(&Rational::from(-3)), q(1)]);
        let p = f1.mul(&f2).mul(&f3);
        let g = with_leading(p, q(0));
        let roots = [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0), Complex64::new(0.0, 3.0)];
        for (re, im) in [(0.0, 0.0), (0.5, 0.25), (-1.0, 2.0), (0.9, 0.0), (3.0, -1.0)] {
            let x = QComplex::from_c64(Complex64::new(re, im));
            let r = radius_lower_bound(&g, &x, 64).unwrap().to_f64();
            let truth = roots.iter().map(|z| (z - Complex64::new(re, im)).norm()).fold(f64::MAX, f64::min);
            assert!(r <= truth * (1.0 + 1e-12) && r > 0.999 * truth, "x = {re}+{im}i: {r} vs {truth}");
        }
    }
}
