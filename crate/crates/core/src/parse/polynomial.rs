use rug::Rational;

use super::{err, parse_expr, Expr};
use crate::error::{Error, Result};
use crate::exact::{QComplex, UPoly};
use crate::poly::MultivariatePolynomial;

const MAX_DEGREE: u32 = 64;
const MAX_TERMS: usize = 20_000;

fn too_big(p: &MultivariatePolynomial) -> Result<()> {
    if p.degree() > MAX_DEGREE || p.terms().len() > MAX_TERMS {
        return Err(Error::Domain(format!(
            "polynomial exceeds degree {MAX_DEGREE} or {MAX_TERMS} terms"
        )));
    }
    let bits = |q: &Rational| q.numer().significant_bits() + q.denom().significant_bits();
    if p.terms().values().any(|c| bits(&c.re) + bits(&c.im) > 1 << 18) {
        return Err(Error::Domain("coefficient too large".into()));
    }
    Ok(())
}

fn mul_checked(a: &MultivariatePolynomial, b: &MultivariatePolynomial) -> Result<MultivariatePolynomial> {
    if a.terms().len().saturating_mul(b.terms().len()) > 50 * MAX_TERMS {
        return Err(Error::Domain("polynomial product too large".into()));
    }
    let p = a.mul(b);
    too_big(&p)?;
    Ok(p)
}

fn constant_value(p: &MultivariatePolynomial) -> Option<QComplex> {
    match p.terms().len() {
        0 => Some(QComplex::zero()),
        1 => {
            let (e, c) = p.terms().iter().next().expect("one term");
            e.iter().all(|&k| k == 0).then(|| c.clone())
        }
        _ => None,
    }
}

fn build(e: &Expr, vars: &[String]) -> Result<MultivariatePolynomial> {
    let n = vars.len();
    let p = match e {
        Expr::Num(q) => MultivariatePolynomial::constant(n, QComplex::real(q.clone())),
        Expr::Name(name, at) => match vars.iter().position(|v| v == name) {
            Some(k) => MultivariatePolynomial::var(n, k),
            None if name == "i" => MultivariatePolynomial::constant(n, QComplex::new(Rational::new(), Rational::from(1))),
            None => return Err(err(*at, format!("unknown variable {name:?}"))),
        },
        Expr::Neg(a) => build(a, vars)?.neg(),
        Expr::Sum(ts) => {
            let mut acc = MultivariatePolynomial::zero(n);
            for (neg, t) in ts {
                let v = build(t, vars)?;
                acc = if *neg { acc.sub(&v) } else { acc.add(&v) };
                too_big(&acc)?;
            }
            acc
        }
        Expr::Product(fs) => {
            let mut acc = MultivariatePolynomial::constant(n, QComplex::one());
            for (div, f) in fs {
                let v = build(f, vars)?;
                acc = match div {
                    Some(at) => {
                        let c = constant_value(&v).ok_or_else(|| err(*at, "can only divide by a constant"))?;
                        let inv = c.recip().ok_or_else(|| err(*at, "division by zero"))?;
                        acc.scale(&inv)
                    }
                    None => mul_checked(&acc, &v)?,
                };
            }
            acc
        }
        Expr::Pow(a, k, at) => {
            let base = build(a, vars)?;
            if *k < 0 {
                let c = constant_value(&base).ok_or_else(|| err(*at, "negative powers need a constant base"))?;
                let inv = c.recip().ok_or_else(|| err(*at, "zero to a negative power"))?;
                let bits = inv.re.numer().significant_bits() + inv.re.denom().significant_bits()
                    + inv.im.numer().significant_bits() + inv.im.denom().significant_bits();
                if bits as u64 * k.unsigned_abs() > 1 << 18 {
                    return Err(err(*at, "power too large"));
                }
                let mut acc = QComplex::one();
                for _ in 0..k.unsigned_abs() {
                    acc = acc.mul(&inv);
                }
                MultivariatePolynomial::constant(n, acc)
            } else {
                if base.degree() as u64 * (*k as u64) > MAX_DEGREE as u64 {
                    return Err(err(*at, format!("degree above {MAX_DEGREE}")));
                }
                let mut acc = MultivariatePolynomial::constant(n, QComplex::one());
                for _ in 0..*k {
                    acc = mul_checked(&acc, &base)?;
                }
                acc
            }
        }
        Expr::Call(name, _, at) => return Err(err(*at, format!("functions such as {name:?} are not allowed in polynomials"))),
        Expr::PlusMinus(..) => return Err(err(0, "'+/-' is not allowed in polynomials")),
    };
    too_big(&p)?;
    Ok(p)
}

/// Parses a polynomial in the named variables; `i` is the imaginary unit unless it names a variable.
pub fn parse_polynomial(src: &str, vars: &[String]) -> Result<MultivariatePolynomial> {
    build(&parse_expr(src, false)?, vars)
}

/// Parses a univariate polynomial in `var`.
pub fn parse_univariate(src: &str, var: &str) -> Result<UPoly> {
    let p = parse_polynomial(src, &[var.to_string()])?;
    let d = p.degree() as usize;
    let mut coeffs = vec![QComplex::zero(); d + 1];
    for (e, c) in p.terms() {
        coeffs[e[0] as usize] = c.clone();
    }
    Ok(UPoly::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn erf_system_rows() {
        let vars = names(&["t1", "t2", "t3", "t4"]);
        let p = parse_polynomial("t1^2 + t2^2 - 4", &vars).unwrap();
        assert_eq!(p.degree(), 2);
        let x = [1, 1, 0, 0].map(QComplex::from_i64);
        assert_eq!(p.eval_exact(&x), QComplex::from_i64(-2));
        let q = parse_polynomial("t3*t4 - 1/2", &vars).unwrap();
        assert_eq!(q.terms().len(), 2);
    }

    #[test]
    fn division_by_constants_only() {
        let vars = names(&["x", "y"]);
        let p = parse_polynomial("(x + y)/2 - 0.5*x", &vars).unwrap();
        assert_eq!(p, MultivariatePolynomial::var(2, 1).scale(&QComplex::real(Rational::from((1, 2)))));
        assert!(parse_polynomial("x/y", &vars).is_err());
        assert!(parse_polynomial("x/(1-1)", &vars).is_err());
        assert!(matches!(parse_polynomial("x + z", &vars), Err(Error::Parse { col: 5, .. })));
    }

    #[test]
    fn univariate_ode_coefficients() {
        let p = parse_univariate("t - t^3", "t").unwrap();
        assert_eq!(p.degree(), Some(3));
        assert_eq!(p.coeff(1), QComplex::one());
        assert_eq!(p.coeff(3), QComplex::from_i64(-1));
        assert!(parse_univariate("0", "t").unwrap().is_zero());
    }

    #[test]
    fn runaway_degree_is_rejected() {
        let vars = names(&["x"]);
        assert!(parse_polynomial("(x+1)^100", &vars).is_err());
        assert!(parse_polynomial("x^64", &vars).is_ok());
    }
}
