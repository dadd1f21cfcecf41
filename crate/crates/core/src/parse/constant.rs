use rug::{Float, Rational};

use super::{err, parse_expr, Expr};
use crate::error::{Error, Result};
use crate::exact::QComplex;
use crate::interval::{ComplexInterval, RealInterval};

/// Exact values larger than this many bits are rejected.
const MAX_BITS: u32 = 1 << 18;

/// A parsed constant expression: rationals, decimals, `i`, `pi`, `e`,
/// `sqrt(...)`, field operations, integer powers and an optional trailing
/// `+/- radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    expr: Expr,
}

/// Parses a constant expression.
pub fn parse_constant(src: &str) -> Result<Constant> {
    let expr = parse_expr(src, true)?;
    check_names(&expr)?;
    Ok(Constant { expr })
}

/// Parses a constant that must have an exact Gaussian-rational value.
pub fn parse_exact(src: &str) -> Result<QComplex> {
    let c = parse_constant(src)?;
    match c.exact()? {
        Some(v) => Ok(v),
        None => Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "value must be an exact rational or Gaussian rational".into(),
        }),
    }
}

fn check_names(e: &Expr) -> Result<()> {
    match e {
        Expr::Num(_) => Ok(()),
        Expr::Name(n, at) => match n.as_str() {
            "i" | "pi" | "e" => Ok(()),
            _ => Err(err(*at, format!("unknown constant {n:?}"))),
        },
        Expr::Neg(a) | Expr::Pow(a, _, _) => check_names(a),
        Expr::Sum(ts) => ts.iter().try_for_each(|(_, t)| check_names(t)),
        Expr::Product(fs) => fs.iter().try_for_each(|(_, f)| check_names(f)),
        Expr::Call(n, a, at) => {
            if n != "sqrt" {
                return Err(err(*at, format!("unknown function {n:?}")));
            }
            check_names(a)
        }
        Expr::PlusMinus(a, b) => {
            check_names(a)?;
            check_names(b)
        }
    }
}

fn guard(v: QComplex) -> Result<QComplex> {
    let bits = |q: &Rational| q.numer().significant_bits() + q.denom().significant_bits();
    if bits(&v.re) + bits(&v.im) > MAX_BITS {
        return Err(Error::Domain("constant too large".into()));
    }
    Ok(v)
}

fn exact(e: &Expr) -> Result<Option<QComplex>> {
    Ok(match e {
        Expr::Num(q) => Some(QComplex::real(q.clone())),
        Expr::Name(n, _) => match n.as_str() {
            "i" => Some(QComplex::new(Rational::new(), Rational::from(1))),
            _ => None,
        },
        Expr::Neg(a) => exact(a)?.map(|v| v.neg()),
        Expr::Sum(ts) => {
            let mut acc = QComplex::zero();
            for (neg, t) in ts {
                match exact(t)? {
                    Some(v) => acc = guard(if *neg { acc.sub(&v) } else { acc.add(&v) })?,
                    None => return Ok(None),
                }
            }
            Some(acc)
        }
        Expr::Product(fs) => {
            let mut acc = QComplex::one();
            for (div, f) in fs {
                let v = match exact(f)? {
                    Some(v) => v,
                    None => return Ok(None),
                };
                acc = match div {
                    Some(at) => acc.div(&v).ok_or_else(|| err(*at, "division by zero"))?,
                    None => acc.mul(&v),
                };
                acc = guard(acc)?;
            }
            Some(acc)
        }
        Expr::Pow(a, n, at) => match exact(a)? {
            Some(v) => {
                let base = if *n < 0 { v.recip().ok_or_else(|| err(*at, "zero to a negative power"))? } else { v };
                let mut acc = QComplex::one();
                for _ in 0..n.unsigned_abs() {
                    acc = guard(acc.mul(&base))?;
                }
                Some(acc)
            }
            None => None,
        },
        Expr::Call(..) | Expr::PlusMinus(..) => None,
    })
}

fn enclose(e: &Expr, prec: u32) -> Result<ComplexInterval> {
    Ok(match e {
        Expr::Num(q) => ComplexInterval::from_exact(&QComplex::real(q.clone()), prec),
        Expr::Name(n, at) => match n.as_str() {
            "i" => ComplexInterval::i(prec),
            "pi" => ComplexInterval::from_real(RealInterval::pi(prec)),
            "e" => ComplexInterval::from_real(RealInterval::e(prec)),
            _ => return Err(err(*at, format!("unknown constant {n:?}"))),
        },
        Expr::Neg(a) => enclose(a, prec)?.neg(),
        Expr::Sum(ts) => {
            let mut acc = ComplexInterval::zero(prec);
            for (neg, t) in ts {
                let v = enclose(t, prec)?;
                acc = if *neg { acc.sub(&v) } else { acc.add(&v) };
            }
            acc
        }
        Expr::Product(fs) => {
            let mut acc = ComplexInterval::one(prec);
            for (div, f) in fs {
                let v = enclose(f, prec)?;
                acc = match div {
                    Some(at) => acc.div(&v).map_err(|_| err(*at, "division by an enclosure containing zero"))?,
                    None => acc.mul(&v),
                };
            }
            acc
        }
        Expr::Pow(a, n, at) => {
            let v = enclose(a, prec)?;
            let p = v.powi(n.unsigned_abs() as u32);
            if *n < 0 {
                p.recip().map_err(|_| err(*at, "zero to a negative power"))?
            } else {
                p
            }
        }
        Expr::Call(_, a, at) => enclose(a, prec)?
            .sqrt()
            .map_err(|_| err(*at, "sqrt needs a nonnegative real argument"))?,
        Expr::PlusMinus(a, r) => {
            let center = enclose(a, prec)?;
            let rad = enclose(r, prec)?;
            if !rad.is_real() || *rad.re.lo() < 0 {
                return Err(Error::Domain("radius after +/- must be a nonnegative real".into()));
            }
            let rad: Float = rad.re.hi().clone();
            if center.is_real() {
                center.inflate_real(&rad)
            } else {
                center.inflate(&rad)
            }
        }
    })
}

impl Constant {
    /// The exact value, when the expression has one.
    pub fn exact(&self) -> Result<Option<QComplex>> {
        exact(&self.expr)
    }

    /// Enclosure of the value at `prec` bits.
    pub fn enclose(&self, prec: u32) -> Result<ComplexInterval> {
        if let Some(v) = self.exact()? {
            return Ok(ComplexInterval::from_exact(&v, prec));
        }
        let v = enclose(&self.expr, prec)?;
        if !v.is_finite() {
            return Err(Error::Domain("constant does not evaluate to a finite enclosure".into()));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_over_root_pi() {
        let v = parse_constant("2/sqrt(pi)").unwrap().enclose(128).unwrap();
        let want = 2.0 / std::f64::consts::PI.sqrt();
        assert!(v.re.lo().to_f64() <= want && want <= v.re.hi().to_f64());
        assert!(v.re.width() < 1e-35);
        assert!(v.is_real());
    }

    #[test]
    fn exact_values() {
        assert_eq!(parse_exact("1/2").unwrap(), QComplex::real(Rational::from((1, 2))));
        assert_eq!(parse_exact("-0.25 + 3*i").unwrap(), QComplex::new(Rational::from((-1, 4)), Rational::from(3)));
        assert_eq!(parse_exact("(2/3)^-2").unwrap(), QComplex::real(Rational::from((9, 4))));
        assert!(parse_exact("pi").is_err());
        assert!(parse_exact("1/0").is_err());
    }

    #[test]
    fn plus_minus_widens() {
        let v = parse_constant("-13.5 +/- 1e-3").unwrap().enclose(64).unwrap();
        assert!(v.re.lo().to_f64() <= -13.501 && v.re.hi().to_f64() >= -13.499);
        assert!(v.im.is_zero());
        assert!(parse_constant("1 +/- -1").unwrap().enclose(64).is_err());
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(parse_constant("2*x"), Err(Error::Parse { col: 3, .. })));
        assert!(parse_constant("log(2)").is_err());
    }
}
