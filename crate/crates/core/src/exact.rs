//! Exact Gaussian-rational scalars and univariate polynomials.

use std::fmt;

use num_complex::Complex64;
use rug::{Float, Rational};

use crate::interval::ComplexInterval;

/// `re + im·i` with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QComplex {
    pub re: Rational,
    pub im: Rational,
}

impl QComplex {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self { re, im: Rational::new() }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn from_i64(v: i64) -> Self {
        Self::real(Rational::from(v))
    }

    /// Exact value of two finite floats; non-finite parts become zero.
    pub fn from_floats(re: &Float, im: &Float) -> Self {
        Self {
            re: re.to_rational().unwrap_or_default(),
            im: im.to_rational().unwrap_or_default(),
        }
    }

    /// Exact value of an `f64` pair; non-finite parts become zero.
    pub fn from_c64(z: Complex64) -> Self {
        let cv = |v: f64| Rational::from_f64(v).unwrap_or_default();
        Self { re: cv(z.re), im: cv(z.im) }
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0().is_eq() && self.im.cmp0().is_eq()
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0().is_eq()
    }

    pub fn add(&self, o: &QComplex) -> Self {
        Self {
            re: Rational::from(&self.re + &o.re),
            im: Rational::from(&self.im + &o.im),
        }
    }

    pub fn sub(&self, o: &QComplex) -> Self {
        Self {
            re: Rational::from(&self.re - &o.re),
            im: Rational::from(&self.im - &o.im),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            re: Rational::from(-&self.re),
            im: Rational::from(-&self.im),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: Rational::from(-&self.im),
        }
    }

    pub fn mul(&self, o: &QComplex) -> Self {
        if self.is_real() && o.is_real() {
            return Self::real(Rational::from(&self.re * &o.re));
        }
        let re = Rational::from(&self.re * &o.re) - Rational::from(&self.im * &o.im);
        let im = Rational::from(&self.re * &o.im) + Rational::from(&self.im * &o.re);
        Self { re, im }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self {
            re: Rational::from(&self.re * k),
            im: Rational::from(&self.im * k),
        }
    }

    pub fn abs2(&self) -> Rational {
        Rational::from(self.re.square_ref()) + Rational::from(self.im.square_ref())
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.abs2();
        Some(Self {
            re: Rational::from(&self.re / &n),
            im: Rational::from(-&self.im) / &n,
        })
    }

    pub fn div(&self, o: &QComplex) -> Option<Self> {
        Some(self.mul(&o.recip()?))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn to_interval(&self, prec: u32) -> ComplexInterval {
        ComplexInterval::from_exact(self, prec)
    }

    /// Canonical text form, suitable as a map key.
    pub fn key(&self) -> String {
        format!("{}|{}", self.re, self.im)
    }
}

impl fmt::Display for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            write!(f, "{}", self.re)
        } else if self.re.cmp0().is_eq() {
            write!(f, "{}*i", self.im)
        } else if self.im.cmp0().is_lt() {
            write!(f, "{} - {}*i", self.re, Rational::from(-&self.im))
        } else {
            write!(f, "{} + {}*i", self.re, self.im)
        }
    }
}

/// Dense univariate polynomial, coefficients from low to high degree.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UPoly {
    coeffs: Vec<QComplex>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<QComplex>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: QComplex) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `t`.
    pub fn t() -> Self {
        Self::new(vec![QComplex::zero(), QComplex::one()])
    }

    pub fn coeffs(&self) -> &[QComplex] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> QComplex {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> QComplex {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_real())
    }

    pub fn eval(&self, x: &QComplex) -> QComplex {
        let mut acc = QComplex::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn eval_interval(&self, x: &ComplexInterval) -> ComplexInterval {
        let prec = x.prec();
        let mut acc = ComplexInterval::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + &c.to_interval(prec);
        }
        acc
    }

    pub fn add(&self, o: &UPoly) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &UPoly) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect())
    }

    pub fn mul(&self, o: &UPoly) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![QComplex::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, k: &QComplex) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.mul(k)).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.scale(&Rational::from(i as u64)))
                .collect(),
        )
    }

    /// `q(s) = p(s + c)`.
    pub fn taylor_shift(&self, c: &QComplex) -> Self {
        let lin = UPoly::new(vec![c.clone(), QComplex::one()]);
        let mut acc = UPoly::zero();
        for a in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&UPoly::constant(a.clone()));
        }
        acc
    }

    /// Euclidean division; `None` when dividing by zero.
    pub fn div_rem(&self, d: &UPoly) -> Option<(UPoly, UPoly)> {
        let dd = d.degree()?;
        let lead_inv = d.leading().recip()?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![QComplex::zero(); rem.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let f = rem.last().unwrap().mul(&lead_inv);
            for (i, c) in d.coeffs.iter().enumerate() {
                rem[k + i] = rem[k + i].sub(&f.mul(c));
            }
            quot[k] = f;
            rem.pop();
            while rem.last().map_or(false, |c| c.is_zero()) {
                rem.pop();
            }
        }
        Some((UPoly::new(quot), UPoly::new(rem)))
    }

    pub fn monic(&self) -> Self {
        match self.leading().recip() {
            Some(inv) => self.scale(&inv),
            None => self.clone(),
        }
    }

    pub fn gcd(&self, o: &UPoly) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Product of the distinct irreducible factors, monic.
    pub fn squarefree(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).map(|(q, _)| q.monic()).unwrap_or_else(|| self.monic())
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.to_c64()).collect()
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*t")?,
                _ => write!(f, "({c})*t^{i}")?,
            }
        }
        Ok(())
    }
}
