use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::Round;
use rug::Float;

use super::real::RealInterval;
use crate::error::{Error, Result};
use crate::exact::QComplex;

/// Axis-aligned rectangle `re + im·i` in the complex plane.
#[derive(Clone, PartialEq)]
pub struct ComplexInterval {
    pub re: RealInterval,
    pub im: RealInterval,
}

impl ComplexInterval {
    pub fn new(re: RealInterval, im: RealInterval) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: RealInterval) -> Self {
        let prec = re.prec();
        Self {
            re,
            im: RealInterval::zero(prec),
        }
    }

    pub fn zero(prec: u32) -> Self {
        Self::from_real(RealInterval::zero(prec))
    }

    pub fn one(prec: u32) -> Self {
        Self::from_real(RealInterval::one(prec))
    }

    pub fn i(prec: u32) -> Self {
        Self::new(RealInterval::zero(prec), RealInterval::one(prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Self::new(RealInterval::from_f64(re, prec), RealInterval::from_f64(im, prec))
    }

    pub fn from_exact(z: &QComplex, prec: u32) -> Self {
        Self::new(
            RealInterval::from_rational(&z.re, prec),
            RealInterval::from_rational(&z.im, prec),
        )
    }

    /// The square `[-r, r] + [-r, r]i`, which contains the closed disk of radius `r`.
    pub fn square(r: &Float, prec: u32) -> Self {
        let s = RealInterval::symmetric(r, prec);
        Self::new(s.clone(), s)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_point(&self) -> bool {
        self.re.is_point() && self.im.is_point()
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn contains_exact(&self, z: &QComplex) -> bool {
        self.re.contains_rational(&z.re) && self.im.contains_rational(&z.im)
    }

    pub fn contains_values(&self, re: &Float, im: &Float) -> bool {
        self.re.contains_value(re) && self.im.contains_value(im)
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &ComplexInterval) -> bool {
        self.re.contains(&other.re) && self.im.contains(&other.im)
    }

    /// `other` lies in the topological interior of the rectangle.
    pub fn interior_contains(&self, other: &ComplexInterval) -> bool {
        self.re.interior_contains(&other.re) && self.im.interior_contains(&other.im)
    }

    pub fn hull(&self, other: &ComplexInterval) -> Self {
        Self::new(self.re.hull(&other.re), self.im.hull(&other.im))
    }

    pub fn intersect(&self, other: &ComplexInterval) -> Option<Self> {
        Some(Self::new(self.re.intersect(&other.re)?, self.im.intersect(&other.im)?))
    }

    /// Exact midpoint rectangle corner-free representative.
    pub fn mid_exact(&self) -> QComplex {
        QComplex::from_floats(&self.re.mid(), &self.im.mid())
    }

    pub fn mid_f64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.mid().to_f64(), self.im.mid().to_f64())
    }

    /// Upper bound on `sup { |z| : z in self }`, attained at a corner.
    pub fn mag(&self) -> Float {
        let prec = self.prec();
        let a = self.re.mag();
        let b = self.im.mag();
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return b;
        }
        let a2 = Float::with_val_round(prec, a.square_ref(), Round::Up).0;
        let b2 = Float::with_val_round(prec, b.square_ref(), Round::Up).0;
        let s = Float::with_val_round(prec, &a2 + &b2, Round::Up).0;
        Float::with_val_round(prec, s.sqrt_ref(), Round::Up).0
    }

    /// Lower bound on `inf { |z| : z in self }`.
    pub fn mig(&self) -> Float {
        let prec = self.prec();
        let a = self.re.mig();
        let b = self.im.mig();
        let a2 = Float::with_val_round(prec, a.square_ref(), Round::Down).0;
        let b2 = Float::with_val_round(prec, b.square_ref(), Round::Down).0;
        let s = Float::with_val_round(prec, &a2 + &b2, Round::Down).0;
        Float::with_val_round(prec, s.sqrt_ref(), Round::Down).0
    }

    /// Enclosure of `{|z|}` as a real interval.
    pub fn abs(&self) -> RealInterval {
        RealInterval::from_bounds_unchecked(self.mig(), self.mag())
    }

    pub fn width_max(&self) -> Float {
        let a = self.re.width();
        let b = self.im.width();
        if a >= b {
            a
        } else {
            b
        }
    }

    pub fn add(&self, o: &ComplexInterval) -> Self {
        Self::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &ComplexInterval) -> Self {
        Self::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.re, -&self.im)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    /// Rectangular product: four real-interval products and two sums.
    pub fn mul(&self, o: &ComplexInterval) -> Self {
        if self.is_real() && o.is_real() {
            let prec = self.prec().max(o.prec());
            return Self::new(&self.re * &o.re, RealInterval::zero(prec));
        }
        let re = &(&self.re * &o.re) - &(&self.im * &o.im);
        let im = &(&self.re * &o.im) + &(&self.im * &o.re);
        Self::new(re, im)
    }

    pub fn scale(&self, k: &RealInterval) -> Self {
        Self::new(&self.re * k, &self.im * k)
    }

    pub fn sqr(&self) -> Self {
        if self.is_real() {
            return Self::from_real(self.re.sqr());
        }
        let re = &self.re.sqr() - &self.im.sqr();
        let two = RealInterval::from_int(2, self.prec());
        let im = &(&self.re * &self.im) * &two;
        Self::new(re, im)
    }

    pub fn powi(&self, n: u32) -> Self {
        match n {
            0 => Self::one(self.prec()),
            1 => self.clone(),
            _ if n % 2 == 0 => self.powi(n / 2).sqr(),
            _ => self.powi(n - 1).mul(self),
        }
    }

    /// `1/z = conj(z) / |z|^2`; fails when the rectangle touches zero.
    pub fn recip(&self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_real() {
            return Ok(Self::from_real(self.re.recip()?));
        }
        let n = &self.re.sqr() + &self.im.sqr();
        let inv = n.recip()?;
        Ok(self.conj().scale(&inv))
    }

    pub fn div(&self, o: &ComplexInterval) -> Result<Self> {
        if o.is_real() {
            if o.re.contains_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(Self::new(self.re.div(&o.re)?, self.im.div(&o.re)?));
        }
        Ok(self.mul(&o.recip()?))
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.is_real() && self.re.lo() >= &0 {
            return Ok(Self::from_real(self.re.sqrt()?));
        }
        Err(Error::Domain("complex square root is only defined here for nonnegative reals".into()))
    }

    /// Drops the imaginary part; valid only when every member is known to be real.
    pub fn real_part(&self) -> Self {
        Self::from_real(self.re.clone())
    }

    /// Widen by the closed square of half-side `r` (contains the disk of radius `r`).
    pub fn inflate(&self, r: &Float) -> Self {
        self.add(&Self::square(r, self.prec()))
    }

    /// Widen the real part only.
    pub fn inflate_real(&self, r: &Float) -> Self {
        Self::new(&self.re + &RealInterval::symmetric(r, self.prec()), self.im.clone())
    }
}

impl fmt::Debug for ComplexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + {:?}i", self.re, self.im)
    }
}

impl fmt::Display for ComplexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{} + {}i", self.re, self.im)
        }
    }
}

impl Add for &ComplexInterval {
    type Output = ComplexInterval;
    fn add(self, rhs: &ComplexInterval) -> ComplexInterval {
        ComplexInterval::add(self, rhs)
    }
}

impl Sub for &ComplexInterval {
    type Output = ComplexInterval;
    fn sub(self, rhs: &ComplexInterval) -> ComplexInterval {
        ComplexInterval::sub(self, rhs)
    }
}

impl Mul for &ComplexInterval {
    type Output = ComplexInterval;
    fn mul(self, rhs: &ComplexInterval) -> ComplexInterval {
        ComplexInterval::mul(self, rhs)
    }
}

impl Neg for &ComplexInterval {
    type Output = ComplexInterval;
    fn neg(self) -> ComplexInterval {
        ComplexInterval::neg(self)
    }
}
