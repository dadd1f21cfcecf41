use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::{Constant, Round, Special};
use rug::{Float, Rational};

use crate::error::{Error, Result};

/// A closed real interval `[lo, hi]` with MPFR endpoints.
///
/// Every operation rounds the lower endpoint toward `-inf` and the upper
/// endpoint toward `+inf`, so the result always contains the exact image of
/// the operation over the operands. Endpoints may be infinite only for
/// enclosures that report a failed bound.
#[derive(Clone, PartialEq)]
pub struct RealInterval {
    lo: Float,
    hi: Float,
}

pub(crate) fn round_to(prec: u32, v: &Float, round: Round) -> Float {
    Float::with_val_round(prec, v, round).0
}

fn fmin(a: Float, b: Float) -> Float {
    if a.is_nan() {
        return b;
    }
    if b.is_nan() || a <= b {
        a
    } else {
        b
    }
}

fn fmax(a: Float, b: Float) -> Float {
    if a.is_nan() {
        return b;
    }
    if b.is_nan() || a >= b {
        a
    } else {
        b
    }
}

/// Product with the convention `0 * inf = 0` (all members are finite reals).
fn mul_round(prec: u32, a: &Float, b: &Float, round: Round) -> Float {
    if a.is_zero() || b.is_zero() {
        return Float::with_val(prec, 0);
    }
    Float::with_val_round(prec, a * b, round).0
}

impl RealInterval {
    pub fn new(lo: Float, hi: Float) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidInterval(format!("[{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub(crate) fn from_bounds_unchecked(lo: Float, hi: Float) -> Self {
        debug_assert!(!(lo > hi), "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: Float) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero(prec: u32) -> Self {
        Self::point(Float::with_val(prec, 0))
    }

    pub fn one(prec: u32) -> Self {
        Self::point(Float::with_val(prec, 1))
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, v, Round::Down).0;
        let hi = Float::with_val_round(prec, v, Round::Up).0;
        Self { lo, hi }
    }

    /// Exact for `prec >= 53`.
    pub fn from_f64(v: f64, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, v, Round::Down).0;
        let hi = Float::with_val_round(prec, v, Round::Up).0;
        Self { lo, hi }
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, q, Round::Down).0;
        let hi = Float::with_val_round(prec, q, Round::Up).0;
        Self { lo, hi }
    }

    /// `[-r, r]`, with `r` rounded up to `prec`.
    pub fn symmetric(r: &Float, prec: u32) -> Self {
        let hi = round_to(prec, &Float::with_val(r.prec(), r.abs_ref()), Round::Up);
        let lo = -hi.clone();
        Self { lo, hi }
    }

    pub fn entire(prec: u32) -> Self {
        Self {
            lo: Float::with_val(prec, Special::NegInfinity),
            hi: Float::with_val(prec, Special::Infinity),
        }
    }

    pub fn pi(prec: u32) -> Self {
        Self {
            lo: Float::with_val_round(prec, Constant::Pi, Round::Down).0,
            hi: Float::with_val_round(prec, Constant::Pi, Round::Up).0,
        }
    }

    /// Euler's number.
    pub fn e(prec: u32) -> Self {
        let one = Float::with_val(prec, 1);
        Self {
            lo: Float::with_val_round(prec, one.exp_ref(), Round::Down).0,
            hi: Float::with_val_round(prec, one.exp_ref(), Round::Up).0,
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self {
            lo: round_to(prec, &self.lo, Round::Down),
            hi: round_to(prec, &self.hi, Round::Up),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn contains_value(&self, x: &Float) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        self.lo.partial_cmp(q).map_or(false, |o| o != Ordering::Greater)
            && self.hi.partial_cmp(q).map_or(false, |o| o != Ordering::Less)
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &RealInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `other` lies in the open interval `(lo, hi)`.
    pub fn interior_contains(&self, other: &RealInterval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    pub fn width(&self) -> Float {
        let prec = self.prec();
        Float::with_val_round(prec, &self.hi - &self.lo, Round::Up).0
    }

    /// Round-to-nearest midpoint; always a member of the interval.
    pub fn mid(&self) -> Float {
        let prec = self.prec() + 1;
        if !self.is_finite() {
            if self.lo.is_finite() {
                return self.lo.clone();
            }
            if self.hi.is_finite() {
                return self.hi.clone();
            }
            return Float::with_val(prec, 0);
        }
        let mut m = Float::with_val(prec, &self.lo + &self.hi);
        m /= 2;
        m
    }

    /// Upper bound on `sup |x|`.
    pub fn mag(&self) -> Float {
        let a = Float::with_val(self.lo.prec(), self.lo.abs_ref());
        let b = Float::with_val(self.hi.prec(), self.hi.abs_ref());
        fmax(a, b)
    }

    /// Lower bound on `inf |x|`.
    pub fn mig(&self) -> Float {
        if self.contains_zero() {
            return Float::with_val(self.prec(), 0);
        }
        let a = Float::with_val(self.lo.prec(), self.lo.abs_ref());
        let b = Float::with_val(self.hi.prec(), self.hi.abs_ref());
        fmin(a, b)
    }

    pub fn hull(&self, other: &RealInterval) -> Self {
        Self {
            lo: fmin(self.lo.clone(), other.lo.clone()),
            hi: fmax(self.hi.clone(), other.hi.clone()),
        }
    }

    pub fn intersect(&self, other: &RealInterval) -> Option<Self> {
        let lo = fmax(self.lo.clone(), other.lo.clone());
        let hi = fmin(self.hi.clone(), other.hi.clone());
        (lo <= hi).then_some(Self { lo, hi })
    }

    fn result_prec(&self, other: &RealInterval) -> u32 {
        self.prec().max(other.prec())
    }

    pub fn add(&self, other: &RealInterval) -> Self {
        let prec = self.result_prec(other);
        Self {
            lo: Float::with_val_round(prec, &self.lo + &other.lo, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi + &other.hi, Round::Up).0,
        }
    }

    pub fn sub(&self, other: &RealInterval) -> Self {
        let prec = self.result_prec(other);
        Self {
            lo: Float::with_val_round(prec, &self.lo - &other.hi, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi - &other.lo, Round::Up).0,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn mul(&self, other: &RealInterval) -> Self {
        let prec = self.result_prec(other);
        let (a, b, c, d) = (&self.lo, &self.hi, &other.lo, &other.hi);
        let lo = fmin(
            fmin(mul_round(prec, a, c, Round::Down), mul_round(prec, a, d, Round::Down)),
            fmin(mul_round(prec, b, c, Round::Down), mul_round(prec, b, d, Round::Down)),
        );
        let hi = fmax(
            fmax(mul_round(prec, a, c, Round::Up), mul_round(prec, a, d, Round::Up)),
            fmax(mul_round(prec, b, c, Round::Up), mul_round(prec, b, d, Round::Up)),
        );
        Self { lo, hi }
    }

    /// Tighter than `self.mul(self)`: the result is never negative.
    pub fn sqr(&self) -> Self {
        let prec = self.prec();
        if self.lo >= 0 {
            Self {
                lo: mul_round(prec, &self.lo, &self.lo, Round::Down),
                hi: mul_round(prec, &self.hi, &self.hi, Round::Up),
            }
        } else if self.hi <= 0 {
            Self {
                lo: mul_round(prec, &self.hi, &self.hi, Round::Down),
                hi: mul_round(prec, &self.lo, &self.lo, Round::Up),
            }
        } else {
            let m = self.mag();
            Self {
                lo: Float::with_val(prec, 0),
                hi: mul_round(prec, &m, &m, Round::Up),
            }
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let prec = self.prec();
        let one = Float::with_val(prec, 1);
        Ok(Self {
            lo: Float::with_val_round(prec, &one / &self.hi, Round::Down).0,
            hi: Float::with_val_round(prec, &one / &self.lo, Round::Up).0,
        })
    }

    pub fn div(&self, other: &RealInterval) -> Result<Self> {
        if other.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let prec = self.result_prec(other);
        let (a, b, c, d) = (&self.lo, &self.hi, &other.lo, &other.hi);
        let q = |x: &Float, y: &Float, r: Round| Float::with_val_round(prec, x / y, r).0;
        let lo = fmin(
            fmin(q(a, c, Round::Down), q(a, d, Round::Down)),
            fmin(q(b, c, Round::Down), q(b, d, Round::Down)),
        );
        let hi = fmax(
            fmax(q(a, c, Round::Up), q(a, d, Round::Up)),
            fmax(q(b, c, Round::Up), q(b, d, Round::Up)),
        );
        Ok(Self { lo, hi })
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo < 0 {
            return Err(Error::Domain(format!("sqrt of interval with negative part [{}, {}]", self.lo, self.hi)));
        }
        let prec = self.prec();
        Ok(Self {
            lo: Float::with_val_round(prec, self.lo.sqrt_ref(), Round::Down).0,
            hi: Float::with_val_round(prec, self.hi.sqrt_ref(), Round::Up).0,
        })
    }

    pub fn powi(&self, n: u32) -> Self {
        match n {
            0 => Self::one(self.prec()),
            1 => self.clone(),
            _ if n % 2 == 0 => self.powi(n / 2).sqr(),
            _ => self.powi(n - 1).mul(self),
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            lo: self.mig(),
            hi: self.mag(),
        }
    }

    pub fn mul_f(&self, f: &Float) -> Self {
        self.mul(&Self::point(f.clone()))
    }
}

impl fmt::Debug for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

impl fmt::Display for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            crate::interval::fmt_down(&self.lo, 17),
            crate::interval::fmt_up(&self.hi, 17)
        )
    }
}

impl Add for &RealInterval {
    type Output = RealInterval;
    fn add(self, rhs: &RealInterval) -> RealInterval {
        RealInterval::add(self, rhs)
    }
}

impl Sub for &RealInterval {
    type Output = RealInterval;
    fn sub(self, rhs: &RealInterval) -> RealInterval {
        RealInterval::sub(self, rhs)
    }
}

impl Mul for &RealInterval {
    type Output = RealInterval;
    fn mul(self, rhs: &RealInterval) -> RealInterval {
        RealInterval::mul(self, rhs)
    }
}

impl Neg for &RealInterval {
    type Output = RealInterval;
    fn neg(self) -> RealInterval {
        RealInterval::neg(self)
    }
}
