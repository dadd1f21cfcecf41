use rug::{Float, Rational};

use super::DFiniteFunction;
use crate::error::{Error, Result};
use crate::exact::{QComplex, UPoly};
use crate::interval::{ComplexInterval, RealInterval};

/// Recurrence for the Taylor coefficients `a_k` of any solution at a center:
///
/// `D(k) a_k = -Σ_{t=1..s} N_t(k) a_{k-t}` for `k >= r`, with
/// `D(k) = lead · k(k-1)...(k-r+1)` and coefficients of negative index zero.
#[derive(Clone, Debug)]
pub struct Recurrence {
    order: usize,
    lead: QComplex,
    numerators: Vec<UPoly>,
}

/// `(x + 1)(x + 2)...(x + i)` with `x = k + offset`, as a polynomial in `k`.
fn rising(i: usize, offset: i64) -> UPoly {
    let mut p = UPoly::constant(QComplex::one());
    for l in 1..=i as i64 {
        p = p.mul(&UPoly::new(vec![QComplex::from_i64(offset + l), QComplex::one()]));
    }
    p
}

pub fn derive_recurrence(g: &DFiniteFunction, center: &QComplex) -> Result<Recurrence> {
    let r = g.order();
    let shifted: Vec<UPoly> = g.coeffs().iter().map(|p| p.taylor_shift(center)).collect();
    let lead = shifted[r].coeff(0);
    if lead.is_zero() {
        return Err(Error::SingularExpansionPoint { point: center.to_string() });
    }
    let mut s = 0;
    for (i, q) in shifted.iter().enumerate() {
        if let Some(d) = q.degree() {
            s = s.max(r - i + d);
        }
    }
    let mut numerators = vec![UPoly::zero(); s];
    for (i, q) in shifted.iter().enumerate() {
        for (j, c) in q.coeffs().iter().enumerate() {
            let t = r - i + j;
            if t == 0 || c.is_zero() {
                continue;
            }
            let term = rising(i, -(r as i64) - j as i64).scale(c);
            numerators[t - 1] = numerators[t - 1].add(&term);
        }
    }
    Ok(Recurrence {
        order: r,
        lead,
        numerators,
    })
}

impl Recurrence {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Largest index distance `s` appearing in the recurrence.
    pub fn shift(&self) -> usize {
        self.numerators.len()
    }

    /// `N_t` as a polynomial in `k`, for `t = 1..=s`.
    pub fn numerator(&self, t: usize) -> &UPoly {
        &self.numerators[t - 1]
    }

    /// `D(k)`.
    pub fn leading_at(&self, k: u64) -> QComplex {
        let mut d = self.lead.clone();
        for i in 0..self.order as u64 {
            d = d.scale(&Rational::from(k as i64 - i as i64));
        }
        d
    }

    /// Exact multipliers `m_t = -N_t(k)/D(k)` so that `a_k = Σ m_t a_{k-t}`; requires `k >= r`.
    pub fn multipliers(&self, k: u64) -> Vec<QComplex> {
        assert!(k as usize >= self.order, "recurrence used below its order");
        let inv = self.leading_at(k).recip().expect("ordinary point").neg();
        let kq = QComplex::from_i64(k as i64);
        self.numerators.iter().map(|n| n.eval(&kq).mul(&inv)).collect()
    }

    /// Upper bound on `sup_{k >= k0} Σ_t ρ^t |N_t(k)/D(k)|`, or `+inf` when `k0 < r`.
    ///
    /// Each ratio is a rational function of `x = 1/k`; the numerator is enclosed
    /// over `[0, 1/k0]` and the denominator `lead·Π(1 - i x)` is bounded below
    /// by its value at `x = 1/k0`.
    pub fn domination_factor(&self, k0: u64, rho: &Float, prec: u32) -> Float {
        let inf = Float::with_val(prec, rug::float::Special::Infinity);
        let r = self.order;
        if (k0 as usize) < r.max(1) {
            return inf;
        }
        let x_hi = RealInterval::from_rational(&Rational::from((1, k0)), prec);
        let x = ComplexInterval::from_real(
            RealInterval::new(Float::with_val(prec, 0), x_hi.hi().clone()).expect("ordered"),
        );
        let mut den = ComplexInterval::from_exact(&self.lead, prec).abs();
        for i in 1..r as u64 {
            let f = RealInterval::from_rational(&Rational::from((k0 as i64 - i as i64, k0)), prec);
            den = &den * &f;
        }
        let den_lo = den.mig();
        if den_lo.is_zero() {
            return inf;
        }
        let rho_i = RealInterval::point(Float::with_val(prec, rho));
        let mut total = RealInterval::zero(prec);
        let mut rho_pow = RealInterval::one(prec);
        for n in &self.numerators {
            rho_pow = &rho_pow * &rho_i;
            let mut rev: Vec<QComplex> = (0..=r).map(|e| n.coeff(e)).collect();
            rev.reverse();
            let num = UPoly::new(rev).eval_interval(&x);
            let m = RealInterval::point(num.mag());
            total = &total + &(&m * &rho_pow);
        }
        let den_i = RealInterval::point(den_lo);
        match total.div(&den_i) {
            Ok(v) => v.hi().clone(),
            Err(_) => inf,
        }
    }
}
