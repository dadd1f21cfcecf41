use std::collections::BTreeMap;
use std::fmt;

use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::exact::QComplex;
use crate::interval::{ComplexInterval, IntervalBox, RealInterval};

/// Polynomial in `nvars` variables with exact Gaussian-rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct MultivariatePolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, QComplex>,
}

impl MultivariatePolynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: QComplex) -> Self {
        Self::from_terms(nvars, [(vec![0; nvars], c)]).expect("exponent length matches")
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::from_terms(nvars, [(e, QComplex::one())]).expect("exponent length matches")
    }

    /// Sums repeated exponents and drops zero coefficients.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, QComplex)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, found: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: QComplex) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&e) {
            Some(old) => old.add(&c),
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, sum);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, QComplex> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(QComplex::is_real)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                p.add_term(e, ca.mul(cb));
            }
        }
        p
    }

    pub fn scale(&self, k: &QComplex) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c.mul(k));
        }
        p
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(self.nvars, QComplex::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// `∂p/∂x_k`.
    pub fn partial(&self, k: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[k] -= 1;
            p.add_term(f, c.scale(&Rational::from(e[k])));
        }
        p
    }

    pub fn eval_exact(&self, x: &[QComplex]) -> QComplex {
        let mut acc = QComplex::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t = t.mul(xi);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Enclosure of `p(I)` by nested Horner evaluation, one variable at a time.
    pub fn eval_box(&self, x: &IntervalBox) -> Result<ComplexInterval> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, found: x.len() });
        }
        let terms: Vec<(&Vec<u32>, &QComplex)> = self.terms.iter().collect();
        let v = horner(&terms, 0, x.entries(), x.prec());
        Ok(if self.is_real() && x.is_real() { v.real_part() } else { v })
    }

    /// Mean-value form `p(m) + Σ_k ∂_k p(I)(I_k − m_k)` intersected with the Horner enclosure.
    pub fn eval_box_centered(&self, x: &IntervalBox) -> Result<ComplexInterval> {
        let plain = self.eval_box(x)?;
        let prec = x.prec();
        let m = x.mid_exact();
        let mut acc = self.eval_exact(&m).to_interval(prec);
        for (k, mk) in m.iter().enumerate() {
            let d = self.partial(k);
            if d.is_zero() {
                continue;
            }
            let dx = x.get(k).sub(&mk.to_interval(prec));
            acc = &acc + &(&d.eval_box(x)? * &dx);
        }
        let acc = if self.is_real() && x.is_real() { acc.real_part() } else { acc };
        Ok(plain.intersect(&acc).unwrap_or(plain))
    }

    /// Exact `‖p‖²` in the Bombieri–Weyl norm for total degree `d`.
    pub fn bw_norm_sq(&self) -> Rational {
        let d = self.degree();
        let fact = |k: u32| Integer::from(Integer::factorial(k));
        let mut s = Rational::new();
        for (e, c) in &self.terms {
            let total: u32 = e.iter().sum();
            let mut w = fact(d - total);
            for &k in e {
                w *= fact(k);
            }
            s += Rational::from(w) * c.abs2();
        }
        s / Rational::from(fact(d))
    }

    /// Upper bound on the Bombieri–Weyl norm.
    pub fn bw_norm(&self, prec: u32) -> Float {
        sqrt_up(&self.bw_norm_sq(), prec)
    }
}

/// Upward-rounded square root of a nonnegative rational.
pub(crate) fn sqrt_up(q: &Rational, prec: u32) -> Float {
    let v = RealInterval::from_rational(q, prec);
    match v.sqrt() {
        Ok(s) => s.hi().clone(),
        Err(_) => Float::with_val_round(prec, Float::with_val_round(prec, q, Round::Up).0.sqrt_ref(), Round::Up).0,
    }
}

/// Terms share the exponents of variables `< v` and are sorted by exponent of `v`.
fn horner(terms: &[(&Vec<u32>, &QComplex)], v: usize, x: &[ComplexInterval], prec: u32) -> ComplexInterval {
    if terms.is_empty() {
        return ComplexInterval::zero(prec);
    }
    if v == x.len() {
        return terms[0].1.to_interval(prec);
    }
    let mut groups: Vec<(u32, ComplexInterval)> = Vec::new();
    let mut start = 0;
    while start < terms.len() {
        let k = terms[start].0[v];
        let mut end = start;
        while end < terms.len() && terms[end].0[v] == k {
            end += 1;
        }
        groups.push((k, horner(&terms[start..end], v + 1, x, prec)));
        start = end;
    }
    let xv = &x[v];
    let (mut exp, mut acc) = groups.pop().expect("nonempty");
    while let Some((k, c)) = groups.pop() {
        acc = &(&acc * &xv.powi(exp - k)) + &c;
        exp = k;
    }
    if exp > 0 {
        acc = &acc * &xv.powi(exp);
    }
    acc
}

fn fmt_coeff(c: &QComplex) -> String {
    if c.im == 0 {
        c.re.to_string()
    } else {
        format!("({c})")
    }
}

impl fmt::Display for MultivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", fmt_coeff(c))?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> MultivariatePolynomial {
        MultivariatePolynomial::var(2, i)
    }

    fn c(v: i64) -> MultivariatePolynomial {
        MultivariatePolynomial::constant(2, QComplex::from_i64(v))
    }

    #[test]
    fn arithmetic_and_partials() {
        let p = x(0).pow(2).mul(&x(1)).add(&c(3));
        assert_eq!(p.degree(), 3);
        let dp = p.partial(0);
        assert_eq!(dp, x(0).mul(&x(1)).scale(&QComplex::from_i64(2)));
        assert!(p.sub(&p).is_zero());
        let v = p.eval_exact(&[QComplex::from_i64(2), QComplex::from_i64(5)]);
        assert_eq!(v, QComplex::from_i64(23));
    }

    #[test]
    fn bombieri_weyl_examples() {
        let one = MultivariatePolynomial::var(1, 0);
        assert_eq!(one.pow(2).bw_norm_sq(), 1);
        let lin = one.add(&MultivariatePolynomial::constant(1, QComplex::one()));
        assert_eq!(lin.bw_norm_sq(), 2);
        let k = MultivariatePolynomial::constant(1, QComplex::from_i64(-7));
        assert_eq!(k.bw_norm(53), 7);
        // (x + y)^2 has norm^2 = 1 + 4/2 + 1 = 4
        assert_eq!(x(0).add(&x(1)).pow(2).bw_norm_sq(), 4);
    }

    #[test]
    fn horner_matches_exact_on_points() {
        let p = x(0).pow(3).sub(&x(0).mul(&x(1)).scale(&QComplex::from_i64(4))).add(&c(2));
        let pt = [QComplex::real(Rational::from((1, 4))), QComplex::from_i64(-3)];
        let b = IntervalBox::from_exact(&pt, 64).unwrap();
        let v = p.eval_box(&b).unwrap();
        assert!(v.contains_exact(&p.eval_exact(&pt)));
        assert!(v.is_point());
    }

    #[test]
    fn square_minus_two_on_interval() {
        let x = MultivariatePolynomial::var(1, 0);
        let p = x.pow(2).sub(&MultivariatePolynomial::constant(1, QComplex::from_i64(2)));
        let lo = Float::with_val(53, 1.4);
        let hi = Float::with_val(53, 1.5);
        let b = IntervalBox::new(vec![ComplexInterval::from_real(RealInterval::new(lo, hi).unwrap())]).unwrap();
        let v = p.eval_box(&b).unwrap();
        assert!(v.re.lo().to_f64() >= -0.04 - 1e-12 && v.re.hi().to_f64() <= 0.25 + 1e-12);
        let w = p.eval_box_centered(&b).unwrap();
        assert!(w.re.width() <= v.re.width());
    }
}
